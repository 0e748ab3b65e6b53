//! JSON report records written by the pipelines.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{fit_gronwall_c1, gronwall_envelope};
use crate::stepper::{Model, Termination, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub model: Model,
    pub dim: usize,
    pub grid_n: usize,
    pub termination: Termination,
    pub final_time: f64,
    pub steps: usize,
    pub snapshots: usize,
    pub max_contraction_ratio: f64,
    pub max_picard_iters: u32,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// Energy never rose by more than 1e-10 in one step.
    pub energy_non_increasing: bool,
    pub max_div_l2: f64,
    pub sup_growth: f64,
    pub fitted_gronwall_c1: f64,
    pub gronwall_violated_at_fit: bool,
}

impl SimulateReport {
    pub fn from_trajectory(traj: &Trajectory, dim: usize, grid_n: usize) -> Self {
        let recs = &traj.series.records;
        let c1 = fit_gronwall_c1(&traj.series);
        SimulateReport {
            model: traj.model,
            dim,
            grid_n,
            termination: traj.termination.clone(),
            final_time: traj.series.records.last().map_or(0.0, |r| r.t),
            steps: traj.steps.len(),
            snapshots: traj.snapshots.len(),
            max_contraction_ratio: traj.max_contraction_ratio(),
            max_picard_iters: traj.steps.iter().map(|s| s.picard_iters).max().unwrap_or(0),
            initial_energy: recs.first().map_or(0.0, |r| r.energy),
            final_energy: recs.last().map_or(0.0, |r| r.energy),
            energy_non_increasing: recs.windows(2).all(|w| w[1].energy <= w[0].energy + 1e-10),
            max_div_l2: recs.iter().map(|r| r.div_l2).fold(0.0, f64::max),
            sup_growth: traj.sup_growth(),
            fitted_gronwall_c1: c1,
            gronwall_violated_at_fit: gronwall_envelope(&traj.series, c1).violated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurgersReport {
    pub mu: f64,
    pub dim: usize,
    pub grid_n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub termination: Termination,
    pub l2_error: f64,
    pub max_abs_error: f64,
    pub steps: usize,
    pub max_contraction_ratio: f64,
    pub all_ratios_below_one: bool,
    pub max_picard_iters: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub mu: f64,
    pub lambda: f64,
    pub t_end: f64,
    pub lame_termination: Termination,
    pub l2_difference: f64,
    pub relative_l2_difference: f64,
    pub lame_div_l2: f64,
    /// `‖p_λ − p_ref‖/‖p_ref‖` at `t_end`, with `p_ref` from the pressure
    /// Poisson equation of the reference solution.
    pub pressure_relative_difference: f64,
    pub reference_energy_identity_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationReport {
    pub lambdas: (f64, f64),
    pub error_vs_reference: Option<f64>,
    pub error_ratio: Option<f64>,
}
