//! End-to-end pipelines behind the CLI subcommands. Each writes its
//! artifacts into a run directory and finishes with a manifest.

use std::path::Path;

use log::info;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::initial::build_initial;
use super::manifest::{RunDir, RunManifest};
use super::report::{BurgersReport, CompareReport, ExtrapolationReport, SimulateReport};
use super::snapshot::encode_snapshot;
use crate::diagnostics::energy_identity_residual;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::kernels::{verify_gaussian_bound, BoundFitReport, BoundSampleSpec};
use crate::penalty::{extrapolate_lambda, lambda_sweep, pressure_from_divergence, reference_ns_solve, reference_pressure, SweepReport};
use crate::semigroup::LameParams;
use crate::spectral::{Grid, VectorField};
use crate::stepper::{cole_hopf_oracle, integrate_model, Model, StepperConfig, Termination, ThetaRecipe, Trajectory};

fn termination_tag(t: &Termination) -> &'static str {
    match t {
        Termination::Completed => "completed",
        Termination::BlowUp { .. } => "blow_up",
        Termination::StepTooSmall { .. } => "step_too_small",
    }
}

fn grid_for(cfg: &RunConfig) -> Result<Grid> {
    let exec = if cfg.serial { Exec::Serial } else { Exec::Parallel };
    Ok(Grid::new(cfg.dim, cfg.grid_n)?.with_exec(exec))
}

fn config_echo(cfg: &RunConfig) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(cfg)?)
}

fn write_trajectory(run: &mut RunDir, traj: &Trajectory, mu: f64, lambda: f64) -> Result<()> {
    run.write("diagnostics.csv", traj.series.to_csv())?;
    for (i, s) in traj.snapshots.iter().enumerate() {
        run.write(&format!("snapshots/snap_{i:05}.bin"), encode_snapshot(&s.field, s.t, mu, lambda))?;
    }
    Ok(())
}

#[derive(Debug)]
pub struct SimulateOutcome {
    pub report: SimulateReport,
    pub manifest: RunManifest,
}

/// Integrate the configured model once (`lambda` or `navier_stokes`).
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<SimulateOutcome> {
    let g = grid_for(cfg)?;
    let phi = build_initial(cfg, &g)?;
    let (model, lambda) = if cfg.navier_stokes {
        (Model::NavierStokes { mu: cfg.mu }, f64::INFINITY)
    } else {
        let p = cfg.params()?;
        (Model::Lame(p), p.lambda())
    };
    let mut run = RunDir::create(out)?;
    info!("simulate: {model:?} on {}D N = {}", cfg.dim, cfg.grid_n);
    let traj = integrate_model(&phi, cfg.t_end, model, &cfg.stepper_config())?;
    write_trajectory(&mut run, &traj, cfg.mu, lambda)?;
    let report = SimulateReport::from_trajectory(&traj, cfg.dim, cfg.grid_n);
    run.write_json("report.json", &report)?;
    let manifest = run.finish("simulate", config_echo(cfg)?, termination_tag(&traj.termination))?;
    Ok(SimulateOutcome { report, manifest })
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub report: SweepReport,
    pub manifest: RunManifest,
}

/// λ ladder against the incompressible reference.
pub fn sweep(cfg: &RunConfig, out: &Path) -> Result<SweepOutcome> {
    let lambdas = cfg
        .lambda_list
        .clone()
        .ok_or_else(|| Error::InvalidArgument("sweep needs lambda_list in the config".into()))?;
    let g = grid_for(cfg)?;
    let phi = build_initial(cfg, &g)?;
    let mut run = RunDir::create(out)?;
    let report = lambda_sweep(&phi, cfg.t_end, cfg.mu, &lambdas, &cfg.stepper_config())?;
    run.write_json("sweep_report.json", &report)?;
    if let Some(r) = &report.reference_final {
        run.write("reference_final.bin", encode_snapshot(r, cfg.t_end, cfg.mu, f64::INFINITY))?;
    }
    for (i, e) in report.entries.iter().enumerate() {
        let dir = format!("lambda_{i:02}");
        let mut csv = String::from("t,energy,div_l2\n");
        for ((t, en), d) in e.times.iter().zip(&e.energy_series).zip(&e.div_series) {
            csv.push_str(&format!("{t:e},{en:e},{d:e}\n"));
        }
        run.write(&format!("{dir}/series.csv"), csv)?;
        if let Some(f) = &e.final_field {
            run.write(&format!("{dir}/final.bin"), encode_snapshot(f, e.final_time, cfg.mu, e.lambda))?;
        }
    }
    if let Ok(x) = extrapolate_lambda(&report) {
        run.write_json(
            "extrapolation.json",
            &ExtrapolationReport {
                lambdas: x.lambdas,
                error_vs_reference: x.error_vs_reference,
                error_ratio: x.error_ratio,
            },
        )?;
    }
    let status = if report.entries.iter().all(|e| e.succeeded()) {
        "completed"
    } else {
        "failed"
    };
    let manifest = run.finish("sweep", config_echo(cfg)?, status)?;
    Ok(SweepOutcome { report, manifest })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCheckRequest {
    pub alpha_order: u32,
    pub mu: f64,
    pub lambdas: Vec<f64>,
    pub spec: BoundSampleSpec,
    pub serial: bool,
}

pub fn kernel_check(req: &KernelCheckRequest, out: &Path) -> Result<(BoundFitReport, RunManifest)> {
    let params: Vec<LameParams> = req
        .lambdas
        .iter()
        .map(|&l| LameParams::new(req.mu, l))
        .collect::<Result<_>>()?;
    let exec = if req.serial { Exec::Serial } else { Exec::Parallel };
    let spec = BoundSampleSpec {
        record_samples: true,
        ..req.spec.clone()
    };
    let report = verify_gaussian_bound(req.alpha_order, &params, &spec, exec)?;
    let mut run = RunDir::create(out)?;
    run.write("bound_samples.csv", report.samples_csv())?;
    let summary = BoundFitReport {
        samples: vec![],
        ..report.clone()
    };
    run.write_json("bound_report.json", &summary)?;
    let status = if report.all_finite() { "completed" } else { "failed" };
    let manifest = run.finish("kernel-check", serde_json::to_value(req)?, status)?;
    Ok((summary, manifest))
}

/// Lamé solution at the config λ against the incompressible reference.
pub fn compare(cfg: &RunConfig, out: &Path) -> Result<(CompareReport, RunManifest)> {
    let params = cfg.params()?;
    let g = grid_for(cfg)?;
    let phi = build_initial(cfg, &g)?;
    let sc = cfg.stepper_config();
    let reference = reference_ns_solve(&phi, cfg.t_end, cfg.mu, &sc)?;
    let lame = integrate_model(&phi, cfg.t_end, Model::Lame(params), &sc)?;
    let mut run = RunDir::create(out)?;
    let ul = &lame.last().field;
    let ur = &reference.last().field;
    let diff = ul.sub(ur)?.l2_norm();
    let p_ref = reference_pressure(ur);
    let p_lame = pressure_from_divergence(ul, &params);
    let p_diff = p_lame.field.sub(&p_ref.field)?.l2_norm();
    let report = CompareReport {
        mu: cfg.mu,
        lambda: params.lambda(),
        t_end: cfg.t_end,
        lame_termination: lame.termination.clone(),
        l2_difference: diff,
        relative_l2_difference: diff / ur.l2_norm().max(f64::MIN_POSITIVE),
        lame_div_l2: lame.series.records.last().map_or(f64::NAN, |r| r.div_l2),
        pressure_relative_difference: p_diff / p_ref.l2_norm().max(f64::MIN_POSITIVE),
        reference_energy_identity_residual: energy_identity_residual(&reference, cfg.mu),
    };
    run.write("lame_diagnostics.csv", lame.series.to_csv())?;
    run.write("reference_diagnostics.csv", reference.series.to_csv())?;
    run.write("lame_final.bin", encode_snapshot(ul, lame.last().t, cfg.mu, params.lambda()))?;
    run.write("reference_final.bin", encode_snapshot(ur, reference.last().t, cfg.mu, f64::INFINITY))?;
    run.write_json("compare_report.json", &report)?;
    let manifest = run.finish("compare", config_echo(cfg)?, termination_tag(&lame.termination))?;
    Ok((report, manifest))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurgersRequest {
    pub dim: usize,
    pub grid_n: usize,
    pub mu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub serial: bool,
}

impl Default for BurgersRequest {
    fn default() -> Self {
        BurgersRequest {
            dim: 2,
            grid_n: 64,
            mu: 1.0,
            dt: 1e-3,
            t_end: 0.5,
            serial: false,
        }
    }
}

/// Burgers run (`λ = −μ`) from `θ₀ = 2 + cos x₁` against the Cole-Hopf
/// closed form.
pub fn burgers_run(req: &BurgersRequest) -> Result<(Trajectory, BurgersReport, VectorField)> {
    let exec = if req.serial { Exec::Serial } else { Exec::Parallel };
    let g = Grid::new(req.dim, req.grid_n)?.with_exec(exec);
    let recipe = ThetaRecipe::standard();
    let phi = cole_hopf_oracle(&g, &recipe, req.mu, 0.0)?;
    let params = LameParams::heat(req.mu)?;
    let cfg = StepperConfig::with_dt(req.dt);
    let traj = integrate_model(&phi, req.t_end, Model::Lame(params), &cfg)?;
    let exact = cole_hopf_oracle(&g, &recipe, req.mu, traj.last().t)?;
    let err = traj.last().field.sub(&exact)?;
    let report = BurgersReport {
        mu: req.mu,
        dim: req.dim,
        grid_n: req.grid_n,
        dt: req.dt,
        t_end: req.t_end,
        termination: traj.termination.clone(),
        l2_error: err.l2_norm(),
        max_abs_error: err.max_magnitude(),
        steps: traj.steps.len(),
        max_contraction_ratio: traj.max_contraction_ratio(),
        all_ratios_below_one: traj.steps.iter().all(|s| s.max_ratio < 1.0),
        max_picard_iters: traj.steps.iter().map(|s| s.picard_iters).max().unwrap_or(0),
    };
    Ok((traj, report, exact))
}

pub fn burgers_oracle(req: &BurgersRequest, out: &Path) -> Result<(BurgersReport, RunManifest)> {
    let (traj, report, exact) = burgers_run(req)?;
    let mut run = RunDir::create(out)?;
    write_trajectory(&mut run, &traj, req.mu, -req.mu)?;
    run.write("exact_final.bin", encode_snapshot(&exact, traj.last().t, req.mu, -req.mu))?;
    run.write_json("burgers_report.json", &report)?;
    let manifest = run.finish("burgers-oracle", serde_json::to_value(req)?, termination_tag(&traj.termination))?;
    Ok((report, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::config::parse_config;

    #[test]
    fn simulate_writes_manifested_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config(
            "dim = 2\ngrid_n = 16\nmu = 0.1\nlambda = 10\nt_end = 0.05\ndt_init = 0.01\n\
             initial_condition = \"taylor_green_2d\"\nsnapshot_every = 2\n",
        )
        .unwrap();
        let out = simulate(&cfg, dir.path()).unwrap();
        assert_eq!(out.manifest.termination, "completed");
        assert!(out.manifest.files.contains(&"diagnostics.csv".to_string()));
        assert!(out.manifest.files.iter().any(|f| f.starts_with("snapshots/")));
        for f in &out.manifest.files {
            assert!(dir.path().join(f).is_file(), "{f}");
        }
        assert!(out.report.energy_non_increasing);
    }
}
