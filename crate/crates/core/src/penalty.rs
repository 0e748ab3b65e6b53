//! Incompressible limit of the inertia Lamé system as `λ → ∞`.
//!
//! A sweep integrates the same initial data over a ladder of `λ` values,
//! compares each run against a Leray-projected Navier-Stokes reference on the
//! same grid and step size, and reads off the pressure `p = −(λ+μ) div u`.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::semigroup::LameParams;
use crate::spectral::{divergence, project_solenoidal, ScalarField, VectorField};
use crate::stepper::{integrate, integrate_model, nonlinear_term, Model, StepperConfig, Trajectory};

/// Mean-zero pressure `−(λ+μ) div u`.
#[derive(Debug, Clone)]
pub struct PressureField {
    pub field: ScalarField,
}

impl PressureField {
    pub fn l2_norm(&self) -> f64 {
        self.field.l2_norm()
    }

    /// Hex SHA-256 of the little-endian physical samples.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for v in self.field.physical() {
            h.update(v.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn pressure_from_divergence(u: &VectorField, params: &LameParams) -> PressureField {
    let p = divergence(u).scaled(-params.penalty()).without_mean();
    PressureField { field: p }
}

/// Incompressible pressure of a divergence-free field, from
/// `Δp = −div((u·∇)u)`.
pub fn reference_pressure(u: &VectorField) -> PressureField {
    let g = u.grid();
    let adv = nonlinear_term(u, true);
    let spec = adv.spectral();
    let coeffs: Vec<Complex64> = g.exec().map_collect(g.len(), |i| {
        let k2 = g.k_sq(i);
        if k2 == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let k = g.wavevector(i);
        let kf: Complex64 = (0..g.dim()).map(|a| k[a] * spec[a][i]).sum();
        Complex64::new(0.0, 1.0) * kf / k2
    });
    PressureField {
        field: ScalarField::from_spectral(g, coeffs).expect("same grid"),
    }
}

fn has_gradient_part(phi: &VectorField) -> bool {
    divergence(phi).l2_norm() > 1e-12 * phi.l2_norm().max(f64::MIN_POSITIVE)
}

/// Leray-projected pseudospectral Navier-Stokes. Data with a gradient part
/// is projected first.
pub fn reference_ns_solve(phi: &VectorField, t_end: f64, mu: f64, config: &StepperConfig) -> Result<Trajectory> {
    LameParams::heat(mu)?;
    let start = if has_gradient_part(phi) {
        warn!(
            "reference solve: initial data has ‖div φ‖ = {:e}, projecting",
            divergence(phi).l2_norm()
        );
        project_solenoidal(phi)
    } else {
        phi.clone()
    };
    integrate_model(&start, t_end, Model::NavierStokes { mu }, config)?.require_completed()
}

/// One rung of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub lambda: f64,
    pub final_time: f64,
    pub l2_error_vs_reference: f64,
    /// `max_t ‖u_λ(t) − u_ref(t)‖` over the stored snapshot times.
    pub sup_error_vs_reference: f64,
    pub div_l2: f64,
    pub pressure_l2: f64,
    pub pressure_field_checksum: String,
    pub times: Vec<f64>,
    pub energy_series: Vec<f64>,
    pub div_series: Vec<f64>,
    pub steps: usize,
    pub max_contraction_ratio: f64,
    /// Solver error text if the run failed; the numeric fields are then NaN.
    pub failure: Option<String>,
    #[serde(skip)]
    pub final_field: Option<VectorField>,
    #[serde(skip)]
    pub pressure: Option<PressureField>,
}

impl SweepEntry {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    fn failed(lambda: f64, err: &Error) -> Self {
        SweepEntry {
            lambda,
            final_time: f64::NAN,
            l2_error_vs_reference: f64::NAN,
            sup_error_vs_reference: f64::NAN,
            div_l2: f64::NAN,
            pressure_l2: f64::NAN,
            pressure_field_checksum: String::new(),
            times: vec![],
            energy_series: vec![],
            div_series: vec![],
            steps: 0,
            max_contraction_ratio: f64::NAN,
            failure: Some(format!("{}: {err}", err.kind())),
            final_field: None,
            pressure: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub mu: f64,
    pub t_end: f64,
    pub entries: Vec<SweepEntry>,
    /// Least-squares slope of `log ‖div u_λ‖` against `log(1/λ)`.
    pub div_rate: Option<f64>,
    /// Least-squares slope of `log ‖u_λ − u_ref‖` against `log(1/λ)`.
    pub error_rate: Option<f64>,
    /// `‖p_{λ_{i+1}} − p_{λ_i}‖ / ‖p_{λ_i}‖` for consecutive successful rungs.
    pub pressure_increments: Vec<f64>,
    pub reference_energy_series: Vec<f64>,
    #[serde(skip)]
    pub reference_final: Option<VectorField>,
}

impl SweepReport {
    pub fn successful(&self) -> impl Iterator<Item = &SweepEntry> {
        self.entries.iter().filter(|e| e.succeeded())
    }
}

fn log_log_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = pts
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn run_entry(
    phi: &VectorField,
    t_end: f64,
    params: LameParams,
    config: &StepperConfig,
    reference: &Trajectory,
) -> Result<SweepEntry> {
    let traj = integrate(phi, t_end, &params, config)?.require_completed()?;
    let last = traj.last();
    let l2_err = last.field.sub(&reference.last().field)?.l2_norm();
    let mut sup_err: f64 = 0.0;
    for s in &traj.snapshots {
        if let Some(r) = reference
            .snapshots
            .iter()
            .find(|r| (r.t - s.t).abs() <= 1e-12 * t_end)
        {
            sup_err = sup_err.max(s.field.sub(&r.field)?.l2_norm());
        }
    }
    let pressure = pressure_from_divergence(&last.field, &params);
    Ok(SweepEntry {
        lambda: params.lambda(),
        final_time: last.t,
        l2_error_vs_reference: l2_err,
        sup_error_vs_reference: sup_err,
        div_l2: traj.series.records.last().map_or(f64::NAN, |r| r.div_l2),
        pressure_l2: pressure.l2_norm(),
        pressure_field_checksum: pressure.checksum(),
        times: traj.series.times(),
        energy_series: traj.series.records.iter().map(|r| r.energy).collect(),
        div_series: traj.series.records.iter().map(|r| r.div_l2).collect(),
        steps: traj.steps.len(),
        max_contraction_ratio: traj.max_contraction_ratio(),
        failure: None,
        final_field: Some(last.field.clone()),
        pressure: Some(pressure),
    })
}

/// Integrate from `phi` at every `λ` in `lambdas` and compare with the
/// incompressible reference. Entries run concurrently; a failing entry is
/// flagged and the sweep continues.
pub fn lambda_sweep(
    phi: &VectorField,
    t_end: f64,
    mu: f64,
    lambdas: &[f64],
    config: &StepperConfig,
) -> Result<SweepReport> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty λ list".into()));
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(format!(
            "λ list must be strictly increasing: {lambdas:?}"
        )));
    }
    let params: Vec<LameParams> = lambdas
        .iter()
        .map(|&l| LameParams::new(mu, l))
        .collect::<Result<_>>()?;
    config.validate()?;
    let reference = reference_ns_solve(phi, t_end, mu, config)?;
    let phi = if has_gradient_part(phi) {
        project_solenoidal(phi)
    } else {
        phi.clone()
    };
    let entries: Vec<SweepEntry> = phi.grid().exec().map_collect(params.len(), |i| {
        run_entry(&phi, t_end, params[i], config, &reference).unwrap_or_else(|e| {
            warn!("sweep entry λ = {} failed: {e}", params[i].lambda());
            SweepEntry::failed(params[i].lambda(), &e)
        })
    });

    let ok: Vec<&SweepEntry> = entries.iter().filter(|e| e.succeeded()).collect();
    let div_rate = log_log_slope(&ok.iter().map(|e| (1.0 / e.lambda, e.div_l2)).collect::<Vec<_>>());
    let error_rate = log_log_slope(
        &ok.iter()
            .map(|e| (1.0 / e.lambda, e.l2_error_vs_reference))
            .collect::<Vec<_>>(),
    );
    let mut pressure_increments = Vec::new();
    for w in ok.windows(2) {
        let (a, b) = (w[0].pressure.as_ref().unwrap(), w[1].pressure.as_ref().unwrap());
        pressure_increments.push(b.field.sub(&a.field)?.l2_norm() / a.l2_norm());
    }
    Ok(SweepReport {
        mu,
        t_end,
        entries,
        div_rate,
        error_rate,
        pressure_increments,
        reference_energy_series: reference.series.records.iter().map(|r| r.energy).collect(),
        reference_final: Some(reference.last().field.clone()),
    })
}

#[derive(Debug, Clone)]
pub struct Extrapolation {
    pub field: VectorField,
    /// The two λ values used.
    pub lambdas: (f64, f64),
    pub error_vs_reference: Option<f64>,
    /// Extrapolated error divided by the largest-λ rung's error.
    pub error_ratio: Option<f64>,
}

/// Richardson extrapolation in `1/λ` from the two largest successful rungs,
/// assuming `u_λ ≈ u* + c/λ`.
pub fn extrapolate_lambda(report: &SweepReport) -> Result<Extrapolation> {
    let ok: Vec<&SweepEntry> = report
        .successful()
        .filter(|e| e.final_field.is_some())
        .collect();
    if ok.len() < 2 {
        return Err(Error::InsufficientEntries { needed: 2, got: ok.len() });
    }
    let (a, b) = (ok[ok.len() - 2], ok[ok.len() - 1]);
    let (ua, ub) = (a.final_field.as_ref().unwrap(), b.final_field.as_ref().unwrap());
    let d = b.lambda - a.lambda;
    let field = ub.combine(ua, b.lambda / d, -a.lambda / d)?;
    let error_vs_reference = match &report.reference_final {
        Some(r) => Some(field.sub(r)?.l2_norm()),
        None => None,
    };
    let error_ratio = error_vs_reference.map(|e| e / b.l2_error_vs_reference);
    Ok(Extrapolation {
        field,
        lambdas: (a.lambda, b.lambda),
        error_vs_reference,
        error_ratio,
    })
}
