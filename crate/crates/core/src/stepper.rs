//! Nonlinear time stepping of the inertia Lamé system
//! `u_t − μΔu − (λ+μ) grad div u + (u·∇)u = 0`
//! through its mild (Duhamel) form
//! `u(t+h) = e^{−hL}u(t) − ∫₀ʰ e^{−(h−s)L} Φ(u(t+s)) ds`, `Φ(u) = (u·∇)u`.
//!
//! Each step replaces `Φ(u(t+s))` by its linear interpolant between the step
//! ends and integrates the result exactly:
//!
//! `u⁺ = E u − h(φ₁−φ₂)(−hA) Φ(u) − h φ₂(−hA) Φ(u⁺)`
//!
//! with `E = e^{−hA}`, `φ₁(z) = (eᶻ−1)/z`, `φ₂(z) = (eᶻ−1−z)/z²`. The implicit
//! dependence on `u⁺` is resolved by Picard iteration, whose residual
//! contraction is monitored. All matrix functions of `A` are diagonal in the
//! `P/Q` splitting, so each is a pair of scalars per mode. When the
//! compressive rate `(λ+2μ)|ξ|²h` is large the scheme relaxes the gradient
//! part onto `PΦ/((λ+2μ)|ξ|²)`, which is what keeps λ → ∞ well behaved.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{DiagnosticRecord, DiagnosticSeries};
use crate::error::{Error, Result};
use crate::semigroup::{apply_two_rate, LameParams};
use crate::spectral::ops::{apply_dealias, apply_projection};
use crate::spectral::{Grid, VectorField};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt_init: f64,
    pub dt_min: f64,
    pub picard_tol: f64,
    pub picard_max: u32,
    pub cfl_constant: f64,
    pub dealias: bool,
    /// Use `½[(u·∇)u + ∇·(u⊗u)]` instead of the convective form.
    pub skew_symmetric: bool,
    /// Abort once `‖u‖²_{H¹}` exceeds this multiple of its initial value.
    pub abort_h1_factor: f64,
    /// Store a snapshot every this many accepted steps (the initial and
    /// final states are always stored).
    pub snapshot_every: usize,
    /// Extra Sobolev orders recorded in the diagnostics series.
    pub hk_orders: Vec<u32>,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            dt_init: 1e-3,
            dt_min: 1e-9,
            picard_tol: 1e-10,
            picard_max: 50,
            cfl_constant: 0.5,
            dealias: true,
            skew_symmetric: false,
            abort_h1_factor: 1e8,
            snapshot_every: 100,
            hk_orders: vec![2],
        }
    }
}

impl StepperConfig {
    pub fn with_dt(dt_init: f64) -> Self {
        StepperConfig {
            dt_init,
            dt_min: dt_init * 1e-6,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.dt_min > 0.0 && self.dt_init > self.dt_min) {
            return bad(format!(
                "need dt_init > dt_min > 0 (dt_init = {}, dt_min = {})",
                self.dt_init, self.dt_min
            ));
        }
        if !(self.picard_tol > 0.0) {
            return bad(format!("picard_tol must be > 0, got {}", self.picard_tol));
        }
        if self.picard_max < 2 {
            return bad(format!("picard_max must be >= 2, got {}", self.picard_max));
        }
        if !(self.cfl_constant > 0.0) {
            return bad(format!("cfl_constant must be > 0, got {}", self.cfl_constant));
        }
        if !(self.abort_h1_factor > 1.0) {
            return bad(format!("abort_h1_factor must be > 1, got {}", self.abort_h1_factor));
        }
        if self.snapshot_every == 0 {
            return bad("snapshot_every must be >= 1".into());
        }
        Ok(())
    }
}

/// Which evolution equation a run integrates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    /// Inertia Lamé equations.
    Lame(LameParams),
    /// Leray-projected incompressible Navier-Stokes with viscosity `mu`.
    NavierStokes { mu: f64 },
}

impl Model {
    /// Decay rates `(shear, compressive)` at `|ξ|²`.
    fn rates(&self, k2: f64) -> (f64, f64) {
        match self {
            Model::Lame(p) => (p.mu() * k2, p.compressive() * k2),
            Model::NavierStokes { mu } => (mu * k2, mu * k2),
        }
    }

    fn projects_nonlinearity(&self) -> bool {
        matches!(self, Model::NavierStokes { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub dt: f64,
    pub picard_iters: u32,
    /// `‖u^{j+1} − u^j‖` for each Picard sweep.
    pub residuals: Vec<f64>,
    /// Largest `r_j / r_{j−1}` among residuals above round-off (0 if fewer
    /// than two such residuals).
    pub max_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub field: VectorField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    BlowUp { t: f64, h1_sq: f64, ceiling: f64 },
    StepTooSmall { t: f64, dt: f64, dt_min: f64 },
}

/// Output of [`integrate`]: stored states, per-step diagnostics and how the
/// run ended. A run that stops early is still returned; use
/// [`Trajectory::require_completed`] to turn early stops into errors.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub model: Model,
    pub snapshots: Vec<Snapshot>,
    pub series: DiagnosticSeries,
    pub steps: Vec<StepDiagnostics>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory always holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        self.last().t
    }

    pub fn is_completed(&self) -> bool {
        self.termination == Termination::Completed
    }

    pub fn require_completed(self) -> Result<Self> {
        match self.termination {
            Termination::Completed => Ok(self),
            Termination::BlowUp { t, h1_sq, ceiling } => {
                Err(Error::BlowUpDetected { t, h1_sq, ceiling })
            }
            Termination::StepTooSmall { t, dt, dt_min } => Err(Error::StepTooSmall { t, dt, dt_min }),
        }
    }

    /// Largest Picard contraction ratio over all accepted steps.
    pub fn max_contraction_ratio(&self) -> f64 {
        self.steps.iter().map(|s| s.max_ratio).fold(0.0, f64::max)
    }

    /// `max_t max_x |u| / max_x |φ|` over the recorded series.
    pub fn sup_growth(&self) -> f64 {
        let first = self.series.records.first().map_or(0.0, |r| r.u_max);
        let peak = self.series.records.iter().map(|r| r.u_max).fold(0.0, f64::max);
        if first > 0.0 {
            peak / first
        } else {
            0.0
        }
    }
}

/// `(u·∇)u`, pseudospectrally. With `dealias` the factors are truncated to
/// the 2/3 box before the product and the product is truncated again.
pub fn nonlinear_term(u: &VectorField, dealias: bool) -> VectorField {
    let out = advection(u.grid(), &u.spectral_owned(), dealias, false);
    VectorField::from_spectral(u.grid(), out).expect("same grid")
}

/// Skew-symmetric form `½[(u·∇)u + ∇·(u⊗u)]`.
pub fn nonlinear_term_skew(u: &VectorField, dealias: bool) -> VectorField {
    let out = advection(u.grid(), &u.spectral_owned(), dealias, true);
    VectorField::from_spectral(u.grid(), out).expect("same grid")
}

fn advection(g: &Grid, spec: &[Vec<Complex64>], dealias: bool, skew: bool) -> Vec<Vec<Complex64>> {
    let dim = g.dim();
    let len = g.len();
    let exec = g.exec();
    let filtered: Vec<Vec<Complex64>> = spec
        .iter()
        .map(|c| {
            let mut c = c.clone();
            if dealias {
                apply_dealias(g, &mut c);
            }
            c
        })
        .collect();
    let u: Vec<Vec<f64>> = filtered.iter().map(|c| g.inverse(c)).collect();
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for fb in &filtered {
        let mut prod = vec![0.0; len];
        for (a, ua) in u.iter().enumerate() {
            let d: Vec<Complex64> = exec.map_collect(len, |i| I * g.wavevector(i)[a] * fb[i]);
            let d = g.inverse(&d);
            exec.for_each_indexed_mut(&mut prod, |i, p| *p += ua[i] * d[i]);
        }
        out.push(g.forward(&prod));
    }
    if skew {
        // ∇·(u⊗u)_b = Σ_a ∂_a(u_a u_b)
        let mut div_flux = vec![vec![Complex64::new(0.0, 0.0); len]; dim];
        for a in 0..dim {
            for b in a..dim {
                let pair: Vec<f64> = exec.map_collect(len, |i| u[a][i] * u[b][i]);
                let ph = g.forward(&pair);
                for i in 0..len {
                    let k = g.wavevector(i);
                    div_flux[b][i] += I * k[a] * ph[i];
                    if a != b {
                        div_flux[a][i] += I * k[b] * ph[i];
                    }
                }
            }
        }
        for (o, f) in out.iter_mut().zip(&div_flux) {
            for (x, y) in o.iter_mut().zip(f) {
                *x = 0.5 * (*x + *y);
            }
        }
    }
    if dealias {
        for c in out.iter_mut() {
            apply_dealias(g, c);
        }
    }
    out
}

/// `φ₁(−a) = (1 − e^{−a})/a` and `φ₂(−a) = (e^{−a} − 1 + a)/a²` for `a ≥ 0`.
pub(crate) fn phi_functions(a: f64) -> (f64, f64) {
    if a < 0.05 {
        // Taylor series: φ₁ = Σ (−a)^j/(j+1)!, φ₂ = Σ (−a)^j/(j+2)!
        let mut p1 = 0.0;
        let mut p2 = 0.0;
        let mut term1 = 1.0; // (−a)^j/(j+1)!
        let mut term2 = 0.5; // (−a)^j/(j+2)!
        for j in 0..12 {
            p1 += term1;
            p2 += term2;
            let jf = j as f64;
            term1 *= -a / (jf + 2.0);
            term2 *= -a / (jf + 3.0);
        }
        (p1, p2)
    } else {
        let em1 = (-a).exp_m1();
        (-em1 / a, (em1 + a) / (a * a))
    }
}

#[derive(Clone, Copy)]
struct ModeWeights {
    decay: (f64, f64),
    explicit: (f64, f64),
    implicit: (f64, f64),
}

/// Per-mode exponential weights for one step size.
struct StepTable {
    dt: f64,
    weights: Vec<ModeWeights>,
}

impl StepTable {
    fn new(g: &Grid, model: &Model, dt: f64) -> Self {
        let weights = g.exec().map_collect(g.len(), |i| {
            let (rs, rc) = model.rates(g.k_sq(i));
            let (as_, ac) = (rs * dt, rc * dt);
            let (p1s, p2s) = phi_functions(as_);
            let (p1c, p2c) = phi_functions(ac);
            ModeWeights {
                decay: ((-as_).exp(), (-ac).exp()),
                explicit: (dt * (p1s - p2s), dt * (p1c - p2c)),
                implicit: (dt * p2s, dt * p2c),
            }
        });
        StepTable { dt, weights }
    }
}

/// Integrator state shared by [`integrate`] and [`duhamel_step`].
struct Propagator<'a> {
    grid: Grid,
    model: Model,
    config: &'a StepperConfig,
    table: Option<StepTable>,
}

struct StepOutcome {
    u: Vec<Vec<Complex64>>,
    forcing: Vec<Vec<Complex64>>,
    diag: StepDiagnostics,
}

impl<'a> Propagator<'a> {
    fn new(grid: &Grid, model: Model, config: &'a StepperConfig) -> Self {
        Propagator {
            grid: grid.clone(),
            model,
            config,
            table: None,
        }
    }

    /// `Φ(u)`, Leray-projected for the Navier-Stokes model.
    fn forcing(&self, u: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let mut f = advection(&self.grid, u, self.config.dealias, self.config.skew_symmetric);
        if self.model.projects_nonlinearity() {
            apply_projection(&self.grid, &mut f, false);
        }
        f
    }

    fn weighted(&self, v: &[Vec<Complex64>], pick: impl Fn(&ModeWeights) -> (f64, f64) + Sync + Send) -> Vec<Vec<Complex64>> {
        let table = self.table.as_ref().expect("table prepared");
        let mut out = v.to_vec();
        apply_two_rate(&self.grid, &mut out, |i, _| pick(&table.weights[i]));
        out
    }

    fn norm(&self, v: &[Vec<Complex64>]) -> f64 {
        let len = self.grid.len();
        self.grid
            .exec()
            .sum(len, |i| v.iter().map(|c| c[i].norm_sqr()).sum::<f64>())
            .sqrt()
    }

    fn diff_norm(&self, a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
        let len = self.grid.len();
        self.grid
            .exec()
            .sum(len, |i| {
                a.iter().zip(b).map(|(x, y)| (x[i] - y[i]).norm_sqr()).sum::<f64>()
            })
            .sqrt()
    }

    fn step(&mut self, t: f64, u: &[Vec<Complex64>], forcing_old: &[Vec<Complex64>], dt: f64) -> Result<StepOutcome> {
        if self.table.as_ref().is_none_or(|tb| tb.dt != dt) {
            self.table = Some(StepTable::new(&self.grid, &self.model, dt));
        }
        let eu = self.weighted(u, |w| w.decay);
        let ef = self.weighted(forcing_old, |w| w.explicit);
        let base: Vec<Vec<Complex64>> = sub(&eu, &ef);
        // exponential-Euler predictor: E u − h φ₁ Φ(u)
        let mut current = sub(&base, &self.weighted(forcing_old, |w| w.implicit));
        let mut residuals = Vec::new();
        let mut max_ratio: f64 = 0.0;
        let tol = self.config.picard_tol;
        for iter in 1..=self.config.picard_max {
            let forcing = self.forcing(&current);
            let next = sub(&base, &self.weighted(&forcing, |w| w.implicit));
            let r = self.diff_norm(&next, &current);
            let size = self.norm(&next);
            if !r.is_finite() {
                return Err(Error::PicardDiverged {
                    t,
                    dt,
                    reason: "non-finite residual".into(),
                });
            }
            if let Some(&prev) = residuals.last() {
                let floor = 1e3 * f64::EPSILON * size;
                if prev > floor {
                    let ratio = r / prev;
                    if ratio >= 1.0 && r > tol * size {
                        return Err(Error::PicardDiverged {
                            t,
                            dt,
                            reason: format!("residual ratio {ratio:.3} >= 1"),
                        });
                    }
                    max_ratio = max_ratio.max(ratio);
                }
            }
            residuals.push(r);
            current = next;
            if r <= tol * size {
                let forcing = self.forcing(&current);
                return Ok(StepOutcome {
                    u: current,
                    forcing,
                    diag: StepDiagnostics {
                        t: t + dt,
                        dt,
                        picard_iters: iter,
                        residuals,
                        max_ratio,
                    },
                });
            }
        }
        Err(Error::PicardDiverged {
            t,
            dt,
            reason: format!("no convergence in {} iterations", self.config.picard_max),
        })
    }

    fn cfl_limit(&self, u_max: f64) -> f64 {
        if u_max > 0.0 {
            self.config.cfl_constant / (self.grid.n() as f64 * u_max)
        } else {
            f64::INFINITY
        }
    }
}

fn sub(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect())
        .collect()
}

/// Advance `u_t` by one step of size `dt`.
pub fn duhamel_step(
    u_t: &VectorField,
    dt: f64,
    params: &LameParams,
    config: &StepperConfig,
) -> Result<(VectorField, StepDiagnostics)> {
    model_step(u_t, dt, Model::Lame(*params), config)
}

pub fn model_step(
    u_t: &VectorField,
    dt: f64,
    model: Model,
    config: &StepperConfig,
) -> Result<(VectorField, StepDiagnostics)> {
    if dt < config.dt_min {
        return Err(Error::StepTooSmall {
            t: 0.0,
            dt,
            dt_min: config.dt_min,
        });
    }
    let g = u_t.grid();
    let mut prop = Propagator::new(g, model, config);
    let limit = prop.cfl_limit(u_t.max_magnitude());
    if dt > limit {
        return Err(Error::InvalidArgument(format!(
            "dt = {dt} exceeds the CFL bound {limit}"
        )));
    }
    let u = u_t.spectral_owned();
    let f = prop.forcing(&u);
    let out = prop.step(0.0, &u, &f, dt)?;
    Ok((VectorField::from_spectral(g, out.u)?, out.diag))
}

/// Integrate the inertia Lamé system from `phi` up to `t_end`.
pub fn integrate(phi: &VectorField, t_end: f64, params: &LameParams, config: &StepperConfig) -> Result<Trajectory> {
    integrate_model(phi, t_end, Model::Lame(*params), config)
}

/// Adaptive driver: `dt = min(dt_current, cfl/(N·max|u|), t_end − t)`,
/// halving on Picard failure and growing back towards `dt_init`.
pub fn integrate_model(phi: &VectorField, t_end: f64, model: Model, config: &StepperConfig) -> Result<Trajectory> {
    config.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end must be > 0, got {t_end}")));
    }
    let g = phi.grid().clone();
    let mut prop = Propagator::new(&g, model, config);
    let mut series = DiagnosticSeries::new(config.hk_orders.clone());
    let first = DiagnosticRecord::measure(phi, 0.0, &config.hk_orders, 0, 0.0);
    let ceiling = config.abort_h1_factor * first.h1_sq;
    let mut u_max = first.u_max;
    series.push(first);
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        field: phi.clone(),
    }];
    let mut steps = Vec::new();
    let mut termination = Termination::Completed;

    let mut u = phi.spectral_owned();
    let mut forcing = prop.forcing(&u);
    let mut t = 0.0;
    let mut dt_current = config.dt_init;
    let mut accepted = 0usize;
    loop {
        let remaining = t_end - t;
        if remaining <= 1e-12 * t_end {
            break;
        }
        let mut h = dt_current.min(prop.cfl_limit(u_max));
        let last = h >= remaining * (1.0 - 1e-9);
        if last {
            h = remaining;
        }
        if h < config.dt_min {
            termination = Termination::StepTooSmall {
                t,
                dt: h,
                dt_min: config.dt_min,
            };
            break;
        }
        let out = match prop.step(t, &u, &forcing, h) {
            Ok(o) => o,
            Err(Error::PicardDiverged { .. }) => {
                dt_current = h / 2.0;
                continue;
            }
            Err(e) => return Err(e),
        };
        t = if last { t_end } else { t + h };
        u = out.u;
        forcing = out.forcing;
        accepted += 1;
        let field = VectorField::from_spectral(&g, u.clone())?;
        let rec = DiagnosticRecord::measure(&field, t, &config.hk_orders, out.diag.picard_iters, h);
        u_max = rec.u_max;
        let h1 = rec.h1_sq;
        series.push(rec);
        steps.push(out.diag);
        let blown = !h1.is_finite() || (ceiling > 0.0 && h1 > ceiling);
        if last || blown || accepted.is_multiple_of(config.snapshot_every) {
            snapshots.push(Snapshot { t, field });
        }
        if blown {
            termination = Termination::BlowUp { t, h1_sq: h1, ceiling };
            break;
        }
        if last {
            break;
        }
        dt_current = (dt_current * 2.0).min(config.dt_init);
    }
    Ok(Trajectory {
        model,
        snapshots,
        series,
        steps,
        termination,
    })
}

/// One Fourier term `a cos(k·x) + b sin(k·x)` of a temperature profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaMode {
    pub k: [i64; 3],
    pub cos: f64,
    pub sin: f64,
}

/// Trigonometric-polynomial initial profile `θ₀ = c + Σ (a cos k·x + b sin k·x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaRecipe {
    pub constant: f64,
    pub modes: Vec<ThetaMode>,
}

impl ThetaRecipe {
    /// `θ₀ = 2 + cos x₁`.
    pub fn standard() -> Self {
        ThetaRecipe {
            constant: 2.0,
            modes: vec![ThetaMode {
                k: [1, 0, 0],
                cos: 1.0,
                sin: 0.0,
            }],
        }
    }

    /// `θ(x,t)` and `∇θ(x,t)` for the heat flow with diffusivity `mu`.
    pub fn evaluate(&self, x: [f64; 3], mu: f64, t: f64) -> (f64, [f64; 3]) {
        let mut theta = self.constant;
        let mut grad = [0.0; 3];
        for m in &self.modes {
            let k = [m.k[0] as f64, m.k[1] as f64, m.k[2] as f64];
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let decay = (-mu * k2 * t).exp();
            let phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
            let (s, c) = phase.sin_cos();
            theta += decay * (m.cos * c + m.sin * s);
            let dphase = decay * (-m.cos * s + m.sin * c);
            for a in 0..3 {
                grad[a] += dphase * k[a];
            }
        }
        (theta, grad)
    }
}

/// Exact viscous Burgers solution `u = −2μ ∇ log θ` at time `t`, where `θ`
/// solves the heat equation from `recipe`.
pub fn cole_hopf_oracle(grid: &Grid, recipe: &ThetaRecipe, mu: f64, t: f64) -> Result<VectorField> {
    for m in &recipe.modes {
        if m.k.iter().skip(grid.dim()).any(|&k| k != 0) {
            return Err(Error::InvalidArgument(format!(
                "mode {:?} does not fit a {}-dimensional grid",
                m.k,
                grid.dim()
            )));
        }
    }
    let min0 = grid
        .exec()
        .map_collect(grid.len(), |i| recipe.evaluate(grid.coords(i), mu, 0.0).0)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if !(min0 > 0.0) || !(recipe.constant > 0.0) {
        return Err(Error::NonPositiveTheta { min: min0 });
    }
    Ok(VectorField::from_fn(grid, |x| {
        let (theta, grad) = recipe.evaluate(x, mu, t);
        let f = -2.0 * mu / theta;
        [f * grad[0], f * grad[1], f * grad[2]]
    }))
}
