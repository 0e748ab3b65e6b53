//! Free-space fundamental solution of the parabolic Lamé system in ℝ³.
//!
//! With `κ = λ+2μ`, the kernel splits as `Z = h·I − Hess W`, where `h` is the
//! heat kernel with diffusivity `μ` and
//! `W(x,t) = [erf(r/√(4κt)) − erf(r/√(4μt))]/(4πr)`
//! is the Newtonian potential of the difference of the two Gaussians.
//!
//! Everything is written in terms of `u = r²`. Writing `q = 1/√(4κt)` and
//! `q' = 1/√(4μt)`, the `m`-th `u`-derivative of `W` is
//! `−(1/4π)(2/√π)(−1)^m ∫_q^{q'} τ^{2m} e^{−uτ²} dτ`,
//! which stays finite at `r = 0` and loses no accuracy at large `r`.

use std::f64::consts::{FRAC_2_SQRT_PI, PI};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::semigroup::{propagator_symbol, LameParams};

/// A space-time evaluation point for the kernels (`t > 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    x: [f64; 3],
    t: f64,
    params: LameParams,
}

impl KernelPoint {
    pub fn new(x: [f64; 3], t: f64, params: LameParams) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("kernel time must be > 0, got {t}")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite kernel point {x:?}")));
        }
        Ok(KernelPoint { x, t, params })
    }

    pub fn x(&self) -> [f64; 3] {
        self.x
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn params(&self) -> LameParams {
        self.params
    }

    pub fn r(&self) -> f64 {
        self.r_sq().sqrt()
    }

    fn r_sq(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum()
    }

    /// `(q_κ, q_μ)` with `q_κ ≤ q_μ`.
    fn rates(&self) -> (f64, f64) {
        let q = |d: f64| 1.0 / (4.0 * d * self.t).sqrt();
        (q(self.params.compressive()), q(self.params.mu()))
    }
}

/// `1/(n(n−2)ω_n)` with `ω_n` the volume of the unit ball in ℝⁿ (`n ≥ 3`).
pub fn newtonian_constant(n: u32) -> f64 {
    assert!(n >= 3, "the Newtonian kernel needs n >= 3");
    let nf = n as f64;
    let omega = 2.0 * PI.powf(nf / 2.0) / (nf * libm::tgamma(nf / 2.0));
    1.0 / (nf * (nf - 2.0) * omega)
}

const SERIES_SWITCH: f64 = 3.0;

/// `∫_0^q τ^{2m} e^{−uτ²} dτ` by its power series in `u` (for `uq²` small).
fn head_series(m: u32, u: f64, q: f64) -> f64 {
    let x = u * q * q;
    let mut term = 1.0; // (−x)^n / n!
    let mut sum = 0.0;
    for n in 0..200 {
        let c = term / (2 * m + 2 * n + 1) as f64;
        sum += c;
        if c.abs() < 1e-18 * sum.abs() && n as f64 > x {
            break;
        }
        term *= -x / (n + 1) as f64;
    }
    sum * q.powi(2 * m as i32 + 1)
}

/// `∫_q^∞ τ^{2m} e^{−uτ²} dτ` for `m = 0..=M` by upward recurrence (`u > 0`).
fn tails<const M: usize>(u: f64, q: f64) -> [f64; M] {
    let s = u.sqrt();
    let e = (-u * q * q).exp();
    let mut out = [0.0; M];
    out[0] = 0.5 * PI.sqrt() * libm::erfc(q * s) / s;
    for m in 1..M {
        out[m] = (q.powi(2 * m as i32 - 1) * e + (2 * m - 1) as f64 * out[m - 1]) / (2.0 * u);
    }
    out
}

/// `∫_0^∞ τ^{2m} e^{−uτ²} dτ = Γ(m+½)/(2u^{m+½})`.
fn full_moment(m: u32, u: f64) -> f64 {
    libm::tgamma(m as f64 + 0.5) / (2.0 * u.powf(m as f64 + 0.5))
}

/// `D_m = ∫_{qa}^{qb} τ^{2m} e^{−uτ²} dτ` for `m = 0..M`, `qa ≤ qb`.
fn band_moments<const M: usize>(u: f64, qa: f64, qb: f64) -> [f64; M] {
    let mut out = [0.0; M];
    if qa == qb {
        return out;
    }
    if u * qa * qa >= SERIES_SWITCH {
        let (ta, tb) = (tails::<M>(u, qa), tails::<M>(u, qb));
        for m in 0..M {
            out[m] = ta[m] - tb[m];
        }
    } else {
        let far = u * qb * qb >= SERIES_SWITCH;
        let tb = if far { tails::<M>(u, qb) } else { [0.0; M] };
        for m in 0..M {
            let hb = if far {
                full_moment(m as u32, u) - tb[m]
            } else {
                head_series(m as u32, u, qb)
            };
            out[m] = hb - head_series(m as u32, u, qa);
        }
    }
    out
}

/// `W` and its first four derivatives in `u = r²`.
fn w_derivatives(p: &KernelPoint) -> [f64; 5] {
    let (qa, qb) = p.rates();
    let d = band_moments::<5>(p.r_sq(), qa, qb);
    let c = -FRAC_2_SQRT_PI / (4.0 * PI);
    let mut out = [0.0; 5];
    for m in 0..5 {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        out[m] = c * sign * d[m];
    }
    out
}

/// Heat kernel `(4πμt)^{−3/2} e^{−r²/4μt}` and its first three `u`-derivatives.
fn heat_derivatives(p: &KernelPoint) -> [f64; 4] {
    let s = 4.0 * p.params.mu() * p.t;
    let h = (PI * s).powf(-1.5) * (-p.r_sq() / s).exp();
    [h, -h / s, h / (s * s), -h / (s * s * s)]
}

/// Scalar profile `W(x,t)`.
pub fn w_function(p: &KernelPoint) -> f64 {
    let (_, qb) = p.rates();
    if p.r() < 1e-6 / (2.0 * qb) {
        // r → 0 limit
        let mu = p.params.mu();
        let kappa = p.params.compressive();
        return (1.0 / kappa.sqrt() - 1.0 / mu.sqrt()) / (4.0 * PI.powf(1.5) * p.t.sqrt());
    }
    w_derivatives(p)[0]
}

/// Radial coefficients of `Z = A·I + B·xxᵀ` and their `u`-derivatives:
/// `([A, A', A''], [B, B', B''])`.
fn z_coefficients(p: &KernelPoint) -> ([f64; 3], [f64; 3]) {
    let w = w_derivatives(p);
    let h = heat_derivatives(p);
    (
        [h[0] - 2.0 * w[1], h[1] - 2.0 * w[2], h[2] - 2.0 * w[3]],
        [-4.0 * w[2], -4.0 * w[3], -4.0 * w[4]],
    )
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// The fundamental solution `Z(x,t) = h·I − Hess W`.
pub fn z_kernel(p: &KernelPoint) -> Matrix3<f64> {
    let (a, b) = z_coefficients(p);
    let x = p.x;
    Matrix3::from_fn(|i, j| a[0] * delta(i, j) + b[0] * (x[i] * x[j]))
}

/// `∂_k Z`, indexed by `k`.
pub fn z_kernel_gradient(p: &KernelPoint) -> [Matrix3<f64>; 3] {
    let (a, b) = z_coefficients(p);
    let x = p.x;
    std::array::from_fn(|k| {
        Matrix3::from_fn(|i, j| {
            2.0 * x[k] * a[1] * delta(i, j)
                + 2.0 * x[k] * b[1] * x[i] * x[j]
                + b[0] * (delta(i, k) * x[j] + delta(j, k) * x[i])
        })
    })
}

/// `∂_l ∂_k Z`, indexed by `[k][l]`.
pub fn z_kernel_hessian(p: &KernelPoint) -> [[Matrix3<f64>; 3]; 3] {
    let (a, b) = z_coefficients(p);
    let x = p.x;
    std::array::from_fn(|k| {
        std::array::from_fn(|l| {
            Matrix3::from_fn(|i, j| {
                let dij = delta(i, j);
                let sym_l = delta(i, l) * x[j] + delta(j, l) * x[i];
                let sym_k = delta(i, k) * x[j] + delta(j, k) * x[i];
                2.0 * delta(k, l) * a[1] * dij
                    + 4.0 * x[k] * x[l] * a[2] * dij
                    + 2.0 * delta(k, l) * b[1] * x[i] * x[j]
                    + 4.0 * x[k] * x[l] * b[2] * x[i] * x[j]
                    + 2.0 * x[k] * b[1] * sym_l
                    + 2.0 * x[l] * b[1] * sym_k
                    + b[0] * (delta(i, k) * delta(j, l) + delta(j, k) * delta(i, l))
            })
        })
    })
}

/// Largest entry magnitude over all `∂^α Z` with `|α| = order`.
pub fn z_derivative_max_entry(p: &KernelPoint, order: u32) -> Result<f64> {
    let amax = |m: &Matrix3<f64>| m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok(match order {
        0 => amax(&z_kernel(p)),
        1 => z_kernel_gradient(p).iter().map(amax).fold(0.0, f64::max),
        2 => z_kernel_hessian(p)
            .iter()
            .flatten()
            .map(amax)
            .fold(0.0, f64::max),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "derivative order must be 0, 1 or 2, got {order}"
            )))
        }
    })
}

/// Frozen-coefficient Green matrix
/// `e^{−d(μ|ξ|²+(λ+μ)ξξᵀ)} · e^{−i(b·ξ)d} · e^{−c₀d}` with `d = t − τ`.
pub fn green_matrix_symbol(
    xi: [f64; 3],
    duration: f64,
    params: &LameParams,
    b: [f64; 3],
    c0: f64,
) -> Result<Matrix3<Complex64>> {
    if !(c0 >= 0.0) {
        return Err(Error::InvalidArgument(format!("c0 must be >= 0, got {c0}")));
    }
    if !(duration >= 0.0) {
        return Err(Error::InvalidArgument(format!("duration must be >= 0, got {duration}")));
    }
    let lame = propagator_symbol(&xi, duration, params)?;
    let bxi = Vector3::from(b).dot(&Vector3::from(xi));
    let factor = Complex64::from_polar((-c0 * duration).exp(), -bxi * duration);
    Ok(Matrix3::from_fn(|i, j| factor * lame[(i, j)]))
}

/// Sampling box for Gaussian-bound fitting. Radii and times are laid out on
/// uniform and logarithmic grids respectively, and every radius is sampled
/// along each direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSampleSpec {
    pub r_max: f64,
    pub n_r: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
    pub directions: Vec<[f64; 3]>,
    /// Decay constant `c`; `None` means `1/(16μ)`.
    pub decay_constant: Option<f64>,
    /// Keep every sample in the report.
    pub record_samples: bool,
}

impl Default for BoundSampleSpec {
    fn default() -> Self {
        BoundSampleSpec {
            r_max: 4.0,
            n_r: 81,
            t_min: 0.01,
            t_max: 1.0,
            n_t: 41,
            directions: vec![[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.3, -0.5, 0.8]],
            decay_constant: None,
            record_samples: false,
        }
    }
}

impl BoundSampleSpec {
    pub fn single_point(x: [f64; 3], t: f64) -> Self {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        BoundSampleSpec {
            r_max: r,
            n_r: 1,
            t_min: t,
            t_max: t,
            n_t: 1,
            directions: vec![if r > 0.0 { x } else { [1.0, 0.0, 0.0] }],
            decay_constant: None,
            record_samples: false,
        }
    }

    fn radii(&self) -> Vec<f64> {
        match self.n_r {
            0 => vec![],
            1 => vec![self.r_max],
            n => (0..n).map(|i| self.r_max * i as f64 / (n - 1) as f64).collect(),
        }
    }

    fn times(&self) -> Vec<f64> {
        match self.n_t {
            0 => vec![],
            1 => vec![self.t_min],
            n => {
                let (a, b) = (self.t_min.ln(), self.t_max.ln());
                (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
            }
        }
    }

    fn unit_directions(&self) -> Result<Vec<[f64; 3]>> {
        self.directions
            .iter()
            .map(|d| {
                let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                if n > 0.0 && n.is_finite() {
                    Ok([d[0] / n, d[1] / n, d[2] / n])
                } else {
                    Err(Error::InvalidArgument(format!("bad sampling direction {d:?}")))
                }
            })
            .collect()
    }

    pub fn sample_count(&self) -> usize {
        self.n_r * self.n_t * self.directions.len()
    }

    pub fn describe(&self) -> String {
        format!(
            "r in [0, {}] ({} pts), t in [{}, {}] ({} log pts), {} directions",
            self.r_max,
            self.n_r,
            self.t_min,
            self.t_max,
            self.n_t,
            self.directions.len()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSample {
    pub lambda: f64,
    pub r: f64,
    pub t: f64,
    pub direction: usize,
    pub magnitude: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundFitEntry {
    pub mu: f64,
    pub lambda: f64,
    pub decay_constant: f64,
    pub fitted_constant: f64,
    /// `(r, t)` where the supremum was attained.
    pub argmax: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundFitReport {
    pub alpha_order: u32,
    pub sample_box: String,
    pub samples_per_lambda: usize,
    pub entries: Vec<BoundFitEntry>,
    /// Fitted constants grow strictly along the λ list.
    pub monotone_growth: bool,
    pub samples: Vec<BoundSample>,
}

impl BoundFitReport {
    pub fn all_finite(&self) -> bool {
        self.entries.iter().all(|e| e.fitted_constant.is_finite())
    }

    pub fn samples_csv(&self) -> String {
        let mut s = String::from("lambda,r,t,direction,magnitude,scaled\n");
        for b in &self.samples {
            s.push_str(&format!(
                "{:e},{:e},{:e},{},{:e},{:e}\n",
                b.lambda, b.r, b.t, b.direction, b.magnitude, b.scaled
            ));
        }
        s
    }
}

/// For each parameter set, the supremum of
/// `max|∂^α Z(x,t)| · t^{(3+|α|)/2} · e^{c r²/t}` over the sample box.
pub fn verify_gaussian_bound(
    alpha_order: u32,
    params_list: &[LameParams],
    spec: &BoundSampleSpec,
    exec: Exec,
) -> Result<BoundFitReport> {
    if alpha_order > 2 {
        return Err(Error::InvalidArgument(format!(
            "derivative order must be 0, 1 or 2, got {alpha_order}"
        )));
    }
    let radii = spec.radii();
    let times = spec.times();
    let dirs = spec.unit_directions()?;
    let per = radii.len() * times.len() * dirs.len();
    if per == 0 || params_list.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    if !(spec.t_min > 0.0 && spec.t_max >= spec.t_min && spec.r_max >= 0.0) {
        return Err(Error::InvalidArgument(format!("bad sample box: {}", spec.describe())));
    }
    let power = (3.0 + alpha_order as f64) / 2.0;
    let mut entries = Vec::with_capacity(params_list.len());
    let mut samples = Vec::new();
    for params in params_list {
        let c = spec.decay_constant.unwrap_or(1.0 / (16.0 * params.mu()));
        let evaluated: Vec<Result<BoundSample>> = exec.map_collect(per, |idx| {
            let d = idx % dirs.len();
            let ri = (idx / dirs.len()) % radii.len();
            let ti = idx / (dirs.len() * radii.len());
            let (r, t) = (radii[ri], times[ti]);
            let x = [r * dirs[d][0], r * dirs[d][1], r * dirs[d][2]];
            let p = KernelPoint::new(x, t, *params)?;
            let magnitude = z_derivative_max_entry(&p, alpha_order)?;
            Ok(BoundSample {
                lambda: params.lambda(),
                r,
                t,
                direction: d,
                magnitude,
                scaled: magnitude * t.powf(power) * (c * r * r / t).exp(),
            })
        });
        let evaluated: Vec<BoundSample> = evaluated.into_iter().collect::<Result<_>>()?;
        let best = evaluated
            .iter()
            .fold(None::<&BoundSample>, |acc, s| match acc {
                Some(b) if !(s.scaled > b.scaled) && !s.scaled.is_nan() => Some(b),
                _ => Some(s),
            })
            .expect("non-empty sample set");
        entries.push(BoundFitEntry {
            mu: params.mu(),
            lambda: params.lambda(),
            decay_constant: c,
            fitted_constant: best.scaled,
            argmax: (best.r, best.t),
        });
        if spec.record_samples {
            samples.extend(evaluated);
        }
    }
    let monotone_growth = entries.len() > 1
        && entries
            .windows(2)
            .all(|w| w[1].fitted_constant > w[0].fitted_constant);
    Ok(BoundFitReport {
        alpha_order,
        sample_box: spec.describe(),
        samples_per_lambda: per,
        entries,
        monotone_growth,
        samples,
    })
}
