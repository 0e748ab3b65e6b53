//! Exact linear propagator `e^{-tL}` of the parabolic Lamé operator
//! `L = -μΔ - (λ+μ) grad div` on the torus.
//!
//! In Fourier space `L` acts mode-wise by `μ|ξ|² I + (λ+μ) ξξᵀ`, whose
//! eigenvalues are `μ|ξ|²` on the solenoidal plane and `(λ+2μ)|ξ|²` along
//! `ξ`. The propagator is therefore
//! `Ĝ(ξ,t) = e^{-μ|ξ|²t} Q(ξ) + e^{-(λ+2μ)|ξ|²t} P(ξ)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::sobolev_norm_sq;
use crate::error::{Error, Result};
use crate::spectral::ops::{deinterleave, interleave};
use crate::spectral::{project_compressible, Grid, VectorField};

/// Lamé constants with `μ > 0` and `λ + μ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LameParams {
    mu: f64,
    lambda: f64,
}

impl LameParams {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite() && lambda.is_finite() && lambda + mu >= 0.0) {
            return Err(Error::InvalidLameParams { mu, lambda });
        }
        Ok(LameParams { mu, lambda })
    }

    /// The heat/Burgers case `λ = −μ`.
    pub fn heat(mu: f64) -> Result<Self> {
        Self::new(mu, -mu)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Grad-div strength `λ + μ`.
    pub fn penalty(&self) -> f64 {
        self.lambda + self.mu
    }

    /// Compressive diffusivity `λ + 2μ`.
    pub fn compressive(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }
}

/// The two scalar factors of `Ĝ(ξ,t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorSymbol {
    pub shear: f64,
    pub compressive: f64,
}

impl PropagatorSymbol {
    pub fn new(k_sq: f64, t: f64, params: &LameParams) -> Self {
        PropagatorSymbol {
            shear: (-params.mu() * k_sq * t).exp(),
            compressive: (-params.compressive() * k_sq * t).exp(),
        }
    }

    /// Assemble `s_shear·Q(ξ) + s_comp·P(ξ)`; identity at `ξ = 0`.
    pub fn matrix(&self, xi: &[f64]) -> DMatrix<f64> {
        let n = xi.len();
        let k2: f64 = xi.iter().map(|v| v * v).sum();
        if k2 == 0.0 {
            return DMatrix::identity(n, n);
        }
        let diff = self.compressive - self.shear;
        DMatrix::from_fn(n, n, |i, j| {
            let p = xi[i] * xi[j] / k2;
            if i == j {
                self.shear + diff * p
            } else {
                diff * p
            }
        })
    }
}

pub fn propagator_symbol(xi: &[f64], t: f64, params: &LameParams) -> Result<DMatrix<f64>> {
    check_time(t)?;
    let k2: f64 = xi.iter().map(|v| v * v).sum();
    Ok(PropagatorSymbol::new(k2, t, params).matrix(xi))
}

/// `e^{-tL}φ`, evaluated mode by mode.
pub fn apply_semigroup(phi: &VectorField, t: f64, params: &LameParams) -> Result<VectorField> {
    check_time(t)?;
    let g = phi.grid();
    let mut comps = phi.spectral_owned();
    apply_two_rate(g, &mut comps, |_, k2| {
        let s = PropagatorSymbol::new(k2, t, params);
        (s.shear, s.compressive)
    });
    VectorField::from_spectral(g, comps)
}

/// In-place `v ← a Q v + b P v` on raw spectral arrays, where
/// `(a, b) = rates(mode_index, |k|²)`.
pub(crate) fn apply_two_rate<F>(g: &Grid, comps: &mut [Vec<Complex64>], rates: F)
where
    F: Fn(usize, f64) -> (f64, f64) + Sync + Send,
{
    let dim = g.dim();
    let mut flat = interleave(comps, g.len());
    g.exec().for_each_chunk_mut(&mut flat, dim, |i, v| {
        let k = g.wavevector(i);
        let k2: f64 = k.iter().map(|x| x * x).sum();
        let (a, b) = rates(i, k2);
        if k2 == 0.0 {
            v.iter_mut().for_each(|c| *c *= a);
            return;
        }
        let mut kv = Complex64::new(0.0, 0.0);
        for d in 0..dim {
            kv += k[d] * v[d];
        }
        kv *= (b - a) / k2;
        for d in 0..dim {
            v[d] = v[d] * a + kv * k[d];
        }
    });
    deinterleave(&flat, comps);
}

/// Mean-zero solution of `−Δψ = grad div φ`, i.e. `ψ̂ = −P(ξ)φ̂`.
pub fn poisson_psi(phi: &VectorField) -> VectorField {
    project_compressible(phi).scaled(-1.0)
}

/// Which sign of `ψ` enters the Poisson-potential representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// `v = G_μ*φ + (G_{λ+2μ} − G_μ)*ψ` with `ψ` from [`poisson_psi`].
    AsWritten,
    /// Same formula with `ψ` replaced by `−ψ`; agrees with the symbol form.
    Corrected,
}

#[derive(Debug, Clone)]
pub struct RepresentationOutcome {
    pub field: VectorField,
    /// `‖v − e^{-tL}φ‖ / ‖e^{-tL}φ‖` (absolute when the reference vanishes).
    pub discrepancy: f64,
}

/// Evaluate the heat-kernel + Poisson-potential representation in spectral
/// form and measure how far it is from [`apply_semigroup`].
pub fn semigroup_via_representation(
    phi: &VectorField,
    t: f64,
    params: &LameParams,
    sign: SignConvention,
) -> Result<RepresentationOutcome> {
    check_time(t)?;
    let g = phi.grid();
    let psi = poisson_psi(phi);
    let psi = match sign {
        SignConvention::AsWritten => psi,
        SignConvention::Corrected => psi.scaled(-1.0),
    };
    let phi_s = phi.spectral();
    let psi_s = psi.spectral();
    let comps: Vec<Vec<Complex64>> = (0..g.dim())
        .map(|a| {
            g.exec().map_collect(g.len(), |i| {
                let s = PropagatorSymbol::new(g.k_sq(i), t, params);
                phi_s[a][i] * s.shear + psi_s[a][i] * (s.compressive - s.shear)
            })
        })
        .collect();
    let field = VectorField::from_spectral(g, comps)?;
    let reference = apply_semigroup(phi, t, params)?;
    let diff = field.sub(&reference)?.l2_norm();
    let scale = reference.l2_norm();
    let discrepancy = if scale > 0.0 { diff / scale } else { diff };
    Ok(RepresentationOutcome { field, discrepancy })
}

/// `√t ‖e^{-tL}φ‖_{H^{m+1}} / ‖φ‖_{H^m}` for `0 < t ≤ 1`.
pub fn smoothing_ratio(phi: &VectorField, t: f64, params: &LameParams, m: u32) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "smoothing ratio needs 0 < t <= 1, got {t}"
        )));
    }
    let base = sobolev_norm_sq(phi, m);
    if base == 0.0 {
        return Err(Error::ZeroField);
    }
    let evolved = apply_semigroup(phi, t, params)?;
    Ok(t.sqrt() * (sobolev_norm_sq(&evolved, m + 1) / base).sqrt())
}

/// Largest [`smoothing_ratio`] over a set of times.
pub fn smoothing_sup(phi: &VectorField, params: &LameParams, times: &[f64], m: u32) -> Result<f64> {
    times
        .iter()
        .map(|&t| smoothing_ratio(phi, t, params, m))
        .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)))
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{gradient, project_solenoidal, ScalarField};

    #[test]
    fn params_enforce_constraint() {
        assert!(LameParams::new(1.0, -1.0).is_ok());
        assert!(LameParams::new(0.5, -1.0).is_err());
        assert!(LameParams::new(0.0, 1.0).is_err());
        assert!(LameParams::new(-1.0, 5.0).is_err());
    }

    #[test]
    fn zero_mode_and_zero_time_are_identity() {
        let p = LameParams::new(1.0, 7.0).unwrap();
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(propagator_symbol(&[0.0, 0.0, 0.0], 3.0, &p).unwrap(), id);
        assert!((propagator_symbol(&[1.0, -2.0, 0.5], 0.0, &p).unwrap() - id).amax() < 1e-15);
        assert!(propagator_symbol(&[1.0, 0.0, 0.0], -0.1, &p).is_err());
    }

    #[test]
    fn axis_mode_diagonal_values() {
        let p = LameParams::new(1.0, 0.0).unwrap();
        let m = propagator_symbol(&[1.0, 0.0, 0.0], 0.1, &p).unwrap();
        let expect = [(-0.2f64).exp(), (-0.1f64).exp(), (-0.1f64).exp()];
        for i in 0..3 {
            assert!((m[(i, i)] - expect[i]).abs() < 1e-15);
        }
        assert!((m[(0, 0)] - 0.818_730_753_077_981_9).abs() < 1e-15);
        assert!((m[(1, 1)] - 0.904_837_418_035_959_6).abs() < 1e-15);
    }

    #[test]
    fn heat_reduction_is_scalar() {
        let p = LameParams::heat(0.7).unwrap();
        let m = propagator_symbol(&[1.0, 2.0, -3.0], 0.3, &p).unwrap();
        let s = (-0.7f64 * 14.0 * 0.3).exp();
        assert!((m - DMatrix::identity(3, 3) * s).amax() < 1e-15);
    }

    #[test]
    fn poisson_examples() {
        let g = Grid::new(2, 16).unwrap();
        let tg = VectorField::from_fn(&g, |x| [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]);
        assert!(poisson_psi(&tg).l2_norm() < 1e-15);
        let grad = gradient(&ScalarField::from_fn(&g, |x| x[0].cos()));
        let psi = poisson_psi(&grad);
        assert!(psi.add(&grad).unwrap().l2_norm() < 1e-15);
        let mix = tg.add(&grad).unwrap();
        assert!(poisson_psi(&mix).add(&grad).unwrap().l2_norm() < 1e-14);
    }

    #[test]
    fn solenoidal_data_is_lambda_blind() {
        let g = Grid::new(3, 8).unwrap();
        let phi = project_solenoidal(&VectorField::from_fn(&g, |x| {
            [x[1].sin() + x[2].cos(), (2.0 * x[0]).cos(), x[0].sin() * x[1].cos()]
        }));
        let a = apply_semigroup(&phi, 0.2, &LameParams::new(1.0, 0.0).unwrap()).unwrap();
        let b = apply_semigroup(&phi, 0.2, &LameParams::new(1.0, 1e6).unwrap()).unwrap();
        assert!(a.sub(&b).unwrap().l2_norm() < 1e-15);
    }

    #[test]
    fn smoothing_rejects_zero_and_bad_times() {
        let g = Grid::new(2, 8).unwrap();
        let p = LameParams::new(1.0, 0.0).unwrap();
        assert!(matches!(
            smoothing_ratio(&VectorField::zeros(&g), 0.5, &p, 1),
            Err(Error::ZeroField)
        ));
        let u = VectorField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
        assert!(smoothing_ratio(&u, 0.0, &p, 1).is_err());
        assert!(smoothing_ratio(&u, 1.5, &p, 1).is_err());
    }
}
