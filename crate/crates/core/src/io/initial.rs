//! Initial fields.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{InitialCondition, RunConfig};
use super::snapshot::read_snapshot;
use crate::error::Result;
use crate::spectral::{is_dealiased_mode, project_solenoidal, Grid, VectorField};
use crate::stepper::{cole_hopf_oracle, ThetaRecipe};

pub fn taylor_green_2d(g: &Grid) -> VectorField {
    VectorField::from_fn(g, |x| [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0])
}

pub fn taylor_green_3d(g: &Grid) -> VectorField {
    VectorField::from_fn(g, |x| {
        [
            x[0].sin() * x[1].cos() * x[2].cos(),
            -x[0].cos() * x[1].sin() * x[2].cos(),
            0.0,
        ]
    })
}

/// Arnold-Beltrami-Childress flow with `A = B = C = 1`.
pub fn abc_flow(g: &Grid) -> VectorField {
    VectorField::from_fn(g, |x| {
        [
            x[2].sin() + x[1].cos(),
            x[0].sin() + x[2].cos(),
            x[1].sin() + x[0].cos(),
        ]
    })
}

/// Solenoidal field with random phases and `|û(k)| ∝ |k|^{−slope/2}` on the
/// dealiased shell `1 ≤ |k|`, normalised to unit L² norm.
pub fn random_solenoidal(g: &Grid, seed: u64, slope: f64) -> Result<VectorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = g.len();
    let mut comps = vec![vec![Complex64::new(0.0, 0.0); len]; g.dim()];
    for i in 0..len {
        let k2 = g.k_sq(i);
        let draws: Vec<(f64, f64)> = (0..g.dim())
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if k2 == 0.0 || !is_dealiased_mode(g, i) {
            continue;
        }
        let scale = k2.powf(-slope / 4.0);
        for (c, (re, im)) in comps.iter_mut().zip(draws) {
            c[i] = Complex64::new(re, im) * scale;
        }
    }
    let u = project_solenoidal(&VectorField::from_spectral(g, comps)?);
    let norm = u.l2_norm();
    Ok(if norm > 0.0 { u.scaled(1.0 / norm) } else { u })
}

/// Build the configured initial field on `g`, scaled by `amplitude`.
pub fn build_initial(cfg: &RunConfig, g: &Grid) -> Result<VectorField> {
    let u = match &cfg.initial_condition {
        InitialCondition::TaylorGreen2d => taylor_green_2d(g),
        InitialCondition::TaylorGreen3d => taylor_green_3d(g),
        InitialCondition::AbcFlow => abc_flow(g),
        InitialCondition::GradientColeHopf => cole_hopf_oracle(g, &ThetaRecipe::standard(), cfg.mu, 0.0)?,
        InitialCondition::RandomSolenoidal { seed, spectrum_slope } => random_solenoidal(g, *seed, *spectrum_slope)?,
        InitialCondition::SnapshotFile { path } => read_snapshot(path, Some(g))?.field,
    };
    Ok(if cfg.amplitude == 1.0 { u } else { u.scaled(cfg.amplitude) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::divergence;

    #[test]
    fn closed_forms_are_divergence_free() {
        let g2 = Grid::new(2, 16).unwrap();
        let g3 = Grid::new(3, 8).unwrap();
        assert!(divergence(&taylor_green_2d(&g2)).l2_norm() < 1e-14);
        assert!(divergence(&taylor_green_3d(&g3)).l2_norm() < 1e-14);
        assert!(divergence(&abc_flow(&g3)).l2_norm() < 1e-14);
    }

    #[test]
    fn random_field_is_seeded() {
        let g = Grid::new(2, 16).unwrap();
        let a = random_solenoidal(&g, 3, 3.0).unwrap();
        let b = random_solenoidal(&g, 3, 3.0).unwrap();
        let c = random_solenoidal(&g, 4, 3.0).unwrap();
        assert_eq!(a.component(0).physical(), b.component(0).physical());
        assert_ne!(a.component(0).physical(), c.component(0).physical());
        assert!((a.l2_norm() - 1.0).abs() < 1e-14);
        assert!(divergence(&a).l2_norm() < 1e-14);
    }
}
