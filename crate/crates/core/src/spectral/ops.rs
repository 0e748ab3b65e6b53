use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Grid, ScalarField, VectorField};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Compressible/solenoidal projector pair at one wavevector:
/// `P = ξξᵀ/|ξ|²`, `Q = I − P`, with `P(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProjector {
    pub compressible: DMatrix<f64>,
    pub solenoidal: DMatrix<f64>,
}

impl ModeProjector {
    pub fn at(xi: &[f64]) -> Self {
        let n = xi.len();
        let k2: f64 = xi.iter().map(|v| v * v).sum();
        let p = if k2 == 0.0 {
            DMatrix::zeros(n, n)
        } else {
            DMatrix::from_fn(n, n, |i, j| xi[i] * xi[j] / k2)
        };
        let q = DMatrix::identity(n, n) - &p;
        ModeProjector {
            compressible: p,
            solenoidal: q,
        }
    }

    /// Projector pair for spectral index `idx` of `grid`.
    pub fn on_grid(grid: &Grid, idx: usize) -> Self {
        let k = grid.wavevector(idx);
        Self::at(&k[..grid.dim()])
    }
}

/// True when every axis satisfies `3|k_a| <= n` (the 2/3 rule).
pub fn is_dealiased_mode(grid: &Grid, idx: usize) -> bool {
    let k = grid.wavevector_int(idx);
    let n = grid.n() as i64;
    k.iter().take(grid.dim()).all(|&ka| 3 * ka.abs() <= n)
}

/// `∂u/∂x_axis`, computed spectrally.
pub fn partial_derivative(f: &ScalarField, axis: usize) -> ScalarField {
    let g = f.grid();
    let c = f.spectral();
    let out = g.exec().map_collect(g.len(), |i| I * g.wavevector(i)[axis] * c[i]);
    ScalarField::from_spectral(g, out).expect("same grid")
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let g = f.grid();
    let comps = (0..g.dim()).map(|a| partial_derivative(f, a)).collect();
    VectorField::from_components(g, comps).expect("same grid")
}

/// Spectral divergence `Σ_a i k_a û_a`.
pub fn divergence(u: &VectorField) -> ScalarField {
    let g = u.grid();
    let spec = u.spectral();
    let out = g.exec().map_collect(g.len(), |i| {
        let k = g.wavevector(i);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, s) in spec.iter().enumerate() {
            acc += I * k[a] * s[i];
        }
        acc
    });
    ScalarField::from_spectral(g, out).expect("same grid")
}

/// Leray projection `Q(ξ)û(ξ)` onto divergence-free fields.
pub fn project_solenoidal(u: &VectorField) -> VectorField {
    project(u, false)
}

/// Gradient part `P(ξ)û(ξ)`; `u = project_solenoidal(u) + project_compressible(u)`.
pub fn project_compressible(u: &VectorField) -> VectorField {
    project(u, true)
}

fn project(u: &VectorField, compressible: bool) -> VectorField {
    let g = u.grid();
    let mut out = u.spectral_owned();
    apply_projection(g, &mut out, compressible);
    VectorField::from_spectral(g, out).expect("same grid")
}

/// In-place mode-wise `P` or `Q` on raw spectral component arrays.
pub(crate) fn apply_projection(g: &Grid, comps: &mut [Vec<Complex64>], compressible: bool) {
    let dim = g.dim();
    let len = g.len();
    let mut flat = interleave(comps, len);
    g.exec().for_each_chunk_mut(&mut flat, dim, |i, v| {
        let k = g.wavevector(i);
        let k2: f64 = k.iter().map(|x| x * x).sum();
        if k2 == 0.0 {
            if compressible {
                v.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            }
            return;
        }
        let mut kv = Complex64::new(0.0, 0.0);
        for a in 0..dim {
            kv += k[a] * v[a];
        }
        kv /= k2;
        for a in 0..dim {
            let p = kv * k[a];
            v[a] = if compressible { p } else { v[a] - p };
        }
    });
    deinterleave(&flat, comps);
}

/// Zero every coefficient outside the 2/3-rule box.
pub fn dealias(u: &VectorField) -> VectorField {
    let g = u.grid();
    let comps = u.components().iter().map(dealias_scalar).collect();
    VectorField::from_components(g, comps).expect("same grid")
}

pub fn dealias_scalar(f: &ScalarField) -> ScalarField {
    let g = f.grid();
    let mut c = f.spectral().to_vec();
    apply_dealias(g, &mut c);
    ScalarField::from_spectral(g, c).expect("same grid")
}

pub(crate) fn apply_dealias(g: &Grid, c: &mut [Complex64]) {
    g.exec().for_each_indexed_mut(c, |i, v| {
        if !is_dealiased_mode(g, i) {
            *v = Complex64::new(0.0, 0.0);
        }
    });
}

/// Component arrays → mode-major layout `[mode][component]`.
pub(crate) fn interleave(comps: &[Vec<Complex64>], len: usize) -> Vec<Complex64> {
    let dim = comps.len();
    let mut flat = vec![Complex64::new(0.0, 0.0); len * dim];
    for (a, c) in comps.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            flat[i * dim + a] = *v;
        }
    }
    flat
}

pub(crate) fn deinterleave(flat: &[Complex64], comps: &mut [Vec<Complex64>]) {
    let dim = comps.len();
    for (a, c) in comps.iter_mut().enumerate() {
        for (i, v) in c.iter_mut().enumerate() {
            *v = flat[i * dim + a];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(dim: usize, n: usize) -> Grid {
        Grid::new(dim, n).unwrap()
    }

    #[test]
    fn gradient_of_sine_is_removed_by_leray() {
        let g = grid(2, 16);
        let u = gradient(&ScalarField::from_fn(&g, |x| x[0].sin()));
        assert!(project_solenoidal(&u).l2_norm() < 1e-14);
        assert!((project_compressible(&u).l2_norm() - u.l2_norm()).abs() < 1e-14);
    }

    #[test]
    fn taylor_green_is_fixed_by_leray() {
        let g = grid(2, 16);
        let tg = VectorField::from_fn(&g, |x| {
            [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]
        });
        let p = project_solenoidal(&tg);
        assert!(p.sub(&tg).unwrap().l2_norm() < 1e-14);
    }

    #[test]
    fn mixed_field_splits_into_known_parts() {
        // ∇(cos x₂) + (sin x₂, 0) → (sin x₂, 0)
        let g = grid(2, 16);
        let u = VectorField::from_fn(&g, |x| [x[1].sin(), -x[1].sin(), 0.0]);
        let expected = VectorField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
        let p = project_solenoidal(&u);
        assert!(p.sub(&expected).unwrap().l2_norm() < 1e-14);
        for i in 0..g.len() {
            let want = expected.component(0).physical()[i];
            assert!((p.component(0).physical()[i] - want).abs() < 1e-13);
        }
    }

    #[test]
    fn divergence_examples() {
        let g = grid(2, 16);
        let a = VectorField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
        assert!(divergence(&a).l2_norm() < 1e-14);
        let b = VectorField::from_fn(&g, |x| [x[0].sin(), 0.0, 0.0]);
        let d = divergence(&b);
        for i in 0..g.len() {
            assert!((d.physical()[i] - g.coords(i)[0].cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn dealias_examples() {
        let g = grid(2, 8);
        let low = VectorField::from_fn(&g, |x| [x[0].cos() + x[1].sin(), 1.0, 0.0]);
        assert!(dealias(&low).sub(&low).unwrap().l2_norm() < 1e-15);

        let nyq = VectorField::from_fn(&g, |x| [(4.0 * x[0]).cos(), 0.0, 0.0]);
        assert!(nyq.l2_norm() > 0.5);
        assert!(dealias(&nyq).l2_norm() < 1e-15);

        // sin²(3x) = ½ − ½cos 6x, resolved at n = 16 where 6 > 16/3
        let g16 = grid(2, 16);
        let prod = ScalarField::from_fn(&g16, |x| (3.0 * x[0]).sin().powi(2));
        let d = dealias_scalar(&prod);
        assert!((d.spectral()[0].re - 0.5).abs() < 1e-15);
        assert!(d.spectral()[g16.ravel([6, 0, 0])].norm() < 1e-15);
        assert!(prod.spectral()[g16.ravel([6, 0, 0])].norm() > 0.2);
        assert!((d.l2_norm() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn projector_algebra_is_exact_at_every_mode() {
        let g = grid(3, 6);
        for i in 0..g.len() {
            let m = ModeProjector::on_grid(&g, i);
            let (p, q) = (&m.compressible, &m.solenoidal);
            let id = DMatrix::<f64>::identity(3, 3);
            assert!((p * p - p).amax() < 1e-14);
            assert!((q * q - q).amax() < 1e-14);
            assert!((p * q).amax() < 1e-14);
            assert!((q * p).amax() < 1e-14);
            assert!((p + q - id).amax() < 1e-14);
        }
        assert_eq!(ModeProjector::at(&[0.0, 0.0]).compressible, DMatrix::zeros(2, 2));
    }
}
