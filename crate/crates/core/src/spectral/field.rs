use num_complex::Complex64;

use super::Grid;
use crate::error::{Error, Result};

/// A real scalar field with its physical samples and normalized Fourier
/// coefficients held side by side. Both views are always consistent: the
/// constructors compute whichever one was not supplied.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Grid,
    physical: Vec<f64>,
    spectral: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            grid: grid.clone(),
            physical: vec![0.0; grid.len()],
            spectral: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_physical(grid: &Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        let spectral = grid.forward(&samples);
        Ok(ScalarField {
            grid: grid.clone(),
            physical: samples,
            spectral,
        })
    }

    /// Build from coefficients. The input is first projected onto the
    /// Hermitian-symmetric subspace (`c(-k) = conj c(k)`) so the physical
    /// view is exactly real.
    pub fn from_spectral(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        let sym: Vec<Complex64> = grid.exec().map_collect(coeffs.len(), |i| {
            0.5 * (coeffs[i] + coeffs[grid.negated(i)].conj())
        });
        let physical = grid.inverse(&sym);
        Ok(ScalarField {
            grid: grid.clone(),
            physical,
            spectral: sym,
        })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> f64 + Sync + Send) -> Self {
        let samples = grid.exec().map_collect(grid.len(), |i| f(grid.coords(i)));
        Self::from_physical(grid, samples).expect("length matches grid")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn physical(&self) -> &[f64] {
        &self.physical
    }

    pub fn spectral(&self) -> &[Complex64] {
        &self.spectral
    }

    pub fn into_physical(self) -> Vec<f64> {
        self.physical
    }

    /// RMS norm over the grid (normalized torus measure).
    pub fn l2_norm(&self) -> f64 {
        spectral_norm_sq(&self.grid, &self.spectral).sqrt()
    }

    /// Same norm computed from the physical samples.
    pub fn l2_norm_physical(&self) -> f64 {
        let n = self.physical.len();
        (self.grid.exec().sum(n, |i| self.physical[i] * self.physical[i]) / n as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.physical.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.spectral[0].re
    }

    pub fn scaled(&self, factor: f64) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            physical: self.physical.iter().map(|v| v * factor).collect(),
            spectral: self.spectral.iter().map(|c| c * factor).collect(),
        }
    }

    /// Copy with the k = 0 coefficient removed.
    pub fn without_mean(&self) -> Self {
        let m = self.mean();
        let mut spectral = self.spectral.clone();
        spectral[0] = Complex64::new(0.0, 0.0);
        ScalarField {
            grid: self.grid.clone(),
            physical: self.physical.iter().map(|v| v - m).collect(),
            spectral,
        }
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(ScalarField {
            grid: self.grid.clone(),
            physical: zip_map(&self.physical, &other.physical, |a, b| a - b),
            spectral: zip_map(&self.spectral, &other.spectral, |a, b| a - b),
        })
    }
}

/// An `dim`-component real vector field on a [`Grid`].
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Grid,
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        VectorField {
            grid: grid.clone(),
            components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn from_components(grid: &Grid, components: Vec<ScalarField>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "expected {} components, got {}",
                grid.dim(),
                components.len()
            )));
        }
        for c in &components {
            check_same_grid(grid, c.grid())?;
        }
        Ok(VectorField {
            grid: grid.clone(),
            components,
        })
    }

    pub fn from_physical(grid: &Grid, samples: Vec<Vec<f64>>) -> Result<Self> {
        let comps = samples
            .into_iter()
            .map(|s| ScalarField::from_physical(grid, s))
            .collect::<Result<Vec<_>>>()?;
        Self::from_components(grid, comps)
    }

    pub fn from_spectral(grid: &Grid, coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        let comps = coeffs
            .into_iter()
            .map(|c| ScalarField::from_spectral(grid, c))
            .collect::<Result<Vec<_>>>()?;
        Self::from_components(grid, comps)
    }

    /// Sample `f(x)`, which must return at least `dim` components.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> [f64; 3] + Sync + Send) -> Self {
        let values = grid.exec().map_collect(grid.len(), |i| f(grid.coords(i)));
        let samples = (0..grid.dim())
            .map(|a| values.iter().map(|v| v[a]).collect())
            .collect();
        Self::from_physical(grid, samples).expect("length matches grid")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn component(&self, a: usize) -> &ScalarField {
        &self.components[a]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn spectral(&self) -> Vec<&[Complex64]> {
        self.components.iter().map(|c| c.spectral()).collect()
    }

    pub fn physical(&self) -> Vec<&[f64]> {
        self.components.iter().map(|c| c.physical()).collect()
    }

    pub fn spectral_owned(&self) -> Vec<Vec<Complex64>> {
        self.components.iter().map(|c| c.spectral().to_vec()).collect()
    }

    /// `sqrt(Σ_a ‖u_a‖²)` in the RMS norm.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.components
            .iter()
            .map(|c| spectral_norm_sq(&self.grid, c.spectral()))
            .sum()
    }

    /// Largest pointwise Euclidean magnitude `max_x |u(x)|`.
    pub fn max_magnitude(&self) -> f64 {
        let n = self.grid.len();
        self.grid
            .exec()
            .max(n, |i| {
                self.components
                    .iter()
                    .map(|c| c.physical()[i] * c.physical()[i])
                    .sum::<f64>()
            })
            .max(0.0)
            .sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        VectorField {
            grid: self.grid.clone(),
            components: self.components.iter().map(|c| c.scaled(factor)).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        self.combine(other, 1.0, 1.0)
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.combine(other, 1.0, -1.0)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, other: &VectorField, a: f64, b: f64) -> Result<VectorField> {
        check_same_grid(&self.grid, &other.grid)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(x, y)| ScalarField {
                grid: self.grid.clone(),
                physical: zip_map(&x.physical, &y.physical, |p, q| a * p + b * q),
                spectral: zip_map(&x.spectral, &y.spectral, |p, q| p * a + q * b),
            })
            .collect();
        Ok(VectorField {
            grid: self.grid.clone(),
            components,
        })
    }
}

pub(crate) fn spectral_norm_sq(grid: &Grid, c: &[Complex64]) -> f64 {
    grid.exec().sum(c.len(), |i| c[i].norm_sqr())
}

pub(crate) fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!(
            "grids differ: dim {} n {} vs dim {} n {}",
            a.dim(),
            a.n(),
            b.dim(),
            b.n()
        )));
    }
    Ok(())
}

fn zip_map<T: Copy, F: Fn(T, T) -> T>(a: &[T], b: &[T], f: F) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_has_only_mean_mode() {
        let g = Grid::new(2, 8).unwrap();
        let f = ScalarField::from_fn(&g, |_| 1.0);
        assert!((f.spectral()[0].re - 1.0).abs() < 1e-15);
        let rest: f64 = f.spectral()[1..].iter().map(|c| c.norm()).sum();
        assert!(rest < 1e-14);
    }

    #[test]
    fn sine_occupies_plus_minus_one() {
        let g = Grid::new(3, 8).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].sin());
        for (i, c) in f.spectral().iter().enumerate() {
            let k = g.wavevector_int(i);
            if k == [1, 0, 0] || k == [-1, 0, 0] {
                assert!((c.norm() - 0.5).abs() < 1e-14);
            } else {
                assert!(c.norm() < 1e-14, "mode {k:?} = {c}");
            }
        }
        // sin x = (e^{ix} - e^{-ix}) / 2i
        let plus = f.spectral()[g.ravel([1, 0, 0])];
        assert!((plus - Complex64::new(0.0, -0.5)).norm() < 1e-14);
    }

    #[test]
    fn from_spectral_symmetrizes() {
        let g = Grid::new(2, 8).unwrap();
        let mut c = vec![Complex64::new(0.0, 0.0); g.len()];
        c[g.ravel([1, 0, 0])] = Complex64::new(1.0, 0.0);
        let f = ScalarField::from_spectral(&g, c).unwrap();
        // half of the mass ends up on -k: the real part of e^{ix} is cos x
        for i in 0..g.len() {
            let x = g.coords(i);
            assert!((f.physical()[i] - x[0].cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let g = Grid::new(2, 8).unwrap();
        assert!(ScalarField::from_physical(&g, vec![0.0; 10]).is_err());
        let g3 = Grid::new(3, 8).unwrap();
        let a = VectorField::zeros(&g);
        let b = VectorField::zeros(&g3);
        assert!(a.sub(&b).is_err());
    }
}
