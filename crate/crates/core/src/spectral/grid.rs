use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exec::Exec;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// A `dim`-dimensional torus `[0, 2π)^dim` sampled with `n` points per axis.
///
/// Flat indices run with axis 0 fastest: `idx = i0 + n*i1 + n²*i2`. Spectral
/// arrays use the same layout in FFT order, so axis index `j` carries the
/// integer wavenumber `j` for `j <= n/2` and `j - n` above it.
#[derive(Clone)]
pub struct Grid {
    dim: usize,
    n: usize,
    exec: Exec,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("exec", &self.exec)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n
    }
}

impl Grid {
    pub fn new(dim: usize, n_per_axis: usize) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if !n_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "odd resolution {n_per_axis}: points per axis must be even"
            )));
        }
        if n_per_axis < 4 {
            return Err(Error::InvalidGrid(format!(
                "resolution {n_per_axis} too small: need at least 4 points per axis"
            )));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n_per_axis),
            inverse: planner.plan_fft_inverse(n_per_axis),
        };
        Ok(Grid {
            dim,
            n: n_per_axis,
            exec: Exec::default(),
            plans: Arc::new(plans),
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn nyquist(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Signed integer wavenumber of FFT-ordered axis index `j`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Per-axis wavenumbers in FFT order.
    pub fn axis_wavenumbers(&self) -> Vec<i64> {
        (0..self.n).map(|j| self.wavenumber(j)).collect()
    }

    /// Per-axis wavenumbers sorted ascending, `{-n/2+1, …, n/2}`.
    pub fn sorted_wavenumbers(&self) -> Vec<i64> {
        let h = self.nyquist();
        (-h + 1..=h).collect()
    }

    /// Multi-index of a flat index; unused axes are 0.
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut r = idx;
        for slot in out.iter_mut().take(self.dim) {
            *slot = r % self.n;
            r /= self.n;
        }
        out
    }

    pub fn ravel(&self, ijk: [usize; 3]) -> usize {
        let mut idx = 0;
        for a in (0..self.dim).rev() {
            idx = idx * self.n + ijk[a];
        }
        idx
    }

    /// Integer wavevector of a spectral index (full, Nyquist included).
    pub fn wavevector_int(&self, idx: usize) -> [i64; 3] {
        let m = self.unravel(idx);
        let mut k = [0i64; 3];
        for a in 0..self.dim {
            k[a] = self.wavenumber(m[a]);
        }
        k
    }

    /// Wavevector used by every differential symbol: the Nyquist component
    /// of each axis is replaced by 0.
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let k = self.wavevector_int(idx);
        let h = self.nyquist();
        let mut out = [0.0; 3];
        for a in 0..self.dim {
            out[a] = if k[a] == h { 0.0 } else { k[a] as f64 };
        }
        out
    }

    /// `|k|²` of the resolved wavevector.
    pub fn k_sq(&self, idx: usize) -> f64 {
        let k = self.wavevector(idx);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// Flat index of the wavevector `-k`.
    pub fn negated(&self, idx: usize) -> usize {
        let m = self.unravel(idx);
        let mut out = [0usize; 3];
        for a in 0..self.dim {
            out[a] = (self.n - m[a]) % self.n;
        }
        self.ravel(out)
    }

    /// Physical coordinates of a grid point; unused axes are 0.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let m = self.unravel(idx);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = m[a] as f64 * h;
        }
        x
    }

    /// Forward transform of real samples into normalized coefficients
    /// `c_k = n^{-dim} Σ_x u(x) e^{-ik·x}`.
    pub fn forward(&self, samples: &[f64]) -> Vec<Complex64> {
        assert_eq!(samples.len(), self.len(), "sample count does not match grid");
        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, true);
        let scale = 1.0 / self.len() as f64;
        self.exec.for_each_indexed_mut(&mut data, |_, c| *c *= scale);
        data
    }

    /// Inverse transform; returns the real part of `Σ_k c_k e^{ik·x}`.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.len(), "coefficient count does not match grid");
        let mut data = coeffs.to_vec();
        self.transform(&mut data, false);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Unnormalized in-place multi-dimensional FFT. Each pass transforms the
    /// contiguous axis and then rotates the axes so the next one becomes
    /// contiguous; after `dim` passes the original layout is restored.
    fn transform(&self, data: &mut Vec<Complex64>, forward: bool) {
        let n = self.n;
        let fft = if forward {
            &self.plans.forward
        } else {
            &self.plans.inverse
        };
        let lines_per_task = (4096 / n).max(1);
        let stride = n.pow(self.dim as u32 - 1);
        let mut rotated = vec![Complex64::new(0.0, 0.0); data.len()];
        for _ in 0..self.dim {
            self.exec.for_each_chunk_mut(data, n * lines_per_task, |_, chunk| {
                let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
                fft.process_with_scratch(chunk, &mut scratch);
            });
            let src: &[Complex64] = data;
            self.exec.for_each_chunk_mut(&mut rotated, n, |ci, out| {
                for (j, o) in out.iter_mut().enumerate() {
                    let pos = ci * n + j;
                    *o = src[pos / stride + n * (pos % stride)];
                }
            });
            std::mem::swap(data, &mut rotated);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_2d_8() {
        let g = Grid::new(2, 8).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.sorted_wavenumbers(), vec![-3, -2, -1, 0, 1, 2, 3, 4]);
        assert_eq!(g.axis_wavenumbers(), vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }

    #[test]
    fn layout_3d_4() {
        let g = Grid::new(3, 4).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.sorted_wavenumbers(), vec![-1, 0, 1, 2]);
    }

    #[test]
    fn rejects_bad_resolutions() {
        let err = Grid::new(2, 7).unwrap_err();
        assert!(err.to_string().contains("odd"), "{err}");
        assert!(Grid::new(2, 2).is_err());
        assert!(Grid::new(1, 8).is_err());
        assert!(Grid::new(4, 8).is_err());
    }

    #[test]
    fn ravel_unravel_and_negation() {
        let g = Grid::new(3, 6).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.ravel(g.unravel(idx)), idx);
            let k = g.wavevector_int(idx);
            let nk = g.wavevector_int(g.negated(idx));
            for a in 0..3 {
                if k[a] == g.nyquist() {
                    assert_eq!(nk[a], k[a]);
                } else {
                    assert_eq!(nk[a], -k[a]);
                }
            }
        }
    }

    #[test]
    fn nyquist_resolved_to_zero() {
        let g = Grid::new(2, 8).unwrap();
        let idx = g.ravel([4, 1, 0]);
        assert_eq!(g.wavevector(idx), [0.0, 1.0, 0.0]);
        assert_eq!(g.wavevector_int(idx), [4, 1, 0]);
    }
}
