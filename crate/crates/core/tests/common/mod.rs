//! Independent oracles shared by the integration tests. Nothing here calls
//! into the solver's numerics.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on `[a, b]` with `panels` panels of `order` points.
pub fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

/// Direct `O(N^{2d})` DFT with the solver's normalisation (`1/N^d`),
/// axis 0 fastest.
pub fn naive_dft(dim: usize, n: usize, data: &[f64]) -> Vec<Complex64> {
    let len = n.pow(dim as u32);
    let idx = |mut i: usize| {
        let mut out = [0usize; 3];
        for o in out.iter_mut().take(dim) {
            *o = i % n;
            i /= n;
        }
        out
    };
    (0..len)
        .map(|k| {
            let kk = idx(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in data.iter().enumerate() {
                let jj = idx(j);
                let phase: f64 = (0..dim).map(|a| (kk[a] * jj[a]) as f64).sum::<f64>();
                acc += v * Complex64::from_polar(1.0, -2.0 * PI * phase / n as f64);
            }
            acc / len as f64
        })
        .collect()
}

/// Signed integer wavenumber of FFT index `j`, with Nyquist mapped to 0.
pub fn resolved_wavenumber(j: usize, n: usize) -> f64 {
    let h = n / 2;
    if j < h {
        j as f64
    } else if j == h {
        0.0
    } else {
        j as f64 - n as f64
    }
}

/// `exp(−t(μ|ξ|²I + (λ+μ)ξξᵀ))` by nalgebra's Padé scaling-and-squaring.
/// Its error grows like `ε·‖tA‖`, so callers keep `‖tA‖` moderate.
pub fn expm_symbol(xi: &[f64], t: f64, mu: f64, lambda: f64) -> DMatrix<f64> {
    let d = xi.len();
    let k2: f64 = xi.iter().map(|v| v * v).sum();
    let gen = DMatrix::from_fn(d, d, |i, j| {
        let diag = if i == j { mu * k2 } else { 0.0 };
        -t * (diag + (lambda + mu) * xi[i] * xi[j])
    });
    gen.exp()
}

/// Spherical Bessel functions `(j0, j1/z, j2)`.
fn bessel(z: f64) -> (f64, f64, f64) {
    if z < 0.05 {
        let z2 = z * z;
        (
            1.0 - z2 / 6.0 + z2 * z2 / 120.0 - z2 * z2 * z2 / 5040.0,
            1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0 - z2 * z2 * z2 / 45360.0,
            z2 / 15.0 - z2 * z2 / 210.0 + z2 * z2 * z2 / 7560.0,
        )
    } else {
        let (s, c) = z.sin_cos();
        let j0 = s / z;
        let j1 = s / (z * z) - c / z;
        let j2 = (3.0 / (z * z) - 1.0) * s / z - 3.0 * c / (z * z);
        (j0, j1 / z, j2)
    }
}

/// Inverse Fourier transform of `e^{−μ|ξ|²t}Q + e^{−(λ+2μ)|ξ|²t}P` at `x`,
/// reduced to a radial integral with spherical Bessel functions.
pub fn z_by_fourier_quadrature(x: [f64; 3], t: f64, mu: f64, lambda: f64) -> Matrix3<f64> {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let xh = if r > 0.0 { [x[0] / r, x[1] / r, x[2] / r] } else { [0.0; 3] };
    let kappa = lambda + 2.0 * mu;
    let rho_max = (60.0 / (mu * t)).sqrt();
    let panels = (rho_max * r.max(1.0) / 2.0).ceil() as usize + 40;
    let mut iso = 0.0;
    let mut aniso = 0.0;
    for (rho, w) in composite_rule(0.0, rho_max, panels, 16) {
        let ss = (-mu * rho * rho * t).exp();
        let sc = (-kappa * rho * rho * t).exp();
        let (j0, j1z, j2) = bessel(rho * r);
        iso += w * rho * rho * (ss * j0 + (sc - ss) * j1z);
        aniso += w * rho * rho * (sc - ss) * j2;
    }
    let c = 1.0 / (2.0 * PI * PI);
    Matrix3::from_fn(|i, j| c * (if i == j { iso } else { 0.0 } - aniso * xh[i] * xh[j]))
}

/// `W(r)` from its definition as the Newtonian potential of
/// `ρ = G_κ − G_μ` (difference of heat kernels), using the shell theorem:
/// `W(r) = (1/r)∫_0^r ρ s² ds + ∫_r^∞ ρ s ds`.
pub fn w_by_radial_quadrature(r: f64, t: f64, mu: f64, lambda: f64) -> f64 {
    let kappa = lambda + 2.0 * mu;
    let g = |d: f64, s: f64| (4.0 * PI * d * t).powf(-1.5) * (-s * s / (4.0 * d * t)).exp();
    let rho = |s: f64| g(kappa, s) - g(mu, s);
    let outer = 12.0 * (4.0 * kappa * t).sqrt() + r;
    let inner: f64 = composite_rule(0.0, r, 200, 16).iter().map(|(s, w)| w * rho(*s) * s * s).sum();
    let tail: f64 = composite_rule(r, outer, 400, 16).iter().map(|(s, w)| w * rho(*s) * s).sum();
    inner / r + tail
}

/// Viscous Burgers solution from `θ₀ = 2 + cos x₁`: first component.
pub fn burgers_closed_form(x1: f64, mu: f64, t: f64) -> f64 {
    let e = (-mu * t).exp();
    2.0 * mu * e * x1.sin() / (2.0 + e * x1.cos())
}

/// Decaying 2D Taylor-Green vortex.
pub fn taylor_green(x: [f64; 3], mu: f64, t: f64) -> [f64; 2] {
    let d = (-2.0 * mu * t).exp();
    [d * x[0].sin() * x[1].cos(), -d * x[0].cos() * x[1].sin()]
}

/// Its pressure `¼e^{−4μt}(cos 2x₁ + cos 2x₂)`.
pub fn taylor_green_pressure(x: [f64; 3], mu: f64, t: f64) -> f64 {
    0.25 * (-4.0 * mu * t).exp() * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos())
}

/// Tensor-product composite Gauss-Legendre over `[-l, l]³`.
pub fn box_rule(l: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    composite_rule(-l, l, panels, order)
}
