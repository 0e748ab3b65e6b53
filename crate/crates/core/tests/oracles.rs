mod common;

use std::f64::consts::PI;

use lamens::io::initial::taylor_green_3d;
use lamens::diagnostics::{energy_identity_residual, hk_inequality_check, sobolev_norm_sq};
use lamens::kernels::{green_matrix_symbol, w_function, z_kernel, KernelPoint};
use lamens::penalty::reference_ns_solve;
use lamens::semigroup::apply_semigroup;
use lamens::spectral::{gradient, partial_derivative};
use lamens::stepper::{integrate, integrate_model, Model, StepperConfig};
use lamens::{Exec, Grid, LameParams, ScalarField, VectorField};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn random_samples(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn fft_matches_direct_dft() {
    for (dim, n) in [(2, 8), (2, 6), (3, 4), (3, 6)] {
        let g = Grid::new(dim, n).unwrap();
        let data = random_samples(g.len(), 11 + n as u64);
        let want = naive_dft(dim, n, &data);
        for exec in [Exec::Serial, Exec::Parallel] {
            let got = g.clone().with_exec(exec).forward(&data);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).norm() < 1e-14, "{dim}D N={n}");
            }
        }
    }
}

#[test]
fn derivative_matches_dft_multiplier() {
    let g = Grid::new(2, 8).unwrap();
    let f = ScalarField::from_physical(&g, random_samples(g.len(), 5)).unwrap();
    let spec = naive_dft(2, 8, f.physical());
    let d1 = partial_derivative(&f, 1);
    for (i, c) in d1.spectral().iter().enumerate() {
        let k1 = resolved_wavenumber(i / 8, 8);
        let want = Complex64::new(0.0, k1) * spec[i];
        assert!((c - want).norm() < 1e-14);
    }
}

#[test]
fn sobolev_norm_matches_binomial_derivative_sum() {
    // (1+|ξ|²)² = 1 + 2(ξ₁²+ξ₂²) + ξ₁⁴ + 2ξ₁²ξ₂² + ξ₂⁴
    let g = Grid::new(2, 8).unwrap();
    let u = VectorField::from_physical(&g, vec![random_samples(64, 1), random_samples(64, 2)]).unwrap();
    let mut total = 0.0;
    for c in u.components() {
        let spec = naive_dft(2, 8, c.physical());
        for (i, v) in spec.iter().enumerate() {
            let k1 = resolved_wavenumber(i % 8, 8);
            let k2 = resolved_wavenumber(i / 8, 8);
            let m = [
                (1.0, 1.0),
                (2.0, k1 * k1),
                (2.0, k2 * k2),
                (1.0, k1.powi(4)),
                (2.0, k1 * k1 * k2 * k2),
                (1.0, k2.powi(4)),
            ];
            total += m.iter().map(|(c, w)| c * w).sum::<f64>() * v.norm_sqr();
        }
    }
    let got = sobolev_norm_sq(&u, 2);
    assert!((got - total).abs() < 1e-10 * total, "{got} vs {total}");
}

#[test]
fn w_matches_radial_quadrature_of_its_definition() {
    for &(r, t, mu, lambda) in &[
        (1.0, 0.5, 1.0, 3.0),
        (0.3, 1.0, 1.0, 2.0),
        (2.5, 0.2, 0.5, 20.0),
        (0.05, 0.7, 2.0, 0.0),
    ] {
        let p = KernelPoint::new([0.0, 0.0, r], t, LameParams::new(mu, lambda).unwrap()).unwrap();
        let got = w_function(&p);
        let want = w_by_radial_quadrature(r, t, mu, lambda);
        assert!((got - want).abs() < 1e-8, "r={r}: {got} vs {want}");
    }
}

#[test]
fn w_integral_equals_minus_penalty_times_t() {
    // Ŵ(0) = lim (e^{−(λ+2μ)|ξ|²t} − e^{−μ|ξ|²t})/|ξ|² = −(λ+μ)t
    let (mu, lambda, t) = (1.0, 3.0, 0.5);
    let params = LameParams::new(mu, lambda).unwrap();
    let outer = 14.0 * (4.0 * (lambda + 2.0 * mu) * t).sqrt();
    let integral: f64 = composite_rule(0.0, outer, 400, 16)
        .iter()
        .map(|(r, w)| {
            let p = KernelPoint::new([*r, 0.0, 0.0], t, params).unwrap();
            w * 4.0 * PI * r * r * w_function(&p)
        })
        .sum();
    assert!((integral + (lambda + mu) * t).abs() < 1e-9, "{integral}");
}

#[test]
fn z_kernel_matches_fourier_quadrature() {
    for &(x, t, mu, lambda) in &[
        ([3.0, 4.0, 0.0], 0.5, 1.0, 50.0),
        ([0.4, -0.2, 0.7], 0.3, 1.0, 3.0),
        ([0.0, 0.0, 0.0], 1.0, 0.5, 1.0),
        ([1.0, 1.0, -1.0], 0.8, 2.0, -1.0),
    ] {
        let p = KernelPoint::new(x, t, LameParams::new(mu, lambda).unwrap()).unwrap();
        let want = z_by_fourier_quadrature(x, t, mu, lambda);
        let err = (z_kernel(&p) - want).abs().max();
        assert!(err < 1e-10, "x={x:?}: {err:e}");
    }
}

#[test]
fn green_symbol_matches_complex_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let xi: [f64; 3] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
        let b: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let mu = rng.random_range(0.2..2.0);
        let lambda = rng.random_range(-mu..10.0);
        let c0 = rng.random_range(0.0..3.0);
        let d = rng.random_range(0.0..0.5);
        let params = LameParams::new(mu, lambda).unwrap();
        let got = green_matrix_symbol(xi, d, &params, b, c0).unwrap();
        let k2: f64 = xi.iter().map(|v| v * v).sum();
        let bxi: f64 = (0..3).map(|i| b[i] * xi[i]).sum();
        let gen = DMatrix::<Complex64>::from_fn(3, 3, |i, j| {
            let diag = if i == j {
                Complex64::new(mu * k2 + c0, bxi)
            } else {
                Complex64::new(0.0, 0.0)
            };
            -(diag + (lambda + mu) * xi[i] * xi[j]) * d
        });
        let want = gen.exp();
        let scale = (-mu * k2 * d).exp();
        for i in 0..3 {
            for j in 0..3 {
                assert!((got[(i, j)] - want[(i, j)]).norm() < 1e-12);
                assert!(got[(i, j)].norm() <= 2.0 * scale + 1e-15);
            }
        }
    }
}

fn single_mode(g: &Grid, k: [f64; 3], amp: [f64; 3]) -> VectorField {
    VectorField::from_fn(g, |x| {
        let phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
        [amp[0] * phase.cos(), amp[1] * phase.cos(), amp[2] * phase.cos()]
    })
}

#[test]
fn stokes_single_mode_energy_law() {
    // solenoidal mode k = (1,1), a ⟂ k
    let g = Grid::new(2, 16).unwrap();
    let u = single_mode(&g, [1.0, 1.0, 0.0], [1.0, -1.0, 0.0]);
    let dt = 1e-2;
    let traj = integrate(&u.scaled(1e-6), 1.0, &LameParams::new(0.3, 5.0).unwrap(), &StepperConfig::with_dt(dt)).unwrap();
    let res = energy_identity_residual(&traj, 0.3);
    assert!(res <= 10.0 * dt * dt, "{res}");
    let zero = integrate(&VectorField::zeros(&g), 0.1, &LameParams::heat(1.0).unwrap(), &StepperConfig::with_dt(dt)).unwrap();
    assert_eq!(energy_identity_residual(&zero, 1.0), 0.0);
}

#[test]
fn reference_solver_tiny_3d_mode_is_stokes() {
    let g = Grid::new(3, 8).unwrap();
    let (mu, t_end) = (0.5, 0.2);
    let amp = 1e-8;
    let u = single_mode(&g, [0.0, 1.0, 1.0], [amp, 0.0, 0.0]);
    let traj = reference_ns_solve(&u, t_end, mu, &StepperConfig::with_dt(1e-2)).unwrap();
    let want = u.scaled((-mu * 2.0 * t_end).exp());
    let err = traj.last().field.sub(&want).unwrap().l2_norm();
    assert!(err < 1e-18, "{err:e}");
}

#[test]
fn hk_constant_stable_under_refinement() {
    let g = Grid::new(2, 32).unwrap();
    // steepening Burgers profile, so ‖u‖_{H¹} grows and the fitted constant is positive
    let mu = 0.05;
    let phi = VectorField::from_fn(&g, |x| [x[0].sin(), 0.0, 0.0]);
    let params = LameParams::heat(mu).unwrap();
    let fit = |dt: f64| {
        let traj = integrate(&phi, 0.3, &params, &StepperConfig::with_dt(dt)).unwrap();
        hk_inequality_check(&traj, 1).unwrap()
    };
    let (coarse, fine) = (fit(2e-3), fit(1e-3));
    assert!(coarse.is_finite() && coarse > 0.0);
    assert!((coarse - fine).abs() <= 0.1 * fine, "{coarse} vs {fine}");
}

#[test]
fn hk_constant_comparable_across_lambda() {
    // 3D vortex stretching, so the H¹ norm grows at small viscosity
    let g = Grid::new(3, 16).unwrap();
    let mu = 0.01;
    let phi = taylor_green_3d(&g);
    let cfg = StepperConfig::with_dt(5e-3);
    let mut fitted = Vec::new();
    for lambda in [1e2, 1e4] {
        let traj = integrate(&phi, 1.0, &LameParams::new(mu, lambda).unwrap(), &cfg).unwrap();
        fitted.push(hk_inequality_check(&traj, 1).unwrap());
    }
    println!("fitted c_1 at λ = 1e2, 1e4: {fitted:?}");
    assert!(fitted.iter().all(|c| c.is_finite() && *c > 0.0));
    let (lo, hi) = (fitted[0].min(fitted[1]), fitted[0].max(fitted[1]));
    assert!(hi <= 2.0 * lo, "{fitted:?}");
}

#[test]
fn linear_stokes_run_has_zero_hk_constant() {
    let g = Grid::new(2, 16).unwrap();
    let u = single_mode(&g, [1.0, 1.0, 0.0], [1e-9, -1e-9, 0.0]);
    let traj = integrate_model(&u, 0.2, Model::NavierStokes { mu: 0.5 }, &StepperConfig::with_dt(1e-2)).unwrap();
    assert_eq!(hk_inequality_check(&traj, 0).unwrap(), 0.0);
    assert_eq!(hk_inequality_check(&traj, 1).unwrap(), 0.0);
}

#[test]
fn semigroup_on_gradient_matches_compressive_heat() {
    let g = Grid::new(3, 8).unwrap();
    let f = ScalarField::from_fn(&g, |x| (x[0] + 2.0 * x[2]).sin());
    let u = gradient(&f);
    let (mu, lambda, t) = (0.4, 2.0, 0.3);
    let out = apply_semigroup(&u, t, &LameParams::new(mu, lambda).unwrap()).unwrap();
    let want = u.scaled((-(lambda + 2.0 * mu) * 5.0 * t).exp());
    assert!(out.sub(&want).unwrap().l2_norm() < 1e-15);
}
