//! Pseudospectral solver for the parabolic inertia Lamé equations on the
//! periodic torus, and the grad-div penalty route from them to the
//! incompressible Navier-Stokes equations.
//!
//! * [`spectral`]: grids, transforms, projectors, dealiasing.
//! * [`semigroup`]: the exact linear propagator `e^{-tL}` and its
//!   Poisson-potential representation.
//! * [`stepper`]: Duhamel/Picard time stepping of the nonlinear system and
//!   the Cole-Hopf Burgers oracle.
//! * [`penalty`]: λ sweeps, pressure recovery and the Leray-projected
//!   reference solver.
//! * [`kernels`]: free-space fundamental solution and Gaussian-bound fits.
//! * [`diagnostics`]: norms, energy bookkeeping and inequality monitors.
//! * [`io`]: configuration, snapshots, manifests, reports and run pipelines.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod io;
pub mod kernels;
pub mod penalty;
pub mod semigroup;
pub mod spectral;
pub mod stepper;

pub use error::{Error, Result};
pub use exec::Exec;
pub use semigroup::LameParams;
pub use spectral::{Grid, ScalarField, VectorField};
