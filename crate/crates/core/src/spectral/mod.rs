//! Periodic grids on `[0, 2π)^dim`, FFT-backed fields and mode-wise operators.

mod field;
mod grid;
pub(crate) mod ops;

pub use field::{ScalarField, VectorField};
pub use grid::Grid;
pub use ops::{
    dealias, dealias_scalar, divergence, gradient, is_dealiased_mode, partial_derivative,
    project_compressible, project_solenoidal, ModeProjector,
};
