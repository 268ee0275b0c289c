//! Periodic-box geometry, spectral differentiation and the Helmholtz/Leray split.

mod field;
mod grid;
mod ops;

pub use field::{accurate_sum, ScalarField, Spectrum, VectorField, VectorSpectrum};
pub use grid::{make_grid, poincare_constant, GridSpec, TorusGrid, MIN_RESOLUTION};
pub use ops::{
    advect, curl, dealias, div, div_spectral, grad, grad_norm, grad_spectral, inv_neg_laplacian,
    inv_neg_laplacian_spectral, laplacian, leray_project, leray_project_spectral, strip_nyquist,
    vector_grad_norm, vector_laplacian,
};

pub(crate) use field::check_same;
