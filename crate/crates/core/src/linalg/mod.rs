//! Dense complex linear algebra.

mod eigen;
mod matrix;

pub(crate) use eigen::diagonalize_in_place;
pub use eigen::{hermitian_eig, hermitian_eigenvalues, HermitianSpectrum, HERMITIAN_TOL, OFF_DIAGONAL_TOL};
pub use matrix::{tensor, ComplexMatrix, ONE, ZERO};
