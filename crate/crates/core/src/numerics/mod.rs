//! Dense complex linear algebra for small square matrices, plus seeded sampling.

mod eig;
mod matrix;
mod qr;
mod random;
mod svd;

pub use eig::{hermitian_eig, hermitian_eig_with_tol};
pub use matrix::{frobenius_distance, ComplexMatrix, RealMatrix, C64};
pub use qr::{least_squares, qr, LeastSquares};
pub use random::{complex_normal, ginibre, haar_unitary, haar_unitary_with, RngStream};
pub use svd::{svd, SvdResult};

pub const UNITARY_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const RECONSTRUCTION_TOL: f64 = 1e-10;
pub const STOCHASTIC_TOL: f64 = 1e-12;
