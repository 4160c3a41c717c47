//! Dense linear algebra used by everything else in the crate.

pub mod matrix;
pub mod qr;
pub mod stats;
pub mod svd;

pub use matrix::{axpy, dot, norm2, sub_vec, DenseMatrix};
pub use qr::{least_squares, orthonormalize, solve_square, thin_qr, ThinQr};
pub use svd::{singular_values, spectral_norm, svd, SvdFactorization};
