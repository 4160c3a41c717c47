//! Numerical laboratory for linear discrete ill-posed problems.
//!
//! The crate generates test problems, perturbs them with white noise,
//! regularizes them with truncated SVD and with LSQR on top of Golub-Kahan
//! bidiagonalization, and measures how well the Krylov subspaces capture the
//! dominant singular subspaces.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod gallery;
pub mod golub_kahan;
pub mod lsqr;
pub mod noise;
pub mod numerics;
pub mod random;
pub mod tsvd;

pub use error::{Error, Result};
pub use numerics::{DenseMatrix, SvdFactorization};
