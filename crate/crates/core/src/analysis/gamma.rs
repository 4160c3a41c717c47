use crate::error::{Error, Result};
use crate::golub_kahan::BidiagState;
use crate::numerics::{singular_values, spectral_norm, DenseMatrix};

/// `γ_k = ‖A(I − Q_k Q_k^T)‖` from the explicit residual matrix.
pub fn gamma_exact(a: &DenseMatrix, q_k: &DenseMatrix) -> Result<f64> {
    let aq = a.matmul(q_k);
    let proj = aq.matmul(&q_k.transpose());
    spectral_norm(&a.sub(&proj))
}

/// Trailing block `G_k` of a complete factorization: diagonal
/// `α_{k+1}..α_n`, subdiagonal `β_{k+2}..β_{n+1}`.
pub fn trailing_block(state: &BidiagState, k: usize) -> Result<DenseMatrix> {
    if !state.is_complete() {
        return Err(Error::InvalidParameter("G_k needs a complete bidiagonalization".into()));
    }
    let n = state.alphas().len();
    if k >= n {
        return Err(Error::InvalidParameter(format!("G_k needs k < n = {n}, got {k}")));
    }
    let cols = n - k;
    let mut g = DenseMatrix::zeros(cols + 1, cols);
    for j in 0..cols {
        g[(j, j)] = state.alphas()[k + j];
        g[(j + 1, j)] = state.betas()[k + j + 1];
    }
    Ok(g)
}

/// `‖G_k‖`, which equals `γ_k` by orthogonal invariance.
pub fn gamma_via_gk(state: &BidiagState, k: usize) -> Result<f64> {
    let g = trailing_block(state, k)?;
    Ok(singular_values(&g)?[0])
}
