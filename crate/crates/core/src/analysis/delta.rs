//! The matrix `Δ_k` relating the Krylov subspace `span(Q_k)` to the
//! dominant right singular subspace `span(V_k)`, computed three ways:
//!
//! * angles: `‖sin Θ‖ = ‖(I − Q_k Q_k^T) V_k‖` and `‖Δ_k‖ = ‖tan Θ‖`;
//! * subspace: `Δ_k = (V_⊥^T Q_k)(V_k^T Q_k)^{-1}`, since `span(Q_k)` equals
//!   `span(V_k + V_⊥ Δ_k)`;
//! * direct: `Δ_k = D_2 T_{k2} T_{k1}^{-1} D_1^{-1}` with `D = diag(σ_j u_j^T b)`
//!   and the Vandermonde matrix `T_k` in `σ_j²`. The product `T_{k2} T_{k1}^{-1}`
//!   holds the Lagrange basis polynomials on the nodes `σ_1², …, σ_k²`
//!   evaluated at `σ_i²`, which is how it is formed here.

use crate::error::{Error, Result};
use crate::numerics::{singular_values, solve_square, spectral_norm, DenseMatrix, SvdFactorization};

/// Gate on the Vandermonde block for the direct route.
pub const DIRECT_COND_LIMIT: f64 = 1e12;
/// `sin Θ` this close to one reports `‖Δ_k‖` as infinite.
pub const SIN_ONE_TOL: f64 = 1e-12;
/// Relative gap under which Lagrange factors are refused.
pub const LAGRANGE_GAP: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleDelta {
    pub sin_theta: f64,
    /// `tan Θ`; `+∞` when the subspaces are numerically orthogonal somewhere.
    pub delta_norm: f64,
}

pub fn delta_norm_via_angles(svd: &SvdFactorization, q_k: &DenseMatrix) -> Result<AngleDelta> {
    let k = q_k.cols();
    let v_k = svd.v.leading_columns(k);
    let coupling = q_k.tr_matmul(&v_k);
    let residual = v_k.sub(&q_k.matmul(&coupling));
    let sin_theta = spectral_norm(&residual)?.min(1.0);
    Ok(AngleDelta {
        sin_theta,
        delta_norm: tangent_from_sine(sin_theta),
    })
}

pub fn tangent_from_sine(sin_theta: f64) -> f64 {
    if sin_theta >= 1.0 - SIN_ONE_TOL {
        f64::INFINITY
    } else {
        sin_theta / ((1.0 - sin_theta) * (1.0 + sin_theta)).sqrt()
    }
}

/// `Δ_k` from the basis `Q_k` and the right singular vectors.
pub fn delta_subspace(svd: &SvdFactorization, q_k: &DenseMatrix) -> Result<DenseMatrix> {
    let k = q_k.cols();
    let n = svd.v.cols();
    let coeffs = svd.v.tr_matmul(q_k);
    let x = coeffs.submatrix(0..k, 0..k);
    let y = coeffs.submatrix(k..n, 0..k);
    // Δ = Y X^{-1}  ⇔  Δ^T = X^{-T} Y^T.
    Ok(solve_square(&x.transpose(), &y.transpose())?.transpose())
}

pub(crate) fn scale_columns(m: &DenseMatrix, s: &[f64]) -> DenseMatrix {
    let mut out = m.clone();
    for (j, &f) in s.iter().enumerate() {
        for v in out.column_mut(j) {
            *v *= f;
        }
    }
    out
}

/// `‖Δ_k Σ_k‖ = ‖Σ_k Δ_k^T‖` via the subspace route.
pub fn sigma_delta_norm_subspace(svd: &SvdFactorization, q_k: &DenseMatrix) -> Result<f64> {
    let k = q_k.cols();
    let d = delta_subspace(svd, q_k)?;
    spectral_norm(&scale_columns(&d, &svd.singular_values[..k]))
}

/// `|L_j^{(k)}(0)|` for `j = 1..=k` and their maximum.
pub fn lagrange_factors(sigma: &[f64], k: usize) -> Result<(Vec<f64>, f64)> {
    assert!(k >= 1 && k <= sigma.len());
    let s2: Vec<f64> = sigma[..k].iter().map(|s| s * s).collect();
    let mut per_j = Vec::with_capacity(k);
    for j in 0..k {
        let mut prod = 1.0;
        for i in 0..k {
            if i == j {
                continue;
            }
            let gap = (s2[j] - s2[i]).abs();
            if gap <= LAGRANGE_GAP * s2[j].max(s2[i]) {
                return Err(Error::RepeatedSingularValues(i.min(j) + 1, i.max(j) + 1));
            }
            prod *= s2[i] / gap;
        }
        per_j.push(prod);
    }
    let max = per_j.iter().cloned().fold(0.0, f64::max);
    Ok((per_j, max))
}

/// Nonzero `u_i^T b` for `i < upto`, or the offending 1-based index.
fn checked_coefficients(svd: &SvdFactorization, b: &[f64], upto: usize) -> Result<Vec<f64>> {
    let c = svd.coefficients(b);
    if let Some(i) = c[..upto].iter().position(|&v| v == 0.0) {
        return Err(Error::ZeroCoefficient { index: i + 1 });
    }
    Ok(c)
}

/// Condition number of the Vandermonde block `T_{k1}`.
pub fn vandermonde_condition(sigma: &[f64], k: usize) -> Result<f64> {
    let t = DenseMatrix::from_fn(k, k, |i, j| (sigma[i] * sigma[i]).powi(j as i32));
    let s = singular_values(&t)?;
    let smin = *s.last().expect("k >= 1");
    Ok(if smin == 0.0 { f64::INFINITY } else { s[0] / smin })
}

/// Explicit `(n−k)×k` matrix `Δ_k`, refused when `cond(T_{k1})` exceeds
/// [`DIRECT_COND_LIMIT`].
pub fn delta_direct(svd: &SvdFactorization, b: &[f64], k: usize) -> Result<DenseMatrix> {
    let sigma = &svd.singular_values;
    let n = sigma.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("delta needs 1 <= k < n = {n}, got {k}")));
    }
    let cond = vandermonde_condition(sigma, k)?;
    if !(cond <= DIRECT_COND_LIMIT) {
        return Err(Error::Conditioning {
            estimate: cond,
            limit: DIRECT_COND_LIMIT,
        });
    }
    lagrange_factors(sigma, k)?;
    let c = checked_coefficients(svd, b, k)?;
    let s2: Vec<f64> = sigma.iter().map(|s| s * s).collect();
    Ok(DenseMatrix::from_fn(n - k, k, |r, j| {
        let i = k + r;
        let mut l = 1.0;
        for q in 0..k {
            if q != j {
                l *= (s2[i] - s2[q]) / (s2[j] - s2[q]);
            }
        }
        sigma[i] * c[i] * l / (sigma[j] * c[j])
    }))
}

/// `‖Σ_k Δ_k^T‖` from the direct construction.
pub fn sigma_delta_norm_direct(svd: &SvdFactorization, b: &[f64], k: usize) -> Result<f64> {
    let d = delta_direct(svd, b, k)?;
    spectral_norm(&scale_columns(&d, &svd.singular_values[..k]))
}

/// The rank-one majorant `|Δ̃_k|` with entries `|σ_i u_i^T b| / |σ_j u_j^T b|`.
pub fn delta_rank_one(svd: &SvdFactorization, b: &[f64], k: usize) -> Result<DenseMatrix> {
    let n = svd.singular_values.len();
    let c = checked_coefficients(svd, b, k)?;
    let s = &svd.singular_values;
    Ok(DenseMatrix::from_fn(n - k, k, |r, j| {
        ((s[k + r] * c[k + r]) / (s[j] * c[j])).abs()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::svd;

    #[test]
    fn lagrange_examples() {
        let (_, m) = lagrange_factors(&[5.0], 1).unwrap();
        assert_eq!(m, 1.0);
        let (per, m) = lagrange_factors(&[2.0, 1.0], 2).unwrap();
        assert!((per[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((per[1] - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(m, per[1]);
        assert!(matches!(lagrange_factors(&[1.0, 1.0], 2), Err(Error::RepeatedSingularValues(1, 2))));
    }

    #[test]
    fn mild_blow_up() {
        let sigma: Vec<f64> = (1..=8).map(|i| (i as f64).powf(-0.6)).collect();
        assert!(lagrange_factors(&sigma, 8).unwrap().1 > 10.0);
    }

    #[test]
    fn identical_subspaces() {
        let f = svd(&DenseMatrix::from_diag(&[3.0, 2.0, 1.0])).unwrap();
        let d = delta_norm_via_angles(&f, &f.v.leading_columns(2)).unwrap();
        assert_eq!((d.sin_theta, d.delta_norm), (0.0, 0.0));
    }

    #[test]
    fn two_by_two_closed_form() {
        // A = diag(1, 1/2), b = (1, 1): span(Q_1) = span(A^T b) = span((1, 1/2)),
        // so tan Θ = (1/2)/1 and Δ_1 = σ_2 b_2 / (σ_1 b_1) = 1/2.
        let f = svd(&DenseMatrix::from_diag(&[1.0, 0.5])).unwrap();
        let q = DenseMatrix::new(2, 1, vec![2.0 / 5f64.sqrt(), 1.0 / 5f64.sqrt()]).unwrap();
        let ang = delta_norm_via_angles(&f, &q).unwrap();
        assert!((ang.delta_norm - 0.5).abs() < 1e-15);
        let direct = delta_direct(&f, &[1.0, 1.0], 1).unwrap();
        assert!((direct[(0, 0)] - 0.5).abs() < 1e-15);
        let sub = delta_subspace(&f, &q).unwrap();
        assert!((sub[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_subspace_is_infinite() {
        let f = svd(&DenseMatrix::from_diag(&[2.0, 1.0])).unwrap();
        let q = DenseMatrix::new(2, 1, vec![0.0, 1.0]).unwrap();
        assert_eq!(delta_norm_via_angles(&f, &q).unwrap().delta_norm, f64::INFINITY);
    }

    #[test]
    fn direct_refuses_bad_input() {
        let f = svd(&DenseMatrix::from_diag(&[3.0, 2.0, 1.0])).unwrap();
        assert!(matches!(delta_direct(&f, &[0.0, 1.0, 1.0], 1), Err(Error::ZeroCoefficient { index: 1 })));
        assert!(delta_direct(&f, &[1.0, 1.0, 1.0], 3).is_err());
        let graded: Vec<f64> = (0..12).map(|j| 10f64.powi(-j)).collect();
        let g = svd(&DenseMatrix::from_diag(&graded)).unwrap();
        assert!(matches!(delta_direct(&g, &[1.0; 12], 6), Err(Error::Conditioning { .. })));
    }
}
