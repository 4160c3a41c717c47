use super::matrix::{norm2, DenseMatrix};
use super::svd::svd;
use crate::error::{Error, Result};

/// Thin Householder QR of a tall matrix, with `R` normalized to a
/// non-negative diagonal.
pub struct ThinQr {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

pub fn thin_qr(a: &DenseMatrix) -> Result<ThinQr> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::Shape(format!("thin QR needs rows >= cols, got {m}x{n}")));
    }
    let mut w = a.clone();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n);
    let mut r = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let x = &w.column(j)[j..];
        let alpha = x[0];
        let tail = norm2(&x[1..]);
        let (v, tau, beta) = if tail == 0.0 {
            let mut v = vec![0.0; m - j];
            v[0] = 1.0;
            (v, 0.0, alpha)
        } else {
            let beta = if alpha >= 0.0 {
                -alpha.hypot(tail)
            } else {
                alpha.hypot(tail)
            };
            let scale = 1.0 / (alpha - beta);
            let mut v = Vec::with_capacity(m - j);
            v.push(1.0);
            v.extend(x[1..].iter().map(|t| t * scale));
            (v, (beta - alpha) / beta, beta)
        };
        r[(j, j)] = beta;
        for c in j + 1..n {
            let col = &mut w.column_mut(c)[j..];
            let s: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
            let f = tau * s;
            for (y, vi) in col.iter_mut().zip(&v) {
                *y -= f * vi;
            }
            r[(j, c)] = col[0];
        }
        reflectors.push((v, tau));
    }

    let mut q = DenseMatrix::zeros(m, n);
    for j in 0..n {
        q[(j, j)] = 1.0;
    }
    for (j, (v, tau)) in reflectors.iter().enumerate().rev() {
        if *tau == 0.0 {
            continue;
        }
        for c in j..n {
            let col = &mut q.column_mut(c)[j..];
            let s: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
            let f = tau * s;
            for (y, vi) in col.iter_mut().zip(v) {
                *y -= f * vi;
            }
        }
    }

    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for c in j..n {
                r[(j, c)] = -r[(j, c)];
            }
            for x in q.column_mut(j) {
                *x = -*x;
            }
        }
    }
    Ok(ThinQr { q, r })
}

fn rank_tolerance(a: &DenseMatrix) -> f64 {
    let (m, n) = a.shape();
    let scale = (0..n).map(|j| norm2(a.column(j))).fold(0.0, f64::max);
    m.max(n) as f64 * f64::EPSILON * scale
}

/// Minimum-norm minimizer of `||A x - b||` for `rows(A) >= cols(A)`.
///
/// Full-rank problems go through Householder QR; a numerically
/// rank-deficient `R` falls back to the truncated pseudoinverse.
pub fn least_squares(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::Shape(format!("least squares needs rows >= cols, got {m}x{n}")));
    }
    if b.len() != m {
        return Err(Error::Shape(format!("rhs length {} for {m} rows", b.len())));
    }
    let tol = rank_tolerance(a);
    let qr = thin_qr(a)?;
    let deficient = (0..n).any(|j| qr.r[(j, j)] <= tol);
    if deficient || tol == 0.0 {
        return pseudoinverse_solve(a, b);
    }
    let mut x = qr.q.tr_matvec(b);
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= qr.r[(i, j)] * x[j];
        }
        x[i] = s / qr.r[(i, i)];
    }
    Ok(x)
}

fn pseudoinverse_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let f = svd(a)?;
    let (m, n) = a.shape();
    let cutoff = m.max(n) as f64 * f64::EPSILON * f.singular_values.first().copied().unwrap_or(0.0);
    let mut x = vec![0.0; n];
    for (i, &s) in f.singular_values.iter().enumerate() {
        if s <= cutoff {
            break;
        }
        let c = super::matrix::dot(f.u.column(i), b) / s;
        super::matrix::axpy(c, f.v.column(i), &mut x);
    }
    Ok(x)
}

/// `A^{-1} B` for square, numerically nonsingular `A`.
pub fn solve_square(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows();
    if a.cols() != n || b.rows() != n {
        return Err(Error::Shape(format!(
            "solve needs square A and matching B, got {}x{} and {}x{}",
            n,
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let tol = rank_tolerance(a);
    let qr = thin_qr(a)?;
    if let Some(column) = (0..n).find(|&j| qr.r[(j, j)] <= tol) {
        return Err(Error::RankDeficient { column });
    }
    let mut x = qr.q.tr_matmul(b);
    for c in 0..x.cols() {
        let col = x.column_mut(c);
        for i in (0..n).rev() {
            let mut s = col[i];
            for j in i + 1..n {
                s -= qr.r[(i, j)] * col[j];
            }
            col[i] = s / qr.r[(i, i)];
        }
    }
    Ok(x)
}

/// Orthonormal basis for the column span of `m`, column order preserved.
pub fn orthonormalize(m: &DenseMatrix) -> Result<DenseMatrix> {
    let tol = rank_tolerance(m);
    let qr = thin_qr(m)?;
    if let Some(column) = (0..m.cols()).find(|&j| qr.r[(j, j)] <= tol) {
        return Err(Error::RankDeficient { column });
    }
    Ok(qr.q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram_defect(q: &DenseMatrix) -> f64 {
        q.tr_matmul(q).sub(&DenseMatrix::identity(q.cols())).max_abs()
    }

    #[test]
    fn identity_system() {
        let x = least_squares(&DenseMatrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn mean_of_two_observations() {
        let a = DenseMatrix::from_rows(&[[1.0], [1.0]]).unwrap();
        let x = least_squares(&a, &[0.0, 2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_deficient_gives_minimum_norm() {
        // Two identical columns: the min-norm solution splits the weight.
        let a = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0], [0.0, 0.0]]).unwrap();
        let x = least_squares(&a, &[2.0, 2.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn shape_errors() {
        let a = DenseMatrix::zeros(2, 3);
        assert!(matches!(least_squares(&a, &[0.0, 0.0]), Err(Error::Shape(_))));
        let a = DenseMatrix::zeros(3, 2);
        assert!(matches!(least_squares(&a, &[0.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn orthonormal_input_keeps_span() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let q0 = DenseMatrix::from_rows(&[[s, 0.0], [s, 0.0], [0.0, 1.0]]).unwrap();
        let q = orthonormalize(&q0).unwrap();
        assert!(gram_defect(&q) <= 1e-14);
        assert!(q.sub(&q0).max_abs() < 1e-15);
    }

    #[test]
    fn two_column_case() {
        let m = DenseMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        let q = orthonormalize(&m).unwrap();
        assert!(gram_defect(&q) <= 1e-14);
    }

    #[test]
    fn square_solve() {
        let a = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 3.0]]).unwrap();
        let x = solve_square(&a, &DenseMatrix::identity(2)).unwrap();
        assert!(a.matmul(&x).sub(&DenseMatrix::identity(2)).max_abs() < 1e-15);
        assert!(solve_square(&DenseMatrix::zeros(2, 2), &DenseMatrix::identity(2)).is_err());
    }

    #[test]
    fn dependent_columns_rejected() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0, 0.0], [1.0, 2.0, 1.0], [0.0, 0.0, 1.0]]).unwrap();
        assert!(matches!(orthonormalize(&m), Err(Error::RankDeficient { column: 1 })));
    }
}
