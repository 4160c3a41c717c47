//! Golub–Reinsch SVD: Householder bidiagonalization followed by implicitly
//! shifted QR sweeps on the upper bidiagonal.
//!
//! The factorization is thin for tall input: `U` is m×n, `V` is n×n. Wide
//! input is handled by factoring the transpose and swapping the roles of the
//! factors. Output order is descending; equal values keep their original
//! (pre-sort) order. Each right singular vector is signed so that its
//! largest-magnitude entry is positive, with the matching left vector flipped
//! alongside.

use log::warn;

use super::matrix::{norm2, DenseMatrix};
use crate::error::{Error, Result};

/// Relative gap below which two singular values are reported as tied.
const TIE_GAP: f64 = 1e-12;
const SWEEPS_PER_VALUE: usize = 75;

#[derive(Clone, Debug)]
pub struct SvdFactorization {
    /// Left singular vectors, m×min(m,n).
    pub u: DenseMatrix,
    /// Descending, non-negative.
    pub singular_values: Vec<f64>,
    /// Right singular vectors, n×min(m,n) (square when m ≥ n).
    pub v: DenseMatrix,
}

impl SvdFactorization {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn u_col(&self, i: usize) -> &[f64] {
        self.u.column(i)
    }

    pub fn v_col(&self, i: usize) -> &[f64] {
        self.v.column(i)
    }

    /// `U diag(s) V^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            for x in us.column_mut(j) {
                *x *= s;
            }
        }
        us.matmul(&self.v.transpose())
    }

    /// Fourier coefficients `u_i^T b` for every retained left vector.
    pub fn coefficients(&self, b: &[f64]) -> Vec<f64> {
        self.u.tr_matvec(b)
    }
}

/// Full (thin) singular value decomposition.
pub fn svd(a: &DenseMatrix) -> Result<SvdFactorization> {
    check_input(a)?;
    if a.rows() >= a.cols() {
        let raw = golub_reinsch(a, true)?;
        Ok(finish(raw))
    } else {
        let raw = golub_reinsch(&a.transpose(), true)?;
        let swapped = RawSvd {
            d: raw.d,
            u: raw.v,
            v: raw.u,
        };
        Ok(finish(swapped))
    }
}

/// Singular values only, descending. Skips all vector accumulation.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    check_input(a)?;
    let raw = if a.rows() >= a.cols() {
        golub_reinsch(a, false)?
    } else {
        golub_reinsch(&a.transpose(), false)?
    };
    let mut d: Vec<f64> = raw.d.into_iter().map(f64::abs).collect();
    d.sort_by(|x, y| y.total_cmp(x));
    Ok(d)
}

/// Largest singular value (the matrix 2-norm).
pub fn spectral_norm(a: &DenseMatrix) -> Result<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

fn check_input(a: &DenseMatrix) -> Result<()> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::Shape(format!("SVD of empty {}x{} matrix", a.rows(), a.cols())));
    }
    if !a.is_finite() {
        let pos = a.as_slice().iter().position(|v| !v.is_finite()).unwrap();
        return Err(Error::NonFinite {
            row: pos % a.rows(),
            col: pos / a.rows(),
        });
    }
    Ok(())
}

struct RawSvd {
    d: Vec<f64>,
    u: Option<DenseMatrix>,
    v: Option<DenseMatrix>,
}

fn finish(raw: RawSvd) -> SvdFactorization {
    let mut u = raw.u.expect("vectors requested");
    let mut v = raw.v.expect("vectors requested");
    let mut d = raw.d;
    for (j, dj) in d.iter_mut().enumerate() {
        if *dj < 0.0 {
            *dj = -*dj;
            for x in v.column_mut(j) {
                *x = -*x;
            }
        }
    }

    let mut order: Vec<usize> = (0..d.len()).collect();
    // Stable: ties keep their original position.
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]));
    let singular_values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    for w in singular_values.windows(2).enumerate() {
        let (i, pair) = w;
        if pair[0] > 0.0 && (pair[0] - pair[1]) <= TIE_GAP * pair[0] {
            warn!(
                "singular values {} and {} coincide to {:e}; degenerate spectrum",
                i + 1,
                i + 2,
                TIE_GAP
            );
        }
    }

    let mut u_sorted = DenseMatrix::zeros(u.rows(), 0);
    let mut v_sorted = DenseMatrix::zeros(v.rows(), 0);
    for &i in &order {
        let mut vc = v.column(i).to_vec();
        let mut uc = u.column(i).to_vec();
        let pivot = vc
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |(bi, bv), (k, &x)| {
                if x.abs() > bv {
                    (k, x.abs())
                } else {
                    (bi, bv)
                }
            })
            .0;
        if vc[pivot] < 0.0 {
            vc.iter_mut().for_each(|x| *x = -*x);
            uc.iter_mut().for_each(|x| *x = -*x);
        }
        v_sorted.push_column(&vc).expect("row count fixed");
        u_sorted.push_column(&uc).expect("row count fixed");
    }
    u = u_sorted;
    v = v_sorted;
    SvdFactorization {
        u,
        singular_values,
        v,
    }
}

/// Householder reflector `I - tau w w^T` with `w[0] = 1`, mapping `x` to
/// `beta e_1`.
struct Reflector {
    w: Vec<f64>,
    tau: f64,
}

fn make_reflector(x: &[f64]) -> (Reflector, f64) {
    let alpha = x[0];
    let tail = norm2(&x[1..]);
    if tail == 0.0 {
        let mut w = vec![0.0; x.len()];
        w[0] = 1.0;
        return (Reflector { w, tau: 0.0 }, alpha);
    }
    let beta = -alpha.signum() * alpha.hypot(tail);
    let beta = if alpha == 0.0 { -alpha.hypot(tail) } else { beta };
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    let mut w = Vec::with_capacity(x.len());
    w.push(1.0);
    w.extend(x[1..].iter().map(|v| v * scale));
    (Reflector { w, tau }, beta)
}

impl Reflector {
    /// Applies the reflector to `y` (same length as `w`).
    #[inline]
    fn apply(&self, y: &mut [f64]) {
        if self.tau == 0.0 {
            return;
        }
        let s: f64 = self.w.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        let f = self.tau * s;
        for (yi, wi) in y.iter_mut().zip(&self.w) {
            *yi -= f * wi;
        }
    }
}

/// Core routine for m ≥ n.
fn golub_reinsch(a: &DenseMatrix, want_vectors: bool) -> Result<RawSvd> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut w = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut left: Vec<Reflector> = Vec::with_capacity(n);
    let mut right: Vec<Reflector> = Vec::with_capacity(n.saturating_sub(1));

    for j in 0..n {
        let (h, beta) = make_reflector(&w.column(j)[j..]);
        d[j] = beta;
        for c in j + 1..n {
            h.apply(&mut w.column_mut(c)[j..]);
        }
        left.push(h);

        if j + 1 < n {
            let row: Vec<f64> = (j + 1..n).map(|c| w[(j, c)]).collect();
            let (g, beta) = make_reflector(&row);
            e[j] = beta;
            if g.tau != 0.0 {
                // Rows j+1..m of columns j+1..n: y_r <- y_r - tau (y_r . w) w
                let mut acc = vec![0.0; m - j - 1];
                for (k, &wk) in g.w.iter().enumerate() {
                    let col = &w.column(j + 1 + k)[j + 1..];
                    for (a, &x) in acc.iter_mut().zip(col) {
                        *a += wk * x;
                    }
                }
                for (k, &wk) in g.w.iter().enumerate() {
                    let f = g.tau * wk;
                    let col = &mut w.column_mut(j + 1 + k)[j + 1..];
                    for (x, &a) in col.iter_mut().zip(&acc) {
                        *x -= f * a;
                    }
                }
            }
            right.push(g);
        }
    }

    let (mut u, mut v) = if want_vectors {
        let mut u = DenseMatrix::zeros(m, n);
        for j in 0..n {
            u[(j, j)] = 1.0;
        }
        for (j, h) in left.iter().enumerate().rev() {
            for c in j..n {
                h.apply(&mut u.column_mut(c)[j..]);
            }
        }
        let mut v = DenseMatrix::identity(n);
        for (j, g) in right.iter().enumerate().rev() {
            for c in j + 1..n {
                g.apply(&mut v.column_mut(c)[j + 1..]);
            }
        }
        (Some(u), Some(v))
    } else {
        (None, None)
    };

    bidiagonal_qr(&mut d, &mut e, u.as_mut(), v.as_mut())?;
    Ok(RawSvd { d, u, v })
}

/// `(c, s, r)` with `[c s; -s c] [f; g] = [r; 0]`.
#[inline]
fn givens(f: f64, g: f64) -> (f64, f64, f64) {
    if g == 0.0 {
        return (1.0, 0.0, f);
    }
    if f == 0.0 {
        return (0.0, 1.0, g);
    }
    let r = f.hypot(g);
    (f / r, g / r, r)
}

/// Applies `[col_i, col_j] <- [c col_i + s col_j, -s col_i + c col_j]`.
#[inline]
fn rotate_columns(m: &mut DenseMatrix, i: usize, j: usize, c: f64, s: f64) {
    let rows = m.rows();
    let data_i: Vec<f64> = m.column(i).to_vec();
    let data_j: Vec<f64> = m.column(j).to_vec();
    for r in 0..rows {
        let x = data_i[r];
        let y = data_j[r];
        m[(r, i)] = c * x + s * y;
        m[(r, j)] = -s * x + c * y;
    }
}

/// Diagonalizes the upper bidiagonal `(d, e)` in place, accumulating the
/// rotations into `u` (left) and `v` (right) when present.
fn bidiagonal_qr(
    d: &mut [f64],
    e: &mut [f64],
    mut u: Option<&mut DenseMatrix>,
    mut v: Option<&mut DenseMatrix>,
) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let anorm = (0..n)
        .map(|i| d[i].abs() + if i + 1 < n { e[i].abs() } else { 0.0 })
        .fold(0.0, f64::max);
    if anorm == 0.0 {
        return Ok(());
    }
    let small = eps * anorm;
    let max_iter = SWEEPS_PER_VALUE * n;
    let mut iter = 0usize;

    loop {
        for i in 0..n - 1 {
            if e[i].abs() <= eps * (d[i].abs() + d[i + 1].abs())
                || e[i].abs() <= f64::MIN_POSITIVE
            {
                e[i] = 0.0;
            }
        }
        let mut q = n - 1;
        while q > 0 && e[q - 1] == 0.0 {
            q -= 1;
        }
        if q == 0 {
            return Ok(());
        }
        let mut p = q - 1;
        while p > 0 && e[p - 1] != 0.0 {
            p -= 1;
        }

        iter += 1;
        if iter > max_iter {
            return Err(Error::SvdNoConvergence {
                iterations: max_iter,
                superdiagonal: q - 1,
                value: e[q - 1],
            });
        }

        // A (numerically) zero diagonal entry splits the block once its row
        // or column coupling is rotated away.
        if let Some(i) = (p..=q).find(|&i| d[i].abs() <= small) {
            d[i] = 0.0;
            if i < q {
                let mut f = e[i];
                e[i] = 0.0;
                for j in i + 1..=q {
                    let (c, s, r) = givens(d[j], f);
                    d[j] = r;
                    if j < q {
                        f = -s * e[j];
                        e[j] *= c;
                    }
                    if let Some(u) = u.as_deref_mut() {
                        rotate_columns(u, j, i, c, s);
                    }
                }
            } else {
                let mut f = e[q - 1];
                e[q - 1] = 0.0;
                for j in (p..q).rev() {
                    let (c, s, r) = givens(d[j], f);
                    d[j] = r;
                    if j > p {
                        f = -s * e[j - 1];
                        e[j - 1] *= c;
                    }
                    if let Some(v) = v.as_deref_mut() {
                        rotate_columns(v, j, q, c, s);
                    }
                }
            }
            continue;
        }

        // Wilkinson shift from the trailing 2x2 of B^T B.
        let dm = d[q - 1];
        let dn = d[q];
        let em = e[q - 1];
        let el = if q >= 2 && q - 1 > p { e[q - 2] } else { 0.0 };
        let t11 = dm * dm + el * el;
        let t12 = dm * em;
        let t22 = dn * dn + em * em;
        let delta = 0.5 * (t11 - t22);
        let denom = delta + delta.signum_nonzero() * delta.hypot(t12);
        let mu = if denom == 0.0 {
            t22
        } else {
            t22 - t12 * t12 / denom
        };

        let mut f = d[p] * d[p] - mu;
        let mut g = d[p] * e[p];
        for k in p..q {
            let (c, s, r) = givens(f, g);
            if k > p {
                e[k - 1] = r;
            }
            f = c * d[k] + s * e[k];
            e[k] = c * e[k] - s * d[k];
            g = s * d[k + 1];
            d[k + 1] *= c;
            if let Some(v) = v.as_deref_mut() {
                rotate_columns(v, k, k + 1, c, s);
            }

            let (c, s, r) = givens(f, g);
            d[k] = r;
            f = c * e[k] + s * d[k + 1];
            d[k + 1] = c * d[k + 1] - s * e[k];
            if k + 1 < q {
                g = s * e[k + 1];
                e[k + 1] *= c;
            }
            if let Some(u) = u.as_deref_mut() {
                rotate_columns(u, k, k + 1, c, s);
            }
        }
        e[q - 1] = f;
    }
}

trait SignumNonzero {
    fn signum_nonzero(self) -> f64;
}

impl SignumNonzero for f64 {
    #[inline]
    fn signum_nonzero(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}
