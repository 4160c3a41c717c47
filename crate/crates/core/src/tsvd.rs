//! Truncated SVD solutions and error sweeps.

use std::io::Write;

use crate::error::{Error, Result};
use crate::noise::NoisyInstance;
use crate::numerics::{axpy, norm2, sub_vec, SvdFactorization};

/// `x_k = Σ_{i≤k} (u_i^T b / σ_i) v_i`.
pub fn tsvd_solution(svd: &SvdFactorization, b: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > svd.rank() {
        return Err(Error::InvalidParameter(format!(
            "truncation index {k} outside 1..={}",
            svd.rank()
        )));
    }
    if svd.singular_values[k - 1] == 0.0 {
        return Err(Error::RankDeficient { column: k - 1 });
    }
    let mut x = vec![0.0; svd.v.rows()];
    for i in 0..k {
        let c = crate::numerics::dot(svd.u_col(i), b) / svd.singular_values[i];
        axpy(c, svd.v_col(i), &mut x);
    }
    Ok(x)
}

#[derive(Clone, Debug)]
pub struct TsvdSweep {
    /// `‖x_k − x_true‖ / ‖x_true‖` for `k = 1..=kmax`, cut short at the
    /// first zero singular value.
    pub errors: Vec<f64>,
    /// `‖A x_k − b‖`.
    pub residuals: Vec<f64>,
    /// Error argmin, 1-based; ties go to the smallest index.
    pub best_k: usize,
    pub solution_at_best: Vec<f64>,
}

pub fn tsvd_sweep(instance: &NoisyInstance, kmax: usize) -> Result<TsvdSweep> {
    let problem = &instance.problem;
    tsvd_sweep_with(problem.svd()?, &instance.b, &problem.x_true, kmax)
}

pub fn tsvd_sweep_with(svd: &SvdFactorization, b: &[f64], x_true: &[f64], kmax: usize) -> Result<TsvdSweep> {
    let n = svd.rank();
    if kmax == 0 || kmax > n {
        return Err(Error::InvalidParameter(format!("kmax {kmax} outside 1..={n}")));
    }
    // Singular values flushed to zero by the SVD end the sweep.
    let kmax = match (0..kmax).find(|&i| svd.singular_values[i] == 0.0) {
        Some(0) => return Err(Error::RankDeficient { column: 0 }),
        Some(r) => {
            log::warn!("TSVD sweep stops at k = {r}: sigma_{} is zero", r + 1);
            r
        }
        None => kmax,
    };
    let coef = svd.coefficients(b);
    let x_norm = norm2(x_true);

    // Residual norms from the tail of the coefficient vector plus the part
    // of b outside range(U); accumulated backwards so they are monotone.
    let outside = norm2(&sub_vec(b, &svd.u.matvec(&coef)));
    let mut tail = vec![0.0; n + 1];
    tail[n] = outside * outside;
    for i in (0..n).rev() {
        tail[i] = tail[i + 1] + coef[i] * coef[i];
    }

    let mut x = vec![0.0; svd.v.rows()];
    let mut errors = Vec::with_capacity(kmax);
    let mut residuals = Vec::with_capacity(kmax);
    let mut best = (f64::INFINITY, 0, Vec::new());
    for k in 1..=kmax {
        axpy(coef[k - 1] / svd.singular_values[k - 1], svd.v_col(k - 1), &mut x);
        let err = norm2(&sub_vec(&x, x_true)) / x_norm;
        if err < best.0 {
            best = (err, k, x.clone());
        }
        errors.push(err);
        residuals.push(tail[k].sqrt());
    }
    Ok(TsvdSweep {
        errors,
        residuals,
        best_k: best.1,
        solution_at_best: best.2,
    })
}

impl TsvdSweep {
    /// Columns `k, rel_error, residual`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "rel_error", "residual"])?;
        for (i, (e, r)) in self.errors.iter().zip(&self.residuals).enumerate() {
            w.write_record(&[(i + 1).to_string(), format!("{e:e}"), format!("{r:e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn best_error(&self) -> f64 {
        self.errors[self.best_k - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{svd, DenseMatrix};

    #[test]
    fn diagonal_examples() {
        let f = svd(&DenseMatrix::from_diag(&[2.0, 1.0])).unwrap();
        assert_eq!(tsvd_solution(&f, &[2.0, 1.0], 1).unwrap(), vec![1.0, 0.0]);
        assert_eq!(tsvd_solution(&f, &[2.0, 1.0], 2).unwrap(), vec![1.0, 1.0]);
        assert!(tsvd_solution(&f, &[2.0, 1.0], 3).is_err());
    }

    #[test]
    fn zero_singular_value_rejected() {
        let f = svd(&DenseMatrix::from_diag(&[1.0, 0.0])).unwrap();
        assert!(matches!(tsvd_solution(&f, &[1.0, 1.0], 2), Err(Error::RankDeficient { column: 1 })));
    }

    #[test]
    fn sweep_on_consistent_diagonal() {
        let f = svd(&DenseMatrix::from_diag(&[3.0, 2.0, 1.0])).unwrap();
        let s = tsvd_sweep_with(&f, &[3.0, 2.0, 1.0], &[1.0, 1.0, 1.0], 3).unwrap();
        assert_eq!(s.best_k, 3);
        assert!(s.errors[2] < 1e-15);
        assert!(s.residuals.windows(2).all(|w| w[1] <= w[0]));
    }
}
