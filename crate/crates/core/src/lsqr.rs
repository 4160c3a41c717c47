//! LSQR iterates from the projected problem `min ‖B_k y − β_1 e_1‖`.
//!
//! The classical LSQR recurrences are not used: at laboratory sizes the small
//! least-squares problem is solved directly for every `k`, which gives the
//! same iterate `x_k = Q_k y_k`.

use std::io::Write;

use crate::error::Result;
use crate::golub_kahan::{BidiagState, Reorth};
use crate::noise::NoisyInstance;
use crate::numerics::{least_squares, norm2, sub_vec, DenseMatrix};

/// `(y_k, x_k)` at step `k` of the factorization.
pub fn lsqr_iterate_k(state: &BidiagState, k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let b = state.bidiag(k).to_dense();
    let mut rhs = vec![0.0; k + 1];
    rhs[0] = state.beta1();
    let y = least_squares(&b, &rhs)?;
    let x = state.q_leading(k).matvec(&y);
    Ok((y, x))
}

/// The iterate at the newest complete step.
pub fn lsqr_iterate(state: &BidiagState) -> Result<Vec<f64>> {
    Ok(lsqr_iterate_k(state, state.bidiag_k())?.1)
}

#[derive(Clone, Debug)]
pub struct LsqrTrace {
    /// `‖x_k − x_true‖ / ‖x_true‖` for `k = 1..=len`.
    pub errors: Vec<f64>,
    /// `‖A x_k − b‖`.
    pub residuals: Vec<f64>,
    /// Error argmin, 1-based; ties go to the smallest index.
    pub kstar: usize,
    pub solution_at_kstar: Vec<f64>,
    pub y_history: Vec<Vec<f64>>,
    /// Step at which bidiagonalization broke down, if that cut the trace.
    pub breakdown: Option<usize>,
}

impl LsqrTrace {
    /// Error curve has an interior minimum: it rises again after `k*`.
    pub fn semi_convergent(&self) -> bool {
        self.kstar < self.errors.len()
    }

    pub fn best_error(&self) -> f64 {
        self.errors[self.kstar - 1]
    }

    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    /// Columns `k, rel_error, residual, is_kstar`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "rel_error", "residual", "is_kstar"])?;
        for (i, (e, r)) in self.errors.iter().zip(&self.residuals).enumerate() {
            let flag = if i + 1 == self.kstar { "1" } else { "0" };
            w.write_record(&[(i + 1).to_string(), format!("{e:e}"), format!("{r:e}"), flag.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Trace over `k = 1..=min(kmax, bidiag_k())` from an existing factorization.
pub fn lsqr_trace(state: &BidiagState, a: &DenseMatrix, b: &[f64], x_true: &[f64], kmax: usize) -> Result<LsqrTrace> {
    let kmax = kmax.min(state.bidiag_k());
    let x_norm = norm2(x_true);
    let mut errors = Vec::with_capacity(kmax);
    let mut residuals = Vec::with_capacity(kmax);
    let mut y_history = Vec::with_capacity(kmax);
    let mut best = (f64::INFINITY, 0, Vec::new());
    for k in 1..=kmax {
        let (y, x) = lsqr_iterate_k(state, k)?;
        let err = norm2(&sub_vec(&x, x_true)) / x_norm;
        residuals.push(norm2(&sub_vec(&a.matvec(&x), b)));
        errors.push(err);
        if err < best.0 {
            best = (err, k, x);
        }
        y_history.push(y);
    }
    Ok(LsqrTrace {
        errors,
        residuals,
        kstar: best.1,
        solution_at_kstar: best.2,
        y_history,
        breakdown: state.breakdown_step(),
    })
}

/// Bidiagonalizes `instance.b` with full reorthogonalization and records the
/// first `kmax` iterates; a breakdown truncates the trace.
pub fn lsqr_sweep(instance: &NoisyInstance, kmax: usize) -> Result<LsqrTrace> {
    let a = &instance.problem.a;
    let mut state = BidiagState::start(a, &instance.b, Reorth::Full)?;
    if let Some(e) = state.run_to(a, kmax) {
        log::warn!("LSQR trace truncated: {e}");
    }
    lsqr_trace(&state, a, &instance.b, &instance.problem.x_true, kmax)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_on_diagonal() {
        // x_1 = t A^T b with t minimizing ‖t A A^T b − b‖.
        let a = DenseMatrix::from_diag(&[2.0, 1.0]);
        let b = [2.0, 1.0];
        let mut s = BidiagState::start(&a, &b, Reorth::Full).unwrap();
        s.step(&a).unwrap();
        let (_, x) = lsqr_iterate_k(&s, 1).unwrap();
        let atb = [4.0, 1.0];
        let aatb = [8.0, 1.0];
        let t = (aatb[0] * b[0] + aatb[1] * b[1]) / (aatb[0] * aatb[0] + aatb[1] * aatb[1]);
        assert!((x[0] - t * atb[0]).abs() < 1e-14);
        assert!((x[1] - t * atb[1]).abs() < 1e-14);
    }

    #[test]
    fn full_space_solves_square_system() {
        let a = DenseMatrix::from_rows(&[[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]]).unwrap();
        let x_true = [1.0, -2.0, 0.5];
        let b = a.matvec(&x_true);
        let mut s = BidiagState::start(&a, &b, Reorth::Full).unwrap();
        assert!(s.run_to(&a, 3).is_none());
        let x = lsqr_iterate(&s).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12);
        }
    }
}
