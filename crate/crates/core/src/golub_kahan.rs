//! Golub-Kahan (Lanczos) lower bidiagonalization.
//!
//! After `k` steps the state satisfies `A Q_k = P_{k+1} B_k` with `B_k` the
//! `(k+1)×k` lower bidiagonal matrix holding `α_1..α_k` on the diagonal and
//! `β_2..β_{k+1}` below it.

use std::io::Write;

use crate::error::{Error, Result};
use crate::numerics::{axpy, norm2, spectral_norm, DenseMatrix};

/// Breakdown threshold relative to `‖A‖`.
pub const BREAKDOWN_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reorth {
    /// Two passes of classical Gram-Schmidt against every previous vector.
    Full,
    /// Plain three-term recurrence; loses orthogonality quickly.
    None,
}

/// Incremental factorization.
///
/// `start` produces `β_1, p_1, α_1, q_1`; each `step` appends
/// `β_{k+1}, p_{k+1}` and then `α_{k+1}, q_{k+1}`, following the order of
/// the recurrences. `B_j` is therefore available for `j ≤ bidiag_k()`,
/// which is `k - 1` in the middle of a run and `n` once complete.
#[derive(Clone, Debug)]
pub struct BidiagState {
    p: DenseMatrix,
    q: DenseMatrix,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    reorth: Reorth,
    a_norm: f64,
    n: usize,
    halted: Option<usize>,
}

fn orthogonalize(basis: &DenseMatrix, v: &mut [f64], passes: usize) {
    for _ in 0..passes {
        let c = basis.tr_matvec(v);
        for (j, &cj) in c.iter().enumerate() {
            axpy(-cj, basis.column(j), v);
        }
    }
}

impl BidiagState {
    pub fn start(a: &DenseMatrix, b: &[f64], reorth: Reorth) -> Result<Self> {
        let a_norm = spectral_norm(a)?;
        Self::start_with_norm(a, b, reorth, a_norm)
    }

    /// As [`start`](Self::start) with a precomputed `‖A‖`.
    pub fn start_with_norm(a: &DenseMatrix, b: &[f64], reorth: Reorth, a_norm: f64) -> Result<Self> {
        let (m, n) = a.shape();
        if b.len() != m {
            return Err(Error::Shape(format!("rhs length {} for {m} rows", b.len())));
        }
        let beta1 = norm2(b);
        if beta1 == 0.0 {
            return Err(Error::InvalidParameter("bidiagonalization needs b != 0".into()));
        }
        let p1: Vec<f64> = b.iter().map(|v| v / beta1).collect();
        let mut state = BidiagState {
            p: DenseMatrix::from_columns(m, &[p1])?,
            q: DenseMatrix::zeros(n, 0),
            alphas: Vec::new(),
            betas: vec![beta1],
            reorth,
            a_norm,
            n,
            halted: None,
        };
        state.next_alpha(a)?;
        Ok(state)
    }

    fn tol(&self) -> f64 {
        BREAKDOWN_TOL * self.a_norm
    }

    fn passes(&self) -> usize {
        if self.reorth == Reorth::Full {
            2
        } else {
            0
        }
    }

    fn next_alpha(&mut self, a: &DenseMatrix) -> Result<()> {
        let k = self.k();
        let p_last = self.p.column(k);
        let mut r = a.tr_matvec(p_last);
        if k > 0 {
            axpy(-self.betas[k], self.q.column(k - 1), &mut r);
        }
        orthogonalize(&self.q, &mut r, self.passes());
        let alpha = norm2(&r);
        if !(alpha > self.tol()) {
            self.halted = Some(k + 1);
            return Err(Error::Breakdown {
                step: k + 1,
                which: "alpha",
                value: alpha,
            });
        }
        let q: Vec<f64> = r.iter().map(|v| v / alpha).collect();
        self.q.push_column(&q)?;
        self.alphas.push(alpha);
        Ok(())
    }

    /// Appends `β_{k+1}, p_{k+1}` and, before the last step, `α_{k+1}, q_{k+1}`.
    ///
    /// At `k = n` only the closing `β_{n+1}` is computed; when it falls below
    /// the breakdown tolerance (always for a square `A`) it is stored as zero
    /// and `p_{n+1}` is the zero vector. A breakdown before that is reported
    /// with the step at which it happened and stops the factorization.
    pub fn step(&mut self, a: &DenseMatrix) -> Result<()> {
        if self.is_complete() || self.halted.is_some() {
            return Err(Error::InvalidParameter(format!(
                "bidiagonalization cannot continue past k = {}",
                self.k()
            )));
        }
        let k = self.k();
        let mut s = a.matvec(self.q.column(k - 1));
        axpy(-self.alphas[k - 1], self.p.column(k - 1), &mut s);
        orthogonalize(&self.p, &mut s, self.passes());
        let beta = norm2(&s);
        let last = k == self.n;
        if beta > self.tol() {
            let p: Vec<f64> = s.iter().map(|v| v / beta).collect();
            self.p.push_column(&p)?;
            self.betas.push(beta);
        } else if last {
            self.p.push_column(&vec![0.0; s.len()])?;
            self.betas.push(0.0);
        } else {
            self.halted = Some(k);
            return Err(Error::Breakdown {
                step: k,
                which: "beta",
                value: beta,
            });
        }
        if last {
            return Ok(());
        }
        self.next_alpha(a)
    }

    /// Number of right vectors `q_j` (and of `α_j`).
    pub fn k(&self) -> usize {
        self.alphas.len()
    }

    /// Largest `j` for which `B_j` is fully known.
    pub fn bidiag_k(&self) -> usize {
        self.betas.len() - 1
    }

    pub fn is_complete(&self) -> bool {
        self.bidiag_k() == self.n
    }

    /// Step at which a breakdown stopped the run, if any.
    pub fn breakdown_step(&self) -> Option<usize> {
        self.halted
    }

    pub fn reorth(&self) -> Reorth {
        self.reorth
    }

    pub fn a_norm(&self) -> f64 {
        self.a_norm
    }

    /// All left vectors computed so far.
    pub fn p(&self) -> &DenseMatrix {
        &self.p
    }

    /// All right vectors computed so far.
    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `β_1, β_2, …`.
    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn beta1(&self) -> f64 {
        self.betas[0]
    }

    /// `B_j` for `1 ≤ j ≤ bidiag_k()`.
    pub fn bidiag(&self, j: usize) -> BidiagMatrix {
        assert!(j >= 1 && j <= self.bidiag_k(), "B_{j} not available (have {})", self.bidiag_k());
        BidiagMatrix {
            alphas: self.alphas[..j].to_vec(),
            betas_below: self.betas[1..=j].to_vec(),
        }
    }

    /// `Q_j`.
    pub fn q_leading(&self, j: usize) -> DenseMatrix {
        self.q.leading_columns(j)
    }

    /// `P_j`.
    pub fn p_leading(&self, j: usize) -> DenseMatrix {
        self.p.leading_columns(j)
    }

    /// Steps until `B_target` is available or the run stops; returns the
    /// breakdown error when one cut it short.
    pub fn run_to(&mut self, a: &DenseMatrix, target: usize) -> Option<Error> {
        let target = target.min(self.n);
        while self.bidiag_k() < target {
            if let Err(e) = self.step(a) {
                return Some(e);
            }
        }
        None
    }
}

/// Runs to `k = n`. Breakdown is passed through.
pub fn bidiag_complete(a: &DenseMatrix, b: &[f64]) -> Result<BidiagState> {
    let mut s = BidiagState::start(a, b, Reorth::Full)?;
    match s.run_to(a, a.cols()) {
        Some(e) => Err(e),
        None => Ok(s),
    }
}

/// Lower bidiagonal `(k+1)×k` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BidiagMatrix {
    /// Diagonal `α_1..α_k`.
    pub alphas: Vec<f64>,
    /// Subdiagonal `β_2..β_{k+1}`.
    pub betas_below: Vec<f64>,
}

impl BidiagMatrix {
    pub fn k(&self) -> usize {
        self.alphas.len()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let k = self.k();
        let mut m = DenseMatrix::zeros(k + 1, k);
        for j in 0..k {
            m[(j, j)] = self.alphas[j];
            m[(j + 1, j)] = self.betas_below[j];
        }
        m
    }

    /// Columns `index, alpha, beta_next` with `beta_next = β_{index+1}`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "alpha", "beta_next"])?;
        for (j, (a, b)) in self.alphas.iter().zip(&self.betas_below).enumerate() {
            w.write_record(&[(j + 1).to_string(), format!("{a:e}"), format!("{b:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}
