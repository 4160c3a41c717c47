//! Per-step analysis of the Golub–Kahan rank-k approximation
//! `P_{k+1} B_k Q_k^T` against the SVD of `A`.

pub mod bounds;
pub mod decay;
pub mod delta;
pub mod gamma;
pub mod ritz;

use std::io::Write;

use crate::error::Result;
use crate::gallery::SpectrumModel;
use crate::golub_kahan::BidiagState;
use crate::noise::PicardDiagnostic;
use crate::numerics::{spectral_norm, DenseMatrix, SvdFactorization};

pub use bounds::{bound_report, gamma_upper, near_best_predicate, xi, BoundReport, DecayRate};
pub use decay::{decay_diagnostic, DecayPoint};
pub use delta::{
    delta_direct, delta_norm_via_angles, delta_rank_one, delta_subspace, lagrange_factors, sigma_delta_norm_direct,
    sigma_delta_norm_subspace, AngleDelta,
};
pub use gamma::{gamma_exact, gamma_via_gk, trailing_block};
pub use ritz::{
    global_interlacing_violation, mirsky_gap_check, mirsky_gap_violation, natural_order_check,
    natural_order_violation, ritz_values,
};

/// Additive slack for strict inequalities, relative to `σ_1`.
pub const SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisRecord {
    pub k: usize,
    pub gamma: f64,
    /// NaN unless the factorization ran to completion.
    pub gamma_via_gk: f64,
    pub sigma_k: f64,
    pub sigma_kplus1: f64,
    pub ritz: Vec<f64>,
    pub delta_norm: f64,
    pub sin_theta: f64,
    /// `‖Δ_k‖` from the subspace route; finite where the angle route
    /// saturates. NaN when `V_k^T Q_k` is singular.
    pub delta_norm_subspace: f64,
    /// NaN when `V_k^T Q_k` is singular.
    pub sigma_delta_norm: f64,
    pub lagrange_max: f64,
    pub near_best: bool,
    pub natural_order: bool,
    pub global_interlacing: bool,
    pub mirsky: bool,
    /// `α_{k+1} + β_{k+2}`; NaN past the end of the factorization.
    pub alpha_beta_sum: f64,
}

/// Records for `k = 1..=min(kmax, bidiag_k, n−1)`.
pub fn analyze(a: &DenseMatrix, svd: &SvdFactorization, state: &BidiagState, kmax: usize) -> Result<Vec<AnalysisRecord>> {
    let sigma = &svd.singular_values;
    let n = sigma.len();
    let slack = SLACK * sigma[0];
    let kmax = kmax.min(state.bidiag_k()).min(n - 1);
    let mut records = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let q_k = state.q_leading(k);
        let gamma = gamma_exact(a, &q_k)?;
        let gamma_via_gk = if state.is_complete() { gamma_via_gk(state, k)? } else { f64::NAN };
        let ritz = ritz_values(&state.bidiag(k))?;
        let angles = delta_norm_via_angles(svd, &q_k)?;
        let (delta_norm_subspace, sigma_delta_norm) = match delta_subspace(svd, &q_k) {
            Ok(d) => (spectral_norm(&d)?, spectral_norm(&delta::scale_columns(&d, &sigma[..k]))?),
            Err(_) => (f64::NAN, f64::NAN),
        };
        let lagrange_max = lagrange_factors(sigma, k).map(|(_, m)| m).unwrap_or(f64::NAN);
        let alpha_beta_sum = match (state.alphas().get(k), state.betas().get(k + 1)) {
            (Some(a), Some(b)) => a + b,
            _ => f64::NAN,
        };
        records.push(AnalysisRecord {
            k,
            gamma,
            gamma_via_gk,
            sigma_k: sigma[k - 1],
            sigma_kplus1: sigma[k],
            near_best: near_best_predicate(gamma, sigma[k - 1], sigma[k], slack),
            natural_order: natural_order_check(&ritz, sigma, slack),
            global_interlacing: global_interlacing_violation(&ritz, sigma, slack).is_none(),
            mirsky: mirsky_gap_check(&ritz, sigma, gamma, slack),
            ritz,
            delta_norm: angles.delta_norm,
            sin_theta: angles.sin_theta,
            delta_norm_subspace,
            sigma_delta_norm,
            lagrange_max,
            alpha_beta_sum,
        });
    }
    Ok(records)
}

/// Bound reports matching `records`.
pub fn bound_reports(
    picard: &PicardDiagnostic,
    spectrum: &SpectrumModel,
    records: &[AnalysisRecord],
) -> Result<Vec<BoundReport>> {
    records
        .iter()
        .map(|r| bound_report(picard, spectrum, r.delta_norm, r.k))
        .collect()
}

impl AnalysisRecord {
    /// `‖Δ_k‖` from the angle route, or from the subspace route where the
    /// angle route reports its infinite marker.
    pub fn delta_norm_resolved(&self) -> f64 {
        if self.delta_norm.is_finite() {
            self.delta_norm
        } else {
            self.delta_norm_subspace
        }
    }
}

/// First `k` whose Ritz values leave natural order, if any.
pub fn first_natural_order_failure(records: &[AnalysisRecord]) -> Option<usize> {
    records.iter().find(|r| !r.natural_order).map(|r| r.k)
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Columns `k, gamma, gamma_Gk, sigma_k1, delta_norm, sin_theta, sigma_delta,
/// lagrange_max, near_best, natural_order, alpha_beta_sum, eta_k, xi_k,
/// cond_near_best, cond_natural_order`.
pub fn write_analysis_csv<W: Write>(records: &[AnalysisRecord], bounds: &[BoundReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "k",
        "gamma",
        "gamma_Gk",
        "sigma_k1",
        "delta_norm",
        "sin_theta",
        "sigma_delta",
        "lagrange_max",
        "near_best",
        "natural_order",
        "alpha_beta_sum",
        "eta_k",
        "xi_k",
        "cond_near_best",
        "cond_natural_order",
    ])?;
    for (r, b) in records.iter().zip(bounds) {
        w.write_record([
            r.k.to_string(),
            num(r.gamma),
            num(r.gamma_via_gk),
            num(r.sigma_kplus1),
            num(r.delta_norm),
            num(r.sin_theta),
            num(r.sigma_delta_norm),
            num(r.lagrange_max),
            flag(r.near_best).into(),
            flag(r.natural_order).into(),
            num(r.alpha_beta_sum),
            num(b.eta_k),
            num(b.xi_k),
            flag(b.near_best_condition).into(),
            flag(b.natural_order_condition).into(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long format `k, i, theta, sigma_i`, one row per Ritz value.
pub fn write_ritz_csv<W: Write>(records: &[AnalysisRecord], sigma: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "i", "theta", "sigma_i"])?;
    for r in records {
        for (i, t) in r.ritz.iter().enumerate() {
            w.write_record([r.k.to_string(), (i + 1).to_string(), num(*t), num(sigma[i])])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Every `BoundReport` field, one row per `k`.
pub fn write_bounds_csv<W: Write>(bounds: &[BoundReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "k",
        "regime",
        "k0_used",
        "decay",
        "ratio",
        "lagrange_max",
        "xi_k",
        "eta_k",
        "epsilon_k_bound",
        "delta_bound",
        "sigma_delta_bound",
        "eta_k_asymptotic",
        "delta_bound_asymptotic",
        "sigma_delta_bound_asymptotic",
        "delta_bound_rigorous",
        "sigma_delta_bound_rigorous",
        "cond_near_best",
        "rule_near_best",
        "cond_natural_order",
    ])?;
    for b in bounds {
        w.write_record([
            b.k.to_string(),
            b.regime.as_str().into(),
            b.k0_used.to_string(),
            num(b.decay),
            num(b.ratio),
            num(b.lagrange_max),
            num(b.xi_k),
            num(b.eta_k),
            num(b.epsilon_k_bound),
            num(b.delta_bound),
            num(b.sigma_delta_bound),
            num(b.eta_k_asymptotic),
            num(b.delta_bound_asymptotic),
            num(b.sigma_delta_bound_asymptotic),
            num(b.delta_bound_rigorous),
            num(b.sigma_delta_bound_rigorous),
            flag(b.near_best_condition).into(),
            flag(b.near_best_rule).into(),
            flag(b.natural_order_condition).into(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golub_kahan::{bidiag_complete, Reorth};
    use crate::numerics::{spectral_norm, svd};

    #[test]
    fn three_by_three_gamma_oracle() {
        let a = DenseMatrix::from_diag(&[1.0, 0.5, 0.25]);
        let b = [1.0, 1.0, 1.0];
        // Q_1 spans A^T b = (1, 1/2, 1/4).
        let v = [1.0, 0.5, 0.25];
        let nv = (1.0f64 + 0.25 + 0.0625).sqrt();
        let proj = DenseMatrix::from_fn(3, 3, |i, j| (if i == j { 1.0 } else { 0.0 }) - v[i] * v[j] / (nv * nv));
        let expected = spectral_norm(&a.matmul(&proj)).unwrap();
        let mut state = BidiagState::start(&a, &b, Reorth::Full).unwrap();
        state.step(&a).unwrap();
        let g = gamma_exact(&a, &state.q_leading(1)).unwrap();
        assert!((g - expected).abs() < 1e-14);
        assert!(g >= 0.5);
    }

    #[test]
    fn complete_factorization_properties() {
        let a = DenseMatrix::from_diag(&[1.0, 0.6, 0.3, 0.1, 0.05]);
        let b = [1.0, 0.8, 0.5, 0.3, 0.2];
        let state = bidiag_complete(&a, &b).unwrap();
        let f = svd(&a).unwrap();
        let recs = analyze(&a, &f, &state, 10).unwrap();
        assert_eq!(recs.len(), 4);
        for r in &recs {
            assert!((r.gamma - r.gamma_via_gk).abs() < 1e-12);
            assert!(r.gamma >= r.sigma_kplus1 - 1e-12);
            assert!(r.global_interlacing && r.mirsky);
            let identity = r.delta_norm / (1.0 + r.delta_norm * r.delta_norm).sqrt();
            assert!((r.sin_theta - identity).abs() < 1e-10);
        }
        let last = &recs[3];
        let (an, bn) = (state.alphas()[4], state.betas()[5]);
        assert!((last.gamma_via_gk - an.hypot(bn)).abs() < 1e-14);
        assert!(recs.windows(2).all(|w| w[1].gamma < w[0].gamma));
        let full = ritz_values(&state.bidiag(5)).unwrap();
        for (t, s) in full.iter().zip(&f.singular_values) {
            assert!((t - s).abs() < 1e-12);
        }
    }
}
