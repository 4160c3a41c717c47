//! Evaluators for the a-priori bounds on `‖Δ_k‖`, `‖Σ_k Δ_k^T‖` and `γ_k`,
//! and the sufficient conditions for near-best rank-k approximations and
//! natural-order Ritz values.
//!
//! Three flavours of each bound are produced:
//!
//! * `stated`: the theorem's right-hand side with the realized coefficient
//!   ratio `max_{i>k}|u_i^T b| / min_{i≤k}|u_i^T b|` and every `1 + O(ρ^{-2})`
//!   factor replaced by one;
//! * `asymptotic`: the same with the ratio replaced by its model value
//!   `(σ_{k+1}/σ_k)^{1+β}` for `k ≤ k0` and `1` beyond;
//! * `rigorous`: the finite-sum bound that the theorems are derived from,
//!   `|Δ_k| ≤ |L_{k1}(0)| |Δ̃_k|` entrywise, which holds for every spectrum.

use crate::error::{Error, Result};
use crate::gallery::{fit_power_alpha, fit_severe_rho, Regime, SpectrumModel};
use crate::noise::PicardDiagnostic;

use super::delta::lagrange_factors;

/// Decay parameter the bound formulas are evaluated with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayRate {
    Severe { rho: f64 },
    Power { alpha: f64 },
}

impl DecayRate {
    /// Model parameter for parametric spectra; a log-linear fit of the
    /// computed spectrum over `1..=max(k0, 3)` otherwise.
    pub fn resolve(spectrum: &SpectrumModel, sigma: &[f64], k0: usize) -> DecayRate {
        match *spectrum {
            SpectrumModel::Severe { rho, .. } => DecayRate::Severe { rho },
            SpectrumModel::Power { alpha, .. } => DecayRate::Power { alpha },
            SpectrumModel::Empirical { regime } => {
                let positive = sigma.iter().take_while(|&&s| s > 0.0).count();
                let end = k0.max(3).min(positive).max(2);
                match regime {
                    Regime::Severe => DecayRate::Severe {
                        rho: fit_severe_rho(sigma, 1..=end),
                    },
                    Regime::ModerateOrMild => DecayRate::Power {
                        alpha: fit_power_alpha(sigma, 1..=end),
                    },
                }
            }
        }
    }

    pub fn regime(self) -> Regime {
        match self {
            DecayRate::Severe { .. } => Regime::Severe,
            DecayRate::Power { .. } => Regime::ModerateOrMild,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            DecayRate::Severe { rho } => rho,
            DecayRate::Power { alpha } => alpha,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub k: usize,
    pub regime: Regime,
    pub k0_used: usize,
    /// `ρ` or `α`.
    pub decay: f64,
    /// Realized `max_{i>k}|u_i^T b| / min_{i≤k}|u_i^T b|`.
    pub ratio: f64,
    pub lagrange_max: f64,
    pub xi_k: f64,
    pub eta_k: f64,
    /// `ε_k = η_k σ_{k+1}`.
    pub epsilon_k_bound: f64,
    pub delta_bound: f64,
    pub sigma_delta_bound: f64,
    pub eta_k_asymptotic: f64,
    pub delta_bound_asymptotic: f64,
    pub sigma_delta_bound_asymptotic: f64,
    pub delta_bound_rigorous: f64,
    pub sigma_delta_bound_rigorous: f64,
    /// `√(1+η_k²) < σ_k/(2σ_{k+1}) + 1/2`.
    pub near_best_condition: bool,
    /// `ρ > 2`, or `2√(1+η_k²) − 1 < ((k+1)/k)^α`.
    pub near_best_rule: bool,
    /// `ρ ≥ 1+√2`, or `1 + √(1+η_k²) < ((k+1)/k)^α`.
    pub natural_order_condition: bool,
}

/// `ξ_k` from `‖Δ_k‖`; the `‖Δ_k‖ ≥ 1` branch (including the infinite
/// marker) takes the cap `√5/2`.
pub fn xi(delta_norm: f64) -> f64 {
    if delta_norm < 1.0 {
        let t = delta_norm / (1.0 + delta_norm * delta_norm);
        (t * t + 1.0).sqrt()
    } else {
        5f64.sqrt() / 2.0
    }
}

/// `σ_{k+1} ≤ γ_k < (σ_k + σ_{k+1})/2`; the lower end is widened by `slack`,
/// the upper end stays strict.
pub fn near_best_predicate(gamma: f64, sigma_k: f64, sigma_k1: f64, slack: f64) -> bool {
    gamma >= sigma_k1 - slack && gamma < 0.5 * (sigma_k + sigma_k1)
}

/// Upper bound `√(σ_{k+1}² + ε_k²)` on `γ_k` with `ε_k ≤ ξ_k ‖Σ_k Δ_k^T‖`.
pub fn gamma_upper(sigma_k1: f64, xi_k: f64, sigma_delta: f64) -> f64 {
    sigma_k1.hypot(xi_k * sigma_delta)
}

fn moderate_factor(alpha: f64, k: usize, k0: usize) -> f64 {
    let kf = k as f64;
    let a = 4.0 * alpha * alpha - 1.0;
    let b = 2.0 * alpha - 1.0;
    if k == 1 {
        (1.0 / b).sqrt()
    } else if k <= k0 {
        (kf * kf / a + kf / b).sqrt()
    } else {
        let k0f = k0 as f64;
        (kf * k0f / a + kf * (kf - k0f + 1.0) / b).sqrt()
    }
}

/// All bound forms at step `k`, from the Picard coefficients of the noisy
/// data, the decay model and the computed `‖Δ_k‖`.
pub fn bound_report(
    picard: &PicardDiagnostic,
    spectrum: &SpectrumModel,
    delta_norm: f64,
    k: usize,
) -> Result<BoundReport> {
    let sigma = &picard.sigma;
    let c = &picard.coefficients;
    let n = sigma.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("bounds need 1 <= k < n = {n}, got {k}")));
    }
    let k0 = picard.k0;
    if let Some(i) = c[..k].iter().position(|&v| v == 0.0) {
        return Err(Error::ZeroCoefficient { index: i + 1 });
    }
    let rate = DecayRate::resolve(spectrum, sigma, k0);
    let beta = spectrum
        .beta()
        .unwrap_or(if picard.beta_fit.is_finite() { picard.beta_fit.max(0.0) } else { 0.0 });

    let head_min = c[..k].iter().cloned().fold(f64::INFINITY, f64::min);
    let tail_max = c[k..].iter().cloned().fold(0.0, f64::max);
    let ratio = tail_max / head_min;
    let (sk, sk1) = (sigma[k - 1], sigma[k]);
    let ratio_asymptotic = if k <= k0 { (sk1 / sk).powf(1.0 + beta) } else { 1.0 };
    let lagrange_max = lagrange_factors(sigma, k).map(|(_, m)| m).unwrap_or(f64::NAN);

    // Stated forms, as functions of the coefficient ratio.
    let (delta_of, sigma_delta_of): (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) = match rate {
        DecayRate::Severe { .. } => {
            let growth = if k > k0 { ((k - k0 + 1) as f64).sqrt() } else { 1.0 };
            (
                Box::new(move |r| sk1 / sk * r),
                Box::new(move |r| sk1 * r * growth),
            )
        }
        DecayRate::Power { alpha } => {
            let l = if k == 1 { 1.0 } else { lagrange_max };
            let delta_factor = moderate_factor(alpha, k, usize::MAX);
            let sd_factor = moderate_factor(alpha, k, k0);
            let sd_scale = if k == 1 { sigma[0] } else { sk };
            (
                Box::new(move |r| r * delta_factor * l),
                Box::new(move |r| sd_scale * r * sd_factor * l),
            )
        }
    };

    let xi_k = xi(delta_norm);
    let sigma_delta_bound = sigma_delta_of(ratio);
    let eta_k = xi_k * sigma_delta_bound / sk1;
    let sigma_delta_bound_asymptotic = sigma_delta_of(ratio_asymptotic);

    let tail: f64 = (k..n).map(|i| (sigma[i] * c[i]).powi(2)).sum::<f64>().sqrt();
    let head_inv: f64 = (0..k).map(|j| (sigma[j] * c[j]).powi(-2)).sum::<f64>().sqrt();
    let head_coef_inv: f64 = (0..k).map(|j| c[j].powi(-2)).sum::<f64>().sqrt();

    let grow = (1.0 + eta_k * eta_k).sqrt();
    let (near_best_rule, natural_order_condition) = match rate {
        DecayRate::Severe { rho } => (rho > 2.0, rho >= 1.0 + 2f64.sqrt()),
        DecayRate::Power { alpha } => {
            let step = ((k as f64 + 1.0) / k as f64).powf(alpha);
            (2.0 * grow - 1.0 < step, 1.0 + grow < step)
        }
    };

    Ok(BoundReport {
        k,
        regime: rate.regime(),
        k0_used: k0,
        decay: rate.value(),
        ratio,
        lagrange_max,
        xi_k,
        eta_k,
        epsilon_k_bound: eta_k * sk1,
        delta_bound: delta_of(ratio),
        sigma_delta_bound,
        eta_k_asymptotic: xi_k * sigma_delta_bound_asymptotic / sk1,
        delta_bound_asymptotic: delta_of(ratio_asymptotic),
        sigma_delta_bound_asymptotic,
        delta_bound_rigorous: lagrange_max * tail * head_inv,
        sigma_delta_bound_rigorous: lagrange_max * tail * head_coef_inv,
        near_best_condition: grow < 0.5 * sk / sk1 + 0.5,
        near_best_rule,
        natural_order_condition,
    })
}
