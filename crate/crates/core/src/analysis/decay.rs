use crate::golub_kahan::BidiagState;

/// `α_{k+1}`, `β_{k+2}` against `γ_k` for one `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayPoint {
    pub k: usize,
    pub alpha_next: f64,
    pub beta_next: f64,
    pub gamma: f64,
    /// `α_{k+1} < γ_k` and `β_{k+2} < γ_k`, widened by the slack.
    pub below_gamma: bool,
    /// `2 α_{k+1} β_{k+2} ≤ γ_k²`, widened by the squared slack scale.
    pub product_ok: bool,
}

impl DecayPoint {
    pub fn sum(&self) -> f64 {
        self.alpha_next + self.beta_next
    }
}

/// Points for every `k` with `gammas[k-1] = γ_k` and `α_{k+1}`, `β_{k+2}`
/// available in `state`. `sigma1` scales the tolerances.
pub fn decay_diagnostic(state: &BidiagState, gammas: &[f64], sigma1: f64) -> Vec<DecayPoint> {
    let slack = 1e-12 * sigma1;
    let (alphas, betas) = (state.alphas(), state.betas());
    (1..=gammas.len())
        .take_while(|&k| k < alphas.len() && k + 1 < betas.len())
        .map(|k| {
            let (a, b, g) = (alphas[k], betas[k + 1], gammas[k - 1]);
            DecayPoint {
                k,
                alpha_next: a,
                beta_next: b,
                gamma: g,
                below_gamma: a < g + slack && b < g + slack,
                product_ok: 2.0 * a * b <= g * g + slack * sigma1,
            }
        })
        .collect()
}
