use crate::error::Result;
use crate::golub_kahan::BidiagMatrix;
use crate::numerics::singular_values;

/// Singular values of `B_k`, descending.
pub fn ritz_values(b: &BidiagMatrix) -> Result<Vec<f64>> {
    singular_values(&b.to_dense())
}

/// First 1-based `i` violating `σ_{i+1} < θ_i < σ_i`, widened by `slack`.
pub fn natural_order_violation(ritz: &[f64], sigma: &[f64], slack: f64) -> Option<usize> {
    assert!(sigma.len() > ritz.len(), "need sigma_1..sigma_(k+1)");
    ritz.iter()
        .enumerate()
        .find(|&(i, &t)| !(t < sigma[i] + slack && t > sigma[i + 1] - slack))
        .map(|(i, _)| i + 1)
}

/// `σ_{i+1} < θ_i^{(k)} < σ_i` for every `i ≤ k`.
pub fn natural_order_check(ritz: &[f64], sigma: &[f64], slack: f64) -> bool {
    natural_order_violation(ritz, sigma, slack).is_none()
}

/// Cauchy interlacing `σ_{n−k+i} < θ_i^{(k)} < σ_i` against the whole spectrum.
pub fn global_interlacing_violation(ritz: &[f64], sigma: &[f64], slack: f64) -> Option<usize> {
    let (k, n) = (ritz.len(), sigma.len());
    assert!(k <= n);
    ritz.iter()
        .enumerate()
        .find(|&(i, &t)| !(t < sigma[i] + slack && t > sigma[n - k + i] - slack))
        .map(|(i, _)| i + 1)
}

/// Mirsky bound `0 < σ_i − θ_i^{(k)} ≤ γ_k` for every `i ≤ k`.
pub fn mirsky_gap_violation(ritz: &[f64], sigma: &[f64], gamma: f64, slack: f64) -> Option<usize> {
    ritz.iter()
        .enumerate()
        .find(|&(i, &t)| {
            let gap = sigma[i] - t;
            !(gap > -slack && gap <= gamma + slack)
        })
        .map(|(i, _)| i + 1)
}

pub fn mirsky_gap_check(ritz: &[f64], sigma: &[f64], gamma: f64, slack: f64) -> bool {
    mirsky_gap_violation(ritz, sigma, gamma, slack).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_column() {
        let b = BidiagMatrix {
            alphas: vec![3.0],
            betas_below: vec![4.0],
        };
        assert_eq!(ritz_values(&b).unwrap(), vec![5.0]);
    }

    #[test]
    fn natural_order_cases() {
        let sigma = [3.0, 2.0, 1.0];
        assert!(natural_order_check(&[2.5], &sigma, 0.0));
        assert!(!natural_order_check(&[1.5], &sigma, 0.0));
        assert_eq!(natural_order_violation(&[2.9, 0.5], &sigma, 0.0), Some(2));
    }

    #[test]
    fn mirsky_negative_control() {
        let sigma = [3.0, 2.0, 1.0];
        assert!(mirsky_gap_check(&[2.9, 1.8], &sigma, 0.25, 0.0));
        assert!(!mirsky_gap_check(&[2.9, 1.5], &sigma, 0.25, 0.0));
        assert!(!mirsky_gap_check(&[3.1, 1.8], &sigma, 0.25, 0.0));
    }

    #[test]
    fn global_interlacing_uses_tail() {
        let sigma = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(global_interlacing_violation(&[3.5, 1.5], &sigma, 0.0), None);
        assert_eq!(global_interlacing_violation(&[3.5, 0.5], &sigma, 0.0), Some(2));
    }
}
