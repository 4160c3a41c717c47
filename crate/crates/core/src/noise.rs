//! White-noise perturbations and the discrete Picard diagnostic.

use std::io::Write;
use std::sync::Arc;

use log::warn;

use crate::error::{Error, Result};
use crate::gallery::IllPosedProblem;
use crate::numerics::stats::{linear_fit, median};
use crate::numerics::{norm2, SvdFactorization};
use crate::random::{gaussian_vector, rng};

#[derive(Clone, Debug)]
pub struct NoisyInstance {
    pub problem: Arc<IllPosedProblem>,
    pub b: Vec<f64>,
    pub e: Vec<f64>,
    /// `‖e‖ / ‖b_true‖`.
    pub epsilon: f64,
    /// Per-component noise floor `‖e‖ / √m`.
    pub eta: f64,
    pub seed: u64,
}

/// Draws `e` with i.i.d. standard normal entries and rescales it to the
/// exact relative level `epsilon`.
pub fn add_noise(problem: &Arc<IllPosedProblem>, epsilon: f64, seed: u64) -> Result<NoisyInstance> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("noise level must lie in (0, 1), got {epsilon}")));
    }
    let m = problem.rows();
    let raw = gaussian_vector(&mut rng(seed), m);
    let target = epsilon * norm2(&problem.b_true);
    let scale = target / norm2(&raw);
    let e: Vec<f64> = raw.iter().map(|v| v * scale).collect();
    Ok(from_noise(problem, e, seed))
}

/// Instance with a caller-supplied perturbation (zero allowed).
pub fn from_noise(problem: &Arc<IllPosedProblem>, e: Vec<f64>, seed: u64) -> NoisyInstance {
    let b = problem.b_true.iter().zip(&e).map(|(t, n)| t + n).collect();
    let ne = norm2(&e);
    NoisyInstance {
        problem: Arc::clone(problem),
        b,
        epsilon: ne / norm2(&problem.b_true),
        eta: ne / (problem.rows() as f64).sqrt(),
        e,
        seed,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardOptions {
    /// The median must stay above `floor_factor · η` to count as signal.
    pub floor_factor: f64,
    /// Width of the centred median window (truncated at the ends).
    pub window: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            floor_factor: 2.0,
            window: 5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PicardDiagnostic {
    pub sigma: Vec<f64>,
    /// `|u_i^T b|`.
    pub coefficients: Vec<f64>,
    /// `|u_i^T b_true|`.
    pub true_coefficients: Vec<f64>,
    pub noise_floor: f64,
    /// Windowed transition point (1-based count of signal coefficients).
    pub k0: usize,
    /// Last index before the first single coefficient at or below `η`.
    pub k0_naive: usize,
    /// Fitted `β` of `|u_i^T b_true| ≈ σ_i^{1+β}` over `i ≤ k0`; NaN when
    /// fewer than two points are available.
    pub beta_fit: f64,
    pub options: PicardOptions,
}

pub fn picard_diagnostic(instance: &NoisyInstance) -> Result<PicardDiagnostic> {
    picard_diagnostic_with(
        instance.problem.svd()?,
        &instance.b,
        &instance.problem.b_true,
        instance.eta,
        PicardOptions::default(),
    )
}

/// Picard diagnostic with an explicit floor and rule parameters.
///
/// `k0` is one less than the first index whose windowed median of `|u_i^T b|`
/// drops to `floor_factor · η` or below, and `n` if that never happens.
pub fn picard_diagnostic_with(
    svd: &SvdFactorization,
    b: &[f64],
    b_true: &[f64],
    eta: f64,
    options: PicardOptions,
) -> Result<PicardDiagnostic> {
    if options.window == 0 || options.floor_factor <= 0.0 {
        return Err(Error::InvalidParameter("Picard window and floor factor must be positive".into()));
    }
    let coefficients: Vec<f64> = svd.coefficients(b).iter().map(|c| c.abs()).collect();
    let true_coefficients: Vec<f64> = svd.coefficients(b_true).iter().map(|c| c.abs()).collect();
    let n = coefficients.len();
    let k0 = transition_index(&coefficients, eta, options);
    let k0_naive = coefficients.iter().position(|&c| c <= eta).unwrap_or(n);
    if k0 == 0 {
        warn!("every Picard coefficient is at or below the noise floor {eta:e}; k0 = 0");
    }
    let beta_fit = fit_beta(&svd.singular_values[..k0], &true_coefficients[..k0]);
    Ok(PicardDiagnostic {
        sigma: svd.singular_values.clone(),
        coefficients,
        true_coefficients,
        noise_floor: eta,
        k0,
        k0_naive,
        beta_fit,
        options,
    })
}

/// The windowed transition rule on `|u_i^T b|` alone, so that `k0` can be
/// recomputed from exported coefficients.
pub fn transition_index(coefficients: &[f64], eta: f64, options: PicardOptions) -> usize {
    let n = coefficients.len();
    let threshold = options.floor_factor * eta;
    let half_lo = (options.window - 1) / 2;
    let half_hi = options.window / 2;
    let windowed = |i: usize| {
        let lo = i.saturating_sub(half_lo);
        let hi = (i + half_hi + 1).min(n);
        median(&coefficients[lo..hi])
    };
    (0..n).find(|&i| windowed(i) <= threshold).unwrap_or(n)
}

fn fit_beta(sigma: &[f64], coef: &[f64]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = sigma
        .iter()
        .zip(coef)
        .filter(|(s, c)| **s > 0.0 && **c > 0.0)
        .map(|(s, c)| (s.ln(), c.ln()))
        .unzip();
    if x.len() < 2 {
        return f64::NAN;
    }
    linear_fit(&x, &y).0 - 1.0
}

impl PicardDiagnostic {
    /// Columns `i, sigma_i, abs_uiTb, abs_uiTbtrue, eta`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "sigma_i", "abs_uiTb", "abs_uiTbtrue", "eta"])?;
        for i in 0..self.coefficients.len() {
            w.write_record(&[
                (i + 1).to_string(),
                format!("{:e}", self.sigma[i]),
                format!("{:e}", self.coefficients[i]),
                format!("{:e}", self.true_coefficients[i]),
                format!("{:e}", self.noise_floor),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{make_gravity, make_picard_synthetic, SpectrumModel};

    #[test]
    fn exact_relative_level() {
        let p = Arc::new(make_gravity(32, 0.25).unwrap());
        let inst = add_noise(&p, 1e-3, 9).unwrap();
        let rel = norm2(&inst.e) / norm2(&p.b_true);
        assert!((rel - 1e-3).abs() <= 1e-15);
        assert!((inst.eta - norm2(&inst.e) / 32f64.sqrt()).abs() == 0.0);
        assert_eq!(add_noise(&p, 1e-3, 9).unwrap().e, inst.e);
    }

    #[test]
    fn rejects_out_of_range_levels() {
        let p = Arc::new(make_gravity(8, 0.25).unwrap());
        for eps in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(add_noise(&p, eps, 0).is_err());
        }
    }

    #[test]
    fn analytic_crossing() {
        // Coefficients 2^{-i}: 2^{-9} > 1e-3 > 2^{-10}.
        let p = make_picard_synthetic(16, SpectrumModel::severe(2.0, 0.0), 1).unwrap();
        let opts = PicardOptions {
            floor_factor: 1.0,
            window: 5,
        };
        let d = picard_diagnostic_with(p.svd().unwrap(), &p.b_true, &p.b_true, 1e-3, opts).unwrap();
        assert_eq!(d.k0, 9);
        assert_eq!(d.k0_naive, 9);
        assert!(d.beta_fit.abs() < 1e-10);
    }

    #[test]
    fn no_crossing_gives_n() {
        let p = make_picard_synthetic(6, SpectrumModel::severe(2.0, 1.0), 1).unwrap();
        let d = picard_diagnostic_with(p.svd().unwrap(), &p.b_true, &p.b_true, 1e-9, PicardOptions::default())
            .unwrap();
        assert_eq!(d.k0, 6);
        assert!((d.beta_fit - 1.0).abs() < 1e-10);
    }

    #[test]
    fn everything_below_floor() {
        let p = make_picard_synthetic(6, SpectrumModel::severe(2.0, 1.0), 1).unwrap();
        let d = picard_diagnostic_with(p.svd().unwrap(), &p.b_true, &p.b_true, 1.0, PicardOptions::default())
            .unwrap();
        assert_eq!(d.k0, 0);
        assert!(d.beta_fit.is_nan());
    }
}
