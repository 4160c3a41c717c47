use std::sync::Arc;

use illposed::analysis::{
    analyze, bound_report, bound_reports, delta_direct, delta_norm_via_angles, delta_rank_one, gamma_exact,
    gamma_via_gk, global_interlacing_violation, lagrange_factors, mirsky_gap_violation, sigma_delta_norm_subspace,
    SLACK,
};
use illposed::error::Error;
use illposed::experiment::{compute_for, ExperimentConfig};
use illposed::gallery::{make_picard_synthetic, make_prescribed, SpectrumModel};
use illposed::golub_kahan::{bidiag_complete, BidiagState, Reorth};
use illposed::noise::{add_noise, picard_diagnostic};
use illposed::numerics::{spectral_norm, svd, DenseMatrix};
use illposed::random::{gaussian_matrix, gaussian_vector, rng};
use proptest::prelude::*;

fn severe_six() -> (Arc<illposed::gallery::IllPosedProblem>, Vec<f64>) {
    let mut p = make_prescribed(6, 6, SpectrumModel::severe(4.0, 0.0), 21).unwrap();
    p.ensure_svd().unwrap();
    let p = Arc::new(p);
    let b = add_noise(&p, 1e-3, 22).unwrap().b;
    (p, b)
}

#[test]
fn three_by_three_gamma_by_brute_force() {
    let a = DenseMatrix::from_diag(&[1.0, 0.5, 0.25]);
    let d = a.tr_matvec(&[1.0, 1.0, 1.0]);
    let nd = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    let q = DenseMatrix::from_columns(3, &[d.iter().map(|v| v / nd).collect()]).unwrap();
    // A (I − q q^T), formed entry by entry.
    let oracle = DenseMatrix::from_fn(3, 3, |i, j| {
        let proj = if i == j { 1.0 } else { 0.0 } - q.column(0)[i] * q.column(0)[j];
        a.as_slice()[i * 3 + i] * proj
    });
    let expected = spectral_norm(&oracle).unwrap();
    assert!((gamma_exact(&a, &q).unwrap() - expected).abs() < 1e-14);
    let state = bidiag_complete(&a, &[1.0, 1.0, 1.0]).unwrap();
    assert!((gamma_via_gk(&state, 1).unwrap() - expected).abs() < 1e-14);
}

#[test]
fn severe_routes_agree_at_n6() {
    let (p, b) = severe_six();
    let f = p.svd().unwrap();
    let mut state = BidiagState::start(&p.a, &b, Reorth::Full).unwrap();
    state.run_to(&p.a, 6);
    for k in 1..6 {
        let direct = match delta_direct(f, &b, k) {
            Ok(d) => spectral_norm(&d).unwrap(),
            Err(Error::Conditioning { .. }) if k == 5 => continue,
            Err(e) => panic!("k={k}: {e}"),
        };
        let angles = delta_norm_via_angles(f, &state.q_leading(k)).unwrap().delta_norm;
        assert!((angles / direct - 1.0).abs() < 1e-8, "k={k}: {angles:e} vs {direct:e}");
    }
}

#[test]
fn rank_one_majorant_holds_entrywise() {
    let (p, b) = severe_six();
    let f = p.svd().unwrap();
    for k in 1..5 {
        let d = delta_direct(f, &b, k).unwrap();
        let tilde = delta_rank_one(f, &b, k).unwrap();
        let (per_j, _) = lagrange_factors(&f.singular_values, k).unwrap();
        for j in 0..k {
            for r in 0..6 - k {
                let entry = d.column(j)[r].abs();
                let majorant = per_j[j] * tilde.column(j)[r];
                assert!(entry <= majorant * (1.0 + 1e-10) + 1e-300, "k={k} ({r},{j}): {entry:e} > {majorant:e}");
            }
        }
    }
}

#[test]
fn sigma_delta_sandwich() {
    let (p, b) = severe_six();
    let f = p.svd().unwrap();
    let s = &f.singular_values;
    let mut state = BidiagState::start(&p.a, &b, Reorth::Full).unwrap();
    state.run_to(&p.a, 6);
    for k in 1..6 {
        let q = state.q_leading(k);
        let d = delta_norm_via_angles(f, &q).unwrap().delta_norm;
        let sd = sigma_delta_norm_subspace(f, &q).unwrap();
        assert!(s[k - 1] * d <= sd * (1.0 + 1e-10), "k={k}");
        assert!(sd <= s[0] * d * (1.0 + 1e-10), "k={k}");
    }
}

#[test]
fn sigma_delta_within_reported_bounds_at_n6() {
    let (p, _) = severe_six();
    let inst = add_noise(&p, 1e-3, 22).unwrap();
    let picard = picard_diagnostic(&inst).unwrap();
    let f = p.svd().unwrap();
    let mut state = BidiagState::start(&p.a, &inst.b, Reorth::Full).unwrap();
    state.run_to(&p.a, 6);
    for k in 1..6 {
        let q = state.q_leading(k);
        let d = delta_norm_via_angles(f, &q).unwrap().delta_norm;
        let sd = sigma_delta_norm_subspace(f, &q).unwrap();
        let report = bound_report(&picard, &p.spectrum, d, k).unwrap();
        assert!(sd <= report.sigma_delta_bound_rigorous * (1.0 + 1e-8), "k={k}");
        assert!(d <= report.delta_bound_rigorous * (1.0 + 1e-8), "k={k}");
        // The stated form carries an unspecified constant; within a factor 2.
        assert!(sd <= 2.0 * report.sigma_delta_bound, "k={k}: {sd:e} vs {:e}", report.sigma_delta_bound);
    }
}

#[test]
fn rho_three_meets_near_best_condition_up_to_k0() {
    let spectrum = SpectrumModel::severe(3.0, 1.0);
    let p = Arc::new(make_picard_synthetic(40, spectrum, 31).unwrap());
    let inst = add_noise(&p, 1e-4, 32).unwrap();
    let picard = picard_diagnostic(&inst).unwrap();
    let mut state = BidiagState::start(&p.a, &inst.b, Reorth::Full).unwrap();
    state.run_to(&p.a, 20);
    let records = analyze(&p.a, p.svd().unwrap(), &state, 20).unwrap();
    let bounds = bound_reports(&picard, &spectrum, &records).unwrap();
    assert!(picard.k0 >= 3);
    for (r, b) in records.iter().zip(&bounds).filter(|(r, _)| r.k <= picard.k0) {
        assert!(b.near_best_rule && b.near_best_condition, "k={}: eta {}", r.k, b.eta_k);
        assert!(r.near_best, "k={} not near best", r.k);
    }
}

#[test]
fn heat_loses_natural_order_before_semi_convergence() {
    let cfg = ExperimentConfig::from_text("problem = heat\nn = 256\nnoise = 1e-3\nseed = 42").unwrap();
    let r = compute_for(&cfg, cfg.problem.build_with_svd(256).unwrap()).unwrap();
    let first = r.summary.first_natural_order_failure.expect("natural order never fails");
    assert!(first <= r.summary.kstar, "first failure {first}, k* {}", r.summary.kstar);
}

#[test]
fn shaw_keeps_natural_order_through_semi_convergence() {
    let cfg = ExperimentConfig::from_text("problem = shaw\nn = 256\nnoise = 1e-3\nseed = 42").unwrap();
    let r = compute_for(&cfg, cfg.problem.build_with_svd(256).unwrap()).unwrap();
    assert!(r.records.iter().filter(|x| x.k <= r.summary.kstar).all(|x| x.natural_order));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn universal_inequalities_on_random_problems(seed in any::<u64>(), n in 3usize..14) {
        let mut g = rng(seed);
        let a = gaussian_matrix(&mut g, n + 2, n);
        let b = gaussian_vector(&mut g, n + 2);
        let f = svd(&a).unwrap();
        let state = match bidiag_complete(&a, &b) {
            Ok(s) => s,
            Err(_) => return Ok(()),
        };
        let records = analyze(&a, &f, &state, n - 1).unwrap();
        let slack = SLACK * f.singular_values[0];
        for r in &records {
            prop_assert!(r.gamma >= r.sigma_kplus1 - slack);
            prop_assert!((r.gamma - r.gamma_via_gk).abs() <= 1e-10 * f.singular_values[0]);
            prop_assert!(global_interlacing_violation(&r.ritz, &f.singular_values, slack).is_none());
            prop_assert!(mirsky_gap_violation(&r.ritz, &f.singular_values, r.gamma, slack).is_none());
            let identity = r.delta_norm / (1.0 + r.delta_norm * r.delta_norm).sqrt();
            prop_assert!(!r.delta_norm.is_finite() || (r.sin_theta - identity).abs() < 1e-10);
        }
        prop_assert!(records.windows(2).all(|w| w[1].gamma < w[0].gamma + slack));
    }
}
