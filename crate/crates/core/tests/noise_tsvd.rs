use std::sync::Arc;

use illposed::gallery::{make_picard_synthetic, make_prescribed, make_shaw, IllPosedProblem, SpectrumModel};
use illposed::noise::{add_noise, from_noise, picard_diagnostic};
use illposed::numerics::{least_squares, norm2, svd, DenseMatrix};
use illposed::random::{gaussian_matrix, gaussian_vector, rng};
use illposed::tsvd::{tsvd_solution, tsvd_sweep, tsvd_sweep_with};
use proptest::prelude::*;

fn with_svd(mut p: IllPosedProblem) -> Arc<IllPosedProblem> {
    p.ensure_svd().unwrap();
    Arc::new(p)
}

#[test]
fn noise_projections_sit_at_the_floor() {
    let p = with_svd(make_prescribed(256, 256, SpectrumModel::power(1.0, 0.0), 11).unwrap());
    let inst = add_noise(&p, 1e-2, 12).unwrap();
    let f = p.svd().unwrap();
    let mean = f.coefficients(&inst.e).iter().map(|c| c.abs()).sum::<f64>() / 256.0;
    assert!((mean / inst.eta - 1.0).abs() <= 0.25, "mean {mean:e} vs eta {:e}", inst.eta);
}

#[test]
fn noise_is_seeded() {
    let p = with_svd(make_shaw(16).unwrap());
    let a = add_noise(&p, 1e-3, 5).unwrap();
    let b = add_noise(&p, 1e-3, 5).unwrap();
    let c = add_noise(&p, 1e-3, 6).unwrap();
    assert_eq!(a.e, b.e);
    assert_ne!(a.e, c.e);
}

#[test]
fn zero_noise_instance() {
    let p = with_svd(make_shaw(8).unwrap());
    let inst = from_noise(&p, vec![0.0; 8], 0);
    assert_eq!(inst.b, p.b_true);
    assert_eq!(inst.epsilon, 0.0);
}

#[test]
fn shaw_transition_point_tracks_best_truncation() {
    let p = with_svd(make_shaw(256).unwrap());
    let inst = add_noise(&p, 1e-3, 42).unwrap();
    let picard = picard_diagnostic(&inst).unwrap();
    let sweep = tsvd_sweep(&inst, 256).unwrap();
    assert!(
        picard.k0.abs_diff(sweep.best_k) <= 2,
        "k0 = {}, best TSVD k = {}",
        picard.k0,
        sweep.best_k
    );
}

#[test]
fn picard_synthetic_transition_matches_crossing() {
    // |u_i^T b_true| = 2^{-2i}; the crossing with a floor of 2η is analytic
    // up to the noise on each coefficient.
    let p = Arc::new(make_picard_synthetic(40, SpectrumModel::severe(2.0, 1.0), 2).unwrap());
    let inst = add_noise(&p, 1e-4, 3).unwrap();
    let picard = picard_diagnostic(&inst).unwrap();
    let crossing = (1..=40).take_while(|&i| 4f64.powi(-i) > 2.0 * inst.eta).count();
    assert!(picard.k0.abs_diff(crossing) <= 1, "k0 {} vs crossing {crossing}", picard.k0);
    assert!(picard.beta_fit.is_finite());
    assert!((picard.beta_fit - 1.0).abs() < 0.1, "fitted beta {}", picard.beta_fit);
}

#[test]
fn full_truncation_is_least_squares() {
    let mut g = rng(8);
    let a = gaussian_matrix(&mut g, 8, 5);
    let b = gaussian_vector(&mut g, 8);
    let f = svd(&a).unwrap();
    let x = tsvd_solution(&f, &b, 5).unwrap();
    let ls = least_squares(&a, &b).unwrap();
    for (u, v) in x.iter().zip(&ls) {
        assert!((u - v).abs() <= 1e-10);
    }
    assert!(tsvd_solution(&f, &b, 0).is_err());
    assert!(tsvd_solution(&f, &b, 6).is_err());
}

#[test]
fn shaw_error_curve_semi_converges() {
    let p = with_svd(make_shaw(256).unwrap());
    let inst = add_noise(&p, 1e-3, 42).unwrap();
    let sweep = tsvd_sweep(&inst, 60).unwrap();
    let best = sweep.best_k;
    assert!(best > 1 && best < sweep.errors.len());
    assert!(sweep.errors[..best - 1].iter().all(|&e| e > sweep.errors[best - 1]));
    assert!(sweep.errors.last().unwrap() > &(10.0 * sweep.errors[best - 1]));
}

#[test]
fn sweep_stops_at_zero_singular_value() {
    let a = DenseMatrix::from_diag(&[1.0, 0.5, 0.0]);
    let f = svd(&a).unwrap();
    let s = tsvd_sweep_with(&f, &[1.0, 1.0, 1.0], &[1.0, 2.0, 0.0], 3).unwrap();
    assert_eq!(s.errors.len(), 2);
    assert!(s.errors[1] < 1e-15);
    assert!((s.residuals[1] - 1.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relative_noise_level_is_exact(eps in 1e-6f64..0.5, seed in any::<u64>()) {
        let p = with_svd(make_shaw(16).unwrap());
        let inst = add_noise(&p, eps, seed).unwrap();
        prop_assert!((inst.epsilon / eps - 1.0).abs() < 1e-12);
        prop_assert!((norm2(&inst.e) / norm2(&p.b_true) / eps - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tsvd_residuals_do_not_increase(seed in any::<u64>(), m in 3usize..12, dn in 0usize..3) {
        let n = m - dn.min(m - 1);
        let mut g = rng(seed);
        let a = gaussian_matrix(&mut g, m, n);
        let b = gaussian_vector(&mut g, m);
        let x_true = gaussian_vector(&mut g, n);
        let f = svd(&a).unwrap();
        let s = tsvd_sweep_with(&f, &b, &x_true, n).unwrap();
        prop_assert!(s.residuals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        let ls = least_squares(&a, &b).unwrap();
        let r_ls = norm2(&illposed::numerics::sub_vec(&a.matvec(&ls), &b));
        prop_assert!((s.residuals[n - 1] - r_ls).abs() <= 1e-9 * norm2(&b));
    }
}
