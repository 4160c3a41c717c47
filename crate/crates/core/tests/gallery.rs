use illposed::gallery::{
    fit_power_alpha, make_deriv2, make_gravity, make_heat, make_picard_synthetic, make_prescribed, make_shaw,
    random_orthonormal, read_matrix_text, write_matrix_text, SpectrumModel,
};
use illposed::numerics::{singular_values, spectral_norm, DenseMatrix};
use proptest::prelude::*;

fn asymmetry(a: &DenseMatrix) -> f64 {
    a.sub(&a.transpose()).max_abs()
}

#[test]
fn shaw_is_symmetric_and_severe() {
    let p = make_shaw(32).unwrap();
    assert!(asymmetry(&p.a) <= 1e-12);
    let s = singular_values(&p.a).unwrap();
    assert!(s[0] / s[19] > 1e12, "sigma_1/sigma_20 = {:e}", s[0] / s[19]);
}

#[test]
fn gravity_is_symmetric() {
    let p = make_gravity(32, 0.25).unwrap();
    assert!(asymmetry(&p.a) <= 1e-12);
}

#[test]
fn deriv2_decays_like_k_squared() {
    let p = make_deriv2(64).unwrap();
    let s = singular_values(&p.a).unwrap();
    let alpha = fit_power_alpha(&s, 1..=64);
    assert!((1.5..=2.5).contains(&alpha), "fitted exponent {alpha}");
}

#[test]
fn heat_is_causal() {
    let p = make_heat(64, 1.0).unwrap();
    for i in 0..64 {
        for j in i + 1..64 {
            assert_eq!(p.a.as_slice()[j * 64 + i], 0.0, "A[{i},{j}]");
        }
    }
    // det A = A_11^64 underflows, so the last singular values leave the
    // double range; the ratio is taken at the smallest positive one.
    let s = singular_values(&p.a).unwrap();
    let smallest = s.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let ratio = s[0] / smallest;
    assert!(ratio.is_finite() && ratio > 1e12, "sigma_1/sigma_min = {ratio:e}");
}

#[test]
fn picard_synthetic_follows_the_model() {
    let spectrum = SpectrumModel::severe(1.5, 0.5);
    let p = make_picard_synthetic(20, spectrum, 3).unwrap();
    let f = p.svd().unwrap();
    let model = spectrum.values(20).unwrap();
    let computed = singular_values(&p.a).unwrap();
    for (c, m) in computed.iter().zip(&model) {
        assert!((c - m).abs() <= 1e-12 * model[0], "{c} vs {m}");
    }
    let coef = f.coefficients(&p.b_true);
    for (c, s) in coef.iter().zip(&model) {
        assert!((c.abs() - s.powf(1.5)).abs() <= 1e-13, "{c} vs {}", s.powf(1.5));
    }
    let r = p.a.matvec(&p.x_true);
    assert!(r.iter().zip(&p.b_true).all(|(x, y)| (x - y).abs() < 1e-14));
}

#[test]
fn prescribed_spectrum_is_realized() {
    let spectrum = SpectrumModel::power(0.6, 0.0);
    let p = make_prescribed(30, 20, spectrum, 9).unwrap();
    assert_eq!((p.rows(), p.cols()), (30, 20));
    let model = spectrum.values(20).unwrap();
    let computed = singular_values(&p.a).unwrap();
    for (c, m) in computed.iter().zip(&model) {
        assert!((c / m - 1.0).abs() < 1e-12);
    }
    assert!((spectral_norm(&p.a).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn generators_are_deterministic() {
    let s = SpectrumModel::severe(2.0, 1.0);
    let a = make_picard_synthetic(16, s, 5).unwrap();
    let b = make_picard_synthetic(16, s, 5).unwrap();
    let c = make_picard_synthetic(16, s, 6).unwrap();
    assert_eq!(a.a.as_slice(), b.a.as_slice());
    assert_ne!(a.a.as_slice(), c.a.as_slice());
}

#[test]
fn invalid_sizes_are_rejected() {
    assert!(make_shaw(7).is_err());
    assert!(make_shaw(2).is_err());
    assert!(make_gravity(8, -1.0).is_err());
    assert!(make_picard_synthetic(1, SpectrumModel::severe(2.0, 1.0), 0).is_err());
    assert!(make_prescribed(4, 8, SpectrumModel::power(1.0, 0.0), 0).is_err());
}

#[test]
fn exported_matrix_reads_back() {
    let p = make_deriv2(6).unwrap();
    let mut buf = Vec::new();
    p.export_matrix(&mut buf).unwrap();
    let back = read_matrix_text(buf.as_slice()).unwrap();
    assert_eq!(back.as_slice(), p.a.as_slice());
    let mut again = Vec::new();
    write_matrix_text(&back, &mut again).unwrap();
    assert_eq!(buf, again);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_orthonormal_has_orthonormal_columns(rows in 1usize..20, extra in 0usize..10, seed in any::<u64>()) {
        let cols = rows.min(rows.saturating_sub(extra).max(1));
        let q = random_orthonormal(rows, cols, seed).unwrap();
        let defect = q.tr_matmul(&q).sub(&DenseMatrix::identity(cols)).max_abs();
        prop_assert!(defect < 1e-13, "defect {defect:e}");
    }

    #[test]
    fn spectrum_models_decrease(rho in 1.01f64..10.0, alpha in 0.51f64..4.0, n in 2usize..64) {
        for model in [SpectrumModel::severe(rho, 1.0), SpectrumModel::power(alpha, 1.0)] {
            let v = model.values(n).unwrap();
            prop_assert!(v.windows(2).all(|w| w[0] > w[1] && w[1] > 0.0));
        }
    }
}
