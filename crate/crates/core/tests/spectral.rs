use proptest::prelude::*;
use wavebem::linalg::GramFactor;
use wavebem::spectral::{
    b_coeff, conjectured_constant, coupling_form, coupling_form_via_pairing, lambda_max_adaptive, lambda_max_cm,
    CouplingFactor, CouplingMatrixSpec,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coupling_matches_quadratic_form(
        w0 in prop::collection::vec(-1.0f64..1.0, 1..=31),
        wl in prop::collection::vec(-1.0f64..1.0, 1..=31),
        ratio in 0.05f64..0.95,
    ) {
        let horizon = 1.0 / ratio;
        let direct = coupling_form(&w0, &wl, 1.0, horizon).unwrap();
        let via = coupling_form_via_pairing(&w0, &wl, 1.0, horizon).unwrap();
        prop_assert!((direct - via).abs() <= 1e-8, "{} vs {}", direct, via);
    }

    #[test]
    fn gram_diagonal_bounds_lambda(m in 1usize..40, horizon in 1.05f64..9.0) {
        let spec = CouplingMatrixSpec::new(1.0, horizon, m, 8 * (m + 1)).unwrap();
        let lambda = lambda_max_cm(&spec).unwrap();
        let factor = CouplingFactor::new(&spec).unwrap();
        for l in 0..=m {
            prop_assert!(lambda >= factor.gram_diagonal(l) * (1.0 - 1e-9));
        }
        prop_assert!(lambda >= 0.0);
        // the ellipticity bound 1/2 (1 - sqrt(lambda) / 2) stays positive
        prop_assert!(lambda.sqrt() < 2.0);
    }

    #[test]
    fn column_norm_is_gram_diagonal(m in 0usize..20, horizon in 1.05f64..6.0) {
        let spec = CouplingMatrixSpec::new(1.0, horizon, m, 8 * (m + 1)).unwrap();
        let factor = CouplingFactor::new(&spec).unwrap();
        for l in 0..=m {
            let direct: f64 = (0..=spec.k_max).map(|k| b_coeff(k, l, 1.0, horizon).unwrap().powi(2)).sum();
            prop_assert!((direct - factor.gram_diagonal(l)).abs() <= 1e-10 * (1.0 + direct));
        }
    }
}

#[test]
fn blocks_apply_like_their_entries() {
    let spec = CouplingMatrixSpec::new(1.0, 2.7, 7, 30).unwrap();
    let f = CouplingFactor::new(&spec).unwrap();
    let x: Vec<f64> = (0..f.even.ncols()).map(|i| (i as f64 + 1.0).sin()).collect();
    let mut y = vec![0.0; f.even.nrows()];
    f.even.apply(&x, &mut y);
    for (i, yi) in y.iter().enumerate() {
        let expect: f64 = x.iter().enumerate().map(|(j, xj)| b_coeff(2 * i, 2 * j, 1.0, 2.7).unwrap() * xj).sum();
        assert!((yi - expect).abs() < 1e-12);
    }
    let mut z = vec![0.0; f.even.ncols()];
    let norm = f.even.apply_gram(&x, &mut z);
    assert!((norm - y.iter().map(|v| v * v).sum::<f64>()).abs() < 1e-10);
}

#[test]
fn figure_examples_at_moderate_m() {
    for (t, expect) in [(2.0, 1.0), (4.0, 1.618_033_988_749_895)] {
        let est = lambda_max_adaptive(1.0, t, 400, 8).unwrap();
        assert!((est.lambda.sqrt() - expect).abs() < 0.05, "T = {t}: {}", est.lambda.sqrt());
        assert!((conjectured_constant(1.0, t).unwrap() - expect).abs() < 1e-12);
        assert!(est.k_max >= 8 * 401);
    }
}
