use poisson_shrink::risk::{risk_delta_c_closed, risk_shrink_family};
use poisson_shrink::sampling::{poisson, substream};
use poisson_shrink::*;
use proptest::prelude::*;

fn counts(p: std::ops::RangeInclusive<usize>, hi: u64) -> impl Strategy<Value = Vec<u64>> {
    p.prop_flat_map(move |p| prop::collection::vec(0..=hi, p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn delta_c_shrinks_each_count(y in counts(2..=12, 60), c in 0.0f64..10.0) {
        let y = CountVector::new(y).unwrap();
        let d = delta_c(&y, c).unwrap();
        for (&v, &e) in y.as_slice().iter().zip(d.as_slice()) {
            prop_assert!(e >= 0.0 && e <= v as f64);
            prop_assert_eq!(v == 0, e == 0.0);
        }
    }

    #[test]
    fn delta_c_is_exact_rational(y in counts(2..=6, 40), num in 0i128..20, den in 1i128..7) {
        let y = CountVector::new(y).unwrap();
        let e = delta_c(&y, exact(num, den)).unwrap().to_f64();
        let f = delta_c(&y, num as f64 / den as f64).unwrap();
        for (a, b) in e.as_slice().iter().zip(f.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn mean_shrink_preserves_total(y in counts(3..=15, 100), b0 in 1.001f64..6.0) {
        let y = CountVector::new(y).unwrap();
        let z = y.total() as f64;
        prop_assert!((mean_shrink_b0::<f64>(&y, b0).unwrap().sum() - z).abs() <= 1e-12 * z.max(1.0));
        prop_assert!((mean_shrink_careful::<f64>(&y).unwrap().sum() - z).abs() <= 1e-12 * z.max(1.0));
    }

    #[test]
    fn mean_shrink_exact_total(y in counts(3..=6, 30), n in 2i128..40) {
        let y = CountVector::new(y).unwrap();
        let z = Exact::from_count(y.total());
        prop_assert_eq!(mean_shrink_b0(&y, exact(n, 1) / exact(2, 1) + exact(1, 1)).unwrap().sum(), z);
        prop_assert_eq!(mean_shrink_careful::<Exact>(&y).unwrap().sum(), z);
    }

    #[test]
    fn eb_estimates_nonnegative(
        y in counts(2..=10, 50),
        a in 0.05f64..5.0,
        c in 0.0f64..5.0,
    ) {
        let y = CountVector::new(y).unwrap();
        let alpha = vec![a; y.len()];
        let d = empirical_bayes(&y, &alpha, c).unwrap();
        prop_assert!(d.is_nonnegative());
    }

    #[test]
    fn weighted_cz_uniform_weights_match_cz(y in counts(2..=10, 50)) {
        let y = CountVector::new(y).unwrap();
        let w = WeightScheme::uniform(y.len(), 1.0).unwrap();
        let a = weighted_cz(&y, &w).unwrap();
        let b = delta_c(&y, 0.0).unwrap();
        for (x, z) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((x - z).abs() <= 1e-12 * z.max(1.0));
        }
    }

    #[test]
    fn matrix_shrinker_keeps_shape(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
        let mut rng = substream(seed, 0);
        let m: Vec<Vec<u64>> = (0..rows).map(|_| (0..cols).map(|_| poisson(&mut rng, 3.0)).collect()).collect();
        let y = CountMatrix::from_rows(m).unwrap();
        let e = matrix_shrinker(&y, 1.0).unwrap();
        prop_assert_eq!((e.rows(), e.cols()), (rows, cols));
        // Column factors (p−1+Z_j)/(p−1+Z) never exceed one at c = 0.
        let e0 = matrix_shrinker(&y, 0.0).unwrap();
        for i in 0..rows {
            for j in 0..cols {
                prop_assert!(*e.get(i, j) >= 0.0);
                prop_assert!(*e0.get(i, j) <= y.get(i, j) as f64 + 1e-12);
            }
        }
    }

    #[test]
    fn quad_dominator_leaves_sparse_counts(y in counts(3..=8, 20), c in 0.0f64..4.0) {
        let rule = PositiveCountRule::AtLeastOne;
        let n = positive_count(&y, rule);
        let y = CountVector::new(y).unwrap();
        let a = build_sum_penalty_matrix(y.len(), c).unwrap();
        let d = quad_dominator(&y, &a, &QuadOptions::default()).unwrap();
        if n <= 2 {
            for (&v, &e) in y.as_slice().iter().zip(d.as_slice()) {
                prop_assert_eq!(v as f64, e);
            }
        }
    }

    #[test]
    fn sum_penalty_form_dominates_identity(x in prop::collection::vec(-5.0f64..5.0, 2..8), c in 0.0f64..4.0) {
        let a = build_sum_penalty_matrix(x.len(), c).unwrap();
        let plain: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!(a.form(&x) >= plain - 1e-9);
        prop_assert!(a.form(&x) >= a.smallest_eigenvalue() * plain - 1e-9);
    }

    #[test]
    fn losses_vanish_only_at_truth(theta in prop::collection::vec(0.01f64..20.0, 2..8), c in 0.0f64..5.0, shift in 0.01f64..3.0) {
        let t = MeanVector::new(theta.clone()).unwrap();
        let loss = LossSpec::lc(c);
        prop_assert!(loss.eval(&t, &theta).unwrap().abs() < 1e-12);
        let off: Vec<f64> = theta.iter().map(|v| v + shift).collect();
        prop_assert!(loss.eval(&t, &off).unwrap() > 0.0);
    }

    #[test]
    fn series_mass_and_mean(gamma in 1e-6f64..2000.0) {
        let cfg = SeriesConfig::default();
        let m = poisson_expectation(|_| 1.0, gamma, &cfg).unwrap();
        let e = poisson_expectation(|z| z as f64, gamma, &cfg).unwrap();
        prop_assert!((m - 1.0).abs() < 1e-12);
        prop_assert!((e - gamma).abs() < 1e-9 * gamma.max(1.0));
    }

    #[test]
    fn delta_c_risk_below_minimax(p in 2usize..15, c in 0.0f64..5.0, lg in -3.0f64..3.0) {
        let cfg = SeriesConfig::default();
        let gamma = 10f64.powf(lg);
        let a = risk_shrink_family(phi_delta_c(p, c), p, c, gamma, &cfg).unwrap();
        let b = risk_delta_c_closed(p, c, gamma, &cfg).unwrap();
        prop_assert!(a < p as f64 + c);
        prop_assert!((a - b).abs() < 1e-9 * (p as f64 + c));
    }

    #[test]
    fn poisson_draws_reproducible(seed in any::<u64>(), lambda in 0.0f64..500.0) {
        let a: Vec<u64> = { let mut r = substream(seed, 3); (0..20).map(|_| poisson(&mut r, lambda)).collect() };
        let b: Vec<u64> = { let mut r = substream(seed, 3); (0..20).map(|_| poisson(&mut r, lambda)).collect() };
        prop_assert_eq!(a, b);
    }

    #[test]
    fn negbin_pmf_normalised(shape in 0.2f64..30.0, beta in 0.05f64..5.0) {
        let cfg = SeriesConfig::default();
        let m = negbin_expectation(|_| 1.0, shape, beta, &cfg).unwrap();
        prop_assert!((m - 1.0).abs() < 1e-11);
    }
}
