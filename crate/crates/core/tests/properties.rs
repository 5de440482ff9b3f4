mod common;

use gpdevopt::global::{kmeans, Direct};
use gpdevopt::{
    bfgs_minimize, default_beta_box, evaluate_deviance, if_beta_box, lhd_maximin, BfgsOptions, DesignSet, FittedGp,
    ModelOptions, SearchBox,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn design_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    (1usize..=3, 3usize..=8, any::<u64>()).prop_flat_map(|(d, n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = lhd_maximin(n, &SearchBox::unit(d), &mut rng).to_rows();
        let b = default_beta_box::<f64>(d);
        (
            Just(points),
            prop::collection::vec(-100.0..100.0f64, n),
            prop::collection::vec(0.0..1.0f64, d).prop_map(move |t| {
                t.iter().enumerate().map(|(k, &u)| b.lower()[k] + (0.5 + 0.5 * u) * b.width(k)).collect()
            }),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blup_forms_agree((points, y, beta) in design_strategy(), probe in prop::collection::vec(0.0..1.0f64, 3)) {
        let d = points[0].len();
        let model = FittedGp::at_beta(DesignSet::from_rows(&points, y.clone()).unwrap(), &beta, &ModelOptions::default(), 0).unwrap();
        let x = &probe[..d];
        let a = model.predict(x).y_hat;
        let b = model.predict_linear(x);
        let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!((a - b).abs() <= 1e-8 * scale, "{a} vs {b}");
    }

    #[test]
    fn mse_is_nonnegative((points, y, beta) in design_strategy(), seed in any::<u64>()) {
        let d = points[0].len();
        let model = FittedGp::at_beta(DesignSet::from_rows(&points, y).unwrap(), &beta, &ModelOptions::default(), 0).unwrap();
        let grid = lhd_maximin(100 * d, &SearchBox::unit(d), &mut ChaCha8Rng::seed_from_u64(seed));
        for x in grid.row_iter() {
            prop_assert!(model.predict(x).mse >= 0.0);
        }
    }

    #[test]
    fn translation_and_scale((points, y, beta) in design_strategy(), c in -1e3..1e3f64, s in 1e-2..1e2f64) {
        let opts = ModelOptions::default();
        let dev = |ys: Vec<f64>| evaluate_deviance(&DesignSet::from_rows(&points, ys).unwrap(), &beta, &opts).unwrap().deviance;
        let l0 = dev(y.clone());
        let shifted = dev(y.iter().map(|v| v + c).collect());
        let scaled = dev(y.iter().map(|v| v * s).collect());
        let n = y.len() as f64;
        prop_assert!((shifted - l0).abs() < 1e-9 * l0.abs().max(1.0));
        prop_assert!((scaled - l0 - 2.0 * n * s.ln()).abs() < 1e-9 * l0.abs().max(1.0));
    }

    #[test]
    fn lhd_strata_are_permutations(n in 2usize..40, d in 1usize..5, seed in any::<u64>()) {
        let p = lhd_maximin(n, &SearchBox::<f64>::unit(d), &mut ChaCha8Rng::seed_from_u64(seed));
        for k in 0..d {
            let mut s: Vec<usize> = (0..n).map(|i| (p[(i, k)] * n as f64).floor() as usize).collect();
            s.sort_unstable();
            prop_assert_eq!(s, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn kmeans_best_restart(seed in any::<u64>(), k in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = lhd_maximin(40, &SearchBox::<f64>::unit(2), &mut rng).to_rows();
        let r = kmeans(&pts, k, 5, 100, &mut rng);
        prop_assert_eq!(r.restart_sse.len(), 5);
        prop_assert!(r.restart_sse.iter().all(|&s| r.sse <= s));
    }

    #[test]
    fn bfgs_trace_is_monotone(a in 0.1..10.0f64, b in -3.0..3.0f64, x0 in -5.0..5.0f64, y0 in -5.0..5.0f64) {
        let r = bfgs_minimize(|x: &[f64]| a * (x[0] - b).powi(2) + (x[1] + x[0]).powi(2), &[x0, y0], &BfgsOptions::default());
        prop_assert!(r.trace.windows(2).all(|w| w[1].best <= w[0].best && w[1].fe > w[0].fe));
        prop_assert_eq!(r.trace.last().unwrap().best, r.value);
        prop_assert_eq!(r.trace.last().unwrap().fe, r.fe_used);
    }

    #[test]
    fn direct_centers_in_box(budget in 1usize..200, shift in -1.0..1.0f64) {
        let bx = SearchBox::uniform(2, -3.0, 1.5).unwrap();
        let mut s = Direct::new(|x: &[f64]| (x[0] - shift).powi(2) + x[1].abs(), &bx, budget);
        while s.step().is_some() {}
        prop_assert_eq!(s.fe_used(), budget);
        for r in s.rectangles() {
            prop_assert!(r.center.iter().all(|&c| (0.0..=1.0).contains(&c)));
        }
    }

    #[test]
    fn default_box_within_if_box(d in 1usize..40) {
        let s = default_beta_box::<f64>(d);
        let f = if_beta_box::<f64>(d);
        prop_assert!(f.lower()[0] <= s.lower()[0] && s.upper()[0] <= f.upper()[0]);
    }
}

#[test]
fn oracle_jacobi_matches_known_spectrum() {
    let a = vec![vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 2.0]];
    let ev = common::jacobi_eigenvalues(&a);
    let want = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
    for (e, w) in ev.iter().zip(want) {
        assert!((e - w).abs() < 1e-12);
    }
    let inv = common::inverse(&a);
    let prod = common::mat_vec(&a, &common::mat_vec(&inv, &[1.0, 2.0, 3.0]));
    assert!(prod.iter().zip([1.0, 2.0, 3.0]).all(|(p, w)| (p - w).abs() < 1e-12));
    assert!((common::log_abs_det(&a) - 4f64.ln()).abs() < 1e-12);
}
