//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::cell::Cell;
use std::time::{Duration, Instant};

use gpdevopt::correlation::nugget_lower_bound;
use gpdevopt::global::Direct;
use gpdevopt::testbed::{run_benchmark, test_function, BenchmarkOptions, BenchmarkOutput, BenchmarkResult};
use gpdevopt::{
    bfgs_minimize, build_correlation, central_gradient, default_beta_box, direct_search, evaluate_deviance,
    fit_observed, if_beta_box, implicit_filtering, lhd_maximin, BfgsOptions, CorrelationSpec, DesignSet,
    DevianceEvaluator, FitOptions, FittedGp, IfOptions, Matrix, ModelOptions, SearchBox, StrategyId,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{grid_min, relative_error, Oracle};

const SEED: u64 = 2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ (stream << 32))
}

fn unit_rows(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    lhd_maximin(n, &SearchBox::unit(d), rng).to_rows()
}

/// A point drawn uniformly from the upper half of the default box.
fn upper_beta(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let b = default_beta_box::<f64>(d);
    (0..d)
        .map(|k| {
            let mid = 0.5 * (b.lower()[k] + b.upper()[k]);
            rng.gen_range(mid..b.upper()[k])
        })
        .collect()
}

fn smooth3(x: &[f64]) -> f64 {
    (3.0 * x[0]).sin() + x[1] * x[1] * 2.0 - (x[0] * x[2] * 4.0).cos()
}

fn response(x: &[f64]) -> f64 {
    match x.len() {
        1 => test_function("hump").unwrap().eval(x),
        2 => test_function("goldstein-price").unwrap().eval(x),
        _ => smooth3(x),
    }
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut r = rng(1);
    let mut worst = [0.0f64; 6];
    for case in 0..100 {
        let d = 1 + case % 3;
        let n = r.gen_range(2..=8);
        let points: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.gen::<f64>()).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| r.gen_range(-5.0..5.0)).collect();
        let beta = upper_beta(d, &mut r);
        let p = if case % 2 == 0 { 2.0 } else { 1.99 };
        let design = DesignSet::from_rows(&points, y.clone()).unwrap();
        let opts = ModelOptions {
            p,
            ..ModelOptions::default()
        };
        let oracle = Oracle::new(&points, &y, &beta, p);
        let model = FittedGp::at_beta(design.clone(), &beta, &opts, 0).unwrap();
        let ev = evaluate_deviance(&design, &beta, &opts).unwrap();
        let y_scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let errs = [
            relative_error(ev.deviance, oracle.deviance, 1.0),
            relative_error(ev.mu_hat, oracle.mu, y_scale),
            relative_error(ev.sigma2_hat, oracle.sigma2, 0.0),
        ];
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
        for _ in 0..3 {
            let x: Vec<f64> = (0..d).map(|_| r.gen::<f64>()).collect();
            let (blup, linear, mse) = oracle.predict(&x);
            let pred = model.predict(&x);
            worst[3] = worst[3].max(relative_error(pred.y_hat, blup, y_scale));
            worst[4] = worst[4].max(relative_error(model.predict_linear(&x), linear, y_scale));
            worst[5] = worst[5].max((pred.mse - mse).abs() / oracle.sigma2);
        }
    }
    let elapsed = t.elapsed();
    let pass = worst.iter().all(|&e| e <= 1e-8) && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "max rel err: deviance {:.1e}, mu {:.1e}, sigma2 {:.1e}, blup {:.1e}, C'Y {:.1e}, mse {:.1e}; {:.2?}",
            worst[0], worst[1], worst[2], worst[3], worst[4], worst[5], elapsed
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let (mut designs, mut skipped) = (0, 0);
    let (mut worst_pred, mut worst_mse) = (0.0f64, 0.0f64);
    while designs < 25 {
        let d = 1 + designs % 3;
        let points = unit_rows(6 * d + designs % 4, d, &mut r);
        let y: Vec<f64> = points.iter().map(|x| response(x)).collect();
        let beta = upper_beta(d, &mut r);
        let model = FittedGp::at_beta(DesignSet::from_rows(&points, y.clone()).unwrap(), &beta, &ModelOptions::default(), 0)
            .unwrap();
        if model.delta() != 0.0 {
            skipped += 1;
            continue;
        }
        designs += 1;
        let range = y.iter().cloned().fold(f64::MIN, f64::max) - y.iter().cloned().fold(f64::MAX, f64::min);
        for (x, &yi) in points.iter().zip(&y) {
            let p = model.predict(x);
            worst_pred = worst_pred.max((p.y_hat - yi).abs() / range);
            worst_mse = worst_mse.max(p.mse / model.sigma2_hat());
        }
    }
    outcome(
        worst_pred < 1e-6 && worst_mse < 1e-8,
        format!("25 designs ({skipped} with a nugget skipped): max |err|/range {worst_pred:.1e}, max mse/sigma2 {worst_mse:.1e}"),
    )
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let opts = ModelOptions::default();
    let (mut worst_shift, mut worst_scale) = (0.0f64, 0.0f64);
    let mut argmin_ok = true;
    for case in 0..10 {
        let d = 1 + case % 2;
        let points = unit_rows(10 * d, d, &mut r);
        let y: Vec<f64> = points.iter().map(|x| response(x)).collect();
        let base = DesignSet::from_rows(&points, y.clone()).unwrap();
        let with = |f: &dyn Fn(f64) -> f64| DesignSet::from_rows(&points, y.iter().map(|&v| f(v)).collect()).unwrap();
        let shifts = [-1e3, -2.5, 0.7, 1e3];
        let scales = [1e-3, 0.5, 7.0, 1e3];
        let shifted: Vec<DesignSet<f64>> = shifts.iter().map(|&c| with(&move |v| v + c)).collect();
        let scaled: Vec<DesignSet<f64>> = scales.iter().map(|&s| with(&move |v| v * s)).collect();
        let n = y.len() as f64;
        let dev = |ds: &DesignSet<f64>, b: &[f64]| evaluate_deviance(ds, b, &opts).map(|e| e.deviance);

        for _ in 0..5 {
            let beta = upper_beta(d, &mut r);
            let l0 = dev(&base, &beta).unwrap();
            for ds in &shifted {
                worst_shift = worst_shift.max((dev(ds, &beta).unwrap() - l0).abs());
            }
            for (ds, &s) in scaled.iter().zip(&scales) {
                worst_scale = worst_scale.max((dev(ds, &beta).unwrap() - l0 - 2.0 * n * s.ln()).abs());
            }
        }

        // 101-point grid along the diagonal of the default box
        let b = default_beta_box::<f64>(d);
        let argmin = |ds: &DesignSet<f64>| {
            (0..101)
                .map(|i| b.diagonal_point(i as f64 / 100.0))
                .map(|beta| dev(ds, &beta).unwrap_or(f64::INFINITY))
                .enumerate()
                .fold((0, f64::INFINITY), |m, (i, v)| if v < m.1 { (i, v) } else { m })
                .0
        };
        let i0 = argmin(&base);
        argmin_ok &= shifted.iter().chain(&scaled).all(|ds| argmin(ds) == i0);
    }
    outcome(
        worst_shift <= 1e-9 && worst_scale <= 1e-9 && argmin_ok,
        format!(
            "max |dL| under shift {worst_shift:.1e}, max |dL - 2n log s| {worst_scale:.1e}, grid argmin invariant: {argmin_ok}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let mut r = rng(4);
    let bound = 25f64.exp() * 1.05;
    let (mut worst, mut min_raw) = (0.0f64, f64::INFINITY);
    for case in 0..50 {
        let d = 1 + case % 3;
        let n = 10 + case % 21;
        let mut points = unit_rows(n, d, &mut r);
        if case % 2 == 1 {
            // near-duplicate pairs
            for i in (0..n / 2).step_by(2) {
                let mut q = points[i].clone();
                q[0] = (q[0] + 1e-7).min(1.0);
                points[i + 1] = q;
            }
        }
        let beta: Vec<f64> = (0..d).map(|_| r.gen_range(-4.0..-1.5)).collect();
        let x = Matrix::from_rows(&points).unwrap();
        let rl = build_correlation(&x, &CorrelationSpec::gaussian(beta.clone(), 2.0).unwrap()).unwrap();
        let delta = nugget_lower_bound(&rl, 25.0).unwrap();
        let mut ro = common::correlation(&points, &beta, 2.0);
        let raw = common::condition(&ro);
        min_raw = min_raw.min(if raw > 0.0 { raw } else { f64::INFINITY });
        for (i, row) in ro.iter_mut().enumerate() {
            row[i] += delta;
        }
        worst = worst.max(common::condition(&ro));
    }
    let elapsed = t.elapsed();
    outcome(
        worst <= bound && min_raw > 25f64.exp() && elapsed < Duration::from_secs(30),
        format!(
            "50 designs, smallest raw kappa {min_raw:.1e} (> e^25), max kappa(R + delta I) = {:.4} e^25; {elapsed:.2?}",
            worst / 25f64.exp()
        ),
    )
}

fn by(out: &BenchmarkOutput, s: StrategyId) -> &BenchmarkResult {
    out.results.iter().find(|r| r.strategy == s).unwrap()
}

fn criterion_5(hump: &BenchmarkOutput, gp: &BenchmarkOutput, elapsed: Duration) -> Outcome {
    let rm: Vec<f64> = hump.results.iter().map(|r| r.mean_rmspe).collect();
    let (lo, hi) = (rm.iter().cloned().fold(f64::MAX, f64::min), rm.iter().cloned().fold(f64::MIN, f64::max));
    let hump_spread = (hi - lo) / lo;
    let direct = by(gp, StrategyId::DirectBfgs);
    let half = by(gp, StrategyId::MsBfgsHalfD);
    let full = by(gp, StrategyId::MsBfgs2d1);
    let ratio = direct.mean_fe / full.mean_fe;
    let adjacent = (direct.mean_fe - half.mean_fe).abs() / half.mean_fe;
    let ordering = direct.mean_fe < full.mean_fe && half.mean_fe < full.mean_fe && adjacent <= 0.10;
    let failures = hump.results.iter().chain(&gp.results).map(|r| r.failed).sum::<usize>();
    let pass = hump_spread <= 0.01
        && ordering
        && (0.5..=0.9).contains(&ratio)
        && direct.pct_delta_deviance <= 1.0
        && failures == 0
        && elapsed < Duration::from_secs(600);
    outcome(
        pass,
        format!(
            "hump RMSPE spread {:.3}%; GP FE DIRECT-BFGS {:.1}, MS-BFGS-halfd {:.1} ({:.1}% apart), MS-BFGS-2d1 {:.1}; ratio {ratio:.3}; DIRECT-BFGS %dL {:.3}; {elapsed:.1?}",
            100.0 * hump_spread,
            direct.mean_fe,
            half.mean_fe,
            100.0 * adjacent,
            full.mean_fe,
            direct.pct_delta_deviance
        ),
    )
}

fn criterion_6(hump: &BenchmarkOutput, gp: &BenchmarkOutput) -> Outcome {
    let worst = hump
        .results
        .iter()
        .chain(&gp.results)
        .map(|r| r.rmspe_std_err / r.mean_rmspe)
        .fold(0.0f64, f64::max);
    outcome(worst <= 0.1, format!("max std err / mean RMSPE = {worst:.4} over 14 strategy runs"))
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let f = test_function("schwefel").unwrap();
    let out = run_benchmark(&f, &StrategyId::ALL, 10, SEED, &BenchmarkOptions::default()).unwrap();
    let elapsed = t.elapsed();
    let direct = by(&out, StrategyId::DirectBfgs);
    let full = by(&out, StrategyId::MsBfgs2d1);
    let failures = out.results.iter().map(|r| r.failed).sum::<usize>();
    let pass = direct.mean_fe < 0.5 * full.mean_fe
        && direct.pct_delta_deviance <= 1.0
        && failures == 0
        && elapsed < Duration::from_secs(1800);
    outcome(
        pass,
        format!(
            "Schwefel-5 FE DIRECT-BFGS {:.1} vs MS-BFGS-2d1 {:.1} (ratio {:.3}); DIRECT-BFGS %dL {:.3}; {elapsed:.1?}",
            direct.mean_fe,
            full.mean_fe,
            direct.mean_fe / full.mean_fe,
            direct.pct_delta_deviance
        ),
    )
}

fn hump_design() -> DesignSet<f64> {
    let mut r = rng(8);
    let points = unit_rows(10, 1, &mut r);
    let y = points.iter().map(|x| response(x)).collect();
    DesignSet::from_rows(&points, y).unwrap()
}

fn criterion_8() -> Outcome {
    let rosen = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
    let b = bfgs_minimize(rosen, &[-1.2, 1.0], &BfgsOptions::default());
    let bfgs_ok = b.value < 1e-6;

    let dr = direct_search(|x: &[f64]| (x[0] - 0.7).powi(2), &SearchBox::unit(1), 100);
    let direct_ok = (dr.beta_star[0] - 0.7).abs() <= 0.01 && dr.fe_used == 100;

    let design = hump_design();
    let ev = DevianceEvaluator::new(&design, &ModelOptions::default()).unwrap();
    let bounds = if_beta_box::<f64>(1);
    let (_, grid) = grid_min(&mut |b| ev.deviance(&[b]), bounds.lower()[0], bounds.upper()[0], 2001);
    let ifr = implicit_filtering(|b: &[f64]| ev.deviance(b), &bounds.center(), &IfOptions::new(bounds.clone())).unwrap();
    let if_ok = ifr.value <= grid + 1e-2;

    let mut worst_grad = 0.0f64;
    let smooth: Vec<(Box<dyn Fn(&[f64]) -> f64>, Vec<f64>)> = vec![
        (Box::new(rosen), vec![-1.2, 1.0]),
        (Box::new(|x: &[f64]| (x[0]).sin() * (0.5 * x[1]).exp() + x[2] * x[2] * x[0]), vec![0.3, -0.7, 1.9]),
        (Box::new(|x: &[f64]| ev.deviance(x)), vec![0.8]),
        (Box::new(|x: &[f64]| ev.deviance(x)), vec![1.9]),
    ];
    for (f, x) in &smooth {
        let g = central_gradient(|v: &[f64]| f(v), x, 1e-6);
        let o = common::five_point_gradient(&mut |v: &[f64]| f(v), x, 1e-3);
        let scale = o.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, e) in g.iter().zip(&o) {
            worst_grad = worst_grad.max((a - e).abs() / scale);
        }
    }
    let grad_ok = worst_grad <= 1e-4;
    outcome(
        bfgs_ok && direct_ok && if_ok && grad_ok,
        format!(
            "BFGS Rosenbrock {:.1e} in {} FE; DIRECT x* = {:.4}; IF {:.5} vs grid {:.5}; gradient rel err {worst_grad:.1e}",
            b.value, b.fe_used, dr.beta_star[0], ifr.value, grid
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut checked = 0;
    let mut mismatches = Vec::new();
    let mut r = rng(9);
    for d in [1, 2, 3] {
        let points = unit_rows(8 * d, d, &mut r);
        let y = points.iter().map(|x| response(x)).collect();
        let design = DesignSet::from_rows(&points, y).unwrap();
        for s in StrategyId::ALL {
            let calls = Cell::new(0usize);
            let out = fit_observed(&design, s, &FitOptions::default(), &mut rng(90 + d as u64), |_, _| {
                calls.set(calls.get() + 1)
            })
            .unwrap();
            let parts = out.search.sampling_fe + out.search.diagonal_fe + out.search.local_fe.iter().sum::<usize>();
            checked += 1;
            if calls.get() != out.model.fe_count() || calls.get() != out.search.fe_used() || calls.get() != parts {
                mismatches.push(format!("{s} d={d}"));
            }
        }
    }
    let calls = Cell::new(0usize);
    let counted = |x: &[f64]| {
        calls.set(calls.get() + 1);
        x.iter().map(|v| (v - 0.2).powi(2)).sum::<f64>() + x[0].sin()
    };
    let reports = [
        bfgs_minimize(counted, &[1.0, -1.0], &BfgsOptions::default()),
        implicit_filtering(counted, &[1.0, -1.0], &IfOptions::new(SearchBox::uniform(2, -2.0, 2.0).unwrap())).unwrap(),
        direct_search(counted, &SearchBox::uniform(2, -2.0, 2.0).unwrap(), 123),
    ];
    let total: usize = reports.iter().map(|r| r.fe_used).sum();
    checked += 3;
    if total != calls.get() {
        mismatches.push("local/DIRECT".into());
    }
    let mut s = Direct::new(counted, &SearchBox::unit(2), 50);
    while s.step().is_some() {}
    checked += 1;
    if s.fe_used() != 50 {
        mismatches.push("stepwise DIRECT".into());
    }
    outcome(
        mismatches.is_empty(),
        format!("{checked} runs checked against a counting wrapper; mismatches: {mismatches:?}"),
    )
}

fn main() {
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let mut report = |k: u32, o: Outcome| {
        println!("criterion {k}: {} - {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((k, o));
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());

    let t = Instant::now();
    let opts = BenchmarkOptions::default();
    let hump = run_benchmark(&test_function("hump").unwrap(), &StrategyId::ALL, 25, SEED, &opts).unwrap();
    let gp = run_benchmark(&test_function("goldstein-price").unwrap(), &StrategyId::ALL, 25, SEED, &opts).unwrap();
    report(5, criterion_5(&hump, &gp, t.elapsed()));
    report(6, criterion_6(&hump, &gp));
    report(7, criterion_7());
    report(8, criterion_8());
    report(9, criterion_9());

    let failed: Vec<u32> = results.iter().filter(|(_, o)| !o.pass).map(|(k, _)| *k).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
