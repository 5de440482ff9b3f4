//! Replicated strategy comparison on a test function.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::functions::TestFunction;
use super::metrics::{mean, pct_delta, rmspe, rmspe_std_err};
use crate::error::{Error, Result};
use crate::global::{lhd_maximin, SearchBox, StrategyId};
use crate::gp::{fit, DesignSet, FitOptions};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOptions {
    pub fit: FitOptions<f64>,
    /// Training size is `train_per_dim * d`.
    pub train_per_dim: usize,
    /// Validation size is `validation_per_dim * d`.
    pub validation_per_dim: usize,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        Self {
            fit: FitOptions::default(),
            train_per_dim: 10,
            validation_per_dim: 100,
        }
    }
}

/// One strategy on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub function: String,
    pub replicate: usize,
    pub strategy: StrategyId,
    pub deviance: f64,
    pub rmspe: f64,
    pub fe: usize,
    pub beta_star: Vec<f64>,
    pub error: Option<String>,
}

/// Aggregate over the successful replicates of one strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkResult {
    pub function: String,
    pub strategy: StrategyId,
    pub mean_deviance: f64,
    pub mean_rmspe: f64,
    pub rmspe_std_err: f64,
    pub mean_fe: f64,
    pub replicates: usize,
    pub failed: usize,
    pub pct_delta_deviance: f64,
    pub pct_delta_rmspe: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkOutput {
    pub results: Vec<BenchmarkResult>,
    pub records: Vec<ReplicateRecord>,
}

/// Training and validation data for one replicate.
#[derive(Debug, Clone)]
pub struct ReplicateData {
    pub design: DesignSet<f64>,
    pub validation: Matrix<f64>,
    pub validation_y: Vec<f64>,
    /// Seed shared by every strategy of the replicate.
    pub strategy_seed: u64,
}

/// Data of replicate `rep`, drawn from the stream `master_seed + rep`.
pub fn replicate_data(func: &TestFunction, master_seed: u64, rep: usize, opts: &BenchmarkOptions) -> Result<ReplicateData> {
    let d = func.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed.wrapping_add(rep as u64));
    let unit = SearchBox::unit(d);
    let train = lhd_maximin(opts.train_per_dim * d, &unit, &mut rng);
    let y: Vec<f64> = train.row_iter().map(|x| func.eval(x)).collect();
    let candidates = lhd_maximin(opts.validation_per_dim * d, &unit, &mut rng);
    let kept: Vec<Vec<f64>> = candidates
        .row_iter()
        .filter(|v| train.row_iter().all(|t| t != *v))
        .map(|v| v.to_vec())
        .collect();
    let validation = Matrix::from_rows(&kept)?;
    let validation_y = kept.iter().map(|x| func.eval(x)).collect();
    Ok(ReplicateData {
        design: DesignSet::new(train, y)?,
        validation,
        validation_y,
        strategy_seed: rng.gen(),
    })
}

fn run_one(func: &TestFunction, data: &ReplicateData, rep: usize, strategy: StrategyId, opts: &BenchmarkOptions) -> ReplicateRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(data.strategy_seed);
    let mut record = ReplicateRecord {
        function: func.name.to_string(),
        replicate: rep,
        strategy,
        deviance: f64::NAN,
        rmspe: f64::NAN,
        fe: 0,
        beta_star: Vec::new(),
        error: None,
    };
    let outcome = fit(&data.design, strategy, &opts.fit, &mut rng).and_then(|m| {
        let pred: Vec<f64> = data.validation.row_iter().map(|x| m.predict(x).y_hat).collect();
        Ok((rmspe(&data.validation_y, &pred)?, m))
    });
    match outcome {
        Ok((e, m)) => {
            record.deviance = m.deviance();
            record.rmspe = e;
            record.fe = m.fe_count();
            record.beta_star = m.beta_star().to_vec();
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

/// Fits every strategy on `replicates` fresh designs and aggregates the
/// results. Replicates run in parallel on the current rayon pool.
pub fn run_benchmark(
    func: &TestFunction,
    strategies: &[StrategyId],
    replicates: usize,
    master_seed: u64,
    opts: &BenchmarkOptions,
) -> Result<BenchmarkOutput> {
    if replicates == 0 || strategies.is_empty() {
        return Err(Error::InvalidArgument("need at least one replicate and one strategy".into()));
    }
    let per_rep: Vec<Vec<ReplicateRecord>> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let data = replicate_data(func, master_seed, rep, opts)?;
            Ok(strategies.iter().map(|&s| run_one(func, &data, rep, s, opts)).collect())
        })
        .collect::<Result<_>>()?;
    let records: Vec<ReplicateRecord> = per_rep.into_iter().flatten().collect();
    let results = summarize(func.name, strategies, &records);
    Ok(BenchmarkOutput { results, records })
}

/// Aggregates records per strategy, in the order of `strategies`.
pub fn summarize(function: &str, strategies: &[StrategyId], records: &[ReplicateRecord]) -> Vec<BenchmarkResult> {
    let mut results: Vec<BenchmarkResult> = strategies
        .iter()
        .map(|&s| {
            let ok: Vec<&ReplicateRecord> = records
                .iter()
                .filter(|r| r.strategy == s && r.error.is_none())
                .collect();
            let failed = records.iter().filter(|r| r.strategy == s && r.error.is_some()).count();
            if failed > 0 {
                warn!("{function}/{s}: {failed} replicate(s) failed and are excluded");
            }
            let rm: Vec<f64> = ok.iter().map(|r| r.rmspe).collect();
            let avg = |v: Vec<f64>| if v.is_empty() { f64::NAN } else { mean(&v) };
            BenchmarkResult {
                function: function.to_string(),
                strategy: s,
                mean_deviance: avg(ok.iter().map(|r| r.deviance).collect()),
                mean_rmspe: avg(rm.clone()),
                rmspe_std_err: rmspe_std_err(&rm).unwrap_or(0.0),
                mean_fe: avg(ok.iter().map(|r| r.fe as f64).collect()),
                replicates: ok.len(),
                failed,
                pct_delta_deviance: f64::NAN,
                pct_delta_rmspe: f64::NAN,
            }
        })
        .collect();
    let dev = pct_delta(&results.iter().map(|r| r.mean_deviance).collect::<Vec<_>>());
    let rm = pct_delta(&results.iter().map(|r| r.mean_rmspe).collect::<Vec<_>>());
    for ((r, dv), rv) in results.iter_mut().zip(dev).zip(rm) {
        r.pct_delta_deviance = dv;
        r.pct_delta_rmspe = rv;
    }
    results
}
