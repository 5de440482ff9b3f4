//! The seven likelihood-optimization strategies.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Serialize, Serializer};

use super::cluster::{cluster_starts, ClusterOptions};
use super::direct::direct_search;
use super::{default_beta_box, if_beta_box};
use crate::error::{Error, Result};
use crate::local::{bfgs_minimize, BfgsOptions, IfOptions, ImplicitFiltering, OptReport, Tracker};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyId {
    MsBfgs2d1,
    MsBfgsHalfD,
    MsIf2d1,
    MsIfHalfD,
    If2,
    DirectBfgs,
    DirectIf,
}

impl StrategyId {
    pub const ALL: [StrategyId; 7] = [
        StrategyId::MsBfgs2d1,
        StrategyId::MsBfgsHalfD,
        StrategyId::MsIf2d1,
        StrategyId::MsIfHalfD,
        StrategyId::If2,
        StrategyId::DirectBfgs,
        StrategyId::DirectIf,
    ];

    pub fn label(self) -> &'static str {
        match self {
            StrategyId::MsBfgs2d1 => "MS-BFGS-2d1",
            StrategyId::MsBfgsHalfD => "MS-BFGS-halfd",
            StrategyId::MsIf2d1 => "MS-IF-2d1",
            StrategyId::MsIfHalfD => "MS-IF-halfd",
            StrategyId::If2 => "IF2",
            StrategyId::DirectBfgs => "DIRECT-BFGS",
            StrategyId::DirectIf => "DIRECT-IF",
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let alias = match key.as_str() {
            "ms-bfgs-2d+1" => "ms-bfgs-2d1",
            "ms-if-2d+1" => "ms-if-2d1",
            "if-2" => "if2",
            other => other,
        };
        StrategyId::ALL
            .into_iter()
            .find(|id| id.label().eq_ignore_ascii_case(alias))
            .ok_or_else(|| Error::UnknownStrategy(s.to_string()))
    }
}

impl Serialize for StrategyId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyOptions<T> {
    pub bfgs: BfgsOptions<T>,
    /// IF stencil scales; the bounds come from `if_beta_box`.
    pub if_scales: Vec<T>,
    pub cluster: ClusterOptions,
    /// Expansion factor applied to both default boxes.
    pub box_scale: T,
    /// DIRECT budget is `direct_fe_per_dim * d`.
    pub direct_fe_per_dim: usize,
    /// IF2 first-stage cap per start is `if2_stage_fe_per_dim * d`.
    pub if2_stage_fe_per_dim: usize,
}

impl<T: Scalar> Default for StrategyOptions<T> {
    fn default() -> Self {
        Self {
            bfgs: BfgsOptions::default(),
            if_scales: crate::local::default_scales(),
            cluster: ClusterOptions::default(),
            box_scale: T::one(),
            direct_fe_per_dim: 200,
            if2_stage_fe_per_dim: 20,
        }
    }
}

/// Outcome of a strategy with its evaluation count broken down by phase.
#[derive(Debug, Clone, Serialize)]
pub struct StrategyReport<T> {
    pub strategy: StrategyId,
    /// Best point over every evaluation of the run.
    pub report: OptReport<T>,
    /// LHD sample or DIRECT evaluations.
    pub sampling_fe: usize,
    pub diagonal_fe: usize,
    /// Evaluations of each local run, in start order.
    pub local_fe: Vec<usize>,
}

impl<T> StrategyReport<T> {
    pub fn fe_used(&self) -> usize {
        self.report.fe_used
    }
}

/// Minimizes `objective` over `R^d` with the given strategy.
pub fn run_strategy<T, F, R>(
    objective: F,
    strategy: StrategyId,
    d: usize,
    opts: &StrategyOptions<T>,
    rng: &mut R,
) -> Result<StrategyReport<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
    R: Rng + ?Sized,
{
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    opts.bfgs.validate()?;
    let search_box = default_beta_box::<T>(d).scaled(opts.box_scale)?;
    let mut if_opts = IfOptions::new(if_beta_box::<T>(d).scaled(opts.box_scale)?);
    if_opts.scales = opts.if_scales.clone();
    if_opts.validate()?;

    let mut tracker = Tracker::new(objective, None);
    let mut f = |x: &[T]| tracker.eval(x).expect("no global budget");
    let (sampling_fe, diagonal_fe, local_fe) = match strategy {
        StrategyId::MsBfgs2d1 | StrategyId::MsBfgsHalfD | StrategyId::MsIf2d1 | StrategyId::MsIfHalfD => {
            let full = matches!(strategy, StrategyId::MsBfgs2d1 | StrategyId::MsIf2d1);
            let k = if full { 2 * d } else { d.div_ceil(2) };
            let starts = cluster_starts(&mut f, &search_box, k, full, &opts.cluster, rng);
            let mut local_fe = Vec::with_capacity(starts.starts.len());
            for s in &starts.starts {
                let r = if matches!(strategy, StrategyId::MsBfgs2d1 | StrategyId::MsBfgsHalfD) {
                    bfgs_minimize(&mut f, s, &opts.bfgs)
                } else {
                    let mut search = ImplicitFiltering::new(s, &if_opts)?;
                    search.run(&mut f, None);
                    search.report()
                };
                local_fe.push(r.fe_used);
            }
            (starts.sampling_fe, starts.diagonal_fe, local_fe)
        }
        StrategyId::If2 => {
            let starts = cluster_starts(&mut f, &search_box, d.div_ceil(2), false, &opts.cluster, rng);
            let cap = opts.if2_stage_fe_per_dim * d;
            let mut runs = Vec::with_capacity(starts.starts.len());
            for s in &starts.starts {
                let mut search = ImplicitFiltering::new(s, &if_opts)?;
                search.run(&mut f, Some(cap));
                runs.push(search);
            }
            let best = runs
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.best_value().partial_cmp(&b.1.best_value()).expect("sanitized"))
                .map(|(i, _)| i)
                .expect("at least one start");
            runs[best].run(&mut f, None);
            (starts.sampling_fe, 0, runs.iter().map(|r| r.fe_used()).collect())
        }
        StrategyId::DirectBfgs | StrategyId::DirectIf => {
            let global = direct_search(&mut f, &search_box, opts.direct_fe_per_dim * d);
            let r = if strategy == StrategyId::DirectBfgs {
                bfgs_minimize(&mut f, &global.beta_star, &opts.bfgs)
            } else {
                let mut search = ImplicitFiltering::new(&global.beta_star, &if_opts)?;
                search.run(&mut f, None);
                search.report()
            };
            (global.fe_used, 0, vec![r.fe_used])
        }
    };

    let report = tracker.into_report(&search_box.center());
    Ok(StrategyReport {
        strategy,
        report,
        sampling_fe,
        diagonal_fe,
        local_fe,
    })
}
