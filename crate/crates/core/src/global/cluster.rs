//! Start points for multistart: sample, keep the best, cluster.

use rand::Rng;

use super::kmeans::kmeans;
use super::lhd::lhd_maximin;
use super::SearchBox;
use crate::scalar::{sanitize, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOptions {
    /// Sample size is `samples_per_dim * d`.
    pub samples_per_dim: usize,
    /// Retained set size is `retained_per_dim * d`.
    pub retained_per_dim: usize,
    pub kmeans_restarts: usize,
    pub kmeans_max_iters: usize,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self {
            samples_per_dim: 200,
            retained_per_dim: 80,
            kmeans_restarts: 5,
            kmeans_max_iters: 100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClusterStarts<T> {
    /// Cluster centers, followed by the best diagonal point if requested.
    pub starts: Vec<Vec<T>>,
    pub sampling_fe: usize,
    pub diagonal_fe: usize,
    /// Best sampled point and its value.
    pub best_sample: (Vec<T>, T),
}

impl<T> ClusterStarts<T> {
    pub fn fe_used(&self) -> usize {
        self.sampling_fe + self.diagonal_fe
    }
}

/// Evaluates a maximin sample of `bounds`, clusters the best part of it into
/// `k` groups and returns the centers. With `include_diagonal`, the best of
/// three points at 1/4, 1/2 and 3/4 along the main diagonal is appended.
pub fn cluster_starts<T, F, R>(
    mut objective: F,
    bounds: &SearchBox<T>,
    k: usize,
    include_diagonal: bool,
    opts: &ClusterOptions,
    rng: &mut R,
) -> ClusterStarts<T>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
    R: Rng + ?Sized,
{
    let d = bounds.dim();
    let n_samples = (opts.samples_per_dim * d).max(1);
    let n_keep = (opts.retained_per_dim * d).clamp(1, n_samples);
    assert!(k >= 1 && k <= n_keep, "cluster count must be in 1..=retained");

    let sample = lhd_maximin(n_samples, bounds, rng);
    let mut scored: Vec<(Vec<T>, T)> = sample
        .row_iter()
        .map(|x| (x.to_vec(), sanitize(objective(x))))
        .collect();
    scored.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("sanitized values are ordered"));
    scored.truncate(n_keep);
    let best_sample = scored[0].clone();

    let retained: Vec<Vec<T>> = scored.into_iter().map(|(x, _)| x).collect();
    let mut starts = kmeans(&retained, k, opts.kmeans_restarts, opts.kmeans_max_iters, rng).centers;

    let mut diagonal_fe = 0;
    if include_diagonal {
        let best = [0.25, 0.5, 0.75]
            .iter()
            .map(|&t| {
                let x = bounds.diagonal_point(T::lit(t));
                diagonal_fe += 1;
                let v = sanitize(objective(&x));
                (x, v)
            })
            .fold(None::<(Vec<T>, T)>, |acc, cur| match acc {
                Some(a) if a.1 <= cur.1 => Some(a),
                _ => Some(cur),
            })
            .expect("three diagonal points");
        starts.push(best.0);
    }

    ClusterStarts {
        starts,
        sampling_fe: n_samples,
        diagonal_fe,
        best_sample,
    }
}
