//! Lloyd's k-means with random restarts.

use rand::seq::index::sample;
use rand::Rng;

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct KMeansResult<T> {
    pub centers: Vec<Vec<T>>,
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squares of the returned clustering.
    pub sse: T,
    /// Within-cluster sum of squares of every restart.
    pub restart_sse: Vec<T>,
}

fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

fn nearest<T: Scalar>(p: &[T], centers: &[Vec<T>]) -> (usize, T) {
    centers
        .iter()
        .enumerate()
        .map(|(c, center)| (c, sq_dist(p, center)))
        .fold((0, T::infinity()), |best, cur| if cur.1 < best.1 { cur } else { best })
}

fn lloyd<T: Scalar, R: Rng + ?Sized>(
    points: &[Vec<T>],
    k: usize,
    max_iters: usize,
    rng: &mut R,
) -> (Vec<Vec<T>>, Vec<usize>, T) {
    let n = points.len();
    let d = points[0].len();
    let mut centers: Vec<Vec<T>> = sample(rng, n, k).into_iter().map(|i| points[i].clone()).collect();
    let mut assignments = vec![usize::MAX; n];

    for _ in 0..max_iters {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (c, _) = nearest(p, &centers);
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![T::zero(); d]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignments) {
            counts[c] += 1;
            for (s, &v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // empty cluster: re-seed from a random point
                centers[c] = points[rng.gen_range(0..n)].clone();
            } else {
                let m = T::from_count(counts[c]);
                centers[c] = sums[c].iter().map(|&s| s / m).collect();
            }
        }
    }
    for (i, p) in points.iter().enumerate() {
        assignments[i] = nearest(p, &centers).0;
    }
    let sse = points
        .iter()
        .zip(&assignments)
        .map(|(p, &c)| sq_dist(p, &centers[c]))
        .sum();
    (centers, assignments, sse)
}

/// Best of `restarts` Lloyd runs by within-cluster sum of squares. Centers
/// start at `k` distinct points drawn uniformly; each run stops when the
/// assignment is stable or after `max_iters` iterations.
pub fn kmeans<T: Scalar, R: Rng + ?Sized>(
    points: &[Vec<T>],
    k: usize,
    restarts: usize,
    max_iters: usize,
    rng: &mut R,
) -> KMeansResult<T> {
    assert!(!points.is_empty(), "k-means needs at least one point");
    assert!(k >= 1 && k <= points.len(), "k must be in 1..=n");
    assert!(restarts >= 1);
    let mut best: Option<(Vec<Vec<T>>, Vec<usize>, T)> = None;
    let mut restart_sse = Vec::with_capacity(restarts);
    for _ in 0..restarts {
        let run = lloyd(points, k, max_iters, rng);
        restart_sse.push(run.2);
        if best.as_ref().map_or(true, |b| run.2 < b.2) {
            best = Some(run);
        }
    }
    let (centers, assignments, sse) = best.expect("restarts >= 1");
    KMeansResult {
        centers,
        assignments,
        sse,
        restart_sse,
    }
}
