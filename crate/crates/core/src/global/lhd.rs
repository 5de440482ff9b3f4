//! Random maximin Latin hypercube designs.

use rand::seq::SliceRandom;
use rand::Rng;

use super::SearchBox;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Random Latin hypercubes generated per maximin design.
pub const MAXIMIN_CANDIDATES: usize = 50;

/// Outcome of a maximin search, with the score of every candidate.
#[derive(Debug, Clone)]
pub struct MaximinDesign<T> {
    pub points: Matrix<T>,
    /// Minimum pairwise distance of `points` in unit coordinates.
    pub score: f64,
    pub candidate_scores: Vec<f64>,
}

/// Random Latin hypercube of `count` points in `[0, 1]^d`: every coordinate
/// falls in a distinct stratum `[s / count, (s + 1) / count)`.
pub fn latin_hypercube<R: Rng + ?Sized>(count: usize, d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; d]; count];
    let mut strata: Vec<usize> = (0..count).collect();
    let n = count as f64;
    for k in 0..d {
        strata.shuffle(rng);
        for (point, &s) in points.iter_mut().zip(&strata) {
            let u: f64 = rng.gen();
            point[k] = ((s as f64 + u) / n).min(1.0 - f64::EPSILON / 2.0);
        }
    }
    points
}

/// Smallest Euclidean distance between two distinct points.
pub fn min_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            best = best.min(d2);
        }
    }
    best.sqrt()
}

/// Best of `candidates` random Latin hypercubes by maximin distance, mapped
/// into `bounds`.
pub fn lhd_maximin_search<T: Scalar, R: Rng + ?Sized>(
    count: usize,
    bounds: &SearchBox<T>,
    candidates: usize,
    rng: &mut R,
) -> MaximinDesign<T> {
    assert!(count >= 1 && candidates >= 1);
    let d = bounds.dim();
    let mut best: Option<(Vec<Vec<f64>>, f64)> = None;
    let mut candidate_scores = Vec::with_capacity(candidates);
    for _ in 0..candidates {
        let design = latin_hypercube(count, d, rng);
        let score = min_pairwise_distance(&design);
        candidate_scores.push(score);
        if best.as_ref().map_or(true, |(_, s)| score > *s) {
            best = Some((design, score));
        }
    }
    let (unit, score) = best.expect("at least one candidate");
    let points = Matrix::from_fn(count, d, |i, k| {
        let z = T::lit(unit[i][k]);
        bounds.lower()[k] + z * bounds.width(k)
    });
    MaximinDesign {
        points,
        score,
        candidate_scores,
    }
}

/// Maximin Latin hypercube of `count` points in `bounds`.
pub fn lhd_maximin<T: Scalar, R: Rng + ?Sized>(count: usize, bounds: &SearchBox<T>, rng: &mut R) -> Matrix<T> {
    lhd_maximin_search(count, bounds, MAXIMIN_CANDIDATES, rng).points
}
