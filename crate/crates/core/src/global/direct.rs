//! DIRECT (DIviding RECTangles) global search on a box.
//!
//! Rectangles live in the unit cube; a side at level `l` has length `3^-l`.
//! The size measure is the half-diagonal.

use std::collections::BTreeMap;

use super::SearchBox;
use crate::local::{OptReport, Tracker};
use crate::scalar::Scalar;

/// Relative improvement required of a potentially optimal rectangle.
pub const DIRECT_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct Rectangle<T> {
    /// Center in unit coordinates.
    pub center: Vec<T>,
    /// Trisection count per dimension.
    pub level: Vec<u32>,
    pub value: T,
}

impl<T: Scalar> Rectangle<T> {
    pub fn half_widths(&self) -> Vec<T> {
        self.level.iter().map(|&l| T::lit(0.5 * 3f64.powi(-(l as i32)))).collect()
    }

    /// Half-diagonal length in unit coordinates.
    pub fn size(&self) -> f64 {
        0.5 * self.level.iter().map(|&l| 9f64.powi(-(l as i32))).sum::<f64>().sqrt()
    }

    fn size_key(&self) -> Vec<u32> {
        let mut k = self.level.clone();
        k.sort_unstable();
        k
    }
}

/// Stepwise DIRECT state, exposed so the partition can be inspected between
/// iterations.
pub struct Direct<T, F> {
    bounds: SearchBox<T>,
    tracker: Tracker<T, F>,
    rects: Vec<Rectangle<T>>,
    epsilon: f64,
    exhausted: bool,
}

impl<T: Scalar, F: FnMut(&[T]) -> T> Direct<T, F> {
    /// Evaluates the box center. `objective` receives points of `bounds`.
    pub fn new(objective: F, bounds: &SearchBox<T>, fe_budget: usize) -> Self {
        assert!(fe_budget >= 1, "DIRECT needs a positive budget");
        let d = bounds.dim();
        let mut search = Self {
            bounds: bounds.clone(),
            tracker: Tracker::new(objective, Some(fe_budget)),
            rects: Vec::new(),
            epsilon: DIRECT_EPSILON,
            exhausted: false,
        };
        let center = vec![T::lit(0.5); d];
        let value = search.eval(&center).expect("budget >= 1");
        search.rects.push(Rectangle {
            center,
            level: vec![0; d],
            value,
        });
        search
    }

    fn eval(&mut self, z: &[T]) -> Option<T> {
        let x = self.bounds.from_unit(z);
        self.tracker.eval(&x)
    }

    pub fn rectangles(&self) -> &[Rectangle<T>] {
        &self.rects
    }

    pub fn fe_used(&self) -> usize {
        self.tracker.fe()
    }

    pub fn is_exhausted(&self) -> bool {
        self.exhausted || !self.tracker.has_budget_for(1)
    }

    /// Indices of the potentially optimal rectangles of the current
    /// partition.
    pub fn potentially_optimal(&self) -> Vec<usize> {
        let max_finite = self
            .rects
            .iter()
            .map(|r| r.value.as_f64())
            .filter(|v| v.is_finite())
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
            .unwrap_or(0.0);
        let value = |r: &Rectangle<T>| {
            let v = r.value.as_f64();
            if v.is_finite() {
                v
            } else {
                max_finite
            }
        };

        // per size class: (size, min value, members at the min)
        let mut groups: BTreeMap<Vec<u32>, (f64, f64, Vec<usize>)> = BTreeMap::new();
        for (i, r) in self.rects.iter().enumerate() {
            let v = value(r);
            let g = groups.entry(r.size_key()).or_insert((r.size(), f64::INFINITY, Vec::new()));
            if v < g.1 {
                g.1 = v;
                g.2.clear();
            }
            if v == g.1 {
                g.2.push(i);
            }
        }
        let mut groups: Vec<(f64, f64, Vec<usize>)> = groups.into_values().collect();
        groups.sort_by(|a, b| a.0.total_cmp(&b.0));

        let f_min = groups.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
        let target = f_min - self.epsilon * f_min.abs();
        let mut selected = Vec::new();
        for (j, (dj, fj, members)) in groups.iter().enumerate() {
            let k_low = groups[..j]
                .iter()
                .map(|(di, fi, _)| (fj - fi) / (dj - di))
                .fold(0.0, f64::max);
            let k_high = groups[j + 1..]
                .iter()
                .map(|(di, fi, _)| (fi - fj) / (di - dj))
                .fold(f64::INFINITY, f64::min);
            if k_high <= 0.0 || k_low > k_high {
                continue;
            }
            if k_high.is_finite() && fj - k_high * dj > target {
                continue;
            }
            selected.extend_from_slice(members);
        }
        selected
    }

    /// One DIRECT iteration. Returns the rectangles selected for division, or
    /// `None` when the budget was already spent.
    pub fn step(&mut self) -> Option<Vec<usize>> {
        if self.is_exhausted() {
            return None;
        }
        let selected = self.potentially_optimal();
        for &i in &selected {
            if !self.divide(i) {
                self.exhausted = true;
                break;
            }
        }
        Some(selected)
    }

    /// Trisects rectangle `i` along all of its longest sides. Returns false if
    /// the budget ran out part way.
    fn divide(&mut self, i: usize) -> bool {
        let parent = self.rects[i].clone();
        let min_level = *parent.level.iter().min().expect("d >= 1");
        let delta = T::lit(3f64.powi(-(min_level as i32 + 1)));
        let mut probes = Vec::new();
        for k in (0..parent.level.len()).filter(|&k| parent.level[k] == min_level) {
            let mut lo = parent.center.clone();
            let mut hi = parent.center.clone();
            lo[k] -= delta;
            hi[k] += delta;
            let Some(f_lo) = self.eval(&lo) else { return false };
            let Some(f_hi) = self.eval(&hi) else {
                self.rects.push(Rectangle {
                    center: lo,
                    level: parent.level.clone(),
                    value: f_lo,
                });
                return false;
            };
            probes.push((k, f_lo.min(f_hi), (lo, f_lo), (hi, f_hi)));
        }
        // stable sort keeps the lowest index first among ties
        probes.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("sanitized values are ordered"));
        let mut level = parent.level.clone();
        for (k, _, (lo, f_lo), (hi, f_hi)) in probes {
            level[k] += 1;
            for (center, value) in [(lo, f_lo), (hi, f_hi)] {
                self.rects.push(Rectangle {
                    center,
                    level: level.clone(),
                    value,
                });
            }
        }
        self.rects[i].level = level;
        true
    }

    pub fn into_report(self) -> OptReport<T> {
        let center = self.bounds.center();
        self.tracker.into_report(&center)
    }
}

/// Runs DIRECT on `bounds` until exactly `fe_budget` evaluations are used.
pub fn direct_search<T, F>(objective: F, bounds: &SearchBox<T>, fe_budget: usize) -> OptReport<T>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    let mut search = Direct::new(objective, bounds, fe_budget);
    while search.step().is_some() {}
    search.into_report()
}
