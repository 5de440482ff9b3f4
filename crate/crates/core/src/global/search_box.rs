use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Axis-aligned box in beta-space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchBox<T> {
    lower: Vec<T>,
    upper: Vec<T>,
    scale: T,
}

impl<T: Scalar> SearchBox<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidArgument("search box needs at least one dimension".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidArgument("search box requires finite lower < upper".into()));
        }
        Ok(Self {
            lower,
            upper,
            scale: T::one(),
        })
    }

    /// Box with the same bounds in every dimension.
    pub fn uniform(d: usize, lower: T, upper: T) -> Result<Self> {
        Self::new(vec![lower; d], vec![upper; d])
    }

    /// Unit hypercube `[0, 1]^d`.
    pub fn unit(d: usize) -> Self {
        Self::uniform(d, T::zero(), T::one()).expect("unit box is valid")
    }

    /// Expands (`factor > 1`) or contracts (`factor < 1`) every side about the
    /// box center.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        if !(factor > T::zero()) || !factor.is_finite() {
            return Err(Error::InvalidArgument(format!("box scale must be positive, got {factor}")));
        }
        let half = T::lit(0.5);
        let (lower, upper) = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| {
                let c = half * (l + u);
                let w = half * (u - l) * factor;
                (c - w, c + w)
            })
            .unzip();
        let mut b = Self::new(lower, upper)?;
        b.scale = self.scale * factor;
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    /// Cumulative expansion factor relative to the box this was derived from.
    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn width(&self, k: usize) -> T {
        self.upper[k] - self.lower[k]
    }

    pub fn center(&self) -> Vec<T> {
        let half = T::lit(0.5);
        self.lower.iter().zip(&self.upper).map(|(&l, &u)| half * (l + u)).collect()
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&l, &u))| v >= l && v <= u)
    }

    pub fn clamp(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&l, &u))| v.max(l).min(u))
            .collect()
    }

    /// Maps a point of `[0, 1]^d` into the box.
    pub fn from_unit(&self, z: &[T]) -> Vec<T> {
        z.iter()
            .enumerate()
            .map(|(k, &zk)| self.lower[k] + zk * self.width(k))
            .collect()
    }

    /// Maps a point of the box into `[0, 1]^d`.
    pub fn to_unit(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .enumerate()
            .map(|(k, &xk)| (xk - self.lower[k]) / self.width(k))
            .collect()
    }

    /// Point `lower + t (upper - lower)` on the main diagonal.
    pub fn diagonal_point(&self, t: T) -> Vec<T> {
        self.from_unit(&vec![t; self.dim()])
    }
}

/// Default start-point box:
/// `-2 - log10(d) <= beta_k <= log10(500) - log10(d)`.
pub fn default_beta_box<T: Scalar>(d: usize) -> SearchBox<T> {
    assert!(d >= 1, "dimension must be positive");
    let log_d = T::from_count(d).log10();
    let lower = T::lit(-2.0) - log_d;
    let upper = T::lit(500.0).log10() - log_d;
    SearchBox::uniform(d, lower, upper).expect("default box is nonempty")
}

/// Bound constraints for Implicit Filtering:
/// `d (-2 - log10(d)) <= beta_k <= log10(500)`.
pub fn if_beta_box<T: Scalar>(d: usize) -> SearchBox<T> {
    assert!(d >= 1, "dimension must be positive");
    let log_d = T::from_count(d).log10();
    let lower = T::from_count(d) * (T::lit(-2.0) - log_d);
    let upper = T::lit(500.0).log10();
    SearchBox::uniform(d, lower, upper).expect("IF box is nonempty")
}
