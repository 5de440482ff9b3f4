use serde::Serialize;

use crate::scalar::{sanitize, Scalar};

/// Best value seen after a given number of objective evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint<T> {
    pub fe: usize,
    pub best: T,
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptReport<T> {
    pub beta_star: Vec<T>,
    pub value: T,
    /// Number of objective evaluations.
    pub fe_used: usize,
    /// Nonincreasing record of the best value; the last entry equals `value`.
    pub trace: Vec<TracePoint<T>>,
}

impl<T: Scalar> OptReport<T> {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Wraps an objective with evaluation counting, an optional budget, and
/// best-so-far tracking.
pub(crate) struct Tracker<T, F> {
    f: F,
    fe: usize,
    budget: Option<usize>,
    best_x: Vec<T>,
    best_f: T,
    trace: Vec<TracePoint<T>>,
}

impl<T: Scalar, F: FnMut(&[T]) -> T> Tracker<T, F> {
    pub fn new(f: F, budget: Option<usize>) -> Self {
        Self {
            f,
            fe: 0,
            budget,
            best_x: Vec::new(),
            best_f: T::infinity(),
            trace: Vec::new(),
        }
    }

    pub fn fe(&self) -> usize {
        self.fe
    }

    pub fn remaining(&self) -> Option<usize> {
        self.budget.map(|b| b.saturating_sub(self.fe))
    }

    pub fn has_budget_for(&self, evals: usize) -> bool {
        self.remaining().map_or(true, |r| r >= evals)
    }

    /// Evaluates the objective; `None` once the budget is spent. NaN is
    /// reported as +inf.
    pub fn eval(&mut self, x: &[T]) -> Option<T> {
        if !self.has_budget_for(1) {
            return None;
        }
        let v = sanitize((self.f)(x));
        self.fe += 1;
        if self.best_x.is_empty() || v < self.best_f {
            self.best_x = x.to_vec();
            if v < self.best_f || self.trace.is_empty() {
                self.best_f = v;
                self.trace.push(TracePoint { fe: self.fe, best: v });
            }
        }
        Some(v)
    }

    pub fn into_report(mut self, fallback_x: &[T]) -> OptReport<T> {
        if self.best_x.is_empty() {
            self.best_x = fallback_x.to_vec();
        }
        if self.trace.last().map_or(true, |t| t.fe != self.fe) {
            self.trace.push(TracePoint {
                fe: self.fe,
                best: self.best_f,
            });
        }
        OptReport {
            beta_star: self.best_x,
            value: self.best_f,
            fe_used: self.fe,
            trace: self.trace,
        }
    }
}
