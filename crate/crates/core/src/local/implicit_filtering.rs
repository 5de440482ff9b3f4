//! Implicit Filtering: a coordinate stencil search on a shrinking scale
//! sequence, interleaved with quasi-Newton steps on a least-squares affine
//! model of the points sampled at the current scale.
//!
//! The search runs in coordinates normalized to the unit box, so a stencil
//! of scale `h` probes `beta +- h (U_j - L_j) e_j`.

use log::warn;

use super::report::{OptReport, TracePoint};
use crate::error::{Error, Result};
use crate::global::SearchBox;
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::{dot, sanitize, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct IfOptions<T> {
    pub bounds: SearchBox<T>,
    /// Strictly decreasing stencil scales in (0, 1).
    pub scales: Vec<T>,
    pub max_fe: Option<usize>,
    /// Safety cap on successful iterations at a single scale.
    pub max_iters_per_scale: usize,
    /// Step halvings tried after the full quasi-Newton step.
    pub max_backtracks: usize,
}

impl<T: Scalar> IfOptions<T> {
    /// Scales `2^-1, ..., 2^-7`.
    pub fn new(bounds: SearchBox<T>) -> Self {
        Self {
            bounds,
            scales: default_scales(),
            max_fe: None,
            max_iters_per_scale: 100,
            max_backtracks: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = self.scales.iter().all(|&h| h > T::zero() && h < T::one());
        let decreasing = self.scales.windows(2).all(|w| w[1] < w[0]);
        if self.scales.is_empty() || !in_range || !decreasing {
            return Err(Error::InvalidArgument(
                "IF scales must be strictly decreasing values in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

pub fn default_scales<T: Scalar>() -> Vec<T> {
    (1..=7).map(|m| T::lit(0.5).powi(m)).collect()
}

/// Resumable Implicit Filtering state. [`ImplicitFiltering::run`] may be
/// called repeatedly with a growing evaluation cap; the search picks up at
/// the start of the interrupted iteration.
#[derive(Debug, Clone)]
pub struct ImplicitFiltering<T> {
    bounds: SearchBox<T>,
    scales: Vec<T>,
    max_iters_per_scale: usize,
    max_backtracks: usize,
    start: Vec<T>,
    z: Vec<T>,
    fz: T,
    started: bool,
    scale_idx: usize,
    iters_at_scale: usize,
    inv_hessian: Matrix<T>,
    previous: Option<(Vec<T>, Vec<T>)>,
    history: Vec<(Vec<T>, T)>,
    fe_used: usize,
    best: (Vec<T>, T),
    trace: Vec<TracePoint<T>>,
}

struct BudgetSpent;

impl<T: Scalar> ImplicitFiltering<T> {
    /// Prepares a search from `beta0`, clamping it into the bounds.
    pub fn new(beta0: &[T], opts: &IfOptions<T>) -> Result<Self> {
        opts.validate()?;
        let b = &opts.bounds;
        if beta0.len() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: b.dim(),
                found: beta0.len(),
            });
        }
        let start = if b.contains(beta0) {
            beta0.to_vec()
        } else {
            warn!("implicit filtering: start point outside bounds, clamping");
            b.clamp(beta0)
        };
        let d = b.dim();
        Ok(Self {
            bounds: b.clone(),
            scales: opts.scales.clone(),
            max_iters_per_scale: opts.max_iters_per_scale,
            max_backtracks: opts.max_backtracks,
            z: b.to_unit(&start),
            start,
            fz: T::infinity(),
            started: false,
            scale_idx: 0,
            iters_at_scale: 0,
            inv_hessian: Matrix::identity(d),
            previous: None,
            history: Vec::new(),
            fe_used: 0,
            best: (Vec::new(), T::infinity()),
            trace: Vec::new(),
        })
    }

    pub fn is_finished(&self) -> bool {
        self.started && (self.scale_idx >= self.scales.len() || !self.fz.is_finite())
    }

    pub fn fe_used(&self) -> usize {
        self.fe_used
    }

    pub fn best_value(&self) -> T {
        self.best.1
    }

    /// Runs until the scale sequence is exhausted or `fe_cap` total
    /// evaluations have been used. Returns whether the search finished.
    pub fn run<F: FnMut(&[T]) -> T>(&mut self, f: &mut F, fe_cap: Option<usize>) -> bool {
        let _ = self.advance(f, fe_cap);
        self.is_finished()
    }

    pub fn report(&self) -> OptReport<T> {
        let mut trace = self.trace.clone();
        if trace.last().map_or(true, |t| t.fe != self.fe_used) {
            trace.push(TracePoint {
                fe: self.fe_used,
                best: self.best.1,
            });
        }
        OptReport {
            beta_star: if self.best.0.is_empty() {
                self.start.clone()
            } else {
                self.bounds.from_unit(&self.best.0)
            },
            value: self.best.1,
            fe_used: self.fe_used,
            trace,
        }
    }

    fn eval<F: FnMut(&[T]) -> T>(
        &mut self,
        f: &mut F,
        z: &[T],
        cap: Option<usize>,
    ) -> std::result::Result<T, BudgetSpent> {
        if cap.is_some_and(|c| self.fe_used >= c) {
            return Err(BudgetSpent);
        }
        let v = sanitize(f(&self.bounds.from_unit(z)));
        self.fe_used += 1;
        if self.best.0.is_empty() || v < self.best.1 {
            let first = self.best.0.is_empty();
            self.best = (z.to_vec(), v);
            if first || self.trace.last().map_or(true, |t| v < t.best) {
                self.trace.push(TracePoint { fe: self.fe_used, best: v });
            }
        }
        Ok(v)
    }

    fn next_scale(&mut self) {
        self.scale_idx += 1;
        self.iters_at_scale = 0;
        self.inv_hessian = Matrix::identity(self.z.len());
        self.previous = None;
        self.history.clear();
        self.history.push((self.z.clone(), self.fz));
    }

    fn advance<F: FnMut(&[T]) -> T>(&mut self, f: &mut F, cap: Option<usize>) -> std::result::Result<(), BudgetSpent> {
        if !self.started {
            let z = self.z.clone();
            self.fz = self.eval(f, &z, cap)?;
            self.started = true;
            self.history.push((z, self.fz));
            if !self.fz.is_finite() {
                return Ok(());
            }
        }
        let d = self.z.len();
        while self.scale_idx < self.scales.len() {
            if self.iters_at_scale >= self.max_iters_per_scale {
                self.next_scale();
                continue;
            }
            let h = self.scales[self.scale_idx];

            // Stencil phase. Probes are clamped to the box and always counted.
            let mut stencil_best: Option<(Vec<T>, T)> = None;
            for j in 0..d {
                for sign in [T::one(), -T::one()] {
                    let mut probe = self.z.clone();
                    probe[j] = (probe[j] + sign * h).max(T::zero()).min(T::one());
                    let v = self.eval(f, &probe, cap)?;
                    self.history.push((probe.clone(), v));
                    if stencil_best.as_ref().map_or(true, |(_, b)| v < *b) {
                        stencil_best = Some((probe, v));
                    }
                }
            }
            self.iters_at_scale += 1;
            let (sz, sf) = stencil_best.expect("d >= 1");
            if !(sf < self.fz) {
                self.next_scale();
                continue;
            }

            // Quasi-Newton phase on the affine model of current-scale samples.
            let g = affine_gradient(&self.history, &self.z)
                .unwrap_or_else(|| stencil_gradient(&self.history, d));
            if let Some((pz, pg)) = &self.previous {
                let s: Vec<T> = self.z.iter().zip(pz).map(|(&a, &b)| a - b).collect();
                let y: Vec<T> = g.iter().zip(pg).map(|(&a, &b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > T::lit(1e-12) * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                    update_inverse_hessian(&mut self.inv_hessian, &s, &y, sy);
                }
            }
            let direction: Vec<T> = self.inv_hessian.mul_vec(&g).into_iter().map(|v| -v).collect();
            let mut candidate = (sz, sf);
            let mut lambda = T::one();
            for _ in 0..=self.max_backtracks {
                let trial: Vec<T> = self
                    .z
                    .iter()
                    .zip(&direction)
                    .map(|(&zi, &di)| (zi + lambda * di).max(T::zero()).min(T::one()))
                    .collect();
                if trial == self.z {
                    break;
                }
                let v = self.eval(f, &trial, cap)?;
                self.history.push((trial.clone(), v));
                if v < self.fz {
                    if v < candidate.1 {
                        candidate = (trial, v);
                    }
                    break;
                }
                lambda = lambda * T::lit(0.5);
            }
            self.previous = Some((self.z.clone(), g));
            self.z = candidate.0;
            self.fz = candidate.1;
        }
        Ok(())
    }
}

/// Gradient of the least-squares affine fit `f ~ c + g'(z - center)` over the
/// finite samples.
fn affine_gradient<T: Scalar>(samples: &[(Vec<T>, T)], center: &[T]) -> Option<Vec<T>> {
    let d = center.len();
    let m = d + 1;
    let mut normal = Matrix::zeros(m, m);
    let mut rhs = vec![T::zero(); m];
    let mut count = 0;
    let mut phi = vec![T::zero(); m];
    for (z, v) in samples.iter().filter(|(_, v)| v.is_finite()) {
        phi[0] = T::one();
        for k in 0..d {
            phi[k + 1] = z[k] - center[k];
        }
        for i in 0..m {
            rhs[i] += phi[i] * *v;
            for j in 0..m {
                normal[(i, j)] += phi[i] * phi[j];
            }
        }
        count += 1;
    }
    if count < m {
        return None;
    }
    let coef = Cholesky::new(&normal).ok()?.solve(&rhs);
    let g = coef[1..].to_vec();
    g.iter().all(|v| v.is_finite()).then_some(g)
}

/// Central differences from the most recent stencil.
fn stencil_gradient<T: Scalar>(samples: &[(Vec<T>, T)], d: usize) -> Vec<T> {
    let stencil = &samples[samples.len() - 2 * d..];
    (0..d)
        .map(|j| {
            let (zp, fp) = &stencil[2 * j];
            let (zm, fm) = &stencil[2 * j + 1];
            let width = zp[j] - zm[j];
            if fp.is_finite() && fm.is_finite() && width > T::zero() {
                (*fp - *fm) / width
            } else {
                T::zero()
            }
        })
        .collect()
}

fn update_inverse_hessian<T: Scalar>(h: &mut Matrix<T>, s: &[T], y: &[T], sy: T) {
    let d = s.len();
    let rho = sy.recip();
    let hy = h.mul_vec(y);
    let factor = (T::one() + rho * dot(y, &hy)) * rho;
    for i in 0..d {
        for j in 0..d {
            h[(i, j)] += factor * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

/// Implicit Filtering from `beta0` inside `opts.bounds`.
pub fn implicit_filtering<T, F>(mut objective: F, beta0: &[T], opts: &IfOptions<T>) -> Result<OptReport<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    let mut search = ImplicitFiltering::new(beta0, opts)?;
    search.run(&mut objective, opts.max_fe);
    Ok(search.report())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bowl(center: [f64; 2]) -> impl FnMut(&[f64]) -> f64 {
        move |x: &[f64]| (x[0] - center[0]).powi(2) + 3.0 * (x[1] - center[1]).powi(2)
    }

    #[test]
    fn converges_to_center_of_bowl() {
        let bounds = SearchBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let opts = IfOptions::new(bounds.clone());
        let r = implicit_filtering(bowl([0.0, 0.0]), &[1.3, -1.1], &opts).unwrap();
        let tol = 0.5f64.powi(7) * 4.0;
        assert!(r.beta_star.iter().all(|v| v.abs() <= tol), "{:?}", r.beta_star);
        assert!(bounds.contains(&r.beta_star));
    }

    #[test]
    fn every_probe_lies_in_box_and_is_counted() {
        let bounds = SearchBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let mut seen = Vec::new();
        let opts = IfOptions::new(bounds.clone());
        // minimum outside the box forces boundary clamping
        let r = implicit_filtering(
            |x: &[f64]| {
                seen.push(x.to_vec());
                (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2)
            },
            &[1.0, 0.0],
            &opts,
        )
        .unwrap();
        assert_eq!(r.fe_used, seen.len());
        assert!(seen.iter().all(|x| bounds.contains(x)));
        assert!((r.beta_star[0] - 1.0).abs() < 1e-12 && r.beta_star[1].abs() < 1e-12);
    }

    #[test]
    fn start_outside_box_is_clamped() {
        let bounds = SearchBox::new(vec![-1.0], vec![1.0]).unwrap();
        let s = ImplicitFiltering::new(&[5.0], &IfOptions::new(bounds)).unwrap();
        assert_eq!(s.report().beta_star, vec![1.0]);
    }

    #[test]
    fn budget_cap_and_resume() {
        let bounds = SearchBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let opts = IfOptions::new(bounds);
        let mut f = bowl([0.4, -0.3]);
        let mut search = ImplicitFiltering::new(&[1.5, 1.5], &opts).unwrap();
        assert!(!search.run(&mut f, Some(7)));
        assert_eq!(search.fe_used(), 7);
        assert!(search.run(&mut f, None));
        let resumed = search.report();

        let full = implicit_filtering(bowl([0.4, -0.3]), &[1.5, 1.5], &opts).unwrap();
        assert!((resumed.value - full.value).abs() < 1e-3);
        assert!(resumed.trace.windows(2).all(|w| w[1].best <= w[0].best));
    }

    #[test]
    fn scale_validation() {
        let bounds = SearchBox::new(vec![-1.0], vec![1.0]).unwrap();
        let mut opts = IfOptions::new(bounds);
        opts.scales = vec![0.25, 0.5];
        assert!(ImplicitFiltering::new(&[0.0], &opts).is_err());
        opts.scales = vec![1.0, 0.5];
        assert!(opts.validate().is_err());
    }

    #[test]
    fn infinite_start_stops_immediately() {
        let bounds = SearchBox::new(vec![-1.0], vec![1.0]).unwrap();
        let r = implicit_filtering(|_: &[f64]| f64::INFINITY, &[0.0], &IfOptions::new(bounds)).unwrap();
        assert_eq!(r.fe_used, 1);
        assert!(r.value.is_infinite());
    }
}
