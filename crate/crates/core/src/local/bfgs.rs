//! Quasi-Newton minimization with a BFGS inverse-Hessian update, a
//! strong-Wolfe line search and central finite-difference gradients.

use log::debug;

use super::report::{OptReport, Tracker};
use crate::linalg::Matrix;
use crate::scalar::{dot, norm_inf, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsOptions<T> {
    /// Relative finite-difference step: `h_k = grad_step * max(1, |x_k|)`.
    pub grad_step: T,
    /// Stop when `|grad|_inf < grad_tol`.
    pub grad_tol: T,
    pub max_iters: usize,
    pub max_fe: Option<usize>,
    /// Stop when `|s|_inf < step_tol * (1 + |x|_inf)`.
    pub step_tol: T,
    /// Stop when the accepted decrease is below `value_tol * (1 + |f|)`.
    pub value_tol: T,
    pub wolfe_c1: T,
    pub wolfe_c2: T,
    /// Maximum trial steps per line search.
    pub max_line_search: usize,
}

impl<T: Scalar> Default for BfgsOptions<T> {
    fn default() -> Self {
        Self {
            grad_step: T::lit(1e-6),
            grad_tol: T::lit(1e-6),
            max_iters: 400,
            max_fe: None,
            step_tol: T::lit(1e-6),
            value_tol: T::lit(1e-9),
            wolfe_c1: T::lit(1e-4),
            wolfe_c2: T::lit(0.9),
            max_line_search: 20,
        }
    }
}

impl<T: Scalar> BfgsOptions<T> {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.grad_step > T::zero()
            && self.grad_step <= T::lit(1e-2)
            && self.grad_tol > T::zero()
            && self.max_iters >= 1
            && self.wolfe_c1 > T::zero()
            && self.wolfe_c1 < self.wolfe_c2
            && self.wolfe_c2 < T::one()
            && self.max_line_search >= 1;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::InvalidArgument(format!("invalid BFGS options: {self:?}")))
        }
    }
}

/// Central-difference gradient; calls `f` exactly `2 * x.len()` times.
pub fn central_gradient<T: Scalar, F: FnMut(&[T]) -> T>(mut f: F, x: &[T], rel_step: T) -> Vec<T> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            let h = step_size(x[k], rel_step);
            probe[k] = x[k] + h;
            let fp = f(&probe);
            probe[k] = x[k] - h;
            let fm = f(&probe);
            probe[k] = x[k];
            (fp - fm) / (h + h)
        })
        .collect()
}

#[inline]
fn step_size<T: Scalar>(xk: T, rel_step: T) -> T {
    rel_step * xk.abs().max(T::one())
}

/// Gradient through the tracker. Falls back to a one-sided difference when
/// one probe is non-finite, and to zero when both are.
fn tracked_gradient<T: Scalar, F: FnMut(&[T]) -> T>(
    tr: &mut Tracker<T, F>,
    x: &[T],
    fx: T,
    rel_step: T,
) -> Option<Vec<T>> {
    if !tr.has_budget_for(2 * x.len()) {
        return None;
    }
    let mut probe = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let h = step_size(x[k], rel_step);
        probe[k] = x[k] + h;
        let fp = tr.eval(&probe)?;
        probe[k] = x[k] - h;
        let fm = tr.eval(&probe)?;
        probe[k] = x[k];
        g.push(match (fp.is_finite(), fm.is_finite()) {
            (true, true) => (fp - fm) / (h + h),
            (true, false) => (fp - fx) / h,
            (false, true) => (fx - fm) / h,
            (false, false) => T::zero(),
        });
    }
    Some(g)
}

struct LinePoint<T> {
    alpha: T,
    value: T,
    slope: Option<T>,
    grad: Option<Vec<T>>,
}

enum LineSearch<T> {
    Accepted { alpha: T, value: T, grad: Vec<T> },
    Failed,
    Exhausted,
}

fn at<T: Scalar>(x: &[T], p: &[T], alpha: T) -> Vec<T> {
    x.iter().zip(p).map(|(&xi, &pi)| xi + alpha * pi).collect()
}

/// Minimizer of the interpolating cubic (both slopes known) or quadratic
/// (only the `lo` slope known), safeguarded to the interior of the bracket.
fn interpolate<T: Scalar>(lo: &LinePoint<T>, hi: &LinePoint<T>) -> T {
    let (a, b) = (lo.alpha, hi.alpha);
    let width = b - a;
    let tenth = T::lit(0.1);
    let (left, right) = if width > T::zero() {
        (a + tenth * width, b - tenth * width)
    } else {
        (b - tenth * width, a + tenth * width)
    };
    let mid = (a + b) / T::lit(2.0);
    let lo_slope = lo.slope.unwrap_or(T::zero());
    let candidate = if !hi.value.is_finite() {
        mid
    } else if let Some(hi_slope) = hi.slope {
        let d1 = lo_slope + hi_slope - T::lit(3.0) * (lo.value - hi.value) / (a - b);
        let disc = d1 * d1 - lo_slope * hi_slope;
        if disc < T::zero() {
            mid
        } else {
            let d2 = disc.sqrt() * (b - a).signum();
            b - (b - a) * (hi_slope + d2 - d1) / (hi_slope - lo_slope + T::lit(2.0) * d2)
        }
    } else {
        let denom = T::lit(2.0) * (hi.value - lo.value - lo_slope * width);
        if denom > T::zero() {
            a - lo_slope * width * width / denom
        } else {
            mid
        }
    };
    if candidate.is_finite() {
        candidate.max(left).min(right)
    } else {
        mid
    }
}

#[allow(clippy::too_many_arguments)]
fn strong_wolfe<T: Scalar, F: FnMut(&[T]) -> T>(
    tr: &mut Tracker<T, F>,
    x: &[T],
    fx: T,
    p: &[T],
    slope0: T,
    alpha0: T,
    opts: &BfgsOptions<T>,
) -> LineSearch<T> {
    let (c1, c2) = (opts.wolfe_c1, opts.wolfe_c2);
    let armijo = |alpha: T, value: T| value.is_finite() && value <= fx + c1 * alpha * slope0;
    let curvature = |slope: T| slope.abs() <= -c2 * slope0;

    let mut prev = LinePoint {
        alpha: T::zero(),
        value: fx,
        slope: Some(slope0),
        grad: None,
    };
    let mut alpha = alpha0;
    let mut budget = opts.max_line_search;

    let (mut lo, mut hi) = loop {
        if budget == 0 {
            return LineSearch::Failed;
        }
        budget -= 1;
        let xa = at(x, p, alpha);
        let Some(value) = tr.eval(&xa) else {
            return LineSearch::Exhausted;
        };
        if !armijo(alpha, value) || (prev.alpha > T::zero() && value >= prev.value) {
            let cur = LinePoint { alpha, value, slope: None, grad: None };
            break (prev, cur);
        }
        let Some(grad) = tracked_gradient(tr, &xa, value, opts.grad_step) else {
            return LineSearch::Exhausted;
        };
        let slope = dot(&grad, p);
        if curvature(slope) {
            return LineSearch::Accepted { alpha, value, grad };
        }
        let cur = LinePoint {
            alpha,
            value,
            slope: Some(slope),
            grad: Some(grad),
        };
        if slope >= T::zero() {
            break (cur, prev);
        }
        prev = cur;
        alpha = alpha * T::lit(2.0);
    };

    // zoom
    while budget > 0 {
        budget -= 1;
        if (hi.alpha - lo.alpha).abs() <= T::epsilon() * lo.alpha.abs().max(T::one()) {
            break;
        }
        let alpha = interpolate(&lo, &hi);
        let xa = at(x, p, alpha);
        let Some(value) = tr.eval(&xa) else {
            return LineSearch::Exhausted;
        };
        if !armijo(alpha, value) || value >= lo.value {
            hi = LinePoint { alpha, value, slope: None, grad: None };
            continue;
        }
        let Some(grad) = tracked_gradient(tr, &xa, value, opts.grad_step) else {
            return LineSearch::Exhausted;
        };
        let slope = dot(&grad, p);
        if curvature(slope) {
            return LineSearch::Accepted { alpha, value, grad };
        }
        let cur = LinePoint {
            alpha,
            value,
            slope: Some(slope),
            grad: Some(grad),
        };
        if slope * (hi.alpha - lo.alpha) >= T::zero() {
            hi = std::mem::replace(&mut lo, cur);
        } else {
            lo = cur;
        }
    }
    // Fall back to the best sufficient-decrease point found, if any.
    match lo.grad {
        Some(grad) if lo.alpha > T::zero() => LineSearch::Accepted {
            alpha: lo.alpha,
            value: lo.value,
            grad,
        },
        _ => LineSearch::Failed,
    }
}

/// Unconstrained BFGS from `beta0`.
///
/// Every call of `objective` counts as one function evaluation, including the
/// `2d` calls of each finite-difference gradient.
pub fn bfgs_minimize<T, F>(objective: F, beta0: &[T], opts: &BfgsOptions<T>) -> OptReport<T>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    let d = beta0.len();
    let mut tr = Tracker::new(objective, opts.max_fe);
    let mut x = beta0.to_vec();
    let Some(mut fx) = tr.eval(&x) else {
        return tr.into_report(beta0);
    };
    if !fx.is_finite() {
        return tr.into_report(beta0);
    }
    let Some(mut g) = tracked_gradient(&mut tr, &x, fx, opts.grad_step) else {
        return tr.into_report(beta0);
    };
    let mut h = Matrix::<T>::identity(d);
    let mut scaled = false;

    for iter in 0..opts.max_iters {
        if norm_inf(&g) < opts.grad_tol {
            debug!("bfgs: gradient tolerance reached after {iter} iterations");
            break;
        }
        let mut reset = false;
        let outcome = loop {
            let mut p: Vec<T> = h.mul_vec(&g).into_iter().map(|v| -v).collect();
            let mut slope = dot(&g, &p);
            if !(slope < T::zero()) {
                h = Matrix::identity(d);
                scaled = false;
                p = g.iter().map(|&v| -v).collect();
                slope = dot(&g, &p);
                reset = true;
            }
            // The first trial of an unscaled step moves at most one unit.
            let alpha0 = if scaled {
                T::one()
            } else {
                T::one().min(norm_inf(&p).recip())
            };
            match strong_wolfe(&mut tr, &x, fx, &p, slope, alpha0, opts) {
                LineSearch::Failed if !reset => {
                    h = Matrix::identity(d);
                    scaled = false;
                    reset = true;
                }
                LineSearch::Accepted { alpha, value, grad } => break Some((p, alpha, value, grad)),
                _ => break None,
            }
        };
        let Some((p, alpha, value, grad)) = outcome else {
            debug!("bfgs: line search failed at iteration {iter}");
            break;
        };

        let s: Vec<T> = p.iter().map(|&pi| alpha * pi).collect();
        let y: Vec<T> = grad.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        if sy > T::lit(1e-10) * dot(&s, &s).sqrt() * yy.sqrt() {
            if !scaled {
                h = Matrix::identity(d);
                let gamma = sy / yy;
                for i in 0..d {
                    h[(i, i)] = gamma;
                }
                scaled = true;
            }
            bfgs_update(&mut h, &s, &y, sy);
        }

        let decrease = fx - value;
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += *si;
        }
        fx = value;
        g = grad;

        if norm_inf(&s) < opts.step_tol * (T::one() + norm_inf(&x)) {
            debug!("bfgs: step tolerance reached after {iter} iterations");
            break;
        }
        if decrease.abs() <= opts.value_tol * (T::one() + fx.abs()) {
            debug!("bfgs: value tolerance reached after {iter} iterations");
            break;
        }
    }
    tr.into_report(beta0)
}

/// `H <- (I - rho s y') H (I - rho y s') + rho s s'` with `rho = 1 / s'y`.
fn bfgs_update<T: Scalar>(h: &mut Matrix<T>, s: &[T], y: &[T], sy: T) {
    let d = s.len();
    let rho = sy.recip();
    let hy = h.mul_vec(y);
    let yhy = dot(y, &hy);
    let factor = (T::one() + rho * yhy) * rho;
    for i in 0..d {
        for j in 0..d {
            h[(i, j)] += factor * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
    }

    #[test]
    fn convex_quadratic_to_origin() {
        let r = bfgs_minimize(|x: &[f64]| x.iter().map(|v| v * v).sum(), &[3.0, -4.0], &BfgsOptions::default());
        assert!(r.beta_star.iter().all(|v| v.abs() < 1e-6), "{:?}", r.beta_star);
    }

    #[test]
    fn rosenbrock_from_classic_start() {
        let opts = BfgsOptions {
            max_iters: 200,
            ..BfgsOptions::default()
        };
        let r = bfgs_minimize(rosenbrock, &[-1.2, 1.0], &opts);
        assert!(r.value < 1e-6, "value {} at {:?}", r.value, r.beta_star);
    }

    #[test]
    fn infinite_start_returns_start() {
        let r = bfgs_minimize(|_: &[f64]| f64::INFINITY, &[0.5, 0.5], &BfgsOptions::default());
        assert_eq!(r.beta_star, vec![0.5, 0.5]);
        assert_eq!(r.value, f64::INFINITY);
        assert_eq!(r.fe_used, 1);
    }

    #[test]
    fn respects_fe_budget_and_counts_exactly() {
        let mut calls = 0usize;
        let opts = BfgsOptions {
            max_fe: Some(37),
            ..BfgsOptions::default()
        };
        let r = bfgs_minimize(
            |x: &[f64]| {
                calls += 1;
                rosenbrock(x)
            },
            &[-1.2, 1.0],
            &opts,
        );
        assert!(r.fe_used <= 37);
        assert_eq!(r.fe_used, calls);
    }

    #[test]
    fn trace_is_monotone_and_ends_at_value() {
        let r = bfgs_minimize(rosenbrock, &[-1.2, 1.0], &BfgsOptions::default());
        assert!(r.trace.windows(2).all(|w| w[1].best <= w[0].best && w[1].fe > w[0].fe));
        assert_eq!(r.trace.last().unwrap().best, r.value);
        assert_eq!(r.trace.last().unwrap().fe, r.fe_used);
    }

    #[test]
    fn survives_infinite_regions() {
        // +inf outside the unit disk; minimum at (0.3, 0.2)
        let f = |x: &[f64]| {
            if x[0] * x[0] + x[1] * x[1] > 1.0 {
                f64::INFINITY
            } else {
                (x[0] - 0.3).powi(2) + 2.0 * (x[1] - 0.2).powi(2)
            }
        };
        let r = bfgs_minimize(f, &[-0.5, 0.5], &BfgsOptions::default());
        assert!((r.beta_star[0] - 0.3).abs() < 1e-4 && (r.beta_star[1] - 0.2).abs() < 1e-4);
    }

    #[test]
    fn option_validation() {
        assert!(BfgsOptions::<f64>::default().validate().is_ok());
        let bad = BfgsOptions {
            grad_step: 0.1,
            ..BfgsOptions::<f64>::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_precision_quadratic() {
        let opts = BfgsOptions::<f32> {
            grad_step: 1e-3,
            grad_tol: 1e-3,
            ..BfgsOptions::default()
        };
        let r = bfgs_minimize(|x: &[f32]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2), &[0.0, 0.0], &opts);
        assert!((r.beta_star[0] - 1.0).abs() < 1e-2 && (r.beta_star[1] + 2.0).abs() < 1e-2);
    }
}
