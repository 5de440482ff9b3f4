//! Profiled deviance, plug-in estimates and the BLUP of a constant-mean
//! Gaussian process.

use std::cell::Cell;

use rand::Rng;
use serde::Serialize;

use crate::correlation::{
    correlation_vector, factorize_regularized, validate_exponents, DistanceCache, FactoredCorrelation,
    DEFAULT_CONDITION_EXPONENT,
};
use crate::error::{Error, Result};
use crate::global::{run_strategy, StrategyId, StrategyOptions, StrategyReport};
use crate::linalg::Matrix;
use crate::scalar::{dot, Scalar};

/// Design points in `[0, 1]^d` with their simulator outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSet<T> {
    points: Matrix<T>,
    outputs: Vec<T>,
}

impl<T: Scalar> DesignSet<T> {
    pub fn new(points: Matrix<T>, outputs: Vec<T>) -> Result<Self> {
        let n = points.rows();
        if outputs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: outputs.len(),
            });
        }
        if n < 2 || points.cols() == 0 {
            return Err(Error::InvalidDesign("need at least two points and one input".into()));
        }
        if let Some(i) = points
            .row_iter()
            .position(|r| r.iter().any(|&v| !v.is_finite() || v < T::zero() || v > T::one()))
        {
            return Err(Error::InvalidDesign(format!("point {i} is not in [0, 1]^d")));
        }
        if let Some(i) = outputs.iter().position(|y| !y.is_finite()) {
            return Err(Error::InvalidDesign(format!("output {i} is not finite")));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if points.row(i) == points.row(j) {
                    return Err(Error::InvalidDesign(format!("points {i} and {j} are identical")));
                }
            }
        }
        Ok(Self { points, outputs })
    }

    pub fn from_rows(rows: &[Vec<T>], outputs: Vec<T>) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?, outputs)
    }

    pub fn n(&self) -> usize {
        self.points.rows()
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn points(&self) -> &Matrix<T> {
        &self.points
    }

    pub fn outputs(&self) -> &[T] {
        &self.outputs
    }

    pub fn is_constant(&self) -> bool {
        self.outputs.iter().all(|&y| y == self.outputs[0])
    }
}

/// Model settings shared by every deviance evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOptions<T> {
    /// Smoothness exponent `p_k`, the same in every dimension.
    pub p: T,
    /// Condition exponent `a`: the nugget keeps `kappa <= e^a`.
    pub condition_exponent: T,
}

impl<T: Scalar> Default for ModelOptions<T> {
    fn default() -> Self {
        Self {
            p: T::lit(2.0),
            condition_exponent: T::lit(DEFAULT_CONDITION_EXPONENT),
        }
    }
}

impl<T: Scalar> ModelOptions<T> {
    pub fn exponents(&self, d: usize) -> Result<Vec<T>> {
        let p = vec![self.p; d];
        validate_exponents(&p)?;
        Ok(p)
    }
}

/// Value of the deviance and the estimates it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DevianceEval<T> {
    pub deviance: T,
    pub mu_hat: T,
    pub sigma2_hat: T,
    pub delta: T,
}

/// GLS mean `(1' R^-1 1)^-1 1' R^-1 Y`.
pub fn mean_estimate<T: Scalar>(factored: &FactoredCorrelation<T>, y: &[T]) -> Result<T> {
    check_len(factored, y)?;
    let n = y.len();
    // centering first keeps the estimate exactly equivariant under shifts of Y
    let y_bar = y.iter().copied().sum::<T>() / T::from_count(n);
    let centered: Vec<T> = y.iter().map(|&v| v - y_bar).collect();
    let w = factored.solve(&vec![T::one(); n]);
    let denom: T = w.iter().copied().sum();
    if !(denom > T::zero()) || !denom.is_finite() {
        return Err(Error::IllConditioned);
    }
    Ok(y_bar + dot(&w, &centered) / denom)
}

/// `(Y - 1 mu)' R^-1 (Y - 1 mu) / n`, clamped at zero.
pub fn variance_estimate<T: Scalar>(factored: &FactoredCorrelation<T>, y: &[T], mu_hat: T) -> Result<T> {
    check_len(factored, y)?;
    let resid: Vec<T> = y.iter().map(|&v| v - mu_hat).collect();
    let q = factored.quadratic_form(&resid);
    if !q.is_finite() {
        return Err(Error::IllConditioned);
    }
    Ok((q / T::from_count(y.len())).max(T::zero()))
}

fn check_len<T: Scalar>(factored: &FactoredCorrelation<T>, y: &[T]) -> Result<()> {
    if factored.dim() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: factored.dim(),
            found: y.len(),
        });
    }
    Ok(())
}

/// Deviance from an existing factorization:
/// `log|R_delta| + n log((Y - 1 mu)' R_delta^-1 (Y - 1 mu))`.
pub fn deviance_from_factor<T: Scalar>(factored: &FactoredCorrelation<T>, y: &[T]) -> Result<DevianceEval<T>> {
    let mu_hat = mean_estimate(factored, y)?;
    let sigma2_hat = variance_estimate(factored, y, mu_hat)?;
    if sigma2_hat <= T::zero() {
        return Err(Error::Degenerate);
    }
    let n = T::from_count(y.len());
    let deviance = factored.log_det() + n * (n * sigma2_hat).ln();
    Ok(DevianceEval {
        deviance,
        mu_hat,
        sigma2_hat,
        delta: factored.delta(),
    })
}

/// Deviance at `beta` with the nugget recomputed for this `beta`.
pub fn evaluate_deviance<T: Scalar>(design: &DesignSet<T>, beta: &[T], opts: &ModelOptions<T>) -> Result<DevianceEval<T>> {
    DevianceEvaluator::new(design, opts)?.evaluate(beta)
}

/// Counts every deviance evaluation of one design.
#[derive(Debug)]
pub struct DevianceEvaluator<'a, T> {
    design: &'a DesignSet<T>,
    cache: DistanceCache<T>,
    a: T,
    fe: Cell<usize>,
}

impl<'a, T: Scalar> DevianceEvaluator<'a, T> {
    pub fn new(design: &'a DesignSet<T>, opts: &ModelOptions<T>) -> Result<Self> {
        let p = opts.exponents(design.dim())?;
        Ok(Self {
            design,
            cache: DistanceCache::new(design.points(), &p)?,
            a: opts.condition_exponent,
            fe: Cell::new(0),
        })
    }

    /// One function evaluation, whether or not it succeeds.
    pub fn evaluate(&self, beta: &[T]) -> Result<DevianceEval<T>> {
        self.fe.set(self.fe.get() + 1);
        self.evaluate_uncounted(beta)
    }

    /// Deviance value, with every failure mapped to +inf.
    pub fn deviance(&self, beta: &[T]) -> T {
        match self.evaluate(beta) {
            Ok(e) if !e.deviance.is_nan() => e.deviance,
            _ => T::infinity(),
        }
    }

    pub fn fe_count(&self) -> usize {
        self.fe.get()
    }

    fn factor(&self, beta: &[T]) -> Result<FactoredCorrelation<T>> {
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("beta must be finite".into()));
        }
        factorize_regularized(&self.cache.correlation(beta)?, self.a)
    }

    fn evaluate_uncounted(&self, beta: &[T]) -> Result<DevianceEval<T>> {
        deviance_from_factor(&self.factor(beta)?, self.design.outputs())
    }
}

/// BLUP and its mean squared error at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction<T> {
    pub y_hat: T,
    pub mse: T,
}

/// A Gaussian process fitted at `beta_star`.
#[derive(Debug, Clone)]
pub struct FittedGp<T> {
    design: DesignSet<T>,
    beta_star: Vec<T>,
    p: Vec<T>,
    mu_hat: T,
    sigma2_hat: T,
    deviance: T,
    fe_count: usize,
    correlation: FactoredCorrelation<T>,
    // R^-1 (Y - 1 mu), R^-1 1 and 1' R^-1 1
    resid_weights: Vec<T>,
    ones_weights: Vec<T>,
    ones_quad: T,
}

impl<T: Scalar> FittedGp<T> {
    /// Builds the model at a given `beta`. This evaluation is not counted.
    pub fn at_beta(design: DesignSet<T>, beta: &[T], opts: &ModelOptions<T>, fe_count: usize) -> Result<Self> {
        if beta.len() != design.dim() {
            return Err(Error::DimensionMismatch {
                expected: design.dim(),
                found: beta.len(),
            });
        }
        if design.is_constant() {
            return Err(Error::Degenerate);
        }
        let ev = DevianceEvaluator::new(&design, opts)?;
        let factored = ev.factor(beta)?;
        let fit = deviance_from_factor(&factored, design.outputs())?;
        let resid: Vec<T> = design.outputs().iter().map(|&y| y - fit.mu_hat).collect();
        let resid_weights = factored.solve(&resid);
        let ones_weights = factored.solve(&vec![T::one(); design.n()]);
        let ones_quad = ones_weights.iter().copied().sum();
        let p = opts.exponents(design.dim())?;
        Ok(Self {
            design,
            beta_star: beta.to_vec(),
            p,
            mu_hat: fit.mu_hat,
            sigma2_hat: fit.sigma2_hat,
            deviance: fit.deviance,
            fe_count,
            correlation: factored,
            resid_weights,
            ones_weights,
            ones_quad,
        })
    }

    pub fn design(&self) -> &DesignSet<T> {
        &self.design
    }

    pub fn beta_star(&self) -> &[T] {
        &self.beta_star
    }

    pub fn exponents(&self) -> &[T] {
        &self.p
    }

    pub fn mu_hat(&self) -> T {
        self.mu_hat
    }

    pub fn sigma2_hat(&self) -> T {
        self.sigma2_hat
    }

    pub fn deviance(&self) -> T {
        self.deviance
    }

    /// Deviance evaluations spent by the optimizer.
    pub fn fe_count(&self) -> usize {
        self.fe_count
    }

    /// Nugget `delta_lb` at `beta_star`.
    pub fn delta(&self) -> T {
        self.correlation.delta()
    }

    pub fn correlation(&self) -> &FactoredCorrelation<T> {
        &self.correlation
    }

    pub fn correlation_vector(&self, x: &[T]) -> Vec<T> {
        correlation_vector(self.design.points(), x, &self.beta_star, &self.p)
    }

    /// Weights `C = R^-1 (a 1 + r)` with `a = (1 - r' R^-1 1) / (1' R^-1 1)`,
    /// so that `y_hat = C' Y`.
    pub fn weights(&self, x: &[T]) -> Vec<T> {
        let r = self.correlation_vector(x);
        self.weights_for(&r).0
    }

    fn weights_for(&self, r: &[T]) -> (Vec<T>, T) {
        let a = (T::one() - dot(r, &self.ones_weights)) / self.ones_quad;
        let rhs: Vec<T> = r.iter().map(|&v| v + a).collect();
        (self.correlation.solve(&rhs), a)
    }

    /// `y_hat = mu + r' R^-1 (Y - 1 mu)` and
    /// `mse = sigma^2 (1 - 2 C'r + C' R C)`, clamped at zero.
    pub fn predict(&self, x: &[T]) -> Prediction<T> {
        assert_eq!(x.len(), self.design.dim(), "prediction point has wrong dimension");
        let r = self.correlation_vector(x);
        let y_hat = self.mu_hat + dot(&r, &self.resid_weights);
        let (c, a) = self.weights_for(&r);
        let c_r = dot(&c, &r);
        // R C = a 1 + r by construction of C
        let c_rc = a * c.iter().copied().sum::<T>() + c_r;
        let mse = self.sigma2_hat * (T::one() - (c_r + c_r) + c_rc);
        Prediction {
            y_hat,
            mse: mse.max(T::zero()),
        }
    }

    /// Second form of the BLUP, `C' Y`.
    pub fn predict_linear(&self, x: &[T]) -> T {
        dot(&self.weights(x), self.design.outputs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions<T> {
    pub model: ModelOptions<T>,
    pub search: StrategyOptions<T>,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            model: ModelOptions::default(),
            search: StrategyOptions::default(),
        }
    }
}

/// A fitted model together with the optimizer record.
#[derive(Debug, Clone)]
pub struct FitOutcome<T> {
    pub model: FittedGp<T>,
    pub search: StrategyReport<T>,
}

/// Minimizes the deviance over `beta` with `strategy`.
pub fn fit<T: Scalar, R: Rng + ?Sized>(
    design: &DesignSet<T>,
    strategy: StrategyId,
    opts: &FitOptions<T>,
    rng: &mut R,
) -> Result<FittedGp<T>> {
    fit_observed(design, strategy, opts, rng, |_, _| {}).map(|o| o.model)
}

/// As [`fit`], calling `observer(beta, value)` once per deviance evaluation.
pub fn fit_observed<T, R, O>(
    design: &DesignSet<T>,
    strategy: StrategyId,
    opts: &FitOptions<T>,
    rng: &mut R,
    mut observer: O,
) -> Result<FitOutcome<T>>
where
    T: Scalar,
    R: Rng + ?Sized,
    O: FnMut(&[T], T),
{
    if design.is_constant() {
        return Err(Error::Degenerate);
    }
    let ev = DevianceEvaluator::new(design, &opts.model)?;
    let objective = |beta: &[T]| {
        let v = ev.deviance(beta);
        observer(beta, v);
        v
    };
    let search = run_strategy(objective, strategy, design.dim(), &opts.search, rng)?;
    debug_assert_eq!(search.fe_used(), ev.fe_count());
    if !search.report.value.is_finite() {
        return Err(Error::Unfittable);
    }
    let model = FittedGp::at_beta(design.clone(), &search.report.beta_star, &opts.model, ev.fe_count())?;
    Ok(FitOutcome { model, search })
}
