//! Gaussian (power-exponential) correlation matrices, the condition-number
//! driven nugget lower bound, and the factorization used by the deviance.
//!
//! Correlations use the log10 inverse-lengthscale parametrization
//! `R_ij = prod_k exp(-10^beta_k |x_ik - x_jk|^p_k)`.

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, Cholesky, Matrix};
use crate::scalar::Scalar;

/// Default condition-number exponent: `kappa(R + delta I) <= e^25`.
pub const DEFAULT_CONDITION_EXPONENT: f64 = 25.0;

/// Ratio `lambda_min / lambda_max` at or below which a matrix is treated as
/// numerically singular. Its inverse is the condition number substituted into
/// the nugget formula.
pub fn singular_ratio<T: Scalar>() -> T {
    T::lit(1e-14).max(T::epsilon())
}

/// Correlation hyperparameters for one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSpec<T> {
    beta: Vec<T>,
    p: Vec<T>,
    a: T,
}

impl<T: Scalar> CorrelationSpec<T> {
    pub fn new(beta: Vec<T>, p: Vec<T>, a: T) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::InvalidSpec("beta must have at least one entry".into()));
        }
        if beta.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: beta.len(),
                found: p.len(),
            });
        }
        validate_exponents(&p)?;
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::InvalidSpec(format!("threshold exponent must be positive, got {a}")));
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidSpec("beta must be finite".into()));
        }
        Ok(Self { beta, p, a })
    }

    /// Uniform smoothness exponent `p` in every dimension and `a = 25`.
    pub fn gaussian(beta: Vec<T>, p: T) -> Result<Self> {
        let d = beta.len();
        Self::new(beta, vec![p; d], T::lit(DEFAULT_CONDITION_EXPONENT))
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[T] {
        &self.beta
    }

    pub fn exponents(&self) -> &[T] {
        &self.p
    }

    pub fn threshold_exponent(&self) -> T {
        self.a
    }
}

pub(crate) fn validate_exponents<T: Scalar>(p: &[T]) -> Result<()> {
    let two = T::lit(2.0);
    match p.iter().find(|&&pk| !(pk > T::zero() && pk <= two)) {
        Some(bad) => Err(Error::InvalidSpec(format!("smoothness exponent {bad} outside (0, 2]"))),
        None => Ok(()),
    }
}

/// Per-dimension powered distances `|x_ik - x_jk|^p_k` for every pair `i < j`.
///
/// Computed once per design and reused for every `beta`.
#[derive(Debug, Clone)]
pub struct DistanceCache<T> {
    n: usize,
    d: usize,
    p: Vec<T>,
    // pair-major: pair (i, j) with i < j occupies d consecutive slots
    powered: Vec<T>,
}

impl<T: Scalar> DistanceCache<T> {
    pub fn new(points: &Matrix<T>, p: &[T]) -> Result<Self> {
        let (n, d) = (points.rows(), points.cols());
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.len(),
            });
        }
        validate_exponents(p)?;
        let mut powered = Vec::with_capacity(n * n.saturating_sub(1) / 2 * d);
        for i in 0..n {
            let xi = points.row(i);
            for j in (i + 1)..n {
                let xj = points.row(j);
                for k in 0..d {
                    powered.push(powered_distance(xi[k], xj[k], p[k]));
                }
            }
        }
        Ok(Self {
            n,
            d,
            p: p.to_vec(),
            powered,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn exponents(&self) -> &[T] {
        &self.p
    }

    /// Correlation matrix for the given `beta`.
    pub fn correlation(&self, beta: &[T]) -> Result<Matrix<T>> {
        if beta.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: beta.len(),
            });
        }
        let ten = T::lit(10.0);
        let theta: Vec<T> = beta.iter().map(|&b| ten.powf(b)).collect();
        let mut r = Matrix::identity(self.n);
        let mut chunks = self.powered.chunks_exact(self.d.max(1));
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let dist = chunks.next().expect("pair storage sized to n(n-1)/2");
                let exponent: T = dist.iter().zip(&theta).map(|(&dk, &tk)| tk * dk).sum();
                let v = (-exponent).exp();
                r[(i, j)] = v;
                r[(j, i)] = v;
            }
        }
        Ok(r)
    }
}

#[inline]
fn powered_distance<T: Scalar>(a: T, b: T, p: T) -> T {
    let diff = (a - b).abs();
    if p == T::lit(2.0) {
        diff * diff
    } else {
        diff.powf(p)
    }
}

/// Builds the `n x n` correlation matrix for `design` (rows are points).
pub fn build_correlation<T: Scalar>(design: &Matrix<T>, spec: &CorrelationSpec<T>) -> Result<Matrix<T>> {
    if design.cols() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: design.cols(),
        });
    }
    DistanceCache::new(design, spec.exponents())?.correlation(spec.beta())
}

/// Correlations between a new point and every design point.
pub fn correlation_vector<T: Scalar>(points: &Matrix<T>, x: &[T], beta: &[T], p: &[T]) -> Vec<T> {
    let ten = T::lit(10.0);
    let theta: Vec<T> = beta.iter().map(|&b| ten.powf(b)).collect();
    points
        .row_iter()
        .map(|row| {
            let exponent: T = row
                .iter()
                .zip(x)
                .zip(theta.iter().zip(p))
                .map(|((&xi, &xs), (&tk, &pk))| tk * powered_distance(xi, xs, pk))
                .sum();
            (-exponent).exp()
        })
        .collect()
}

/// Extreme eigenvalues of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumBounds<T> {
    pub lambda_min: T,
    pub lambda_max: T,
}

pub fn spectrum_bounds<T: Scalar>(r: &Matrix<T>) -> Result<SpectrumBounds<T>> {
    let ev = symmetric_eigenvalues(r)?;
    Ok(SpectrumBounds {
        lambda_min: *ev.first().ok_or_else(|| Error::InvalidArgument("empty matrix".into()))?,
        lambda_max: *ev.last().expect("nonempty"),
    })
}

impl<T: Scalar> SpectrumBounds<T> {
    /// `lambda_max / lambda_min`, or `Singular` when the ratio is below
    /// [`singular_ratio`].
    pub fn condition_number(&self) -> Result<T> {
        if self.lambda_min <= singular_ratio::<T>() * self.lambda_max {
            Err(Error::Singular {
                lambda_min: self.lambda_min.as_f64(),
                lambda_max: self.lambda_max.as_f64(),
            })
        } else {
            Ok(self.lambda_max / self.lambda_min)
        }
    }

    /// Condition number with the singular case clamped to `1 / singular_ratio`.
    pub fn clamped_condition_number(&self) -> T {
        self.condition_number()
            .unwrap_or_else(|_| singular_ratio::<T>().recip())
    }

    /// Smallest `delta >= 0` with `kappa(R + delta I) <= e^a`.
    pub fn nugget_lower_bound(&self, a: T) -> T {
        let kappa = self.clamped_condition_number();
        let threshold = a.exp();
        let delta = self.lambda_max * (kappa - threshold) / (kappa * (threshold - T::one()));
        delta.max(T::zero())
    }
}

/// 2-norm condition number `lambda_max / lambda_min` of a symmetric matrix.
pub fn condition_number<T: Scalar>(r: &Matrix<T>) -> Result<T> {
    spectrum_bounds(r)?.condition_number()
}

/// `max{lambda_max (kappa - e^a) / (kappa (e^a - 1)), 0}`.
pub fn nugget_lower_bound<T: Scalar>(r: &Matrix<T>, a: T) -> Result<T> {
    Ok(spectrum_bounds(r)?.nugget_lower_bound(a))
}

/// Cholesky factorization of `R + delta I` together with the quantities the
/// deviance needs.
#[derive(Debug, Clone)]
pub struct FactoredCorrelation<T> {
    delta: T,
    log_det: T,
    kappa: Option<T>,
    chol: Cholesky<T>,
}

impl<T: Scalar> FactoredCorrelation<T> {
    pub fn dim(&self) -> usize {
        self.chol.dim()
    }

    /// Nugget actually added to the diagonal.
    pub fn delta(&self) -> T {
        self.delta
    }

    /// `log |R + delta I|`.
    pub fn log_det(&self) -> T {
        self.log_det
    }

    /// Condition number of the un-regularized matrix, when it was computed.
    /// `Some(inf)` marks a numerically singular matrix.
    pub fn kappa(&self) -> Option<T> {
        self.kappa
    }

    pub fn cholesky(&self) -> &Cholesky<T> {
        &self.chol
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.chol.solve(b)
    }

    pub fn quadratic_form(&self, b: &[T]) -> T {
        self.chol.quadratic_form(b)
    }
}

/// Factorizes `R + delta I`.
pub fn factorize<T: Scalar>(r: &Matrix<T>, delta: T) -> Result<FactoredCorrelation<T>> {
    if !(delta >= T::zero()) {
        return Err(Error::InvalidArgument(format!("nugget must be nonnegative, got {delta}")));
    }
    let chol = Cholesky::new(&r.with_added_diagonal(delta))?;
    let log_det = chol.log_det();
    if !log_det.is_finite() {
        return Err(Error::IllConditioned);
    }
    Ok(FactoredCorrelation {
        delta,
        log_det,
        kappa: None,
        chol,
    })
}

/// Computes the nugget lower bound for `r` and factorizes `R + delta_lb I`.
pub fn factorize_regularized<T: Scalar>(r: &Matrix<T>, a: T) -> Result<FactoredCorrelation<T>> {
    let bounds = spectrum_bounds(r)?;
    let delta = bounds.nugget_lower_bound(a);
    let mut f = factorize(r, delta)?;
    f.kappa = Some(bounds.condition_number().unwrap_or(T::infinity()));
    Ok(f)
}
