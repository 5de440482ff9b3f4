//! Gaussian process emulators fitted by global minimization of the profiled
//! deviance.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.
//!
//! ```
//! use gpdevopt::{fit, DesignSet, FitOptions, StrategyId};
//! use rand::SeedableRng;
//!
//! let xs = [0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95];
//! let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
//! let ys: Vec<f64> = xs.iter().map(|&x: &f64| (6.0 * x).sin()).collect();
//! let design = DesignSet::from_rows(&rows, ys).unwrap();
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let model = fit(&design, StrategyId::DirectBfgs, &FitOptions::default(), &mut rng).unwrap();
//! let p = model.predict(&[0.2]);
//! assert!((p.y_hat - (1.2f64).sin()).abs() < 1e-6);
//! ```

pub mod correlation;
mod error;
pub mod global;
pub mod gp;
pub mod linalg;
pub mod local;
mod scalar;
pub mod testbed;

pub use correlation::{
    build_correlation, condition_number, correlation_vector, factorize, factorize_regularized, nugget_lower_bound,
    CorrelationSpec, FactoredCorrelation, DEFAULT_CONDITION_EXPONENT,
};
pub use error::{Error, Result};
pub use global::{
    cluster_starts, default_beta_box, direct_search, if_beta_box, lhd_maximin, run_strategy, SearchBox, StrategyId,
    StrategyOptions, StrategyReport,
};
pub use gp::{
    evaluate_deviance, fit, fit_observed, mean_estimate, variance_estimate, DesignSet, DevianceEval,
    DevianceEvaluator, FitOptions, FitOutcome, FittedGp, ModelOptions, Prediction,
};
pub use linalg::{Cholesky, Matrix};
pub use local::{bfgs_minimize, central_gradient, implicit_filtering, BfgsOptions, IfOptions, OptReport};
pub use scalar::Scalar;

pub type DesignSetF64 = DesignSet<f64>;
pub type FittedGpF64 = FittedGp<f64>;
pub type MatrixF64 = Matrix<f64>;
pub type SearchBoxF64 = SearchBox<f64>;
pub type OptReportF64 = OptReport<f64>;
