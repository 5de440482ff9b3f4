//! Closed-form test functions with their native domains.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A deterministic test function evaluated on `[0, 1]^d` through an affine
/// map onto its native box.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub name: &'static str,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    native: fn(&[f64]) -> f64,
}

pub const FUNCTION_NAMES: [&str; 7] = [
    "hump",
    "goldstein-price",
    "schwefel",
    "hartmann6",
    "rastrigin10",
    "rosenbrock10",
    "perm12",
];

impl TestFunction {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Evaluates at a native-domain point.
    pub fn eval_native(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "{}: wrong input dimension", self.name);
        (self.native)(x)
    }

    /// Evaluates at a point of `[0, 1]^d`.
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.eval_native(&self.to_native(z))
    }

    pub fn to_native(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&t, (&l, &u))| l + t * (u - l))
            .collect()
    }

    /// Replaces the native box.
    pub fn with_domain(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != self.dim() || upper.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: lower.len().min(upper.len()),
            });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidArgument("domain requires lower < upper".into()));
        }
        self.lower = lower;
        self.upper = upper;
        Ok(self)
    }
}

fn uniform(name: &'static str, d: usize, lo: f64, hi: f64, native: fn(&[f64]) -> f64) -> TestFunction {
    TestFunction {
        name,
        lower: vec![lo; d],
        upper: vec![hi; d],
        native,
    }
}

/// Looks up one of [`FUNCTION_NAMES`].
pub fn test_function(name: &str) -> Result<TestFunction> {
    let f = match name.trim().to_ascii_lowercase().as_str() {
        "hump" => uniform("hump", 1, -2.0, 2.0, hump),
        "goldstein-price" | "goldstein_price" | "goldsteinprice" => {
            uniform("goldstein-price", 2, -2.0, 2.0, goldstein_price)
        }
        "schwefel" | "schwefel5" => uniform("schwefel", 5, -500.0, 500.0, schwefel),
        "hartmann6" | "hartmann" => uniform("hartmann6", 6, 0.0, 1.0, hartmann6),
        "rastrigin10" | "rastrigin" => uniform("rastrigin10", 10, -5.12, 5.12, rastrigin),
        "rosenbrock10" | "rosenbrock" => uniform("rosenbrock10", 10, -5.0, 10.0, rosenbrock),
        "perm12" | "perm" => uniform("perm12", 12, -12.0, 12.0, perm),
        _ => return Err(Error::UnknownFunction(name.to_string())),
    };
    Ok(f)
}

pub fn hump(x: &[f64]) -> f64 {
    let x2 = x[0] * x[0];
    1.0316285 + 4.0 * x2 - 2.1 * x2 * x2 + x2 * x2 * x2 / 3.0
}

pub fn goldstein_price(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    let t1 = 1.0 + (a + b + 1.0).powi(2) * (19.0 - 14.0 * a + 3.0 * a * a - 14.0 * b + 6.0 * a * b + 3.0 * b * b);
    let t2 = 30.0
        + (2.0 * a - 3.0 * b).powi(2) * (18.0 - 32.0 * a + 12.0 * a * a + 48.0 * b - 36.0 * a * b + 27.0 * b * b);
    t1 * t2
}

pub fn schwefel(x: &[f64]) -> f64 {
    2094.9 - x.iter().map(|&v| v * v.abs().sqrt().sin()).sum::<f64>()
}

const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const HARTMANN_B: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.02, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HARTMANN_Q: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.588],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

/// Sum over the four rows of `alpha`, `B` and `Q`.
pub fn hartmann6(x: &[f64]) -> f64 {
    -(0..4)
        .map(|i| {
            let e: f64 = (0..6).map(|j| HARTMANN_B[i][j] * (x[j] - HARTMANN_Q[i][j]).powi(2)).sum();
            HARTMANN_ALPHA[i] * (-e).exp()
        })
        .sum::<f64>()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64 + x.iter().map(|&v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[0] * w[0] - w[1]).powi(2) + (w[0] - 1.0).powi(2))
        .sum()
}

/// `sum_i [sum_j (j^i + 0.5) ((x_j / j)^i - 1)]^2`.
pub fn perm(x: &[f64]) -> f64 {
    let d = x.len();
    (1..=d)
        .map(|i| {
            let inner: f64 = (1..=d)
                .map(|j| {
                    let jf = j as f64;
                    (jf.powi(i as i32) + 0.5) * ((x[j - 1] / jf).powi(i as i32) - 1.0)
                })
                .sum();
            inner * inner
        })
        .sum()
}
