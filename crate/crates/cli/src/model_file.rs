//! JSON model files.

use std::path::Path;

use anyhow::{bail, Context, Result};
use gpdevopt::{DesignSet, FittedGp, ModelOptions};
use serde::{Deserialize, Serialize};

use crate::data::InputScaling;

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub strategy: String,
    pub seed: u64,
    pub box_scale: f64,
    pub p: f64,
    pub condition_exponent: f64,
    pub beta_star: Vec<f64>,
    pub mu_hat: f64,
    pub sigma2_hat: f64,
    pub delta: f64,
    pub deviance: f64,
    pub fe_count: usize,
    pub input_scaling: InputScaling,
    /// Design points in scaled `[0, 1]^d` coordinates.
    pub points: Vec<Vec<f64>>,
    pub outputs: Vec<f64>,
}

impl ModelFile {
    pub fn options(&self) -> ModelOptions<f64> {
        ModelOptions {
            p: self.p,
            condition_exponent: self.condition_exponent,
        }
    }

    /// Rebuilds the fitted model from the stored design and `beta_star`.
    pub fn to_model(&self) -> Result<FittedGp<f64>> {
        let design = DesignSet::from_rows(&self.points, self.outputs.clone())?;
        Ok(FittedGp::at_beta(design, &self.beta_star, &self.options(), self.fe_count)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let m: ModelFile = serde_json::from_str(&text).with_context(|| format!("{} is not a model file", path.display()))?;
        if m.version != MODEL_VERSION {
            bail!("unsupported model file version {} (expected {MODEL_VERSION})", m.version);
        }
        Ok(m)
    }
}
