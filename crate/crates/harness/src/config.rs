//! Optimizer settings from a JSON file, overridden field by field by flags.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::pipeline::PipelineConfig;

/// Every field is optional; missing ones keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub step_tolerance: Option<f64>,
    pub value_tolerance: Option<f64>,
    pub shift: Option<f64>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub order: Option<usize>,
    pub max_denominator: Option<u64>,
}

impl ConfigOverrides {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Fields set in `other` win.
    pub fn merged(self, other: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            restarts: other.restarts.or(self.restarts),
            max_iters: other.max_iters.or(self.max_iters),
            step_tolerance: other.step_tolerance.or(self.step_tolerance),
            value_tolerance: other.value_tolerance.or(self.value_tolerance),
            shift: other.shift.or(self.shift),
            seed: other.seed.or(self.seed),
            tol: other.tol.or(self.tol),
            order: other.order.or(self.order),
            max_denominator: other.max_denominator.or(self.max_denominator),
        }
    }

    pub fn apply(&self, mut cfg: PipelineConfig) -> Result<PipelineConfig> {
        let a = &mut cfg.ascent;
        if let Some(v) = self.restarts {
            a.restarts = v;
        }
        if let Some(v) = self.max_iters {
            a.max_iters = v;
        }
        if let Some(v) = self.step_tolerance {
            a.step_tolerance = v;
        }
        if let Some(v) = self.value_tolerance {
            a.value_tolerance = v;
        }
        if self.shift.is_some() {
            a.shift = self.shift;
        }
        if let Some(v) = self.seed {
            a.seed = v;
        }
        if let Some(v) = self.tol {
            cfg.tolerance = v;
        }
        if self.order.is_some() {
            cfg.order = self.order;
        }
        if let Some(v) = self.max_denominator {
            cfg.max_denominator = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
