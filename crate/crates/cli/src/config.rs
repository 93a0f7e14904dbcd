//! Run configuration files.
//!
//! A configuration is a JSON object. Only `potential` is required:
//!
//! ```json
//! {
//!   "potential": { "preset": "mathieu", "amplitude": 2.0, "interval": [0.0, 6.283185307179586] },
//!   "integrator_tol": 1e-10,
//!   "fd_grid": 2000,
//!   "rank_tol": 1e-6,
//!   "seed": 0
//! }
//! ```
//!
//! Presets are `free` (`n`, `interval`), `constant` (`matrix`, `interval`),
//! `diagonal-cosine` (`offsets`, `amplitudes`, `frequencies`, `interval`),
//! `mathieu` (`amplitude`, optional `n`, `interval`), `coupled-cosine`
//! (`base`, `amplitude`, `frequency`, `interval`) and `grid` (`path`,
//! `order`), where `order` is `linear` or `cubic` and a relative `path` is
//! taken relative to the configuration file.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use theta_maslov::harness::HarnessOptions;
use theta_maslov::potential::PotentialSpec;
use theta_maslov::Potential64;

use crate::InputError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    #[serde(default = "defaults::integrator_tol")]
    pub integrator_tol: f64,
    /// Grid size of the finite-difference cross-check.
    #[serde(default = "defaults::fd_grid")]
    pub fd_grid: usize,
    /// Relative singular-value threshold for intersection and kernel ranks.
    #[serde(default = "defaults::rank_tol")]
    pub rank_tol: f64,
    #[serde(default)]
    pub seed: u64,
}

mod defaults {
    pub fn integrator_tol() -> f64 {
        1e-10
    }
    pub fn fd_grid() -> usize {
        2000
    }
    pub fn rank_tol() -> f64 {
        1e-6
    }
}

impl Default for RunConfig {
    /// The free scalar operator on `[0, 2π]`.
    fn default() -> Self {
        Self {
            potential: PotentialSpec::Free { n: 1, interval: (0.0, 2.0 * PI) },
            integrator_tol: defaults::integrator_tol(),
            fd_grid: defaults::fd_grid(),
            rank_tol: defaults::rank_tol(),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        serde_json::from_str(text).map_err(|e| InputError(format!("malformed configuration: {e}")).into())
    }

    /// Reads and validates a configuration file; grid paths are resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InputError(format!("cannot read configuration {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text).with_context(|| format!("in {}", path.display()))?;
        if let PotentialSpec::Grid { path: grid, .. } = &mut cfg.potential
            && grid.is_relative()
                && let Some(dir) = path.parent() {
                    *grid = dir.join(&*grid);
                }
        Ok(cfg)
    }

    /// Checks the invariants and builds the potential.
    pub fn validate(&self) -> anyhow::Result<Potential64> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.integrator_tol) {
            bail!(InputError(format!("integrator_tol must be positive, got {}", self.integrator_tol)));
        }
        if !positive(self.rank_tol) || self.rank_tol >= 1.0 {
            bail!(InputError(format!("rank_tol must lie in (0, 1), got {}", self.rank_tol)));
        }
        if self.fd_grid < 16 {
            bail!(InputError(format!("fd_grid must be at least 16, got {}", self.fd_grid)));
        }
        self.potential.build().map_err(|e| InputError(format!("invalid potential: {e}")).into())
    }

    pub fn harness_options(&self) -> HarnessOptions {
        let mut opts = HarnessOptions::with_integrator_tol(self.integrator_tol);
        opts.oracle.fd_grid = self.fd_grid;
        opts.oracle.kernel_tol = self.rank_tol;
        opts.engine.rank_tol = self.rank_tol;
        opts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_fields() {
        let cfg = RunConfig::from_json(r#"{"potential": {"preset": "mathieu", "amplitude": 2.0, "interval": [0, 1]}}"#).unwrap();
        assert_eq!(cfg.integrator_tol, 1e-10);
        assert_eq!(cfg.fd_grid, 2000);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn invariants_are_enforced() {
        let mut cfg = RunConfig::default();
        cfg.integrator_tol = 0.0;
        assert!(cfg.validate().is_err());
        let degenerate = RunConfig::from_json(r#"{"potential": {"preset": "free", "n": 1, "interval": [1, 1]}}"#).unwrap();
        assert!(degenerate.validate().is_err());
        assert!(RunConfig::from_json(r#"{"potential": {"preset": "mathieu"}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"potential": {"preset": "free", "n": 1, "interval": [0, 1]}, "tol": 1}"#).is_err());
    }
}
