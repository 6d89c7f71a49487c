//! Tolerances and iteration budgets, loadable from TOML.
//!
//! Every field has a default, so a config file only lists what it changes:
//!
//! ```toml
//! seed = 11
//!
//! [diamond]
//! starts = 128
//!
//! [sampling]
//! epsilon = 0.1
//! ```
//!
//! The CLI reads the file named by `--config`, else by the
//! `VBROADCAST_CONFIG` environment variable, else uses the defaults.
//! Command-line flags override file values.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::{DiamondConfig, LocalOptimalityConfig};
use crate::cost::MinimizeConfig;
use crate::error::Result;

pub const CONFIG_ENV: &str = "VBROADCAST_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Entrywise tolerance for Hermiticity, TP and family-membership checks.
    pub structural: f64,
    /// Eigenvalue slack for positivity checks and spectral splits.
    pub spectral: f64,
    /// Largest allowed marginal deviation in broadcast checks.
    pub broadcast: f64,
    /// Bracket width at which a base-norm or diamond bound counts as certified.
    pub certificate_width: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-10,
            spectral: 1e-10,
            broadcast: 1e-12,
            certificate_width: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Outcome range `max − min` of the measured observables.
    pub c_range: f64,
    pub repetitions: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            delta: 0.05,
            c_range: 2.0,
            repetitions: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Master seed; subsystems derive theirs from it unless set explicitly.
    pub seed: u64,
    pub tolerances: Tolerances,
    pub minimize: MinimizeConfig,
    pub diamond: DiamondConfig,
    pub local_optimality: LocalOptimalityConfig,
    pub sampling: SamplingConfig,
    /// Equatorial grid used by broadcast verification.
    pub grid_radii: usize,
    pub grid_angles: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 7,
            tolerances: Tolerances::default(),
            minimize: MinimizeConfig::default(),
            diamond: DiamondConfig::default(),
            local_optimality: LocalOptimalityConfig::default(),
            sampling: SamplingConfig::default(),
            grid_radii: 10,
            grid_angles: 10,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Explicit path, else the environment variable, else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    /// Propagates the master seed to every seeded subsystem.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.minimize.seed = seed;
        self.diamond.seed = seed;
        self.local_optimality.seed = seed;
        self.local_optimality.diamond.seed = seed;
        self
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn partial_override() {
        let c = Config::from_toml("seed = 3\n[diamond]\nstarts = 5\n").unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.diamond.starts, 5);
        assert_eq!(c.diamond.width_tol, DiamondConfig::default().width_tol);
        assert_eq!(c.minimize, MinimizeConfig::default());
    }

    #[test]
    fn round_trip() {
        let c = Config::default().with_seed(99);
        assert_eq!(Config::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Config::from_toml("sed = 3").is_err());
        assert!(Config::from_toml("[sampling]\nepsilom = 0.1").is_err());
    }
}
