//! Run configuration: a single JSON file with strict unknown-key
//! rejection. Complex numbers are two-element `[re, im]` arrays.

use gelfand_toda::{AlphaWeights, PointConfig, QuadSettings};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Names of the selectable check suites.
pub const ALL_CHECKS: [&str; 8] = [
    "laplace",
    "seed",
    "hgs",
    "contiguity",
    "covariance",
    "epd",
    "identities",
    "toda",
];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadConfig {
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_max_subdivisions")]
    pub max_subdivisions: usize,
    #[serde(default = "default_theta_max")]
    pub theta_max: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
}

fn default_abs_tol() -> f64 {
    1e-12
}
fn default_rel_tol() -> f64 {
    1e-10
}
fn default_max_subdivisions() -> usize {
    2000
}
fn default_theta_max() -> f64 {
    std::f64::consts::FRAC_PI_3
}
fn default_rho() -> f64 {
    0.2
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: default_abs_tol(),
            rel_tol: default_rel_tol(),
            max_subdivisions: default_max_subdivisions(),
            theta_max: default_theta_max(),
            rho: default_rho(),
        }
    }
}

impl QuadConfig {
    pub fn settings(&self) -> QuadSettings {
        QuadSettings {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
            theta_max: self.theta_max,
        }
    }
}

/// The verification run configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Parameter vector, `[re, im]` pairs, must sum to -2.
    pub alpha: Vec<[f64; 2]>,
    /// Configuration points, `[re, im]` pairs, pairwise distinct.
    pub x: Vec<[f64; 2]>,
    /// 1-based ladder pair `[i, j]`.
    pub pair: [usize; 2],
    /// Index window `[n_min, n_max]`, containing 0.
    pub n_range: [i64; 2],
    /// Seed normalization constant `B(1)`.
    #[serde(rename = "A", default = "default_a")]
    pub a_const: [f64; 2],
    #[serde(default)]
    pub quad: QuadConfig,
    /// Subset of the known suite names; nonempty.
    pub checks: Vec<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output path prefix for the CSV report and JSON summary.
    #[serde(default = "default_out")]
    pub out: String,
}

fn default_a() -> [f64; 2] {
    [1.0, 0.0]
}
fn default_seed() -> u64 {
    42
}
fn default_out() -> String {
    "report".to_string()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.alpha.len() != self.x.len() {
            return Err(ConfigError::Invalid(
                "alpha and x must have the same length".into(),
            ));
        }
        self.alpha_weights()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.point_config()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let n = self.x.len();
        let [i, j] = self.pair;
        if i == 0 || j == 0 || i > n || j > n || i == j {
            return Err(ConfigError::Invalid(format!(
                "pair must be distinct 1-based indices in 1..={n}"
            )));
        }
        let [lo, hi] = self.n_range;
        if lo > 0 || hi < 0 || lo > hi {
            return Err(ConfigError::Invalid(
                "n_range must contain 0 and be ordered".into(),
            ));
        }
        if self.checks.is_empty() {
            return Err(ConfigError::Invalid("checks must be nonempty".into()));
        }
        let known: BTreeSet<&str> = ALL_CHECKS.into_iter().collect();
        for c in &self.checks {
            if !known.contains(c.as_str()) {
                return Err(ConfigError::Invalid(format!("unknown check '{c}'")));
            }
        }
        if !(self.quad.rho > 0.0 && self.quad.rho < 0.5) {
            return Err(ConfigError::Invalid("quad.rho must lie in (0, 1/2)".into()));
        }
        if self.a_const == [0.0, 0.0] {
            return Err(ConfigError::Invalid("A must be nonzero".into()));
        }
        Ok(())
    }

    pub fn alpha_weights(&self) -> Result<AlphaWeights, gelfand_toda::HgfError> {
        AlphaWeights::new(self.alpha.iter().map(|&[r, i]| C64::new(r, i)).collect())
    }

    pub fn point_config(&self) -> Result<PointConfig, gelfand_toda::HgfError> {
        PointConfig::new(self.x.iter().map(|&[r, i]| C64::new(r, i)).collect())
    }

    /// 0-based ladder pair.
    pub fn pair0(&self) -> (usize, usize) {
        (self.pair[0] - 1, self.pair[1] - 1)
    }

    pub fn a_c64(&self) -> C64 {
        C64::new(self.a_const[0], self.a_const[1])
    }
}
