//! Experiment configuration, read from TOML.
//!
//! ```toml
//! [model]
//! basis = ["constant", "cos:1"]
//! mu = [1.0, 0.5]
//! alpha = 0.5
//! H = 0.7
//!
//! [grid]
//! dt = 0.00390625
//! horizons = [6, 10, 14, 18]
//!
//! [mc]
//! replications = 200
//! base_seed = 1
//!
//! [tests]
//! suites = ["alpha_limit", "mu_limit", "independence"]
//! limit_draws = 2000
//!
//! [output]
//! directory = "out"
//! formats = ["csv", "json"]
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FouError, Result};
use crate::fbm::Hurst;
use crate::periodic_basis::{BasisFunction, PeriodicDrift};
use crate::process::{steps_per_unit, MAX_GROWTH_EXPONENT};

/// File name of the configuration echo written next to every output.
pub const CONFIG_ECHO: &str = "config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub basis: Vec<String>,
    pub mu: Vec<f64>,
    pub alpha: f64,
    #[serde(rename = "H")]
    pub hurst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dt: f64,
    pub horizons: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    pub replications: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Debug switch: drive the model with `B^H = 0`.
    #[serde(default)]
    pub zero_noise: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Two-sample KS of the scaled `alpha` error against the ratio law.
    AlphaLimit,
    /// One-sample KS of the scaled `mu` error (or shrinkage when `D` vanishes).
    MuLimit,
    /// Rank correlation between the two scaled errors.
    Independence,
}

fn all_suites() -> Vec<Suite> {
    vec![Suite::AlphaLimit, Suite::MuLimit, Suite::Independence]
}

fn default_limit_draws() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestsSpec {
    #[serde(default = "all_suites")]
    pub suites: Vec<Suite>,
    #[serde(default = "default_limit_draws")]
    pub limit_draws: usize,
    /// Truncation of `Z_inf` draws; defaults to `max(20, 12/alpha)`.
    #[serde(default)]
    pub truncation: Option<f64>,
}

impl Default for TestsSpec {
    fn default() -> Self {
        Self {
            suites: all_suites(),
            limit_draws: default_limit_draws(),
            truncation: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn all_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            formats: all_formats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub model: ModelSpec,
    pub grid: GridSpec,
    pub mc: McSpec,
    #[serde(default)]
    pub tests: TestsSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| FouError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| FouError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            FouError::Config(msg) => FouError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if !(m.alpha > 0.0 && m.alpha.is_finite()) {
            return Err(FouError::Config(format!(
                "alpha must be positive, got {}",
                m.alpha
            )));
        }
        Hurst::new(m.hurst).map_err(|e| FouError::Config(e.to_string()))?;
        self.drift()?;
        steps_per_unit(self.grid.dt).map_err(|e| FouError::Config(e.to_string()))?;
        if self.grid.horizons.is_empty() {
            return Err(FouError::Config("grid.horizons is empty".into()));
        }
        if let Some(n) = self.grid.horizons.iter().find(|n| **n < 2) {
            return Err(FouError::Config(format!("horizons must be >= 2, got {n}")));
        }
        let growth = m.alpha * self.max_horizon() as f64;
        if growth > MAX_GROWTH_EXPONENT {
            return Err(FouError::Config(format!(
                "alpha * max horizon = {growth} exceeds {MAX_GROWTH_EXPONENT}"
            )));
        }
        if self.mc.replications == 0 {
            return Err(FouError::Config("mc.replications must be >= 1".into()));
        }
        if self.tests.limit_draws == 0 {
            return Err(FouError::Config("tests.limit_draws must be >= 1".into()));
        }
        Ok(())
    }

    pub fn hurst(&self) -> Hurst {
        Hurst::new(self.model.hurst).expect("validated")
    }

    pub fn basis(&self) -> Result<Vec<BasisFunction>> {
        self.model.basis.iter().map(|s| s.parse()).collect()
    }

    pub fn drift(&self) -> Result<PeriodicDrift> {
        PeriodicDrift::new(self.basis()?, self.model.mu.clone())
    }

    pub fn steps_per_unit(&self) -> usize {
        steps_per_unit(self.grid.dt).expect("validated")
    }

    /// Horizons in increasing order without repeats.
    pub fn horizons(&self) -> Vec<usize> {
        let mut h = self.grid.horizons.clone();
        h.sort_unstable();
        h.dedup();
        h
    }

    pub fn max_horizon(&self) -> usize {
        self.grid.horizons.iter().copied().max().unwrap_or(0)
    }

    pub fn writes(&self, format: Format) -> bool {
        self.output.formats.contains(&format)
    }

    /// Writes the configuration echo into `dir`.
    pub fn echo_into(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(CONFIG_ECHO), self.to_toml())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"
[model]
basis = ["constant", "cos:1"]
mu = [1.0, 0.5]
alpha = 0.5
H = 0.7

[grid]
dt = 0.00390625
horizons = [10, 6]

[mc]
replications = 4
base_seed = 9
"#;

    #[test]
    fn parses_with_defaults() {
        let spec = ExperimentSpec::from_toml(DEMO).unwrap();
        assert_eq!(spec.horizons(), vec![6, 10]);
        assert_eq!(spec.steps_per_unit(), 256);
        assert_eq!(spec.tests.suites.len(), 3);
        assert!(spec.writes(Format::Csv));
        assert_eq!(spec.drift().unwrap().dim(), 2);
        let again = ExperimentSpec::from_toml(&spec.to_toml()).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn rejects_invalid_specs() {
        let bad = [
            ("alpha = 0.5", "alpha = -1.0"),
            ("H = 0.7", "H = 1.0"),
            ("H = 0.7", "H = 0.4"),
            ("horizons = [10, 6]", "horizons = [1, 6]"),
            ("horizons = [10, 6]", "horizons = [100]"),
            ("replications = 4", "replications = 0"),
            ("dt = 0.00390625", "dt = 0.3"),
            ("mu = [1.0, 0.5]", "mu = [1.0]"),
            ("\"cos:1\"", "\"tan:1\""),
            ("base_seed = 9", "base_seed = 9\nbogus = 1"),
        ];
        for (from, to) in bad {
            let text = DEMO.replace(from, to);
            assert!(
                matches!(ExperimentSpec::from_toml(&text), Err(FouError::Config(_))),
                "accepted {to}"
            );
        }
    }
}
