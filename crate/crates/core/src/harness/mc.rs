//! Monte Carlo replication sweeps.
//!
//! Replication `r` draws one fBm path from seed `derive_seed(base_seed, r)`
//! covering the largest horizon, simulates `X` exactly and estimates at every
//! configured horizon on that one path.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FouError, Result};
use crate::estimator::{estimate, Observation, Route};
use crate::exec::{map_indexed, Backend};
use crate::fbm::{FbmPath, FgnGenerator};
use crate::harness::config::{ExperimentSpec, Format};
use crate::harness::io::{write_json, write_results_file};
use crate::harness::{RESULTS_FILE, SUMMARY_FILE};
use crate::process::simulate_exact;
use crate::rng::derive_seed;
use crate::statkit::{median, Summary};

/// Fraction of skipped estimates above which a run is flagged.
pub const SKIP_WARNING_FRACTION: f64 = 0.05;

/// Estimate at one horizon of one replication, with errors scaled by the true parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonRecord {
    pub rep: usize,
    pub seed: u64,
    pub n: usize,
    pub alpha_hat: f64,
    pub mu_hat: Vec<f64>,
    pub gamma_inv: f64,
    /// `e^{alpha n}(alpha_hat - alpha)`
    pub err_alpha_scaled: f64,
    /// `n^{1-H}(mu_hat - mu)`
    pub err_mu_scaled: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skip {
    pub rep: usize,
    pub seed: u64,
    pub n: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub rep: usize,
    pub seed: u64,
    pub records: Vec<HorizonRecord>,
    pub skipped: Vec<Skip>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McOutcome {
    pub replications: Vec<ReplicationResult>,
    pub horizons: Vec<usize>,
}

impl McOutcome {
    pub fn records(&self) -> Vec<HorizonRecord> {
        self.replications
            .iter()
            .flat_map(|r| r.records.iter().cloned())
            .collect()
    }

    pub fn skipped(&self) -> Vec<Skip> {
        self.replications
            .iter()
            .flat_map(|r| r.skipped.iter().cloned())
            .collect()
    }
}

/// Seed of replication `rep`.
pub fn replication_seed(spec: &ExperimentSpec, rep: usize) -> u64 {
    derive_seed(spec.mc.base_seed, rep as u64)
}

/// Scaled errors against the true parameters of `spec`.
pub fn make_record(
    spec: &ExperimentSpec,
    rep: usize,
    seed: u64,
    n: usize,
    alpha_hat: f64,
    mu_hat: Vec<f64>,
    gamma_inv: f64,
) -> HorizonRecord {
    let alpha = spec.model.alpha;
    let scale_mu = (n as f64).powf(1.0 - spec.model.hurst);
    let err_mu_scaled = mu_hat
        .iter()
        .zip(&spec.model.mu)
        .map(|(a, b)| scale_mu * (a - b))
        .collect();
    HorizonRecord {
        rep,
        seed,
        n,
        alpha_hat,
        gamma_inv,
        err_alpha_scaled: (alpha * n as f64).exp() * (alpha_hat - alpha),
        mu_hat,
        err_mu_scaled,
    }
}

/// Runs one replication given a generator for the full horizon.
pub fn run_replication(
    spec: &ExperimentSpec,
    generator: Option<&FgnGenerator>,
    rep: usize,
) -> Result<ReplicationResult> {
    let seed = replication_seed(spec, rep);
    let hurst = spec.hurst();
    let drift = spec.drift()?;
    let bh = match generator {
        Some(g) => g.path(seed),
        None => FbmPath::zero(
            hurst,
            spec.max_horizon() * spec.steps_per_unit(),
            spec.grid.dt,
        ),
    };
    let path = simulate_exact(&drift, spec.model.alpha, &bh)?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for n in spec.horizons() {
        let obs = Observation::from_path(&path, n)?;
        match estimate(&obs, drift.basis(), hurst, Route::ClosedForm) {
            Ok(out) => records.push(make_record(
                spec,
                rep,
                seed,
                n,
                out.alpha_hat,
                out.mu_hat,
                out.stats.gamma_inv,
            )),
            Err(FouError::DegenerateDesign(reason)) => skipped.push(Skip {
                rep,
                seed,
                n,
                reason,
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(ReplicationResult {
        rep,
        seed,
        records,
        skipped,
    })
}

pub fn run_mc(spec: &ExperimentSpec, backend: Backend) -> Result<McOutcome> {
    spec.validate()?;
    let generator = if spec.mc.zero_noise {
        None
    } else {
        Some(FgnGenerator::new(
            spec.hurst(),
            spec.max_horizon() * spec.steps_per_unit(),
            spec.grid.dt,
        )?)
    };
    let results = map_indexed(spec.mc.replications, backend, |rep| {
        run_replication(spec, generator.as_ref(), rep)
    });
    Ok(McOutcome {
        replications: results.into_iter().collect::<Result<_>>()?,
        horizons: spec.horizons(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonSummary {
    pub n: usize,
    pub estimates: usize,
    pub median_abs_alpha_error: f64,
    /// Median over replications of `max_i |mu_hat_i - mu_i|`.
    pub median_mu_error_sup: f64,
    pub err_alpha_scaled: Summary,
    pub err_mu_scaled: Vec<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub alpha: f64,
    #[serde(rename = "H")]
    pub hurst: f64,
    pub mu: Vec<f64>,
    pub basis: Vec<String>,
    pub dt: f64,
    pub replications: usize,
    pub base_seed: u64,
    pub horizons: Vec<HorizonSummary>,
    pub skipped: Vec<Skip>,
    pub skip_fraction: f64,
    pub warning: Option<String>,
    /// Least-squares slope of `ln median |alpha_hat - alpha|` against `n`.
    pub alpha_error_log_slope: Option<f64>,
}

/// Slope of the least-squares line through `(x_i, y_i)`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / x.len() as f64;
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Aggregates records (fresh or read back from disk) against the truth in `spec`.
pub fn summarize(
    spec: &ExperimentSpec,
    records: &[HorizonRecord],
    skipped: Vec<Skip>,
) -> McSummary {
    let alpha = spec.model.alpha;
    let mu = &spec.model.mu;
    let horizons: Vec<HorizonSummary> = spec
        .horizons()
        .into_iter()
        .filter_map(|n| {
            let at: Vec<&HorizonRecord> = records.iter().filter(|r| r.n == n).collect();
            if at.is_empty() {
                return None;
            }
            let abs_alpha: Vec<f64> = at.iter().map(|r| (r.alpha_hat - alpha).abs()).collect();
            let sup_mu: Vec<f64> = at
                .iter()
                .map(|r| {
                    r.mu_hat
                        .iter()
                        .zip(mu)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .collect();
            let scaled_alpha: Vec<f64> = at.iter().map(|r| r.err_alpha_scaled).collect();
            Some(HorizonSummary {
                n,
                estimates: at.len(),
                median_abs_alpha_error: median(&abs_alpha),
                median_mu_error_sup: median(&sup_mu),
                err_alpha_scaled: Summary::of(&scaled_alpha),
                err_mu_scaled: (0..mu.len())
                    .map(|i| {
                        Summary::of(&at.iter().map(|r| r.err_mu_scaled[i]).collect::<Vec<_>>())
                    })
                    .collect(),
            })
        })
        .collect();
    let attempted = spec.mc.replications * spec.horizons().len();
    let skip_fraction = skipped.len() as f64 / attempted as f64;
    let warning = (skip_fraction > SKIP_WARNING_FRACTION).then(|| {
        format!(
            "{} of {attempted} estimates skipped as degenerate ({:.1}%)",
            skipped.len(),
            100.0 * skip_fraction
        )
    });
    let xs: Vec<f64> = horizons.iter().map(|h| h.n as f64).collect();
    let ys: Vec<f64> = horizons
        .iter()
        .map(|h| h.median_abs_alpha_error.ln())
        .collect();
    McSummary {
        alpha,
        hurst: spec.model.hurst,
        mu: mu.clone(),
        basis: spec.model.basis.clone(),
        dt: spec.grid.dt,
        replications: spec.mc.replications,
        base_seed: spec.mc.base_seed,
        alpha_error_log_slope: ls_slope(&xs, &ys),
        horizons,
        skipped,
        skip_fraction,
        warning,
    }
}

/// Writes the results file, the summary and the configuration echo into `dir`.
pub fn write_outputs(spec: &ExperimentSpec, outcome: &McOutcome, dir: &Path) -> Result<McSummary> {
    spec.echo_into(dir)?;
    let records = outcome.records();
    // the results file is the input of later stages, so it is always written
    write_results_file(&records, spec.model.mu.len(), &dir.join(RESULTS_FILE))?;
    let summary = summarize(spec, &records, outcome.skipped());
    if spec.writes(Format::Json) {
        write_json(&summary, &dir.join(SUMMARY_FILE))?;
    }
    Ok(summary)
}
