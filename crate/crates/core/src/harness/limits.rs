//! Distributional tests of the scaled estimation errors at the largest horizon.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{write_limit_sample, AlphaLimitLaw, MuLimitLaw, DEFAULT_LIMIT_DT};
use crate::error::{FouError, Result};
use crate::exec::Backend;
use crate::harness::config::{ExperimentSpec, Suite};
use crate::harness::io::write_json;
use crate::harness::mc::HorizonRecord;
use crate::harness::{KS_REPORT_FILE, LIMIT_DRAWS_FILE, LIMIT_LAW_FILE};
use crate::rng::derive_seed;
use crate::statkit::{ks_one_sample_normal, ks_two_sample, spearman, variance, KsResult};

/// p-values at or below this count as a rejection.
pub const P_THRESHOLD: f64 = 0.01;
/// Replication index reserved for the limit-law draws.
const LIMIT_SEED_INDEX: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaLimitCheck {
    pub ks: KsResult,
    pub law: AlphaLimitLaw,
    pub draws: usize,
    pub redraws: usize,
    pub tail_sd_bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuLimitCheck {
    /// Zero-based coordinate of `mu`.
    pub component: usize,
    pub variance: f64,
    pub ks: KsResult,
    pub pass: bool,
}

/// Variance of `n^{1-H}(mu_hat_i - mu_i)` across horizons for a coordinate with `D_ii = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkageCheck {
    pub component: usize,
    pub horizons: Vec<usize>,
    pub variances: Vec<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceCheck {
    pub component: usize,
    pub spearman: f64,
    pub standard_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub horizon: usize,
    pub replications: usize,
    pub alpha_limit: Option<AlphaLimitCheck>,
    pub mu_limit: Option<MuLimitCheck>,
    pub shrinkage: Vec<ShrinkageCheck>,
    pub independence: Option<IndependenceCheck>,
}

impl LimitReport {
    pub fn pass(&self) -> bool {
        self.alpha_limit.as_ref().is_none_or(|c| c.pass)
            && self.mu_limit.as_ref().is_none_or(|c| c.pass)
            && self.shrinkage.iter().all(|c| c.pass)
            && self.independence.as_ref().is_none_or(|c| c.pass)
    }
}

fn column(records: &[&HorizonRecord], f: impl Fn(&HorizonRecord) -> f64) -> Vec<f64> {
    records.iter().map(|r| f(r)).collect()
}

/// Runs the configured suites on `records` from a completed Monte Carlo run.
pub fn run_limit_tests(
    spec: &ExperimentSpec,
    records: &[HorizonRecord],
    backend: Backend,
) -> Result<(LimitReport, Vec<f64>)> {
    let horizon = spec.max_horizon();
    let at: Vec<&HorizonRecord> = records.iter().filter(|r| r.n == horizon).collect();
    if at.is_empty() {
        return Err(FouError::Usage(format!(
            "no Monte Carlo results at horizon {horizon}; run `mc` first"
        )));
    }
    let drift = spec.drift()?;
    let mu_law = MuLimitLaw::new(drift.basis());
    let wanted = |s: Suite| spec.tests.suites.contains(&s);
    let principal = mu_law.non_degenerate().first().copied();

    let mut draws = Vec::new();
    let alpha_limit = if wanted(Suite::AlphaLimit) {
        let law = match spec.tests.truncation {
            Some(t) => AlphaLimitLaw::with_truncation(
                &drift,
                spec.model.alpha,
                spec.hurst(),
                t,
                DEFAULT_LIMIT_DT,
            )?,
            None => AlphaLimitLaw::new(&drift, spec.model.alpha, spec.hurst())?,
        };
        let sample = law.sample(
            spec.tests.limit_draws,
            derive_seed(spec.mc.base_seed, LIMIT_SEED_INDEX),
            backend,
        )?;
        let ks = ks_two_sample(&column(&at, |r| r.err_alpha_scaled), &sample.values)?;
        draws = sample.values;
        Some(AlphaLimitCheck {
            ks,
            law,
            draws: draws.len(),
            redraws: sample.redraws,
            tail_sd_bound: sample.tail_sd_bound,
            pass: ks.p_value > P_THRESHOLD,
        })
    } else {
        None
    };

    let mut shrinkage = Vec::new();
    let mu_limit = if wanted(Suite::MuLimit) {
        for i in (0..drift.dim()).filter(|&i| mu_law.d[(i, i)] == 0.0) {
            let horizons = spec.horizons();
            let variances: Vec<f64> = horizons
                .iter()
                .map(|n| {
                    let v: Vec<f64> = records
                        .iter()
                        .filter(|r| r.n == *n)
                        .map(|r| r.err_mu_scaled[i])
                        .collect();
                    if v.len() > 1 {
                        variance(&v)
                    } else {
                        f64::NAN
                    }
                })
                .collect();
            let pass = variances.len() > 1 && variances.last() < variances.first();
            shrinkage.push(ShrinkageCheck {
                component: i,
                horizons,
                variances,
                pass,
            });
        }
        match principal {
            Some(i) => {
                let var = mu_law.d[(i, i)];
                let ks =
                    ks_one_sample_normal(&column(&at, |r| r.err_mu_scaled[i]), 0.0, var.sqrt())?;
                Some(MuLimitCheck {
                    component: i,
                    variance: var,
                    ks,
                    pass: ks.p_value > P_THRESHOLD,
                })
            }
            None => None,
        }
    } else {
        None
    };

    let independence = if wanted(Suite::Independence) && at.len() > 2 {
        let i = principal.unwrap_or(0);
        let rho = spearman(
            &column(&at, |r| r.err_alpha_scaled),
            &column(&at, |r| r.err_mu_scaled[i]),
        );
        let se = 1.0 / ((at.len() - 1) as f64).sqrt();
        Some(IndependenceCheck {
            component: i,
            spearman: rho,
            standard_error: se,
            pass: rho.abs() <= 3.0 * se,
        })
    } else {
        None
    };

    Ok((
        LimitReport {
            horizon,
            replications: at.len(),
            alpha_limit,
            mu_limit,
            shrinkage,
            independence,
        },
        draws,
    ))
}

/// Writes the KS report, the limit draws and the law metadata into `dir`.
pub fn write_limit_outputs(report: &LimitReport, draws: &[f64], dir: &Path) -> Result<()> {
    write_json(report, &dir.join(KS_REPORT_FILE))?;
    if let Some(check) = &report.alpha_limit {
        write_json(&check.law, &dir.join(LIMIT_LAW_FILE))?;
        write_limit_sample(
            draws,
            BufWriter::new(File::create(dir.join(LIMIT_DRAWS_FILE))?),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::mc::run_mc;

    fn spec(basis: &str, mu: &str) -> ExperimentSpec {
        ExperimentSpec::from_toml(&format!(
            r#"
[model]
basis = {basis}
mu = {mu}
alpha = 0.8
H = 0.6
[grid]
dt = 0.00390625
horizons = [3, 8]
[mc]
replications = 60
base_seed = 11
[tests]
limit_draws = 200
"#
        ))
        .unwrap()
    }

    #[test]
    fn requires_results_at_largest_horizon() {
        let s = spec(r#"["constant"]"#, "[1.0]");
        assert!(matches!(
            run_limit_tests(&s, &[], Backend::Sequential),
            Err(FouError::Usage(_))
        ));
    }

    #[test]
    fn suites_run_and_report() {
        let s = spec(r#"["constant", "cos:1"]"#, "[1.0, 0.5]");
        let out = run_mc(&s, Backend::Parallel).unwrap();
        let (report, draws) = run_limit_tests(&s, &out.records(), Backend::Parallel).unwrap();
        assert_eq!(report.horizon, 8);
        assert_eq!(draws.len(), 200);
        assert_eq!(report.mu_limit.as_ref().unwrap().component, 0);
        assert_eq!(report.shrinkage.len(), 1);
        assert_eq!(report.shrinkage[0].component, 1);
        assert!(report.independence.is_some());
        let dir = tempfile::tempdir().unwrap();
        write_limit_outputs(&report, &draws, dir.path()).unwrap();
        for f in [KS_REPORT_FILE, LIMIT_LAW_FILE, LIMIT_DRAWS_FILE] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }

    #[test]
    fn zero_mean_basis_replaces_ks_by_shrinkage() {
        let s = spec(r#"["cos:1", "sin:1"]"#, "[0.7, -0.2]");
        let out = run_mc(&s, Backend::Parallel).unwrap();
        let (report, _) = run_limit_tests(&s, &out.records(), Backend::Parallel).unwrap();
        assert!(report.mu_limit.is_none());
        assert_eq!(report.shrinkage.len(), 2);
        assert!(
            report.shrinkage.iter().all(|c| c.pass),
            "{:?}",
            report.shrinkage
        );
    }
}
