//! Limit laws of the estimator and numerical checks of the identities behind them.
//!
//! `e^{alpha n}(alpha_hat - alpha)` converges to `2 alpha N1 / (A_inf + alpha Z_inf)`
//! with `N1 ~ N(0, sigma_H^2)`, `sigma_H^2 = H Gamma(2H) / alpha^{2H}`, independent of
//! `Z_inf`, and `n^{1-H}(mu_hat - mu)` to `N(0, D)` with `D = m m^T`, `m_i = int_0^1 phi_i`.

use std::io::Write;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{FouError, Result};
use crate::estimator::{estimate_closed_form, sufficient_stats, BasisGrid, Observation};
use crate::exec::{map_indexed, Backend};
use crate::fbm::{FgnGenerator, Hurst};
use crate::linalg::SquareMatrix;
use crate::periodic_basis::{BasisFunction, PeriodicDrift};
use crate::process::{ProcessPath, ZInfinitySampler};
use crate::quad::{cumulative_gregory, gregory, stieltjes_left};
use crate::rng::{derive_seed, stream, Purpose};
use crate::statkit::gamma_fn;

/// Denominators smaller than this are redrawn.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;
/// Default grid step for `Z_inf` draws.
pub const DEFAULT_LIMIT_DT: f64 = 1.0 / 256.0;

/// `sigma_H^2 = H Gamma(2H) / alpha^{2H}`.
pub fn sigma_h2(hurst: Hurst, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(FouError::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let h = hurst.value();
    Ok(h * gamma_fn(2.0 * h)? / alpha.powf(2.0 * h))
}

/// `D_ij = (int_0^1 phi_i)(int_0^1 phi_j)`.
pub fn d_matrix(basis: &[BasisFunction]) -> SquareMatrix {
    let m: Vec<f64> = basis.iter().map(BasisFunction::mean).collect();
    let mut d = SquareMatrix::zeros(m.len());
    for i in 0..m.len() {
        for j in 0..m.len() {
            d[(i, j)] = m[i] * m[j];
        }
    }
    d
}

/// Gaussian limit of `n^{1-H}(mu_hat - mu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MuLimitLaw {
    pub d: SquareMatrix,
}

impl MuLimitLaw {
    pub fn new(basis: &[BasisFunction]) -> Self {
        Self { d: d_matrix(basis) }
    }

    /// Coordinates whose limit variance `D_ii` is positive.
    pub fn non_degenerate(&self) -> Vec<usize> {
        (0..self.d.dim())
            .filter(|&i| self.d[(i, i)] > 0.0)
            .collect()
    }
}

/// Ratio law `2 alpha N1 / (A_inf + alpha Z_inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaLimitLaw {
    pub alpha: f64,
    #[serde(rename = "H")]
    pub hurst: Hurst,
    #[serde(rename = "A_inf")]
    pub a_inf: f64,
    #[serde(rename = "sigma_H2")]
    pub sigma_h2: f64,
    #[serde(rename = "T_trunc")]
    pub truncation: f64,
    pub dt: f64,
}

/// Draws from [`AlphaLimitLaw::sample`].
#[derive(Debug, Clone, PartialEq)]
pub struct LimitSample {
    pub values: Vec<f64>,
    /// Number of draws repeated because the denominator hit the floor.
    pub redraws: usize,
    pub tail_sd_bound: f64,
}

impl AlphaLimitLaw {
    /// Law with exact `A_inf` and default truncation `max(20, 12/alpha)`, `dt = 2^-8`.
    pub fn new(drift: &PeriodicDrift, alpha: f64, hurst: Hurst) -> Result<Self> {
        Self::with_truncation(
            drift,
            alpha,
            hurst,
            (12.0 / alpha).max(20.0),
            DEFAULT_LIMIT_DT,
        )
    }

    pub fn with_truncation(
        drift: &PeriodicDrift,
        alpha: f64,
        hurst: Hurst,
        truncation: f64,
        dt: f64,
    ) -> Result<Self> {
        let a_inf = drift.functionals(alpha)?.a_inf;
        Ok(Self {
            alpha,
            hurst,
            a_inf,
            sigma_h2: sigma_h2(hurst, alpha)?,
            truncation,
            dt,
        })
    }

    /// Same law with `A_inf` replaced by a plug-in value (e.g. from an estimated drift).
    pub fn with_a_inf(&self, a_inf: f64) -> Self {
        Self {
            a_inf,
            ..self.clone()
        }
    }

    pub fn sampler(&self) -> Result<ZInfinitySampler> {
        ZInfinitySampler::new(self.hurst, self.alpha, self.truncation, self.dt)
    }

    /// `count` i.i.d. draws; draw `i` depends only on `(seed, i)`.
    pub fn sample(&self, count: usize, seed: u64, backend: Backend) -> Result<LimitSample> {
        if count == 0 {
            return Err(FouError::Domain("limit sample needs count >= 1".into()));
        }
        let sampler = self.sampler()?;
        let sd = self.sigma_h2.sqrt();
        let draws = map_indexed(count, backend, |i| {
            let item_seed = derive_seed(seed, i as u64);
            let mut numerator_rng = stream(item_seed, Purpose::LimitNumerator);
            let z: f64 = StandardNormal.sample(&mut numerator_rng);
            let n1 = sd * z;
            let mut redraws = 0;
            loop {
                let z_seed = derive_seed(
                    item_seed ^ (Purpose::LimitDenominator as u64),
                    redraws as u64,
                );
                let denominator = self.a_inf + self.alpha * sampler.draw(z_seed).value;
                if denominator.abs() >= DENOMINATOR_FLOOR {
                    return (2.0 * self.alpha * n1 / denominator, redraws);
                }
                redraws += 1;
            }
        });
        Ok(LimitSample {
            redraws: draws.iter().map(|d| d.1).sum(),
            values: draws.into_iter().map(|d| d.0).collect(),
            tail_sd_bound: sampler.tail_sd_bound(),
        })
    }

    pub fn metadata_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| FouError::Numerical(e.to_string()))
    }
}

/// CSV dump with header `draw_index,value`.
pub fn write_limit_sample<W: Write>(values: &[f64], mut out: W) -> Result<()> {
    writeln!(out, "draw_index,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i},{v:.16e}")?;
    }
    Ok(())
}

fn observed(path: &ProcessPath) -> Result<(Observation<'_>, usize)> {
    let spu = path.steps_per_unit()?;
    let n = path.steps() / spu;
    if n == 0 || n * spu != path.steps() {
        return Err(FouError::Domain(format!(
            "path horizon {} is not a positive integer",
            path.horizon()
        )));
    }
    Ok((Observation::new(&path.x, path.dt)?, n))
}

/// `int_0^n e^{alpha s} dB_s` by left Riemann sums.
pub fn exp_weighted_noise_integral(b: &[f64], dt: f64, alpha: f64) -> f64 {
    let weights: Vec<f64> = (0..b.len())
        .map(|k| (alpha * k as f64 * dt).exp())
        .collect();
    stieltjes_left(&weights, b)
}

/// Terms of the remainder `S_n` in
/// `X_n^2/2 - sum_k Lambda_k int phi_k dX = n alpha gamma_n^{-1} + (A_inf + alpha Z_n) int_0^n e^{alpha s} dB + S_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionTerms {
    pub lhs: f64,
    pub drift_part: f64,
    pub noise_part: f64,
    pub s_n: f64,
}

impl DecompositionTerms {
    pub fn rhs(&self) -> f64 {
        self.drift_part + self.noise_part + self.s_n
    }

    /// `|LHS - RHS| / (1 + |LHS|)`.
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs()).abs() / (1.0 + self.lhs.abs())
    }
}

/// Evaluates both sides of the path decomposition of the `alpha_hat` numerator.
///
/// With `R_s = A_s - A_inf`,
/// `S_n = B_n^2/2 + e^{alpha n} R_n B_n - int L B - alpha int B^2 - sum_k Lambda_k int phi_k dB
///        - alpha int e^{alpha s} B R ds + alpha^2 int e^{-alpha s} B_s (int_0^s e^{alpha r} B_r dr) ds`.
pub fn decomposition_terms(path: &ProcessPath) -> Result<DecompositionTerms> {
    let hurst = path.hurst();
    if hurst.is_brownian() {
        return Err(FouError::Domain(
            "decomposition is stated for H > 1/2".into(),
        ));
    }
    let (obs, n) = observed(path)?;
    let drift = &path.drift;
    let alpha = path.alpha;
    let dt = path.dt;
    let b = &path.bh.values;
    let stats = sufficient_stats(&obs, drift.basis(), hurst)?;
    let a_inf = drift.functionals(alpha)?.a_inf;

    let lhs = stats.x_dx
        - stats
            .lambda_n
            .iter()
            .zip(&stats.phi_dx)
            .map(|(l, i)| l * i)
            .sum::<f64>();
    let drift_part = n as f64 * alpha * stats.gamma_inv;
    let z_n = *path.z.last().expect("non-empty path");
    let noise_part = (a_inf + alpha * z_n) * exp_weighted_noise_integral(b, dt, alpha);

    let times: Vec<f64> = (0..b.len()).map(|k| k as f64 * dt).collect();
    let b_n = *b.last().expect("non-empty path");
    let nf = n as f64;
    let r_n = drift.discounted_integral(alpha, nf) - a_inf;

    let lb: Vec<f64> = times
        .iter()
        .zip(b)
        .map(|(t, bk)| drift.eval(*t) * bk)
        .collect();
    let bb: Vec<f64> = b.iter().map(|v| v * v).collect();
    let ebr: Vec<f64> = times
        .iter()
        .zip(b)
        .map(|(t, bk)| (alpha * t).exp() * bk * (drift.discounted_integral(alpha, *t) - a_inf))
        .collect();
    let eb: Vec<f64> = times
        .iter()
        .zip(b)
        .map(|(t, bk)| (alpha * t).exp() * bk)
        .collect();
    let inner = cumulative_gregory(&eb, dt);
    let nested: Vec<f64> = times
        .iter()
        .zip(b)
        .zip(&inner)
        .map(|((t, bk), c)| (-alpha * t).exp() * bk * c)
        .collect();
    let spu = path.steps_per_unit()?;
    let lambda_noise: f64 = drift
        .basis()
        .iter()
        .zip(&stats.lambda_n)
        .map(|(phi, l)| l * BasisGrid::new(phi, spu, path.steps()).integrate(b, dt))
        .sum();

    let s_n = 0.5 * b_n * b_n + (alpha * nf).exp() * r_n * b_n
        - gregory(&lb, dt)
        - alpha * gregory(&bb, dt)
        - lambda_noise
        - alpha * gregory(&ebr, dt)
        + alpha * alpha * gregory(&nested, dt);

    Ok(DecompositionTerms {
        lhs,
        drift_part,
        noise_part,
        s_n,
    })
}

/// Relative residual of the decomposition on `path`.
pub fn decomposition_residual(path: &ProcessPath) -> Result<f64> {
    Ok(decomposition_terms(path)?.residual())
}

/// Outcome of checking `mu_hat - mu = (alpha - alpha_hat) Lambda_n + G_n / n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRepresentation {
    pub mu_error: Vec<f64>,
    pub represented: Vec<f64>,
    /// `G_{n,i} = int_0^n phi_i dB`.
    pub g_n: Vec<f64>,
    pub discrepancy: f64,
}

/// Compares the estimator error with its representation through the driving noise.
pub fn error_representation_check(path: &ProcessPath, hurst: Hurst) -> Result<ErrorRepresentation> {
    let (obs, n) = observed(path)?;
    let drift = &path.drift;
    let stats = sufficient_stats(&obs, drift.basis(), hurst)?;
    let est = estimate_closed_form(&stats);
    let spu = path.steps_per_unit()?;
    let g_n: Vec<f64> = drift
        .basis()
        .iter()
        .map(|phi| BasisGrid::new(phi, spu, path.steps()).integrate(&path.bh.values, path.dt))
        .collect();
    let nf = n as f64;
    let mu_error: Vec<f64> = est
        .mu_hat
        .iter()
        .zip(drift.mu())
        .map(|(a, b)| a - b)
        .collect();
    let represented: Vec<f64> = stats
        .lambda_n
        .iter()
        .zip(&g_n)
        .map(|(l, g)| (path.alpha - est.alpha_hat) * l + g / nf)
        .collect();
    let discrepancy = mu_error
        .iter()
        .zip(&represented)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(ErrorRepresentation {
        mu_error,
        represented,
        g_n,
        discrepancy,
    })
}

/// Monte Carlo estimate of `E[(e^{-alpha n} int_0^n e^{alpha s} dB)^2]`, which tends to `sigma_H^2`.
pub fn discounted_noise_second_moment(
    hurst: Hurst,
    alpha: f64,
    n: usize,
    dt: f64,
    replications: usize,
    seed: u64,
    backend: Backend,
) -> Result<f64> {
    let steps = (n as f64 / dt).round() as usize;
    let generator = FgnGenerator::new(hurst, steps, dt)?;
    let scale = (-alpha * n as f64).exp();
    let squares = map_indexed(replications, backend, |r| {
        let b = generator.path(derive_seed(seed, r as u64));
        (scale * exp_weighted_noise_integral(&b.values, dt, alpha)).powi(2)
    });
    Ok(squares.iter().sum::<f64>() / replications as f64)
}
