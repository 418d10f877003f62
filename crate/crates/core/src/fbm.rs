//! Fractional Brownian motion on uniform grids.
//!
//! Increments (fractional Gaussian noise) are drawn by circulant embedding
//! of the stationary autocovariance, with a Cholesky factorization of the
//! full covariance as fallback for short grids.

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{FouError, Result};
use crate::rng::{self, Purpose};

/// Relative tolerance under which negative embedding eigenvalues are clamped to zero.
pub const EMBEDDING_CLAMP: f64 = 1e-9;
/// Largest grid the Cholesky generator accepts.
pub const CHOLESKY_MAX_STEPS: usize = 4096;

/// Hurst index restricted to `[1/2, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Hurst(f64);

impl Hurst {
    pub fn new(h: f64) -> Result<Self> {
        if (0.5..1.0).contains(&h) {
            Ok(Self(h))
        } else {
            Err(FouError::Domain(format!(
                "Hurst index must lie in [0.5, 1), got {h}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Standard Brownian motion.
    pub fn is_brownian(self) -> bool {
        self.0 == 0.5
    }
}

impl TryFrom<f64> for Hurst {
    type Error = FouError;
    fn try_from(h: f64) -> Result<Self> {
        Self::new(h)
    }
}

impl From<Hurst> for f64 {
    fn from(h: Hurst) -> f64 {
        h.0
    }
}

/// `E[B_s B_t] = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2`.
pub fn fbm_covariance(s: f64, t: f64, hurst: Hurst) -> f64 {
    let two_h = 2.0 * hurst.value();
    0.5 * (s.powf(two_h) + t.powf(two_h) - (t - s).abs().powf(two_h))
}

/// Autocovariance of fGn increments at `lag` for step `dt`.
pub fn fgn_autocovariance(lag: usize, hurst: Hurst, dt: f64) -> f64 {
    let two_h = 2.0 * hurst.value();
    let j = lag as f64;
    let core = if lag == 0 {
        1.0
    } else {
        0.5 * ((j + 1.0).powf(two_h) + (j - 1.0).powf(two_h) - 2.0 * j.powf(two_h))
    };
    dt.powf(two_h) * core
}

fn check_grid(steps: usize, dt: f64) -> Result<()> {
    if steps == 0 {
        return Err(FouError::Domain("grid needs at least one step".into()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(FouError::Domain(format!("step must be positive, got {dt}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FgnMethod {
    CirculantEmbedding,
    Cholesky,
}

/// Circulant-embedding sampler with precomputed spectrum and FFT plan.
pub struct CirculantFgn {
    steps: usize,
    /// `sqrt(lambda_j / M)` for the `M = 2 * steps` circulant eigenvalues.
    scaled_root_spectrum: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl CirculantFgn {
    pub fn new(hurst: Hurst, steps: usize, dt: f64) -> Result<Self> {
        check_grid(steps, dt)?;
        let size = 2 * steps;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(size);

        // first row: gamma(0..=m), gamma(m-1..=1)
        let mut row: Vec<Complex64> = (0..size)
            .map(|j| {
                let lag = if j <= steps { j } else { size - j };
                Complex64::new(fgn_autocovariance(lag, hurst, dt), 0.0)
            })
            .collect();
        fft.process(&mut row);

        let max = row.iter().fold(f64::NEG_INFINITY, |m, c| m.max(c.re));
        let min = row.iter().fold(f64::INFINITY, |m, c| m.min(c.re));
        if min < -EMBEDDING_CLAMP * max {
            return Err(FouError::EmbeddingFailure {
                min_eigenvalue: min,
                max_eigenvalue: max,
            });
        }
        let scaled_root_spectrum = row
            .iter()
            .map(|c| (c.re.max(0.0) / size as f64).sqrt())
            .collect();
        Ok(Self {
            steps,
            scaled_root_spectrum,
            fft,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Real part of `FFT(sqrt(lambda / M) * (a + i b))` has exactly the target covariance.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut buf: Vec<Complex64> = self
            .scaled_root_spectrum
            .iter()
            .map(|s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut buf);
        buf.truncate(self.steps);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// Cholesky sampler over the full `m x m` increment covariance.
pub struct CholeskyFgn {
    steps: usize,
    /// Row-major lower factor.
    lower: Vec<f64>,
}

/// Toeplitz covariance matrix (row-major) of `steps` fGn increments.
pub fn fgn_covariance_matrix(hurst: Hurst, steps: usize, dt: f64) -> Vec<f64> {
    let acov: Vec<f64> = (0..steps)
        .map(|j| fgn_autocovariance(j, hurst, dt))
        .collect();
    let mut cov = vec![0.0; steps * steps];
    for i in 0..steps {
        for j in 0..steps {
            cov[i * steps + j] = acov[i.abs_diff(j)];
        }
    }
    cov
}

impl CholeskyFgn {
    pub fn new(hurst: Hurst, steps: usize, dt: f64) -> Result<Self> {
        check_grid(steps, dt)?;
        if steps > CHOLESKY_MAX_STEPS {
            return Err(FouError::Domain(format!(
                "Cholesky generator limited to {CHOLESKY_MAX_STEPS} steps, got {steps}"
            )));
        }
        let cov = fgn_covariance_matrix(hurst, steps, dt);
        let lower = cholesky(&cov, steps)?;
        Ok(Self { steps, lower })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let m = self.steps;
        let z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        (0..m)
            .map(|i| {
                let row = &self.lower[i * m..i * m + i + 1];
                row.iter().zip(&z).map(|(l, zk)| l * zk).sum()
            })
            .collect()
    }
}

/// Dense Cholesky factorization `A = L L^T` of a row-major SPD matrix.
fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            let v = a[i * n + j] - dot;
            if i == j {
                if v <= 0.0 || !v.is_finite() {
                    return Err(FouError::Numerical(format!(
                        "covariance not positive definite at pivot {i} ({v:e})"
                    )));
                }
                l[i * n + i] = v.sqrt();
            } else {
                l[i * n + j] = v / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// fGn sampler with a fixed method, reusable across seeds.
pub struct FgnGenerator {
    hurst: Hurst,
    dt: f64,
    inner: Inner,
}

enum Inner {
    Circulant(CirculantFgn),
    Cholesky(CholeskyFgn),
}

impl FgnGenerator {
    /// Circulant embedding, falling back to Cholesky if the embedding fails.
    pub fn new(hurst: Hurst, steps: usize, dt: f64) -> Result<Self> {
        match CirculantFgn::new(hurst, steps, dt) {
            Ok(c) => Ok(Self {
                hurst,
                dt,
                inner: Inner::Circulant(c),
            }),
            Err(FouError::EmbeddingFailure { .. }) => {
                Self::with_method(hurst, steps, dt, FgnMethod::Cholesky)
            }
            Err(e) => Err(e),
        }
    }

    pub fn with_method(hurst: Hurst, steps: usize, dt: f64, method: FgnMethod) -> Result<Self> {
        let inner = match method {
            FgnMethod::CirculantEmbedding => Inner::Circulant(CirculantFgn::new(hurst, steps, dt)?),
            FgnMethod::Cholesky => Inner::Cholesky(CholeskyFgn::new(hurst, steps, dt)?),
        };
        Ok(Self { hurst, dt, inner })
    }

    pub fn method(&self) -> FgnMethod {
        match self.inner {
            Inner::Circulant(_) => FgnMethod::CirculantEmbedding,
            Inner::Cholesky(_) => FgnMethod::Cholesky,
        }
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        match &self.inner {
            Inner::Circulant(c) => c.steps(),
            Inner::Cholesky(c) => c.steps(),
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.inner {
            Inner::Circulant(c) => c.sample(rng),
            Inner::Cholesky(c) => c.sample(rng),
        }
    }

    /// Increments drawn from the fBm stream of `seed`.
    pub fn increments(&self, seed: u64) -> Vec<f64> {
        self.sample_with(&mut rng::stream(seed, Purpose::Fbm))
    }

    pub fn path(&self, seed: u64) -> FbmPath {
        FbmPath::from_increments(self.hurst, self.dt, &self.increments(seed), seed)
    }
}

/// `steps` fGn increments for `seed`, circulant embedding with Cholesky fallback.
pub fn generate_fgn(hurst: Hurst, steps: usize, dt: f64, seed: u64) -> Result<Vec<f64>> {
    Ok(FgnGenerator::new(hurst, steps, dt)?.increments(seed))
}

pub fn generate_fbm_path(hurst: Hurst, steps: usize, dt: f64, seed: u64) -> Result<FbmPath> {
    Ok(FgnGenerator::new(hurst, steps, dt)?.path(seed))
}

/// A sampled fBm path `B_{k dt}`, `k = 0..=steps`, with `values[0] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbmPath {
    pub hurst: Hurst,
    pub dt: f64,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl FbmPath {
    pub fn from_increments(hurst: Hurst, dt: f64, increments: &[f64], seed: u64) -> Self {
        let mut values = Vec::with_capacity(increments.len() + 1);
        let mut acc = 0.0;
        values.push(acc);
        for dx in increments {
            acc += dx;
            values.push(acc);
        }
        Self {
            hurst,
            dt,
            values,
            seed,
        }
    }

    /// The identically-zero path; used for noiseless runs.
    pub fn zero(hurst: Hurst, steps: usize, dt: f64) -> Self {
        Self {
            hurst,
            dt,
            values: vec![0.0; steps + 1],
            seed: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.steps())
    }

    /// Every `factor`-th point; the coarse path is the same trajectory on a coarser grid.
    pub fn decimate(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.steps().is_multiple_of(factor) {
            return Err(FouError::Domain(format!(
                "cannot decimate {} steps by {factor}",
                self.steps()
            )));
        }
        Ok(Self {
            hurst: self.hurst,
            dt: self.dt * factor as f64,
            values: self.values.iter().step_by(factor).copied().collect(),
            seed: self.seed,
        })
    }

    /// First `steps` steps.
    pub fn truncate(&self, steps: usize) -> Self {
        let mut p = self.clone();
        p.values.truncate(steps + 1);
        p
    }

    /// CSV dump with header `t,BH`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,BH")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.time(k), v)?;
        }
        Ok(())
    }
}

/// `int_T^inf e^{-alpha s} s^H ds`, the standard-deviation bound on a truncated discounted integral.
pub fn discounted_tail_bound(alpha: f64, hurst: Hurst, horizon: f64) -> f64 {
    let h = hurst.value();
    // integrand decays like e^{-alpha s}; 60/alpha past the horizon is far below f64 resolution
    let upper = horizon + 60.0 / alpha;
    crate::quad::simpson(|s| (-alpha * s).exp() * s.powf(h), horizon, upper, 20_000)
}
