//! Gamma function, Kolmogorov-Smirnov tests and small empirical summaries.

use serde::{Deserialize, Serialize};

use crate::error::{FouError, Result};

/// Smallest sample accepted by the KS tests.
pub const KS_MIN_SAMPLE: usize = 30;

/// `Gamma(x)` for `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(FouError::Domain(format!("gamma_fn needs x > 0, got {x}")));
    }
    Ok(libm::tgamma(x))
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    /// Zero for one-sample tests.
    pub n2: usize,
}

/// Asymptotic Kolmogorov tail `P(K > lambda)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series, fast for small lambda
        let y = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let w = y.exp();
        let s: f64 = (0..6).map(|j| w.powi((2 * j + 1) * (2 * j + 1))).sum();
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / lambda * s;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for j in 1..=100 {
            let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
            sum += if j % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

fn ks_p_value(d: f64, effective: f64) -> f64 {
    if d == 0.0 {
        return 1.0;
    }
    let root = effective.sqrt();
    kolmogorov_survival((root + 0.12 + 0.11 / root) * d)
}

fn check_sample(x: &[f64], what: &str) -> Result<Vec<f64>> {
    if x.len() < KS_MIN_SAMPLE {
        return Err(FouError::Domain(format!(
            "{what} has {} values, KS needs at least {KS_MIN_SAMPLE}",
            x.len()
        )));
    }
    if x.iter().any(|v| v.is_nan()) {
        return Err(FouError::Domain(format!("{what} contains NaN")));
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let a = check_sample(a, "first sample")?;
    let b = check_sample(b, "second sample")?;
    let (n1, n2) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        let t = a[i].min(b[j]);
        while i < n1 && a[i] <= t {
            i += 1;
        }
        while j < n2 && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let effective = (n1 * n2) as f64 / (n1 + n2) as f64;
    Ok(KsResult {
        statistic: d,
        p_value: ks_p_value(d, effective),
        n1,
        n2,
    })
}

pub fn ks_one_sample_normal(a: &[f64], mean: f64, sd: f64) -> Result<KsResult> {
    if !(sd > 0.0) || !sd.is_finite() || !mean.is_finite() {
        return Err(FouError::Domain(format!(
            "normal reference needs sd > 0, got {sd}"
        )));
    }
    let a = check_sample(a, "sample")?;
    let n = a.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in a.iter().enumerate() {
        let f = normal_cdf((x - mean) / sd);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult {
        statistic: d,
        p_value: ks_p_value(d, n),
        n1: a.len(),
        n2: 0,
    })
}

/// Linear-interpolation quantile (type 7) of `x`.
pub fn quantile(x: &[f64], q: f64) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, q)
}

pub fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn median(x: &[f64]) -> f64 {
    quantile(x, 0.5)
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut r = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        let avg = (start + end - 1) as f64 / 2.0 + 1.0;
        for &k in &idx[start..end] {
            r[k] = avg;
        }
        start = end;
    }
    r
}

/// Spearman rank correlation (Pearson on mid-ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

impl Summary {
    pub fn of(x: &[f64]) -> Self {
        let mut v = x.to_vec();
        v.sort_by(f64::total_cmp);
        Self {
            count: v.len(),
            mean: mean(&v),
            sd: if v.len() > 1 {
                variance(&v).sqrt()
            } else {
                0.0
            },
            median: quantile_sorted(&v, 0.5),
            q25: quantile_sorted(&v, 0.25),
            q75: quantile_sorted(&v, 0.75),
        }
    }

    pub fn iqr(&self) -> f64 {
        self.q75 - self.q25
    }
}
