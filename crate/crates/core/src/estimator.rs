//! Joint least-squares estimator of `(mu, alpha)` from a continuously observed path.
//!
//! With `Lambda_n = U_n / n` and `gamma_n^{-1} = V_n / n - |Lambda_n|^2`,
//!
//! ```text
//! alpha_hat = gamma_n / n * (int X dX - sum_k Lambda_k int phi_k dX)
//! mu_hat_i  = (int phi_i dX + gamma_n Lambda_i sum_k Lambda_k int phi_k dX
//!              - gamma_n Lambda_i int X dX) / n
//! ```
//!
//! which is `Q_n^{-1} P_n` written out through the block inverse of
//! `Q_n = (n I_p, U_n; U_n^T, V_n)`. The same system is also solved directly
//! by LU as an independent route.
//!
//! Discretization: `int phi X ds` and `int X^2 ds` use the end-corrected
//! trapezoid rule of [`crate::quad`], `int phi dX` is taken by parts as
//! `phi(n) X_n - int X phi' ds` with the same rule, and `int X dX` uses the
//! closed forms `(X_n^2 - n) / 2` (Ito, `H = 1/2`) and `X_n^2 / 2` (Young,
//! `H > 1/2`).

use serde::{Deserialize, Serialize};

use crate::error::{FouError, Result};
use crate::fbm::Hurst;
use crate::linalg::{Lu, SquareMatrix};
use crate::periodic_basis::BasisFunction;
use crate::process::{steps_per_unit, ProcessPath};
use crate::quad::{gregory_product, stieltjes_by_parts};

/// Relative Bessel slack: `gamma_inv <= BESSEL_SLACK * V_n / n` is treated as degenerate.
pub const BESSEL_SLACK: f64 = 1e-8;
/// Largest condition number (of the equilibrated system) the matrix route accepts.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    ClosedForm,
    MatrixSolve,
}

/// Samples of an observed path on `[0, n]`, `n` an integer.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    x: &'a [f64],
    dt: f64,
    steps_per_unit: usize,
    horizon: usize,
}

impl<'a> Observation<'a> {
    pub fn new(x: &'a [f64], dt: f64) -> Result<Self> {
        let spu = steps_per_unit(dt)?;
        let steps = x.len().saturating_sub(1);
        if steps == 0 || !steps.is_multiple_of(spu) {
            return Err(FouError::Domain(format!(
                "observation covers {steps} steps of {dt}: horizon must be a positive integer"
            )));
        }
        Ok(Self {
            x,
            dt,
            steps_per_unit: spu,
            horizon: steps / spu,
        })
    }

    /// The first `horizon` time units of a simulated path.
    pub fn from_path(path: &'a ProcessPath, horizon: usize) -> Result<Self> {
        let spu = path.steps_per_unit()?;
        let steps = horizon * spu;
        if horizon == 0 || steps > path.steps() {
            return Err(FouError::Domain(format!(
                "horizon {horizon} outside simulated range [1, {}]",
                path.horizon()
            )));
        }
        Self::new(&path.x[..=steps], path.dt)
    }

    pub fn x(&self) -> &'a [f64] {
        self.x
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn endpoint(&self) -> f64 {
        *self.x.last().expect("non-empty observation")
    }
}

/// A basis function and its derivative sampled at `k dt`, `k = 0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisGrid {
    pub values: Vec<f64>,
    pub derivative: Vec<f64>,
}

impl BasisGrid {
    /// Tabulates one period and repeats it.
    pub fn new(phi: &BasisFunction, steps_per_unit: usize, steps: usize) -> Self {
        let at = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
            let period: Vec<f64> = (0..steps_per_unit)
                .map(|j| f(j as f64 / steps_per_unit as f64))
                .collect();
            (0..=steps).map(|k| period[k % steps_per_unit]).collect()
        };
        Self {
            values: at(&|t| phi.eval(t)),
            derivative: at(&|t| phi.derivative(t)),
        }
    }

    /// `int_0^n phi dg` for a path `g` sampled on the same grid.
    pub fn integrate(&self, g: &[f64], dt: f64) -> f64 {
        stieltjes_by_parts(&self.values, &self.derivative, g, dt)
    }
}

/// `int_0^n phi dX`.
pub fn int_phi_dx(x: &[f64], phi: &BasisGrid, dt: f64) -> f64 {
    phi.integrate(x, dt)
}

/// `int_0^n X dX` by the Ito formula (`H = 1/2`) or Young integration by parts.
pub fn int_x_dx(endpoint: f64, horizon: usize, hurst: Hurst) -> f64 {
    if hurst.is_brownian() {
        0.5 * (endpoint * endpoint - horizon as f64)
    } else {
        0.5 * endpoint * endpoint
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    pub n: usize,
    pub hurst: Hurst,
    /// `Lambda_{n,i} = (1/n) int_0^n phi_i X ds`
    pub lambda_n: Vec<f64>,
    /// `V_n = int_0^n X^2 ds`
    pub v_n: f64,
    /// `gamma_n^{-1} = V_n / n - |Lambda_n|^2`
    pub gamma_inv: f64,
    /// `int_0^n phi_i dX`
    pub phi_dx: Vec<f64>,
    /// `int_0^n X dX` per the `H` convention.
    pub x_dx: f64,
    /// `sum (X_{k+1} - X_k)^2`; equals `n` in the continuum when `H = 1/2`.
    pub realized_quadratic_variation: f64,
}

impl SufficientStats {
    pub fn dim(&self) -> usize {
        self.lambda_n.len()
    }

    /// `Q_n = (n I_p, n Lambda_n; n Lambda_n^T, V_n)`.
    pub fn q_matrix(&self) -> SquareMatrix {
        let p = self.dim();
        let n = self.n as f64;
        let mut q = SquareMatrix::identity(p + 1);
        for i in 0..p {
            q[(i, i)] = n;
            q[(i, p)] = n * self.lambda_n[i];
            q[(p, i)] = n * self.lambda_n[i];
        }
        q[(p, p)] = self.v_n;
        q
    }

    /// `P_n = (int phi_1 dX, ..., int phi_p dX, int X dX)`.
    pub fn p_vector(&self) -> Vec<f64> {
        let mut p = self.phi_dx.clone();
        p.push(self.x_dx);
        p
    }

    /// Largest `|(Q_n theta - P_n)_i| / max(|P_n|_inf, 1)`.
    pub fn normal_equation_residual(&self, mu: &[f64], alpha: f64) -> f64 {
        let mut theta = mu.to_vec();
        theta.push(alpha);
        let lhs = self.q_matrix().mul_vec(&theta);
        let rhs = self.p_vector();
        let scale = rhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        lhs.iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / scale
    }
}

/// Sufficient statistics of `obs` for `basis` under the `hurst` convention.
pub fn sufficient_stats(
    obs: &Observation<'_>,
    basis: &[BasisFunction],
    hurst: Hurst,
) -> Result<SufficientStats> {
    let x = obs.x();
    let dt = obs.dt();
    let n = obs.horizon();
    let nf = n as f64;
    let steps = x.len() - 1;

    let mut lambda_n = Vec::with_capacity(basis.len());
    let mut phi_dx = Vec::with_capacity(basis.len());
    for phi in basis {
        let grid = BasisGrid::new(phi, obs.steps_per_unit, steps);
        lambda_n.push(gregory_product(&grid.values, x, dt) / nf);
        phi_dx.push(int_phi_dx(x, &grid, dt));
    }
    let v_n = gregory_product(x, x, dt);
    let gamma_inv = v_n / nf - lambda_n.iter().map(|l| l * l).sum::<f64>();
    let threshold = BESSEL_SLACK * v_n / nf;
    if !(gamma_inv > threshold) {
        return Err(FouError::DegenerateDesign(format!(
            "gamma_inv = {gamma_inv:e} <= {threshold:e} at n = {n}"
        )));
    }
    let realized_quadratic_variation = x.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok(SufficientStats {
        n,
        hurst,
        lambda_n,
        v_n,
        gamma_inv,
        phi_dx,
        x_dx: int_x_dx(obs.endpoint(), n, hurst),
        realized_quadratic_variation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOutput {
    pub mu_hat: Vec<f64>,
    pub alpha_hat: f64,
    pub stats: SufficientStats,
    pub route: Route,
    /// 1-norm condition number of `Q_n`.
    pub condition: f64,
}

impl EstimatorOutput {
    pub fn hurst(&self) -> Hurst {
        self.stats.hurst
    }

    /// JSON-ready summary line.
    pub fn record(&self, seed: Option<u64>) -> EstimationRecord {
        EstimationRecord {
            n: self.stats.n,
            hurst: self.stats.hurst.value(),
            alpha_hat: self.alpha_hat,
            mu_hat: self.mu_hat.clone(),
            gamma_inv: self.stats.gamma_inv,
            condition: self.condition,
            route: self.route,
            seed,
        }
    }
}

/// One estimation result as written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationRecord {
    pub n: usize,
    #[serde(rename = "H")]
    pub hurst: f64,
    pub alpha_hat: f64,
    pub mu_hat: Vec<f64>,
    pub gamma_inv: f64,
    pub condition: f64,
    pub route: Route,
    pub seed: Option<u64>,
}

/// Explicit `Q_n^{-1}` from the block-inverse formula.
fn closed_form_inverse(stats: &SufficientStats) -> SquareMatrix {
    let p = stats.dim();
    let n = stats.n as f64;
    let gamma = 1.0 / stats.gamma_inv;
    let l = &stats.lambda_n;
    let mut inv = SquareMatrix::zeros(p + 1);
    for i in 0..p {
        for j in 0..p {
            inv[(i, j)] = (if i == j { 1.0 } else { 0.0 } + gamma * l[i] * l[j]) / n;
        }
        inv[(i, p)] = -gamma * l[i] / n;
        inv[(p, i)] = -gamma * l[i] / n;
    }
    inv[(p, p)] = gamma / n;
    inv
}

pub fn estimate_closed_form(stats: &SufficientStats) -> EstimatorOutput {
    let n = stats.n as f64;
    let gamma = 1.0 / stats.gamma_inv;
    let weighted: f64 = stats
        .lambda_n
        .iter()
        .zip(&stats.phi_dx)
        .map(|(l, i)| l * i)
        .sum();
    let alpha_hat = gamma / n * (stats.x_dx - weighted);
    let mu_hat = stats
        .lambda_n
        .iter()
        .zip(&stats.phi_dx)
        .map(|(l, i)| (i + gamma * l * weighted - gamma * l * stats.x_dx) / n)
        .collect();
    let condition = stats.q_matrix().norm1() * closed_form_inverse(stats).norm1();
    EstimatorOutput {
        mu_hat,
        alpha_hat,
        stats: stats.clone(),
        route: Route::ClosedForm,
        condition,
    }
}

/// Solves `Q_n theta = P_n` by LU with partial pivoting after symmetric
/// diagonal equilibration `D Q_n D`, `D = diag(n^{-1/2}, ..., V_n^{-1/2})`.
pub fn estimate_matrix(stats: &SufficientStats) -> Result<EstimatorOutput> {
    let q = stats.q_matrix();
    let dim = q.dim();
    let p = dim - 1;
    let mut d = vec![1.0 / (stats.n as f64).sqrt(); dim];
    d[p] = 1.0 / stats.v_n.sqrt();

    let mut scaled = q.clone();
    for i in 0..dim {
        for j in 0..dim {
            scaled[(i, j)] *= d[i] * d[j];
        }
    }
    let lu = Lu::decompose(&scaled).map_err(|e| FouError::DegenerateDesign(e.to_string()))?;
    let scaled_inv = lu.inverse();
    let scaled_condition = scaled.norm1() * scaled_inv.norm1();
    if !(scaled_condition < MAX_CONDITION) {
        return Err(FouError::DegenerateDesign(format!(
            "condition estimate {scaled_condition:e} of the equilibrated system"
        )));
    }
    let rhs: Vec<f64> = stats
        .p_vector()
        .iter()
        .zip(&d)
        .map(|(v, di)| v * di)
        .collect();
    let y = lu.solve(&rhs);
    let theta: Vec<f64> = y.iter().zip(&d).map(|(v, di)| v * di).collect();

    let mut q_inv = scaled_inv;
    for i in 0..dim {
        for j in 0..dim {
            q_inv[(i, j)] *= d[i] * d[j];
        }
    }
    Ok(EstimatorOutput {
        mu_hat: theta[..p].to_vec(),
        alpha_hat: theta[p],
        stats: stats.clone(),
        route: Route::MatrixSolve,
        condition: q.norm1() * q_inv.norm1(),
    })
}

/// Sufficient statistics followed by the requested route.
pub fn estimate(
    obs: &Observation<'_>,
    basis: &[BasisFunction],
    hurst: Hurst,
    route: Route,
) -> Result<EstimatorOutput> {
    let stats = sufficient_stats(obs, basis, hurst)?;
    match route {
        Route::ClosedForm => Ok(estimate_closed_form(&stats)),
        Route::MatrixSolve => estimate_matrix(&stats),
    }
}

/// Largest coordinate-wise relative gap between two estimates.
pub fn route_discrepancy(a: &EstimatorOutput, b: &EstimatorOutput) -> f64 {
    let rel = |x: f64, y: f64| {
        let scale = x.abs().max(y.abs());
        if scale == 0.0 {
            0.0
        } else {
            (x - y).abs() / scale
        }
    };
    a.mu_hat
        .iter()
        .zip(&b.mu_hat)
        .map(|(x, y)| rel(*x, *y))
        .fold(rel(a.alpha_hat, b.alpha_hat), f64::max)
}
