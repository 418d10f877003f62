//! The periodic drift `L(t) = sum_i mu_i phi_i(t)` and its deterministic functionals.
//!
//! Built-in basis functions are the normalized Fourier family
//! `{1, sqrt(2) cos(2 pi k t), sqrt(2) sin(2 pi k t)}`, for which every
//! integral needed downstream has a closed form. Tabulated functions are
//! interpolated piecewise-linearly and integrated by Simpson's rule.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FouError, Result};
use crate::quad::simpson;

/// Finest Simpson step used for tabulated kinds.
const SIMPSON_INTERVALS_PER_UNIT: usize = 1 << 12;

/// Samples of a 1-periodic function at `j / len`, `j = 0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PeriodicTable(Vec<f64>);

impl PeriodicTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(FouError::Config(
                "tabulated basis function has an empty table".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FouError::Config(
                "tabulated basis function has non-finite values".into(),
            ));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    fn eval_unit(&self, u: f64) -> f64 {
        let n = self.0.len();
        let x = u * n as f64;
        let j = (x.floor() as usize).min(n - 1);
        let w = x - j as f64;
        let next = self.0[(j + 1) % n];
        self.0[j] * (1.0 - w) + next * w
    }

    fn slope_unit(&self, u: f64) -> f64 {
        let n = self.0.len();
        let j = ((u * n as f64).floor() as usize).min(n - 1);
        (self.0[(j + 1) % n] - self.0[j]) * n as f64
    }
}

impl TryFrom<Vec<f64>> for PeriodicTable {
    type Error = FouError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PeriodicTable> for Vec<f64> {
    fn from(t: PeriodicTable) -> Self {
        t.0
    }
}

/// A bounded 1-periodic function on `[0, inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFunction {
    Constant,
    /// `sqrt(2) cos(2 pi k t)`, `k >= 1`.
    Cos(u32),
    /// `sqrt(2) sin(2 pi k t)`, `k >= 1`.
    Sin(u32),
    Tabulated(PeriodicTable),
}

fn frac(t: f64) -> f64 {
    t - t.floor()
}

impl BasisFunction {
    pub fn cos(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(FouError::Config("cosine frequency must be >= 1".into()));
        }
        Ok(Self::Cos(k))
    }

    pub fn sin(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(FouError::Config("sine frequency must be >= 1".into()));
        }
        Ok(Self::Sin(k))
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        Ok(Self::Tabulated(PeriodicTable::new(values)?))
    }

    fn omega(k: u32) -> f64 {
        2.0 * PI * k as f64
    }

    /// Value at `t mod 1`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Constant => 1.0,
            Self::Cos(k) => SQRT_2 * (Self::omega(*k) * frac(t)).cos(),
            Self::Sin(k) => SQRT_2 * (Self::omega(*k) * frac(t)).sin(),
            Self::Tabulated(table) => table.eval_unit(frac(t)),
        }
    }

    /// `phi'(t)`; for tables, the slope of the segment containing `t mod 1`.
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Self::Constant => 0.0,
            Self::Cos(k) => -SQRT_2 * Self::omega(*k) * (Self::omega(*k) * frac(t)).sin(),
            Self::Sin(k) => SQRT_2 * Self::omega(*k) * (Self::omega(*k) * frac(t)).cos(),
            Self::Tabulated(table) => table.slope_unit(frac(t)),
        }
    }

    /// `sup |phi|` over one period.
    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::Constant => 1.0,
            Self::Cos(_) | Self::Sin(_) => SQRT_2,
            Self::Tabulated(table) => table.values().iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// `int_0^1 phi`.
    pub fn mean(&self) -> f64 {
        match self {
            Self::Constant => 1.0,
            Self::Cos(_) | Self::Sin(_) => 0.0,
            // exact for the periodic linear interpolant
            Self::Tabulated(table) => {
                table.values().iter().sum::<f64>() / table.values().len() as f64
            }
        }
    }

    /// `int_0^t phi(s) ds`.
    pub fn antiderivative(&self, t: f64) -> f64 {
        match self {
            Self::Constant => t,
            Self::Cos(k) => {
                let w = Self::omega(*k);
                SQRT_2 * (w * frac(t)).sin() / w
            }
            Self::Sin(k) => {
                let w = Self::omega(*k);
                SQRT_2 * (1.0 - (w * frac(t)).cos()) / w
            }
            Self::Tabulated(_) => {
                let whole = t.floor();
                let u = t - whole;
                let n = (SIMPSON_INTERVALS_PER_UNIT as f64 * u).ceil() as usize;
                whole * self.mean() + simpson(|s| self.eval(s), 0.0, u, n)
            }
        }
    }

    /// `int_0^t e^{a s} phi(s) ds` for any real `a`.
    pub fn exp_integral(&self, a: f64, t: f64) -> f64 {
        match self {
            Self::Constant => {
                if a == 0.0 {
                    t
                } else {
                    (a * t).exp_m1() / a
                }
            }
            Self::Cos(k) => {
                let w = Self::omega(*k);
                let s = frac(t);
                let (sn, cs) = (w * s).sin_cos();
                SQRT_2 * ((a * t).exp() * (a * cs + w * sn) - a) / (a * a + w * w)
            }
            Self::Sin(k) => {
                let w = Self::omega(*k);
                let s = frac(t);
                let (sn, cs) = (w * s).sin_cos();
                SQRT_2 * ((a * t).exp() * (a * sn - w * cs) + w) / (a * a + w * w)
            }
            Self::Tabulated(_) => {
                let whole = t.floor();
                let u = t - whole;
                let one_period = simpson(
                    |s| (a * s).exp() * self.eval(s),
                    0.0,
                    1.0,
                    SIMPSON_INTERVALS_PER_UNIT,
                );
                // sum_{k < whole} e^{a k}
                let periods = if a == 0.0 {
                    whole
                } else {
                    (a * whole).exp_m1() / a.exp_m1()
                };
                let n = (SIMPSON_INTERVALS_PER_UNIT as f64 * u).ceil() as usize;
                let tail = simpson(|s| (a * s).exp() * self.eval(s), 0.0, u, n);
                periods * one_period + (a * whole).exp() * tail
            }
        }
    }

    /// Short name used in configs and reports: `constant`, `cos:k`, `sin:k`, `table[len]`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BasisFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant => write!(f, "constant"),
            Self::Cos(k) => write!(f, "cos:{k}"),
            Self::Sin(k) => write!(f, "sin:{k}"),
            Self::Tabulated(t) => write!(f, "table[{}]", t.values().len()),
        }
    }
}

impl FromStr for BasisFunction {
    type Err = FouError;

    /// Accepts `constant`, `cos:k`, `sin:k`, `cos(k)`, `sin(k)` and
    /// `table:v0,v1,...` (values on an even grid of `[0, 1)`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("constant") {
            return Ok(Self::Constant);
        }
        if let Some(values) = s.strip_prefix("table:") {
            let values = values
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| FouError::Config(format!("bad value in basis function `{s}`")))?;
            return Self::tabulated(values);
        }
        let (kind, rest) = s
            .split_once([':', '('])
            .ok_or_else(|| FouError::Config(format!("unknown basis function `{s}`")))?;
        let k: u32 = rest
            .trim_end_matches(')')
            .trim()
            .parse()
            .map_err(|_| FouError::Config(format!("bad frequency in basis function `{s}`")))?;
        match kind.trim() {
            "cos" => Self::cos(k),
            "sin" => Self::sin(k),
            other => Err(FouError::Config(format!("unknown basis kind `{other}`"))),
        }
    }
}

/// `L(t) = sum_i mu_i phi_i(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicDrift {
    basis: Vec<BasisFunction>,
    mu: Vec<f64>,
}

/// Limits of the drift's exponentially discounted integrals for a given `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftFunctionals {
    pub alpha: f64,
    /// `int_0^1 e^{-alpha s} L(s) ds`
    pub a1: f64,
    /// `A1 / (1 - e^{-alpha})`, the limit of `A_t`.
    pub a_inf: f64,
    /// `int_0^1 phi_i(s) e^{alpha s} ds / (e^alpha - 1)` per basis function.
    pub lambda: Vec<f64>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(FouError::Domain(format!(
            "alpha must be positive, got {alpha}"
        )))
    }
}

impl PeriodicDrift {
    pub fn new(basis: Vec<BasisFunction>, mu: Vec<f64>) -> Result<Self> {
        if basis.is_empty() {
            return Err(FouError::Config(
                "drift needs at least one basis function".into(),
            ));
        }
        if basis.len() != mu.len() {
            return Err(FouError::Config(format!(
                "{} basis functions but {} coefficients",
                basis.len(),
                mu.len()
            )));
        }
        for (i, a) in basis.iter().enumerate() {
            if basis[..i].contains(a) {
                return Err(FouError::Config(format!(
                    "basis function {a} appears twice"
                )));
            }
        }
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(FouError::Config("drift coefficients must be finite".into()));
        }
        Ok(Self { basis, mu })
    }

    pub fn basis(&self) -> &[BasisFunction] {
        &self.basis
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Same basis, different coefficients.
    pub fn with_mu(&self, mu: Vec<f64>) -> Result<Self> {
        Self::new(self.basis.clone(), mu)
    }

    fn combine(&self, f: impl Fn(&BasisFunction) -> f64) -> f64 {
        self.basis
            .iter()
            .zip(&self.mu)
            .filter(|(_, m)| **m != 0.0)
            .map(|(phi, m)| m * f(phi))
            .sum()
    }

    /// `L(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        self.combine(|phi| phi.eval(t))
    }

    /// `int_0^1 L`.
    pub fn mean(&self) -> f64 {
        self.combine(BasisFunction::mean)
    }

    /// Bound on `sup |L|`.
    pub fn sup_bound(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.mu)
            .map(|(phi, m)| m.abs() * phi.sup_norm())
            .sum()
    }

    /// `tilde L(t) = int_0^t L(s) ds`.
    pub fn antiderivative(&self, t: f64) -> f64 {
        self.combine(|phi| phi.antiderivative(t))
    }

    /// `A_t = int_0^t e^{-alpha s} L(s) ds`.
    pub fn discounted_integral(&self, alpha: f64, t: f64) -> f64 {
        self.combine(|phi| phi.exp_integral(-alpha, t))
    }

    /// `A1`, `A_inf` and the `lambda_i`.
    pub fn functionals(&self, alpha: f64) -> Result<DriftFunctionals> {
        check_alpha(alpha)?;
        let a1 = self.discounted_integral(alpha, 1.0);
        let a_inf = a1 / -(-alpha).exp_m1();
        let lambda = self
            .basis
            .iter()
            .map(|phi| phi.exp_integral(alpha, 1.0) / alpha.exp_m1())
            .collect();
        Ok(DriftFunctionals {
            alpha,
            a1,
            a_inf,
            lambda,
        })
    }

    /// `R_t = A_t - A_inf`, defined for `t >= 1`.
    pub fn remainder(&self, alpha: f64, t: f64) -> Result<f64> {
        check_alpha(alpha)?;
        if t < 1.0 {
            return Err(FouError::Domain(format!(
                "remainder R_t needs t >= 1, got {t}"
            )));
        }
        let f = self.functionals(alpha)?;
        Ok(self.discounted_integral(alpha, t) - f.a_inf)
    }

    /// Constant `C` with `|R_t| <= C e^{-alpha t}` for all `t >= 1`.
    pub fn remainder_bound_constant(&self, alpha: f64) -> Result<f64> {
        let f = self.functionals(alpha)?;
        let decay = -(-alpha).exp_m1();
        Ok(f.a1.abs() / decay + self.sup_bound() * decay / alpha)
    }
}

/// `int_0^1 phi_i phi_j` by Simpson's rule with `intervals` subintervals.
pub fn gram_matrix(basis: &[BasisFunction], intervals: usize) -> Vec<Vec<f64>> {
    basis
        .iter()
        .map(|a| {
            basis
                .iter()
                .map(|b| simpson(|s| a.eval(s) * b.eval(s), 0.0, 1.0, intervals))
                .collect()
        })
        .collect()
}

/// Largest `|G_ij - delta_ij|`; tabulated bases are not guaranteed orthonormal,
/// so callers decide what defect they tolerate.
pub fn orthonormality_defect(basis: &[BasisFunction]) -> f64 {
    let g = gram_matrix(basis, SIMPSON_INTERVALS_PER_UNIT);
    let mut worst = 0.0f64;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fourier() -> Vec<BasisFunction> {
        vec![
            BasisFunction::Constant,
            BasisFunction::Cos(1),
            BasisFunction::Sin(1),
            BasisFunction::Cos(2),
            BasisFunction::Sin(3),
        ]
    }

    fn fourier_drift() -> PeriodicDrift {
        PeriodicDrift::new(fourier(), vec![1.0, 0.5, -0.3, 0.2, 0.7]).unwrap()
    }

    #[test]
    fn derivative_matches_central_difference() {
        let mut basis = fourier();
        basis.push(BasisFunction::tabulated(vec![0.0, 1.0, 3.0, -1.0]).unwrap());
        for phi in &basis {
            for &t in &[0.1, 0.37, 1.6, 2.95] {
                let h = 1e-6;
                let fd = (phi.eval(t + h) - phi.eval(t - h)) / (2.0 * h);
                assert_abs_diff_eq!(phi.derivative(t), fd, epsilon = 1e-5 * fd.abs().max(1.0));
            }
        }
    }

    #[test]
    fn eval_examples() {
        assert_eq!(BasisFunction::Constant.eval(0.73), 1.0);
        assert_abs_diff_eq!(BasisFunction::Cos(1).eval(0.25), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            BasisFunction::Cos(2).eval(1.3),
            BasisFunction::Cos(2).eval(0.3),
            epsilon = 1e-12
        );
    }

    #[test]
    fn empty_table_is_a_config_error() {
        assert!(matches!(
            BasisFunction::tabulated(vec![]),
            Err(FouError::Config(_))
        ));
        assert!(serde_json::from_str::<BasisFunction>(r#"{"tabulated":[]}"#).is_err());
    }

    #[test]
    fn parses_kind_names() {
        assert_eq!(
            "constant".parse::<BasisFunction>().unwrap(),
            BasisFunction::Constant
        );
        assert_eq!(
            "cos:3".parse::<BasisFunction>().unwrap(),
            BasisFunction::Cos(3)
        );
        assert_eq!(
            "sin(2)".parse::<BasisFunction>().unwrap(),
            BasisFunction::Sin(2)
        );
        assert!("cos:0".parse::<BasisFunction>().is_err());
        assert!("tan:1".parse::<BasisFunction>().is_err());
        let t = "table: 0.0, 1.0, 0.5".parse::<BasisFunction>().unwrap();
        assert!(matches!(t, BasisFunction::Tabulated(_)));
        assert_eq!(t.eval(1.0 / 3.0), 1.0);
        assert!("table:1.0,x".parse::<BasisFunction>().is_err());
    }

    #[test]
    fn drift_examples() {
        let d = PeriodicDrift::new(vec![BasisFunction::Constant], vec![2.0]).unwrap();
        assert_eq!(d.eval(0.1234), 2.0);
        let zero = PeriodicDrift::new(fourier(), vec![0.0; 5]).unwrap();
        assert_eq!(zero.eval(3.7), 0.0);
        let d2 = PeriodicDrift::new(
            vec![BasisFunction::Constant, BasisFunction::Cos(1)],
            vec![1.0, 0.5],
        )
        .unwrap();
        assert_abs_diff_eq!(d2.eval(0.0), 1.0 + 0.5 * SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn drift_rejects_bad_shapes() {
        assert!(PeriodicDrift::new(vec![], vec![]).is_err());
        assert!(PeriodicDrift::new(vec![BasisFunction::Constant], vec![1.0, 2.0]).is_err());
        assert!(PeriodicDrift::new(
            vec![BasisFunction::Cos(1), BasisFunction::Cos(1)],
            vec![1.0, 2.0]
        )
        .is_err());
    }

    #[test]
    fn antiderivative_examples() {
        let c = PeriodicDrift::new(vec![BasisFunction::Constant], vec![1.0]).unwrap();
        assert_abs_diff_eq!(c.antiderivative(3.5), 3.5, epsilon = 1e-15);
        let cos = PeriodicDrift::new(vec![BasisFunction::Cos(1)], vec![1.0]).unwrap();
        assert_abs_diff_eq!(cos.antiderivative(1.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn antiderivative_minus_linear_part_is_bounded() {
        let d = fourier_drift();
        let bound = d.sup_bound();
        let mean = d.mean();
        for i in 0..400 {
            let t = i as f64 * 0.0731;
            let l = d.antiderivative(t) - t * mean;
            assert!(l.abs() <= bound, "t={t} l={l} bound={bound}");
        }
    }

    #[test]
    fn closed_forms_match_simpson() {
        for phi in fourier() {
            for &(a, t) in &[(-0.5, 2.3), (0.7, 1.0), (-1.3, 0.41), (0.0, 3.25)] {
                let exact = phi.exp_integral(a, t);
                let quad = simpson(|s| (a * s).exp() * phi.eval(s), 0.0, t, 1 << 14);
                assert_abs_diff_eq!(exact, quad, epsilon = 1e-10);
            }
            let quad = simpson(|s| phi.eval(s), 0.0, 2.7, 1 << 14);
            assert_abs_diff_eq!(phi.antiderivative(2.7), quad, epsilon = 1e-10);
        }
    }

    #[test]
    fn tabulated_kind_uses_quadrature() {
        let table: Vec<f64> = (0..64)
            .map(|j| SQRT_2 * (2.0 * PI * j as f64 / 64.0).cos())
            .collect();
        let phi = BasisFunction::tabulated(table).unwrap();
        let cos = BasisFunction::Cos(1);
        assert_abs_diff_eq!(phi.eval(0.3), cos.eval(0.3), epsilon = 5e-3);
        assert_abs_diff_eq!(
            phi.exp_integral(-0.5, 4.6),
            cos.exp_integral(-0.5, 4.6),
            epsilon = 5e-3
        );
        assert_abs_diff_eq!(phi.mean(), 0.0, epsilon = 1e-12);
        // Gram defect is reported, not hidden.
        let defect = orthonormality_defect(&[phi]);
        assert!(defect > 1e-6 && defect < 1e-2, "defect {defect}");
    }

    #[test]
    fn discounted_integral_examples() {
        let c = PeriodicDrift::new(vec![BasisFunction::Constant], vec![1.0]).unwrap();
        assert_abs_diff_eq!(c.discounted_integral(1.0, 40.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            c.discounted_integral(1.0, 2.0),
            1.0 - (-2f64).exp(),
            epsilon = 1e-15
        );
        let zero = PeriodicDrift::new(fourier(), vec![0.0; 5]).unwrap();
        assert_eq!(zero.discounted_integral(0.5, 7.3), 0.0);
    }

    #[test]
    fn integer_time_geometric_identity() {
        let d = fourier_drift();
        for &alpha in &[0.2, 0.5, 1.3] {
            let a1 = d.discounted_integral(alpha, 1.0);
            for n in 1..=20 {
                let nf = n as f64;
                let expected = a1 * (-alpha * nf).exp_m1() / (-alpha).exp_m1();
                assert_abs_diff_eq!(d.discounted_integral(alpha, nf), expected, epsilon = 1e-10);
            }
        }
        // cross-check A_5 at alpha = 0.5 against brute-force quadrature
        let quad = simpson(|s| (-0.5 * s).exp() * d.eval(s), 0.0, 5.0, 1 << 16);
        assert_abs_diff_eq!(d.discounted_integral(0.5, 5.0), quad, epsilon = 1e-10);
    }

    #[test]
    fn functionals_examples() {
        let m = 1.7;
        let alpha = 0.8;
        let c = PeriodicDrift::new(vec![BasisFunction::Constant], vec![m]).unwrap();
        let f = c.functionals(alpha).unwrap();
        assert_abs_diff_eq!(f.a_inf, m / alpha, epsilon = 1e-12);
        assert_abs_diff_eq!(f.lambda[0], 1.0 / alpha, epsilon = 1e-12);
        assert_eq!(f.a_inf, f.a1 / (1.0 - (-alpha).exp()));

        let z = c.with_mu(vec![0.0]).unwrap().functionals(alpha).unwrap();
        assert_eq!(z.a_inf, 0.0);
        assert_eq!(z.lambda, f.lambda);

        assert!(matches!(c.functionals(0.0), Err(FouError::Domain(_))));
        assert!(matches!(c.functionals(-1.0), Err(FouError::Domain(_))));
    }

    #[test]
    fn remainder_examples() {
        let d = fourier_drift();
        let alpha = 0.5;
        assert!(matches!(d.remainder(alpha, 0.5), Err(FouError::Domain(_))));
        let zero = d.with_mu(vec![0.0; 5]).unwrap();
        assert_eq!(zero.remainder(alpha, 3.3).unwrap(), 0.0);

        let f = d.functionals(alpha).unwrap();
        for n in 1..=15 {
            let nf = n as f64;
            let expected = -f.a1 * (-alpha * nf).exp() / (1.0 - (-alpha).exp());
            assert_abs_diff_eq!(d.remainder(alpha, nf).unwrap(), expected, epsilon = 1e-12);
        }

        let c = d.remainder_bound_constant(alpha).unwrap();
        let mut scaled_max: f64 = 0.0;
        for i in 0..=290 {
            let t = 1.0 + i as f64 * 0.1;
            let r = d.remainder(alpha, t).unwrap();
            assert!(r.abs() <= c * (-alpha * t).exp() * (1.0 + 1e-12));
            scaled_max = scaled_max.max(r.abs() * (alpha * t).exp());
        }
        assert!(scaled_max.is_finite());
        // |R_n| shrinks period over period
        let mut prev = f64::INFINITY;
        for n in 1..=30 {
            let r = d.remainder(alpha, n as f64).unwrap().abs();
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn builtin_family_is_orthonormal() {
        let g = gram_matrix(&fourier(), 1 << 12);
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(*v, target, epsilon = 1e-8);
            }
        }
    }

    proptest! {
        #[test]
        fn basis_is_one_periodic(k in 1u32..6, t in 0.0f64..50.0, which in 0usize..3) {
            let phi = match which {
                0 => BasisFunction::Constant,
                1 => BasisFunction::Cos(k),
                _ => BasisFunction::Sin(k),
            };
            prop_assert!((phi.eval(t) - phi.eval(t - t.floor())).abs() <= 1e-12);
            prop_assert!(phi.eval(t).abs() <= SQRT_2 + 1e-12);
        }
    }
}
