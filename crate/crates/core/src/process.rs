//! The observed process `dX = (L(t) + alpha X) dt + dB^H`, `X_0 = 0`.
//!
//! [`simulate_exact`] evaluates the explicit solution
//! `X_t = e^{alpha t} A_t + alpha e^{alpha t} Z_t + B_t` on the grid and is the
//! reference simulator; its only discretization error is the quadrature of
//! `Z_t = int_0^t e^{-alpha s} B_s ds` (end-corrected trapezoid, see [`crate::quad`]). [`simulate_euler`] is an
//! independent first-order scheme kept for cross-checks.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{FouError, Result};
use crate::fbm::{discounted_tail_bound, FbmPath, FgnGenerator, Hurst};
use crate::periodic_basis::PeriodicDrift;
use crate::quad::{cumulative_gregory, gregory, gregory_product};

/// Largest `alpha * horizon` a simulation accepts; `X^2` then stays well inside f64 range.
pub const MAX_GROWTH_EXPONENT: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulationMethod {
    Exact,
    Euler,
}

/// Number of grid steps per unit of time; `dt` must divide 1.
pub fn steps_per_unit(dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt <= 1.0) {
        return Err(FouError::Domain(format!(
            "grid step must lie in (0, 1], got {dt}"
        )));
    }
    let spu = (1.0 / dt).round();
    if ((1.0 / dt) - spu).abs() > 1e-9 * spu {
        return Err(FouError::Domain(format!(
            "1/dt must be an integer, got dt = {dt}"
        )));
    }
    Ok(spu as usize)
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

fn check_growth(alpha: f64, horizon: f64) -> Result<()> {
    let g = alpha * horizon;
    if g > MAX_GROWTH_EXPONENT {
        Err(FouError::Overflow(g))
    } else {
        Ok(())
    }
}

/// A simulated trajectory with the inputs that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessPath {
    pub dt: f64,
    pub x: Vec<f64>,
    pub bh: FbmPath,
    /// True drift (basis and `mu`) used for simulation.
    pub drift: PeriodicDrift,
    /// True `alpha` used for simulation.
    pub alpha: f64,
    /// `Z_{t_k}` by cumulative quadrature.
    pub z: Vec<f64>,
    pub method: SimulationMethod,
}

impl ProcessPath {
    pub fn steps(&self) -> usize {
        self.x.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.steps())
    }

    pub fn hurst(&self) -> Hurst {
        self.bh.hurst
    }

    pub fn steps_per_unit(&self) -> Result<usize> {
        steps_per_unit(self.dt)
    }

    /// `zeta_t = e^{-alpha t} B_t + alpha Z_t`.
    pub fn zeta(&self) -> Vec<f64> {
        self.bh
            .values
            .iter()
            .zip(&self.z)
            .enumerate()
            .map(|(k, (b, z))| (-self.alpha * self.time(k)).exp() * b + self.alpha * z)
            .collect()
    }

    /// `int_0^T X_s ds`.
    pub fn integral(&self) -> f64 {
        gregory(&self.x, self.dt)
    }

    /// `int_0^T X_s^2 ds`.
    pub fn integral_of_square(&self) -> f64 {
        gregory_product(&self.x, &self.x, self.dt)
    }

    /// The path restricted to `[0, horizon]`; `horizon` must be a grid time.
    pub fn truncate(&self, horizon: usize) -> Result<Self> {
        let steps = horizon * self.steps_per_unit()?;
        if steps > self.steps() {
            return Err(FouError::Domain(format!(
                "horizon {horizon} beyond simulated range {}",
                self.horizon()
            )));
        }
        let mut p = self.clone();
        p.x.truncate(steps + 1);
        p.z.truncate(steps + 1);
        p.bh = self.bh.truncate(steps);
        Ok(p)
    }

    /// CSV dump with header `t,X,BH,Z`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,X,BH,Z")?;
        for k in 0..self.x.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.time(k),
                self.x[k],
                self.bh.values[k],
                self.z[k]
            )?;
        }
        Ok(())
    }
}

/// `Z_{t_k} = int_0^{t_k} e^{-alpha s} b_s ds` over samples `b`.
pub fn compute_z(values: &[f64], dt: f64, alpha: f64) -> Vec<f64> {
    let discounted: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(k, b)| (-alpha * k as f64 * dt).exp() * b)
        .collect();
    cumulative_gregory(&discounted, dt)
}

/// Explicit-solution simulator.
pub fn simulate_exact(drift: &PeriodicDrift, alpha: f64, bh: &FbmPath) -> Result<ProcessPath> {
    check_alpha(alpha)?;
    check_growth(alpha, bh.horizon())?;
    let dt = bh.dt;
    let z = compute_z(&bh.values, dt, alpha);
    let x = bh
        .values
        .iter()
        .zip(&z)
        .enumerate()
        .map(|(k, (b, zk))| {
            let t = k as f64 * dt;
            let growth = (alpha * t).exp();
            growth * drift.discounted_integral(alpha, t) + alpha * growth * zk + b
        })
        .collect();
    Ok(ProcessPath {
        dt,
        x,
        bh: bh.clone(),
        drift: drift.clone(),
        alpha,
        z,
        method: SimulationMethod::Exact,
    })
}

/// Euler-Maruyama: `X_{k+1} = X_k + (L(t_k) + alpha X_k) dt + (B_{k+1} - B_k)`.
pub fn simulate_euler(drift: &PeriodicDrift, alpha: f64, bh: &FbmPath) -> Result<ProcessPath> {
    check_alpha(alpha)?;
    check_growth(alpha, bh.horizon())?;
    let dt = bh.dt;
    let mut x = Vec::with_capacity(bh.values.len());
    let mut xk = 0.0;
    x.push(xk);
    for (k, w) in bh.values.windows(2).enumerate() {
        let t = k as f64 * dt;
        xk += (drift.eval(t) + alpha * xk) * dt + (w[1] - w[0]);
        x.push(xk);
    }
    Ok(ProcessPath {
        dt,
        x,
        bh: bh.clone(),
        drift: drift.clone(),
        alpha,
        z: compute_z(&bh.values, dt, alpha),
        method: SimulationMethod::Euler,
    })
}

/// A truncated draw of `Z_inf = int_0^inf e^{-alpha s} B_s ds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZInfinityDraw {
    pub value: f64,
    /// Standard-deviation bound of the neglected tail `int_T^inf`.
    pub tail_sd_bound: f64,
}

/// Reusable sampler of truncated `Z_inf`; one fresh fBm path per draw.
pub struct ZInfinitySampler {
    alpha: f64,
    dt: f64,
    generator: FgnGenerator,
    tail_sd_bound: f64,
}

/// Coarsest grid step accepted for `Z_inf` sampling.
pub const Z_INFINITY_MAX_DT: f64 = 1.0 / 256.0;

impl ZInfinitySampler {
    pub fn new(hurst: Hurst, alpha: f64, truncation: f64, dt: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if truncation < 5.0 / alpha {
            return Err(FouError::Domain(format!(
                "truncation {truncation} below 5/alpha = {}: tail too heavy",
                5.0 / alpha
            )));
        }
        if !(dt > 0.0 && dt <= Z_INFINITY_MAX_DT) {
            return Err(FouError::Domain(format!(
                "Z_inf grid step must be <= 2^-8, got {dt}"
            )));
        }
        let steps = (truncation / dt).ceil() as usize;
        let generator = FgnGenerator::new(hurst, steps, dt)?;
        let tail_sd_bound = discounted_tail_bound(alpha, hurst, steps as f64 * dt);
        Ok(Self {
            alpha,
            dt,
            generator,
            tail_sd_bound,
        })
    }

    pub fn tail_sd_bound(&self) -> f64 {
        self.tail_sd_bound
    }

    pub fn draw(&self, seed: u64) -> ZInfinityDraw {
        let bh = self.generator.path(seed);
        ZInfinityDraw {
            value: discounted_integral_of_path(&bh.values, self.dt, self.alpha),
            tail_sd_bound: self.tail_sd_bound,
        }
    }
}

/// `int_0^T e^{-alpha s} b_s ds` over all of `values`.
pub fn discounted_integral_of_path(values: &[f64], dt: f64, alpha: f64) -> f64 {
    let discounted: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(k, b)| (-alpha * k as f64 * dt).exp() * b)
        .collect();
    gregory(&discounted, dt)
}

/// One truncated `Z_inf` draw on a fresh path.
pub fn sample_z_infinity(
    hurst: Hurst,
    alpha: f64,
    truncation: f64,
    dt: f64,
    seed: u64,
) -> Result<ZInfinityDraw> {
    Ok(ZInfinitySampler::new(hurst, alpha, truncation, dt)?.draw(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::generate_fbm_path;
    use crate::periodic_basis::BasisFunction;
    use approx::assert_abs_diff_eq;

    fn h(v: f64) -> Hurst {
        Hurst::new(v).unwrap()
    }

    fn constant_drift(m: f64) -> PeriodicDrift {
        PeriodicDrift::new(vec![BasisFunction::Constant], vec![m]).unwrap()
    }

    fn fourier_drift() -> PeriodicDrift {
        PeriodicDrift::new(
            vec![
                BasisFunction::Constant,
                BasisFunction::Cos(1),
                BasisFunction::Sin(2),
            ],
            vec![1.0, 0.5, -0.4],
        )
        .unwrap()
    }

    #[test]
    fn grid_step_must_divide_one() {
        assert_eq!(steps_per_unit(1.0 / 256.0).unwrap(), 256);
        assert!(steps_per_unit(0.3).is_err());
        assert!(steps_per_unit(0.0).is_err());
    }

    #[test]
    fn z_of_zero_and_constant_paths() {
        let z = compute_z(&[0.0; 17], 0.125, 0.7);
        assert!(z.iter().all(|v| *v == 0.0));
        let dt = 1.0 / 256.0;
        let alpha = 0.8;
        let ones = vec![1.0; 5 * 256 + 1];
        let z = compute_z(&ones, dt, alpha);
        for (k, zk) in z.iter().enumerate() {
            let t = k as f64 * dt;
            let exact = -(-alpha * t).exp_m1() / alpha;
            // the plain trapezoid bound t * dt^2 * alpha^2 / 12 covers the corrected rule
            assert!((zk - exact).abs() <= t * dt * dt * alpha * alpha / 12.0 + 1e-15);
        }
        assert!(z.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn z_converges_under_refinement() {
        let hurst = h(0.7);
        let fine = generate_fbm_path(hurst, 4 * 2048, 1.0 / 2048.0, 8).unwrap();
        let alpha = 0.5;
        let reference = *compute_z(&fine.values, fine.dt, alpha).last().unwrap();
        let coarse = fine.decimate(4).unwrap();
        let medium = fine.decimate(2).unwrap();
        let e_coarse =
            (compute_z(&coarse.values, coarse.dt, alpha).last().unwrap() - reference).abs();
        let e_medium =
            (compute_z(&medium.values, medium.dt, alpha).last().unwrap() - reference).abs();
        assert!(e_medium < e_coarse, "{e_medium} vs {e_coarse}");
    }

    #[test]
    fn exact_simulator_noiseless_constant_drift() {
        let m = 1.3;
        let alpha = 0.6;
        let dt = 1.0 / 128.0;
        let bh = FbmPath::zero(h(0.7), 8 * 128, dt);
        let path = simulate_exact(&constant_drift(m), alpha, &bh).unwrap();
        for (k, x) in path.x.iter().enumerate() {
            let t = k as f64 * dt;
            let exact = m * (alpha * t).exp_m1() / alpha;
            assert_abs_diff_eq!(*x, exact, epsilon = 1e-12 * exact.abs().max(1.0));
        }
        let zero = simulate_exact(&constant_drift(0.0), alpha, &bh).unwrap();
        assert!(zero.x.iter().all(|v| *v == 0.0));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn exact_simulator_reproduces_representation_and_zeta() {
        let bh = generate_fbm_path(h(0.7), 6 * 256, 1.0 / 256.0, 11).unwrap();
        let d = fourier_drift();
        let alpha = 0.5;
        let path = simulate_exact(&d, alpha, &bh).unwrap();
        assert_eq!(path.x[0], 0.0);
        assert_eq!(path.x.len(), path.z.len());
        assert_eq!(path.x.len(), path.bh.values.len());
        let zeta = path.zeta();
        for k in 0..path.x.len() {
            let t = path.time(k);
            let e = (alpha * t).exp();
            let rep = e * d.discounted_integral(alpha, t) + alpha * e * path.z[k] + bh.values[k];
            assert_eq!(path.x[k], rep);
            // X_t = e^{alpha t} (A_t + zeta_t)
            let via_zeta = e * (d.discounted_integral(alpha, t) + zeta[k]);
            assert_abs_diff_eq!(
                path.x[k],
                via_zeta,
                epsilon = 1e-12 * path.x[k].abs().max(1.0)
            );
        }
    }

    #[test]
    fn overflow_guard() {
        let bh = FbmPath::zero(h(0.5), 100, 1.0);
        assert!(matches!(
            simulate_exact(&constant_drift(1.0), 0.5, &bh),
            Err(FouError::Overflow(_))
        ));
        assert!(matches!(
            simulate_euler(&constant_drift(1.0), 0.5, &bh),
            Err(FouError::Overflow(_))
        ));
        assert!(simulate_exact(&constant_drift(1.0), -0.5, &bh).is_err());
    }

    #[test]
    fn euler_basics() {
        let dt = 1.0 / 64.0;
        let bh = generate_fbm_path(h(0.6), 64, dt, 4).unwrap();
        let zero =
            simulate_euler(&constant_drift(0.0), 0.5, &FbmPath::zero(h(0.6), 64, dt)).unwrap();
        assert!(zero.x.iter().all(|v| *v == 0.0));
        let d = fourier_drift();
        let p = simulate_euler(&d, 0.5, &bh).unwrap();
        assert_abs_diff_eq!(p.x[1], d.eval(0.0) * dt + bh.values[1], epsilon = 1e-15);
    }

    #[test]
    fn euler_converges_to_exact_at_first_order() {
        let d = fourier_drift();
        let alpha = 0.5;
        let fine = generate_fbm_path(h(0.7), 4 * 4096, 1.0 / 4096.0, 21).unwrap();
        let mut errs = Vec::new();
        for factor in [16, 8, 4] {
            let bh = fine.decimate(factor).unwrap();
            let ex = simulate_exact(&d, alpha, &bh).unwrap();
            let eu = simulate_euler(&d, alpha, &bh).unwrap();
            let sup =
                ex.x.iter()
                    .zip(&eu.x)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
            errs.push(sup);
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 0.9, "order {order} from {errs:?}");
        }
    }

    #[test]
    fn rescaled_endpoint_stabilizes() {
        let alpha = 0.5;
        let dt = 1.0 / 256.0;
        let bh = generate_fbm_path(h(0.7), 20 * 256, dt, 5).unwrap();
        let path = simulate_exact(&fourier_drift(), alpha, &bh).unwrap();
        let q: Vec<f64> = (9..=20)
            .map(|n| (-alpha * n as f64).exp() * path.x[n * 256])
            .collect();
        let diffs: Vec<f64> = q.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        // geometric decay up to noise: each later difference is far below the first
        assert!(diffs.last().unwrap() < &(0.1 * diffs[0]), "{diffs:?}");
        let mut running_max = diffs.clone();
        for i in (0..running_max.len() - 1).rev() {
            running_max[i] = running_max[i].max(running_max[i + 1]);
        }
        assert!(running_max.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn z_infinity_refuses_short_truncation_and_coarse_grids() {
        assert!(matches!(
            sample_z_infinity(h(0.5), 1.0, 4.0, 1.0 / 256.0, 1),
            Err(FouError::Domain(_))
        ));
        assert!(matches!(
            sample_z_infinity(h(0.5), 1.0, 20.0, 1.0 / 128.0, 1),
            Err(FouError::Domain(_))
        ));
    }

    #[test]
    fn z_infinity_truncation_is_stable() {
        let alpha = 1.0;
        let dt = 1.0 / 256.0;
        let bh = generate_fbm_path(h(0.7), 40 * 256, dt, 17).unwrap();
        let short = discounted_integral_of_path(&bh.values[..=20 * 256], dt, alpha);
        let long = discounted_integral_of_path(&bh.values, dt, alpha);
        assert!((short - long).abs() < 1e-3);
        let s = ZInfinitySampler::new(h(0.7), alpha, 20.0, dt).unwrap();
        assert!(s.tail_sd_bound() < 1e-6);
        assert_eq!(s.draw(3), s.draw(3));
    }

    #[test]
    fn csv_dump() {
        let bh = generate_fbm_path(h(0.6), 4, 0.25, 2).unwrap();
        let p = simulate_exact(&fourier_drift(), 0.5, &bh).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,X,BH,Z"));
        assert_eq!(lines.count(), 5);
    }
}
