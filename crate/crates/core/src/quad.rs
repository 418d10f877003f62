//! Grid quadrature shared by the simulator, the estimator and the checks.
//!
//! Every integral over a sampled path goes through these few rules so that
//! identities between discrete quantities hold up to roundoff. Path integrals
//! use the end-corrected trapezoid rule (Gregory weights
//! `3/8, 7/6, 23/24, 1, ..., 1, 23/24, 7/6, 3/8`), which is fourth order on
//! smooth integrands and differs from the plain trapezoid rule only at the
//! three samples nearest each end.

/// Gregory end corrections relative to the trapezoid weights.
const GREGORY_CORRECTION: [f64; 3] = [-1.0 / 8.0, 1.0 / 6.0, -1.0 / 24.0];
/// Fewest samples for which the end corrections do not overlap.
pub const GREGORY_MIN_SAMPLES: usize = 6;

/// Composite trapezoid rule over uniformly spaced samples.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            dt * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Trapezoid rule applied to the pointwise product of two sample vectors.
pub fn trapezoid_product(a: &[f64], b: &[f64], dt: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len().min(b.len());
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = (1..n - 1).map(|k| a[k] * b[k]).sum();
    dt * (inner + 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]))
}

/// End-corrected trapezoid rule; plain trapezoid below [`GREGORY_MIN_SAMPLES`] samples.
pub fn gregory(values: &[f64], dt: f64) -> f64 {
    let n = values.len();
    if n < GREGORY_MIN_SAMPLES {
        return trapezoid(values, dt);
    }
    let correction: f64 = GREGORY_CORRECTION
        .iter()
        .enumerate()
        .map(|(i, w)| w * (values[i] + values[n - 1 - i]))
        .sum();
    trapezoid(values, dt) + dt * correction
}

/// [`gregory`] applied to the pointwise product of two sample vectors.
pub fn gregory_product(a: &[f64], b: &[f64], dt: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len().min(b.len());
    if n < GREGORY_MIN_SAMPLES {
        return trapezoid_product(a, b, dt);
    }
    let correction: f64 = GREGORY_CORRECTION
        .iter()
        .enumerate()
        .map(|(i, w)| w * (a[i] * b[i] + a[n - 1 - i] * b[n - 1 - i]))
        .sum();
    trapezoid_product(a, b, dt) + dt * correction
}

/// Running [`gregory`] integral; `out[k]` integrates over `[0, k*dt]`.
pub fn cumulative_gregory(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = cumulative_trapezoid(values, dt);
    if out.len() < GREGORY_MIN_SAMPLES {
        return out;
    }
    let head: f64 = GREGORY_CORRECTION
        .iter()
        .enumerate()
        .map(|(i, w)| w * values[i])
        .sum();
    for k in GREGORY_MIN_SAMPLES - 1..out.len() {
        let tail: f64 = GREGORY_CORRECTION
            .iter()
            .enumerate()
            .map(|(i, w)| w * values[k - i])
            .sum();
        out[k] += dt * (head + tail);
    }
    out
}

/// `int f dg` for a smooth deterministic `f` with known derivative `df`, by
/// parts: `f_N g_N - f_0 g_0 - int g f' ds`, the last integral by [`gregory`].
///
/// For deterministic `f` this is the Wiener integral in both the Ito
/// (`H = 1/2`) and Young (`H > 1/2`) senses.
pub fn stieltjes_by_parts(f: &[f64], df: &[f64], g: &[f64], dt: f64) -> f64 {
    debug_assert!(f.len() == g.len() && df.len() == g.len());
    let n = g.len();
    if n == 0 {
        return 0.0;
    }
    f[n - 1] * g[n - 1] - f[0] * g[0] - gregory_product(g, df, dt)
}

/// Running trapezoid integral; `out[0] = 0` and `out[k]` integrates over `[0, k*dt]`.
pub fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    if values.is_empty() {
        return out;
    }
    let mut acc = 0.0;
    out.push(acc);
    for w in values.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Left-point Stieltjes sum `sum_k f_k * (g_{k+1} - g_k)`.
pub fn stieltjes_left(f: &[f64], g: &[f64]) -> f64 {
    debug_assert_eq!(f.len(), g.len());
    f.iter()
        .zip(g.windows(2))
        .map(|(fk, gw)| fk * (gw[1] - gw[0]))
        .sum()
}

/// Composite Simpson rule for `f` on `[a, b]` with at least `min_intervals`
/// (rounded up to even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, min_intervals: usize) -> f64 {
    if b == a {
        return 0.0;
    }
    let n = (min_intervals.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trapezoid_is_exact_on_linear_functions() {
        let dt = 0.125;
        let v: Vec<f64> = (0..=16).map(|k| 3.0 * k as f64 * dt - 1.0).collect();
        assert_relative_eq!(trapezoid(&v, dt), 3.0 * 2.0 - 2.0, epsilon = 1e-14);
        let cum = cumulative_trapezoid(&v, dt);
        assert_eq!(cum[0], 0.0);
        assert_relative_eq!(*cum.last().unwrap(), trapezoid(&v, dt), epsilon = 1e-14);
    }

    #[test]
    fn simpson_integrates_cubics_exactly() {
        let v = simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 3);
        assert_relative_eq!(v, 4.0 - 4.0, epsilon = 1e-13);
        assert_relative_eq!(
            simpson(f64::exp, 0.0, 1.0, 64),
            1f64.exp() - 1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn stieltjes_sums_telescope_for_constant_integrand() {
        let g = [0.0, 0.3, -0.2, 1.7];
        let f = [2.0; 4];
        assert_relative_eq!(stieltjes_left(&f, &g), 3.4, epsilon = 1e-15);
    }

    #[test]
    fn gregory_is_exact_on_cubics() {
        let dt = 0.1;
        let v: Vec<f64> = (0..=20)
            .map(|k| {
                let x = k as f64 * dt;
                x * x * x - x * x + 2.0
            })
            .collect();
        // int_0^2 x^3 - x^2 + 2 = 4 - 8/3 + 4
        assert_relative_eq!(gregory(&v, dt), 4.0 - 8.0 / 3.0 + 4.0, epsilon = 1e-12);
        let ones = vec![1.0; v.len()];
        assert_eq!(gregory_product(&v, &ones, dt), gregory(&v, dt));
    }

    #[test]
    fn gregory_is_fourth_order() {
        let err = |n: usize| {
            let dt = 3.0 / n as f64;
            let v: Vec<f64> = (0..=n)
                .map(|k| (k as f64 * dt).sin() * (0.4 * k as f64 * dt).exp())
                .collect();
            let exact = simpson(|x| x.sin() * (0.4 * x).exp(), 0.0, 3.0, 1 << 14);
            (gregory(&v, dt) - exact).abs()
        };
        let ratio = err(64) / err(128);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn cumulative_gregory_matches_prefix_integrals() {
        let dt = 0.05;
        let v: Vec<f64> = (0..40)
            .map(|k| (0.3 * k as f64).cos() + 0.01 * k as f64)
            .collect();
        let cum = cumulative_gregory(&v, dt);
        for k in 0..v.len() {
            assert_relative_eq!(cum[k], gregory(&v[..=k], dt), epsilon = 1e-13);
        }
    }

    #[test]
    fn by_parts_matches_smooth_stieltjes_integral() {
        // int_0^2 cos(t) d(t^2) = int 2t cos t
        let n = 256;
        let dt = 2.0 / n as f64;
        let t: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        let f: Vec<f64> = t.iter().map(|x| x.cos()).collect();
        let df: Vec<f64> = t.iter().map(|x| -x.sin()).collect();
        let g: Vec<f64> = t.iter().map(|x| x * x).collect();
        let exact = 2.0 * (2.0 * 2f64.sin() + 2f64.cos() - 1.0);
        assert_relative_eq!(stieltjes_by_parts(&f, &df, &g, dt), exact, epsilon = 1e-8);
        let ones = vec![1.0; g.len()];
        let zeros = vec![0.0; g.len()];
        assert_eq!(stieltjes_by_parts(&ones, &zeros, &g, dt), g[n] - g[0]);
    }
}
