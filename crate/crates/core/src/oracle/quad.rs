//! Composite Gauss-Legendre quadrature with panel doubling, used to check
//! the closed-form kernels against the raw time integrals.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const ORDER: usize = 20;

/// Nodes and weights on `[-1, 1]`.
fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    /// Relative tolerance on the change between successive panel doublings,
    /// measured against the integral of `|f|`.
    pub tol: f64,
    pub min_panels: usize,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-12,
            min_panels: 4,
            max_panels: 1 << 16,
        }
    }
}

impl QuadOptions {
    /// Starts with enough panels to put at most about one radian of the
    /// fastest oscillation in each.
    pub fn for_phase(tol: f64, max_phase: f64) -> Self {
        QuadOptions {
            tol,
            min_panels: (max_phase.abs().ceil() as usize).max(4),
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: C64,
    pub error_estimate: f64,
    pub panels: usize,
}

fn panel_sum(f: &impl Fn(f64) -> C64, a: f64, b: f64) -> (C64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = C64::new(0.0, 0.0);
    let mut abs = 0.0;
    for &(x, w) in rule() {
        let v = f(mid + half * x);
        sum += v * w;
        abs += v.norm() * w;
    }
    (sum * half, abs * half.abs())
}

fn refine(opts: QuadOptions, mut estimate: impl FnMut(usize) -> (C64, f64)) -> Result<Quadrature> {
    let mut panels = opts.min_panels.max(1);
    let (mut prev, _) = estimate(panels);
    loop {
        let next_panels = panels * 2;
        if next_panels > opts.max_panels {
            return Err(Error::Quadrature {
                tol: opts.tol,
                panels,
                estimate: prev.norm(),
            });
        }
        let (value, scale) = estimate(next_panels);
        let err = (value - prev).norm();
        if err <= opts.tol * scale.max(value.norm()) || err == 0.0 {
            return Ok(Quadrature {
                value,
                error_estimate: err,
                panels: next_panels,
            });
        }
        prev = value;
        panels = next_panels;
    }
}

/// `int_0^T f(t) dt`.
pub fn quad_single(f: impl Fn(f64) -> C64, t: f64, opts: QuadOptions) -> Result<Quadrature> {
    refine(opts, |panels| {
        let h = t / panels as f64;
        let mut sum = C64::new(0.0, 0.0);
        let mut abs = 0.0;
        for k in 0..panels {
            let (s, a) = panel_sum(&f, k as f64 * h, (k + 1) as f64 * h);
            sum += s;
            abs += a;
        }
        (sum, abs)
    })
}

/// `int_0^T dt2 outer(t2) int_0^{t2} dt1 inner(t1)`.
///
/// The inner integral is accumulated panel by panel; within a panel the
/// stretch from the panel start to each outer node gets its own
/// Gauss-Legendre rule.
pub fn quad_double(
    outer: impl Fn(f64) -> C64,
    inner: impl Fn(f64) -> C64,
    t: f64,
    opts: QuadOptions,
) -> Result<Quadrature> {
    refine(opts, |panels| {
        let h = t / panels as f64;
        let mut cumulative = C64::new(0.0, 0.0);
        let mut cumulative_abs = 0.0;
        let mut sum = C64::new(0.0, 0.0);
        let mut abs = 0.0;
        for k in 0..panels {
            let a = k as f64 * h;
            let half = 0.5 * h;
            let mid = a + half;
            for &(x, w) in rule() {
                let t2 = mid + half * x;
                let (partial, partial_abs) = panel_sum(&inner, a, t2);
                let g = outer(t2);
                sum += g * (cumulative + partial) * (w * half);
                abs += g.norm() * (cumulative_abs + partial_abs) * (w * half);
            }
            let (full, full_abs) = panel_sum(&inner, a, a + h);
            cumulative += full;
            cumulative_abs += full_abs;
        }
        (sum, abs)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials() {
        let r = gauss_legendre(ORDER);
        let w: f64 = r.iter().map(|p| p.1).sum();
        assert!((w - 2.0).abs() < 1e-14);
        let x38: f64 = r.iter().map(|&(x, w)| w * x.powi(38)).sum();
        assert!((x38 - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn constant_and_full_period() {
        let one = quad_single(|_| C64::new(1.0, 0.0), 1.0, QuadOptions::default()).unwrap();
        assert!((one.value - C64::new(1.0, 0.0)).norm() < 1e-14);
        let t = 3.0;
        let period = quad_single(|s| C64::new((2.0 * PI * s / t).sin(), 0.0), t, QuadOptions::default()).unwrap();
        assert!(period.value.norm() < 1e-14);
    }

    #[test]
    fn unit_double_integrand_is_simplex() {
        let t = 2.5;
        let q = quad_double(|_| C64::new(1.0, 0.0), |_| C64::new(1.0, 0.0), t, QuadOptions::default()).unwrap();
        assert!((q.value.re - t * t / 2.0).abs() < 1e-13);
    }

    #[test]
    fn reports_exhausted_budget() {
        let opts = QuadOptions {
            tol: 1e-15,
            min_panels: 1,
            max_panels: 2,
        };
        let r = quad_single(|s| C64::from_polar(1.0, 500.0 * s), 1.0, opts);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
