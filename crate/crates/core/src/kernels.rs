//! Closed forms for the single and time-ordered double integrals of the
//! second-order Dyson expansion.
//!
//! Every integrand is a short sum of exponentials `w e^{i x u}` over the
//! dimensionless time `u = t / T`, so two kernels cover everything:
//!
//! * [`phi1`]: `int_0^1 e^{i x u} du = (e^{ix} - 1) / (ix)`
//! * [`ordered_unit`]: `int_0^1 du2 e^{i x u2} int_0^{u2} du1 e^{i y u1}`
//!
//! A [`Factor`] names one integrand: which detector couples (qubit or probe),
//! the sign in front of its gap, the mode, and whether the integrand is
//! conjugated. Conjugation happens on the integrand (frequencies are negated
//! and weights conjugated) and never on a finished ordered integral, because
//! `conj(A o B)` is `A* o B*` and not `B* o A*`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::System;

/// Below this `|x|` [`phi1`] switches to its power series.
pub const PHI1_SERIES_THRESHOLD: f64 = 1e-4;
const PHI1_SERIES_TERMS: usize = 10;

/// When all of `|x|`, `|y|`, `|x + y|` are below this, [`ordered_unit`] uses
/// its double power series.
pub const ORDERED_SERIES_THRESHOLD: f64 = 0.5;
const ORDERED_SERIES_DEGREE: usize = 24;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `(e^{ix} - 1) / (ix)`, with the limit 1 at `x = 0`.
pub fn phi1(x: f64) -> C64 {
    if x.abs() < PHI1_SERIES_THRESHOLD {
        // sum_n (ix)^n / (n + 1)!
        let ix = I * x;
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term;
        for n in 1..PHI1_SERIES_TERMS {
            term = term * ix / (n as f64 + 1.0);
            sum += term;
        }
        sum
    } else {
        // e^{ix} - 1 = -2 sin^2(x/2) + i sin(x), free of cancellation.
        let half = (0.5 * x).sin();
        C64::new(x.sin() / x, 2.0 * half * half / x)
    }
}

/// `int_0^1 du2 e^{i x u2} int_0^{u2} du1 e^{i y u1}`: the later time carries `x`.
///
/// Three algebraically equivalent forms divide by `y`, `x` or `x + y`; the
/// one dividing by the largest of the three is used. When all three are
/// small the double power series is summed instead.
pub fn ordered_unit(x: f64, y: f64) -> C64 {
    let z = x + y;
    let (ax, ay, az) = (x.abs(), y.abs(), z.abs());
    let largest = ax.max(ay).max(az);
    if largest < ORDERED_SERIES_THRESHOLD {
        return ordered_series(x, y);
    }
    if ay == largest {
        (phi1(z) - phi1(x)) / (I * y)
    } else if ax == largest {
        phi1(x) * phi1(y) - (phi1(z) - phi1(y)) / (I * x)
    } else {
        I * (phi1(x) - C64::from_polar(1.0, x) * phi1(y)) / z
    }
}

/// `sum_{j,k} (ix)^j (iy)^k / (j! k! (k + 1) (j + k + 2))`.
fn ordered_series(x: f64, y: f64) -> C64 {
    let n = ORDERED_SERIES_DEGREE;
    let mut px = Vec::with_capacity(n + 1);
    let mut py = Vec::with_capacity(n + 1);
    let (mut a, mut b) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    for j in 0..=n {
        px.push(a);
        py.push(b);
        a = a * I * x / (j as f64 + 1.0);
        b = b * I * y / (j as f64 + 1.0);
    }
    let mut sum = C64::new(0.0, 0.0);
    // Highest degree first so the small terms accumulate before the large ones.
    for degree in (0..=n).rev() {
        for (k, yk) in py[..=degree].iter().enumerate() {
            sum += px[degree - k] * yk / ((k as f64 + 1.0) * (degree as f64 + 2.0));
        }
    }
    sum
}

/// `int_0^T dt2 e^{i a t2} int_0^{t2} dt1 e^{i b t1}`.
pub fn double_exp(a: f64, b: f64, t: f64) -> C64 {
    t * t * ordered_unit(a * t, b * t)
}

/// `sin(pi y)`, exactly zero at integer `y`.
pub fn sin_pi(y: f64) -> f64 {
    let r = y - 2.0 * (0.5 * y).round();
    let r = if r > 0.5 {
        1.0 - r
    } else if r < -0.5 {
        -1.0 - r
    } else {
        r
    };
    if r == 0.0 {
        0.0
    } else {
        (PI * r).sin()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coupler {
    /// Static cavity qubit at `x0`; integrals `I`.
    Qubit,
    /// Probe moving at speed `v`; integrals `X`.
    Probe,
}

/// Sign in front of the detector gap in `e^{i(+-Omega + omega) t}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// One integrand `e^{i(+-Omega + omega_n) t} g_n(t)`, possibly conjugated.
///
/// For the qubit `g_n = sin(k_n x0) / sqrt(n pi)`; for the probe
/// `g_n(t) = sin(k_n v t) / sqrt(n pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub coupler: Coupler,
    pub branch: Branch,
    pub mode: u32,
    pub conj: bool,
}

#[derive(Clone, Copy, Debug)]
struct Component {
    weight: C64,
    /// Dimensionless frequency: the exponent is `i * phase * t / T`.
    phase: f64,
}

impl Factor {
    pub fn qubit(branch: Branch, mode: u32) -> Self {
        Factor {
            coupler: Coupler::Qubit,
            branch,
            mode,
            conj: false,
        }
    }

    pub fn probe(branch: Branch, mode: u32) -> Self {
        Factor {
            coupler: Coupler::Probe,
            branch,
            mode,
            conj: false,
        }
    }

    /// The conjugated integrand.
    pub fn star(self) -> Self {
        Factor {
            conj: !self.conj,
            ..self
        }
    }

    /// `+-Omega + omega_n` before conjugation.
    pub fn frequency(&self, sys: &System) -> f64 {
        let gap = match self.coupler {
            Coupler::Qubit => sys.qubit.gap,
            Coupler::Probe => sys.probe.gap,
        };
        self.branch.sign() * gap + sys.cavity.frequency(self.mode)
    }

    fn components(&self, sys: &System) -> ([Component; 2], usize) {
        let t = sys.interaction_time();
        let n = f64::from(self.mode);
        let norm = 1.0 / (n * PI).sqrt();
        let base = self.frequency(sys) * t;
        let (mut parts, count) = match self.coupler {
            Coupler::Qubit => {
                let w = C64::new(sin_pi(n * sys.qubit.position / sys.cavity.length) * norm, 0.0);
                ([Component { weight: w, phase: base }, Component { weight: w, phase: base }], 1)
            }
            Coupler::Probe => {
                // sin(k_n v t) = (e^{i n pi u} - e^{-i n pi u}) / 2i with u = t / T,
                // since k_n v T = n pi.
                let w = C64::new(0.0, -0.5 * norm);
                (
                    [
                        Component { weight: w, phase: base + n * PI },
                        Component { weight: -w, phase: base - n * PI },
                    ],
                    2,
                )
            }
        };
        if self.conj {
            for c in parts.iter_mut() {
                c.weight = c.weight.conj();
                c.phase = -c.phase;
            }
        }
        (parts, count)
    }

    /// `int_0^T` of the integrand.
    pub fn single(&self, sys: &System) -> C64 {
        let t = sys.interaction_time();
        let (parts, n) = self.components(sys);
        parts[..n]
            .iter()
            .map(|c| c.weight * phi1(c.phase))
            .sum::<C64>()
            * t
    }
}

/// `later o earlier`: the first factor is evaluated at the later time `t2`.
pub fn ordered(later: Factor, earlier: Factor, sys: &System) -> C64 {
    let t = sys.interaction_time();
    let (outer, no) = later.components(sys);
    let (inner, ni) = earlier.components(sys);
    let mut sum = C64::new(0.0, 0.0);
    for a in &outer[..no] {
        for b in &inner[..ni] {
            sum += a.weight * b.weight * ordered_unit(a.phase, b.phase);
        }
    }
    sum * t * t
}

/// `{a, b} = a o b + b o a`, which equals the product of the two single
/// integrals.
pub fn anticirc(a: Factor, b: Factor, sys: &System) -> C64 {
    ordered(a, b, sys) + ordered(b, a, sys)
}

/// `I_{+-, n}`.
pub fn i_single(branch: Branch, mode: u32, sys: &System) -> C64 {
    Factor::qubit(branch, mode).single(sys)
}

/// `X_{+-, n}`.
pub fn x_single(branch: Branch, mode: u32, sys: &System) -> C64 {
    Factor::probe(branch, mode).single(sys)
}

/// `I_{s1, g1} o I_{s2, g2}`.
pub fn i_circ(s1: Branch, g1: u32, s2: Branch, g2: u32, sys: &System) -> C64 {
    ordered(Factor::qubit(s1, g1), Factor::qubit(s2, g2), sys)
}

/// `X_{s1, g1} o X_{s2, g2}`.
pub fn x_circ(s1: Branch, g1: u32, s2: Branch, g2: u32, sys: &System) -> C64 {
    ordered(Factor::probe(s1, g1), Factor::probe(s2, g2), sys)
}

/// Number of consecutive negligible terms that ends an adaptive mode sum.
pub const STALL_RUN: u32 = 20;

/// Default relative tolerance of adaptive mode sums.
pub const DEFAULT_SUM_TOL: f64 = 1e-9;

/// How an infinite sum over cavity modes is cut off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation {
    /// Stop once [`STALL_RUN`] consecutive terms are each below
    /// `tol * |partial sum|`; fail if `cutoff` is reached first.
    Adaptive { tol: f64, cutoff: u32 },
    /// Sum modes `1..=n` exactly.
    Fixed(u32),
}

impl Truncation {
    pub fn adaptive(cutoff: u32) -> Self {
        Truncation::Adaptive {
            tol: DEFAULT_SUM_TOL,
            cutoff,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeSum {
    pub value: C64,
    /// Last mode included.
    pub last_mode: u32,
}

pub fn mode_sum(term: impl FnMut(u32) -> C64, truncation: Truncation) -> Result<ModeSum> {
    mode_sum_with_floor(term, truncation, |_| 0.0)
}

/// Relative size, against the triangle bound of a term, below which the term
/// is rounding noise and counts as negligible.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Like [`mode_sum`], but a term no larger than `floor(mode)` also counts as
/// negligible. Needed when every term cancels to rounding level, as happens
/// when all phases are exact multiples of `2 pi`.
pub fn mode_sum_with_floor(
    mut term: impl FnMut(u32) -> C64,
    truncation: Truncation,
    floor: impl Fn(u32) -> f64,
) -> Result<ModeSum> {
    let mut sum = C64::new(0.0, 0.0);
    match truncation {
        Truncation::Fixed(n) => {
            for mode in 1..=n {
                sum += term(mode);
            }
            Ok(ModeSum {
                value: sum,
                last_mode: n,
            })
        }
        Truncation::Adaptive { tol, cutoff } => {
            let mut quiet = 0;
            let mut last_ratio = f64::INFINITY;
            for mode in 1..=cutoff {
                let t = term(mode);
                sum += t;
                let scale = sum.norm();
                last_ratio = if scale > 0.0 { t.norm() / scale } else { 0.0 };
                if t.norm() <= tol * scale || t.norm() <= floor(mode) {
                    quiet += 1;
                    if quiet >= STALL_RUN {
                        return Ok(ModeSum {
                            value: sum,
                            last_mode: mode,
                        });
                    }
                } else {
                    quiet = 0;
                }
            }
            Err(Error::NonConvergence { cutoff, last_ratio })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CavityConfig, ProbeConfig, QubitConfig};

    fn desk(x0: f64) -> System {
        let cavity = CavityConfig::unit(2, 100_000).unwrap();
        let probe = ProbeConfig::resonant(&cavity, 0.1, 1e-3).unwrap();
        let qubit = QubitConfig::new(&cavity, x0, 1e-3, 0.2 * cavity.resonant_frequency()).unwrap();
        System::new(cavity, probe, qubit).unwrap()
    }

    #[test]
    fn phi1_examples() {
        assert_eq!(phi1(0.0), C64::new(1.0, 0.0));
        let expected = C64::new(0.0, 2.0 / PI);
        assert!((phi1(PI) - expected).norm() < 1e-16);
    }

    #[test]
    fn phi1_small_argument_matches_long_series() {
        // Reference: the series carried to 20 terms.
        for &x in &[1e-6, -3e-5, 9.99e-5] {
            let mut term = C64::new(1.0, 0.0);
            let mut sum = term;
            for n in 1..20 {
                term = term * C64::new(0.0, x) / (n as f64 + 1.0);
                sum += term;
            }
            assert!((phi1(x) - sum).norm() / sum.norm() < 1e-15);
        }
    }

    #[test]
    fn phi1_is_continuous_at_switch() {
        let below = phi1(PHI1_SERIES_THRESHOLD * (1.0 - 1e-12));
        let above = phi1(PHI1_SERIES_THRESHOLD);
        assert!((below - above).norm() < 1e-13);
    }

    #[test]
    fn ordered_is_continuous_at_series_switch() {
        let t = ORDERED_SERIES_THRESHOLD;
        for &(dx, dy) in &[(1.0, 0.3), (0.2, -1.0), (-0.5, 1.0), (0.999, 0.0)] {
            let eps = 1e-13;
            let a = ordered_unit(t * dx * (1.0 - eps), t * dy * (1.0 - eps));
            let b = ordered_unit(t * dx * (1.0 + eps), t * dy * (1.0 + eps));
            assert!((a - b).norm() / a.norm() < 1e-12, "{dx} {dy}: {a} vs {b}");
        }
    }

    #[test]
    fn double_exp_zero_frequency_is_simplex_area() {
        let t = 3.7;
        assert!((double_exp(0.0, 0.0, t) - C64::new(t * t / 2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn sin_pi_is_exact_at_integers() {
        for n in -6..=6 {
            assert_eq!(sin_pi(f64::from(n)), 0.0);
        }
        assert!((sin_pi(0.25) - (PI / 4.0).sin()).abs() < 1e-16);
        assert!((sin_pi(2.5) - 1.0).abs() < 1e-16);
        assert!((sin_pi(-1.5) - 1.0).abs() < 1e-16);
    }

    #[test]
    fn qubit_integrals_vanish_at_nodes() {
        let sys = desk(0.5);
        assert_eq!(i_single(Branch::Plus, 2, &sys), C64::new(0.0, 0.0));
        assert_eq!(i_single(Branch::Minus, 4, &sys), C64::new(0.0, 0.0));
        assert_eq!(i_circ(Branch::Plus, 2, Branch::Minus, 1, &sys), C64::new(0.0, 0.0));
        assert!(i_single(Branch::Plus, 1, &sys).norm() > 0.0);
    }

    #[test]
    fn resonant_even_mode_is_invisible() {
        let sys = desk(0.25);
        let t = sys.interaction_time();
        assert!(x_single(Branch::Minus, 2, &sys).norm() < 1e-14 * t);
        // Odd modes keep both branches.
        assert!(x_single(Branch::Minus, 1, &sys).norm() > 1e-3);
    }

    #[test]
    fn conjugate_factor_gives_conjugate_single() {
        let sys = desk(0.3);
        for f in [Factor::qubit(Branch::Plus, 3), Factor::probe(Branch::Minus, 5)] {
            assert!((f.star().single(&sys) - f.single(&sys).conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn mode_sum_examples() {
        let zero = mode_sum(|_| C64::new(0.0, 0.0), Truncation::adaptive(1000)).unwrap();
        assert_eq!(zero.value, C64::new(0.0, 0.0));
        assert_eq!(zero.last_mode, STALL_RUN);

        let geo = mode_sum(
            |n| C64::new(0.5f64.powi(n as i32), 0.0),
            Truncation::Adaptive { tol: 1e-12, cutoff: 1000 },
        )
        .unwrap();
        assert!((geo.value.re - 1.0).abs() < 1e-12);

        let harmonic = mode_sum(|n| C64::new(1.0 / f64::from(n), 0.0), Truncation::adaptive(100));
        assert!(matches!(harmonic, Err(Error::NonConvergence { cutoff: 100, .. })));

        let noise = mode_sum(|n| C64::new(1e-30 / f64::from(n), 0.0), Truncation::adaptive(100));
        assert!(noise.is_err());
        let floored = mode_sum_with_floor(
            |n| C64::new(1e-30 / f64::from(n), 0.0),
            Truncation::adaptive(100),
            |_| 1e-29,
        )
        .unwrap();
        assert_eq!(floored.last_mode, STALL_RUN);

        let fixed = mode_sum(|n| C64::new(f64::from(n), 0.0), Truncation::Fixed(4)).unwrap();
        assert_eq!(fixed.value.re, 10.0);
    }
}
