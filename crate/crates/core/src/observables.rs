//! Second-order probe phase, excitation probability, reference phase,
//! interferometric phase difference, visibility and phase resolution.
//!
//! All state-independent integrals are gathered once in [`Integrals`]; the
//! per-state assembly is then a handful of complex multiplications, which is
//! what makes large sweeps cheap.
//!
//! # Term table
//!
//! A detector starting in a level with initial flip sign `s` (ground: `+`,
//! excited: `-`) contributes, at second order, `-lambda^2` times
//!
//! ```text
//!   conj(F)^2   K(-s, +) o K(s, +)
//! + conj(F) G [ K(-s, +) o K(s, -) + K(-s, -) o K(s, +) ]
//! + G^2         K(-s, -) o K(s, -)
//! + sum_n       K_n(-s, -) o K_n(s, +)
//! ```
//!
//! where `F`, `G` are the coherent amplitudes of bra and ket, `K(g, +)` is the
//! integrand `e^{i(g Omega + omega) t}` and `K(g, -)` is `e^{i(g Omega - omega) t}`,
//! i.e. the conjugate of `K(-g, +)`. For the ground level of the qubit this
//! reproduces `I_- o I_+`, `I_- o I_-* + I_+* o I_+`, `I_+* o I_-*` and
//! `sum I_+* o I_+`; for the excited level `I_+ o I_-`, `I_+ o I_+* + I_-* o I_-`,
//! `I_-* o I_+*` and `sum I_-* o I_-`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::kernels::{mode_sum_with_floor, ordered, NOISE_FLOOR, Branch, Coupler, Factor, Truncation};
use crate::model::{coherent_overlap, BellCatState, Level, System};

/// Excitation probability above which a point is flagged as disturbing.
pub const EXCITATION_LIMIT: f64 = 1e-2;

/// `|1 + eta1 + eta2|` below which the logarithm is refused.
pub const DEGENERATE_AMPLITUDE: f64 = 1e-12;

/// Initial flip sign of a detector level.
pub(crate) fn flip_sign(level: Level) -> Branch {
    match level {
        Level::Ground => Branch::Plus,
        Level::Excited => Branch::Minus,
    }
}

/// Integrand `e^{i(gap * Omega + field * omega_n) t}` as a [`Factor`].
pub(crate) fn factor(coupler: Coupler, gap: Branch, field: Branch, mode: u32) -> Factor {
    match field {
        Branch::Plus => Factor {
            coupler,
            branch: gap,
            mode,
            conj: false,
        },
        Branch::Minus => Factor {
            coupler,
            branch: gap.opposite(),
            mode,
            conj: true,
        },
    }
}

/// Coefficients of one second-order block (see the module docs).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SecondOrderBlock {
    pub conj_sq: C64,
    pub mixed: C64,
    pub sq: C64,
    pub vacuum: C64,
}

impl SecondOrderBlock {
    fn resonant(coupler: Coupler, start: Branch, mode: u32, sys: &System) -> Self {
        let later = start.opposite();
        let f = |gap, field| factor(coupler, gap, field, mode);
        SecondOrderBlock {
            conj_sq: ordered(f(later, Branch::Plus), f(start, Branch::Plus), sys),
            mixed: ordered(f(later, Branch::Plus), f(start, Branch::Minus), sys)
                + ordered(f(later, Branch::Minus), f(start, Branch::Plus), sys),
            sq: ordered(f(later, Branch::Minus), f(start, Branch::Minus), sys),
            vacuum: C64::new(0.0, 0.0),
        }
    }

    /// The coherent part: `conj(F)^2 a + conj(F) G b + G^2 c`.
    pub fn coherent(&self, bra: C64, ket: C64) -> C64 {
        let fc = bra.conj();
        fc * fc * self.conj_sq + fc * ket * self.mixed + ket * ket * self.sq
    }

    pub fn eval(&self, bra: C64, ket: C64) -> C64 {
        self.coherent(bra, ket) + self.vacuum
    }
}

/// First-order single integrals of one detector in the resonant mode:
/// `J(s; F, G) = conj(F) K(s, +) + G K(s, -)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FirstOrderPair {
    /// `[K(+, +), K(+, -)]` and `[K(-, +), K(-, -)]`.
    pub plus: [C64; 2],
    pub minus: [C64; 2],
}

impl FirstOrderPair {
    fn new(coupler: Coupler, mode: u32, sys: &System) -> Self {
        let k = |gap, field| factor(coupler, gap, field, mode).single(sys);
        FirstOrderPair {
            plus: [k(Branch::Plus, Branch::Plus), k(Branch::Plus, Branch::Minus)],
            minus: [k(Branch::Minus, Branch::Plus), k(Branch::Minus, Branch::Minus)],
        }
    }

    pub fn j(&self, sign: Branch, bra: C64, ket: C64) -> C64 {
        let k = match sign {
            Branch::Plus => self.plus,
            Branch::Minus => self.minus,
        };
        bra.conj() * k[0] + ket * k[1]
    }
}

/// Mode sums over the vacuum fluctuations of every cavity mode.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VacuumSums {
    /// `sum X_+* o X_+`.
    pub probe_ordered: C64,
    /// `sum |X_+|^2`.
    pub probe_sq: f64,
    /// `[sum I_+* o I_+, sum I_-* o I_-]`, indexed by qubit level.
    pub qubit_ordered: [C64; 2],
    /// `products[a][b] = sum conj(I_{s_b}) I_{s_a}`, indices 0 for `+`, 1 for `-`.
    pub qubit_products: [[C64; 2]; 2],
    /// Largest mode reached by any of the sums.
    pub last_mode: u32,
}

fn branch_index(b: Branch) -> usize {
    match b {
        Branch::Plus => 0,
        Branch::Minus => 1,
    }
}

impl VacuumSums {
    pub fn new(sys: &System, truncation: Truncation) -> Result<Self> {
        let mut last = 0;
        // Products of two single integrals are bounded by T^2 / (n pi).
        let t = sys.interaction_time();
        let floor = |n: u32| NOISE_FLOOR * t * t / (f64::from(n) * PI);
        let mut run = |term: &dyn Fn(u32) -> C64| -> Result<C64> {
            let s = mode_sum_with_floor(term, truncation, floor)?;
            last = last.max(s.last_mode);
            Ok(s.value)
        };
        let xp = |n| Factor::probe(Branch::Plus, n);
        let iq = |b, n| Factor::qubit(b, n);

        let probe_ordered = run(&|n| ordered(xp(n).star(), xp(n), sys))?;
        let probe_sq = run(&|n| C64::new(xp(n).single(sys).norm_sqr(), 0.0))?.re;
        let mut qubit_ordered = [C64::new(0.0, 0.0); 2];
        for level in Level::BOTH {
            let s = flip_sign(level);
            qubit_ordered[level as usize] = run(&|n| ordered(iq(s, n).star(), iq(s, n), sys))?;
        }
        let mut qubit_products = [[C64::new(0.0, 0.0); 2]; 2];
        qubit_products[0][0] = C64::new(run(&|n| C64::new(iq(Branch::Plus, n).single(sys).norm_sqr(), 0.0))?.re, 0.0);
        qubit_products[1][1] = C64::new(run(&|n| C64::new(iq(Branch::Minus, n).single(sys).norm_sqr(), 0.0))?.re, 0.0);
        qubit_products[0][1] = run(&|n| iq(Branch::Minus, n).single(sys).conj() * iq(Branch::Plus, n).single(sys))?;
        qubit_products[1][0] = qubit_products[0][1].conj();

        Ok(VacuumSums {
            probe_ordered,
            probe_sq,
            qubit_ordered,
            qubit_products,
            last_mode: last,
        })
    }

    pub(crate) fn qubit_product(&self, ket: Branch, bra: Branch) -> C64 {
        self.qubit_products[branch_index(ket)][branch_index(bra)]
    }
}

/// Everything about the system that does not depend on the cat state.
#[derive(Clone, Debug, PartialEq)]
pub struct Integrals {
    pub sys: System,
    pub truncation: Truncation,
    pub time: f64,
    /// `I_{+,kappa}`, `I_{-,kappa}`.
    pub i_plus: C64,
    pub i_minus: C64,
    /// `X_{+,kappa}`, `X_{-,kappa}`.
    pub x_plus: C64,
    pub x_minus: C64,
    pub qubit_first: FirstOrderPair,
    pub probe_first: FirstOrderPair,
    /// Qubit blocks for the ground and excited levels.
    pub qubit_blocks: [SecondOrderBlock; 2],
    /// Probe block; the probe always starts in its ground state.
    pub probe_block: SecondOrderBlock,
    pub vacuum: VacuumSums,
}

impl Integrals {
    pub fn new(sys: &System, truncation: Truncation) -> Result<Self> {
        let kappa = sys.cavity.kappa;
        let vacuum = VacuumSums::new(sys, truncation)?;
        let mut qubit_blocks = [SecondOrderBlock::default(); 2];
        for level in Level::BOTH {
            let mut block = SecondOrderBlock::resonant(Coupler::Qubit, flip_sign(level), kappa, sys);
            block.vacuum = vacuum.qubit_ordered[level as usize];
            qubit_blocks[level as usize] = block;
        }
        let mut probe_block = SecondOrderBlock::resonant(Coupler::Probe, Branch::Plus, kappa, sys);
        probe_block.vacuum = vacuum.probe_ordered;
        Ok(Integrals {
            sys: *sys,
            truncation,
            time: sys.interaction_time(),
            i_plus: Factor::qubit(Branch::Plus, kappa).single(sys),
            i_minus: Factor::qubit(Branch::Minus, kappa).single(sys),
            x_plus: Factor::probe(Branch::Plus, kappa).single(sys),
            x_minus: Factor::probe(Branch::Minus, kappa).single(sys),
            qubit_first: FirstOrderPair::new(Coupler::Qubit, kappa, sys),
            probe_first: FirstOrderPair::new(Coupler::Probe, kappa, sys),
            qubit_blocks,
            probe_block,
            vacuum,
        })
    }

    /// Adaptive mode sums up to the cavity's mode cutoff.
    pub fn adaptive(sys: &System) -> Result<Self> {
        Self::new(sys, Truncation::adaptive(sys.cavity.mode_cutoff))
    }

    pub fn lambda_p(&self) -> f64 {
        self.sys.probe.coupling
    }

    pub fn lambda_q(&self) -> f64 {
        self.sys.qubit.coupling
    }

    pub fn transition_probability(&self, state: &BellCatState) -> f64 {
        let lp2 = self.lambda_p().powi(2);
        Level::BOTH
            .iter()
            .map(|&level| {
                let c = state.amplitude(level);
                let f = state.field(level);
                // |conj(F) X_+ + F X_-*|^2; the second term vanishes for an even resonant mode.
                let coherent = self.probe_first.j(Branch::Plus, f, f).norm_sqr();
                c * c * (coherent + self.vacuum.probe_sq)
            })
            .sum::<f64>()
            * lp2
    }

    pub fn eta1(&self, state: &BellCatState) -> C64 {
        // -2i lambda_q A B Re[(I_+* beta + I_- alpha*) <alpha|beta>]
        let ov = coherent_overlap(state.beta, state.alpha).value();
        let bracket = self.i_plus.conj() * state.beta + self.i_minus * state.alpha.conj();
        C64::new(0.0, -2.0 * self.lambda_q() * state.a * state.b * (bracket * ov).re)
    }

    pub fn eta2(&self, state: &BellCatState) -> Eta2 {
        let lp2 = self.lambda_p().powi(2);
        let lq2 = self.lambda_q().powi(2);
        let mut out = Eta2::default();
        for level in Level::BOTH {
            let c2 = state.amplitude(level).powi(2);
            let f = state.field(level);
            let q = &self.qubit_blocks[level as usize];
            out.qubit_coherent -= lq2 * c2 * q.coherent(f, f);
            out.qubit_vacuum -= lq2 * c2 * q.vacuum;
            out.probe_coherent -= lp2 * c2 * self.probe_block.coherent(f, f);
            out.probe_vacuum -= lp2 * c2 * self.probe_block.vacuum;
        }
        out
    }

    pub fn eta_total(&self, state: &BellCatState) -> Result<C64> {
        let z = C64::new(1.0, 0.0) + self.eta1(state) + self.eta2(state).total();
        neg_i_log(z)
    }

    pub fn eta_reference(&self) -> Result<C64> {
        neg_i_log(C64::new(1.0, 0.0) - self.lambda_p().powi(2) * self.vacuum.probe_ordered)
    }

    pub fn interferometric_phase(&self, state: &BellCatState) -> Result<PhaseResult> {
        let eta = self.eta_total(state)?;
        let eta_ref = self.eta_reference()?;
        let p_excite = self.transition_probability(state);
        let visibility = (-2.0 * eta.im).exp();
        Ok(PhaseResult {
            eta,
            eta_ref,
            delta_gamma: wrap_phase(eta.re - eta_ref.re),
            visibility,
            p_excite,
            flags: PhaseFlags {
                high_excitation: p_excite > EXCITATION_LIMIT,
                negative_im_eta: eta.im < 0.0,
            },
        })
    }

    /// `|Delta gamma(|alpha| + dalpha) - Delta gamma(|alpha|)|` at fixed phase of `alpha`.
    pub fn phase_resolution(&self, state: &BellCatState, dalpha: f64) -> Result<f64> {
        let base = self.interferometric_phase(state)?.delta_gamma;
        let shifted = shift_alpha(state, dalpha);
        let moved = self.interferometric_phase(&shifted)?.delta_gamma;
        Ok(wrap_phase(moved - base).abs())
    }
}

/// Same state with `|alpha|` increased by `dalpha`. A vanishing `alpha`
/// takes the phase `-arg(beta)`.
pub fn shift_alpha(state: &BellCatState, dalpha: f64) -> BellCatState {
    let theta = if state.alpha.norm() > 0.0 {
        state.alpha.arg()
    } else {
        -state.beta.arg()
    };
    BellCatState {
        alpha: C64::from_polar(state.alpha.norm() + dalpha, theta),
        ..*state
    }
}

/// Second-order amplitude split by origin.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Eta2 {
    /// The eight resonant-mode qubit terms weighted by the coherent amplitudes.
    pub qubit_coherent: C64,
    pub qubit_vacuum: C64,
    pub probe_coherent: C64,
    pub probe_vacuum: C64,
}

impl Eta2 {
    pub fn total(&self) -> C64 {
        self.qubit_coherent + self.qubit_vacuum + self.probe_coherent + self.probe_vacuum
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PhaseFlags {
    /// `p_excite > 1e-2`.
    pub high_excitation: bool,
    /// `Im(eta) < 0`, which exact normalization forbids; measures truncation error.
    pub negative_im_eta: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseResult {
    pub eta: C64,
    pub eta_ref: C64,
    pub delta_gamma: f64,
    pub visibility: f64,
    pub p_excite: f64,
    pub flags: PhaseFlags,
}

/// `-i Log(z)` on the principal branch.
pub fn neg_i_log(z: C64) -> Result<C64> {
    let r = z.norm();
    if r < DEGENERATE_AMPLITUDE {
        return Err(Error::DegenerateAmplitude(r));
    }
    Ok(C64::new(z.arg(), -r.ln()))
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    } else if y > PI {
        y -= 2.0 * PI;
    }
    y
}

pub fn transition_probability(state: &BellCatState, sys: &System) -> Result<f64> {
    Ok(Integrals::adaptive(sys)?.transition_probability(state))
}

pub fn eta1(state: &BellCatState, sys: &System) -> C64 {
    let kappa = sys.cavity.kappa;
    let integrals = Integrals {
        sys: *sys,
        truncation: Truncation::Fixed(0),
        time: sys.interaction_time(),
        i_plus: Factor::qubit(Branch::Plus, kappa).single(sys),
        i_minus: Factor::qubit(Branch::Minus, kappa).single(sys),
        x_plus: C64::default(),
        x_minus: C64::default(),
        qubit_first: FirstOrderPair::default(),
        probe_first: FirstOrderPair::default(),
        qubit_blocks: Default::default(),
        probe_block: Default::default(),
        vacuum: Default::default(),
    };
    integrals.eta1(state)
}

pub fn eta2(state: &BellCatState, sys: &System) -> Result<Eta2> {
    Ok(Integrals::adaptive(sys)?.eta2(state))
}

pub fn eta_total(state: &BellCatState, sys: &System) -> Result<C64> {
    Integrals::adaptive(sys)?.eta_total(state)
}

pub fn eta_reference(sys: &System) -> Result<C64> {
    Integrals::adaptive(sys)?.eta_reference()
}

pub fn interferometric_phase(state: &BellCatState, sys: &System) -> Result<PhaseResult> {
    Integrals::adaptive(sys)?.interferometric_phase(state)
}

pub fn phase_resolution(state: &BellCatState, sys: &System, dalpha: f64) -> Result<f64> {
    Integrals::adaptive(sys)?.phase_resolution(state, dalpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{i_circ, x_circ};
    use crate::model::{CavityConfig, ProbeConfig, QubitConfig};

    fn desk(lambda_p: f64, lambda_q: f64, x0: f64) -> System {
        let cavity = CavityConfig::unit(2, 200_000).unwrap();
        let probe = ProbeConfig::resonant(&cavity, 0.1, lambda_p).unwrap();
        let qubit = QubitConfig::new(&cavity, x0, lambda_q, 0.2 * cavity.resonant_frequency()).unwrap();
        System::new(cavity, probe, qubit).unwrap()
    }

    /// Geometry whose phases are not commensurate with `2 pi`.
    fn generic(lambda_p: f64, lambda_q: f64) -> System {
        let cavity = CavityConfig::unit(2, 200_000).unwrap();
        let probe = ProbeConfig::resonant(&cavity, 0.13, lambda_p).unwrap();
        let qubit = QubitConfig::new(&cavity, 0.3, lambda_q, 0.23 * cavity.resonant_frequency()).unwrap();
        System::new(cavity, probe, qubit).unwrap()
    }

    fn cat(a: f64, alpha: f64, beta: f64) -> BellCatState {
        let b = (1.0 - a * a).sqrt();
        BellCatState::with_opposite_phases(a, b, alpha, beta, PI / 2.0).unwrap()
    }

    #[test]
    fn term_table_matches_named_products() {
        let sys = desk(1e-3, 1e-3, 0.3);
        let ints = Integrals::new(&sys, Truncation::Fixed(3)).unwrap();
        let (p, m) = (Branch::Plus, Branch::Minus);
        let ip = Factor::qubit(p, 2);
        let im = Factor::qubit(m, 2);
        let g = &ints.qubit_blocks[0];
        assert_eq!(g.conj_sq, i_circ(m, 2, p, 2, &sys));
        assert_eq!(g.mixed, ordered(im, im.star(), &sys) + ordered(ip.star(), ip, &sys));
        assert_eq!(g.sq, ordered(ip.star(), im.star(), &sys));
        let e = &ints.qubit_blocks[1];
        assert_eq!(e.conj_sq, i_circ(p, 2, m, 2, &sys));
        assert_eq!(e.mixed, ordered(ip, ip.star(), &sys) + ordered(im.star(), im, &sys));
        assert_eq!(e.sq, ordered(im.star(), ip.star(), &sys));
        assert_eq!(ints.probe_block.conj_sq, x_circ(m, 2, p, 2, &sys));
    }

    #[test]
    fn transition_probability_reduces_to_even_mode_formula() {
        let sys = generic(1e-3, 1e-3);
        let ints = Integrals::adaptive(&sys).unwrap();
        let s = cat(0.6, 1.3, 0.7);
        let closed = sys.probe.coupling.powi(2)
            * ((0.36 * 1.69 + 0.64 * 0.49) * ints.x_plus.norm_sqr() + ints.vacuum.probe_sq);
        let p = ints.transition_probability(&s);
        assert!(((p - closed) / closed).abs() < 1e-13);
        let zero = Integrals::adaptive(&desk(0.0, 1e-3, 0.25)).unwrap();
        assert_eq!(zero.transition_probability(&s), 0.0);
    }

    #[test]
    fn eta1_vanishes_without_entanglement_or_at_node() {
        let sys = desk(1e-3, 1e-3, 0.25);
        assert_eq!(eta1(&cat(1.0, 1.0, 1.0), &sys), C64::new(0.0, 0.0));
        let node = desk(1e-3, 1e-3, 0.5);
        assert_eq!(eta1(&cat(0.6, 1.0, 1.0), &node).norm(), 0.0);
        let v = eta1(&cat(0.6, 0.4, 0.3), &sys);
        assert_eq!(v.re, 0.0);
        assert!(v.im != 0.0);
    }

    #[test]
    fn eta1_is_suppressed_for_opposite_phases() {
        let sys = desk(1e-3, 1e-3, 0.25);
        let v = eta1(&cat(std::f64::consts::FRAC_1_SQRT_2, 3.0, 3.0), &sys);
        assert!(v.im.abs() <= 1e-5);
    }

    #[test]
    fn eta2_vanishes_without_coupling() {
        let sys = desk(0.0, 0.0, 0.25);
        let e = eta2(&cat(0.6, 1.0, 2.0), &sys).unwrap();
        assert_eq!(e.total(), C64::new(0.0, 0.0));
        assert_eq!(eta_total(&cat(0.6, 1.0, 2.0), &sys).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn reference_phase_is_probe_over_vacuum() {
        let sys = desk(2e-3, 0.0, 0.25);
        let ints = Integrals::adaptive(&sys).unwrap();
        let vacuum = BellCatState::coherent(C64::new(0.0, 0.0));
        let a = ints.eta_total(&vacuum).unwrap();
        let b = ints.eta_reference().unwrap();
        assert!((a - b).norm() <= 1e-15 * b.norm().max(1e-300));
        assert_eq!(eta_reference(&desk(0.0, 0.0, 0.25)).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn vacuum_in_both_arms_has_no_phase_difference() {
        let sys = desk(2e-3, 0.0, 0.25);
        let r = interferometric_phase(&BellCatState::coherent(C64::new(0.0, 0.0)), &sys).unwrap();
        assert_eq!(r.delta_gamma, 0.0);
    }

    #[test]
    fn log_branch_saturates_at_half_pi() {
        let eta = neg_i_log(C64::new(0.0, 1e9)).unwrap();
        assert!((eta.re - PI / 2.0).abs() < 1e-15);
        assert!(matches!(neg_i_log(C64::new(1e-13, 0.0)), Err(Error::DegenerateAmplitude(_))));
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        for k in -3..=3 {
            let x = 0.7 + 2.0 * PI * f64::from(k);
            assert!((wrap_phase(x) - 0.7).abs() < 1e-14);
        }
    }

    #[test]
    fn coherent_limit_matches_bare_coherent_state() {
        // B = 0 against lambda_q = 0 with a pure coherent state: the qubit
        // stays in its ground level, so only the vacuum qubit term survives.
        let sys = desk(2e-3, 3e-3, 0.25);
        let ints = Integrals::adaptive(&sys).unwrap();
        let bare = Integrals::adaptive(&sys.with_couplings(2e-3, 0.0)).unwrap();
        let alpha = C64::from_polar(1.7, 0.4);
        let s = BellCatState::new(1.0, 0.0, alpha, C64::new(0.0, 0.0)).unwrap();
        let e = ints.eta2(&s);
        let b = bare.eta2(&BellCatState::coherent(alpha));
        assert_eq!(ints.eta1(&s), C64::new(0.0, 0.0));
        assert!((e.probe_coherent - b.probe_coherent).norm() <= 1e-12 * b.probe_coherent.norm());
        assert!((e.probe_vacuum - b.probe_vacuum).norm() <= 1e-12 * b.probe_vacuum.norm());
        assert!((ints.transition_probability(&s) - bare.transition_probability(&BellCatState::coherent(alpha))).abs() < 1e-24);
    }

    #[test]
    fn opposite_phase_coherent_qubit_terms_have_no_phase_part() {
        // With A = B, |alpha| = |beta| and theta = -phi the eight terms pair
        // into products of single integrals, so their sum is real.
        let sys = generic(1e-3, 1e-3);
        let ints = Integrals::adaptive(&sys).unwrap();
        let e = ints.eta2(&cat(std::f64::consts::FRAC_1_SQRT_2, 2.0, 2.0));
        assert!(e.qubit_coherent.im.abs() <= 1e-12 * e.total().norm());
        let (ip, im) = (ints.i_plus, ints.i_minus);
        let expected = -0.5 * 4.0 * sys.qubit.coupling.powi(2) * (im - ip.conj()).norm_sqr();
        assert!((e.qubit_coherent.re - expected).abs() <= 1e-12 * expected.abs());
    }

    #[test]
    fn phase_resolution_is_zero_for_zero_step() {
        let sys = desk(2e-3, 2e-3, 0.25);
        let s = cat(0.6, 1.0, 1.0);
        assert_eq!(phase_resolution(&s, &sys, 0.0).unwrap(), 0.0);
        let ints = Integrals::adaptive(&sys).unwrap();
        let direct = ints.phase_resolution(&s, 0.5).unwrap();
        let a = ints.interferometric_phase(&s).unwrap().delta_gamma;
        let b = ints.interferometric_phase(&shift_alpha(&s, 0.5)).unwrap().delta_gamma;
        assert_eq!(direct, wrap_phase(b - a).abs());
    }
}
