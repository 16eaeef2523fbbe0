//! Physical parameters of the cavity, the flying probe, the cavity qubit and
//! the entangled qubit-cat state, plus the dimensionless unit system.
//!
//! Internally every quantity is expressed with the cavity length and the
//! speed of light set to one, so frequencies are measured in units of `c/L`
//! and the mode ladder is `omega_n = n * pi`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Relative distance below which the qubit gap is considered to collide with
/// a cavity mode.
pub const COLLISION_TOLERANCE: f64 = 1e-9;

/// Default resonant mode: the smallest even mode.
pub const DEFAULT_KAPPA: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavityConfig {
    pub length: f64,
    pub light_speed: f64,
    /// Index of the mode holding the cat state.
    pub kappa: u32,
    /// Largest mode index any mode sum may reach.
    pub mode_cutoff: u32,
}

impl CavityConfig {
    pub fn new(length: f64, light_speed: f64, kappa: u32, mode_cutoff: u32) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidConfig(format!("cavity length must be positive, got {length}")));
        }
        if !(light_speed > 0.0 && light_speed.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "light speed must be positive, got {light_speed}"
            )));
        }
        if kappa == 0 || !kappa.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "resonant mode index must be even and positive, got {kappa}"
            )));
        }
        if mode_cutoff < kappa {
            return Err(Error::InvalidConfig(format!(
                "mode cutoff {mode_cutoff} is below the resonant mode {kappa}"
            )));
        }
        Ok(CavityConfig {
            length,
            light_speed,
            kappa,
            mode_cutoff,
        })
    }

    /// Internal-unit cavity (`L = c = 1`).
    pub fn unit(kappa: u32, mode_cutoff: u32) -> Result<Self> {
        Self::new(1.0, 1.0, kappa, mode_cutoff)
    }

    pub fn wavenumber(&self, mode: u32) -> f64 {
        f64::from(mode) * PI / self.length
    }

    pub fn frequency(&self, mode: u32) -> f64 {
        self.light_speed * self.wavenumber(mode)
    }

    pub fn resonant_frequency(&self) -> f64 {
        self.frequency(self.kappa)
    }
}

/// The two-level probe crossing the cavity at constant speed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeConfig {
    pub speed: f64,
    pub coupling: f64,
    /// Probe gap. Equal to the resonant cavity frequency except in control runs.
    pub gap: f64,
}

impl ProbeConfig {
    /// Probe tuned to the resonant cavity mode.
    pub fn resonant(cavity: &CavityConfig, speed: f64, coupling: f64) -> Result<Self> {
        if !(speed > 0.0 && speed < cavity.light_speed) {
            return Err(Error::InvalidConfig(format!(
                "probe speed must satisfy 0 < v < c, got v = {speed}, c = {}",
                cavity.light_speed
            )));
        }
        if !coupling.is_finite() || coupling < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "probe coupling must be finite and non-negative, got {coupling}"
            )));
        }
        Ok(ProbeConfig {
            speed,
            coupling,
            gap: cavity.resonant_frequency(),
        })
    }

    /// Probe with an arbitrary gap, used for odd-mode control runs.
    pub fn with_gap(speed: f64, coupling: f64, gap: f64) -> Self {
        ProbeConfig {
            speed,
            coupling,
            gap,
        }
    }

    pub fn interaction_time(&self, cavity: &CavityConfig) -> f64 {
        cavity.length / self.speed
    }
}

/// The cavity qubit sitting at a fixed position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitConfig {
    pub position: f64,
    pub coupling: f64,
    /// `omega_kappa - gap`.
    pub detuning: f64,
    pub gap: f64,
}

impl QubitConfig {
    pub fn new(cavity: &CavityConfig, position: f64, coupling: f64, detuning: f64) -> Result<Self> {
        if !(0.0..=cavity.length).contains(&position) {
            return Err(Error::InvalidConfig(format!(
                "qubit position {position} lies outside [0, {}]",
                cavity.length
            )));
        }
        if !coupling.is_finite() || coupling < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "qubit coupling must be finite and non-negative, got {coupling}"
            )));
        }
        let gap = cavity.resonant_frequency() - detuning;
        if gap.is_nan() || gap <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "qubit gap must be positive, got {gap} (detuning {detuning})"
            )));
        }
        if let Some(mode) = colliding_mode(cavity, gap) {
            return Err(Error::InvalidConfig(format!(
                "qubit gap {gap} collides with cavity mode {mode} (frequency {})",
                cavity.frequency(mode)
            )));
        }
        Ok(QubitConfig {
            position,
            coupling,
            detuning,
            gap,
        })
    }
}

/// Returns the mode whose frequency lies within the collision tolerance of `gap`.
fn colliding_mode(cavity: &CavityConfig, gap: f64) -> Option<u32> {
    let ratio = gap / cavity.frequency(1);
    let nearest = ratio.round();
    if nearest < 1.0 || nearest > f64::from(cavity.mode_cutoff) {
        return None;
    }
    let mode = nearest as u32;
    let omega = cavity.frequency(mode);
    ((gap - omega).abs() < COLLISION_TOLERANCE * omega).then_some(mode)
}

/// `A |g, alpha> + B |e, beta>` with real `A`, `B`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellCatState {
    pub a: f64,
    pub b: f64,
    pub alpha: C64,
    pub beta: C64,
}

impl BellCatState {
    pub fn new(a: f64, b: f64, alpha: C64, beta: C64) -> Result<Self> {
        let norm = a * a + b * b;
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "amplitudes must satisfy A^2 + B^2 = 1, got {norm}"
            )));
        }
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidConfig("coherent amplitudes must be finite".into()));
        }
        Ok(BellCatState { a, b, alpha, beta })
    }

    pub fn polar(a: f64, b: f64, alpha_abs: f64, theta: f64, beta_abs: f64, phi: f64) -> Result<Self> {
        Self::new(a, b, C64::from_polar(alpha_abs, theta), C64::from_polar(beta_abs, phi))
    }

    /// State with the default phase convention `phi = -theta`.
    pub fn with_opposite_phases(a: f64, b: f64, alpha_abs: f64, beta_abs: f64, theta: f64) -> Result<Self> {
        Self::polar(a, b, alpha_abs, theta, beta_abs, -theta)
    }

    /// Bare coherent state `|g, alpha>`.
    pub fn coherent(alpha: C64) -> Self {
        BellCatState {
            a: 1.0,
            b: 0.0,
            alpha,
            beta: C64::new(0.0, 0.0),
        }
    }

    pub(crate) fn amplitude(&self, level: Level) -> f64 {
        match level {
            Level::Ground => self.a,
            Level::Excited => self.b,
        }
    }

    pub(crate) fn field(&self, level: Level) -> C64 {
        match level {
            Level::Ground => self.alpha,
            Level::Excited => self.beta,
        }
    }
}

/// Cavity-qubit level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Ground,
    Excited,
}

impl Level {
    pub const BOTH: [Level; 2] = [Level::Ground, Level::Excited];

    pub fn flip(self) -> Level {
        match self {
            Level::Ground => Level::Excited,
            Level::Excited => Level::Ground,
        }
    }
}

/// `<beta|alpha>` stored as log-magnitude and phase so that overlaps of far
/// separated coherent states keep their exponent after the value underflows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Overlap {
    pub log_magnitude: f64,
    pub phase: f64,
}

impl Overlap {
    pub fn value(&self) -> C64 {
        C64::from_polar(self.log_magnitude.exp(), self.phase)
    }

    pub fn magnitude(&self) -> f64 {
        self.log_magnitude.exp()
    }
}

/// `<beta|alpha> = exp(-|alpha|^2/2 - |beta|^2/2 + conj(beta) alpha)`.
pub fn coherent_overlap(alpha: C64, beta: C64) -> Overlap {
    Overlap {
        log_magnitude: -0.5 * (alpha - beta).norm_sqr(),
        phase: (beta.conj() * alpha).im,
    }
}

/// Cavity, probe and qubit in internal units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct System {
    pub cavity: CavityConfig,
    pub probe: ProbeConfig,
    pub qubit: QubitConfig,
}

impl System {
    pub fn new(cavity: CavityConfig, probe: ProbeConfig, qubit: QubitConfig) -> Result<Self> {
        if (cavity.length - 1.0).abs() > 1e-15 || (cavity.light_speed - 1.0).abs() > 1e-15 {
            return Err(Error::InvalidConfig(
                "system must be expressed in internal units (L = c = 1)".into(),
            ));
        }
        Ok(System {
            cavity,
            probe,
            qubit,
        })
    }

    pub fn interaction_time(&self) -> f64 {
        self.probe.interaction_time(&self.cavity)
    }

    pub fn with_couplings(mut self, probe: f64, qubit: f64) -> Self {
        self.probe.coupling = probe;
        self.qubit.coupling = qubit;
        self
    }
}

/// Length and speed used to make quantities dimensionless.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitScale {
    pub length: f64,
    pub speed: f64,
}

impl UnitScale {
    /// Frequency unit `c / L`.
    pub fn frequency(&self) -> f64 {
        self.speed / self.length
    }

    pub fn to_si(
        &self,
        cavity: &CavityConfig,
        probe: &ProbeConfig,
        qubit: &QubitConfig,
    ) -> (CavityConfig, ProbeConfig, QubitConfig) {
        let f = self.frequency();
        (
            CavityConfig {
                length: cavity.length * self.length,
                light_speed: cavity.light_speed * self.speed,
                ..*cavity
            },
            ProbeConfig {
                speed: probe.speed * self.speed,
                coupling: probe.coupling * f,
                gap: probe.gap * f,
            },
            QubitConfig {
                position: qubit.position * self.length,
                coupling: qubit.coupling * f,
                detuning: qubit.detuning * f,
                gap: qubit.gap * f,
            },
        )
    }
}

/// Rescales SI configurations to `L = c = 1`. Validates the joint invariants
/// before rescaling.
pub fn to_internal_units(
    cavity: &CavityConfig,
    probe: &ProbeConfig,
    qubit: &QubitConfig,
) -> Result<(CavityConfig, ProbeConfig, QubitConfig, UnitScale)> {
    // Re-running the constructors checks every invariant of the SI inputs.
    let cavity_si = CavityConfig::new(cavity.length, cavity.light_speed, cavity.kappa, cavity.mode_cutoff)?;
    if !(probe.speed > 0.0 && probe.speed < cavity.light_speed) {
        return Err(Error::InvalidConfig(format!(
            "probe speed must satisfy 0 < v < c, got v = {}, c = {}",
            probe.speed, cavity.light_speed
        )));
    }
    QubitConfig::new(&cavity_si, qubit.position, qubit.coupling, qubit.detuning)?;

    let scale = UnitScale {
        length: cavity.length,
        speed: cavity.light_speed,
    };
    let f = scale.frequency();
    let cavity_int = CavityConfig {
        length: 1.0,
        light_speed: 1.0,
        ..cavity_si
    };
    let probe_int = ProbeConfig {
        speed: probe.speed / scale.speed,
        coupling: probe.coupling / f,
        gap: probe.gap / f,
    };
    let qubit_int = QubitConfig {
        position: qubit.position / scale.length,
        coupling: qubit.coupling / f,
        detuning: qubit.detuning / f,
        gap: qubit.gap / f,
    };
    Ok((cavity_int, probe_int, qubit_int, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const C_SI: f64 = 299_792_458.0;

    fn si_setup(length: f64, speed: f64, x0: f64) -> (CavityConfig, ProbeConfig, QubitConfig) {
        let cavity = CavityConfig::new(length, C_SI, 2, 1000).unwrap();
        let probe = ProbeConfig::resonant(&cavity, speed, 1e-2 * speed / length).unwrap();
        let qubit = QubitConfig::new(&cavity, x0, 3e-2 * speed / length, 0.2 * cavity.resonant_frequency()).unwrap();
        (cavity, probe, qubit)
    }

    #[test]
    fn figure_two_geometry_maps_to_internal_units() {
        let length = 0.019;
        let (cavity, probe, qubit) = si_setup(length, 1e3, length / 4.0);
        let (c, p, q, _) = to_internal_units(&cavity, &probe, &qubit).unwrap();
        assert_eq!(c.length, 1.0);
        assert_eq!(c.light_speed, 1.0);
        assert!((p.speed - 3.3356e-6).abs() < 1e-9);
        assert!((q.position - 0.25).abs() < 1e-15);
        assert!((p.gap - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn internal_inputs_map_to_themselves() {
        let cavity = CavityConfig::unit(2, 100).unwrap();
        let probe = ProbeConfig::resonant(&cavity, 0.1, 1e-3).unwrap();
        let qubit = QubitConfig::new(&cavity, 0.25, 1e-3, 0.4 * PI).unwrap();
        let (c, p, q, _) = to_internal_units(&cavity, &probe, &qubit).unwrap();
        assert_eq!((c, p, q), (cavity, probe, qubit));
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(CavityConfig::new(1.0, 1.0, 3, 10).is_err());
        assert!(CavityConfig::new(1.0, 1.0, 0, 10).is_err());
        let cavity = CavityConfig::unit(2, 100).unwrap();
        assert!(ProbeConfig::resonant(&cavity, 1.0, 0.1).is_err());
        assert!(ProbeConfig::resonant(&cavity, 1.5, 0.1).is_err());
        assert!(QubitConfig::new(&cavity, 1.5, 0.1, 0.1).is_err());
        assert!(QubitConfig::new(&cavity, -0.1, 0.1, 0.1).is_err());
        // Gap exactly on mode 1.
        assert!(QubitConfig::new(&cavity, 0.25, 0.1, PI).is_err());
        // Gap within 1e-10 relative of mode 3.
        assert!(QubitConfig::new(&cavity, 0.25, 0.1, 2.0 * PI - 3.0 * PI * (1.0 + 1e-10)).is_err());
        assert!(QubitConfig::new(&cavity, 0.25, 0.1, 2.0 * PI).is_err());

        let bad_speed = ProbeConfig::with_gap(2.0 * C_SI, 1.0, 1.0);
        let si = CavityConfig::new(0.019, C_SI, 2, 100).unwrap();
        let qubit = QubitConfig::new(&si, 0.005, 1.0, 0.2 * si.resonant_frequency()).unwrap();
        assert!(to_internal_units(&si, &bad_speed, &qubit).is_err());
    }

    #[test]
    fn overlap_examples() {
        let z = C64::new(0.3, -1.2);
        let same = coherent_overlap(z, z);
        assert_eq!(same.value(), C64::new(1.0, 0.0));

        let alpha = C64::from_polar(1.0, PI / 2.0);
        let beta = C64::from_polar(1.0, -PI / 2.0);
        let ov = coherent_overlap(alpha, beta);
        assert!((ov.value() - C64::new((-2.0f64).exp(), 0.0)).norm() < 1e-15);

        let alpha = C64::from_polar(300.0, PI / 2.0);
        let beta = C64::from_polar(300.0, -PI / 2.0);
        let ov = coherent_overlap(alpha, beta);
        assert!((ov.log_magnitude + 180_000.0).abs() < 1e-9);
        assert_eq!(ov.value(), C64::new(0.0, 0.0));
    }

    #[test]
    fn state_normalization_is_checked() {
        assert!(BellCatState::polar(0.6, 0.8, 1.0, 0.0, 1.0, 0.0).is_ok());
        assert!(BellCatState::polar(0.6, 0.6, 1.0, 0.0, 1.0, 0.0).is_err());
    }

    fn complex() -> impl Strategy<Value = C64> {
        (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(re, im)| C64::new(re, im))
    }

    proptest! {
        #[test]
        fn overlap_is_bounded_and_hermitian(a in complex(), b in complex()) {
            let ab = coherent_overlap(a, b).value();
            let ba = coherent_overlap(b, a).value();
            prop_assert!(ab.norm() <= 1.0 + 1e-15);
            prop_assert!((ab - ba.conj()).norm() <= 1e-15);
            if a != b {
                prop_assert!(ab.norm() < 1.0 || (a - b).norm() < 1e-7);
            }
        }

        #[test]
        fn unit_round_trip(length in 1e-3f64..10.0, speed_frac in 1e-7f64..0.9, x_frac in 0.0f64..1.0) {
            let (cavity, probe, qubit) = si_setup(length, speed_frac * C_SI, x_frac * length);
            let (c, p, q, scale) = to_internal_units(&cavity, &probe, &qubit).unwrap();
            let (c2, p2, q2) = scale.to_si(&c, &p, &q);
            let rel = |x: f64, y: f64| if x == 0.0 { y.abs() } else { ((x - y) / x).abs() };
            prop_assert!(rel(cavity.length, c2.length) < 1e-12);
            prop_assert!(rel(cavity.light_speed, c2.light_speed) < 1e-12);
            prop_assert!(rel(probe.speed, p2.speed) < 1e-12);
            prop_assert!(rel(probe.coupling, p2.coupling) < 1e-12);
            prop_assert!(rel(probe.gap, p2.gap) < 1e-12);
            prop_assert!(rel(qubit.position, q2.position) < 1e-12);
            prop_assert!(rel(qubit.coupling, q2.coupling) < 1e-12);
            prop_assert!(rel(qubit.detuning, q2.detuning) < 1e-12);
            prop_assert!(rel(qubit.gap, q2.gap) < 1e-12);
        }
    }
}
