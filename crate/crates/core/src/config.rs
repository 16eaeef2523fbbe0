//! Plain-text (TOML) parameter files.
//!
//! ```toml
//! L = 0.019
//! c = 299792458.0
//! v = 1000.0
//! kappa = 2
//! lambda_p_T = 100.0
//! lambda_q_over_lambda_p = 1.0
//! x0_over_L = 0.25
//! delta_over_omega = -0.2
//! A = 0.7071067811865476
//! B = 0.7071067811865476
//! alpha_abs = 10.0
//! theta = 1.5707963267948966
//! beta_abs = 10.0
//! phi = -1.5707963267948966
//! mode_cutoff = 1000000
//! ```
//!
//! Every key is optional; missing keys take the defaults of [`Params::default`].

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Truncation, DEFAULT_SUM_TOL};
use crate::model::{to_internal_units, BellCatState, CavityConfig, ProbeConfig, QubitConfig, System};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default dimensionless probe coupling `lambda_p T`.
pub const DEFAULT_LAMBDA_P_T: f64 = 100.0;

/// Default `delta / omega_kappa`; negative puts the qubit gap above the resonant mode.
pub const DEFAULT_DELTA_OVER_OMEGA: f64 = -0.2;

pub const DEFAULT_MODE_CUTOFF: u32 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "c")]
    pub light_speed: f64,
    pub v: f64,
    pub kappa: u32,
    #[serde(rename = "lambda_p_T")]
    pub lambda_p_t: f64,
    pub lambda_q_over_lambda_p: f64,
    #[serde(rename = "x0_over_L")]
    pub x0_over_l: f64,
    pub delta_over_omega: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub alpha_abs: f64,
    pub theta: f64,
    pub beta_abs: f64,
    pub phi: f64,
    pub mode_cutoff: u32,
    /// Relative tolerance of the adaptive mode sums.
    pub sum_tol: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            length: 0.019,
            light_speed: SPEED_OF_LIGHT,
            v: 1e3,
            kappa: 2,
            lambda_p_t: DEFAULT_LAMBDA_P_T,
            lambda_q_over_lambda_p: 1.0,
            x0_over_l: 0.25,
            delta_over_omega: DEFAULT_DELTA_OVER_OMEGA,
            a: FRAC_1_SQRT_2,
            b: FRAC_1_SQRT_2,
            alpha_abs: 1.0,
            theta: FRAC_PI_2,
            beta_abs: 1.0,
            phi: -FRAC_PI_2,
            mode_cutoff: DEFAULT_MODE_CUTOFF,
            sum_tol: DEFAULT_SUM_TOL,
        }
    }
}

impl Params {
    /// Internal-unit geometry `L = c = 1`, `v = 0.1`, probed for `T = 10`.
    pub fn desk() -> Self {
        Params {
            length: 1.0,
            light_speed: 1.0,
            v: 0.1,
            lambda_p_t: 1e-2,
            mode_cutoff: 200_000,
            ..Params::default()
        }
    }

    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("parameters always serialize")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn interaction_time(&self) -> f64 {
        self.length / self.v
    }

    /// Builds and validates the internal-unit system.
    pub fn to_system(&self) -> Result<System> {
        let cavity = CavityConfig::new(self.length, self.light_speed, self.kappa, self.mode_cutoff)?;
        let lambda_p = self.lambda_p_t / self.interaction_time();
        let lambda_q = self.lambda_q_over_lambda_p * lambda_p;
        let probe = ProbeConfig::resonant(&cavity, self.v, lambda_p)?;
        let qubit = QubitConfig::new(
            &cavity,
            self.x0_over_l * self.length,
            lambda_q,
            self.delta_over_omega * cavity.resonant_frequency(),
        )?;
        let (c, p, q, _) = to_internal_units(&cavity, &probe, &qubit)?;
        System::new(c, p, q)
    }

    pub fn state(&self) -> Result<BellCatState> {
        BellCatState::polar(self.a, self.b, self.alpha_abs, self.theta, self.beta_abs, self.phi)
    }

    pub fn truncation(&self) -> Result<Truncation> {
        if !(self.sum_tol > 0.0 && self.sum_tol < 1.0) {
            return Err(Error::InvalidConfig(format!("sum_tol must lie in (0, 1), got {}", self.sum_tol)));
        }
        Ok(Truncation::Adaptive {
            tol: self.sum_tol,
            cutoff: self.mode_cutoff,
        })
    }

    /// Checks every invariant without evaluating anything.
    pub fn validate(&self) -> Result<()> {
        self.to_system()?;
        self.state()?;
        self.truncation()?;
        Ok(())
    }
}
