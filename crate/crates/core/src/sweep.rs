//! Parameter sweeps over the closed-form pipeline.
//!
//! A sweep varies one parameter along a grid for every combination of
//! coupling ratio, series and resolution step. Points are evaluated in
//! parallel and collected in a fixed order: ratio, then series, then
//! resolution step, then grid index.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Params;
use crate::error::{Error, Result};
use crate::observables::{Integrals, PhaseFlags};
use crate::reduced::{bloch_observables, eigen_window, eigenvalues, reduced_state, von_neumann_entropy, Bloch};

/// A scalar parameter of [`Params`], named as in the config files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Key {
    L,
    #[serde(rename = "c")]
    C,
    #[serde(rename = "v")]
    V,
    #[serde(rename = "kappa")]
    Kappa,
    #[serde(rename = "lambda_p_T")]
    LambdaPT,
    #[serde(rename = "lambda_q_over_lambda_p")]
    Ratio,
    #[serde(rename = "x0_over_L")]
    X0,
    #[serde(rename = "delta_over_omega")]
    Delta,
    /// Setting `A` also sets `B = sqrt(1 - A^2)`; an explicit `B` applied
    /// afterwards overrides it.
    A,
    B,
    #[serde(rename = "alpha_abs")]
    AlphaAbs,
    #[serde(rename = "theta")]
    Theta,
    #[serde(rename = "beta_abs")]
    BetaAbs,
    #[serde(rename = "phi")]
    Phi,
}

impl Key {
    pub const ALL: [Key; 14] = [
        Key::L,
        Key::C,
        Key::V,
        Key::Kappa,
        Key::LambdaPT,
        Key::Ratio,
        Key::X0,
        Key::Delta,
        Key::A,
        Key::B,
        Key::AlphaAbs,
        Key::Theta,
        Key::BetaAbs,
        Key::Phi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Key::L => "L",
            Key::C => "c",
            Key::V => "v",
            Key::Kappa => "kappa",
            Key::LambdaPT => "lambda_p_T",
            Key::Ratio => "lambda_q_over_lambda_p",
            Key::X0 => "x0_over_L",
            Key::Delta => "delta_over_omega",
            Key::A => "A",
            Key::B => "B",
            Key::AlphaAbs => "alpha_abs",
            Key::Theta => "theta",
            Key::BetaAbs => "beta_abs",
            Key::Phi => "phi",
        }
    }

    pub fn get(self, p: &Params) -> f64 {
        match self {
            Key::L => p.length,
            Key::C => p.light_speed,
            Key::V => p.v,
            Key::Kappa => p.kappa as f64,
            Key::LambdaPT => p.lambda_p_t,
            Key::Ratio => p.lambda_q_over_lambda_p,
            Key::X0 => p.x0_over_l,
            Key::Delta => p.delta_over_omega,
            Key::A => p.a,
            Key::B => p.b,
            Key::AlphaAbs => p.alpha_abs,
            Key::Theta => p.theta,
            Key::BetaAbs => p.beta_abs,
            Key::Phi => p.phi,
        }
    }

    pub fn set(self, p: &mut Params, value: f64) -> Result<()> {
        match self {
            Key::L => p.length = value,
            Key::C => p.light_speed = value,
            Key::V => p.v = value,
            Key::Kappa => {
                if value.fract() != 0.0 || !(1.0..=u32::MAX as f64).contains(&value) {
                    return Err(Error::InvalidSweep(format!("kappa must be a positive integer, got {value}")));
                }
                p.kappa = value as u32;
            }
            Key::LambdaPT => p.lambda_p_t = value,
            Key::Ratio => p.lambda_q_over_lambda_p = value,
            Key::X0 => p.x0_over_l = value,
            Key::Delta => p.delta_over_omega = value,
            Key::A => {
                p.a = value;
                p.b = (1.0 - value * value).max(0.0).sqrt();
            }
            Key::B => p.b = value,
            Key::AlphaAbs => p.alpha_abs = value,
            Key::Theta => p.theta = value,
            Key::BetaAbs => p.beta_abs = value,
            Key::Phi => p.phi = value,
        }
        Ok(())
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Key {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Key::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSweep(format!("unknown parameter {s:?}")))
    }
}

/// One curve: a label and the held parameters it overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Series {
    pub label: String,
    #[serde(default)]
    pub set: BTreeMap<Key, f64>,
}

impl Series {
    pub fn new(label: impl Into<String>, set: &[(Key, f64)]) -> Self {
        Series {
            label: label.into(),
            set: set.iter().copied().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    #[serde(rename = "fig2-phase-vs-alpha")]
    Fig2,
    #[serde(rename = "fig3-phase-vs-position")]
    Fig3,
    #[serde(rename = "fig4-bloch-vs-phase")]
    Fig4,
    #[serde(rename = "fig5to7-entropy-vs-phase")]
    Fig5to7,
    FigResolution,
    FigVisibility,
    Custom,
}

impl Experiment {
    pub const PRESETS: [Experiment; 6] = [
        Experiment::Fig2,
        Experiment::Fig3,
        Experiment::Fig4,
        Experiment::Fig5to7,
        Experiment::FigResolution,
        Experiment::FigVisibility,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::Fig2 => "fig2-phase-vs-alpha",
            Experiment::Fig3 => "fig3-phase-vs-position",
            Experiment::Fig4 => "fig4-bloch-vs-phase",
            Experiment::Fig5to7 => "fig5to7-entropy-vs-phase",
            Experiment::FigResolution => "fig-resolution",
            Experiment::FigVisibility => "fig-visibility",
            Experiment::Custom => "custom",
        }
    }

    /// Accepts the full id or its short prefix (`fig2`, `fig5to7`, ...).
    pub fn from_name(name: &str) -> Option<Experiment> {
        Self::PRESETS
            .into_iter()
            .find(|e| e.id() == name || e.id().split('-').next() == Some(name) && !name.is_empty() && name != "fig")
    }

    pub fn preset(self) -> Option<SweepSpec> {
        match self {
            Experiment::Fig2 => Some(fig2()),
            Experiment::Fig3 => Some(fig3()),
            Experiment::Fig4 => Some(fig4()),
            Experiment::Fig5to7 => Some(fig5to7()),
            Experiment::FigResolution => Some(fig_resolution()),
            Experiment::FigVisibility => Some(fig_visibility()),
            Experiment::Custom => None,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub experiment: Experiment,
    /// Swept parameter.
    pub axis: Key,
    pub grid: Vec<f64>,
    /// Coupling ratios `lambda_q / lambda_p`; empty keeps the held value.
    #[serde(default)]
    pub ratios: Vec<f64>,
    /// Resolution steps in `|alpha|`; empty skips the resolution column.
    #[serde(default)]
    pub dalpha: Vec<f64>,
    /// Held parameters.
    #[serde(default)]
    pub params: Params,
    /// Curves; empty means a single unlabeled curve.
    #[serde(default)]
    pub series: Vec<Series>,
}

impl SweepSpec {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    fn ratio_list(&self) -> Vec<Option<f64>> {
        if self.ratios.is_empty() {
            vec![None]
        } else {
            self.ratios.iter().copied().map(Some).collect()
        }
    }

    fn series_list(&self) -> Vec<Series> {
        if self.series.is_empty() {
            vec![Series::new("", &[])]
        } else {
            self.series.clone()
        }
    }

    fn dalpha_list(&self) -> Vec<Option<f64>> {
        if self.dalpha.is_empty() {
            vec![None]
        } else {
            self.dalpha.iter().copied().map(Some).collect()
        }
    }

    /// Every point in output order.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let mut out = Vec::new();
        for ratio in self.ratio_list() {
            for series in self.series_list() {
                for dalpha in self.dalpha_list() {
                    for (index, &x) in self.grid.iter().enumerate() {
                        let mut params = self.params.clone();
                        if let Some(r) = ratio {
                            params.lambda_q_over_lambda_p = r;
                        }
                        for (&key, &value) in &series.set {
                            key.set(&mut params, value)?;
                        }
                        self.axis.set(&mut params, x)?;
                        out.push(SweepPoint {
                            point: out.len(),
                            series: series.label.clone(),
                            grid_index: index,
                            x,
                            dalpha,
                            params,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Grid shape, then every point through the core-model checks.
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidSweep("grid is empty".into()));
        }
        if let Some(x) = self.grid.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidSweep(format!("grid value {x} is not finite")));
        }
        let increasing = self.grid.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::InvalidSweep("grid is not strictly monotone".into()));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::InvalidSweep(format!("coupling ratio {r} must be finite and non-negative")));
        }
        if let Some(d) = self.dalpha.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::InvalidSweep(format!("resolution step {d} must be positive")));
        }
        for p in self.points()? {
            p.params.validate().map_err(|e| {
                Error::InvalidSweep(format!("point {} ({} = {}): {e}", p.point, self.axis, p.x))
            })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub point: usize,
    pub series: String,
    pub grid_index: usize,
    /// Value of the swept parameter.
    pub x: f64,
    pub dalpha: Option<f64>,
    pub params: Params,
}

/// Everything evaluated at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observables {
    pub delta_gamma: f64,
    pub eta_re: f64,
    pub eta_im: f64,
    pub eta_ref_re: f64,
    pub eta_ref_im: f64,
    pub visibility: f64,
    pub p_excite: f64,
    /// `R_{dalpha}`; NaN when no step is requested.
    pub resolution: f64,
    pub entropy: f64,
    pub pi_plus: f64,
    pub pi_minus: f64,
    pub bloch: Bloch,
    pub trace_residual: f64,
    pub hermiticity_residual: f64,
    /// Last mode index kept by the slowest vacuum sum.
    pub last_mode: u32,
    pub flags: PhaseFlags,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub outcome: std::result::Result<Observables, String>,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.outcome.is_err()
    }

    pub fn flagged(&self) -> bool {
        matches!(&self.outcome, Ok(o) if o.flags.high_excitation || o.flags.negative_im_eta)
    }
}

/// Bits of everything that changes the cached integrals.
fn system_key(p: &Params) -> [u64; 10] {
    [
        p.length.to_bits(),
        p.light_speed.to_bits(),
        p.v.to_bits(),
        p.kappa as u64,
        p.lambda_p_t.to_bits(),
        p.lambda_q_over_lambda_p.to_bits(),
        p.x0_over_l.to_bits(),
        p.delta_over_omega.to_bits(),
        p.mode_cutoff as u64,
        p.sum_tol.to_bits(),
    ]
}

fn integrals(p: &Params) -> Result<Integrals> {
    Integrals::new(&p.to_system()?, p.truncation()?)
}

/// Observables of one point given its integrals.
pub fn evaluate(ints: &Integrals, point: &SweepPoint) -> Result<Observables> {
    let state = point.params.state()?;
    let phase = ints.interferometric_phase(&state)?;
    let resolution = match point.dalpha {
        Some(d) => ints.phase_resolution(&state, d)?,
        None => f64::NAN,
    };
    let reduced = reduced_state(ints, &state);
    let eigen = eigenvalues(&reduced.rho, eigen_window(&ints.sys))?;
    Ok(Observables {
        delta_gamma: phase.delta_gamma,
        eta_re: phase.eta.re,
        eta_im: phase.eta.im,
        eta_ref_re: phase.eta_ref.re,
        eta_ref_im: phase.eta_ref.im,
        visibility: phase.visibility,
        p_excite: phase.p_excite,
        resolution,
        entropy: von_neumann_entropy(eigen),
        pi_plus: eigen.0,
        pi_minus: eigen.1,
        bloch: bloch_observables(&reduced.rho),
        trace_residual: reduced.trace_residual,
        hermiticity_residual: reduced.hermiticity_residual,
        last_mode: ints.vacuum.last_mode,
        flags: phase.flags,
    })
}

/// Validates the spec, then evaluates every point.
///
/// Integrals are computed once per distinct system. Failures at a point are
/// captured in its row. `threads = None` uses the global rayon pool.
pub fn run_sweep(spec: &SweepSpec, threads: Option<usize>) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let points = spec.points()?;
    let run = || {
        let mut keys: Vec<([u64; 10], &Params)> = Vec::new();
        let mut seen = HashMap::new();
        for p in &points {
            let key = system_key(&p.params);
            if seen.insert(key, ()).is_none() {
                keys.push((key, &p.params));
            }
        }
        let cache: HashMap<[u64; 10], std::result::Result<Arc<Integrals>, String>> = keys
            .par_iter()
            .map(|(key, params)| (*key, integrals(params).map(Arc::new).map_err(|e| e.to_string())))
            .collect();
        points
            .par_iter()
            .map(|p| {
                let outcome = match &cache[&system_key(&p.params)] {
                    Ok(ints) => evaluate(ints, p).map_err(|e| e.to_string()),
                    Err(e) => Err(e.clone()),
                };
                SweepRow {
                    point: p.clone(),
                    outcome,
                }
            })
            .collect::<Vec<_>>()
    };
    match threads {
        None => Ok(run()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidSweep(format!("thread pool: {e}")))?;
            Ok(pool.install(run))
        }
    }
}

/// `start, start + step, ...` up to `stop` inclusive, computed by index.
pub fn stepped(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Held parameters shared by every preset.
pub fn preset_params() -> Params {
    Params {
        x0_over_l: 0.25,
        theta: FRAC_PI_2,
        phi: -FRAC_PI_2,
        a: FRAC_1_SQRT_2,
        b: FRAC_1_SQRT_2,
        ..Params::default()
    }
}

/// `|alpha|` grid: fine up to 40, then coarser out to 2000 where every
/// curve has flattened.
pub fn fig2_alpha_grid() -> Vec<f64> {
    let mut g = stepped(0.0, 40.0, 0.5);
    g.extend(stepped(42.0, 400.0, 2.0));
    g.extend(stepped(420.0, 2000.0, 20.0));
    g
}

const FIG2_RATIOS: [f64; 3] = [5.0, 1.0, 0.01];

fn beta_series(betas: &[f64]) -> Vec<Series> {
    betas
        .iter()
        .map(|&b| Series::new(format!("|beta|={b}"), &[(Key::BetaAbs, b)]))
        .collect()
}

pub fn fig2() -> SweepSpec {
    SweepSpec {
        experiment: Experiment::Fig2,
        axis: Key::AlphaAbs,
        grid: fig2_alpha_grid(),
        ratios: FIG2_RATIOS.to_vec(),
        dalpha: Vec::new(),
        params: preset_params(),
        series: beta_series(&[1.0, 10.0, 15.0, 300.0]),
    }
}

pub fn fig3() -> SweepSpec {
    let half = 0.5;
    let root3 = 3f64.sqrt() / 2.0;
    let mut series = Vec::new();
    for amp in [10.0, 1.0, 0.3] {
        for (label, a, b) in [
            ("A=1/2", half, root3),
            ("A=1/sqrt2", FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            ("A=1", 1.0, 0.0),
            ("A=0", 0.0, 1.0),
        ] {
            series.push(Series::new(
                format!("|alpha|=|beta|={amp} {label}"),
                &[(Key::AlphaAbs, amp), (Key::BetaAbs, amp), (Key::A, a), (Key::B, b)],
            ));
        }
    }
    SweepSpec {
        experiment: Experiment::Fig3,
        axis: Key::X0,
        grid: linspace(0.0, 1.0, 201),
        ratios: vec![3.0],
        dalpha: Vec::new(),
        params: preset_params(),
        series,
    }
}

pub fn fig4() -> SweepSpec {
    SweepSpec {
        experiment: Experiment::Fig4,
        axis: Key::A,
        grid: linspace(0.0, 1.0, 101),
        ratios: vec![1.0],
        dalpha: Vec::new(),
        params: preset_params(),
        series: [10.0, 1.0, 0.1]
            .iter()
            .map(|&m| Series::new(format!("|alpha|=|beta|={m}"), &[(Key::AlphaAbs, m), (Key::BetaAbs, m)]))
            .collect(),
    }
}

pub fn fig5to7() -> SweepSpec {
    let mut series = Vec::new();
    for alpha in [30.0, 10.0, 1.0] {
        for beta in [1.0, 10.0, 15.0, 30.0] {
            series.push(Series::new(
                format!("|alpha|={alpha} |beta|={beta}"),
                &[(Key::AlphaAbs, alpha), (Key::BetaAbs, beta)],
            ));
        }
    }
    SweepSpec {
        experiment: Experiment::Fig5to7,
        axis: Key::A,
        grid: linspace(0.0, 1.0, 101),
        ratios: vec![0.01, 5.0, 1.0],
        dalpha: Vec::new(),
        params: preset_params(),
        series,
    }
}

pub fn fig_resolution() -> SweepSpec {
    SweepSpec {
        experiment: Experiment::FigResolution,
        axis: Key::AlphaAbs,
        grid: stepped(0.0, 60.0, 0.5),
        ratios: FIG2_RATIOS.to_vec(),
        dalpha: vec![1.0, 2.0, 3.0, 4.0],
        params: Params {
            beta_abs: 20.0,
            ..preset_params()
        },
        series: Vec::new(),
    }
}

pub fn fig_visibility() -> SweepSpec {
    let mut grid = stepped(0.0, 40.0, 0.5);
    grid.extend(stepped(42.0, 400.0, 2.0));
    SweepSpec {
        experiment: Experiment::FigVisibility,
        axis: Key::AlphaAbs,
        grid,
        ratios: FIG2_RATIOS.to_vec(),
        dalpha: Vec::new(),
        params: preset_params(),
        series: beta_series(&[1.0, 10.0, 15.0, 300.0]),
    }
}
