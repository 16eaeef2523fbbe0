//! Brute-force interaction-picture evolution of probe, cavity qubit and a
//! truncated set of cavity modes.
//!
//! The resonant mode gets a full Fock ladder up to `n_max`; the remaining
//! retained modes share a basis of occupation patterns with at most
//! `max_vacuum_quanta` quanta in total, which is all a perturbative
//! comparison needs.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::kernels::sin_pi;
use crate::model::{BellCatState, Level, System};
use crate::reduced::QubitDensityMatrix;

/// Overlap change between successive step halvings that ends refinement.
pub const STEP_TOLERANCE: f64 = 1e-8;
pub const NORM_TOLERANCE: f64 = 1e-9;
pub const TOP_POPULATION_LIMIT: f64 = 1e-8;
const MAX_STEPS: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq)]
pub struct FockTruncation {
    /// Fock cutoff of the resonant mode.
    pub n_max: usize,
    /// Retained modes, including the resonant one.
    pub modes: Vec<u32>,
    /// Total quanta allowed across the non-resonant retained modes.
    pub max_vacuum_quanta: u32,
}

impl FockTruncation {
    /// Smallest admissible cutoff for the state, modes `1..=8`, two vacuum quanta.
    pub fn for_state(state: &BellCatState) -> Self {
        FockTruncation {
            n_max: Self::minimum_n_max(state),
            modes: (1..=8).collect(),
            max_vacuum_quanta: 2,
        }
    }

    /// `ceil((|alpha| + |beta|)^2) + 8 ceil(|alpha| + |beta|) + 8`.
    pub fn minimum_n_max(state: &BellCatState) -> usize {
        let s = state.alpha.norm() + state.beta.norm();
        (s * s).ceil() as usize + 8 * s.ceil() as usize + 8
    }

    fn validate(&self, sys: &System, state: Option<&BellCatState>) -> Result<()> {
        if !self.modes.contains(&sys.cavity.kappa) {
            return Err(Error::Oracle(format!(
                "retained modes {:?} do not include the resonant mode {}",
                self.modes, sys.cavity.kappa
            )));
        }
        if self.modes.contains(&0) {
            return Err(Error::Oracle("mode indices start at 1".into()));
        }
        if let Some(state) = state {
            let needed = Self::minimum_n_max(state);
            if self.n_max < needed {
                return Err(Error::Oracle(format!(
                    "Fock cutoff {} is below the required {needed}",
                    self.n_max
                )));
            }
        }
        Ok(())
    }
}

/// Diagnostics of one converged run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationReport {
    pub dimension: usize,
    pub steps: usize,
    /// Overlap change at the last halving.
    pub step_change: f64,
    /// `| |psi(T)| - 1 |`.
    pub norm_error: f64,
    /// Population of the top two Fock levels of the resonant mode.
    pub top_population: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleResult {
    /// `<psi(0)|psi(T)>`.
    pub overlap: C64,
    pub p_excite: f64,
    pub rho_q: QubitDensityMatrix,
    pub report: TruncationReport,
}

/// Product basis `probe x qubit x vacuum pattern x resonant Fock level`.
#[derive(Clone, Debug)]
pub struct FockSpace {
    kappa: u32,
    /// Non-resonant retained modes, one slot each.
    others: Vec<u32>,
    nk: usize,
    patterns: Vec<Vec<u8>>,
    /// `raise[c][j]`: pattern after adding a quantum to slot `j`, with `sqrt(n_j + 1)`.
    raise: Vec<Vec<Option<(usize, f64)>>>,
}

fn level_index(l: Level) -> usize {
    match l {
        Level::Ground => 0,
        Level::Excited => 1,
    }
}

impl FockSpace {
    pub fn new(kappa: u32, trunc: &FockTruncation) -> Self {
        let mut others: Vec<u32> = trunc.modes.iter().copied().filter(|&m| m != kappa).collect();
        others.sort_unstable();
        others.dedup();
        let mut patterns = vec![vec![0u8; others.len()]];
        let mut frontier = patterns.clone();
        for _ in 0..trunc.max_vacuum_quanta {
            let mut next = Vec::new();
            for p in &frontier {
                // Only add at or after the last occupied slot, so each pattern appears once.
                let start = p.iter().rposition(|&n| n > 0).unwrap_or(0);
                for j in start..others.len() {
                    let mut q = p.clone();
                    q[j] += 1;
                    next.push(q);
                }
            }
            patterns.extend(next.iter().cloned());
            frontier = next;
        }
        let lookup: HashMap<&[u8], usize> = patterns.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
        let raise = patterns
            .iter()
            .map(|p| {
                (0..others.len())
                    .map(|j| {
                        let mut q = p.clone();
                        q[j] += 1;
                        lookup.get(q.as_slice()).map(|&c| (c, f64::from(q[j]).sqrt()))
                    })
                    .collect()
            })
            .collect();
        FockSpace {
            kappa,
            others,
            nk: trunc.n_max + 1,
            patterns,
            raise,
        }
    }

    pub fn dimension(&self) -> usize {
        4 * self.field_dimension()
    }

    fn field_dimension(&self) -> usize {
        self.patterns.len() * self.nk
    }

    /// Index of `|probe, qubit> |pattern> |n>_kappa`; pattern 0 is the vacuum.
    pub fn index(&self, probe: Level, qubit: Level, pattern: usize, n: usize) -> usize {
        ((level_index(probe) * 2 + level_index(qubit)) * self.patterns.len() + pattern) * self.nk + n
    }

    pub fn n_max(&self) -> usize {
        self.nk - 1
    }

    /// Truncated coherent amplitudes of the resonant mode.
    fn coherent(&self, alpha: C64) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.nk);
        let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for n in 0..self.nk {
            out.push(c);
            c = c * alpha / ((n + 1) as f64).sqrt();
        }
        out
    }

    /// `|g_p> (A |g, alpha> + B |e, beta>) |vacuum>`.
    pub fn initial_state(&self, state: &BellCatState) -> Vec<C64> {
        let mut psi = vec![C64::new(0.0, 0.0); self.dimension()];
        for (level, amp, field) in [
            (Level::Ground, state.a, state.alpha),
            (Level::Excited, state.b, state.beta),
        ] {
            for (n, c) in self.coherent(field).into_iter().enumerate() {
                psi[self.index(Level::Ground, level, 0, n)] += amp * c;
            }
        }
        psi
    }
}

/// Interaction-picture Hamiltonian on a [`FockSpace`].
pub struct FockOracle<'a> {
    pub sys: System,
    pub space: &'a FockSpace,
}

impl<'a> FockOracle<'a> {
    pub fn new(sys: &System, space: &'a FockSpace) -> Self {
        FockOracle { sys: *sys, space }
    }

    /// `out = -i H(t) psi`.
    fn derivative(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        let sys = &self.sys;
        let space = self.space;
        let fd = space.field_dimension();
        let nk = space.nk;
        let v = sys.probe.speed;

        // (mode, slot): slot None marks the resonant mode.
        let mut modes: Vec<(u32, Option<usize>)> = vec![(space.kappa, None)];
        modes.extend(space.others.iter().enumerate().map(|(j, &m)| (m, Some(j))));

        for p in 0..2 {
            for q in 0..2 {
                let src_block = (p * 2 + q) * fd;
                // Probe flips p, qubit flips q; raising takes e^{+i Omega t}.
                let probe_target = ((1 - p) * 2 + q) * fd;
                let qubit_target = (p * 2 + (1 - q)) * fd;
                let probe_sign = if p == 0 { 1.0 } else { -1.0 };
                let qubit_sign = if q == 0 { 1.0 } else { -1.0 };
                let cp = C64::new(0.0, -sys.probe.coupling) * C64::from_polar(1.0, probe_sign * sys.probe.gap * t);
                let cq = C64::new(0.0, -sys.qubit.coupling) * C64::from_polar(1.0, qubit_sign * sys.qubit.gap * t);

                for &(mode, slot) in &modes {
                    let n = f64::from(mode);
                    let norm = 1.0 / (n * PI).sqrt();
                    let gp = (n * PI * v * t).sin() * norm;
                    let gq = sin_pi(n * sys.qubit.position) * norm;
                    let up = C64::from_polar(1.0, sys.cavity.frequency(mode) * t);
                    let down = up.conj();
                    for (target, g) in [(probe_target, cp * gp), (qubit_target, cq * gq)] {
                        if g == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let (r, l) = (g * up, g * down);
                        let src = &psi[src_block..src_block + fd];
                        let dst = &mut out[target..target + fd];
                        match slot {
                            None => {
                                for c in 0..space.patterns.len() {
                                    let base = c * nk;
                                    for k in 0..nk - 1 {
                                        let s = ((k + 1) as f64).sqrt();
                                        dst[base + k + 1] += r * s * src[base + k];
                                        dst[base + k] += l * s * src[base + k + 1];
                                    }
                                }
                            }
                            Some(j) => {
                                for c in 0..space.patterns.len() {
                                    if let Some((c2, s)) = space.raise[c][j] {
                                        let (lo, hi) = (c * nk, c2 * nk);
                                        for k in 0..nk {
                                            dst[hi + k] += r * s * src[lo + k];
                                            dst[lo + k] += l * s * src[hi + k];
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Fixed-step fourth-order Runge-Kutta over `[0, T]`.
    pub fn evolve(&self, psi0: &[C64], steps: usize) -> Vec<C64> {
        let t_end = self.sys.interaction_time();
        let h = t_end / steps as f64;
        let dim = psi0.len();
        let mut y = psi0.to_vec();
        let zero = C64::new(0.0, 0.0);
        let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; dim], vec![zero; dim], vec![zero; dim], vec![zero; dim]);
        let mut tmp = vec![zero; dim];
        for step in 0..steps {
            let t = step as f64 * h;
            self.derivative(t, &y, &mut k1);
            for i in 0..dim {
                tmp[i] = y[i] + 0.5 * h * k1[i];
            }
            self.derivative(t + 0.5 * h, &tmp, &mut k2);
            for i in 0..dim {
                tmp[i] = y[i] + 0.5 * h * k2[i];
            }
            self.derivative(t + 0.5 * h, &tmp, &mut k3);
            for i in 0..dim {
                tmp[i] = y[i] + h * k3[i];
            }
            self.derivative(t + h, &tmp, &mut k4);
            for i in 0..dim {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        y
    }

    /// Step count that resolves about a quarter radian of the fastest phase per step.
    pub fn initial_steps(&self) -> usize {
        let sys = &self.sys;
        let top = self.space.others.iter().copied().chain([self.space.kappa]).max().unwrap_or(1);
        let rate = sys.probe.gap.max(sys.qubit.gap) + sys.cavity.frequency(top) + f64::from(top) * PI * sys.probe.speed;
        ((4.0 * rate * sys.interaction_time()).ceil() as usize).max(64)
    }

    /// Halves the step until `observe` changes by less than `tol` in every component.
    pub fn evolve_converged<F>(&self, psi0: &[C64], tol: f64, observe: F) -> Result<(Vec<C64>, usize, f64)>
    where
        F: Fn(&[C64]) -> Vec<C64>,
    {
        let mut steps = self.initial_steps();
        let mut psi = self.evolve(psi0, steps);
        let mut prev = observe(&psi);
        loop {
            let next_steps = steps * 2;
            if next_steps > MAX_STEPS {
                return Err(Error::Oracle(format!("no step convergence within {steps} steps")));
            }
            let next = self.evolve(psi0, next_steps);
            let obs = observe(&next);
            let change = prev
                .iter()
                .zip(&obs)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            psi = next;
            steps = next_steps;
            if change < tol {
                return Ok((psi, steps, change));
            }
            prev = obs;
        }
    }

    pub fn overlap(&self, a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    pub fn p_excite(&self, psi: &[C64]) -> f64 {
        let half = psi.len() / 2;
        psi[half..].iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn reduced_qubit(&self, psi: &[C64]) -> QubitDensityMatrix {
        let fd = self.space.field_dimension();
        let block = |p: usize, q: usize| &psi[(p * 2 + q) * fd..(p * 2 + q + 1) * fd];
        let entry = |a: usize, b: usize| -> C64 {
            (0..2)
                .map(|p| block(p, a).iter().zip(block(p, b)).map(|(x, y)| x * y.conj()).sum::<C64>())
                .sum()
        };
        QubitDensityMatrix {
            gg: entry(0, 0),
            ge: entry(0, 1),
            eg: entry(1, 0),
            ee: entry(1, 1),
        }
    }

    pub fn top_population(&self, psi: &[C64]) -> f64 {
        let nk = self.space.nk;
        psi.iter()
            .enumerate()
            .filter(|(i, _)| i % nk + 2 >= nk)
            .map(|(_, x)| x.norm_sqr())
            .sum()
    }
}

/// Evolves `|g_p> (A |g, alpha> + B |e, beta>) |vacuum>` across the cavity.
///
/// With `steps = None` the step is halved until overlap, excitation
/// probability and reduced state all change by less than [`STEP_TOLERANCE`].
pub fn fock_evolve(state: &BellCatState, sys: &System, trunc: &FockTruncation, steps: Option<usize>) -> Result<OracleResult> {
    trunc.validate(sys, Some(state))?;
    let space = FockSpace::new(sys.cavity.kappa, trunc);
    let oracle = FockOracle::new(sys, &space);
    let psi0 = space.initial_state(state);
    let (psi, used, change) = match steps {
        Some(n) => (oracle.evolve(&psi0, n), n, f64::NAN),
        None => oracle.evolve_converged(&psi0, STEP_TOLERANCE, |psi| {
            let rho = oracle.reduced_qubit(psi);
            vec![
                oracle.overlap(&psi0, psi),
                C64::new(oracle.p_excite(psi), 0.0),
                rho.gg,
                rho.eg,
                rho.ee,
            ]
        })?,
    };
    let norm_error = (oracle.overlap(&psi, &psi).re.sqrt() - 1.0).abs();
    let init_norm_error = (oracle.overlap(&psi0, &psi0).re.sqrt() - 1.0).abs();
    if norm_error > NORM_TOLERANCE + init_norm_error {
        return Err(Error::Oracle(format!("norm drifted by {norm_error:.3e}")));
    }
    let top_population = oracle.top_population(&psi);
    if top_population > TOP_POPULATION_LIMIT {
        return Err(Error::Oracle(format!(
            "top Fock levels hold population {top_population:.3e}; raise n_max"
        )));
    }
    Ok(OracleResult {
        overlap: oracle.overlap(&psi0, &psi),
        p_excite: oracle.p_excite(&psi),
        rho_q: oracle.reduced_qubit(&psi),
        report: TruncationReport {
            dimension: space.dimension(),
            steps: used,
            step_change: change,
            norm_error,
            top_population,
        },
    })
}
