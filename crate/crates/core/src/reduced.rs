//! Reduced state of the cavity qubit after the probe has crossed, obtained by
//! tracing out the field and the probe from the second-order evolved state.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::kernels::Branch;
use crate::model::{coherent_overlap, BellCatState, Level, System};
use crate::observables::{flip_sign, Integrals};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Entries of the 2x2 qubit density matrix in the `{g, e}` basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitDensityMatrix {
    pub gg: C64,
    pub ge: C64,
    pub eg: C64,
    pub ee: C64,
}

impl QubitDensityMatrix {
    pub fn diagonal(gg: f64, ee: f64) -> Self {
        QubitDensityMatrix {
            gg: C64::new(gg, 0.0),
            ge: C64::new(0.0, 0.0),
            eg: C64::new(0.0, 0.0),
            ee: C64::new(ee, 0.0),
        }
    }

    /// Matrix with `ge` set to `conj(eg)` and real diagonal.
    pub fn hermitian(gg: f64, eg: C64, ee: f64) -> Self {
        QubitDensityMatrix {
            gg: C64::new(gg, 0.0),
            ge: eg.conj(),
            eg,
            ee: C64::new(ee, 0.0),
        }
    }

    pub fn entry(&self, row: Level, col: Level) -> C64 {
        match (row, col) {
            (Level::Ground, Level::Ground) => self.gg,
            (Level::Ground, Level::Excited) => self.ge,
            (Level::Excited, Level::Ground) => self.eg,
            (Level::Excited, Level::Excited) => self.ee,
        }
    }

    pub fn trace(&self) -> C64 {
        self.gg + self.ee
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_residual(&self) -> f64 {
        (self.ge - self.eg.conj())
            .norm()
            .max(self.gg.im.abs())
            .max(self.ee.im.abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedState {
    /// Hermitized matrix.
    pub rho: QubitDensityMatrix,
    /// Hermiticity residual before symmetrization.
    pub hermiticity_residual: f64,
    /// `|rho_gg + rho_ee - 1|`.
    pub trace_residual: f64,
}

/// Second-order reduced qubit state.
///
/// `rho_ab = <a| Tr_{field, probe} |psi(T)><psi(T)| |b>`, expanded to order
/// `lambda^2`: the zeroth-order trace-out, the first-order qubit cross terms,
/// the second-order amplitudes on each side and the product of two
/// first-order amplitudes. The probe contributions cancel between the last
/// two groups except for terms that leave the probe excited.
pub fn reduced_state(ints: &Integrals, state: &BellCatState) -> ReducedState {
    let lp2 = ints.lambda_p().powi(2);
    let lq = ints.lambda_q();
    let lq2 = lq * lq;
    let c = |l: Level| state.amplitude(l);
    let f = |l: Level| state.field(l);
    // <F_b|F_a>
    let ov = |a: Level, b: Level| coherent_overlap(f(a), f(b)).value();

    // Sign of the gap in the transition that ends in level `a`.
    let arrive = |a: Level| flip_sign(a.flip());

    // Term with the first-order qubit amplitude on the ket side.
    let first = |a: Level, b: Level| {
        let a2 = a.flip();
        -I * lq * c(a2) * c(b) * ints.qubit_first.j(arrive(a), f(b), f(a2)) * ov(a2, b)
    };
    let second = |a: Level, b: Level| {
        let probe = lp2 * ints.probe_block.eval(f(b), f(a));
        let qubit = lq2 * ints.qubit_blocks[a as usize].eval(f(b), f(a));
        -c(a) * c(b) * ov(a, b) * (probe + qubit)
    };
    let sandwich = |a: Level, b: Level| {
        let (sa, sb) = (arrive(a), arrive(b));
        let jp = &ints.probe_first;
        let probe = lp2
            * c(a)
            * c(b)
            * ov(a, b)
            * (ints.vacuum.probe_sq
                + jp.j(Branch::Minus, f(b), f(a)) * jp.j(Branch::Plus, f(b), f(a)));
        let (a2, b2) = (a.flip(), b.flip());
        let jq = &ints.qubit_first;
        let qubit = lq2
            * c(a2)
            * c(b2)
            * ov(a2, b2)
            * (ints.vacuum.qubit_product(sa, sb) + jq.j(sb.opposite(), f(b2), f(a2)) * jq.j(sa, f(b2), f(a2)));
        probe + qubit
    };
    let entry = |a: Level, b: Level| {
        c(a) * c(b) * ov(a, b) + first(a, b) + first(b, a).conj() + second(a, b) + second(b, a).conj() + sandwich(a, b)
    };

    let raw = QubitDensityMatrix {
        gg: entry(Level::Ground, Level::Ground),
        ge: entry(Level::Ground, Level::Excited),
        eg: entry(Level::Excited, Level::Ground),
        ee: entry(Level::Excited, Level::Excited),
    };
    let rho = QubitDensityMatrix::hermitian(raw.gg.re, raw.eg, raw.ee.re);
    ReducedState {
        rho,
        hermiticity_residual: raw.hermiticity_residual(),
        trace_residual: (rho.gg.re + rho.ee.re - 1.0).abs(),
    }
}

pub fn reduced_qubit_state(state: &BellCatState, sys: &System) -> Result<ReducedState> {
    Ok(reduced_state(&Integrals::adaptive(sys)?, state))
}

/// Smallest window allowed around `[0, 1]`; covers rounding for `lambda = 0`.
pub const MIN_EIGEN_WINDOW: f64 = 1e-12;

/// `10 (lambda T)^4` using the larger of the two couplings.
pub fn eigen_window(sys: &System) -> f64 {
    let t = sys.interaction_time();
    let lt = sys.probe.coupling.max(sys.qubit.coupling) * t;
    (10.0 * lt.powi(4)).max(MIN_EIGEN_WINDOW)
}

/// `pi_+- = ((gg + ee) +- sqrt(4 |ge|^2 + (ee - gg)^2)) / 2`, largest first,
/// clipped to `[0, 1]` once both lie within `window` of it.
pub fn eigenvalues(rho: &QubitDensityMatrix, window: f64) -> Result<(f64, f64)> {
    let (gg, ee) = (rho.gg.re, rho.ee.re);
    let off = (rho.ge * rho.eg).re.max(0.0);
    let root = (4.0 * off + (ee - gg).powi(2)).sqrt();
    let pair = [0.5 * (gg + ee + root), 0.5 * (gg + ee - root)];
    for &value in &pair {
        if !(value >= -window && value <= 1.0 + window) {
            return Err(Error::NonPhysical { value, window });
        }
    }
    Ok((pair[0].clamp(0.0, 1.0), pair[1].clamp(0.0, 1.0)))
}

/// `-sum pi log2 pi` with `0 log 0 = 0`; a pure state gives `+0`.
pub fn von_neumann_entropy(eigen: (f64, f64)) -> f64 {
    [eigen.0, eigen.1]
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        + 0.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bloch {
    /// `rho_ee + rho_gg`.
    pub a_i: f64,
    /// Population inversion `rho_ee - rho_gg`.
    pub a_z: f64,
    /// Dipole moment `rho_eg + rho_ge`.
    pub a_x: f64,
    /// Dipole current `(rho_eg - rho_ge) / i`.
    pub a_y: f64,
}

pub fn bloch_observables(rho: &QubitDensityMatrix) -> Bloch {
    Bloch {
        a_i: (rho.ee + rho.gg).re,
        a_z: (rho.ee - rho.gg).re,
        a_x: (rho.eg + rho.ge).re,
        a_y: ((rho.eg - rho.ge) / I).re,
    }
}
