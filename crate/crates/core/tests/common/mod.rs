#![allow(dead_code)]

use std::f64::consts::PI;

use modeprobe::config::Params;
use modeprobe::kernels::{Branch, Coupler, Factor};
use modeprobe::model::System;
use num_complex::Complex64 as C64;

/// Internal-unit parameters at the given speed, qubit position and detuning.
pub fn desk(v: f64, x0: f64, delta: f64, lambda_t: f64) -> Params {
    Params {
        v,
        x0_over_l: x0,
        delta_over_omega: delta,
        lambda_p_t: lambda_t,
        ..Params::desk()
    }
}

/// Commensurate desk point and two generic ones.
pub fn desk_geometries() -> Vec<System> {
    [(0.1, 0.25, -0.2), (0.13, 0.3, 0.23), (0.05, 0.37, -0.11)]
        .iter()
        .map(|&(v, x0, d)| desk(v, x0, d, 1e-2).to_system().unwrap())
        .collect()
}

/// The time-domain integrand of a factor, written out from its definition.
pub fn integrand(f: Factor, sys: System) -> impl Fn(f64) -> C64 {
    move |t: f64| {
        let n = f64::from(f.mode);
        let gap = match f.coupler {
            Coupler::Qubit => sys.qubit.gap,
            Coupler::Probe => sys.probe.gap,
        };
        let sign = match f.branch {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        };
        let omega = sign * gap + n * PI;
        let spatial = match f.coupler {
            Coupler::Qubit => (n * PI * sys.qubit.position).sin(),
            Coupler::Probe => (n * PI * sys.probe.speed * t).sin(),
        };
        let value = C64::from_polar(spatial / (n * PI).sqrt(), omega * t);
        if f.conj {
            value.conj()
        } else {
            value
        }
    }
}

/// Largest phase the integrand of `f` accumulates over the run.
pub fn max_phase(f: Factor, sys: &System) -> f64 {
    let n = f64::from(f.mode);
    let spatial = match f.coupler {
        Coupler::Qubit => 0.0,
        Coupler::Probe => n * PI * sys.probe.speed,
    };
    (f.frequency(sys).abs() + spatial) * sys.interaction_time()
}

/// `int_0^T |integrand|`: the probe profile covers whole half periods.
pub fn l1_norm(f: Factor, sys: &System) -> f64 {
    let n = f64::from(f.mode);
    let spatial = match f.coupler {
        Coupler::Qubit => (n * PI * sys.qubit.position).sin().abs(),
        Coupler::Probe => 2.0 / PI,
    };
    sys.interaction_time() * spatial / (n * PI).sqrt()
}
