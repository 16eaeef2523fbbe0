mod common;

use modeprobe::kernels::{x_single, Branch, Truncation};
use modeprobe::model::{BellCatState, CavityConfig, Level, ProbeConfig, QubitConfig, System};
use modeprobe::observables::Integrals;
use modeprobe::oracle::fock::{fock_evolve, FockOracle, FockSpace, FockTruncation};
use modeprobe::reduced::reduced_state;
use num_complex::Complex64 as C64;

use common::desk;

fn desk_system(v: f64, lambda_t: f64) -> System {
    let sys = desk(v, 0.25, -0.2, lambda_t).to_system().unwrap();
    sys.with_couplings(sys.probe.coupling, sys.probe.coupling)
}

#[test]
fn zero_coupling_leaves_the_state_alone() {
    let sys = desk_system(0.1, 0.0);
    let state = BellCatState::polar(0.6, 0.8, 1.0, 0.4, 0.7, -1.0).unwrap();
    let r = fock_evolve(&state, &sys, &FockTruncation::for_state(&state), None).unwrap();
    assert!((r.overlap - C64::new(1.0, 0.0)).norm() < 1e-12);
    assert_eq!(r.p_excite, 0.0);
    let zeroth = reduced_state(&Integrals::new(&sys, Truncation::Fixed(8)).unwrap(), &state).rho;
    for (a, b) in [(r.rho_q.gg, zeroth.gg), (r.rho_q.eg, zeroth.eg), (r.rho_q.ee, zeroth.ee)] {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn vacuum_reference_phase() {
    // B = 0, no qubit coupling, empty cavity: only the probe's vacuum terms remain.
    let sys = desk_system(0.1, 1e-2).with_couplings(1e-3, 0.0);
    let state = BellCatState::coherent(C64::new(0.0, 0.0));
    let r = fock_evolve(&state, &sys, &FockTruncation::for_state(&state), None).unwrap();
    let full = Integrals::adaptive(&sys).unwrap().eta_reference().unwrap();
    assert!((r.overlap.arg() - full.re).abs() < 1e-3);
    let same_modes = Integrals::new(&sys, Truncation::Fixed(8)).unwrap().eta_reference().unwrap();
    assert!((r.overlap.arg() - same_modes.re).abs() < 1e-9);
    assert!(r.report.norm_error < 1e-9);
    assert!(r.overlap.norm() <= 1.0 + 1e-9);
}

/// Amplitude of `|e_p, g, alpha>` after the run, with only the resonant
/// mode retained and the qubit decoupled.
fn excited_projection(sys: &System, alpha: C64) -> C64 {
    let trunc = FockTruncation {
        n_max: 24,
        modes: vec![sys.cavity.kappa],
        max_vacuum_quanta: 0,
    };
    let space = FockSpace::new(sys.cavity.kappa, &trunc);
    let oracle = FockOracle::new(sys, &space);
    let psi0 = space.initial_state(&BellCatState::coherent(alpha));
    let mut target = vec![C64::new(0.0, 0.0); psi0.len()];
    for n in 0..=trunc.n_max {
        target[space.index(Level::Excited, Level::Ground, 0, n)] = psi0[space.index(Level::Ground, Level::Ground, 0, n)];
    }
    let psi = oracle.evolve(&psi0, 4000);
    oracle.overlap(&target, &psi)
}

/// Part of the excitation amplitude linear in `alpha`: with
/// `f(alpha) = alpha* X_+ + alpha X_-*` (up to a common factor),
/// `f(alpha) - i f(i alpha) = 2 alpha X_-*`.
fn rotating_amplitude(sys: &System) -> f64 {
    let alpha = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    (0.5 * (excited_projection(sys, alpha) - i * excited_projection(sys, i * alpha))).norm()
}

#[test]
fn even_mode_is_invisible_to_the_probe() {
    let v = 0.13;
    let lambda = 1e-4 * v;
    let even = System::new(
        CavityConfig::unit(2, 1000).unwrap(),
        ProbeConfig::resonant(&CavityConfig::unit(2, 1000).unwrap(), v, lambda).unwrap(),
        QubitConfig::new(&CavityConfig::unit(2, 1000).unwrap(), 0.25, 0.0, -0.2 * 2.0 * std::f64::consts::PI).unwrap(),
    )
    .unwrap();
    // Odd control: the cavity model only admits even resonant modes, so the
    // control system is assembled by hand.
    let odd = System {
        cavity: CavityConfig { kappa: 1, ..even.cavity },
        probe: ProbeConfig::with_gap(v, lambda, even.cavity.frequency(1)),
        qubit: even.qubit,
    };
    let a_even = rotating_amplitude(&even);
    let a_odd = rotating_amplitude(&odd);
    let expected_odd = lambda * x_single(Branch::Minus, 1, &odd).norm();
    assert!((a_odd - expected_odd).abs() < 1e-6 * expected_odd, "{a_odd} vs {expected_odd}");
    assert!(a_even < 1e-6 * a_odd, "even {a_even:.3e}, odd {a_odd:.3e}");
}

#[test]
fn step_halving_converges_at_fourth_order() {
    let sys = desk_system(0.1, 1e-1);
    let state = BellCatState::polar(0.6, 0.8, 0.5, 0.3, 0.4, -0.8).unwrap();
    let trunc = FockTruncation::for_state(&state);
    let space = FockSpace::new(sys.cavity.kappa, &trunc);
    let oracle = FockOracle::new(&sys, &space);
    let psi0 = space.initial_state(&state);
    let overlap = |steps| oracle.overlap(&psi0, &oracle.evolve(&psi0, steps));
    let (o1, o2, o4) = (overlap(100), overlap(200), overlap(400));
    let ratio = (o1 - o2).norm() / (o2 - o4).norm();
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn raising_the_fock_cutoff_changes_nothing() {
    let sys = desk_system(0.13, 1e-2);
    let state = BellCatState::polar(0.6, 0.8, 1.2, 0.7, 0.9, -1.1).unwrap();
    let base = FockTruncation::for_state(&state);
    let raised = FockTruncation {
        n_max: base.n_max + 4,
        ..base.clone()
    };
    let a = fock_evolve(&state, &sys, &base, Some(2000)).unwrap();
    let b = fock_evolve(&state, &sys, &raised, Some(2000)).unwrap();
    assert!((a.overlap - b.overlap).norm() < 1e-8);
    assert!((a.p_excite - b.p_excite).abs() < 1e-8);
    for (x, y) in [(a.rho_q.gg, b.rho_q.gg), (a.rho_q.eg, b.rho_q.eg), (a.rho_q.ee, b.rho_q.ee)] {
        assert!((x - y).norm() < 1e-8);
    }
    assert!(a.report.norm_error < 1e-9 && a.overlap.norm() <= 1.0 + 1e-9);
}
