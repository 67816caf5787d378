mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use quantum_domino::chain::{build_static_hamiltonian, domino_tones};
use quantum_domino::gate::{basis_state, fidelity};
use quantum_domino::propagator::{
    amplification_coefficient, default_dt, evolve, flip_spin, sweep_t_end, Method, SimParams,
};
use quantum_domino::{ChainSpec, CouplingForm, DriveSpec, Harmonic, StateVector};

fn single(offset: f64) -> ChainSpec {
    ChainSpec::new(vec![offset], vec![vec![0.0]], CouplingForm::Zz).unwrap()
}

fn random_four_spin() -> impl Strategy<Value = (ChainSpec, DriveSpec, StateVector)> {
    (
        proptest::collection::vec(-800.0..800.0f64, 4),
        proptest::collection::vec(-60.0..60.0f64, 6),
        prop_oneof![Just(CouplingForm::Zz), Just(CouplingForm::Isotropic)],
        proptest::collection::vec((-800.0..800.0f64, 0.0..20.0f64, -3.0..3.0f64), 1..4),
        proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 16),
    )
        .prop_map(|(offsets, js, form, tones, amps)| {
            let pairs = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];
            let pairs: Vec<_> = pairs.iter().zip(js).map(|(&(i, j), v)| (i, j, v)).collect();
            let spec = ChainSpec::from_pairs(offsets, &pairs, form).unwrap();
            let drive = DriveSpec::new(
                tones
                    .into_iter()
                    .map(|(frequency, amplitude, phase)| Harmonic { frequency, amplitude, phase })
                    .collect(),
            );
            let norm = amps.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt().max(1e-9);
            let psi = amps.into_iter().map(|(a, b)| Complex64::new(a / norm, b / norm)).collect();
            (spec, drive, StateVector::new(4, psi).unwrap_or_else(|_| basis_state("0000").unwrap()))
        })
}

#[test]
fn free_evolution_is_stationary() {
    let spec = butyrate_spec();
    let params = SimParams::new(0.15, 1e-4, 1, Method::ExpmMidpoint).unwrap();
    let traj = evolve(&basis_state("0000").unwrap(), &spec, &DriveSpec::default(), &params).unwrap();
    for series in &traj.per_spin_polarization {
        assert!(series.iter().all(|&p| (p - 1.0).abs() < 1e-12));
    }
}

/// ⟨σᶻ⟩ under a resonant tone of amplitude a follows cos(2π·a·t). The exact
/// (non-RWA) motion adds a ripple at twice the tone frequency that vanishes at
/// whole drive periods, so samples are taken once per period.
#[test]
fn resonant_rabi_matches_analytic_and_rk4() {
    let (a, nu) = (5.0, 2000.0);
    let spec = single(nu);
    let drive = DriveSpec::new(vec![Harmonic::new(nu, a)]);
    let steps_per_cycle = 500;
    let dt = 1.0 / (steps_per_cycle as f64 * nu);
    let start = basis_state("0").unwrap();
    for (method, dt, every) in [
        (Method::ExpmMidpoint, dt, steps_per_cycle),
        (Method::Rk4, dt / 10.0, 10 * steps_per_cycle),
    ] {
        let traj = evolve(&start, &spec, &drive, &SimParams::new(0.2, dt, every, method).unwrap()).unwrap();
        assert_eq!(traj.len(), 401);
        let err = traj
            .times
            .iter()
            .zip(&traj.total_polarization)
            .map(|(t, p)| (p - (2.0 * PI * a * t).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-4, "{method:?}: {err:e}");
    }
}

#[test]
fn static_transverse_field_rabi() {
    // offset 0, ν = 0: H = 2π·a·σˣ exactly, ⟨σᶻ⟩ = cos(4π·a·t); half the
    // amplitude reproduces the resonant envelope cos(2π·a·t).
    let a = 5.0;
    for (amp, rate) in [(a, 2.0 * a), (a / 2.0, a)] {
        let drive = DriveSpec::new(vec![Harmonic::new(0.0, amp)]);
        let params = SimParams::new(0.2, 1e-4, 1, Method::ExpmMidpoint).unwrap();
        let traj = evolve(&basis_state("0").unwrap(), &single(0.0), &drive, &params).unwrap();
        for (t, p) in traj.times.iter().zip(&traj.total_polarization) {
            assert!((p - (2.0 * PI * rate * t).cos()).abs() < 1e-10);
        }
    }
}

fn butyrate_run(trigger: bool, method: Method, dt_scale: f64) -> quantum_domino::Trajectory {
    let config = butyrate_config();
    let drive = config.drive_spec().unwrap();
    let base = config.sim_params().unwrap();
    let params = SimParams::new(base.t_end, base.dt * dt_scale, base.sample_every, method).unwrap();
    let mut start = config.initial_state().unwrap();
    if trigger {
        start = flip_spin(&start, 1).unwrap();
    }
    evolve(&start, &config.chain, &drive, &params).unwrap()
}

#[test]
fn triggered_chain_inverts() {
    let traj = butyrate_run(true, Method::ExpmMidpoint, 1.0);
    assert_eq!(traj.total_polarization[0], 2.0);
    assert!(traj.min_total() <= -3.0);
    assert!(amplification_coefficient(&traj) >= 2.5);
    // wave order: spin 2 crosses zero before spin 3, spin 3 before spin 4
    let first_negative = |i: usize| traj.per_spin_polarization[i].iter().position(|&p| p < 0.0).unwrap();
    assert!(first_negative(1) < first_negative(2));
    assert!(first_negative(2) < first_negative(3));
}

#[test]
fn untriggered_chain_is_blocked() {
    let traj = butyrate_run(false, Method::ExpmMidpoint, 1.0);
    assert!(traj.min_total() >= 4.0 - 0.2);
}

#[test]
fn weak_drive_blocks_generic_chain() {
    let spec = ChainSpec::from_pairs(
        vec![-900.0, -400.0, 200.0],
        &[(1, 2, 60.0), (2, 3, 60.0)],
        CouplingForm::Zz,
    )
    .unwrap();
    let drive = DriveSpec::from_tones(&domino_tones(&spec).unwrap(), 2.0);
    let dt = default_dt(&spec, &drive).unwrap();
    let params = SimParams::new(0.3, dt, 10, Method::ExpmMidpoint).unwrap();
    let traj = evolve(&basis_state("000").unwrap(), &spec, &drive, &params).unwrap();
    assert!(traj.min_total() >= 3.0 - 0.2);
}

#[test]
fn steppers_agree_on_domino_problem() {
    let expm = butyrate_run(true, Method::ExpmMidpoint, 1.0);
    let rk4 = butyrate_run(true, Method::Rk4, 0.1);
    let f = fidelity(&expm.final_state, &rk4.final_state).unwrap();
    assert!(f >= 1.0 - 1e-6, "fidelity {f}");
}

#[test]
fn time_reversal_returns_initial_state() {
    let config = butyrate_config();
    let drive = config.drive_spec().unwrap();
    let params = config.sim_params().unwrap();
    let start = flip_spin(&config.initial_state().unwrap(), 1).unwrap();
    let forward = evolve(&start, &config.chain, &drive, &params).unwrap();
    let reversed = drive.time_reversed(params.t_end);
    let back = evolve(&forward.final_state.conjugate(), &config.chain, &reversed, &params).unwrap();
    let f = fidelity(&back.final_state.conjugate(), &start).unwrap();
    assert!(f >= 1.0 - 1e-5, "fidelity {f}");
}

#[test]
fn sweep_matches_single_long_run() {
    let config = butyrate_config();
    let drive = config.drive_spec().unwrap();
    let base = config.sim_params().unwrap();
    let params = SimParams::new(base.t_end, base.dt, 5000, Method::ExpmMidpoint).unwrap();
    let start = flip_spin(&config.initial_state().unwrap(), 1).unwrap();
    let long = evolve(&start, &config.chain, &drive, &params).unwrap();
    let t_ends: Vec<f64> = long.times.clone();
    let points = sweep_t_end(&start, &config.chain, &drive, &params, &t_ends).unwrap();
    assert_eq!(points.len(), long.len());
    for (k, p) in points.iter().enumerate() {
        assert!((p.total - long.total_polarization[k]).abs() < 1e-9, "t = {}", p.t_end);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn expm_conserves_norm((spec, drive, state) in random_four_spin()) {
        let dt = default_dt(&spec, &drive).unwrap();
        let params = SimParams::new(1e4 * dt, dt, 10_000, Method::ExpmMidpoint).unwrap();
        prop_assert_eq!(params.n_steps(), 10_000);
        let traj = evolve(&state, &spec, &drive, &params).unwrap();
        prop_assert!((traj.final_state.norm() - state.norm()).abs() <= 1e-9);
    }

    #[test]
    fn zero_drive_conserves_energy((spec, _drive, state) in random_four_spin()) {
        let h = build_static_hamiltonian(&spec).unwrap();
        let e0 = h.expectation(&state);
        let dt = default_dt(&spec, &DriveSpec::default()).unwrap();
        let params = SimParams::new(2000.0 * dt, dt, 1, Method::ExpmMidpoint).unwrap();
        let traj = evolve(&state, &spec, &DriveSpec::default(), &params).unwrap();
        let e1 = h.expectation(&traj.final_state);
        prop_assert!((e1 - e0).abs() <= 1e-9 * h.norm_bound(0.0));
    }

    #[test]
    fn zero_drive_conserves_each_zz_polarization((spec, _drive, state) in random_four_spin()) {
        let spec = ChainSpec { coupling_form: CouplingForm::Zz, ..spec };
        let dt = default_dt(&spec, &DriveSpec::default()).unwrap();
        let params = SimParams::new(500.0 * dt, dt, 7, Method::ExpmMidpoint).unwrap();
        let traj = evolve(&state, &spec, &DriveSpec::default(), &params).unwrap();
        for (i, series) in traj.per_spin_polarization.iter().enumerate() {
            let p0 = state.polarization(i + 1).unwrap();
            prop_assert!(series.iter().all(|p| (p - p0).abs() <= 1e-12));
        }
        for (k, total) in traj.total_polarization.iter().enumerate() {
            let sum: f64 = traj.per_spin_polarization.iter().map(|s| s[k]).sum();
            prop_assert!((total - sum).abs() <= 1e-9);
        }
    }
}
