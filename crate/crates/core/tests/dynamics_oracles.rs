//! Independent oracles for the propagator: two-level Rabi analytics,
//! method cross-agreement, conservation laws, and a gauge identity that
//! reduces a linearly drifting drive phase to a static detuning.

mod common;

use common::*;
use ghzforge_core::fock::{Basis, FockState, Spin};
use ghzforge_core::operators::{
    build_hamiltonian, DrivePhaseDrift, Frame, HamiltonianSpec,
};
use ghzforge_core::propagator::{
    evolve, evolve_time_dependent, norm, EvolveOptions, Method,
};
use ghzforge_core::protocol::{
    build_generation_schedule, resonance_frequencies, run_schedule, Observable, ProtocolParams,
    RunOptions,
};
use ghzforge_core::C64;
use std::sync::Arc;

#[test]
fn resonant_pair_transfer_follows_rabi_law() {
    // Isolated pair |dn,dn> -> |0,d> at the superposition-step resonance:
    // population sin^2(J t) within 1e-2, pi-pulse complete at tJ = pi/2.
    let params = ProtocolParams {
        sites: 2,
        interaction: 405.0,
        eta_ext: 21.0,
        trap_center: 9.0,
        holes: vec![],
        hole_correction: false,
    };
    let basis = params.basis().unwrap();
    let omega1 = resonance_frequencies(&params)[0];
    let h = build_hamiltonian(&params.hamiltonian_spec(omega1), &basis, 0.0).unwrap();
    let psi0 = params.initial_state(&basis).unwrap();
    let (target, _) = FockState::from_creation_ops(&[(2, Spin::Up), (2, Spin::Down)]).unwrap();
    let kt = basis.index_of(target).unwrap();
    let opts = EvolveOptions::default();
    let mut max_dev = 0.0f64;
    for k in 0..=40 {
        let t = k as f64 / 40.0 * std::f64::consts::FRAC_PI_2;
        let psi = evolve(&h, &psi0, t, &opts).unwrap();
        let pop = psi[kt].norm_sqr();
        max_dev = max_dev.max((pop - t.sin().powi(2)).abs());
    }
    assert!(max_dev <= 1e-2, "max deviation from sin^2(Jt): {max_dev:.3e}");
    let end = evolve(&h, &psi0, std::f64::consts::FRAC_PI_2, &opts).unwrap();
    assert!((end[kt].norm_sqr() - 1.0).abs() <= 2e-2);
}

#[test]
fn methods_agree_on_mid_size_hermitian_operators() {
    // Krylov vs dense-eigen (and the Chebyshev fast path) on random
    // protocol-shaped Hermitian operators at dim 924.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let basis = Arc::new(Basis::new(6, 6).unwrap());
    for trial in 0..3 {
        let spec = HamiltonianSpec {
            tunneling: 1.0,
            interaction: rng.gen_range(10.0..500.0),
            omega: rng.gen_range(-300.0..300.0),
            delta: rng.gen_range(-1.0..1.0),
            eta_ext: rng.gen_range(1.0..30.0),
            trap_center: rng.gen_range(7.0..12.0),
            frame: Frame::Rotated,
            drift: None,
        };
        let h = build_hamiltonian(&spec, &basis, 0.0).unwrap();
        let psi = random_state(basis.dim(), 1000 + trial);
        let t = 0.6;
        let dense = evolve(&h, &psi, t, &EvolveOptions::dense()).unwrap();
        let krylov = evolve(&h, &psi, t, &EvolveOptions::krylov()).unwrap();
        let cheb = evolve(
            &h,
            &psi,
            t,
            &EvolveOptions {
                method: Method::Chebyshev,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            vec_distance(&dense, &krylov) <= 1e-8,
            "krylov/dense disagree: {:.3e}",
            vec_distance(&dense, &krylov)
        );
        assert!(
            vec_distance(&dense, &cheb) <= 1e-8,
            "chebyshev/dense disagree: {:.3e}",
            vec_distance(&dense, &cheb)
        );
    }
}

#[test]
fn norm_and_energy_conserved_over_a_protocol() {
    // Cumulative norm drift over a full L=6 generation stays under 1e-7 and
    // per-segment energy expectation is conserved to 1e-8 relative.
    let params = ProtocolParams::standard(6);
    let schedule = build_generation_schedule(&params).unwrap();
    let basis = params.basis().unwrap();
    let initial = params.initial_state(&basis).unwrap();
    let run = run_schedule(
        &params,
        &schedule,
        &initial,
        &[Observable::Norm, Observable::Energy],
        &RunOptions {
            retain_states: true,
            ..RunOptions::default()
        },
    )
    .unwrap();
    for row in &run.values {
        assert!((row[0] - 1.0).abs() <= 1e-7, "norm drift {:.3e}", row[0] - 1.0);
    }
    // Energy within a segment: evolve partway and compare expectations.
    let seg = &schedule.segments[1];
    let h = build_hamiltonian(&params.hamiltonian_spec(seg.omega), &basis, 0.0).unwrap();
    let start = &run.states.as_ref().unwrap()[1];
    let mid_state = evolve(&h, start, 0.3, &EvolveOptions::default()).unwrap();
    let e0 = h.expectation(start).re;
    let e1 = h.expectation(&mid_state).re;
    assert!((e1 - e0).abs() <= 1e-8 * e0.abs().max(1.0));
}

#[test]
fn linear_drift_matches_static_gauge_transform() {
    // A drive phase lam(t) = eps t is gauge-equivalent to a static detuning:
    // psi_drift(T) = e^{-i eps T N_g} e^{+i eps T N/2} e^{-i H(delta + eps) T} psi(0).
    let basis = Arc::new(Basis::new(3, 3).unwrap());
    let eps = 0.4;
    let t_final = 1.1;
    let spec = HamiltonianSpec {
        tunneling: 1.0,
        interaction: 25.0,
        omega: 14.0,
        delta: 0.2,
        eta_ext: 2.0,
        trap_center: 6.0,
        frame: Frame::Lab,
        drift: Some(DrivePhaseDrift::Linear { rate: eps }),
    };
    let psi0 = random_state(basis.dim(), 5);
    let opts = EvolveOptions {
        tolerance: 1e-10,
        ..Default::default()
    };
    let drifted = evolve_time_dependent(
        &|t| build_hamiltonian(&spec, &basis, t),
        &psi0,
        0.0,
        t_final,
        &opts,
        0.0,
    )
    .unwrap();

    let mut static_spec = spec.clone();
    static_spec.drift = None;
    static_spec.delta += eps;
    let h_eff = build_hamiltonian(&static_spec, &basis, 0.0).unwrap();
    let mut reference = evolve(&h_eff, &psi0, t_final, &EvolveOptions::dense()).unwrap();
    let n_total = basis.particles() as f64;
    for (k, &s) in basis.states().iter().enumerate() {
        let n_g: u32 = (1..=3)
            .map(|j| s.occupied(ghzforge_core::fock::mode_index(j, Spin::Down)) as u32)
            .sum();
        let phase = C64::from_polar(1.0, eps * t_final * (0.5 * n_total - n_g as f64));
        reference[k] *= phase;
    }
    let dist = vec_distance(&drifted, &reference);
    assert!(dist <= 1e-7, "gauge identity violated: {dist:.3e}");
    assert!((norm(&drifted) - 1.0).abs() <= 1e-9);
}

#[test]
fn sampled_drift_interpolation_matches_linear() {
    let basis = Arc::new(Basis::new(2, 2).unwrap());
    let rate = 0.3;
    let linear = DrivePhaseDrift::Linear { rate };
    let sampled = DrivePhaseDrift::Samples {
        times: (0..=10).map(|k| k as f64 * 0.2).collect(),
        values: (0..=10).map(|k| k as f64 * 0.2 * rate).collect(),
    };
    for t in [0.0, 0.37, 1.0, 1.99] {
        assert!((linear.eval(t) - sampled.eval(t)).abs() < 1e-12);
    }
    let mk = |drift: DrivePhaseDrift| HamiltonianSpec {
        tunneling: 1.0,
        interaction: 5.0,
        omega: 8.0,
        delta: 0.0,
        eta_ext: 1.0,
        trap_center: 5.0,
        frame: Frame::Lab,
        drift: Some(drift),
    };
    let psi0 = random_state(basis.dim(), 8);
    let opts = EvolveOptions::default();
    let a = evolve_time_dependent(
        &|t| build_hamiltonian(&mk(linear.clone()), &basis, t),
        &psi0,
        0.0,
        1.5,
        &opts,
        0.0,
    )
    .unwrap();
    let b = evolve_time_dependent(
        &|t| build_hamiltonian(&mk(sampled.clone()), &basis, t),
        &psi0,
        0.0,
        1.5,
        &opts,
        0.0,
    )
    .unwrap();
    assert!(vec_distance(&a, &b) < 1e-7);
}
