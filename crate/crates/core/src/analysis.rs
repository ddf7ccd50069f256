//! Target states, fidelities, accumulated-phase formulas, doublon
//! observables, the reversal measurement pipeline and the drive-noise
//! Monte Carlo.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::fock::{Basis, FockState, Spin};
use crate::operators::{build_hamiltonian, rotate_frame, Frame, RotateDirection, SparseOperator};
use crate::propagator::{evolve, DensePropagator, EvolveOptions, Method};
pub use crate::protocol::doublon_number;
use crate::protocol::{
    apply_pulse, build_generation_schedule, build_reversal_schedule, run_schedule, ProtocolParams,
    RunOptions, DEFAULT_PULSE_OMEGA,
};
use crate::schedule::PulseSchedule;
use crate::{Error, Result};

/// GHZ target: equal superposition of the all-down product component and the
/// walker component `|0, up, ..., up, d>`.
///
/// The walker ket is fixed by applying creation operators site-ascending
/// with up before down within a site; this is the operator order the
/// transfer steps produce, so the closed-form generation phase
/// [`theta_f`] refers to exactly this convention.
#[derive(Debug, Clone)]
pub struct GhzTarget {
    pub sites: usize,
    component_down: FockState,
    component_walker: FockState,
    walker_sign: f64,
}

impl GhzTarget {
    pub fn new(sites: usize) -> Self {
        assert!(sites >= 2);
        let mut ops: Vec<(usize, Spin)> = (2..sites).map(|j| (j, Spin::Up)).collect();
        ops.push((sites, Spin::Up));
        ops.push((sites, Spin::Down));
        let (walker, sign) = FockState::from_creation_ops(&ops).expect("distinct modes");
        let down = FockState(
            (1..=sites)
                .map(|j| 1u64 << crate::fock::mode_index(j, Spin::Down))
                .fold(0, |acc, b| acc | b),
        );
        GhzTarget {
            sites,
            component_down: down,
            component_walker: walker,
            walker_sign: sign as f64,
        }
    }

    /// Canonical bit patterns of the two components (sign not included).
    pub fn components(&self) -> (FockState, FockState) {
        (self.component_down, self.component_walker)
    }

    /// `(<A|psi>, <B|psi>)` amplitudes, with the walker sign convention
    /// applied.
    pub fn amplitudes(&self, state: &[C64], basis: &Basis) -> (C64, C64) {
        let a = basis
            .index_of(self.component_down)
            .map_or(C64::ZERO, |k| state[k]);
        let b = basis
            .index_of(self.component_walker)
            .map_or(C64::ZERO, |k| state[k]);
        (a, self.walker_sign * b)
    }
}

/// Phase handling for [`fidelity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FidelityMode {
    /// `|<GHZ(theta)|psi>|^2` at a fixed relative phase theta.
    Fixed(f64),
    /// `(|<A|psi>| + |<B|psi>|)^2 / 2`, the maximum of the fixed-phase
    /// fidelity over theta.
    PhaseOptimized,
}

/// Fidelity of `state` with the GHZ target under the chosen phase handling.
pub fn fidelity(state: &[C64], target: &GhzTarget, basis: &Basis, mode: FidelityMode) -> f64 {
    let (a, b) = target.amplitudes(state, basis);
    match mode {
        FidelityMode::Fixed(theta) => {
            let overlap = (a + C64::from_polar(1.0, -theta) * b) / 2f64.sqrt();
            overlap.norm_sqr()
        }
        FidelityMode::PhaseOptimized => {
            let s = a.norm() + b.norm();
            0.5 * s * s
        }
    }
}

/// Relative phase `arg(<B|psi> / <A|psi>)` of a two-component state.
pub fn relative_phase(state: &[C64], target: &GhzTarget, basis: &Basis) -> f64 {
    let (a, b) = target.amplitudes(state, basis);
    (b * a.conj()).arg()
}

/// Closed-form relative phase accumulated by noise-free generation:
/// `theta_f = (pi/2) [ (L-1) - (U/J)(L-2) + (eta/J)(L/3)(L-1)(L-2) ]`.
/// Exact in the limit of infinite off-resonant gaps; not reduced mod 2 pi.
pub fn theta_f(sites: usize, u_over_j: f64, eta_over_j: f64) -> f64 {
    let l = sites as f64;
    PI / 2.0 * ((l - 1.0) - u_over_j * (l - 2.0) + eta_over_j * l / 3.0 * (l - 1.0) * (l - 2.0))
}

/// Reduces an angle to (-pi, pi].
pub fn wrap_phase(phi: f64) -> f64 {
    let mut x = phi.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

// ---------------------------------------------------------------------------
// Noise Monte Carlo
// ---------------------------------------------------------------------------

/// Configuration of a drive-frequency noise scan at one noise level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseScanConfig {
    pub params: ProtocolParams,
    /// Per-step shift bound: shifts are drawn uniformly from
    /// [-delta_omega_max, delta_omega_max], independently per segment.
    pub delta_omega_max: f64,
    pub trajectories: usize,
    pub seed: u64,
}

/// Aggregated scan outcome. The standard deviation is the sample standard
/// deviation over trajectories (the shaded-band convention).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanSummary {
    pub delta_omega_max: f64,
    pub fidelities: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub trajectories: usize,
    pub seed: u64,
    pub schedule_digest: String,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Per-trajectory RNG stream derived from (seed, trajectory index), so the
/// draw is independent of scheduling order.
fn trajectory_rng(seed: u64, trajectory: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trajectory as u64 + 1);
    rng
}

/// Runs the generation protocol once per trajectory with per-step drive
/// shifts `Omega_i + dOmega_i` and returns phase-optimized fidelities.
/// Trajectories run data-parallel; results are bit-reproducible from the
/// seed regardless of worker count.
pub fn noise_scan(config: &NoiseScanConfig, opts: &EvolveOptions) -> Result<ScanSummary> {
    if config.trajectories < 1 {
        return Err(Error::InvalidParameter(
            "noise scan needs at least one trajectory".into(),
        ));
    }
    let schedule = build_generation_schedule(&config.params)?;
    let basis = config.params.basis()?;
    let initial = config.params.initial_state(&basis)?;
    let target = GhzTarget::new(config.params.sites);
    let n_segments = schedule.segments.len();

    let run_one = |shifts: Vec<f64>| -> Result<f64> {
        let run_opts = RunOptions {
            evolve: *opts,
            omega_shifts: Some(shifts),
            ..RunOptions::default()
        };
        let run = run_schedule(&config.params, &schedule, &initial, &[], &run_opts)?;
        Ok(fidelity(
            &run.final_state,
            &target,
            &basis,
            FidelityMode::PhaseOptimized,
        ))
    };

    let fidelities: Vec<f64> = if config.delta_omega_max == 0.0 {
        // All trajectories are identical; run once and replicate.
        let f = run_one(vec![0.0; n_segments])?;
        vec![f; config.trajectories]
    } else {
        (0..config.trajectories)
            .into_par_iter()
            .map(|k| {
                let mut rng = trajectory_rng(config.seed, k);
                let shifts: Vec<f64> = (0..n_segments)
                    .map(|_| rng.gen_range(-config.delta_omega_max..=config.delta_omega_max))
                    .collect();
                run_one(shifts)
            })
            .collect::<Result<Vec<f64>>>()?
    };

    let (mean, std) = mean_std(&fidelities);
    Ok(ScanSummary {
        delta_omega_max: config.delta_omega_max,
        fidelities,
        mean,
        std,
        trajectories: config.trajectories,
        seed: config.seed,
        schedule_digest: schedule.digest(),
    })
}

// ---------------------------------------------------------------------------
// Reversal measurement
// ---------------------------------------------------------------------------

enum SegmentPropagator {
    Dense(DensePropagator),
    Krylov(SparseOperator),
}

impl SegmentPropagator {
    fn new(h: SparseOperator, opts: &EvolveOptions) -> Result<Self> {
        if opts.method == Method::DenseEigen && h.dim() <= opts.dense_limit {
            Ok(SegmentPropagator::Dense(DensePropagator::new(
                &h,
                opts.dense_limit,
            )?))
        } else {
            Ok(SegmentPropagator::Krylov(h))
        }
    }

    fn apply(&self, state: &[C64], t: f64, opts: &EvolveOptions) -> Result<Vec<C64>> {
        match self {
            SegmentPropagator::Dense(p) => Ok(p.apply(state, t)),
            SegmentPropagator::Krylov(h) => evolve(h, state, t, opts),
        }
    }
}

/// Precompiled reversal measurement: generation output held fixed while the
/// precession time is swept. Per-segment propagators are cached so a sweep
/// point costs a handful of matvecs.
pub struct ReversalMeasurement {
    basis: Arc<Basis>,
    window: Vec<usize>,
    omega_p: f64,
    opts: EvolveOptions,
    /// P applied to the lab-frame generation output.
    pulsed: Vec<C64>,
    precession: SegmentPropagator,
    pulse_back: SegmentPropagator,
    reversal: Vec<(SegmentPropagator, f64)>,
    params: ProtocolParams,
}

impl ReversalMeasurement {
    /// Generates the GHZ state, applies P once, and prepares cached
    /// propagators for the precession and reversal stages.
    pub fn new(
        params: &ProtocolParams,
        delta: f64,
        window: Vec<usize>,
        opts: &EvolveOptions,
    ) -> Result<Self> {
        let omega_p = DEFAULT_PULSE_OMEGA;
        let basis = params.basis()?;
        let generation = build_generation_schedule(params)?;
        let initial = params.initial_state(&basis)?;
        let run = run_schedule(
            params,
            &generation,
            &initial,
            &[],
            &RunOptions {
                evolve: *opts,
                ..RunOptions::default()
            },
        )?;
        let lab = rotate_frame(&run.final_state, &basis, RotateDirection::RotatedToLab, 0.0);
        let pulsed = apply_pulse(params, &basis, &lab, omega_p, false, opts)?;

        // Precession Hamiltonian: drive off, detuning on, lab frame.
        let mut prec_spec = params.hamiltonian_spec(0.0).with_delta(delta);
        prec_spec.frame = Frame::Lab;
        let precession = SegmentPropagator::new(build_hamiltonian(&prec_spec, &basis, 0.0)?, opts)?;

        // P† generator (opposite-phase pulse with the lattice live).
        let mut bg_spec = params.hamiltonian_spec(0.0);
        bg_spec.frame = Frame::Lab;
        let pulse_back = SegmentPropagator::new(
            build_hamiltonian(&bg_spec, &basis, 0.0)?
                .add(&crate::operators::build_pulse_generator(omega_p, PI / 2.0, &basis)),
            opts,
        )?;

        let mut reversal = Vec::new();
        for seg in build_reversal_schedule(params)?.segments {
            let h = build_hamiltonian(&params.hamiltonian_spec(seg.omega), &basis, 0.0)?;
            reversal.push((SegmentPropagator::new(h, opts)?, seg.duration));
        }

        Ok(ReversalMeasurement {
            basis,
            window,
            omega_p,
            opts: *opts,
            pulsed,
            precession,
            pulse_back,
            reversal,
            params: params.clone(),
        })
    }

    /// Doublon number in the measurement window after precessing for
    /// `t_delta` and reversing the generation.
    pub fn doublon_at(&self, t_delta: f64) -> Result<f64> {
        let after_prec = self.precession.apply(&self.pulsed, t_delta, &self.opts)?;
        let unpulsed =
            self.pulse_back
                .apply(&after_prec, PI / (2.0 * self.omega_p), &self.opts)?;
        let mut state = rotate_frame(&unpulsed, &self.basis, RotateDirection::LabToRotated, 0.0);
        for (prop, duration) in &self.reversal {
            state = prop.apply(&state, *duration, &self.opts)?;
        }
        Ok(doublon_number(
            &state,
            &self.basis,
            self.window.iter().copied(),
        ))
    }

    /// Doublon signal over a grid of precession times.
    pub fn signal(&self, t_grid: &[f64]) -> Result<Vec<f64>> {
        t_grid.iter().map(|&t| self.doublon_at(t)).collect()
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }
}

/// Convenience wrapper: noise-free generation run returning the final state
/// and its phase-optimized GHZ fidelity.
pub fn generate_ghz(
    params: &ProtocolParams,
    opts: &EvolveOptions,
) -> Result<(Vec<C64>, f64, PulseSchedule)> {
    let schedule = build_generation_schedule(params)?;
    let basis = params.basis()?;
    let initial = params.initial_state(&basis)?;
    let run = run_schedule(
        params,
        &schedule,
        &initial,
        &[],
        &RunOptions {
            evolve: *opts,
            ..RunOptions::default()
        },
    )?;
    let target = GhzTarget::new(params.sites);
    let f = fidelity(
        &run.final_state,
        &target,
        &basis,
        FidelityMode::PhaseOptimized,
    );
    Ok((run.final_state, f, schedule))
}
