//! Hamiltonian terms of the driven Fermi-Hubbard chain, in the lab frame or
//! the drive-eigenstate (rotated) frame, realized as sparse operators.
//!
//! Lab frame (modes `g`/`e` in the down/up slots):
//!
//! ```text
//! H = -J sum_{<i,j>,s} (c†_{i,s} c_{j,s} + h.c.) + U sum_j n_{j,e} n_{j,g}
//!     + (O/2) sum_j (e^{i j pi + i lam(t)} c†_{j,e} c_{j,g} + h.c.)
//!     + eta sum_j (j - j0)^2 (n_{j,e} + n_{j,g})
//!     + (delta/2) sum_j (n_{j,e} - n_{j,g})
//! ```
//!
//! Rotated frame (dressed modes `a_{j,up} = (c_{j,e} + e^{i j pi} c_{j,g})/sqrt(2)`,
//! `a_{j,down} = (c_{j,e} - e^{i j pi} c_{j,g})/sqrt(2)`): tunneling becomes
//! spin-flipping, the drive becomes diagonal `(O/2)(n_up - n_down)`, the
//! interaction and trap keep their form, and the detuning turns into the
//! onsite coupling `(delta/2)(a†_up a_down + h.c.)`.
//!
//! A global drive-phase drift `lam(t)` is supported in the lab frame only;
//! the rotated frame is defined at `lam = 0`.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::fock::{apply_bilinear, mode_index, Basis, Spin};
use crate::{Error, Result};

/// Frame in which an operator or state vector is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Lab,
    Rotated,
}

/// Time-dependent global phase on the drive term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DrivePhaseDrift {
    /// lam(t) = rate * t
    Linear { rate: f64 },
    /// Piecewise-linear interpolation of samples; clamped outside the range.
    Samples { times: Vec<f64>, values: Vec<f64> },
}

impl DrivePhaseDrift {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            DrivePhaseDrift::Linear { rate } => rate * t,
            DrivePhaseDrift::Samples { times, values } => {
                assert_eq!(times.len(), values.len());
                if times.is_empty() {
                    return 0.0;
                }
                match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
                    Ok(k) => values[k],
                    Err(0) => values[0],
                    Err(k) if k == times.len() => values[k - 1],
                    Err(k) => {
                        let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
                        values[k - 1] * (1.0 - w) + values[k] * w
                    }
                }
            }
        }
    }
}

/// Term-wise description of the chain Hamiltonian. All energies share one
/// unit system (J = 1 by convention; physical units via [`crate::lattice`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    /// Nearest-neighbour tunneling rate J.
    pub tunneling: f64,
    /// Onsite repulsion U.
    pub interaction: f64,
    /// Drive Rabi frequency Omega.
    pub omega: f64,
    /// Laser detuning delta.
    pub delta: f64,
    /// Trap curvature energy eta_ext.
    pub eta_ext: f64,
    /// Trap center j0 in units of sites (real-valued).
    pub trap_center: f64,
    pub frame: Frame,
    /// Optional drive-phase drift lam(t); lab frame only.
    pub drift: Option<DrivePhaseDrift>,
}

impl HamiltonianSpec {
    pub fn rotated(tunneling: f64, interaction: f64, eta_ext: f64, trap_center: f64) -> Self {
        HamiltonianSpec {
            tunneling,
            interaction,
            omega: 0.0,
            delta: 0.0,
            eta_ext,
            trap_center,
            frame: Frame::Rotated,
            drift: None,
        }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn with_drift(mut self, drift: DrivePhaseDrift) -> Self {
        self.drift = Some(drift);
        self
    }

    /// True when the spec depends on time (a non-constant drift is present).
    pub fn is_time_dependent(&self) -> bool {
        match &self.drift {
            None => false,
            Some(DrivePhaseDrift::Linear { rate }) => *rate != 0.0,
            Some(DrivePhaseDrift::Samples { values, .. }) => {
                values.windows(2).any(|w| w[0] != w[1])
            }
        }
    }
}

/// One-body bilinear term `amp * c†_create c_destroy` (h.c. partners are
/// stored explicitly).
#[derive(Debug, Clone, Copy)]
struct Hopping {
    create: u8,
    destroy: u8,
    amp: C64,
}

#[derive(Debug)]
struct Csr {
    row_ptr: Vec<u32>,
    col: Vec<u32>,
    val: Vec<C64>,
}

/// Particle-number-conserving operator over a fixed [`Basis`], stored as a
/// real diagonal plus a list of bilinear hopping terms.
///
/// Application is matrix-free by contract; [`SparseOperator::assemble`]
/// optionally caches a compressed-sparse-row form (worthwhile for repeated
/// matvecs at the dimensions used here). Operators are immutable after
/// construction and safe to share across threads; `apply` may run
/// concurrently on distinct vectors.
#[derive(Debug)]
pub struct SparseOperator {
    basis: Arc<Basis>,
    diagonal: Vec<f64>,
    hoppings: Vec<Hopping>,
    csr: OnceLock<Csr>,
}

impl SparseOperator {
    fn new(basis: Arc<Basis>) -> Self {
        let dim = basis.dim();
        SparseOperator {
            basis,
            diagonal: vec![0.0; dim],
            hoppings: Vec::new(),
            csr: OnceLock::new(),
        }
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Sum of two operators over the same basis.
    pub fn add(&self, other: &SparseOperator) -> SparseOperator {
        SparseOperator::linear_combination(&[(1.0, self), (1.0, other)])
    }

    /// Real linear combination `sum_k c_k H_k` of operators over one basis.
    pub fn linear_combination(terms: &[(f64, &SparseOperator)]) -> SparseOperator {
        assert!(!terms.is_empty());
        let basis = terms[0].1.basis.clone();
        let mut out = SparseOperator::new(basis.clone());
        for &(c, op) in terms {
            assert!(Arc::ptr_eq(&basis, &op.basis), "basis mismatch");
            for (d, s) in out.diagonal.iter_mut().zip(&op.diagonal) {
                *d += c * s;
            }
            out.hoppings.extend(op.hoppings.iter().map(|h| Hopping {
                create: h.create,
                destroy: h.destroy,
                amp: c * h.amp,
            }));
        }
        out
    }

    /// y = H x without any assembled matrix: terms are applied on the fly
    /// through basis lookups.
    pub fn apply_matrix_free(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        for (yk, (d, xk)) in y.iter_mut().zip(self.diagonal.iter().zip(x)) {
            *yk = d * xk;
        }
        for (k, &s) in self.basis.states().iter().enumerate() {
            let xk = x[k];
            if xk == C64::ZERO {
                continue;
            }
            for hop in &self.hoppings {
                if let Some((img, sign)) =
                    apply_bilinear(s, hop.create as usize, hop.destroy as usize)
                {
                    let i = self
                        .basis
                        .index_of(img)
                        .expect("operator conserves particle number");
                    y[i] += hop.amp * (sign as f64) * xk;
                }
            }
        }
    }

    /// Builds and caches the CSR form (idempotent).
    pub fn assemble(&self) {
        self.csr_cache();
    }

    fn csr_cache(&self) -> &Csr {
        self.csr.get_or_init(|| {
            let dim = self.dim();
            let mut triplets: Vec<(u32, u32, C64)> = Vec::new();
            for (k, &s) in self.basis.states().iter().enumerate() {
                for hop in &self.hoppings {
                    if let Some((img, sign)) =
                        apply_bilinear(s, hop.create as usize, hop.destroy as usize)
                    {
                        let i = self.basis.index_of(img).expect("particle number conserved");
                        triplets.push((i as u32, k as u32, hop.amp * sign as f64));
                    }
                }
            }
            for (k, &d) in self.diagonal.iter().enumerate() {
                if d != 0.0 {
                    triplets.push((k as u32, k as u32, C64::new(d, 0.0)));
                }
            }
            triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
            let mut row_ptr = Vec::with_capacity(dim + 1);
            let mut col = Vec::with_capacity(triplets.len());
            let mut val: Vec<C64> = Vec::with_capacity(triplets.len());
            row_ptr.push(0);
            let mut row = 0u32;
            for (i, j, v) in triplets {
                while row < i {
                    row_ptr.push(col.len() as u32);
                    row += 1;
                }
                let row_start = *row_ptr.last().unwrap() as usize;
                if col.len() > row_start && *col.last().unwrap() == j {
                    *val.last_mut().unwrap() += v;
                } else {
                    col.push(j);
                    val.push(v);
                }
            }
            while (row_ptr.len() as usize) < dim + 1 {
                row_ptr.push(col.len() as u32);
            }
            Csr { row_ptr, col, val }
        })
    }

    /// y = H x, using the CSR cache (building it on first use).
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        let csr = self.csr_cache();
        assert_eq!(x.len(), self.dim());
        for (i, yk) in y.iter_mut().enumerate() {
            let lo = csr.row_ptr[i] as usize;
            let hi = csr.row_ptr[i + 1] as usize;
            let mut acc = C64::ZERO;
            for (c, v) in csr.col[lo..hi].iter().zip(&csr.val[lo..hi]) {
                acc += v * x[*c as usize];
            }
            *yk = acc;
        }
    }

    /// Expectation value `<x|H|x>`.
    pub fn expectation(&self, x: &[C64]) -> C64 {
        let mut y = vec![C64::ZERO; self.dim()];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum()
    }

    /// Visits every stored matrix entry as `(row, col, value)`.
    pub fn for_each_entry(&self, mut f: impl FnMut(usize, usize, C64)) {
        let csr = self.csr_cache();
        for i in 0..self.dim() {
            for k in csr.row_ptr[i] as usize..csr.row_ptr[i + 1] as usize {
                f(i, csr.col[k] as usize, csr.val[k]);
            }
        }
    }

    /// Dense matrix form (for small dimensions / oracle comparisons).
    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        let dim = self.dim();
        let csr = self.csr_cache();
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for k in csr.row_ptr[i] as usize..csr.row_ptr[i + 1] as usize {
                m[(i, csr.col[k] as usize)] = csr.val[k];
            }
        }
        m
    }

    /// max_ij |H - H†| over all stored entries (0 for an exactly Hermitian
    /// operator up to floating round-off).
    pub fn hermiticity_defect(&self) -> f64 {
        let csr = self.csr_cache();
        let mut map = std::collections::HashMap::new();
        for i in 0..self.dim() {
            for k in csr.row_ptr[i] as usize..csr.row_ptr[i + 1] as usize {
                map.insert((i as u32, csr.col[k]), csr.val[k]);
            }
        }
        let mut defect = 0.0f64;
        for (&(i, j), &v) in &map {
            let vt = map.get(&(j, i)).copied().unwrap_or(C64::ZERO);
            defect = defect.max((v - vt.conj()).norm());
        }
        defect
    }

    /// Largest entry magnitude (scale reference for tolerance checks).
    pub fn max_entry(&self) -> f64 {
        let csr = self.csr_cache();
        csr.val.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Crude upper bound on the spectral radius (Gershgorin over rows).
    pub fn gershgorin_bound(&self) -> f64 {
        let (a, b) = self.gershgorin_interval();
        a.abs().max(b.abs())
    }

    /// Gershgorin enclosure of the spectrum: every eigenvalue lies in
    /// `[lo, hi]` with `lo = min_i (Re H_ii - r_i)`, `hi = max_i (Re H_ii + r_i)`
    /// and `r_i` the off-diagonal absolute row sum.
    pub fn gershgorin_interval(&self) -> (f64, f64) {
        let csr = self.csr_cache();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim() {
            let mut r = 0.0;
            let mut d = 0.0;
            for k in csr.row_ptr[i] as usize..csr.row_ptr[i + 1] as usize {
                if csr.col[k] as usize == i {
                    d = csr.val[k].re;
                } else {
                    r += csr.val[k].norm();
                }
            }
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        if self.dim() == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }
}

fn drive_sign(site: usize) -> f64 {
    // e^{i j pi} = (-1)^j with 1-based site labels
    if site % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Trap energy of a single atom on `site`.
pub fn trap_energy(eta_ext: f64, trap_center: f64, site: usize) -> f64 {
    let d = site as f64 - trap_center;
    eta_ext * d * d
}

/// Builds the chain Hamiltonian for `spec` at time `t` (`t` only matters when
/// a drift is present).
pub fn build_hamiltonian(spec: &HamiltonianSpec, basis: &Arc<Basis>, t: f64) -> Result<SparseOperator> {
    if spec.frame == Frame::Rotated && spec.is_time_dependent() {
        return Err(Error::InvalidParameter(
            "drive-phase drift is representable in the lab frame only".into(),
        ));
    }
    let sites = basis.sites();
    let mut op = SparseOperator::new(basis.clone());

    // Interaction and trap are diagonal and frame-independent.
    for (k, &s) in basis.states().iter().enumerate() {
        let occ = s.occupations(sites);
        let mut d = 0.0;
        for (j, o) in occ.iter().enumerate() {
            let site = j + 1;
            if o.is_doublon() {
                d += spec.interaction;
            }
            d += trap_energy(spec.eta_ext, spec.trap_center, site) * o.total() as f64;
        }
        op.diagonal[k] = d;
    }

    match spec.frame {
        Frame::Rotated => {
            for (k, &s) in basis.states().iter().enumerate() {
                let occ = s.occupations(sites);
                let mut d = 0.0;
                for o in &occ {
                    // (Omega/2)(n_up - n_down)
                    d += 0.5 * spec.omega * (o.up as i32 as f64 - o.down as i32 as f64);
                }
                op.diagonal[k] += d;
            }
            // Spin-flip tunneling on each bond, h.c. explicit.
            let amp = C64::new(-spec.tunneling, 0.0);
            if spec.tunneling != 0.0 {
                for j in 1..sites {
                    for (cs, ds) in [(Spin::Up, Spin::Down), (Spin::Down, Spin::Up)] {
                        let a = mode_index(j, cs) as u8;
                        let b = mode_index(j + 1, ds) as u8;
                        op.hoppings.push(Hopping {
                            create: a,
                            destroy: b,
                            amp,
                        });
                        op.hoppings.push(Hopping {
                            create: b,
                            destroy: a,
                            amp,
                        });
                    }
                }
            }
            // Detuning maps to the onsite coupling (delta/2)(a†_up a_down + h.c.).
            if spec.delta != 0.0 {
                let amp = C64::new(0.5 * spec.delta, 0.0);
                for j in 1..=sites {
                    let up = mode_index(j, Spin::Up) as u8;
                    let dn = mode_index(j, Spin::Down) as u8;
                    op.hoppings.push(Hopping {
                        create: up,
                        destroy: dn,
                        amp,
                    });
                    op.hoppings.push(Hopping {
                        create: dn,
                        destroy: up,
                        amp,
                    });
                }
            }
        }
        Frame::Lab => {
            // Spin-conserving tunneling.
            let amp = C64::new(-spec.tunneling, 0.0);
            if spec.tunneling != 0.0 {
                for j in 1..sites {
                    for s in [Spin::Down, Spin::Up] {
                        let a = mode_index(j, s) as u8;
                        let b = mode_index(j + 1, s) as u8;
                        op.hoppings.push(Hopping {
                            create: a,
                            destroy: b,
                            amp,
                        });
                        op.hoppings.push(Hopping {
                            create: b,
                            destroy: a,
                            amp,
                        });
                    }
                }
            }
            // Collective drive with SOC phase and optional drift.
            if spec.omega != 0.0 {
                let lam = spec.drift.as_ref().map_or(0.0, |d| d.eval(t));
                let phase = C64::from_polar(1.0, lam);
                for j in 1..=sites {
                    let amp = 0.5 * spec.omega * drive_sign(j) * phase;
                    let e = mode_index(j, Spin::Up) as u8;
                    let g = mode_index(j, Spin::Down) as u8;
                    op.hoppings.push(Hopping {
                        create: e,
                        destroy: g,
                        amp,
                    });
                    op.hoppings.push(Hopping {
                        create: g,
                        destroy: e,
                        amp: amp.conj(),
                    });
                }
            }
            // Detuning is diagonal in the lab frame.
            if spec.delta != 0.0 {
                for (k, &s) in basis.states().iter().enumerate() {
                    for o in s.occupations(sites) {
                        op.diagonal[k] +=
                            0.5 * spec.delta * (o.up as i32 as f64 - o.down as i32 as f64);
                    }
                }
            }
        }
    }
    Ok(op)
}

/// Diagonal trap operator `eta sum_j (j - j0)^2 (n_up + n_down)`; identical
/// in both frames.
pub fn build_trap_diagonal(eta_ext: f64, trap_center: f64, basis: &Arc<Basis>) -> SparseOperator {
    let mut op = SparseOperator::new(basis.clone());
    let sites = basis.sites();
    for (k, &s) in basis.states().iter().enumerate() {
        op.diagonal[k] = s
            .occupations(sites)
            .iter()
            .enumerate()
            .map(|(j, o)| trap_energy(eta_ext, trap_center, j + 1) * o.total() as f64)
            .sum();
    }
    op
}

/// Lab-frame preparation-pulse generator
/// `(O_P/2) sum_j (e^{i j pi + i phase} c†_{j,e} c_{j,g} + h.c.)`;
/// `phase = -pi/2` is the pulse used for state preparation and measurement
/// rotations.
pub fn build_pulse_generator(omega_p: f64, pulse_phase: f64, basis: &Arc<Basis>) -> SparseOperator {
    let mut op = SparseOperator::new(basis.clone());
    let phase = C64::from_polar(1.0, pulse_phase);
    for j in 1..=basis.sites() {
        let amp = 0.5 * omega_p * drive_sign(j) * phase;
        let e = mode_index(j, Spin::Up) as u8;
        let g = mode_index(j, Spin::Down) as u8;
        op.hoppings.push(Hopping {
            create: e,
            destroy: g,
            amp,
        });
        op.hoppings.push(Hopping {
            create: g,
            destroy: e,
            amp: amp.conj(),
        });
    }
    op
}

/// Direction for [`rotate_frame`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotateDirection {
    LabToRotated,
    RotatedToLab,
}

/// Applies the single-mode transformation between lab modes {g, e} and the
/// drive eigenmodes {down, up} to a many-body state vector.
///
/// `drift_phase` selects the drive eigenbasis at global drive phase
/// `lam` (the dressed basis co-moves with the drive); pass 0 for the
/// static basis. Norm is preserved.
pub fn rotate_frame(
    state: &[C64],
    basis: &Basis,
    direction: RotateDirection,
    drift_phase: f64,
) -> Vec<C64> {
    assert_eq!(state.len(), basis.dim());
    let mut cur = state.to_vec();
    let mut next = vec![C64::ZERO; basis.dim()];
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for j in 1..=basis.sites() {
        let s_j = drive_sign(j) * C64::from_polar(1.0, drift_phase);
        // Doublon amplitude factor: determinant of the two-mode map.
        let (doublon_factor, single): (C64, [[C64; 2]; 2]) = match direction {
            RotateDirection::LabToRotated => (
                -s_j,
                // (x_g, x_e) -> (y_down, y_up)
                [
                    [-s_j * inv_sqrt2, C64::new(inv_sqrt2, 0.0)],
                    [s_j * inv_sqrt2, C64::new(inv_sqrt2, 0.0)],
                ],
            ),
            RotateDirection::RotatedToLab => (
                -s_j.conj(),
                // (y_down, y_up) -> (x_g, x_e)
                [
                    [-s_j.conj() * inv_sqrt2, s_j.conj() * inv_sqrt2],
                    [C64::new(inv_sqrt2, 0.0), C64::new(inv_sqrt2, 0.0)],
                ],
            ),
        };
        let dn_bit = 1u64 << mode_index(j, Spin::Down);
        let up_bit = 1u64 << mode_index(j, Spin::Up);
        for (k, &s) in basis.states().iter().enumerate() {
            let has_dn = s.0 & dn_bit != 0;
            let has_up = s.0 & up_bit != 0;
            match (has_dn, has_up) {
                (false, false) => next[k] = cur[k],
                (true, true) => next[k] = doublon_factor * cur[k],
                (true, false) => {
                    // Handle the (down, up) pair once, from the down member.
                    let partner = basis
                        .index_of(crate::fock::FockState(s.0 ^ dn_bit ^ up_bit))
                        .expect("partner configuration in basis");
                    let lo = cur[k]; // down/g slot
                    let hi = cur[partner]; // up/e slot
                    next[k] = single[0][0] * lo + single[0][1] * hi;
                    next[partner] = single[1][0] * lo + single[1][1] * hi;
                }
                (false, true) => {} // written by the paired (true, false) case
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}
