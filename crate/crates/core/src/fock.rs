//! Fermionic Fock space of a 1D chain with two internal states per site.
//!
//! Each of the `L` sites carries two fermionic modes. Modes are flattened
//! site-major with the spin-down (lab: g) mode first:
//!
//! ```text
//! mode(site, spin) = 2 * (site - 1) + spin,   site = 1..=L
//! ```
//!
//! A many-body configuration is a bit field over these `2L` modes, and the
//! canonical state for a bit field is the product of creation operators in
//! ascending mode order applied to the vacuum. All fermionic signs follow
//! from this ordering and never change after a basis is built.
//!
//! The same combinatorial basis serves both the lab frame `{g, e}` and the
//! drive-eigenstate (rotated) frame `{down, up}`; the frame is metadata on
//! operators and states, not on the basis.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Internal state of a mode. In the rotated frame read `Down`/`Up`; in the
/// lab frame the same slots hold `g`/`e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Down = 0,
    Up = 1,
}

impl Spin {
    pub const fn bit(self) -> usize {
        self as usize
    }
}

/// Flattened index of the (site, spin) mode; sites are 1-based.
pub fn mode_index(site: usize, spin: Spin) -> usize {
    debug_assert!(site >= 1);
    2 * (site - 1) + spin.bit()
}

/// Inverse of [`mode_index`].
pub fn mode_site_spin(mode: usize) -> (usize, Spin) {
    let spin = if mode & 1 == 0 { Spin::Down } else { Spin::Up };
    (mode / 2 + 1, spin)
}

/// Bit-encoded occupation-number state over `2L` modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FockState(pub u64);

impl FockState {
    pub const VACUUM: FockState = FockState(0);

    pub fn occupied(self, mode: usize) -> bool {
        self.0 >> mode & 1 == 1
    }

    pub fn particle_count(self) -> u32 {
        self.0.count_ones()
    }

    /// Builds `c†_{m1} c†_{m2} ... c†_{mk} |vac>` for the listed
    /// `(site, spin)` modes and returns the canonical bit field together with
    /// the sign relating the two (`ops-ordered = sign * canonical`).
    /// Returns `None` if any mode repeats (Pauli exclusion).
    pub fn from_creation_ops(ops: &[(usize, Spin)]) -> Option<(FockState, i8)> {
        let mut bits = 0u64;
        let mut sign = 1i8;
        // Rightmost operator acts on the vacuum first.
        for &(site, spin) in ops.iter().rev() {
            let m = mode_index(site, spin);
            if bits >> m & 1 == 1 {
                return None;
            }
            if (bits & ((1u64 << m) - 1)).count_ones() % 2 == 1 {
                sign = -sign;
            }
            bits |= 1 << m;
        }
        Some((FockState(bits), sign))
    }

    /// Per-site occupation report.
    pub fn occupations(self, sites: usize) -> Vec<SiteOccupation> {
        (1..=sites)
            .map(|j| SiteOccupation {
                down: self.occupied(mode_index(j, Spin::Down)),
                up: self.occupied(mode_index(j, Spin::Up)),
            })
            .collect()
    }

    /// Number of doubly occupied sites among `window` (1-based site labels).
    pub fn doublons_in(self, window: impl IntoIterator<Item = usize>) -> usize {
        window
            .into_iter()
            .filter(|&j| {
                self.occupied(mode_index(j, Spin::Down)) && self.occupied(mode_index(j, Spin::Up))
            })
            .count()
    }
}

/// Occupation of one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteOccupation {
    pub down: bool,
    pub up: bool,
}

impl SiteOccupation {
    pub fn is_doublon(self) -> bool {
        self.down && self.up
    }

    pub fn total(self) -> u32 {
        self.down as u32 + self.up as u32
    }
}

/// Applies `c†_create c_destroy` to a canonical basis state.
///
/// Returns the image state and the fermionic sign accumulated from the
/// occupied modes crossed under the canonical ordering, or `None` when the
/// action annihilates the state (empty source or Pauli-blocked target).
/// `create == destroy` is the number operator and returns the state with
/// sign `+1` when occupied.
pub fn apply_bilinear(state: FockState, create: usize, destroy: usize) -> Option<(FockState, i8)> {
    let bits = state.0;
    if bits >> destroy & 1 == 0 {
        return None;
    }
    let mut sign = (bits & ((1u64 << destroy) - 1)).count_ones();
    let cleared = bits & !(1u64 << destroy);
    if cleared >> create & 1 == 1 {
        return None;
    }
    sign += (cleared & ((1u64 << create) - 1)).count_ones();
    let out = cleared | (1u64 << create);
    Some((FockState(out), if sign % 2 == 0 { 1 } else { -1 }))
}

/// Binomial coefficient as u64 (exact; panics on overflow).
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial overflow")
}

/// Complete fixed-particle-number basis: all `C(2L, N)` configurations of
/// `N` fermions in `2L` modes, sorted by bit-field value.
///
/// Immutable after construction; shareable across threads.
#[derive(Debug, Clone)]
pub struct Basis {
    sites: usize,
    particles: usize,
    states: Vec<FockState>,
}

impl Basis {
    /// Enumerates the fixed-N sector. Errors when `L < 1`, `L > 30` or
    /// `N > 2L`.
    pub fn new(sites: usize, particles: usize) -> Result<Basis> {
        if sites < 1 || sites > 30 {
            return Err(Error::InvalidParameter(format!(
                "site count must be in [1, 30], got {sites}"
            )));
        }
        if particles > 2 * sites {
            return Err(Error::InvalidParameter(format!(
                "cannot place {particles} fermions in {} modes",
                2 * sites
            )));
        }
        let modes = 2 * sites;
        let dim = binomial(modes as u64, particles as u64) as usize;
        let mut states = Vec::with_capacity(dim);
        if particles == 0 {
            states.push(FockState(0));
        } else {
            // Gosper's hack enumerates fixed-popcount words in ascending order.
            let mut v: u64 = (1 << particles) - 1;
            let limit: u64 = if modes == 64 { u64::MAX } else { (1 << modes) - 1 };
            loop {
                states.push(FockState(v));
                if particles == modes as usize {
                    break;
                }
                let t = v | (v - 1);
                let next = (t + 1) | (((!t & t.wrapping_add(1)) - 1) >> (v.trailing_zeros() + 1));
                if next > limit {
                    break;
                }
                v = next;
            }
        }
        debug_assert_eq!(states.len(), dim);
        Ok(Basis {
            sites,
            particles,
            states,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> FockState {
        self.states[index]
    }

    /// Dense index of a configuration (binary search over the sorted list).
    pub fn index_of(&self, state: FockState) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_flattening_is_a_bijection() {
        let l = 5;
        let mut seen = vec![false; 2 * l];
        for site in 1..=l {
            for spin in [Spin::Down, Spin::Up] {
                let m = mode_index(site, spin);
                assert!(!seen[m]);
                seen[m] = true;
                assert_eq!(mode_site_spin(m), (site, spin));
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn basis_sizes_match_binomials() {
        // L=1, N=2: the single doublon.
        let b = Basis::new(1, 2).unwrap();
        assert_eq!(b.dim(), 1);
        assert_eq!(b.state(0), FockState(0b11));
        // L=2, N=2: C(4,2) = 6.
        assert_eq!(Basis::new(2, 2).unwrap().dim(), 6);
        // All sectors up to L=6.
        for l in 1..=6 {
            for n in 0..=2 * l {
                let b = Basis::new(l, n).unwrap();
                assert_eq!(b.dim() as u64, binomial(2 * l as u64, n as u64));
                // Exhaustive recount oracle.
                let brute = (0u64..1 << (2 * l))
                    .filter(|v| v.count_ones() as usize == n)
                    .count();
                assert_eq!(b.dim(), brute);
            }
        }
    }

    #[test]
    fn large_half_filled_basis() {
        let b = Basis::new(8, 8).unwrap();
        assert_eq!(b.dim(), 12870);
    }

    #[test]
    fn lookup_inverts_enumeration() {
        let b = Basis::new(4, 3).unwrap();
        for k in 0..b.dim() {
            assert_eq!(b.index_of(b.state(k)), Some(k));
        }
        assert_eq!(b.index_of(FockState(0)), None);
    }

    #[test]
    fn invalid_basis_parameters_rejected() {
        assert!(Basis::new(0, 0).is_err());
        assert!(Basis::new(2, 5).is_err());
        assert!(Basis::new(31, 1).is_err());
    }

    #[test]
    fn number_operator_and_pauli_blocking() {
        let s = FockState(0b101);
        // Number operator on an occupied mode: same state, sign +1.
        assert_eq!(apply_bilinear(s, 0, 0), Some((s, 1)));
        // Number operator on an empty mode annihilates.
        assert_eq!(apply_bilinear(s, 1, 1), None);
        // Hop onto an occupied mode is Pauli-blocked.
        assert_eq!(apply_bilinear(s, 2, 0), None);
    }

    #[test]
    fn hop_sign_counts_crossed_modes() {
        // |110> in mode order (modes 0,1 occupied), hop 0 -> 2 crosses the
        // occupied mode 1: c†_2 c_0 a†_0 a†_1 |vac> = -a†_1 a†_2 |vac>.
        let (s, sign) = apply_bilinear(FockState(0b011), 2, 0).unwrap();
        assert_eq!(s, FockState(0b110));
        assert_eq!(sign, -1);
    }

    #[test]
    fn creation_op_ordering_signs() {
        // Ascending mode order is canonical: sign +1.
        let (s, sign) = FockState::from_creation_ops(&[(1, Spin::Down), (1, Spin::Up)]).unwrap();
        assert_eq!(s, FockState(0b11));
        assert_eq!(sign, 1);
        // One transposition flips the sign.
        let (s2, sign2) = FockState::from_creation_ops(&[(1, Spin::Up), (1, Spin::Down)]).unwrap();
        assert_eq!(s2, s);
        assert_eq!(sign2, -1);
        // Repeated mode is excluded.
        assert!(FockState::from_creation_ops(&[(1, Spin::Up), (1, Spin::Up)]).is_none());
    }

    #[test]
    fn occupation_report_matches_bit_scan() {
        // |0, d> on L=2: site 1 empty, site 2 doubly occupied.
        let (s, _) = FockState::from_creation_ops(&[(2, Spin::Down), (2, Spin::Up)]).unwrap();
        let occ = s.occupations(2);
        assert_eq!(occ[0].total(), 0);
        assert!(occ[1].is_doublon());
        assert_eq!(s.doublons_in(1..=2), 1);
        assert_eq!(s.doublons_in([1]), 0);
    }

    #[test]
    fn random_occupations_match_bitwise_recount() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let basis = Basis::new(4, 4).unwrap();
        for _ in 0..50 {
            let s = basis.state(rng.gen_range(0..basis.dim()));
            let occ = s.occupations(4);
            for j in 1..=4usize {
                assert_eq!(occ[j - 1].down, s.0 >> (2 * (j - 1)) & 1 == 1);
                assert_eq!(occ[j - 1].up, s.0 >> (2 * (j - 1) + 1) & 1 == 1);
            }
            assert_eq!(
                occ.iter().map(|o| o.total()).sum::<u32>(),
                s.particle_count()
            );
        }
    }

    #[test]
    fn hop_round_trip_restores_state_with_positive_sign() {
        // (A†B)(B†A) on a state with B occupied, A empty returns the state
        // with sign +1 for every basis state and mode pair.
        let basis = Basis::new(3, 3).unwrap();
        for &s in basis.states() {
            for a in 0..6 {
                for b in 0..6 {
                    if a == b || !s.occupied(b) || s.occupied(a) {
                        continue;
                    }
                    let (mid, s1) = apply_bilinear(s, a, b).unwrap();
                    let (back, s2) = apply_bilinear(mid, b, a).unwrap();
                    assert_eq!(back, s);
                    assert_eq!(s1 * s2, 1);
                }
            }
        }
    }
}
