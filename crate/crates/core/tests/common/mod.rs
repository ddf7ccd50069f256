//! Shared oracle helpers: an independent dense Jordan-Wigner construction
//! of fermionic operators on the full 2^(2L) space, plus sector projection.
//! Everything here deliberately avoids the crate's bit-twiddling paths so it
//! can serve as a brute-force cross-check.

use ghzforge_core::fock::{Basis, FockState};
use ghzforge_core::C64;
use nalgebra::DMatrix;

/// Dense annihilator c_m on the full occupation space of `n_modes` modes,
/// with the Jordan-Wigner string over lower modes. Basis index = bit field.
pub fn dense_annihilator(mode: usize, n_modes: usize) -> DMatrix<f64> {
    let dim = 1usize << n_modes;
    let mut m = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        if s >> mode & 1 == 1 {
            let target = s & !(1 << mode);
            let string = (s & ((1 << mode) - 1)).count_ones();
            let sign = if string % 2 == 0 { 1.0 } else { -1.0 };
            m[(target, s)] = sign;
        }
    }
    m
}

/// Dense c†_a c_b from the JW annihilators.
pub fn dense_bilinear(create: usize, destroy: usize, n_modes: usize) -> DMatrix<f64> {
    dense_annihilator(create, n_modes).transpose() * dense_annihilator(destroy, n_modes)
}

/// Restricts a full-space dense operator to the fixed-N sector of `basis`,
/// in the basis' state order.
pub fn project_to_sector(full: &DMatrix<f64>, basis: &Basis) -> DMatrix<f64> {
    let dim = basis.dim();
    let mut out = DMatrix::zeros(dim, dim);
    for (i, si) in basis.states().iter().enumerate() {
        for (j, sj) in basis.states().iter().enumerate() {
            out[(i, j)] = full[(si.0 as usize, sj.0 as usize)];
        }
    }
    out
}

/// Sector matrix of c†_a c_b built through the crate's own bit-level action.
pub fn bilinear_matrix_from_apply(create: usize, destroy: usize, basis: &Basis) -> DMatrix<f64> {
    let dim = basis.dim();
    let mut out = DMatrix::zeros(dim, dim);
    for (j, &s) in basis.states().iter().enumerate() {
        if let Some((img, sign)) = ghzforge_core::fock::apply_bilinear(s, create, destroy) {
            let i = basis.index_of(img).unwrap();
            out[(i, j)] = sign as f64;
        }
    }
    out
}

pub fn random_state(dim: usize, seed: u64) -> Vec<C64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= n);
    x
}

pub fn vec_distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Product state with amplitude 1 on one configuration.
pub fn basis_state(basis: &Basis, config: FockState) -> Vec<C64> {
    let mut x = vec![C64::new(0.0, 0.0); basis.dim()];
    x[basis.index_of(config).expect("config in basis")] = C64::new(1.0, 0.0);
    x
}
