use ghzforge_core::fock::Basis;
use ghzforge_core::operators::{build_hamiltonian, Frame, HamiltonianSpec};
use ghzforge_core::propagator::{evolve, EvolveOptions, Method};
use ghzforge_core::C64;
use rand::{Rng, SeedableRng};
use std::sync::Arc;

fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let basis = Arc::new(Basis::new(6, 6).unwrap());
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
    println!("{spec:?}");
    let h = build_hamiltonian(&spec, &basis, 0.0).unwrap();
    let mut psi: Vec<C64> = {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(1000);
        (0..basis.dim()).map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect()
    };
    let n: f64 = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|v| *v /= n);
    let t = 0.6;
    let dense = evolve(&h, &psi, t, &EvolveOptions::dense()).unwrap();
    let kry = evolve(&h, &psi, t, &EvolveOptions::krylov()).unwrap();
    let kry_tight = evolve(&h, &psi, t, &EvolveOptions { method: Method::Krylov, tolerance: 1e-12, krylov_dim: 60, ..Default::default() }).unwrap();
    let cheb = evolve(&h, &psi, t, &EvolveOptions::default()).unwrap();
    println!("dense-kry  {:.3e}", dist(&dense, &kry));
    println!("dense-cheb {:.3e}", dist(&dense, &cheb));
    println!("kry-cheb   {:.3e}", dist(&kry, &cheb));
    println!("krytight-cheb {:.3e}", dist(&kry_tight, &cheb));
    println!("krytight-kry  {:.3e}", dist(&kry_tight, &kry));
    // eigendecomposition residual check
    let dm = h.to_dense();
    let eig = dm.clone().symmetric_eigen();
    let recon = &eig.eigenvectors * nalgebra::DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::new(e, 0.0))) * eig.eigenvectors.adjoint();
    println!("eigen residual ||H - V L V'|| = {:.3e}, ||H|| = {:.3e}", (&dm - &recon).norm(), dm.norm());
}
