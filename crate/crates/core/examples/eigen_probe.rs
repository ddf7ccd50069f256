use ghzforge_core::operators::build_hamiltonian;
use ghzforge_core::propagator::{DensePropagator, EvolveOptions};
use ghzforge_core::protocol::ProtocolParams;

fn main() {
    for l in [5usize, 6] {
        let params = ProtocolParams::standard(l);
        let basis = params.basis().unwrap();
        let h = build_hamiltonian(&params.hamiltonian_spec(150.0), &basis, 0.0).unwrap();
        let t0 = std::time::Instant::now();
        let _p = DensePropagator::new(&h, EvolveOptions::default().dense_limit).unwrap();
        println!("dense eigen dim {}: {:.2} s", basis.dim(), t0.elapsed().as_secs_f64());
    }
}
