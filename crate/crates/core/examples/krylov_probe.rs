use ghzforge_core::operators::build_hamiltonian;
use ghzforge_core::propagator::{evolve, EvolveOptions, Method};
use ghzforge_core::protocol::{build_generation_schedule, ProtocolParams};

fn main() {
    let params = ProtocolParams::standard(8);
    let basis = params.basis().unwrap();
    let sched = build_generation_schedule(&params).unwrap();
    let seg = &sched.segments[3];
    let h = build_hamiltonian(&params.hamiltonian_spec(seg.omega), &basis, 0.0).unwrap();
    h.assemble();
    let psi = params.initial_state(&basis).unwrap();
    let (lo, hi) = h.gershgorin_interval();
    println!("gershgorin interval: [{lo:.1}, {hi:.1}] span {:.1}", hi - lo);
    let kry = evolve(&h, &psi, seg.duration, &EvolveOptions::krylov()).unwrap();
    for tol in [1e-9f64, 1e-12] {
        let opts = EvolveOptions { method: Method::Chebyshev, tolerance: tol, ..Default::default() };
        let t0 = std::time::Instant::now();
        let out = evolve(&h, &psi, seg.duration, &opts).unwrap();
        let n: f64 = out.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let diff: f64 = out.iter().zip(&kry).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        println!("chebyshev tol={tol:.0e}: {:.2} s  norm drift {:.2e}  vs krylov {:.2e}", t0.elapsed().as_secs_f64(), (n - 1.0).abs(), diff);
    }
}
