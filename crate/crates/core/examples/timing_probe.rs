use ghzforge_core::analysis::{generate_ghz, GhzTarget};
use ghzforge_core::propagator::EvolveOptions;
use ghzforge_core::protocol::ProtocolParams;

fn main() {
    let params = ProtocolParams {
        sites: 8,
        interaction: 405.0,
        eta_ext: 21.0,
        trap_center: 11.0,
        holes: vec![],
        hole_correction: false,
    };
    let t0 = std::time::Instant::now();
    let (_state, fid, sched) = generate_ghz(&params, &EvolveOptions::default()).unwrap();
    println!(
        "L=8 generation: fidelity {:.6}, {} segments, {:.1} s",
        fid,
        sched.segments.len(),
        t0.elapsed().as_secs_f64()
    );
    let _ = GhzTarget::new(8);
}
