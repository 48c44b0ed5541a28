//! Small-time behaviour of the maximal solution at a point, read off the
//! rescaled capacities g(tau) = C(((F - x)/tau) cap B_1): convergence of
//! g means strong blow-up with rate t^{-1/(q-1)}, decay of tau^{-2/(q-1)} g
//! means boundedness.
//!
//!     cargo run --release --example blowup_classifier

use parcap::capacity::CapacityBackend;
use parcap::domain::{ClosedSetSpec, ProblemParams};
use parcap::potential::blowup_classifier;

fn main() {
    let params = ProblemParams::new(1, 4.0).unwrap();
    let cap = CapacityBackend::new(params);
    let interval = ClosedSetSpec::interval(0.0, 1.0);
    let taus: Vec<f64> = (0..6).map(|k| 0.2 / 2f64.powi(k)).collect();

    for (label, x) in [
        ("interior (x = 0.5)", 0.5),
        ("endpoint (x = 0.0)", 0.0),
        ("outside (x = -0.5)", -0.5),
    ] {
        let rep = blowup_classifier(&interval, &[x], &params, &taus, &cap).unwrap();
        println!("{label}: {:?}", rep.class);
        for (tau, g) in &rep.samples {
            println!("   g({tau:.5}) = {g:.6}");
        }
    }
    println!(
        "interior gamma approaches the unit-ball capacity {:.6}",
        cap.unit_ball_capacity().unwrap()
    );

    // a Cantor set mixes scales: the classifier reports the sampled trend
    let cantor = ClosedSetSpec::CantorSet {
        interval: [0.0, 1.0],
        ratio: 1.0 / 3.0,
        depth: 4,
    };
    let rep = blowup_classifier(&cantor, &[0.0], &params, &taus, &cap).unwrap();
    println!("Cantor endpoint: {:?}", rep.class);
    println!("({})", rep.policy);
}
