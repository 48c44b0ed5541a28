//! Variational Bessel capacities of balls and the scaling law
//! C(lambda K) = lambda^{N - 2/(q-1)} C(K).
//!
//!     cargo run --release --example capacity_scaling

use parcap::capacity::{capacity_closed_form, capacity_numeric, CapacityProblem};
use parcap::domain::{ClosedSetSpec, ProblemParams};

fn main() {
    let params = ProblemParams::new(1, 4.0).unwrap();
    println!(
        "N = {}, q = {}, scaling exponent N - 2/(q-1) = {:.4}",
        params.n,
        params.q,
        params.scaling_exponent()
    );

    let mut previous: Option<f64> = None;
    for r in [0.5, 1.0, 2.0, 4.0] {
        let ball = ClosedSetSpec::Ball {
            center: vec![0.0],
            radius: r,
        };
        let prob = CapacityProblem::new(params, ball).unwrap();
        let est = capacity_numeric(&prob).unwrap();
        let ratio = previous.map(|p| est.value / p).unwrap_or(f64::NAN);
        println!(
            "  C(B_{r}) = {:.6}  bracket [{:.6}, {:.6}]  ratio to previous {ratio:.5}",
            est.value, est.bracket_lo, est.bracket_hi
        );
        previous = Some(est.value);
    }
    println!(
        "doubling ratio should approach 2^(1/3) = {:.5}",
        2.0_f64.powf(params.scaling_exponent())
    );

    // the calibrated closed form (PARCAP_CACHE controls the sidecar path)
    let ball = ClosedSetSpec::Ball {
        center: vec![0.3],
        radius: 1.7,
    };
    let est = capacity_closed_form(&ball, &params).unwrap();
    println!(
        "closed form (calibrated scaling) for radius 1.7: {:.6} [{:?}]",
        est.value, est.method
    );

    // singletons are capacity-null in the supercritical range
    let p = capacity_closed_form(&ClosedSetSpec::point1(0.0), &params).unwrap();
    println!("closed form for a point with q >= q_c: {}", p.value);
}
