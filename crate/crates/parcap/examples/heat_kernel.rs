//! Heat kernel and heat/Green potentials: mass conservation, the exact
//! Gaussian convolution, and the Gaussian-decay envelope.
//!
//!     cargo run --release --example heat_kernel

use parcap::domain::{GridBox, GridFunction, ProblemParams, RadonMeasure};
use parcap::heatkernel::{heat_kernel, KernelEval};
use parcap::quad;

fn main() {
    let params = ProblemParams::new(1, 2.0).unwrap();
    let ev = KernelEval::new(params);

    // H(x, y, t) integrates to 1 in y
    let (mass, err) = quad::integrate(
        |y| heat_kernel(1, &[0.0], &[y], 1.0).unwrap(),
        -20.0,
        20.0,
        1e-13,
        1e-13,
    )
    .unwrap();
    println!("kernel mass over [-20, 20]: {mass:.12} (quadrature error {err:.1e})");

    // Dirac vs density potentials
    let dirac = RadonMeasure::dirac(vec![0.0], 1.0);
    println!(
        "H[delta_0](0.5, 0.2) = {:.8}",
        ev.heat_potential(&dirac, &[0.5], 0.2).unwrap()
    );

    // Gaussian data saturates the decay envelope exactly
    let (m, a) = (2.0, 1.5);
    let gauss = RadonMeasure::from_density(
        GridFunction::from_fn(GridBox::interval(-10.0, 10.0), 0.01, |y| {
            m * (-a * y[0] * y[0]).exp()
        })
        .unwrap(),
    );
    println!("Gaussian data M = {m}, a = {a}: potential vs envelope");
    for (x, t) in [(0.0, 0.1), (1.0, 0.5), (2.0, 1.0)] {
        let v = ev.heat_potential(&gauss, &[x], t).unwrap();
        let bound = ev.gaussian_decay_bound(m, a, 0.0, &[x], t).unwrap();
        println!(
            "  (x={x}, t={t}): H[eta] = {v:.8}, envelope = {bound:.8}, ratio = {:.10}",
            v / bound
        );
    }

    // Green potential of a constant forcing is t
    let mut slices = Vec::new();
    for k in 0..=10 {
        let mut g = GridFunction::from_fn(GridBox::interval(-12.0, 12.0), 0.05, |_| 1.0).unwrap();
        g.time = Some(0.05 * k as f64);
        slices.push(g);
    }
    println!(
        "G[1](0, 0.5) = {:.6} (exact 0.5)",
        ev.green_potential(&slices, &[0.0], 0.5).unwrap()
    );
}
