//! Solver basics: the flat maximal solution ((q-1) t)^{-1/(q-1)} reached
//! from huge constant data, and the mass budget (absorbed q-mass plus final
//! mass equals the initial mass).
//!
//!     cargo run --release --example flat_and_mass

use parcap::domain::{GridBox, GridFunction, ProblemParams};
use parcap::pde::{
    constant_data, flat_bound, mass_identity_residual, sample_linear, solve_cauchy, SolverConfig,
};

fn main() {
    // flat data c = 1e8 forgets its amplitude at the universal rate
    for q in [2.0, 4.0] {
        let params = ProblemParams::new(1, q).unwrap();
        let mut cfg = SolverConfig::line(params, 8.0, 0.1, 1.0);
        cfg.dt = 1e-6;
        let u0 = constant_data(1e8, &cfg).unwrap();
        let times = [0.1, 0.5, 1.0];
        let run = solve_cauchy(&u0, &cfg, &times, None).unwrap();
        println!("q = {q}:");
        for (snap, &t) in run.snapshots.iter().zip(&times) {
            let got = sample_linear(snap, 0.0);
            let want = flat_bound(&params, t);
            println!(
                "  t = {t}: u(0) = {got:.8}, ((q-1)t)^(-1/(q-1)) = {want:.8}, rel err {:.1e}",
                (got - want).abs() / want
            );
        }
    }

    // mass identity for Gaussian data
    let params = ProblemParams::new(1, 2.0).unwrap();
    let cfg = SolverConfig::line(params, 6.0, 0.02, 0.5);
    let u0 = GridFunction::from_fn(GridBox::interval(-6.0, 6.0), cfg.h, |x| {
        (-x[0] * x[0]).exp()
    })
    .unwrap();
    let run = solve_cauchy(&u0, &cfg, &[0.5], None).unwrap();
    let (lhs, rhs, rel) = mass_identity_residual(&run, 0.05);
    println!(
        "mass identity on [0.05, 0.5]: absorbed + final = {lhs:.6} vs mass(s) = {rhs:.6} \
         (rel {rel:.1e})"
    );
}
