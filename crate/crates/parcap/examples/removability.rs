//! Removability of point singularities in the supercritical range: the
//! capacitary potential of a singleton vanishes identically, and the
//! maximal solution of shrinking neighborhoods decays at the capacity rate
//! eps^{N - 2/(q-1)}.
//!
//!     cargo run --release --example removability

use parcap::capacity::CapacityBackend;
use parcap::domain::{ClosedSetSpec, ProblemParams};
use parcap::pde::{maximal_solution, sample_linear, SolverConfig, TimeRamp};
use parcap::potential::series_potential;

fn main() {
    let params = ProblemParams::new(1, 4.0).unwrap();
    println!(
        "N = 1, q = 4 > q_c = {}: singletons are capacity-null",
        params.q_c
    );

    let point = ClosedSetSpec::point1(0.0);
    let cap = CapacityBackend::new(params);
    let w = series_potential(&point, &[0.0], 0.1, &params, &cap).unwrap();
    println!("W_series of the point: {w} (identically zero)");

    let t_probe = 0.1;
    let mut cfg = SolverConfig::line(params, 1.5, 0.003125, t_probe);
    cfg.ramp = Some(TimeRamp {
        dt0: 1e-8,
        factor: 1.002,
    });
    let eps_list = [0.1, 0.05, 0.025, 0.0125];
    let m = maximal_solution(&point, &cfg, &[1e2, 1e4, 1e6, 1e8], &eps_list, &[t_probe]).unwrap();
    println!("maximal solution of the eps-neighborhood at (0, {t_probe}):");
    let expo = params.scaling_exponent();
    for (run, snaps) in m.report.iter().zip(&m.per_eps) {
        let u = sample_linear(&snaps[0], 0.0);
        println!(
            "  eps = {:<7}: u = {u:.4}   u / eps^(N-2/(q-1)) = {:.4}",
            run.eps,
            u / run.eps.powf(expo)
        );
    }
    println!(
        "the compensated column is flat: u ~ C eps^({expo:.4}), vanishing in the limit \
         exactly as the capacity of B_eps does"
    );
}
