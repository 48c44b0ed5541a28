//! Two-sided comparison of the maximal solution with the capacitary
//! potential: the ratio u_F / W_F stays within a bounded envelope across
//! the probe grid. Coarse, quick version of the full stability check.
//!
//!     cargo run --release --example sandwich

use parcap::capacity::CapacityBackend;
use parcap::domain::{ClosedSetSpec, ProblemParams};
use parcap::harness::write_csv;
use parcap::pde::{bilateral_check, SolverConfig, TimeRamp};
use std::path::Path;

fn main() {
    let params = ProblemParams::new(1, 4.0).unwrap();
    let interval = ClosedSetSpec::interval(-1.0, 1.0);
    let cap = CapacityBackend::new(params);
    let mut cfg = SolverConfig::line(params, 3.0, 0.02, 0.2);
    cfg.ramp = Some(TimeRamp {
        dt0: 1e-8,
        factor: 1.002,
    });
    let rows = bilateral_check(
        &interval,
        &cfg,
        &cap,
        &[1e2, 1e4, 1e6, 1e8],
        &[0.1, 0.05],
        &[0.0, 0.5, 1.0, 1.5, 2.0],
        &[0.05, 0.1, 0.2],
    )
    .unwrap();

    println!("x     t     u (maximal)  W (series)  ratio");
    let mut table = Vec::new();
    let mut rmin = f64::INFINITY;
    let mut rmax = 0.0_f64;
    for r in &rows {
        println!(
            "{:<5} {:<5} {:<12.5} {:<11.5} {:.4}",
            r.x, r.t, r.u, r.w, r.ratio
        );
        rmin = rmin.min(r.ratio);
        rmax = rmax.max(r.ratio);
        table.push(vec![r.x, r.t, r.u, r.w, r.ratio]);
    }
    println!(
        "ratio range [{rmin:.4}, {rmax:.4}]: finite and positive on every probe, the \
         constants of the two-sided estimate"
    );
    let out = Path::new("parcap-out");
    std::fs::create_dir_all(out).unwrap();
    write_csv(
        &out.join("sandwich.csv"),
        &["x", "t", "u", "w_series", "ratio"],
        &table,
    )
    .unwrap();
    println!("wrote parcap-out/sandwich.csv");
}
