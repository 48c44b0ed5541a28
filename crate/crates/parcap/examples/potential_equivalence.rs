//! Series vs integral form of the capacitary potential over a probe grid,
//! with the Gaussian tail control. Emits CSV and an SVG ratio plot.
//!
//!     cargo run --release --example potential_equivalence

use parcap::capacity::CapacityBackend;
use parcap::domain::{ClosedSetSpec, ProblemParams};
use parcap::harness::{write_csv, write_svg_lines};
use parcap::potential::equivalence_report;
use std::path::Path;

fn main() {
    let params = ProblemParams::new(1, 4.0).unwrap();
    let cap = CapacityBackend::new(params);
    let set = ClosedSetSpec::interval(-1.0, 1.0);
    let xs = [0.0, 0.5, 1.0, 1.5, 2.0];
    let ts = [0.05, 0.1, 0.2];

    let rows = equivalence_report(&set, &xs, &ts, &params, &cap).unwrap();
    println!("x     t     W_series    W_integral  ratio   tail/envelope");
    for r in &rows {
        println!(
            "{:<5} {:<5} {:<11.5} {:<11.5} {:<7.4} {:.3e}",
            r.x,
            r.t,
            r.w_series,
            r.w_integral,
            r.ratio,
            if r.tail_envelope > 0.0 {
                r.tail / r.tail_envelope
            } else {
                f64::NAN
            }
        );
    }
    let rmin = rows.iter().map(|r| r.ratio).fold(f64::MAX, f64::min);
    let rmax = rows.iter().map(|r| r.ratio).fold(f64::MIN, f64::max);
    println!("ratio range [{rmin:.4}, {rmax:.4}] — bounded both ways, constants absorbed");

    let out = Path::new("parcap-out");
    std::fs::create_dir_all(out).unwrap();
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            vec![
                r.x,
                r.t,
                r.w_series,
                r.w_integral,
                r.ratio,
                r.tail,
                r.tail_envelope,
            ]
        })
        .collect();
    write_csv(
        &out.join("equivalence.csv"),
        &[
            "x",
            "t",
            "w_series",
            "w_integral",
            "ratio",
            "tail",
            "tail_envelope",
        ],
        &table,
    )
    .unwrap();
    let per_t: Vec<(String, Vec<(f64, f64)>)> = ts
        .iter()
        .map(|&t| {
            (
                format!("t = {t}"),
                rows.iter()
                    .filter(|r| r.t == t)
                    .map(|r| (r.x, r.ratio))
                    .collect(),
            )
        })
        .collect();
    let series: Vec<(&str, Vec<(f64, f64)>)> = per_t
        .iter()
        .map(|(label, pts)| (label.as_str(), pts.clone()))
        .collect();
    write_svg_lines(
        &out.join("equivalence_ratio.svg"),
        "integral/series ratio",
        &series,
    )
    .unwrap();
    println!("wrote parcap-out/equivalence.csv and equivalence_ratio.svg");
}
