//! Dual side of the capacity minimization: the KKT multiplier measure,
//! whose total mass equals the capacity and whose profile concentrates at
//! the set boundary.
//!
//!     cargo run --release --example capacitary_measure

use parcap::capacity::{capacitary_measure, capacity_numeric, CapacityProblem};
use parcap::domain::{ClosedSetSpec, ProblemParams};
use parcap::harness::write_csv;
use std::path::Path;

fn main() {
    let params = ProblemParams::new(1, 4.0).unwrap();
    let prob = CapacityProblem::new(params, ClosedSetSpec::interval(-1.0, 1.0)).unwrap();
    let est = capacity_numeric(&prob).unwrap();
    let nu = capacitary_measure(&prob).unwrap();

    println!("capacity of [-1, 1]: {:.6}", est.value);
    println!(
        "capacitary measure: {} atoms, total mass {:.6}, mass/capacity = {:.4}",
        nu.atoms.len(),
        nu.total_mass(),
        nu.total_mass() / est.value
    );

    let left: f64 = nu
        .atoms
        .iter()
        .filter(|a| a.location[0] < 0.0)
        .map(|a| a.mass)
        .sum();
    println!(
        "reflection symmetry: left mass {:.6} vs right mass {:.6}",
        left,
        nu.total_mass() - left
    );

    let rows: Vec<Vec<f64>> = nu
        .atoms
        .iter()
        .map(|a| vec![a.location[0], a.mass])
        .collect();
    let out = Path::new("parcap-out");
    std::fs::create_dir_all(out).unwrap();
    write_csv(&out.join("capacitary_measure.csv"), &["x", "mass"], &rows).unwrap();
    println!("density written to parcap-out/capacitary_measure.csv");
}
