//! Quasi-additivity of capacity: the sum of piece capacities is comparable
//! to the capacity of a well-separated union, uniformly in the separation.
//!
//!     cargo run --release --example quasi_additivity

use parcap::capacity::quasi_additivity_ratio;
use parcap::domain::{ClosedSetSpec, ProblemParams};

fn main() {
    let params = ProblemParams::new(1, 4.0).unwrap();

    let single = quasi_additivity_ratio(&[ClosedSetSpec::interval(-0.5, 0.5)], &params).unwrap();
    println!("single piece: ratio = {single} (exactly 1)");

    println!("two unit intervals, growing separation:");
    for gap in [0.5, 1.0, 2.0, 4.0] {
        let pieces = [
            ClosedSetSpec::interval(-gap / 2.0 - 1.0, -gap / 2.0),
            ClosedSetSpec::interval(gap / 2.0, gap / 2.0 + 1.0),
        ];
        let ratio = quasi_additivity_ratio(&pieces, &params).unwrap();
        println!("  gap {gap}: sum of pieces / union = {ratio:.4}");
    }

    println!("three pieces:");
    let pieces = [
        ClosedSetSpec::interval(-4.0, -3.0),
        ClosedSetSpec::interval(-0.5, 0.5),
        ClosedSetSpec::interval(3.0, 4.0),
    ];
    let ratio = quasi_additivity_ratio(&pieces, &params).unwrap();
    println!(
        "  ratio = {ratio:.4} (subadditivity keeps it >= 1, quasi-additivity keeps it bounded)"
    );
}
