//! Shooting solver for the self-similar profile equation
//! f'' + ((N-1)/y + y/2) f' + f/(q-1) - f^q = 0, f'(0) = 0, with the fast
//! decay y^{2/(q-1)} f -> 0. Prints the found f(0), verifies the tail
//! shape, and writes the profile CSV.
//!
//!     cargo run --release --example very_singular_profile

use parcap::domain::ProblemParams;
use parcap::harness::write_csv;
use parcap::pde::{very_singular_profile, ProfileKind};
use std::path::Path;

fn main() {
    for q in [1.5, 2.0, 2.5] {
        let params = ProblemParams::new(1, q).unwrap();
        let prof = very_singular_profile(&params, ProfileKind::RadialVss).unwrap();
        let pow = 2.0 / (q - 1.0);
        println!(
            "q = {q}: f(0) = {:.8}, support to y = {:.1}, y^{{2/(q-1)}} f at the edge = {:.2e}",
            prof.f_origin,
            prof.ys.last().unwrap(),
            prof.ys.last().unwrap().powf(pow) * prof.fs.last().unwrap()
        );
    }

    // tail: log f + y^2/4 - ((3-q)/(q-1)) log y flattens to a constant
    let params = ProblemParams::new(1, 2.0).unwrap();
    let prof = very_singular_profile(&params, ProfileKind::HalfLine).unwrap();
    println!("half-line profile tail shape (should flatten):");
    for y in [3.0, 4.0, 5.0, 6.0] {
        let f = prof.eval(y);
        let shape = f.ln() + y * y / 4.0 - (3.0 - 2.0) / (2.0 - 1.0) * y.ln();
        println!("  y = {y}: log f + y^2/4 - log y = {shape:.4}");
    }

    let rows: Vec<Vec<f64>> = prof
        .ys
        .iter()
        .zip(&prof.fs)
        .map(|(y, f)| vec![*y, *f])
        .collect();
    let out = Path::new("parcap-out");
    std::fs::create_dir_all(out).unwrap();
    write_csv(&out.join("profile_q2.csv"), &["y", "f"], &rows).unwrap();
    println!("profile written to parcap-out/profile_q2.csv");

    // supercritical exponents have no such profile
    let supercritical = ProblemParams::new(1, 4.0).unwrap();
    println!(
        "q = 4 (supercritical): {:?}",
        very_singular_profile(&supercritical, ProfileKind::RadialVss).unwrap_err()
    );
}
