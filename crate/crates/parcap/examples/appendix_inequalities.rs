//! The sharp-inequality oracles: constrained kernel maximum vs grid search,
//! the two-Gaussian singular integral vs its envelope, and the square-root
//! series bound.
//!
//!     cargo run --release --example appendix_inequalities

use parcap::appendix::{kernel_max, series_bound_ratio, sharp_integral_ratio};
use parcap::harness::run_appendix_sweep;

fn main() {
    // closed-form kernel maximum: both branches
    for (a, b, t, n) in [
        (4.0, 9.0, 1.0, 1usize),
        (1.0, 5.0, 1.0, 1),
        (8.0, 17.0, 0.5, 2),
    ] {
        let km = kernel_max(a, b, t, n).unwrap();
        println!(
            "kernel max a={a} b={b} t={t} N={n}: closed form {:.6e}, grid {:.6e}, \
             branch: {}",
            km.value,
            km.grid_value,
            if km.steep_branch {
                "sigma = t face"
            } else {
                "interior ridge"
            }
        );
    }

    // the singular integral stays below its envelope across scales
    println!("two-Gaussian integral, LHS/envelope:");
    for (a, b, abig, bbig) in [
        (0.5, 0.5, 2.0, 2.0),
        (2.0, 0.25, 1.0, 4.0),
        (3.0, 3.0, 8.0, 0.5),
    ] {
        let r = sharp_integral_ratio(a, b, abig, bbig, 1.0).unwrap();
        println!("  a={a} b={b} A={abig} B={bbig}: ratio = {r:.5}");
    }

    // series bound: the envelope n^{alpha - beta/2} e^{-delta n} is tight
    println!("series/envelope across n (alpha=1, beta=0, gamma=2, delta=1/4, l=2):");
    for n in [10usize, 20, 40, 80] {
        let r = series_bound_ratio(1.0, 0.0, 2.0, 0.25, 2, n).unwrap();
        println!("  n = {n}: ratio = {r:.5}");
    }

    // versioned sweeps, as used by the CLI and the verification suite
    for lemma in ["kernel", "integral", "series"] {
        let rep = run_appendix_sweep(lemma, "default").unwrap();
        println!(
            "sweep '{}': {} -> max ratio {:.4e}, pass = {}",
            lemma, rep.sweep, rep.max_ratio, rep.pass
        );
    }
}
