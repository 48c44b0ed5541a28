//! parcap — numerical toolkit for parabolic Bessel capacities, capacitary
//! potentials and maximal solutions of the semilinear heat equation with
//! absorption, `u_t - Δu + u^q = 0`.
//!
//! The crate is organized around the objects it computes:
//!
//! - [`domain`]: exponents, closed-set geometry, grids and measures;
//! - [`quad`]: adaptive Gauss–Kronrod quadrature;
//! - [`heatkernel`]: heat/Green potentials and Gaussian-decay envelopes;
//! - [`capacity`]: variational Bessel capacities `C_{2/q,q'}`, dual
//!   capacitary measures, quasi-additivity;
//! - [`potential`]: the capacitary potential of a closed set in series and
//!   integral form, parabolic slicing and blow-up classification;
//! - [`pde`]: order-preserving semi-implicit solver, maximal solutions,
//!   sigma-moderate envelopes and very singular self-similar profiles;
//! - [`appendix`]: sharp-inequality oracles (kernel maxima, singular
//!   integrals, series bounds, Wiener-sum consistency);
//! - [`harness`]: experiment configs, reports, golden-file comparison and
//!   the CLI entry point;
//! - [`verify`]: the end-to-end verification checks behind the acceptance
//!   test target and `parcap verify`.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod appendix;
pub mod capacity;
pub mod domain;
pub mod error;
pub mod harness;
pub mod heatkernel;
pub mod pde;
pub mod potential;
pub mod quad;
pub mod verify;

pub use error::{Error, Result};
