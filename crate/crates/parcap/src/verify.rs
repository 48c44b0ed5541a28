//! The verification suite behind the `acceptance` test target and the
//! `parcap verify` subcommand: each check runs one end-to-end property at
//! pinned tolerances and reports a pass/fail outcome with measured values.

use std::time::Instant;

use crate::appendix::{kernel_max, sharp_integral_lhs, sharp_integral_ratio};
use crate::capacity::{capacitary_measure, capacity_numeric, CapacityBackend, CapacityProblem};
use crate::domain::{ClosedSetSpec, GridBox, GridFunction, ProblemParams};
use crate::error::Result;
use crate::harness::default_integral_sweep;
use crate::heatkernel::{spherical_integral, spherical_integral_scaled, spherical_recursion};
use crate::pde::{
    bilateral_check, constant_data, flat_bound, mass_identity_residual, maximal_solution,
    sample_linear, sigma_moderate_sup, solve_cauchy, subcritical_point_check, PointCheckOptions,
    SolverConfig, TimeRamp,
};
use crate::potential::{equivalence_report, series_potential};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Self { name, pass, detail }
    }
}

/// All checks in suite order, with their stable names.
pub const CHECK_NAMES: [&str; 12] = [
    "flat-solution",
    "mass-identity",
    "very-singular-profile",
    "removability",
    "sandwich-stability",
    "series-integral-equivalence",
    "capacity-scaling",
    "capacitary-duality",
    "spherical-integrals",
    "sharp-integral-sweep",
    "kernel-max-oracle",
    "sigma-moderate-envelope",
];

pub fn run_check(name: &str) -> Result<CheckOutcome> {
    match name {
        "flat-solution" => flat_solution(),
        "mass-identity" => mass_identity(),
        "very-singular-profile" => very_singular(),
        "removability" => removability(),
        "sandwich-stability" => sandwich_stability(),
        "series-integral-equivalence" => series_integral_equivalence(),
        "capacity-scaling" => capacity_scaling(),
        "capacitary-duality" => capacitary_duality(),
        "spherical-integrals" => spherical_integrals(),
        "sharp-integral-sweep" => sharp_integral_sweep(),
        "kernel-max-oracle" => kernel_max_oracle(),
        "sigma-moderate-envelope" => sigma_moderate_envelope(),
        other => Err(crate::error::Error::Config(format!(
            "unknown check '{other}'; known: {CHECK_NAMES:?}"
        ))),
    }
}

/// Huge constant data saturates the universal bound ((q-1) t)^{-1/(q-1)}
/// to 1e-3 relative on t in [0.1, 1] for q in {2, 4}, within 30 s.
pub fn flat_solution() -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for q in [2.0, 4.0] {
        let params = ProblemParams::new(1, q)?;
        let mut cfg = SolverConfig::line(params, 8.0, 0.1, 1.0);
        cfg.dt = 1e-6;
        let u0 = constant_data(1e8, &cfg)?;
        let times = [0.1, 0.25, 0.5, 1.0];
        let run = solve_cauchy(&u0, &cfg, &times, None)?;
        for (snap, &t) in run.snapshots.iter().zip(&times) {
            let got = sample_linear(snap, 0.0);
            let want = flat_bound(&params, t);
            worst = worst.max((got - want).abs() / want);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(CheckOutcome::new(
        "flat-solution",
        worst <= 1e-3 && elapsed < 30.0,
        format!(
            "max rel err {worst:.2e} (limit 1e-3) over q in {{2,4}}, t in [0.1,1]; \
             {elapsed:.1} s (limit 30)"
        ),
    ))
}

/// Absorbed q-mass plus final mass balances the initial mass within 1%
/// (Gaussian data, N = 1, q = 2, s = 0.05, T = 0.5).
pub fn mass_identity() -> Result<CheckOutcome> {
    let params = ProblemParams::new(1, 2.0)?;
    let cfg = SolverConfig::line(params, 6.0, 0.02, 0.5);
    let u0 = GridFunction::from_fn(GridBox::interval(-6.0, 6.0), cfg.h, |x| {
        (-x[0] * x[0]).exp()
    })?;
    let run = solve_cauchy(&u0, &cfg, &[0.5], None)?;
    let (lhs, rhs, rel) = mass_identity_residual(&run, 0.05);
    Ok(CheckOutcome::new(
        "mass-identity",
        rel < 0.01,
        format!("absorbed+final {lhs:.6} vs mass(s) {rhs:.6}, rel {rel:.2e} (limit 1e-2)"),
    ))
}

/// The point maximal solution matches the shooting profile in self-similar
/// variables (sup gap <= 1e-2 at t = 0.01 over |y| <= 5) and dominates the
/// profile lower bound; within 5 minutes.
pub fn very_singular() -> Result<CheckOutcome> {
    let start = Instant::now();
    let params = ProblemParams::new(1, 2.0)?;
    let rep = subcritical_point_check(&params, &PointCheckOptions::default())?;
    let elapsed = start.elapsed().as_secs_f64();
    Ok(CheckOutcome::new(
        "very-singular-profile",
        rep.sup_gap <= 1e-2 && rep.lower_bound_min_ratio >= 0.95 && elapsed < 300.0,
        format!(
            "sup gap {:.2e} (limit 1e-2), lower-bound min ratio {:.4} (limit 0.95), \
             f(0) = {:.6}; {elapsed:.0} s (limit 300)",
            rep.sup_gap, rep.lower_bound_min_ratio, rep.profile_origin
        ),
    ))
}

/// Supercritical point singularities are removable: the capacitary
/// potential vanishes identically and the eps-sweep decreases monotonically.
/// The stated final threshold 1e-2 t^{-1/(q-1)} is out of reach of the
/// stated sweep (the decay rate is eps^{N - 2/(q-1)} = eps^{1/3}); the check
/// reports the measured table and fails on that clause by design honesty.
pub fn removability() -> Result<CheckOutcome> {
    let params = ProblemParams::new(1, 4.0)?;
    let point = ClosedSetSpec::point1(0.0);
    let t_probe = 0.1;

    let cap = CapacityBackend::new(params);
    for &(x, t) in &[(0.0, 0.05), (0.3, 0.1), (1.0, 0.2)] {
        let w = series_potential(&point, &[x], t, &params, &cap)?;
        if w != 0.0 {
            return Ok(CheckOutcome::new(
                "removability",
                false,
                format!("W_series({x}, {t}) = {w}, expected exactly 0"),
            ));
        }
    }

    let mut cfg = SolverConfig::line(params, 1.5, 0.003125, t_probe);
    cfg.ramp = Some(TimeRamp {
        dt0: 1e-8,
        factor: 1.002,
    });
    let eps_list = [0.1, 0.05, 0.025, 0.0125];
    let m = maximal_solution(&point, &cfg, &[1e2, 1e4, 1e6, 1e8], &eps_list, &[t_probe])?;
    let values: Vec<f64> = m
        .per_eps
        .iter()
        .map(|snaps| sample_linear(&snaps[0], 0.0))
        .collect();
    let monotone = values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10));
    let threshold = 1e-2 * t_probe.powf(-1.0 / (params.q - 1.0));
    let below = *values.last().unwrap() < threshold;
    let table: Vec<String> = eps_list
        .iter()
        .zip(&values)
        .map(|(e, v)| format!("eps {e}: u = {v:.4}"))
        .collect();
    Ok(CheckOutcome::new(
        "removability",
        monotone && below,
        format!(
            "W_series = 0 identically; monotone decrease: {monotone}; final {:.4} vs \
             threshold {threshold:.4} [{}]{}",
            values.last().unwrap(),
            table.join("; "),
            if below {
                ""
            } else {
                " — eps^(1/3) decay cannot reach the threshold within this sweep \
                 (known-red clause, see README)"
            }
        ),
    ))
}

fn sandwich_level(refine: f64) -> Result<(f64, f64)> {
    let params = ProblemParams::new(1, 4.0)?;
    let interval = ClosedSetSpec::interval(-1.0, 1.0);
    let cap = CapacityBackend::with_refinement(params, refine);
    let mut cfg = SolverConfig::line(params, 3.0, 0.01 / refine, 0.2);
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
    )?;
    let mut rmin = f64::INFINITY;
    let mut rmax = 0.0_f64;
    for r in &rows {
        if r.anomaly || !r.ratio.is_finite() || r.ratio <= 0.0 {
            return Err(crate::error::Error::InvalidParams(format!(
                "degenerate sandwich row at ({}, {})",
                r.x, r.t
            )));
        }
        rmin = rmin.min(r.ratio);
        rmax = rmax.max(r.ratio);
    }
    Ok((rmin, rmax))
}

/// The maximal-solution / capacitary-potential ratio has finite positive
/// extremes whose envelope drifts < 50% under simultaneous grid halving.
pub fn sandwich_stability() -> Result<CheckOutcome> {
    let start = Instant::now();
    let (lo1, hi1) = sandwich_level(1.0)?;
    let (lo2, hi2) = sandwich_level(2.0)?;
    let env1 = hi1 / lo1;
    let env2 = hi2 / lo2;
    let drift = (env2 / env1 - 1.0).abs();
    let elapsed = start.elapsed().as_secs_f64();
    Ok(CheckOutcome::new(
        "sandwich-stability",
        drift < 0.5 && elapsed < 900.0,
        format!(
            "ratio in [{lo1:.4}, {hi1:.4}] -> [{lo2:.4}, {hi2:.4}] under halving, envelope \
             drift {drift:.2e} (limit 0.5); {elapsed:.0} s (limit 900)"
        ),
    ))
}

/// Series and integral potentials stay pointwise comparable (< 25% drift
/// under capacity-grid halving) and the integral tail is controlled by its
/// Gaussian envelope with a fit stable to < 30%.
pub fn series_integral_equivalence() -> Result<CheckOutcome> {
    let params = ProblemParams::new(1, 4.0)?;
    let interval = ClosedSetSpec::interval(-1.0, 1.0);
    let xs = [0.0, 0.5, 1.0, 1.5, 2.0];
    let ts = [0.05, 0.1, 0.2];
    let run = |refine: f64| -> Result<Vec<crate::potential::EquivalenceRow>> {
        let cap = CapacityBackend::with_refinement(params, refine);
        equivalence_report(&interval, &xs, &ts, &params, &cap)
    };
    let base = run(1.0)?;
    let fine = run(2.0)?;
    let mut max_drift = 0.0_f64;
    let mut fit_base = 0.0_f64;
    let mut fit_fine = 0.0_f64;
    let mut all_finite = true;
    for (a, b) in base.iter().zip(&fine) {
        all_finite &= a.ratio.is_finite() && a.ratio > 0.0;
        max_drift = max_drift.max((b.ratio / a.ratio - 1.0).abs());
        // skip probes whose tail sits below the quadrature noise floor
        if a.tail_envelope > 0.0 && a.tail > 1e-10 * a.w_integral {
            fit_base = fit_base.max(a.tail / a.tail_envelope);
            fit_fine = fit_fine.max(b.tail / b.tail_envelope);
        }
    }
    let fit_drift = (fit_fine / fit_base - 1.0).abs();
    Ok(CheckOutcome::new(
        "series-integral-equivalence",
        all_finite && max_drift < 0.25 && fit_drift < 0.30,
        format!(
            "ratios finite: {all_finite}; pointwise drift {max_drift:.2e} (limit 0.25); \
             tail-constant {fit_base:.3e} -> {fit_fine:.3e}, drift {fit_drift:.2e} (limit 0.30)"
        ),
    ))
}

/// Numeric ball capacities follow C(lambda K) = lambda^{N - 2/(q-1)} C(K)
/// within 10% (unit ball vs radius 2, N = 1, q = 4).
pub fn capacity_scaling() -> Result<CheckOutcome> {
    let params = ProblemParams::new(1, 4.0)?;
    let value = |r: f64| -> Result<f64> {
        let prob = CapacityProblem::new(
            params,
            ClosedSetSpec::Ball {
                center: vec![0.0],
                radius: r,
            },
        )?;
        Ok(capacity_numeric(&prob)?.value)
    };
    let ratio = value(2.0)? / value(1.0)?;
    let expected = 2.0_f64.powf(params.scaling_exponent());
    let rel = (ratio / expected - 1.0).abs();
    Ok(CheckOutcome::new(
        "capacity-scaling",
        rel < 0.10,
        format!(
            "C(B_2)/C(B_1) = {ratio:.5} vs 2^(1/3) = {expected:.5}, off {rel:.2e} (limit 0.10)"
        ),
    ))
}

/// The KKT multiplier measure of the capacity minimizer carries total mass
/// equal to the capacity within 5% (unit interval, N = 1, q = 4).
pub fn capacitary_duality() -> Result<CheckOutcome> {
    let params = ProblemParams::new(1, 4.0)?;
    let prob = CapacityProblem::new(params, ClosedSetSpec::interval(0.0, 1.0))?;
    let est = capacity_numeric(&prob)?;
    let nu = capacitary_measure(&prob)?;
    let ratio = nu.total_mass() / est.value;
    Ok(CheckOutcome::new(
        "capacitary-duality",
        (ratio - 1.0).abs() <= 0.05,
        format!(
            "mass {:.6} / capacity {:.6} = {ratio:.4} (limit 1 +- 0.05)",
            nu.total_mass(),
            est.value
        ),
    ))
}

/// Spherical integrals: closed form at N = 3, the two-step recursion at
/// N = 6, 7 (both to 1e-9 relative), and a flat finite asymptotic envelope
/// out to m = 200.
pub fn spherical_integrals() -> Result<CheckOutcome> {
    let mut worst_i3 = 0.0_f64;
    for m in [0.1, 1.0, 5.0, 20.0] {
        let got = spherical_integral(3, m, 1e-13)?;
        let want = 2.0 * m.sinh() / m;
        worst_i3 = worst_i3.max((got - want).abs() / want);
    }
    let mut worst_rec = 0.0_f64;
    for n in [6usize, 7] {
        for m in [0.1, 1.0, 5.0, 20.0] {
            let inm4 = spherical_integral(n - 4, m, 1e-13)?;
            let inm2 = spherical_integral(n - 2, m, 1e-13)?;
            let want = spherical_integral(n, m, 1e-13)?;
            let rec = spherical_recursion(n, m, inm4, inm2);
            worst_rec = worst_rec.max((want - rec).abs() / want);
        }
    }
    let mut envelope_ok = true;
    for n in 2..=7usize {
        let ratio = |m: f64| -> Result<f64> {
            Ok(spherical_integral_scaled(n, m, 1e-13)? * (1.0 + m).powf((n as f64 - 1.0) / 2.0))
        };
        let at200 = ratio(200.0)?;
        envelope_ok &= at200.is_finite();
        for k in 0..=10 {
            let r = ratio(100.0 + 10.0 * k as f64)?;
            envelope_ok &= r.is_finite() && (r / at200 - 1.0).abs() <= 0.05;
        }
    }
    Ok(CheckOutcome::new(
        "spherical-integrals",
        worst_i3 <= 1e-9 && worst_rec <= 1e-9 && envelope_ok,
        format!(
            "N=3 closed form err {worst_i3:.2e}, recursion residual {worst_rec:.2e} \
             (limits 1e-9); asymptotic envelope flat to m = 200: {envelope_ok}"
        ),
    ))
}

/// The singular two-Gaussian integral stays below its sharp envelope over
/// the versioned sweep, stably under 10x tighter quadrature, and respects
/// the (a, A) <-> (b, B) symmetry.
pub fn sharp_integral_sweep() -> Result<CheckOutcome> {
    let sweep = default_integral_sweep();
    let run = |tol: f64| -> Result<(f64, (f64, f64, f64, f64))> {
        let mut sup = 0.0_f64;
        let mut arg = (0.0, 0.0, 0.0, 0.0);
        for &(a, b, abig, bbig) in &sweep {
            let lhs = sharp_integral_lhs(a, b, abig, bbig, tol)?;
            let env = (-(abig + bbig) * (abig + bbig) / 4.0).exp()
                * abig.powf(1.0 - a)
                * bbig.powf(1.0 - b)
                * (abig + bbig).powf(a + b - 2.0);
            let r = lhs / env;
            if !r.is_finite() || r <= 0.0 {
                return Err(crate::error::Error::InvalidParams(format!(
                    "non-finite ratio at {:?}",
                    (a, b, abig, bbig)
                )));
            }
            if r > sup {
                sup = r;
                arg = (a, b, abig, bbig);
            }
        }
        Ok((sup, arg))
    };
    let (sup1, arg) = run(1e-10)?;
    let (sup2, _) = run(1e-11)?;
    let drift = (sup2 / sup1 - 1.0).abs();
    let mut sym_worst = 0.0_f64;
    for &(a, b, abig, bbig) in sweep.iter().step_by(17) {
        let r1 = sharp_integral_ratio(a, b, abig, bbig, 1.0)?;
        let r2 = sharp_integral_ratio(b, a, bbig, abig, 1.0)?;
        sym_worst = sym_worst.max((r1 - r2).abs() / r1.abs().max(1e-300));
    }
    Ok(CheckOutcome::new(
        "sharp-integral-sweep",
        sweep.len() >= 200 && drift < 0.05 && sym_worst < 1e-6,
        format!(
            "{} tuples, sup ratio {sup1:.4e} at {arg:?}; drift under 10x tighter quadrature \
             {drift:.2e} (limit 0.05); symmetry residual {sym_worst:.2e}",
            sweep.len()
        ),
    ))
}

/// Closed-form constrained kernel maximum agrees with a 10^6-point grid
/// search within 0.5% on 20 seeded tuples covering both branches.
pub fn kernel_max_oracle() -> Result<CheckOutcome> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20240801);
    let mut steep = 0;
    let mut flat = 0;
    let mut worst = 0.0_f64;
    for check in 0..20 {
        let n = rng.gen_range(1..=3usize);
        let want_steep = check % 2 == 0;
        let a = if want_steep {
            rng.gen_range(2.0 * n as f64 + 0.5..6.0 * n as f64)
        } else {
            rng.gen_range(0.2..2.0 * n as f64 * 0.9)
        };
        let b = a + rng.gen_range(0.5..4.0);
        let t = rng.gen_range(0.2..3.0);
        let km = kernel_max(a, b, t, n)?;
        if km.steep_branch {
            steep += 1;
        } else {
            flat += 1;
        }
        worst = worst.max((km.value - km.grid_value).abs() / km.value);
    }
    Ok(CheckOutcome::new(
        "kernel-max-oracle",
        steep > 0 && flat > 0 && worst <= 0.005,
        format!(
            "20 tuples ({steep} steep, {flat} flat branch), worst closed-form vs grid gap \
             {worst:.2e} (limit 5e-3)"
        ),
    ))
}

/// The sup of moderate solutions over the scaled capacitary-measure family
/// reaches at least 1/3 of the maximal solution at every probe and grows
/// monotonically with the family.
pub fn sigma_moderate_envelope() -> Result<CheckOutcome> {
    let start = Instant::now();
    let params = ProblemParams::new(1, 4.0)?;
    let interval = ClosedSetSpec::interval(-1.0, 1.0);
    let prob = CapacityProblem::new(params, interval.clone())?;
    let nu = capacitary_measure(&prob)?;
    let lambdas = [1.0, 10.0, 100.0, 1e4, 1e6];
    let family: Vec<_> = lambdas.iter().map(|l| nu.scaled(*l)).collect();

    let mut cfg = SolverConfig::line(params, 3.0, 0.01, 0.2);
    cfg.ramp = Some(TimeRamp {
        dt0: 1e-8,
        factor: 1.002,
    });
    let ts = [0.05, 0.1, 0.2];
    let xs = [0.0, 0.5, 1.0, 1.5, 2.0];
    let sig = sigma_moderate_sup(&family, &cfg, &ts)?;
    let maximal = maximal_solution(&interval, &cfg, &[1e2, 1e4, 1e6, 1e8], &[0.1, 0.05], &ts)?;

    // the family is ordered by lambda, so each member dominates the last
    let mut monotone = true;
    for (k, _) in ts.iter().enumerate() {
        for &x in &xs {
            let mut prefix = 0.0_f64;
            for per in &sig.per_measure {
                let v = sample_linear(&per[k], x);
                monotone &= v >= prefix * (1.0 - 1e-12) - 1e-300;
                prefix = prefix.max(v);
            }
        }
    }
    let mut worst = f64::INFINITY;
    for (k, _) in ts.iter().enumerate() {
        for &x in &xs {
            let us = sample_linear(&sig.sup[k], x);
            let um = sample_linear(&maximal.snapshots[k], x);
            if um > 0.0 {
                worst = worst.min(us / um);
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(CheckOutcome::new(
        "sigma-moderate-envelope",
        monotone && worst >= 1.0 / 3.0,
        format!(
            "family sup monotone: {monotone}; worst fraction of the maximal solution \
             {worst:.3} (limit 1/3); {elapsed:.0} s"
        ),
    ))
}
