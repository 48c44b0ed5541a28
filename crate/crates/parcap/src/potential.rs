//! Capacitary potential of a closed set, in series form over parabolic
//! slices and in integral form, plus the small-time blow-up/boundedness
//! classifiers driven by rescaled capacities.
//!
//! The series form sums, over the annular slices F_n of F around (x, t),
//!     t^{-1/(q-1)} (n+1)^{N/2 - 1/(q-1)} e^{-n/4} C((F_n - x) / sqrt((n+1) t))
//! and the integral form integrates s^{N - 2/(q-1)} e^{-s^2/4t}
//! C(((F cap B_s(x)) - x)/s) s ds / t^{1 + N/2} up to D_F(x). Both forms
//! are comparable with constants; the toolkit measures the ratio instead of
//! asserting any constant.

use serde::{Deserialize, Serialize};

use crate::capacity::CapacityBackend;
use crate::domain::{ClosedSetSpec, ProblemParams};
use crate::error::{Error, Result};
use crate::quad;

/// One parabolic annulus of the slicing: F_n = F cap {sqrt(n t) <= |x - y|
/// <= sqrt((n+1) t)}; `d_next` = sqrt((n+1) t).
#[derive(Debug, Clone)]
pub struct Slice {
    pub n: usize,
    pub set: ClosedSetSpec,
    pub d_next: f64,
}

/// Decomposition of a bounded closed set into parabolic annuli around a
/// space-time point. Slices share only their boundary spheres and cover
/// F cap B_{sqrt((a_t + 1) t)}(x) = F.
#[derive(Debug, Clone)]
pub struct Slicing {
    pub center: Vec<f64>,
    pub time: f64,
    pub slices: Vec<Slice>,
    /// Smallest n with F contained in the closed ball of radius
    /// sqrt((n+1) t); equivalently the index of the last non-degenerate
    /// slice.
    pub a_t: usize,
}

/// Slice a bounded set into parabolic annuli around (x, t).
pub fn slice(set: &ClosedSetSpec, x: &[f64], t: f64) -> Result<Slicing> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    if !set.is_bounded() {
        return Err(Error::UnboundedSet("slicing".into()));
    }
    if set.is_empty_set() {
        return Ok(Slicing {
            center: x.to_vec(),
            time: t,
            slices: Vec::new(),
            a_t: 0,
        });
    }
    let d = set.diameter_from(x)?;
    let a_t = last_slice_index(d, t);
    let mut slices = Vec::with_capacity(a_t + 1);
    for n in 0..=a_t {
        let r_in = (n as f64 * t).sqrt();
        let r_out = ((n as f64 + 1.0) * t).sqrt();
        slices.push(Slice {
            n,
            set: set.intersect_annulus(x, r_in, r_out)?,
            d_next: r_out,
        });
    }
    Ok(Slicing {
        center: x.to_vec(),
        time: t,
        slices,
        a_t,
    })
}

/// a_t = min{n : F inside the closed ball B_{sqrt((n+1) t)}(x)}, guarded
/// against roundoff when D^2/t is an exact integer.
fn last_slice_index(diameter: f64, t: f64) -> usize {
    let ratio = diameter * diameter / t;
    let guarded = ratio * (1.0 - 1e-12) - 1e-12;
    (guarded.ceil() as i64 - 1).max(0) as usize
}

/// Series form of the capacitary potential.
pub fn series_potential(
    set: &ClosedSetSpec,
    x: &[f64],
    t: f64,
    params: &ProblemParams,
    cap: &CapacityBackend,
) -> Result<f64> {
    if !params.supercritical {
        return Err(Error::InvalidParams(format!(
            "capacitary potential needs q >= q_c = {}",
            params.q_c
        )));
    }
    if set.is_empty_set() {
        return Ok(0.0);
    }
    let slicing = slice(set, x, t)?;
    let gamma = params.n as f64 / 2.0 - 1.0 / (params.q - 1.0);
    let cap_ball = cap.unit_ball_capacity()?;
    let minus_x: Vec<f64> = x.iter().map(|v| -v).collect();
    let mut total = 0.0_f64;
    for sl in &slicing.slices {
        if sl.set.is_empty_set() {
            continue;
        }
        let weight = (sl.n as f64 + 1.0).powf(gamma) * (-(sl.n as f64) / 4.0).exp();
        // capacity is monotone: slices sit inside the unit ball after
        // rescaling, so the tail is dominated by cap_ball
        if weight * cap_ball < 1e-12 * total.max(1e-300) {
            break;
        }
        let scaled = sl.set.translate(&minus_x).scale(1.0 / sl.d_next);
        total += weight * cap.eval(&scaled)?;
    }
    Ok(t.powf(-1.0 / (params.q - 1.0)) * total)
}

/// Capacity of the rescaled local piece, C(((F - x)/s) cap B_1(0)): the
/// integrand of the integral potential and the classifier statistic.
pub fn scaled_local_capacity(
    set: &ClosedSetSpec,
    x: &[f64],
    s: f64,
    cap: &CapacityBackend,
) -> Result<f64> {
    let minus_x: Vec<f64> = x.iter().map(|v| -v).collect();
    let origin = vec![0.0; x.len()];
    let local = set
        .translate(&minus_x)
        .scale(1.0 / s)
        .intersect_ball(&origin, 1.0)?;
    cap.eval(&local)
}

/// Integral form of the capacitary potential, by composite Gauss rule with
/// nodes clustered at the radii where the set geometry changes.
pub fn integral_potential(
    set: &ClosedSetSpec,
    x: &[f64],
    t: f64,
    params: &ProblemParams,
    cap: &CapacityBackend,
) -> Result<f64> {
    integral_potential_upto(set, x, t, params, cap, None)
}

/// Integral potential truncated at `upper` (None = D_F(x)); the truncated
/// variant feeds the tail-control report.
pub fn integral_potential_upto(
    set: &ClosedSetSpec,
    x: &[f64],
    t: f64,
    params: &ProblemParams,
    cap: &CapacityBackend,
    upper: Option<f64>,
) -> Result<f64> {
    if !params.supercritical {
        return Err(Error::InvalidParams(format!(
            "capacitary potential needs q >= q_c = {}",
            params.q_c
        )));
    }
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    if set.is_empty_set() {
        return Ok(0.0);
    }
    let d = set.diameter_from(x)?;
    let top = upper.unwrap_or(d).min(d);
    if top <= 0.0 {
        return Ok(0.0);
    }
    let exponent = params.scaling_exponent();
    let breaks = integration_breakpoints(set, x, t, top)?;
    // capacities vary smoothly between breakpoints; 8-point cells give the
    // 64-node composite rule on typical geometries
    let (nodes, weights) = quad::gauss_legendre(8);
    let mut value = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (z, wt) in nodes.iter().zip(&weights) {
            let s = mid + half * z;
            let g = scaled_local_capacity(set, x, s, cap)?;
            value += wt * half * s.powf(exponent) * (-s * s / (4.0 * t)).exp() * g * s;
        }
    }
    Ok(t.powf(-1.0 - params.n as f64 / 2.0) * value)
}

/// Radii in (0, top] where the scaled-set geometry changes: slice spheres,
/// distances to the set's characteristic points, and enough uniform
/// refinement for the Gaussian factor.
fn integration_breakpoints(set: &ClosedSetSpec, x: &[f64], t: f64, top: f64) -> Result<Vec<f64>> {
    let mut pts = vec![0.0, top];
    let dist = set.distance(x);
    if dist > 0.0 && dist < top {
        pts.push(dist);
    }
    if let Ok(ivs) = set.as_intervals() {
        for iv in ivs {
            for e in [iv[0], iv[1]] {
                let r = (x[0] - e).abs();
                if r > 0.0 && r < top {
                    pts.push(r);
                }
            }
        }
    }
    let mut n = 1;
    while (n as f64 * t).sqrt() < top && n < 4096 {
        let r = (n as f64 * t).sqrt();
        if r > 0.0 {
            pts.push(r);
        }
        n += 1;
    }
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * top);
    // keep the cell count bounded: merge from the widest cell down, which
    // preserves the small-s region where the integrand varies fastest
    while pts.len() > 49 {
        let mut widest = 1;
        let mut best = 0.0;
        for i in 1..pts.len() - 1 {
            let w = pts[i + 1] - pts[i - 1];
            if w > best {
                best = w;
                widest = i;
            }
        }
        pts.remove(widest);
    }
    Ok(pts)
}

/// One probe row of the series/integral comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub x: f64,
    pub t: f64,
    pub w_series: f64,
    pub w_integral: f64,
    pub ratio: f64,
    /// Integral mass beyond sqrt(t a_t), the piece controlled by the
    /// Gaussian tail estimate.
    pub tail: f64,
    /// Tail envelope t^{(q-3)/2(q-1)} e^{-D^2/4t} / D; `tail / tail_envelope`
    /// is the fitted constant of the tail bound.
    pub tail_envelope: f64,
}

/// Series and integral potentials over a probe grid, with their ratio and
/// the tail-control data. Positions are 1-D abscissae (the probe grids of
/// the desk-scale experiments).
pub fn equivalence_report(
    set: &ClosedSetSpec,
    xs: &[f64],
    ts: &[f64],
    params: &ProblemParams,
    cap: &CapacityBackend,
) -> Result<Vec<EquivalenceRow>> {
    let mut rows = Vec::with_capacity(xs.len() * ts.len());
    for &x in xs {
        for &t in ts {
            let point = [x];
            let w_series = series_potential(set, &point, t, params, cap)?;
            let w_integral = integral_potential(set, &point, t, params, cap)?;
            let d = set.diameter_from(&point)?;
            let a_t = last_slice_index(d, t);
            let body = integral_potential_upto(
                set,
                &point,
                t,
                params,
                cap,
                Some((a_t as f64 * t).sqrt()),
            )?;
            let tail = (w_integral - body).max(0.0);
            let tail_envelope = if d > 0.0 {
                t.powf((params.q - 3.0) / (2.0 * (params.q - 1.0))) * (-d * d / (4.0 * t)).exp() / d
            } else {
                0.0
            };
            rows.push(EquivalenceRow {
                x,
                t,
                w_series,
                w_integral,
                ratio: if w_series > 0.0 {
                    w_integral / w_series
                } else {
                    f64::NAN
                },
                tail,
                tail_envelope,
            });
        }
    }
    Ok(rows)
}

/// Outcome of the small-time classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BlowupClass {
    /// Rescaled capacities converge to gamma > 0: t^{1/(q-1)} u -> C gamma
    /// with an unknown constant; only gamma is reported.
    StrongBlowup {
        gamma: f64,
    },
    Bounded,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub class: BlowupClass,
    pub samples: Vec<(f64, f64)>,
    /// Detection thresholds are tooling policy, not mathematical content.
    pub policy: String,
}

/// Classify the small-time behaviour of the maximal solution at `x` from
/// the rescaled capacities g(tau) = C(((F - x)/tau) cap B_1).
pub fn blowup_classifier(
    set: &ClosedSetSpec,
    x: &[f64],
    params: &ProblemParams,
    tau_list: &[f64],
    cap: &CapacityBackend,
) -> Result<ClassifierReport> {
    if !params.supercritical {
        return Err(Error::InvalidParams(format!(
            "classifier needs q >= q_c = {}",
            params.q_c
        )));
    }
    if tau_list.len() < 3 || tau_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParams(
            "tau_list must be decreasing with at least 3 entries".into(),
        ));
    }
    let mut samples = Vec::with_capacity(tau_list.len());
    for &tau in tau_list {
        samples.push((tau, scaled_local_capacity(set, x, tau, cap)?));
    }
    let policy = "convergence: relative spread of last 3 samples < 5%; \
                  boundedness: tau^{-2/(q-1)} g non-increasing across last 3 \
                  (5% slack); thresholds are tooling policy, not mathematics"
        .to_string();
    let last3 = &samples[samples.len() - 3..];
    let gmax = last3.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let gmin = last3.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let cap_ball = cap.unit_ball_capacity()?;
    let class = if gmax <= 1e-10 * cap_ball {
        // capacity identically ~0 near x: no singular mass at all
        BlowupClass::Bounded
    } else if (gmax - gmin) <= 0.05 * gmax {
        BlowupClass::StrongBlowup {
            gamma: last3.iter().map(|p| p.1).sum::<f64>() / 3.0,
        }
    } else {
        let scaled: Vec<f64> = last3
            .iter()
            .map(|(tau, g)| tau.powf(-2.0 / (params.q - 1.0)) * g)
            .collect();
        if scaled.windows(2).all(|w| w[1] <= w[0] * 1.05) {
            BlowupClass::Bounded
        } else {
            BlowupClass::Inconclusive
        }
    };
    Ok(ClassifierReport {
        class,
        samples,
        policy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::CapacityBackend;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params14() -> ProblemParams {
        ProblemParams::new(1, 4.0).unwrap()
    }

    #[test]
    fn slicing_of_point_has_single_occupied_slice() {
        let p = ClosedSetSpec::point1(1.5);
        let t = 0.9;
        let s = slice(&p, &[0.0], t).unwrap();
        let expected = (1.5_f64 * 1.5 / t).floor() as usize;
        let occupied: Vec<usize> = s
            .slices
            .iter()
            .filter(|sl| !sl.set.is_empty_set())
            .map(|sl| sl.n)
            .collect();
        assert_eq!(occupied, vec![expected]);
    }

    #[test]
    fn slicing_of_ball_radius_sqrt3t() {
        let t = 0.25_f64;
        let r = (3.0 * t).sqrt();
        let ball = ClosedSetSpec::Ball {
            center: vec![0.0],
            radius: r,
        };
        let s = slice(&ball, &[0.0], t).unwrap();
        assert_eq!(s.a_t, 2, "closed ball of radius sqrt(3t) fills 3 slices");
        assert!(s.slices.iter().all(|sl| !sl.set.is_empty_set()));
    }

    #[test]
    fn slicing_matches_bruteforce_bucketing_of_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let pts: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let set = ClosedSetSpec::Union {
                members: pts.iter().map(|&p| ClosedSetSpec::point1(p)).collect(),
            };
            let x = rng.gen_range(-1.0..1.0);
            let t = rng.gen_range(0.05..0.4);
            let s = slice(&set, &[x], t).unwrap();
            for &p in &pts {
                let n = ((p - x) * (p - x) / t).floor() as usize;
                let sl = &s.slices[n];
                assert!(
                    sl.set.contains(&[p], 1e-12),
                    "point {p} should land in slice {n}"
                );
            }
        }
    }

    #[test]
    fn empty_and_point_potentials_vanish() {
        let params = params14();
        let cap = CapacityBackend::new(params);
        let w = series_potential(&ClosedSetSpec::Empty, &[0.0], 0.1, &params, &cap).unwrap();
        assert_eq!(w, 0.0);
        let w = series_potential(&ClosedSetSpec::point1(0.3), &[0.0], 0.1, &params, &cap).unwrap();
        assert_eq!(w, 0.0, "capacity-null singleton");
        let wi =
            integral_potential(&ClosedSetSpec::point1(0.3), &[0.0], 0.1, &params, &cap).unwrap();
        assert_eq!(wi, 0.0);
    }

    #[test]
    fn series_positive_and_parabolic_scaling() {
        let params = params14();
        let cap = CapacityBackend::new(params);
        let ball = ClosedSetSpec::Ball {
            center: vec![0.0],
            radius: 0.8,
        };
        let (x, t) = ([0.3], 0.1);
        let w = series_potential(&ball, &x, t, &params, &cap).unwrap();
        assert!(w > 0.0);
        for lambda in [0.5, 2.0] {
            let scaled_set = ball.scale(lambda);
            let w_scaled = series_potential(
                &scaled_set,
                &[lambda * x[0]],
                lambda * lambda * t,
                &params,
                &cap,
            )
            .unwrap();
            let predicted = lambda.powf(-2.0 / (params.q - 1.0)) * w;
            assert!(
                (w_scaled / predicted - 1.0).abs() < 0.10,
                "lambda {lambda}: {w_scaled} vs {predicted}"
            );
        }
    }

    #[test]
    fn potentials_monotone_in_the_set() {
        let params = params14();
        let cap = CapacityBackend::new(params);
        let small = ClosedSetSpec::interval(-0.4, 0.4);
        let large = ClosedSetSpec::interval(-1.0, 1.0);
        for &(x, t) in &[(0.0, 0.05), (0.6, 0.1), (1.5, 0.2)] {
            let ws = series_potential(&small, &[x], t, &params, &cap).unwrap();
            let wl = series_potential(&large, &[x], t, &params, &cap).unwrap();
            assert!(ws <= wl * (1.0 + 1e-9), "series at ({x},{t})");
            let is = integral_potential(&small, &[x], t, &params, &cap).unwrap();
            let il = integral_potential(&large, &[x], t, &params, &cap).unwrap();
            assert!(is <= il * (1.0 + 1e-9), "integral at ({x},{t})");
        }
    }

    #[test]
    fn translation_invariance() {
        let params = params14();
        let cap = CapacityBackend::new(params);
        let set = ClosedSetSpec::interval(-0.5, 0.7);
        let (x, t) = (0.2, 0.08);
        let w = series_potential(&set, &[x], t, &params, &cap).unwrap();
        let v = 1.7;
        let w_shift = series_potential(&set.translate(&[v]), &[x + v], t, &params, &cap).unwrap();
        assert!((w - w_shift).abs() <= 1e-9 * w.abs().max(1e-30));
    }

    #[test]
    fn integral_and_series_stay_comparable() {
        let params = params14();
        let cap = CapacityBackend::new(params);
        let ball = ClosedSetSpec::Ball {
            center: vec![0.0],
            radius: 1.0,
        };
        let rows = equivalence_report(&ball, &[0.0, 0.5], &[0.05, 0.2], &params, &cap).unwrap();
        for row in &rows {
            assert!(row.w_series > 0.0 && row.w_integral > 0.0);
            assert!(row.ratio.is_finite() && row.ratio > 0.0);
        }
        let rmax = rows.iter().map(|r| r.ratio).fold(f64::MIN, f64::max);
        let rmin = rows.iter().map(|r| r.ratio).fold(f64::MAX, f64::min);
        assert!(rmax / rmin < 5.0, "ratio envelope blew up: {rmin}..{rmax}");
    }

    #[test]
    fn classifier_interior_boundary_exterior() {
        let params = params14();
        let cap = CapacityBackend::new(params);
        let interval = ClosedSetSpec::interval(0.0, 1.0);
        let taus: Vec<f64> = (0..6).map(|k| 0.2 / 2f64.powi(k)).collect();

        // interior point: F/tau eventually covers B_1 entirely
        let rep = blowup_classifier(&interval, &[0.5], &params, &taus, &cap).unwrap();
        match rep.class {
            BlowupClass::StrongBlowup { gamma } => {
                let cap_ball = cap.unit_ball_capacity().unwrap();
                assert!(
                    (gamma / cap_ball - 1.0).abs() < 0.05,
                    "gamma {gamma} vs unit ball {cap_ball}"
                );
            }
            other => panic!("interior point should blow up strongly: {other:?}"),
        }

        // endpoint: half-line cap B_1, a constant in tau
        let rep = blowup_classifier(&interval, &[0.0], &params, &taus, &cap).unwrap();
        assert!(
            matches!(rep.class, BlowupClass::StrongBlowup { .. }),
            "endpoint: {:?}",
            rep.class
        );

        // strictly outside: g = 0 once tau < dist
        let rep = blowup_classifier(&interval, &[-0.5], &params, &taus, &cap).unwrap();
        assert_eq!(rep.class, BlowupClass::Bounded);
    }
}
