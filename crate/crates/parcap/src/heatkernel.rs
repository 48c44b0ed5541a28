//! Gaussian heat kernel, heat and Green potentials, Gaussian-decay
//! propagation and the spherical integrals used by the appendix estimates.
//!
//! H(x,y,t) = (4 pi t)^{-N/2} exp(-|x-y|^2 / 4t); the heat potential of a
//! measure is the sum of the atom contributions and a midpoint-rule
//! quadrature of the density part.

use crate::domain::{dist_points, GridFunction, ProblemParams, RadonMeasure};
use crate::error::{Error, Result};
use crate::quad;

/// Heat kernel in R^n. Symmetric in (x, y), errors on t <= 0.
pub fn heat_kernel(n: usize, x: &[f64], y: &[f64], t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    let d = dist_points(x, y);
    Ok((4.0 * std::f64::consts::PI * t).powf(-(n as f64) / 2.0) * (-d * d / (4.0 * t)).exp())
}

/// Evaluation context: exponents plus the quadrature tolerance used by the
/// potential operators.
#[derive(Debug, Clone)]
pub struct KernelEval {
    pub params: ProblemParams,
    pub quad_abs_tol: f64,
    pub quad_rel_tol: f64,
}

impl KernelEval {
    pub fn new(params: ProblemParams) -> Self {
        Self {
            params,
            quad_abs_tol: 1e-12,
            quad_rel_tol: 1e-10,
        }
    }

    /// Heat potential of a measure at (x, t).
    pub fn heat_potential(&self, mu: &RadonMeasure, x: &[f64], t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::NonpositiveTime(t));
        }
        let n = self.params.n;
        let mut total = 0.0;
        for atom in &mu.atoms {
            total += atom.mass * heat_kernel(n, x, &atom.location, t)?;
        }
        if let Some(density) = &mu.density {
            total += self.density_potential(density, x, t)?;
        }
        Ok(total)
    }

    fn density_potential(&self, density: &GridFunction, x: &[f64], t: f64) -> Result<f64> {
        let n = self.params.n;
        // Gaussian of std sqrt(2t) must be resolved by the grid; below that
        // the kernel acts as the identity up to O(t).
        if 2.0 * t < density.h * density.h {
            return Ok(density.value_at(x));
        }
        let mut y = vec![0.0; density.shape.len()];
        let cell = density.h.powi(density.shape.len() as i32);
        let mut total = 0.0;
        for i in 0..density.len() {
            density.node(i, &mut y);
            let v = density.values[i];
            if v != 0.0 {
                total += v * heat_kernel(n, x, &y, t)? * cell;
            }
        }
        Ok(total)
    }

    /// Green heat potential of a time-indexed forcing: time trapezoid of
    /// heat potentials of the slices, truncated at `t`.
    pub fn green_potential(&self, slices: &[GridFunction], x: &[f64], t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::NonpositiveTime(t));
        }
        let mut stamped: Vec<&GridFunction> = slices.iter().collect();
        if stamped.iter().any(|g| g.time.is_none()) {
            return Err(Error::IncompleteHistory("slice without time stamp".into()));
        }
        stamped.sort_by(|a, b| a.time.unwrap().total_cmp(&b.time.unwrap()));
        let times: Vec<f64> = stamped.iter().map(|g| g.time.unwrap()).collect();
        if stamped.len() < 2 {
            return Err(Error::IncompleteHistory("need at least two slices".into()));
        }
        let span = times.last().unwrap() - times[0];
        if times[0] > 1e-9 + 0.25 * span / stamped.len() as f64
            || *times.last().unwrap() < t - 1e-12
        {
            return Err(Error::IncompleteHistory(format!(
                "slices cover [{}, {}], need [0, {t}]",
                times[0],
                times.last().unwrap()
            )));
        }
        // integrate s in [0, t]; at s = t the kernel degenerates to identity
        let mut prev_s = times[0];
        let mut prev_v = self.slice_value(stamped[0], x, t - prev_s)?;
        let mut total = prev_v * prev_s; // leading rectangle on [0, times[0]]
        for k in 1..stamped.len() {
            let s = times[k].min(t);
            if s <= prev_s {
                continue;
            }
            let v = self.slice_value(stamped[k], x, t - s)?;
            total += 0.5 * (v + prev_v) * (s - prev_s);
            prev_s = s;
            prev_v = v;
            if s >= t {
                break;
            }
        }
        Ok(total)
    }

    fn slice_value(&self, g: &GridFunction, x: &[f64], lag: f64) -> Result<f64> {
        if lag <= 0.0 || 2.0 * lag < g.h * g.h {
            Ok(g.value_at(x))
        } else {
            self.density_potential(g, x, lag)
        }
    }

    /// Right-hand side of the Gaussian-decay propagation bound: data below
    /// M e^{-a(|x|-b)_+^2} stays below this envelope for all t > 0 (b = 0
    /// is the plain Gaussian case, which is attained with equality).
    pub fn gaussian_decay_bound(&self, m: f64, a: f64, b: f64, x: &[f64], t: f64) -> Result<f64> {
        if !(m > 0.0) || !(a > 0.0) {
            return Err(Error::InvalidParams(format!(
                "decay bound needs M, a > 0 (got {m}, {a})"
            )));
        }
        if b < 0.0 {
            return Err(Error::InvalidParams("decay bound needs b >= 0".into()));
        }
        if !(t > 0.0) {
            return Err(Error::NonpositiveTime(t));
        }
        let n = self.params.n as f64;
        let r = dist_points(x, &vec![0.0; x.len()]);
        let shifted = (r - b).max(0.0);
        let denom = 4.0 * a * t + 1.0;
        Ok(m / denom.powf(n / 2.0) * (-a * shifted * shifted / denom).exp())
    }
}

/// e^{-m} * integral_0^pi e^{m cos(theta)} sin^{N-2}(theta) d(theta),
/// computed without overflow for large m.
pub fn spherical_integral_scaled(n: usize, m: f64, tol: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParams(
            "spherical integral needs N >= 2".into(),
        ));
    }
    if m < 0.0 {
        return Err(Error::InvalidParams(
            "spherical integral needs m >= 0".into(),
        ));
    }
    let pow = (n - 2) as i32;
    let (v, _) = quad::integrate(
        |theta: f64| ((theta.cos() - 1.0) * m).exp() * theta.sin().powi(pow),
        0.0,
        std::f64::consts::PI,
        tol,
        tol,
    )?;
    Ok(v)
}

/// integral_0^pi e^{m cos(theta)} sin^{N-2}(theta) d(theta). Overflows only
/// past m ~ 700; use the scaled variant for asymptotic ratios.
pub fn spherical_integral(n: usize, m: f64, tol: f64) -> Result<f64> {
    Ok(m.exp() * spherical_integral_scaled(n, m, tol)?)
}

/// Right-hand side of the two-step recursion that the spherical integrals
/// satisfy for N >= 6 (integration by parts twice):
/// I_N = (N-3)/m^2 * [(N-5) I_{N-4} - (N-4) I_{N-2}].
pub fn spherical_recursion(n: usize, m: f64, i_nm4: f64, i_nm2: f64) -> f64 {
    let nf = n as f64;
    (nf - 3.0) / (m * m) * ((nf - 5.0) * i_nm4 - (nf - 4.0) * i_nm2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Atom, GridBox};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn eval1() -> KernelEval {
        KernelEval::new(ProblemParams::new(1, 4.0).unwrap())
    }

    #[test]
    fn kernel_normalization_point() {
        // prefactor 1 and exponent 0 at x = y, t = 1/(4 pi)
        let v = heat_kernel(1, &[0.3], &[0.3], 1.0 / (4.0 * PI)).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        assert!(matches!(
            heat_kernel(1, &[0.0], &[0.0], 0.0),
            Err(Error::NonpositiveTime(_))
        ));
    }

    #[test]
    fn kernel_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..30 {
            let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let y = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let t = rng.gen_range(0.01..3.0);
            let a = heat_kernel(2, &x, &y, t).unwrap();
            let b = heat_kernel(2, &y, &x, t).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn kernel_mass_one() {
        let (v, _) = quad::integrate(
            |y| heat_kernel(1, &[0.0], &[y], 1.0).unwrap(),
            -20.0,
            20.0,
            1e-13,
            1e-13,
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn chapman_kolmogorov() {
        // integral H(x,z,t) H(z,y,s) dz = H(x,y,t+s)
        let (x, y, t, s) = (0.4, -0.7, 0.3, 0.5);
        let (v, _) = quad::integrate(
            |z| heat_kernel(1, &[x], &[z], t).unwrap() * heat_kernel(1, &[z], &[y], s).unwrap(),
            -25.0,
            25.0,
            1e-13,
            1e-13,
        )
        .unwrap();
        let exact = heat_kernel(1, &[x], &[y], t + s).unwrap();
        assert!((v - exact).abs() / exact < 1e-8);
    }

    #[test]
    fn potential_of_dirac_is_kernel() {
        let ev = eval1();
        let mu = RadonMeasure::dirac(vec![0.0], 1.0);
        let v = ev.heat_potential(&mu, &[0.7], 0.2).unwrap();
        assert_eq!(v, heat_kernel(1, &[0.7], &[0.0], 0.2).unwrap());
    }

    #[test]
    fn potential_mass_conservation_flat_density() {
        let ev = eval1();
        let density = GridFunction::from_fn(GridBox::interval(-15.0, 15.0), 0.05, |_| 1.0).unwrap();
        let mu = RadonMeasure::from_density(density);
        let v = ev.heat_potential(&mu, &[0.3], 0.5).unwrap();
        // truncation tail at |y| = 15: exp(-15^2/2) is negligible
        assert!((v - 1.0).abs() < 1e-6, "got {v}");
    }

    #[test]
    fn potential_of_gaussian_density_matches_closed_form() {
        // equality case of the decay bound: eta = M e^{-a y^2}
        let ev = eval1();
        let (m, a) = (2.0, 1.5);
        let density = GridFunction::from_fn(GridBox::interval(-10.0, 10.0), 0.01, |y| {
            m * (-a * y[0] * y[0]).exp()
        })
        .unwrap();
        let mu = RadonMeasure::from_density(density);
        for &(x, t) in &[(0.0, 0.1), (0.8, 0.3), (2.0, 1.0)] {
            let v = ev.heat_potential(&mu, &[x], t).unwrap();
            let bound = ev.gaussian_decay_bound(m, a, 0.0, &[x], t).unwrap();
            assert!(
                (v / bound - 1.0).abs() < 1e-6,
                "x={x} t={t}: {v} vs {bound}"
            );
        }
    }

    #[test]
    fn decay_bound_dominates_subgaussian_data() {
        let ev = eval1();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let m = rng.gen_range(0.5..3.0);
            let a = rng.gen_range(0.5..2.0);
            let damp = rng.gen_range(0.2..1.0);
            let density = GridFunction::from_fn(GridBox::interval(-10.0, 10.0), 0.02, |y| {
                damp * m * (-a * y[0] * y[0]).exp() * (0.5 + 0.5 * (3.0 * y[0]).cos())
            })
            .unwrap();
            let mu = RadonMeasure::from_density(density);
            let x = [rng.gen_range(-2.0..2.0)];
            let t = rng.gen_range(0.05..1.0);
            let v = ev.heat_potential(&mu, &x, t).unwrap();
            let bound = ev.gaussian_decay_bound(m, a, 0.0, &x, t).unwrap();
            assert!(v <= bound * (1.0 + 1e-8), "{v} > {bound}");
        }
    }

    #[test]
    fn decay_bound_small_time_limit() {
        let ev = eval1();
        let (m, a, b) = (1.7, 0.9, 0.5);
        let x = [1.3];
        let v = ev.gaussian_decay_bound(m, a, b, &x, 1e-12).unwrap();
        let limit = m * (-a * (x[0].abs() - b).max(0.0).powi(2)).exp();
        assert!((v - limit).abs() < 1e-9);
    }

    #[test]
    fn potential_monotone_in_measure() {
        let ev = eval1();
        let mu1 = RadonMeasure {
            atoms: vec![Atom {
                location: vec![0.0],
                mass: 1.0,
            }],
            density: None,
        };
        let mu2 = RadonMeasure {
            atoms: vec![
                Atom {
                    location: vec![0.0],
                    mass: 1.5,
                },
                Atom {
                    location: vec![1.0],
                    mass: 0.2,
                },
            ],
            density: None,
        };
        for &x in &[-1.0, 0.0, 0.4, 2.0] {
            let a = ev.heat_potential(&mu1, &[x], 0.3).unwrap();
            let b = ev.heat_potential(&mu2, &[x], 0.3).unwrap();
            assert!(a <= b);
        }
    }

    #[test]
    fn green_potential_constants() {
        let ev = eval1();
        let mk = |t: f64, c: f64| {
            let mut g = GridFunction::from_fn(GridBox::interval(-12.0, 12.0), 0.05, |_| c).unwrap();
            g.time = Some(t);
            g
        };
        let zero: Vec<GridFunction> = (0..11).map(|k| mk(k as f64 * 0.05, 0.0)).collect();
        assert_eq!(ev.green_potential(&zero, &[0.0], 0.5).unwrap(), 0.0);

        let ones: Vec<GridFunction> = (0..11).map(|k| mk(k as f64 * 0.05, 1.0)).collect();
        let v = ev.green_potential(&ones, &[0.0], 0.5).unwrap();
        assert!((v - 0.5).abs() < 1e-4, "got {v}");

        let short: Vec<GridFunction> = (0..3).map(|k| mk(k as f64 * 0.05, 1.0)).collect();
        assert!(matches!(
            ev.green_potential(&short, &[0.0], 0.5),
            Err(Error::IncompleteHistory(_))
        ));
    }

    #[test]
    fn spherical_integral_flat_and_sinh() {
        // N = 2, m = 0: integral of d(theta) over [0, pi]
        let v = spherical_integral(2, 0.0, 1e-12).unwrap();
        assert!((v - PI).abs() < 1e-10);
        // N = 3: closed form 2 sinh(m)/m, so m = 2 gives sinh(2)
        let v = spherical_integral(3, 2.0, 1e-12).unwrap();
        assert!((v - 2.0_f64.sinh()).abs() / 2.0_f64.sinh() < 1e-10, "{v}");
    }

    #[test]
    fn spherical_recursion_n6() {
        // integration by parts: I_N = (N-3)/m^2 [(N-5) I_{N-4} - (N-4) I_{N-2}]
        // for N >= 6
        let m = 5.0;
        let i2 = spherical_integral(2, m, 1e-13).unwrap();
        let i4 = spherical_integral(4, m, 1e-13).unwrap();
        let i6 = spherical_integral(6, m, 1e-13).unwrap();
        let rec = spherical_recursion(6, m, i2, i4);
        assert!((i6 - rec).abs() <= 1e-9 * i6, "{i6} vs {rec}");
    }
}
