//! Core parameter and geometry types shared by all modules.
//!
//! Everything here is immutable after construction and purely geometric:
//! exponent bookkeeping, closed-set descriptions with exact distance
//! queries, grid-sampled functions and Radon measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Problem exponents: dimension `n`, absorption exponent `q`, the conjugate
/// exponent `q_prime = q/(q-1)` and the parabolic critical exponent
/// `q_c = 1 + 2/n`. Single points are removable iff `q >= q_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: usize,
    pub q: f64,
    pub q_prime: f64,
    pub q_c: f64,
    pub supercritical: bool,
}

impl ProblemParams {
    pub fn new(n: usize, q: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("dimension must be >= 1".into()));
        }
        if !(q > 1.0) || !q.is_finite() {
            return Err(Error::InvalidParams(format!("need q > 1, got {q}")));
        }
        let q_c = 1.0 + 2.0 / n as f64;
        Ok(Self {
            n,
            q,
            q_prime: q / (q - 1.0),
            q_c,
            supercritical: q >= q_c,
        })
    }

    /// Fractional smoothness order of the capacity norm, s = 2/q.
    pub fn smoothness(&self) -> f64 {
        2.0 / self.q
    }

    /// Capacity scaling exponent N - 2/(q-1).
    pub fn scaling_exponent(&self) -> f64 {
        self.n as f64 - 2.0 / (self.q - 1.0)
    }
}

/// Geometric description of a closed subset of R^N.
///
/// Membership and distance queries are exact for every primitive variant;
/// Cantor sets are kept symbolic and expanded to interval lists on demand.
/// `FullSpace` is accepted only by the flat-solution oracle; every
/// capacity/potential operation rejects it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum ClosedSetSpec {
    Empty,
    Point {
        center: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Annulus {
        center: Vec<f64>,
        r_in: f64,
        r_out: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    CantorSet {
        interval: [f64; 2],
        ratio: f64,
        depth: usize,
    },
    Union {
        members: Vec<ClosedSetSpec>,
    },
    FullSpace,
}

impl ClosedSetSpec {
    /// 1-D interval [a, b] as a Box.
    pub fn interval(a: f64, b: f64) -> Self {
        ClosedSetSpec::Box {
            lo: vec![a],
            hi: vec![b],
        }
    }

    pub fn point1(x: f64) -> Self {
        ClosedSetSpec::Point { center: vec![x] }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ClosedSetSpec::Empty | ClosedSetSpec::FullSpace => Ok(()),
            ClosedSetSpec::Point { center } => {
                if center.is_empty() {
                    return Err(Error::InvalidParams("point needs coordinates".into()));
                }
                Ok(())
            }
            ClosedSetSpec::Ball { radius, .. } => {
                if *radius < 0.0 {
                    return Err(Error::InvalidParams("ball radius must be >= 0".into()));
                }
                Ok(())
            }
            ClosedSetSpec::Annulus { r_in, r_out, .. } => {
                if *r_in < 0.0 || r_in > r_out {
                    return Err(Error::InvalidParams(
                        "annulus needs 0 <= r_in <= r_out".into(),
                    ));
                }
                Ok(())
            }
            ClosedSetSpec::Box { lo, hi } => {
                if lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| a > b) {
                    return Err(Error::InvalidParams("box needs lo <= hi".into()));
                }
                Ok(())
            }
            ClosedSetSpec::CantorSet {
                interval, ratio, ..
            } => {
                if interval[0] > interval[1] {
                    return Err(Error::InvalidParams("cantor interval reversed".into()));
                }
                if !(*ratio > 0.0 && *ratio < 0.5) {
                    return Err(Error::InvalidParams(
                        "cantor ratio must be in (0, 1/2)".into(),
                    ));
                }
                Ok(())
            }
            ClosedSetSpec::Union { members } => {
                if members.is_empty() {
                    return Err(Error::InvalidParams("union must be non-empty".into()));
                }
                members.iter().try_for_each(|m| m.validate())
            }
        }
    }

    /// Spatial dimension, when the variant carries coordinates.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ClosedSetSpec::Empty | ClosedSetSpec::FullSpace => None,
            ClosedSetSpec::Point { center } => Some(center.len()),
            ClosedSetSpec::Ball { center, .. } => Some(center.len()),
            ClosedSetSpec::Annulus { center, .. } => Some(center.len()),
            ClosedSetSpec::Box { lo, .. } => Some(lo.len()),
            ClosedSetSpec::CantorSet { .. } => Some(1),
            ClosedSetSpec::Union { members } => members.iter().find_map(|m| m.dim()),
        }
    }

    pub fn is_empty_set(&self) -> bool {
        match self {
            ClosedSetSpec::Empty => true,
            ClosedSetSpec::Union { members } => members.iter().all(|m| m.is_empty_set()),
            _ => false,
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            ClosedSetSpec::FullSpace => false,
            ClosedSetSpec::Union { members } => members.iter().all(|m| m.is_bounded()),
            _ => true,
        }
    }

    /// Exact Euclidean distance from `x` to the set. FullSpace gives 0.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            ClosedSetSpec::Empty => f64::INFINITY,
            ClosedSetSpec::FullSpace => 0.0,
            ClosedSetSpec::Point { center } => dist_points(x, center),
            ClosedSetSpec::Ball { center, radius } => (dist_points(x, center) - radius).max(0.0),
            ClosedSetSpec::Annulus {
                center,
                r_in,
                r_out,
            } => {
                let d = dist_points(x, center);
                (r_in - d).max(d - r_out).max(0.0)
            }
            ClosedSetSpec::Box { lo, hi } => {
                let mut s = 0.0;
                for k in 0..lo.len() {
                    let g = (lo[k] - x[k]).max(x[k] - hi[k]).max(0.0);
                    s += g * g;
                }
                s.sqrt()
            }
            ClosedSetSpec::CantorSet { .. } => self
                .cantor_intervals()
                .iter()
                .map(|iv| (iv[0] - x[0]).max(x[0] - iv[1]).max(0.0))
                .fold(f64::INFINITY, f64::min),
            ClosedSetSpec::Union { members } => members
                .iter()
                .map(|m| m.distance(x))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Membership up to the geometric tolerance `eps`.
    pub fn contains(&self, x: &[f64], eps: f64) -> bool {
        self.distance(x) <= eps
    }

    /// D_F(x) = max{|x - y| : y in F}. Errors on unbounded sets; an empty
    /// set yields 0 so that potentials of Empty vanish.
    pub fn diameter_from(&self, x: &[f64]) -> Result<f64> {
        if !self.is_bounded() {
            return Err(Error::UnboundedSet("diameter_from".into()));
        }
        Ok(match self {
            ClosedSetSpec::Empty => 0.0,
            ClosedSetSpec::FullSpace => unreachable!(),
            ClosedSetSpec::Point { center } => dist_points(x, center),
            ClosedSetSpec::Ball { center, radius } => dist_points(x, center) + radius,
            ClosedSetSpec::Annulus { center, r_out, .. } => dist_points(x, center) + r_out,
            ClosedSetSpec::Box { lo, hi } => {
                // farthest point of a box is a corner, componentwise
                let mut s = 0.0;
                for k in 0..lo.len() {
                    let g = (x[k] - lo[k]).abs().max((x[k] - hi[k]).abs());
                    s += g * g;
                }
                s.sqrt()
            }
            ClosedSetSpec::CantorSet { .. } => self
                .cantor_intervals()
                .iter()
                .map(|iv| (x[0] - iv[0]).abs().max((x[0] - iv[1]).abs()))
                .fold(0.0, f64::max),
            ClosedSetSpec::Union { members } => {
                let mut best = 0.0_f64;
                for m in members {
                    if !m.is_empty_set() {
                        best = best.max(m.diameter_from(x)?);
                    }
                }
                best
            }
        })
    }

    /// Retained subintervals of a Cantor set at its stored depth.
    /// Empty for non-Cantor variants.
    pub fn cantor_intervals(&self) -> Vec<[f64; 2]> {
        if let ClosedSetSpec::CantorSet {
            interval,
            ratio,
            depth,
        } = self
        {
            let mut list = vec![*interval];
            for _ in 0..*depth {
                let mut next = Vec::with_capacity(2 * list.len());
                for [a, b] in list {
                    let len = b - a;
                    next.push([a, a + ratio * len]);
                    next.push([b - ratio * len, b]);
                }
                list = next;
            }
            list
        } else {
            Vec::new()
        }
    }

    pub fn translate(&self, v: &[f64]) -> Self {
        let shift = |p: &[f64]| p.iter().zip(v).map(|(a, b)| a + b).collect::<Vec<_>>();
        match self {
            ClosedSetSpec::Empty => ClosedSetSpec::Empty,
            ClosedSetSpec::FullSpace => ClosedSetSpec::FullSpace,
            ClosedSetSpec::Point { center } => ClosedSetSpec::Point {
                center: shift(center),
            },
            ClosedSetSpec::Ball { center, radius } => ClosedSetSpec::Ball {
                center: shift(center),
                radius: *radius,
            },
            ClosedSetSpec::Annulus {
                center,
                r_in,
                r_out,
            } => ClosedSetSpec::Annulus {
                center: shift(center),
                r_in: *r_in,
                r_out: *r_out,
            },
            ClosedSetSpec::Box { lo, hi } => ClosedSetSpec::Box {
                lo: shift(lo),
                hi: shift(hi),
            },
            ClosedSetSpec::CantorSet {
                interval,
                ratio,
                depth,
            } => ClosedSetSpec::CantorSet {
                interval: [interval[0] + v[0], interval[1] + v[0]],
                ratio: *ratio,
                depth: *depth,
            },
            ClosedSetSpec::Union { members } => ClosedSetSpec::Union {
                members: members.iter().map(|m| m.translate(v)).collect(),
            },
        }
    }

    /// Dilation about the origin by `lambda > 0`.
    pub fn scale(&self, lambda: f64) -> Self {
        let sc = |p: &[f64]| p.iter().map(|a| a * lambda).collect::<Vec<_>>();
        match self {
            ClosedSetSpec::Empty => ClosedSetSpec::Empty,
            ClosedSetSpec::FullSpace => ClosedSetSpec::FullSpace,
            ClosedSetSpec::Point { center } => ClosedSetSpec::Point { center: sc(center) },
            ClosedSetSpec::Ball { center, radius } => ClosedSetSpec::Ball {
                center: sc(center),
                radius: radius * lambda,
            },
            ClosedSetSpec::Annulus {
                center,
                r_in,
                r_out,
            } => ClosedSetSpec::Annulus {
                center: sc(center),
                r_in: r_in * lambda,
                r_out: r_out * lambda,
            },
            ClosedSetSpec::Box { lo, hi } => ClosedSetSpec::Box {
                lo: sc(lo),
                hi: sc(hi),
            },
            ClosedSetSpec::CantorSet {
                interval,
                ratio,
                depth,
            } => ClosedSetSpec::CantorSet {
                interval: [interval[0] * lambda, interval[1] * lambda],
                ratio: *ratio,
                depth: *depth,
            },
            ClosedSetSpec::Union { members } => ClosedSetSpec::Union {
                members: members.iter().map(|m| m.scale(lambda)).collect(),
            },
        }
    }

    /// 1-D sets as a sorted, merged interval list (degenerate intervals for
    /// points). Errors for N >= 2 variants.
    pub fn as_intervals(&self) -> Result<Vec<[f64; 2]>> {
        let mut out = Vec::new();
        self.collect_intervals(&mut out)?;
        out.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut merged: Vec<[f64; 2]> = Vec::with_capacity(out.len());
        for iv in out {
            match merged.last_mut() {
                Some(last) if iv[0] <= last[1] => last[1] = last[1].max(iv[1]),
                _ => merged.push(iv),
            }
        }
        Ok(merged)
    }

    fn collect_intervals(&self, out: &mut Vec<[f64; 2]>) -> Result<()> {
        match self {
            ClosedSetSpec::Empty => Ok(()),
            ClosedSetSpec::FullSpace => Err(Error::UnboundedSet("as_intervals".into())),
            ClosedSetSpec::Point { center } if center.len() == 1 => {
                out.push([center[0], center[0]]);
                Ok(())
            }
            ClosedSetSpec::Ball { center, radius } if center.len() == 1 => {
                out.push([center[0] - radius, center[0] + radius]);
                Ok(())
            }
            ClosedSetSpec::Annulus {
                center,
                r_in,
                r_out,
            } if center.len() == 1 => {
                if *r_in == 0.0 {
                    out.push([center[0] - r_out, center[0] + r_out]);
                } else {
                    out.push([center[0] - r_out, center[0] - r_in]);
                    out.push([center[0] + r_in, center[0] + r_out]);
                }
                Ok(())
            }
            ClosedSetSpec::Box { lo, hi } if lo.len() == 1 => {
                out.push([lo[0], hi[0]]);
                Ok(())
            }
            ClosedSetSpec::CantorSet { .. } => {
                out.extend(self.cantor_intervals());
                Ok(())
            }
            ClosedSetSpec::Union { members } => {
                members.iter().try_for_each(|m| m.collect_intervals(out))
            }
            other => Err(Error::UnsupportedGeometry(format!(
                "1-D interval form of {other:?}"
            ))),
        }
    }

    /// Intersection with the closed ball B(center, radius), exact for 1-D
    /// sets and for radially compatible variants in higher dimension.
    pub fn intersect_ball(&self, center: &[f64], radius: f64) -> Result<ClosedSetSpec> {
        if self.is_empty_set() {
            return Ok(ClosedSetSpec::Empty);
        }
        if center.len() == 1 {
            let ivs = self.as_intervals()?;
            let (a, b) = (center[0] - radius, center[0] + radius);
            let clipped: Vec<ClosedSetSpec> = ivs
                .iter()
                .filter_map(|iv| {
                    let lo = iv[0].max(a);
                    let hi = iv[1].min(b);
                    (lo <= hi).then(|| ClosedSetSpec::interval(lo, hi))
                })
                .collect();
            return Ok(union_of(clipped));
        }
        match self {
            ClosedSetSpec::FullSpace => Ok(ClosedSetSpec::Ball {
                center: center.to_vec(),
                radius,
            }),
            ClosedSetSpec::Point { center: p } => {
                if dist_points(p, center) <= radius {
                    Ok(self.clone())
                } else {
                    Ok(ClosedSetSpec::Empty)
                }
            }
            ClosedSetSpec::Union { members } => {
                let parts: Vec<ClosedSetSpec> = members
                    .iter()
                    .map(|m| m.intersect_ball(center, radius))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .filter(|m| !m.is_empty_set())
                    .collect();
                Ok(union_of(parts))
            }
            ClosedSetSpec::Ball {
                center: c,
                radius: r,
            } if dist_points(c, center) == 0.0 => {
                if radius >= *r {
                    Ok(self.clone())
                } else {
                    Ok(ClosedSetSpec::Ball {
                        center: c.clone(),
                        radius,
                    })
                }
            }
            ClosedSetSpec::Annulus {
                center: c,
                r_in,
                r_out,
            } if dist_points(c, center) == 0.0 => {
                if radius < *r_in {
                    Ok(ClosedSetSpec::Empty)
                } else {
                    Ok(ClosedSetSpec::Annulus {
                        center: c.clone(),
                        r_in: *r_in,
                        r_out: r_out.min(radius),
                    })
                }
            }
            other => Err(Error::UnsupportedGeometry(format!(
                "ball intersection with off-center {other:?}"
            ))),
        }
    }

    /// Intersection with the closed annulus {r_in <= |y - center| <= r_out};
    /// same exactness contract as `intersect_ball`.
    pub fn intersect_annulus(
        &self,
        center: &[f64],
        r_in: f64,
        r_out: f64,
    ) -> Result<ClosedSetSpec> {
        if self.is_empty_set() {
            return Ok(ClosedSetSpec::Empty);
        }
        if center.len() == 1 {
            let ivs = self.as_intervals()?;
            let x = center[0];
            let shells = [[x - r_out, x - r_in], [x + r_in, x + r_out]];
            let mut parts = Vec::new();
            for iv in &ivs {
                for sh in &shells {
                    let lo = iv[0].max(sh[0]);
                    let hi = iv[1].min(sh[1]);
                    if lo <= hi {
                        parts.push(ClosedSetSpec::interval(lo, hi));
                    }
                }
            }
            // r_in = 0 makes both shells share the point x
            return Ok(union_of(
                ClosedSetSpec::Union { members: parts }
                    .as_intervals()
                    .map(|ivs| {
                        ivs.into_iter()
                            .map(|iv| ClosedSetSpec::interval(iv[0], iv[1]))
                            .collect::<Vec<_>>()
                    })
                    .unwrap_or_default(),
            ));
        }
        match self {
            ClosedSetSpec::Point { center: p } => {
                let d = dist_points(p, center);
                if d >= r_in && d <= r_out {
                    Ok(self.clone())
                } else {
                    Ok(ClosedSetSpec::Empty)
                }
            }
            ClosedSetSpec::Union { members } => {
                let parts: Vec<ClosedSetSpec> = members
                    .iter()
                    .map(|m| m.intersect_annulus(center, r_in, r_out))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .filter(|m| !m.is_empty_set())
                    .collect();
                Ok(union_of(parts))
            }
            ClosedSetSpec::Ball { center: c, radius } if dist_points(c, center) == 0.0 => {
                if r_in > *radius {
                    Ok(ClosedSetSpec::Empty)
                } else {
                    Ok(ClosedSetSpec::Annulus {
                        center: c.clone(),
                        r_in,
                        r_out: r_out.min(*radius),
                    })
                }
            }
            ClosedSetSpec::Annulus {
                center: c,
                r_in: a,
                r_out: b,
            } if dist_points(c, center) == 0.0 => {
                let lo = a.max(r_in);
                let hi = b.min(r_out);
                if lo > hi {
                    Ok(ClosedSetSpec::Empty)
                } else {
                    Ok(ClosedSetSpec::Annulus {
                        center: c.clone(),
                        r_in: lo,
                        r_out: hi,
                    })
                }
            }
            other => Err(Error::UnsupportedGeometry(format!(
                "annulus intersection with off-center {other:?}"
            ))),
        }
    }

    /// Axis-aligned bounding box, None for Empty/FullSpace.
    pub fn bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            ClosedSetSpec::Empty | ClosedSetSpec::FullSpace => None,
            ClosedSetSpec::Point { center } => Some((center.clone(), center.clone())),
            ClosedSetSpec::Ball { center, radius } => Some((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            ClosedSetSpec::Annulus { center, r_out, .. } => Some((
                center.iter().map(|c| c - r_out).collect(),
                center.iter().map(|c| c + r_out).collect(),
            )),
            ClosedSetSpec::Box { lo, hi } => Some((lo.clone(), hi.clone())),
            ClosedSetSpec::CantorSet { interval, .. } => {
                Some((vec![interval[0]], vec![interval[1]]))
            }
            ClosedSetSpec::Union { members } => {
                let mut acc: Option<(Vec<f64>, Vec<f64>)> = None;
                for m in members {
                    if let Some((lo, hi)) = m.bounds() {
                        acc = Some(match acc {
                            None => (lo, hi),
                            Some((alo, ahi)) => (
                                alo.iter().zip(&lo).map(|(a, b)| a.min(*b)).collect(),
                                ahi.iter().zip(&hi).map(|(a, b)| a.max(*b)).collect(),
                            ),
                        });
                    }
                }
                acc
            }
        }
    }
}

fn union_of(mut members: Vec<ClosedSetSpec>) -> ClosedSetSpec {
    members.retain(|m| !m.is_empty_set());
    match members.len() {
        0 => ClosedSetSpec::Empty,
        1 => members.pop().unwrap(),
        _ => ClosedSetSpec::Union { members },
    }
}

pub fn dist_points(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Axis-aligned computational box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl GridBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(Error::InvalidParams("grid box needs lo < hi".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn interval(a: f64, b: f64) -> Self {
        Self {
            lo: vec![a],
            hi: vec![b],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn diameter(&self) -> f64 {
        dist_points(&self.lo, &self.hi)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    /// Membership tie-break tolerance: 1e-12 of the box diameter.
    pub fn geometric_eps(&self) -> f64 {
        1e-12 * self.diameter()
    }
}

/// Real values on a uniform, cell-centered tensor grid over a box.
/// Node k along axis j sits at lo_j + (k + 1/2) h, so integrals are plain
/// midpoint sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub domain: GridBox,
    pub h: f64,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
    pub time: Option<f64>,
}

impl GridFunction {
    pub fn zeros(domain: GridBox, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidParams("grid spacing must be > 0".into()));
        }
        let shape: Vec<usize> = domain
            .lo
            .iter()
            .zip(&domain.hi)
            .map(|(a, b)| (((b - a) / h).round() as usize).max(1))
            .collect();
        let len = shape.iter().product();
        Ok(Self {
            domain,
            h,
            shape,
            values: vec![0.0; len],
            time: None,
        })
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(domain: GridBox, h: f64, f: F) -> Result<Self> {
        let mut g = Self::zeros(domain, h)?;
        let mut x = vec![0.0; g.shape.len()];
        for i in 0..g.values.len() {
            g.node(i, &mut x);
            g.values[i] = f(&x);
        }
        g.check_finite()?;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coordinates of the flat node index, written into `out`.
    pub fn node(&self, mut idx: usize, out: &mut [f64]) {
        for ax in (0..self.shape.len()).rev() {
            let k = idx % self.shape[ax];
            idx /= self.shape[ax];
            out[ax] = self.domain.lo[ax] + (k as f64 + 0.5) * self.h;
        }
    }

    /// Midpoint-rule integral over the box.
    pub fn integral(&self) -> f64 {
        let cell = self.h.powi(self.shape.len() as i32);
        self.values.iter().sum::<f64>() * cell
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Value at the grid node nearest to `x` (x must lie in the box).
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let mut idx = 0;
        for ax in 0..self.shape.len() {
            let k = (((x[ax] - self.domain.lo[ax]) / self.h - 0.5).round() as isize)
                .clamp(0, self.shape[ax] as isize - 1) as usize;
            idx = idx * self.shape[ax] + k;
        }
        self.values[idx]
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(
                "grid function has non-finite values".into(),
            ));
        }
        Ok(())
    }

    pub fn check_nonnegative(&self) -> Result<()> {
        if self.min_value() < 0.0 {
            return Err(Error::InvalidParams(format!(
                "grid function has negative minimum {}",
                self.min_value()
            )));
        }
        Ok(())
    }
}

/// Point mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: Vec<f64>,
    pub mass: f64,
}

/// Nonnegative Radon measure: atoms plus an optional grid density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RadonMeasure {
    pub atoms: Vec<Atom>,
    pub density: Option<GridFunction>,
}

impl RadonMeasure {
    pub fn dirac(location: Vec<f64>, mass: f64) -> Self {
        Self {
            atoms: vec![Atom { location, mass }],
            density: None,
        }
    }

    pub fn from_density(density: GridFunction) -> Self {
        Self {
            atoms: Vec::new(),
            density: Some(density),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .atoms
            .iter()
            .any(|a| a.mass < 0.0 || !a.mass.is_finite())
        {
            return Err(Error::InvalidParams("atom masses must be >= 0".into()));
        }
        if let Some(d) = &self.density {
            d.check_finite()?;
            d.check_nonnegative()?;
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass).sum();
        atoms + self.density.as_ref().map_or(0.0, |d| d.integral())
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let mut m = self.clone();
        for a in &mut m.atoms {
            a.mass *= lambda;
        }
        if let Some(d) = &mut m.density {
            for v in &mut d.values {
                *v *= lambda;
            }
        }
        m
    }
}

/// How a capacity value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CapacityMethod {
    ClosedFormScaling,
    VariationalNumeric,
    MonotoneBound,
}

/// Capacity value with a two-sided bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub value: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub method: CapacityMethod,
}

impl CapacityEstimate {
    pub fn exact(value: f64, method: CapacityMethod) -> Self {
        Self {
            value,
            bracket_lo: value,
            bracket_hi: value,
            method,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.bracket_lo
            && self.bracket_lo <= self.value
            && self.value <= self.bracket_hi)
        {
            return Err(Error::InvalidParams(format!(
                "capacity bracket violated: {} <= {} <= {}",
                self.bracket_lo, self.value, self.bracket_hi
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn params_conjugate_exponent() {
        let p = ProblemParams::new(1, 4.0).unwrap();
        assert!((1.0 / p.q + 1.0 / p.q_prime - 1.0).abs() < 1e-15);
        assert!((p.q_c - 3.0).abs() < 1e-15);
        assert!(p.supercritical);
        let p = ProblemParams::new(2, 1.5).unwrap();
        assert!((p.q_c - 2.0).abs() < 1e-15);
        assert!(!p.supercritical);
    }

    #[test]
    fn dist_ball_interior_and_exterior() {
        let ball = ClosedSetSpec::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        assert_eq!(ball.distance(&[0.0, 0.0]), 0.0);
        assert!((ball.distance(&[2.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dist_cantor_matches_depth2_enumeration() {
        // depth-2 middle-third Cantor intervals on [0,1]:
        // [0,1/9],[2/9,1/3],[2/3,7/9],[8/9,1]
        let c = ClosedSetSpec::CantorSet {
            interval: [0.0, 1.0],
            ratio: 1.0 / 3.0,
            depth: 2,
        };
        let enumerated = [
            [0.0, 1.0 / 9.0],
            [2.0 / 9.0, 1.0 / 3.0],
            [2.0 / 3.0, 7.0 / 9.0],
            [8.0 / 9.0, 1.0],
        ];
        assert_eq!(c.cantor_intervals().len(), 4);
        for (got, want) in c.cantor_intervals().iter().zip(&enumerated) {
            assert!((got[0] - want[0]).abs() < 1e-15 && (got[1] - want[1]).abs() < 1e-15);
        }
        let brute = |x: f64| {
            enumerated
                .iter()
                .map(|iv| (iv[0] - x).max(x - iv[1]).max(0.0))
                .fold(f64::INFINITY, f64::min)
        };
        for &x in &[0.5, 0.15, 0.99, -0.3, 0.4] {
            assert!((c.distance(&[x]) - brute(x)).abs() < 1e-15, "x = {x}");
        }
    }

    #[test]
    fn diameter_examples() {
        let p = ClosedSetSpec::point1(3.0);
        assert!((p.diameter_from(&[0.0]).unwrap() - 3.0).abs() < 1e-15);

        let ball = ClosedSetSpec::Ball {
            center: vec![2.0, 0.0],
            radius: 1.0,
        };
        assert!((ball.diameter_from(&[0.0, 0.0]).unwrap() - 3.0).abs() < 1e-15);

        let u = ClosedSetSpec::Union {
            members: vec![ClosedSetSpec::point1(1.0), ClosedSetSpec::point1(-4.0)],
        };
        assert!((u.diameter_from(&[0.0]).unwrap() - 4.0).abs() < 1e-15);

        assert!(matches!(
            ClosedSetSpec::FullSpace.diameter_from(&[0.0]),
            Err(Error::UnboundedSet(_))
        ));
    }

    #[test]
    fn dist_below_diameter_and_translation_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sets = [
            ClosedSetSpec::interval(-1.0, 1.0),
            ClosedSetSpec::point1(0.3),
            ClosedSetSpec::Annulus {
                center: vec![0.5],
                r_in: 0.2,
                r_out: 0.9,
            },
            ClosedSetSpec::CantorSet {
                interval: [-1.0, 2.0],
                ratio: 0.4,
                depth: 3,
            },
        ];
        for set in &sets {
            for _ in 0..50 {
                let x = [rng.gen_range(-3.0..3.0)];
                let v = [rng.gen_range(-2.0..2.0)];
                let d = set.distance(&x);
                let diam = set.diameter_from(&x).unwrap();
                assert!(d <= diam + 1e-12);
                let shifted = set.translate(&v);
                let xs = [x[0] + v[0]];
                assert!((shifted.distance(&xs) - d).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn interval_form_merges_overlaps() {
        let u = ClosedSetSpec::Union {
            members: vec![
                ClosedSetSpec::interval(0.0, 1.0),
                ClosedSetSpec::interval(0.5, 2.0),
                ClosedSetSpec::point1(5.0),
            ],
        };
        let ivs = u.as_intervals().unwrap();
        assert_eq!(ivs.len(), 2);
        assert_eq!(ivs[0], [0.0, 2.0]);
        assert_eq!(ivs[1], [5.0, 5.0]);
    }

    #[test]
    fn annulus_intersection_1d() {
        // [-1,1] sliced by the shell {0.5 <= |y| <= 1.5} around 0 keeps
        // [-1,-0.5] and [0.5,1]
        let f = ClosedSetSpec::interval(-1.0, 1.0);
        let s = f.intersect_annulus(&[0.0], 0.5, 1.5).unwrap();
        let ivs = s.as_intervals().unwrap();
        assert_eq!(ivs.len(), 2);
        assert!((ivs[0][0] + 1.0).abs() < 1e-15 && (ivs[0][1] + 0.5).abs() < 1e-15);
        assert!((ivs[1][0] - 0.5).abs() < 1e-15 && (ivs[1][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_function_midpoint_integral() {
        let g = GridFunction::from_fn(GridBox::interval(0.0, 1.0), 0.01, |_| 2.0).unwrap();
        assert!((g.integral() - 2.0).abs() < 1e-12);
        let lin = GridFunction::from_fn(GridBox::interval(0.0, 1.0), 0.01, |x| x[0]).unwrap();
        // midpoint rule is exact for linear integrands
        assert!((lin.integral() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn measure_mass() {
        let mut m = RadonMeasure::dirac(vec![0.0], 2.0);
        m.density =
            Some(GridFunction::from_fn(GridBox::interval(-1.0, 1.0), 0.01, |_| 0.5).unwrap());
        assert!((m.total_mass() - 3.0).abs() < 1e-12);
        m.validate().unwrap();
    }

    #[test]
    fn closed_set_json_roundtrip() {
        let set = ClosedSetSpec::Union {
            members: vec![
                ClosedSetSpec::Ball {
                    center: vec![0.0],
                    radius: 1.0,
                },
                ClosedSetSpec::CantorSet {
                    interval: [0.0, 1.0],
                    ratio: 0.3,
                    depth: 2,
                },
            ],
        };
        let text = serde_json::to_string(&set).unwrap();
        assert!(text.contains("\"variant\":\"Union\""), "{text}");
        let back: ClosedSetSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(set, back);
    }
}
