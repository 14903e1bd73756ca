//! Smooth coordinate changes between an unbounded interval and `[-1, 1]`.
//!
//! Every unbounded interval used by the crate is carried to the reference
//! interval by a [`CompactMap`]. Limits at infinity become plain endpoint
//! evaluations at `x = ±1`, suprema over the interval become suprema over a
//! compact set, and integrals become finite-domain integrals weighted by the
//! Jacobian `dt/dx`.
//!
//! Two maps are provided:
//!
//! * full line: `t = L x / sqrt(1 - x^2)`
//! * half line from `a`: `t = a + L (1 + x) / (1 - x)`
//!
//! Both are smooth, strictly increasing and have closed-form inverses.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A point of the extended real line `[-inf, +inf]`.
///
/// Infinities are dedicated variants and are never stored as large floats.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Lossy conversion for output; infinities become IEEE infinities.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtReal::PosInf
        } else if v == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(v)
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "+inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::NegInf => s.serialize_str("-inf"),
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PosInf => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtReal::Finite(v)),
            Repr::Str(s) => match s.as_str() {
                "+inf" | "inf" => Ok(ExtReal::PosInf),
                "-inf" => Ok(ExtReal::NegInf),
                other => Err(serde::de::Error::custom(format!("bad extended real {other:?}"))),
            },
        }
    }
}

/// Which unbounded interval a map compactifies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Interval {
    FullLine,
    HalfLine { a: f64 },
}

/// Side of the interval, used for limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// Smooth increasing bijection between `(-1, 1)` and an unbounded interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompactMap {
    interval: Interval,
    scale: f64,
}

impl CompactMap {
    pub fn new(interval: Interval, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(format!("map scale must be positive, got {scale}")));
        }
        if let Interval::HalfLine { a } = interval {
            if !a.is_finite() {
                return Err(Error::invalid("half-line endpoint must be finite"));
            }
        }
        Ok(CompactMap { interval, scale })
    }

    pub fn full_line(scale: f64) -> Result<Self> {
        Self::new(Interval::FullLine, scale)
    }

    pub fn half_line(a: f64, scale: f64) -> Result<Self> {
        Self::new(Interval::HalfLine { a }, scale)
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn lower(&self) -> ExtReal {
        match self.interval {
            Interval::FullLine => ExtReal::NegInf,
            Interval::HalfLine { a } => ExtReal::Finite(a),
        }
    }

    pub fn upper(&self) -> ExtReal {
        ExtReal::PosInf
    }

    pub fn endpoint(&self, side: Side) -> ExtReal {
        match side {
            Side::Lower => self.lower(),
            Side::Upper => self.upper(),
        }
    }

    pub fn contains(&self, t: ExtReal) -> bool {
        match (self.interval, t) {
            (_, ExtReal::Finite(v)) if v.is_nan() => false,
            (Interval::FullLine, _) => true,
            (Interval::HalfLine { .. }, ExtReal::NegInf) => false,
            (Interval::HalfLine { a }, ExtReal::Finite(v)) => v >= a,
            (Interval::HalfLine { .. }, ExtReal::PosInf) => true,
        }
    }

    pub fn to_compact(&self, t: ExtReal) -> Result<f64> {
        if !self.contains(t) {
            return Err(Error::domain(format!("t = {t} outside {:?}", self.interval)));
        }
        Ok(match t {
            ExtReal::NegInf => -1.0,
            ExtReal::PosInf => 1.0,
            ExtReal::Finite(v) => self.x_of(v),
        })
    }

    pub fn from_compact(&self, x: f64) -> Result<ExtReal> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("x = {x} outside [-1, 1]")));
        }
        Ok(if x == 1.0 {
            ExtReal::PosInf
        } else if x == -1.0 {
            self.lower()
        } else {
            ExtReal::Finite(self.t_of(x))
        })
    }

    /// `t(x)` for `|x| < 1`; returns IEEE infinities at the ends.
    #[inline]
    pub fn t_of(&self, x: f64) -> f64 {
        let l = self.scale;
        match self.interval {
            Interval::FullLine => {
                if x >= 1.0 {
                    return f64::INFINITY;
                }
                if x <= -1.0 {
                    return f64::NEG_INFINITY;
                }
                l * x / ((1.0 - x) * (1.0 + x)).sqrt()
            }
            Interval::HalfLine { a } => {
                if x >= 1.0 {
                    return f64::INFINITY;
                }
                a + l * (1.0 + x) / (1.0 - x)
            }
        }
    }

    /// `x(t)` for finite `t` in the interval.
    #[inline]
    pub fn x_of(&self, t: f64) -> f64 {
        let l = self.scale;
        match self.interval {
            Interval::FullLine => t / l.hypot(t),
            Interval::HalfLine { a } => {
                let d = t - a;
                (d - l) / (d + l)
            }
        }
    }

    /// `dt/dx` for `|x| < 1`.
    #[inline]
    pub fn jacobian(&self, x: f64) -> f64 {
        let l = self.scale;
        match self.interval {
            Interval::FullLine => {
                let w = (1.0 - x) * (1.0 + x);
                l / (w * w.sqrt())
            }
            Interval::HalfLine { .. } => {
                let w = 1.0 - x;
                2.0 * l / (w * w)
            }
        }
    }

    /// Points approaching an endpoint, `x = ±(1 - 10^-k)` for `k = 1..=14`,
    /// used to read off limits. Finite endpoints yield a single point.
    pub fn tail_points(&self, side: Side) -> Vec<f64> {
        match (side, self.interval) {
            (Side::Lower, Interval::HalfLine { a }) => vec![a],
            (side, _) => {
                let sign = if side == Side::Upper { 1.0 } else { -1.0 };
                (1..=14)
                    .map(|k| self.t_of(sign * (1.0 - 10f64.powi(-k))))
                    .collect()
            }
        }
    }
}

/// Node placement for grids on `[-1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    ChebyshevLobatto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub m: usize,
    pub placement: Placement,
}

impl GridSpec {
    pub const MIN_NODES: usize = 8;

    pub fn chebyshev(m: usize) -> Self {
        GridSpec { m, placement: Placement::ChebyshevLobatto }
    }
}

/// Chebyshev–Lobatto nodes in compact coordinates together with their
/// images in `t` and barycentric weights.
#[derive(Clone, Debug)]
pub struct Grid {
    map: CompactMap,
    x: Vec<f64>,
    t: Vec<ExtReal>,
    bary: Vec<f64>,
}

pub fn build_grid(map: CompactMap, spec: GridSpec) -> Result<Grid> {
    let m = spec.m;
    if m < GridSpec::MIN_NODES {
        return Err(Error::invalid(format!(
            "grid needs at least {} nodes, got {m}",
            GridSpec::MIN_NODES
        )));
    }
    let n = (m - 1) as f64;
    // sin form keeps the node set exactly symmetric about 0
    let x: Vec<f64> = (0..m)
        .map(|j| {
            let k = 2 * j as i64 - (m as i64 - 1);
            (PI * k as f64 / (2.0 * n)).sin()
        })
        .collect();
    let t = x
        .iter()
        .map(|&xi| map.from_compact(xi))
        .collect::<Result<Vec<_>>>()?;
    let bary = (0..m)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == m - 1 {
                0.5 * sign
            } else {
                sign
            }
        })
        .collect();
    Ok(Grid { map, x, t, bary })
}

impl Grid {
    pub fn new(map: CompactMap, m: usize) -> Result<Self> {
        build_grid(map, GridSpec::chebyshev(m))
    }

    pub fn map(&self) -> &CompactMap {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn t(&self) -> &[ExtReal] {
        &self.t
    }

    pub fn barycentric_weights(&self) -> &[f64] {
        &self.bary
    }

    /// Barycentric interpolation of nodal `samples` at compact coordinate `x`.
    pub fn interpolate(&self, samples: &[f64], x: f64) -> Result<f64> {
        if samples.len() != self.x.len() {
            return Err(Error::invalid(format!(
                "expected {} samples, got {}",
                self.x.len(),
                samples.len()
            )));
        }
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("query x = {x} outside [-1, 1]")));
        }
        Ok(barycentric(&self.x, &self.bary, samples, x))
    }

    /// Unchecked interpolation for hot loops; `x` must lie in `[-1, 1]`.
    #[inline]
    pub(crate) fn interp_unchecked(&self, samples: &[f64], x: f64) -> f64 {
        barycentric(&self.x, &self.bary, samples, x)
    }
}

/// Second (true) barycentric formula. Exact at the nodes and reproduces
/// constants exactly.
pub fn barycentric(nodes: &[f64], weights: &[f64], values: &[f64], x: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&xj, &wj), &fj) in nodes.iter().zip(weights).zip(values) {
        let d = x - xj;
        if d == 0.0 {
            return fj;
        }
        let c = wj / d;
        num += c * fj;
        den += c;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_line_origin_and_unit() {
        let map = CompactMap::full_line(1.0).unwrap();
        assert_eq!(map.to_compact(ExtReal::Finite(0.0)).unwrap(), 0.0);
        let x = map.to_compact(ExtReal::Finite(1.0)).unwrap();
        assert!((x - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(map.from_compact(0.0).unwrap(), ExtReal::Finite(0.0));
        let t = map.from_compact(0.6).unwrap().finite().unwrap();
        assert!((t - 0.75).abs() < 1e-15);
    }

    #[test]
    fn endpoints_are_sentinels() {
        let half = CompactMap::half_line(0.0, 3.0).unwrap();
        assert_eq!(half.to_compact(ExtReal::PosInf).unwrap(), 1.0);
        assert_eq!(half.from_compact(1.0).unwrap(), ExtReal::PosInf);
        assert_eq!(half.from_compact(-1.0).unwrap(), ExtReal::Finite(0.0));
        let full = CompactMap::full_line(1.0).unwrap();
        assert_eq!(full.from_compact(-1.0).unwrap(), ExtReal::NegInf);
        assert_eq!(full.to_compact(ExtReal::NegInf).unwrap(), -1.0);
    }

    #[test]
    fn domain_errors() {
        let half = CompactMap::half_line(0.0, 1.0).unwrap();
        assert!(half.to_compact(ExtReal::Finite(-0.5)).is_err());
        assert!(half.to_compact(ExtReal::NegInf).is_err());
        assert!(half.from_compact(1.5).is_err());
        assert!(CompactMap::full_line(0.0).is_err());
    }

    #[test]
    fn grid_precondition_and_endpoints() {
        let half = CompactMap::half_line(0.0, 1.0).unwrap();
        assert!(Grid::new(half, 2).is_err());
        let g = Grid::new(half, 9).unwrap();
        assert_eq!(g.t()[0], ExtReal::Finite(0.0));
        assert_eq!(g.t()[8], ExtReal::PosInf);
        assert!(g.x().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn full_line_grid_is_symmetric() {
        let g = Grid::new(CompactMap::full_line(1.0).unwrap(), 33).unwrap();
        let t = g.t();
        assert_eq!(t[0], ExtReal::NegInf);
        assert_eq!(t[32], ExtReal::PosInf);
        for j in 1..32 {
            let a = t[j].finite().unwrap();
            let b = t[32 - j].finite().unwrap();
            assert_eq!(a, -b);
        }
        assert_eq!(t[16], ExtReal::Finite(0.0));
    }

    #[test]
    fn interpolation_basics() {
        let g = Grid::new(CompactMap::half_line(0.0, 1.0).unwrap(), 9).unwrap();
        let c = vec![3.5; 9];
        for &x in &[-1.0, -0.37, 0.0, 0.81, 1.0] {
            assert!((g.interpolate(&c, x).unwrap() - 3.5).abs() <= 4.0 * f64::EPSILON * 3.5);
        }
        let sq: Vec<f64> = g.x().iter().map(|x| x * x).collect();
        assert!((g.interpolate(&sq, 0.3).unwrap() - 0.09).abs() < 1e-13);
        let ratio: Vec<f64> = g
            .t()
            .iter()
            .map(|t| match t {
                ExtReal::Finite(t) => t / (t + 1.0),
                _ => 1.0,
            })
            .collect();
        for (j, &x) in g.x().iter().enumerate() {
            assert_eq!(g.interpolate(&ratio, x).unwrap(), ratio[j]);
        }
        assert!(g.interpolate(&c, 1.01).is_err());
    }

    #[test]
    fn jacobian_matches_central_difference() {
        for map in [
            CompactMap::full_line(1.0).unwrap(),
            CompactMap::half_line(-2.0, 4.0).unwrap(),
        ] {
            let h = 1e-5;
            let mut x = -0.9;
            while x <= 0.9 {
                let fd = (map.t_of(x + h) - map.t_of(x - h)) / (2.0 * h);
                let jac = map.jacobian(x);
                assert!(((fd - jac) / jac).abs() < 1e-6, "x = {x}");
                x += 0.05;
            }
        }
    }
}
