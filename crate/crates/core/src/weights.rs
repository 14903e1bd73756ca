//! Strictly positive weight functions and the weight-equivalence check.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::compactline::{CompactMap, ExtReal, Grid, Side};
use crate::error::{Error, Result};
use crate::limits::{tail_limit, TailBehavior};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Constant(f64),
    Affine(f64),
    Exponential(f64),
    Power(f64),
    Scaled(f64, Box<Weight>),
    Custom {
        name: String,
        value: ScalarFn,
        derivatives: Vec<ScalarFn>,
    },
}

/// A strictly positive weight `φ`.
///
/// Built-ins: `constant(v)`, `affine(b)` giving `t + b`, `exponential(c)`
/// giving `c·e^t`, and `power(q)` giving `(1 + t²)^(q/2)`, which is smooth on
/// the whole line and behaves like `|t|^q` at infinity.
#[derive(Clone)]
pub struct Weight {
    kind: Kind,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Weight {
    pub fn constant(v: f64) -> Result<Self> {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(format!("constant weight must be positive, got {v}")));
        }
        Ok(Weight { kind: Kind::Constant(v) })
    }

    pub fn affine(b: f64) -> Self {
        Weight { kind: Kind::Affine(b) }
    }

    pub fn exponential(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!("exponential weight needs c > 0, got {c}")));
        }
        Ok(Weight { kind: Kind::Exponential(c) })
    }

    pub fn power(q: f64) -> Self {
        Weight { kind: Kind::Power(q) }
    }

    pub fn custom(name: impl Into<String>, value: ScalarFn, derivatives: Vec<ScalarFn>) -> Self {
        Weight {
            kind: Kind::Custom {
                name: name.into(),
                value,
                derivatives,
            },
        }
    }

    pub fn scaled(self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::invalid(format!("scale factor must be positive, got {factor}")));
        }
        Ok(Weight { kind: Kind::Scaled(factor, Box::new(self)) })
    }

    pub fn label(&self) -> String {
        match &self.kind {
            Kind::Constant(v) => format!("constant({v})"),
            Kind::Affine(b) => format!("affine({b})"),
            Kind::Exponential(c) => format!("exponential({c})"),
            Kind::Power(q) => format!("power({q})"),
            Kind::Scaled(k, w) => format!("{k}*{}", w.label()),
            Kind::Custom { name, .. } => format!("custom({name})"),
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Constant(v) => *v,
            Kind::Affine(b) => t + b,
            Kind::Exponential(c) => c * t.exp(),
            Kind::Power(q) => (1.0 + t * t).powf(0.5 * q),
            Kind::Scaled(k, w) => k * w.eval(t),
            Kind::Custom { value, .. } => value(t),
        }
    }

    /// `ln φ(t)`, finite even where `φ` itself overflows.
    #[inline]
    pub fn ln_eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Constant(v) => v.ln(),
            Kind::Affine(b) => (t + b).ln(),
            Kind::Exponential(c) => c.ln() + t,
            Kind::Power(q) => 0.5 * q * (t * t).ln_1p(),
            Kind::Scaled(k, w) => k.ln() + w.ln_eval(t),
            Kind::Custom { value, .. } => value(t).ln(),
        }
    }

    /// `φ(t) / other(t)` computed in log space.
    #[inline]
    pub fn ratio(&self, other: &Weight, t: f64) -> f64 {
        // two multiples of eᵗ: far out `ln c + t` has lost the constant
        if let (Some(a), Some(b)) = (self.ln_exp_factor(), other.ln_exp_factor()) {
            return (a - b).exp();
        }
        (self.ln_eval(t) - other.ln_eval(t)).exp()
    }

    /// `ln k` when `φ = k eᵗ`.
    fn ln_exp_factor(&self) -> Option<f64> {
        match &self.kind {
            Kind::Exponential(c) => Some(c.ln()),
            Kind::Scaled(k, w) => w.ln_exp_factor().map(|f| f + k.ln()),
            _ => None,
        }
    }

    /// `φ^(j)(t)` when a closed form (or a supplied evaluator) exists.
    pub fn derivative(&self, j: usize, t: f64) -> Option<f64> {
        if j == 0 {
            return Some(self.eval(t));
        }
        match &self.kind {
            Kind::Constant(_) => Some(0.0),
            Kind::Affine(_) => Some(if j == 1 { 1.0 } else { 0.0 }),
            Kind::Exponential(c) => Some(c * t.exp()),
            Kind::Power(q) => {
                let s = 1.0 + t * t;
                match j {
                    1 => Some(q * t * s.powf(0.5 * q - 1.0)),
                    2 => Some(q * s.powf(0.5 * q - 2.0) * (s + (q - 2.0) * t * t)),
                    _ => None,
                }
            }
            Kind::Scaled(k, w) => w.derivative(j, t).map(|d| k * d),
            Kind::Custom { derivatives, .. } => derivatives.get(j - 1).map(|d| d(t)),
        }
    }

    /// `(1/φ)^(j)(t)` from the derivatives of `φ`.
    pub fn recip_derivative(&self, j: usize, t: f64) -> Option<f64> {
        let phi = self.eval(t);
        let mut r = vec![1.0 / phi];
        for m in 1..=j {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for i in 1..=m {
                binom = binom * (m - i + 1) as f64 / i as f64;
                acc += binom * self.derivative(i, t)? * r[m - i];
            }
            r.push(-acc / phi);
        }
        Some(r[j])
    }

    /// `lim φ(t)` at an endpoint when it is finite.
    pub fn endpoint_limit(&self, t: ExtReal, map: &CompactMap) -> Option<f64> {
        match t {
            ExtReal::Finite(v) => Some(self.eval(v)),
            ExtReal::PosInf | ExtReal::NegInf => match &self.kind {
                Kind::Constant(v) => Some(*v),
                Kind::Affine(_) => None,
                Kind::Exponential(_) => (t == ExtReal::NegInf).then_some(0.0),
                Kind::Power(q) if *q == 0.0 => Some(1.0),
                Kind::Power(q) if *q < 0.0 => Some(0.0),
                Kind::Power(_) => None,
                Kind::Scaled(k, w) => w.endpoint_limit(t, map).map(|v| k * v),
                Kind::Custom { value, .. } => {
                    let side = if t == ExtReal::PosInf { Side::Upper } else { Side::Lower };
                    tail_limit(map, side, |s| value(s)).limit()
                }
            },
        }
    }

    /// Positivity on the grid nodes and along both tails.
    pub fn check_positive(&self, grid: &Grid) -> Result<()> {
        let map = grid.map();
        let mut ts: Vec<f64> = grid.t().iter().filter_map(|t| t.finite()).collect();
        ts.extend(map.tail_points(Side::Upper));
        if map.lower().finite().is_none() {
            ts.extend(map.tail_points(Side::Lower));
        }
        for t in ts {
            if !(self.ln_eval(t) > f64::NEG_INFINITY) {
                return Err(Error::domain(format!("weight {} not positive at t = {t}", self.label())));
            }
        }
        Ok(())
    }
}

/// Serializable description of a built-in weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant { value: f64 },
    Affine { b: f64 },
    Exponential { c: f64 },
    Power { q: f64 },
}

impl WeightSpec {
    pub fn build(&self) -> Result<Weight> {
        match *self {
            WeightSpec::Constant { value } => Weight::constant(value),
            WeightSpec::Affine { b } => Ok(Weight::affine(b)),
            WeightSpec::Exponential { c } => Weight::exponential(c),
            WeightSpec::Power { q } => Ok(Weight::power(q)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub verdict: Verdict,
    /// limit of `φ1/φ2` at the lower end (0 or +inf when degenerate, NaN when unsettled)
    pub lower_limit: f64,
    pub upper_limit: f64,
}

/// Lower bound for the ratio `φ1/φ2` to count as bounded away from 0.
pub const RATIO_FLOOR: f64 = 1e-8;
/// Upper bound for the ratio to count as bounded away from infinity.
pub const RATIO_CEIL: f64 = 1e8;

/// Order-0 equivalence of two weights on the interval of `grid`: both
/// endpoint limits of `φ1/φ2` exist, are finite and positive, and the ratio
/// stays in `[1e-8, 1e8]` at every node. Orders `n ≥ 1` are reported as
/// inconclusive.
pub fn weights_equivalent(phi1: &Weight, phi2: &Weight, grid: &Grid, order: usize) -> Equivalence {
    let map = grid.map();
    let ratio = |t: f64| phi1.ratio(phi2, t);
    let limit_of = |side: Side| match tail_limit(map, side, ratio) {
        TailBehavior::Limit(v) => v,
        TailBehavior::Diverges => f64::INFINITY,
        TailBehavior::Unsettled => f64::NAN,
    };
    let lower_limit = limit_of(Side::Lower);
    let upper_limit = limit_of(Side::Upper);

    let mut verdict = Verdict::Equivalent;
    let limit_ok = |v: f64| v.is_finite() && (RATIO_FLOOR..=RATIO_CEIL).contains(&v);
    for v in [lower_limit, upper_limit] {
        if v.is_nan() {
            verdict = Verdict::Inconclusive;
        } else if !limit_ok(v) && verdict == Verdict::Equivalent {
            verdict = Verdict::NotEquivalent;
        }
    }
    for t in grid.t().iter().filter_map(|t| t.finite()) {
        let r = ratio(t);
        if r.is_nan() {
            verdict = Verdict::Inconclusive;
        } else if !limit_ok(r) && verdict == Verdict::Equivalent {
            verdict = Verdict::NotEquivalent;
        }
    }
    if order >= 1 && verdict == Verdict::Equivalent {
        verdict = Verdict::Inconclusive;
    }
    Equivalence { verdict, lower_limit, upper_limit }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_grid() -> Grid {
        Grid::new(CompactMap::half_line(0.0, 1.0).unwrap(), 33).unwrap()
    }

    #[test]
    fn identical_and_scaled() {
        let g = half_grid();
        let phi = Weight::affine(1.0);
        let e = weights_equivalent(&phi, &phi, &g, 0);
        assert_eq!(e.verdict, Verdict::Equivalent);
        assert_eq!((e.lower_limit, e.upper_limit), (1.0, 1.0));
        let e = weights_equivalent(&phi, &phi.clone().scaled(2.0).unwrap(), &g, 0);
        assert_eq!(e.verdict, Verdict::Equivalent);
        assert!((e.lower_limit - 0.5).abs() < 1e-15 && (e.upper_limit - 0.5).abs() < 1e-15);
    }

    #[test]
    fn affine_vs_exponential() {
        let e = weights_equivalent(&Weight::affine(1.0), &Weight::exponential(1.0).unwrap(), &half_grid(), 0);
        assert_eq!(e.verdict, Verdict::NotEquivalent);
        assert_eq!(e.upper_limit, 0.0);
    }

    #[test]
    fn exponential_multiples() {
        let e = weights_equivalent(&Weight::exponential(1.0).unwrap(), &Weight::exponential(2.0).unwrap(), &half_grid(), 0);
        assert_eq!(e.verdict, Verdict::Equivalent);
        assert!((e.upper_limit - 0.5).abs() < 1e-15);
    }

    #[test]
    fn higher_orders_inconclusive() {
        let phi = Weight::affine(1.0);
        assert_eq!(weights_equivalent(&phi, &phi, &half_grid(), 1).verdict, Verdict::Inconclusive);
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        let ws = [
            Weight::affine(2.0),
            Weight::exponential(0.5).unwrap(),
            Weight::power(1.5),
            Weight::power(-0.5).scaled(3.0).unwrap(),
        ];
        let h = 1e-5;
        for w in &ws {
            for &t in &[0.3, 1.0, 2.7, 6.0] {
                for j in 1..=2 {
                    let fd = (w.derivative(j - 1, t + h).unwrap() - w.derivative(j - 1, t - h).unwrap()) / (2.0 * h);
                    let d = w.derivative(j, t).unwrap();
                    assert!((fd - d).abs() <= 1e-6 * d.abs().max(1e-3), "{w:?} j={j} t={t}");
                }
            }
        }
    }

    #[test]
    fn reciprocal_derivatives() {
        let w = Weight::affine(1.0);
        let t: f64 = 2.0;
        assert!((w.recip_derivative(1, t).unwrap() + 1.0 / 9.0).abs() < 1e-15);
        assert!((w.recip_derivative(2, t).unwrap() - 2.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn spec_round_trip() {
        let s: WeightSpec = serde_json::from_str(r#"{"label":"exponential","c":2.0}"#).unwrap();
        assert_eq!(s, WeightSpec::Exponential { c: 2.0 });
        assert!(serde_json::from_str::<WeightSpec>(r#"{"label":"affine","b":1,"x":2}"#).is_err());
    }
}
