//! Globally adaptive 15-point Gauss–Kronrod quadrature.
//!
//! Integrals over unbounded intervals are evaluated in the compact
//! coordinate of a [`CompactMap`] with the Jacobian folded into the
//! integrand, so both infinities are handled by the same finite rule.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compactline::{CompactMap, ExtReal};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_subdivisions: 2000,
        }
    }
}

impl QuadConfig {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        QuadConfig { abs_tol, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum QuadError {
    #[error("no convergence after {subdivisions} subdivisions: {value:e} +- {abs_error:e}")]
    NoConvergence {
        value: f64,
        abs_error: f64,
        subdivisions: usize,
    },
    #[error("integrand not finite at x = {x}")]
    NonFinite { x: f64 },
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::NonFinite { x })
        }
    };
    let fc = eval(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

/// Integrate `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult, QuadError> {
    if a == b {
        return Ok(QuadResult { value: 0.0, abs_error: 0.0, evaluations: 0, subdivisions: 0 });
    }
    let (value, error) = gk15(&f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut evaluations = 15;
    let mut subdivisions = 1;
    // segments too narrow to split further; their error is final
    let mut frozen_err = 0.0;
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if subdivisions >= cfg.max_subdivisions || mid <= worst.a || mid >= worst.b {
            if subdivisions >= cfg.max_subdivisions {
                return Err(QuadError::NoConvergence {
                    value: total,
                    abs_error: total_err,
                    subdivisions,
                });
            }
            frozen_err += worst.error;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid)?;
        let (v2, e2) = gk15(&f, mid, worst.b)?;
        evaluations += 30;
        subdivisions += 1;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // resum to shed drift from the running updates
    let segments = heap.into_vec();
    let value: f64 = segments.iter().map(|s| s.value).sum();
    let abs_error: f64 = segments.iter().map(|s| s.error).sum::<f64>() + frozen_err;
    let tol = cfg.abs_tol.max(cfg.rel_tol * value.abs());
    if abs_error > tol {
        return Err(QuadError::NoConvergence { value, abs_error, subdivisions });
    }
    Ok(QuadResult { value, abs_error, evaluations, subdivisions })
}

/// Integrate a function of `t` over `[lo, hi]` (possibly infinite) through the
/// compact coordinate of `map`.
pub fn integrate_on_map<F: Fn(f64) -> f64>(
    map: &CompactMap,
    lo: ExtReal,
    hi: ExtReal,
    f: F,
    cfg: &QuadConfig,
) -> crate::error::Result<QuadResult> {
    let xa = map.to_compact(lo)?;
    let xb = map.to_compact(hi)?;
    integrate_compact(map, xa, xb, |_, t| f(t), cfg)
}

/// Integrate over `x ∈ [xa, xb]`; the integrand receives both the compact
/// coordinate and `t(x)`, and is multiplied by the Jacobian here.
pub fn integrate_compact<F: Fn(f64, f64) -> f64>(
    map: &CompactMap,
    xa: f64,
    xb: f64,
    f: F,
    cfg: &QuadConfig,
) -> crate::error::Result<QuadResult> {
    let g = |x: f64| {
        let v = f(x, map.t_of(x));
        if v == 0.0 {
            0.0
        } else {
            v * map.jacobian(x)
        }
    };
    Ok(integrate(g, xa, xb, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, &QuadConfig::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn semi_infinite_exponential() {
        let map = CompactMap::half_line(0.0, 1.0).unwrap();
        let cfg = QuadConfig::with_abs_tol(1e-12);
        let r = integrate_on_map(&map, ExtReal::Finite(0.0), ExtReal::PosInf, |t| (-t).exp(), &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = integrate_on_map(&map, ExtReal::Finite(0.0), ExtReal::PosInf, |t| t * t * (-t).exp() / 2.0, &cfg)
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_line_gaussian() {
        let map = CompactMap::full_line(1.0).unwrap();
        let r = integrate_on_map(
            &map,
            ExtReal::NegInf,
            ExtReal::PosInf,
            |t| (-t * t).exp(),
            &QuadConfig::with_abs_tol(1e-12),
        )
        .unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn non_convergence_is_reported() {
        let cfg = QuadConfig { abs_tol: 1e-14, rel_tol: 0.0, max_subdivisions: 3 };
        let e = integrate(|x: f64| (1.0 / x).sin(), 1e-4, 1.0, &cfg).unwrap_err();
        assert!(matches!(e, QuadError::NoConvergence { .. }));
    }

    #[test]
    fn non_finite_is_reported() {
        let e = integrate(|x: f64| 1.0 / (x - 0.5), 0.0, 1.0, &QuadConfig::default()).unwrap_err();
        assert!(matches!(e, QuadError::NonFinite { .. }));
    }
}
