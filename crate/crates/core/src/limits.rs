//! Reading limits at the ends of a compactified interval.

use crate::compactline::{CompactMap, Side};

const AGREE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailBehavior {
    Limit(f64),
    Diverges,
    Unsettled,
}

impl TailBehavior {
    pub fn limit(self) -> Option<f64> {
        match self {
            TailBehavior::Limit(v) => Some(v),
            _ => None,
        }
    }
}

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= AGREE * a.abs().max(b.abs()).max(1.0)
}

/// Limit of `f(t)` as `t` approaches the `side` endpoint of `map`.
///
/// At a finite endpoint the function is evaluated there. At an infinite
/// endpoint `f` is sampled along `x = ±(1 - 10^-k)`; the limit is accepted
/// when the last three samples agree, or when their first-order
/// extrapolation in `1/t` does.
pub fn tail_limit<F: Fn(f64) -> f64>(map: &CompactMap, side: Side, f: F) -> TailBehavior {
    let ts = map.tail_points(side);
    if ts.len() == 1 {
        let v = f(ts[0]);
        return if v.is_finite() { TailBehavior::Limit(v) } else { TailBehavior::Unsettled };
    }
    let vs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let k = vs.len();
    if vs[k - 3..].iter().any(|v| v.is_nan()) {
        return TailBehavior::Unsettled;
    }
    if vs[k - 1].is_infinite() {
        return TailBehavior::Diverges;
    }
    if agree(vs[k - 1], vs[k - 2]) && agree(vs[k - 2], vs[k - 3]) {
        return TailBehavior::Limit(vs[k - 1]);
    }
    let extrap = |i: usize| (ts[i] * vs[i] - ts[i - 1] * vs[i - 1]) / (ts[i] - ts[i - 1]);
    let (e1, e2, e3) = (extrap(k - 1), extrap(k - 2), extrap(k - 3));
    if e1.is_finite() && agree(e1, e2) && agree(e2, e3) {
        return TailBehavior::Limit(e1);
    }
    let tail = &vs[k - 4..];
    let growing = tail.windows(2).all(|w| w[1].abs() > w[0].abs());
    if growing && vs[k - 1].abs() > 1e6 {
        TailBehavior::Diverges
    } else {
        TailBehavior::Unsettled
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_limits() {
        let map = CompactMap::half_line(0.0, 1.0).unwrap();
        assert_eq!(tail_limit(&map, Side::Upper, |t| 3.0 * t / (t + 1.0)).limit().map(|v| (v - 3.0).abs() < 1e-9), Some(true));
        let z = tail_limit(&map, Side::Upper, |t| (t - 1e6) / (t + 1.0)).limit().unwrap();
        assert!((z - 1.0).abs() < 1e-9);
        assert_eq!(tail_limit(&map, Side::Lower, |t| t + 2.0), TailBehavior::Limit(2.0));
    }

    #[test]
    fn divergence_and_oscillation() {
        let map = CompactMap::full_line(1.0).unwrap();
        assert_eq!(tail_limit(&map, Side::Upper, |t| t * t), TailBehavior::Diverges);
        assert_eq!(tail_limit(&map, Side::Upper, |t| t.sin()), TailBehavior::Unsettled);
        let v = tail_limit(&map, Side::Lower, |t| (t).exp()).limit().unwrap();
        assert!(v.abs() < 1e-12);
    }
}
