//! Suprema and infima over compactified intervals: dense sampling in the
//! compact coordinate followed by golden-section refinement around every
//! sampled local maximum.

use crate::compactline::CompactMap;
use crate::error::{Error, Result};

pub const DEFAULT_SAMPLES: usize = 513;
const MAX_REFINED: usize = 12;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremum {
    pub value: f64,
    /// location in `t`; infinite when the extremum is approached at an end
    pub at: f64,
}

/// Supremum of `g(t)` for `t = t(x)`, `x ∈ [xa, xb]`.
pub fn sup_on_map<G: Fn(f64) -> f64>(map: &CompactMap, xa: f64, xb: f64, g: G, samples: usize) -> Result<Extremum> {
    if !(xa <= xb) || xa < -1.0 || xb > 1.0 {
        return Err(Error::domain(format!("bad search range [{xa}, {xb}]")));
    }
    let samples = samples.max(3);
    let mut xs: Vec<f64> = (0..samples)
        .map(|i| xa + (xb - xa) * i as f64 / (samples - 1) as f64)
        .collect();
    // approach infinite ends along a geometric tail
    if xb == 1.0 {
        xs.pop();
        xs.extend((3..=12).map(|k| 1.0 - 10f64.powi(-k)).filter(|&x| x > xa));
    }
    if xa == -1.0 && map.t_of(-1.0).is_infinite() {
        xs.remove(0);
        let mut head: Vec<f64> = (3..=12).rev().map(|k| -1.0 + 10f64.powi(-k)).filter(|&x| x < xb).collect();
        head.append(&mut xs);
        xs = head;
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let eval = |x: f64| -> Result<f64> {
        let t = map.t_of(x);
        let v = g(t);
        if v.is_nan() {
            Err(Error::domain(format!("non-finite value at t = {t}")))
        } else {
            Ok(v)
        }
    };
    let vals = xs.iter().map(|&x| eval(x)).collect::<Result<Vec<f64>>>()?;
    if let Some(i) = vals.iter().position(|v| v.is_infinite() && *v > 0.0) {
        return Ok(Extremum { value: f64::INFINITY, at: map.t_of(xs[i]) });
    }

    let n = xs.len();
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = i == 0 || vals[i] >= vals[i - 1];
            let right = i + 1 == n || vals[i] >= vals[i + 1];
            left && right
        })
        .collect();
    peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    peaks.truncate(MAX_REFINED);

    let mut best = Extremum { value: f64::NEG_INFINITY, at: f64::NAN };
    for &i in &peaks {
        if vals[i] > best.value {
            best = Extremum { value: vals[i], at: map.t_of(xs[i]) };
        }
        let lo = if i == 0 { xs[0] } else { xs[i - 1] };
        let hi = if i + 1 == n { xs[n - 1] } else { xs[i + 1] };
        if hi > lo {
            let (x, v) = golden_max(&eval, lo, hi)?;
            if v > best.value {
                best = Extremum { value: v, at: map.t_of(x) };
            }
        }
    }
    Ok(best)
}

/// Infimum of `g(t)` over the same range.
pub fn inf_on_map<G: Fn(f64) -> f64>(map: &CompactMap, xa: f64, xb: f64, g: G, samples: usize) -> Result<Extremum> {
    let e = sup_on_map(map, xa, xb, |t| -g(t), samples)?;
    Ok(Extremum { value: -e.value, at: e.at })
}

fn golden_max<E: Fn(f64) -> Result<f64>>(eval: &E, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    for _ in 0..80 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}
