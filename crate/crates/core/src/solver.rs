//! Fixed points by Picard iteration, an independent Runge–Kutta oracle for
//! initial value problems, and asymptotics of radial projectile motion.

use serde::{Deserialize, Serialize};

use crate::compactline::CompactMap;
use crate::error::{Error, Result};
use crate::hammerstein::{apply_t, HammersteinProblem};
use crate::quadrature::QuadConfig;
use crate::weighted_space::{NormKind, WeightedFunction};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// relaxation `θ ∈ (0, 1]`
    pub theta: f64,
    pub quad: QuadConfig,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { tol: 1e-9, max_iters: 200, theta: 1.0, quad: QuadConfig::default() }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub u: WeightedFunction,
    /// number of updates performed
    pub iterations: usize,
    /// `‖u − Tu‖_φ` of the returned iterate
    pub residual: f64,
    pub converged: bool,
    /// `ũ(+∞)`
    pub slope: f64,
    /// `‖u_{k+1} − u_k‖_φ` per update
    pub trace: Vec<f64>,
    /// relaxation in effect at the end
    pub theta: f64,
}

/// Iterate `u_{k+1} = (1−θ)u_k + θ Tu_k` until `‖Tu_k − u_k‖_φ ≤ tol`.
///
/// `θ` is halved after three consecutive growths of the update norm. When
/// the iteration does not converge the iterate with the smallest residual is
/// returned with `converged = false`.
pub fn picard_solve(problem: &HammersteinProblem, u0: &WeightedFunction, opts: &PicardOptions) -> Result<Solution> {
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    if !(opts.theta > 0.0 && opts.theta <= 1.0) {
        return Err(Error::invalid(format!("θ must lie in (0, 1], got {}", opts.theta)));
    }
    let mut theta = opts.theta;
    let mut u = u0.clone();
    let mut trace = Vec::new();
    let mut best: Option<(f64, WeightedFunction, usize)> = None;
    let mut growths = 0;
    for k in 0..=opts.max_iters {
        let tu = apply_t(problem, &u, &opts.quad)?;
        let r = tu.distance(&u)?;
        if best.as_ref().is_none_or(|b| r < b.0) {
            best = Some((r, u.clone(), k));
        }
        if r <= opts.tol {
            return Ok(finish(u, k, r, true, trace, theta));
        }
        if k == opts.max_iters {
            break;
        }
        let step = theta * r;
        if trace.last().is_some_and(|&prev| step > prev) {
            growths += 1;
            if growths >= 3 {
                theta *= 0.5;
                growths = 0;
            }
        } else {
            growths = 0;
        }
        trace.push(step);
        u = u.lincomb(1.0 - theta, &tu, theta)?;
    }
    let (r, u, _) = best.expect("at least one residual evaluated");
    Ok(finish(u, trace.len(), r, false, trace, theta))
}

fn finish(u: WeightedFunction, iterations: usize, residual: f64, converged: bool, trace: Vec<f64>, theta: f64) -> Solution {
    let slope = u.asymptotic_limits().1;
    Solution { u, iterations, residual, converged, slope, trace, theta }
}

/// `‖u − Tu‖_φ`
pub fn residual_norm(problem: &HammersteinProblem, u: &WeightedFunction, quad: &QuadConfig) -> Result<f64> {
    apply_t(problem, u, quad)?.distance(u)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// initial step
    pub h0: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-12, atol: 1e-13, h0: 1e-3, max_steps: 5_000_000 }
    }
}

/// Accepted steps of `u'' = f(t, u)` with cubic Hermite dense output.
#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `u''` at the accepted points
    pub a: Vec<f64>,
    /// relative difference at the end against a run at 1/32 of the tolerance
    pub error_estimate: f64,
}

impl OdeSolution {
    pub fn t_max(&self) -> f64 {
        *self.t.last().unwrap()
    }

    fn segment(&self, t: f64) -> Result<usize> {
        let (t0, t1) = (self.t[0], self.t_max());
        if !(t >= t0 && t <= t1) {
            return Err(Error::domain(format!("t = {t} outside [{t0}, {t1}]")));
        }
        Ok(self.t.partition_point(|&s| s <= t).clamp(1, self.t.len() - 1) - 1)
    }

    /// `(u(t), u'(t))`
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let i = self.segment(t)?;
        let h = self.t[i + 1] - self.t[i];
        if h == 0.0 {
            return Ok((self.u[i], self.v[i]));
        }
        let s = (t - self.t[i]) / h;
        let herm = |y0: f64, y1: f64, d0: f64, d1: f64| {
            let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
            let h10 = s * (1.0 - s) * (1.0 - s);
            let h01 = s * s * (3.0 - 2.0 * s);
            let h11 = s * s * (s - 1.0);
            h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
        };
        Ok((
            herm(self.u[i], self.u[i + 1], self.v[i], self.v[i + 1]),
            herm(self.v[i], self.v[i + 1], self.a[i], self.a[i + 1]),
        ))
    }
}

fn rk4<F: Fn(f64, f64) -> f64>(f: &F, t: f64, u: f64, v: f64, h: f64) -> (f64, f64) {
    let k1u = v;
    let k1v = f(t, u);
    let k2u = v + 0.5 * h * k1v;
    let k2v = f(t + 0.5 * h, u + 0.5 * h * k1u);
    let k3u = v + 0.5 * h * k2v;
    let k3v = f(t + 0.5 * h, u + 0.5 * h * k2u);
    let k4u = v + h * k3v;
    let k4v = f(t + h, u + h * k3u);
    (
        u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

/// Classical fourth-order Runge–Kutta with step-doubling control.
pub fn ode_solve<F: Fn(f64, f64) -> f64>(f: &F, t0: f64, u0: f64, v0: f64, t_max: f64, opts: &OdeOptions) -> Result<OdeSolution> {
    if !(t_max > t0) {
        return Err(Error::invalid(format!("need t_max > t0, got {t_max} ≤ {t0}")));
    }
    let (mut t, mut u, mut v) = (t0, u0, v0);
    let mut out = OdeSolution { t: vec![t], u: vec![u], v: vec![v], a: vec![f(t, u)], error_estimate: f64::NAN };
    let mut h = opts.h0.min(t_max - t0);
    let mut steps = 0;
    while t < t_max {
        if steps >= opts.max_steps {
            return Err(Error::Undetermined(format!("step budget exhausted at t = {t}")));
        }
        steps += 1;
        let last = t + h >= t_max;
        if last {
            h = t_max - t;
        }
        let (u1, v1) = rk4(f, t, u, v, h);
        let (um, vm) = rk4(f, t, u, v, 0.5 * h);
        let (u2, v2) = rk4(f, t + 0.5 * h, um, vm, 0.5 * h);
        if !(u2.is_finite() && v2.is_finite() && u1.is_finite() && v1.is_finite()) {
            return Err(Error::BlowUp { t });
        }
        let scale_u = opts.atol + opts.rtol * u2.abs().max(u.abs());
        let scale_v = opts.atol + opts.rtol * v2.abs().max(v.abs());
        let err = ((u2 - u1).abs() / scale_u).max((v2 - v1).abs() / scale_v) / 15.0;
        if err <= 1.0 {
            t = if last { t_max } else { t + h };
            u = u2 + (u2 - u1) / 15.0;
            v = v2 + (v2 - v1) / 15.0;
            let a = f(t, u);
            if !a.is_finite() {
                return Err(Error::BlowUp { t });
            }
            out.t.push(t);
            out.u.push(u);
            out.v.push(v);
            out.a.push(a);
        }
        let factor = if err == 0.0 { 4.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 4.0) };
        h *= factor;
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::BlowUp { t });
        }
    }
    Ok(out)
}

/// `u'' = f(t, u)`, `u(0) = 0`, `u'(0) = v₀` on `[0, t_max]`, with a global
/// error estimate from a second run at a tighter tolerance.
pub fn ode_oracle<F: Fn(f64, f64) -> f64>(f: &F, v0: f64, t_max: f64, opts: &OdeOptions) -> Result<OdeSolution> {
    let coarse = ode_solve(f, 0.0, 0.0, v0, t_max, opts)?;
    let fine_opts = OdeOptions { rtol: opts.rtol / 32.0, atol: opts.atol / 32.0, ..*opts };
    let mut fine = ode_solve(f, 0.0, 0.0, v0, t_max, &fine_opts)?;
    let (uc, uf) = (*coarse.u.last().unwrap(), *fine.u.last().unwrap());
    fine.error_estimate = (uc - uf).abs() / uf.abs().max(1.0);
    Ok(fine)
}

/// Oracle horizon matching the resolvable range of a grid: `t(0.999)`.
pub fn default_horizon(map: &CompactMap) -> f64 {
    map.t_of(0.999)
}

/// Largest violation of `½(v² − v₀²) = gR²(1/(R+u) − 1/R)` over the
/// accepted steps.
pub fn energy_drift(sol: &OdeSolution, g: f64, r: f64, v0: f64) -> f64 {
    sol.u
        .iter()
        .zip(&sol.v)
        .map(|(&u, &v)| (0.5 * (v * v - v0 * v0) - g * r * r * (1.0 / (r + u) - 1.0 / r)).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeEstimate {
    pub value: f64,
    pub error: f64,
}

/// `lim u(t)/φ(t)` from `ratio(t) = u(t)/φ(t)` at `t, 2t, 4t` with
/// `t = t_max/4`, eliminating a `1/t` term.
pub fn asymptotic_slope(ratio: &dyn Fn(f64) -> f64, t_max: f64) -> Result<SlopeEstimate> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::invalid("t_max must be positive and finite"));
    }
    let t = 0.25 * t_max;
    let (r1, r2, r4) = (ratio(t), ratio(2.0 * t), ratio(4.0 * t));
    let e1 = 2.0 * r2 - r1;
    let e2 = 2.0 * r4 - r2;
    let error = (e2 - e1).abs();
    if !(e2.is_finite() && error.is_finite()) || error > 0.5 * e2.abs() {
        return Err(Error::Undetermined(format!("tail ratios {r1}, {r2}, {r4} do not settle")));
    }
    Ok(SlopeEstimate { value: e2, error })
}

/// The endpoint sample `ũ(+∞)` is the slope, exactly.
pub fn weighted_slope(u: &WeightedFunction) -> SlopeEstimate {
    SlopeEstimate { value: u.asymptotic_limits().1, error: 0.0 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeConstants {
    /// `√(2gR)`
    pub v_s: f64,
    /// `√(v₀² − 2gR)`, only when `v₀ ≥ v_s`
    pub v_inf: Option<f64>,
    /// `(3/2)^{2/3} (2gR²)^{1/3}`: `u(t) ~ C t^{2/3}` at `v₀ = v_s`
    pub two_thirds: f64,
}

pub fn escape_constants(g: f64, r: f64, v0: f64) -> Result<EscapeConstants> {
    if !(g > 0.0 && r > 0.0 && g.is_finite() && r.is_finite()) {
        return Err(Error::domain(format!("need g, R > 0, got g = {g}, R = {r}")));
    }
    let v_s = (2.0 * g * r).sqrt();
    let v_inf = (v0.abs() >= v_s).then(|| (v0 * v0 - 2.0 * g * r).max(0.0).sqrt());
    let two_thirds = 1.5f64.powf(2.0 / 3.0) * (2.0 * g * r * r).cbrt();
    Ok(EscapeConstants { v_s, v_inf, two_thirds })
}

/// Supremum of `|a − b| / sup |b|` over `probe` times.
pub fn relative_sup_difference(a: &dyn Fn(f64) -> f64, b: &dyn Fn(f64) -> f64, probe: &[f64]) -> f64 {
    let num = probe.iter().map(|&t| (a(t) - b(t)).abs()).fold(0.0, f64::max);
    let den = probe.iter().map(|&t| b(t).abs()).fold(0.0, f64::max);
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// `‖u‖_φ` shorthand.
pub fn phi_norm(u: &WeightedFunction) -> f64 {
    u.norm(NormKind::Phi)
}
