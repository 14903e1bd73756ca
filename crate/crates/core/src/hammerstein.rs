//! Hammerstein operators `Tu(t) = p(t) + ∫ k(t,s) η(s) f(s, u(s)) ds` and
//! numerical probes of their regularity conditions.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compactline::{CompactMap, ExtReal, Grid, Interval, Side};
use crate::error::{Error, Result};
use crate::extremum::sup_on_map;
use crate::limits::tail_limit;
use crate::quadrature::{integrate_compact, QuadConfig, QuadError};
use crate::weighted_space::{lift, WeightedFunction};
use crate::weights::{ScalarFn, Weight};

pub type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// `(t, y) ↦ f(t, y)`
pub type NonlinFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// `(r, t) ↦ φ_r(t)`
pub type DominatorFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// `(t, ρ) ↦ envelope value`
pub type EnvelopeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Support {
    /// `k(t, s) = 0` for `s > t`
    Volterra,
    Full,
}

#[derive(Clone)]
pub struct Kernel {
    name: String,
    k: KernelFn,
    eta: ScalarFn,
    support: Support,
    t_derivatives: Vec<KernelFn>,
    modulus: Option<ScalarFn>,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("t_derivatives", &self.t_derivatives.len())
            .finish()
    }
}

impl Kernel {
    pub fn new(name: impl Into<String>, k: KernelFn, eta: ScalarFn, support: Support) -> Self {
        Kernel { name: name.into(), k, eta, support, t_derivatives: Vec::new(), modulus: None }
    }

    pub fn zero() -> Self {
        Kernel::new("zero", Arc::new(|_, _| 0.0), Arc::new(|_| 1.0), Support::Full)
    }

    /// Supply `∂ˡk/∂tˡ` for `l = 1..=derivs.len()`.
    pub fn with_t_derivatives(mut self, derivs: Vec<KernelFn>) -> Self {
        self.t_derivatives = derivs;
        self
    }

    /// Supply the continuity modulus `ω₀`.
    pub fn with_modulus(mut self, omega: ScalarFn) -> Self {
        self.modulus = Some(omega);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn modulus(&self) -> Option<&ScalarFn> {
        self.modulus.as_ref()
    }

    /// `k(t, s)`, with the Volterra support enforced.
    #[inline]
    pub fn k(&self, t: f64, s: f64) -> f64 {
        if self.support == Support::Volterra && s > t {
            0.0
        } else {
            (self.k)(t, s)
        }
    }

    #[inline]
    pub fn eta(&self, s: f64) -> f64 {
        (self.eta)(s)
    }

    /// `k(t, s) η(s)`
    #[inline]
    pub fn eval(&self, t: f64, s: f64) -> f64 {
        let k = self.k(t, s);
        if k == 0.0 {
            0.0
        } else {
            k * self.eta(s)
        }
    }

    /// `∂ˡk/∂tˡ (t, s)`, if known.
    pub fn t_derivative(&self, l: usize, t: f64, s: f64) -> Option<f64> {
        if l == 0 {
            return Some(self.k(t, s));
        }
        let d = self.t_derivatives.get(l - 1)?;
        if self.support == Support::Volterra && s > t {
            Some(0.0)
        } else {
            Some(d(t, s))
        }
    }

    pub fn max_t_derivative(&self) -> usize {
        self.t_derivatives.len()
    }

    /// `k(t, s) η(s) / φ(t)`
    #[inline]
    pub fn slice(&self, w: &Weight, t: f64, s: f64) -> f64 {
        let v = self.eval(t, s);
        if v == 0.0 {
            0.0
        } else {
            v * (-w.ln_eval(t)).exp()
        }
    }

    /// Limit of the weighted slice at the `side` end of `map`; `None` if it
    /// does not settle.
    pub fn slice_limit(&self, w: &Weight, map: &CompactMap, side: Side, s: f64) -> Option<f64> {
        if self.support == Support::Volterra && side == Side::Lower && map.lower() == ExtReal::NegInf {
            return Some(0.0);
        }
        tail_limit(map, side, |t| self.slice(w, t, s)).limit()
    }

    /// Integration range in compact coordinates for the slice at `t`.
    fn s_range(&self, map: &CompactMap, t: f64) -> (f64, f64) {
        match self.support {
            Support::Volterra => (-1.0, map.x_of(t)),
            Support::Full => (-1.0, 1.0),
        }
    }
}

#[derive(Clone)]
pub struct Nonlinearity {
    name: String,
    f: NonlinFn,
    dominator: Option<DominatorFn>,
    upper: Option<EnvelopeFn>,
    lower: Option<EnvelopeFn>,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("name", &self.name)
            .field("dominator", &self.dominator.is_some())
            .field("upper", &self.upper.is_some())
            .field("lower", &self.lower.is_some())
            .finish()
    }
}

impl Nonlinearity {
    pub fn new(name: impl Into<String>, f: NonlinFn) -> Self {
        Nonlinearity { name: name.into(), f, dominator: None, upper: None, lower: None }
    }

    pub fn zero() -> Self {
        Nonlinearity::new("zero", Arc::new(|_, _| 0.0))
            .with_dominator(Arc::new(|_, _| 0.0))
            .with_envelopes(Some(Arc::new(|_, _| 0.0)), Some(Arc::new(|_, _| 0.0)))
    }

    pub fn constant(c: f64) -> Self {
        Nonlinearity::new(format!("constant({c})"), Arc::new(move |_, _| c))
    }

    pub fn with_dominator(mut self, d: DominatorFn) -> Self {
        self.dominator = Some(d);
        self
    }

    /// Upper envelope `F(t, ρ)` bounding `f(t, u(t))` over `β(u) = ρ`, and
    /// lower envelope `G(t, ρ)` bounding it from below over `γ(u) = ρ`.
    pub fn with_envelopes(mut self, upper: Option<EnvelopeFn>, lower: Option<EnvelopeFn>) -> Self {
        self.upper = upper;
        self.lower = lower;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, t: f64, y: f64) -> f64 {
        (self.f)(t, y)
    }

    pub fn dominator(&self) -> Option<&DominatorFn> {
        self.dominator.as_ref()
    }

    pub fn upper_envelope(&self) -> Option<&EnvelopeFn> {
        self.upper.as_ref()
    }

    pub fn lower_envelope(&self) -> Option<&EnvelopeFn> {
        self.lower.as_ref()
    }
}

#[derive(Clone, Debug)]
pub struct HammersteinProblem {
    kernel: Kernel,
    nonlinearity: Nonlinearity,
    forcing: WeightedFunction,
}

impl HammersteinProblem {
    pub fn new(kernel: Kernel, nonlinearity: Nonlinearity, forcing: WeightedFunction) -> Result<Self> {
        forcing.weight().check_positive(forcing.grid())?;
        Ok(HammersteinProblem { kernel, nonlinearity, forcing })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    pub fn forcing(&self) -> &WeightedFunction {
        &self.forcing
    }

    pub fn weight(&self) -> &Weight {
        self.forcing.weight()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.forcing.grid()
    }

    pub fn map(&self) -> &CompactMap {
        self.forcing.map()
    }

    pub fn order(&self) -> usize {
        self.forcing.order()
    }

    /// Same problem with a different nonlinearity.
    pub fn with_nonlinearity(&self, nl: Nonlinearity) -> Self {
        HammersteinProblem { nonlinearity: nl, ..self.clone() }
    }

    /// Same problem with a different forcing in the same space.
    pub fn with_forcing(&self, p: WeightedFunction) -> Result<Self> {
        if p.weight().label() != self.weight().label() || p.order() != self.order() {
            return Err(Error::invalid("forcing lives in a different space"));
        }
        Ok(HammersteinProblem { forcing: p, ..self.clone() })
    }

    /// A zero element of the problem's space.
    pub fn zero_element(&self) -> WeightedFunction {
        WeightedFunction::zero(self.grid().clone(), self.weight().clone(), self.order())
    }
}

fn integration_error(node: usize, t: ExtReal, e: Error) -> (f64, Error) {
    match e {
        Error::Quadrature(QuadError::NoConvergence { value, abs_error, .. }) => {
            (abs_error, Error::Integration { node, t, value, abs_error })
        }
        Error::Quadrature(QuadError::NonFinite { .. }) => (
            f64::INFINITY,
            Error::Integration { node, t, value: f64::NAN, abs_error: f64::INFINITY },
        ),
        other => (f64::INFINITY, other),
    }
}

/// Evaluate `Tu` on the grid of the problem.
///
/// Interior nodes integrate the weighted slice `k(t,s)η(s)/φ(t)·f(s,u(s))`
/// in the compact `s`-coordinate. Infinite endpoints use
/// `∫ z^±(s) f(s,u(s)) ds + p̃(±∞)`. For order `n ≥ 1` derivative rows follow
/// from the Leibniz rule and need the kernel's `t`-derivatives.
pub fn apply_t(problem: &HammersteinProblem, u: &WeightedFunction, quad: &QuadConfig) -> Result<WeightedFunction> {
    let grid = problem.grid();
    let weight = problem.weight();
    let n = problem.order();
    if u.order() != n || u.weight().label() != weight.label() || u.grid().x() != grid.x() {
        return Err(Error::invalid("u is not in the problem's space"));
    }
    let kernel = &problem.kernel;
    if n > kernel.max_t_derivative() {
        return Err(Error::Unsupported(format!(
            "order {n} needs {n} kernel t-derivatives, {} supplied",
            kernel.max_t_derivative()
        )));
    }
    if n >= 1 && kernel.support == Support::Volterra {
        check_diagonal(kernel, grid, n)?;
    }
    let map = *grid.map();
    let nl = &problem.nonlinearity;
    let p = &problem.forcing;
    let f_of = |x: f64, s: f64| nl.eval(s, u.tilde_at_x(x) * weight.eval(s));

    let results: Vec<std::result::Result<Vec<f64>, (f64, Error)>> = grid
        .t()
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut col = vec![0.0; n + 1];
            match t {
                ExtReal::Finite(tv) => {
                    for (j, c) in col.iter_mut().enumerate() {
                        let v = weighted_integral_at(problem, u, tv, j, quad).map_err(|e| integration_error(i, t, e))?;
                        *c = v + p.tilde_row(j)[i];
                    }
                }
                _ => {
                    let side = if t == ExtReal::PosInf { Side::Upper } else { Side::Lower };
                    let integrand = |x: f64, s: f64| {
                        let fv = f_of(x, s);
                        if fv == 0.0 {
                            return 0.0;
                        }
                        kernel.slice_limit(weight, &map, side, s).unwrap_or(f64::NAN) * fv
                    };
                    let r = integrate_compact(&map, -1.0, 1.0, integrand, quad)
                        .map_err(|e| integration_error(i, t, e))?;
                    col[0] = r.value + p.tilde_row(0)[i];
                }
            }
            Ok(col)
        })
        .collect();

    let mut worst: Option<(f64, Error)> = None;
    let mut cols = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(c) => cols.push(c),
            Err((err_size, e)) => {
                if worst.as_ref().is_none_or(|(w, _)| err_size > *w) {
                    worst = Some((err_size, e));
                }
            }
        }
    }
    if let Some((_, e)) = worst {
        return Err(e);
    }
    let rows = (0..=n).map(|j| cols.iter().map(|c| c[j]).collect()).collect();
    lift(rows, weight.clone(), grid.clone())
}

/// `∂ʲ/∂tʲ [(1/φ(t)) ∫ k(t,s)η(s) f(s,u(s)) ds]` at a finite `t`, without
/// the forcing term.
fn weighted_integral_at(
    problem: &HammersteinProblem,
    u: &WeightedFunction,
    tv: f64,
    j: usize,
    quad: &QuadConfig,
) -> Result<f64> {
    let kernel = &problem.kernel;
    let weight = problem.weight();
    let map = *problem.map();
    let nl = &problem.nonlinearity;
    let (xa, xb) = kernel.s_range(&map, tv);
    let coeffs: Vec<f64> = (0..=j)
        .map(|l| binom(j, l) * weight.recip_derivative(j - l, tv).unwrap_or(f64::NAN))
        .collect();
    let integrand = |x: f64, s: f64| {
        let fv = nl.eval(s, u.tilde_at_x(x) * weight.eval(s));
        if fv == 0.0 {
            return 0.0;
        }
        let kk: f64 = if j == 0 {
            kernel.slice(weight, tv, s)
        } else {
            (0..=j)
                .map(|l| coeffs[l] * kernel.t_derivative(l, tv, s).unwrap_or(f64::NAN))
                .sum::<f64>()
                * kernel.eta(s)
        };
        kk * fv
    };
    Ok(integrate_compact(&map, xa, xb, integrand, quad)?.value)
}

/// `(Tu)(t)/φ(t)` at any finite `t` in the interval, order 0.
pub fn apply_t_at(problem: &HammersteinProblem, u: &WeightedFunction, t: f64, quad: &QuadConfig) -> Result<f64> {
    if !problem.map().contains(ExtReal::Finite(t)) || !t.is_finite() {
        return Err(Error::domain(format!("t = {t} outside the interval")));
    }
    let p = problem.forcing().tilde_at_x(problem.map().x_of(t));
    Ok(weighted_integral_at(problem, u, t, 0, quad)? + p)
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Boundary terms of the Leibniz rule for Volterra kernels vanish only when
/// `∂ˡk/∂tˡ(t, t) = 0` for `l < n`.
fn check_diagonal(kernel: &Kernel, grid: &Grid, n: usize) -> Result<()> {
    for t in grid.t().iter().filter_map(|t| t.finite()) {
        for l in 0..n {
            let d = kernel.t_derivative(l, t, t).unwrap_or(f64::NAN);
            if d.abs() > 1e-12 {
                return Err(Error::Unsupported(format!(
                    "Volterra kernel has ∂^{l}k(t,t) = {d} at t = {t}; boundary terms not handled"
                )));
            }
        }
    }
    Ok(())
}

/// Kernel `(t − s)₊` with `η ≡ 1` and forcing `p(t) = v₀(t − a)` on `[a, ∞)`:
/// the integral form of `u'' = f(t, u)`, `u(a) = 0`, `u'(a) = v₀`.
pub fn second_order_ivp_kernel(v0: f64, grid: Arc<Grid>, weight: Weight) -> Result<(Kernel, WeightedFunction)> {
    let a = match grid.map().interval() {
        Interval::HalfLine { a } => a,
        Interval::FullLine => return Err(Error::domain("initial value problems live on a half-line")),
    };
    if !v0.is_finite() {
        return Err(Error::invalid("v0 must be finite"));
    }
    let kernel = Kernel::new("ivp-green", Arc::new(|t, s| (t - s).max(0.0)), Arc::new(|_| 1.0), Support::Volterra)
        .with_t_derivatives(vec![Arc::new(|t, s| if s <= t { 1.0 } else { 0.0 })])
        .with_modulus(Arc::new(move |s| 1.0 + (s - a)));
    let p = WeightedFunction::from_raw_fn(grid, weight, move |t| v0 * (t - a))?;
    Ok((kernel, p))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelLimits {
    pub z_minus: f64,
    pub z_plus: f64,
    pub m: f64,
}

/// `z^±(s)` and `M(s) = sup_t |k(t,s)η(s)/φ(t)|`.
pub fn kernel_limits(kernel: &Kernel, w: &Weight, map: &CompactMap, s: f64) -> Result<KernelLimits> {
    let z = |side: Side| -> Result<f64> {
        match map.endpoint(side) {
            ExtReal::Finite(a) => Ok(kernel.slice(w, a, s)),
            _ => kernel
                .slice_limit(w, map, side, s)
                .ok_or_else(|| Error::domain(format!("slice at s = {s} has no limit toward {side:?}"))),
        }
    };
    let z_minus = z(Side::Lower)?;
    let z_plus = z(Side::Upper)?;
    let m = slice_sup(kernel, w, map, s, 257)?;
    Ok(KernelLimits { z_minus, z_plus, m })
}

fn slice_sup(kernel: &Kernel, w: &Weight, map: &CompactMap, s: f64, samples: usize) -> Result<f64> {
    let xa = match kernel.support {
        Support::Volterra => map.x_of(s),
        Support::Full => -1.0,
    };
    let e = sup_on_map(map, xa, 1.0, |t| kernel.slice(w, t, s).abs(), samples)?;
    if !e.value.is_finite() {
        return Err(Error::domain(format!("slice at s = {s} is unbounded")));
    }
    Ok(e.value.max(0.0))
}

/// Probe points on the `s`-axis: `count` log-spaced offsets in
/// `[1e-3 L, 1e2 L]` from the finite endpoint (mirrored on the full line),
/// plus the endpoint itself.
pub fn s_lattice(map: &CompactMap, count: usize) -> Vec<f64> {
    let l = map.scale();
    let count = count.max(2);
    let offsets: Vec<f64> = (0..count)
        .map(|i| l * 10f64.powf(-3.0 + 5.0 * i as f64 / (count - 1) as f64))
        .collect();
    let mut out = match map.interval() {
        Interval::HalfLine { a } => {
            let mut v = vec![a];
            v.extend(offsets.iter().map(|d| a + d));
            v
        }
        Interval::FullLine => {
            let mut v: Vec<f64> = offsets.iter().rev().map(|d| -d).collect();
            v.push(0.0);
            v.extend(offsets.iter().copied());
            v
        }
    };
    out.dedup();
    out
}

/// Finite probe times: uniform in the compact coordinate, open ends.
pub fn t_lattice(map: &CompactMap, count: usize) -> Vec<f64> {
    let count = count.max(3);
    (0..count)
        .map(|i| -1.0 + 2.0 * i as f64 / (count - 1) as f64)
        .map(|x| x.clamp(-1.0 + 1e-6, 1.0 - 1e-6))
        .map(|x| map.t_of(x))
        .chain(match map.lower() {
            ExtReal::Finite(a) => Some(a),
            _ => None,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub pass: bool,
    /// `(ε, δ)` pairs; `δ = +inf` when the slices do not vary at all
    pub deltas: Vec<(f64, f64)>,
    /// `(t₁, t₂, s)` of the largest violation at the smallest tried `δ`
    pub worst: Option<(f64, f64, f64)>,
}

/// Search, for each `ε`, the largest `δ ≥ δ_min` with
/// `|slice(t₁,s) − slice(t₂,s)| ≤ ε ω(s)` for all lattice points `|t₁−t₂| < δ`.
pub fn kernel_modulus_check(
    kernel: &Kernel,
    w: &Weight,
    map: &CompactMap,
    omega: &dyn Fn(f64) -> f64,
    eps: &[f64],
    delta_min: f64,
) -> ModulusReport {
    let ts = t_lattice(map, 129);
    let ss = s_lattice(map, 64);
    let fracs = [0.25, 0.5, 0.75, 0.999];
    // worst ratio |Δslice| / ω over the lattice for a given δ
    let worst_ratio = |delta: f64| -> (f64, Option<(f64, f64, f64)>) {
        let mut best = (0.0, None);
        for &t1 in &ts {
            for &fr in &fracs {
                let t2 = t1 + fr * delta;
                if !map.contains(ExtReal::Finite(t2)) || !t2.is_finite() {
                    continue;
                }
                for &s in &ss {
                    let d = (kernel.slice(w, t1, s) - kernel.slice(w, t2, s)).abs();
                    let r = d / omega(s);
                    if r > best.0 || r.is_nan() {
                        best = (if r.is_nan() { f64::INFINITY } else { r }, Some((t1, t2, s)));
                    }
                }
            }
        }
        best
    };
    let mut candidates = vec![];
    let mut d = 1e3;
    while d >= delta_min {
        candidates.push(d);
        d *= 0.5;
    }
    candidates.push(delta_min);
    let ratios: Vec<(f64, Option<(f64, f64, f64)>)> = candidates.iter().map(|&d| worst_ratio(d)).collect();
    let mut pass = true;
    let mut deltas = vec![];
    for &e in eps {
        if ratios[0].0 == 0.0 {
            deltas.push((e, f64::INFINITY));
            continue;
        }
        match candidates.iter().zip(&ratios).find(|(_, r)| r.0 <= e) {
            Some((&d, _)) => deltas.push((e, d)),
            None => {
                pass = false;
                deltas.push((e, 0.0));
            }
        }
    }
    let worst = if pass { None } else { ratios.last().and_then(|r| r.1) };
    ModulusReport { pass, deltas, worst }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominatorReport {
    pub pass: bool,
    /// `(t, y, f(t, yφ(t)) − φ_r(t))` at the largest excess
    pub worst: Option<(f64, f64, f64)>,
}

/// Sample `f(t, yφ(t)) ≤ φ_r(t)` over `y ∈ [−r, r]` and the probe times.
pub fn dominator_check(nl: &Nonlinearity, w: &Weight, map: &CompactMap, r: f64, ny: usize) -> Result<DominatorReport> {
    if !(r > 0.0) {
        return Err(Error::domain("r must be positive"));
    }
    let dom = nl.dominator().ok_or_else(|| Error::Unsupported("nonlinearity has no dominator".into()))?;
    let ny = ny.max(2);
    let mut worst: Option<(f64, f64, f64)> = None;
    for t in t_lattice(map, 129) {
        let phi = w.eval(t);
        let bound = dom(r, t);
        for i in 0..ny {
            let y = -r + 2.0 * r * i as f64 / (ny - 1) as f64;
            let excess = nl.eval(t, y * phi) - bound;
            if excess > 1e-12 * bound.abs().max(1e-300) && worst.is_none_or(|w| excess > w.2) {
                worst = Some((t, y, excess));
            }
        }
    }
    Ok(DominatorReport { pass: worst.is_none(), worst })
}

/// Sample `f(t, y) ≥ 0` on probe times and `y ∈ [−y_max, y_max]`.
pub fn nonnegativity_check(nl: &Nonlinearity, map: &CompactMap, y_max: f64, ny: usize) -> Option<(f64, f64)> {
    let ny = ny.max(2);
    for t in t_lattice(map, 129) {
        for i in 0..ny {
            let y = -y_max + 2.0 * y_max * i as f64 / (ny - 1) as f64;
            if nl.eval(t, y) < 0.0 {
                return Some((t, y));
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C3Profile {
    pub r: f64,
    pub t: Vec<ExtReal>,
    /// `(1/φ(t)) ∫ |k(t,s)η(s)| φ_r(s) ds` at the nodes
    pub profile: Vec<f64>,
    pub sup: f64,
    /// `∫ ω φ_r`, when the kernel carries a modulus
    pub omega_integral: Option<f64>,
    pub z_minus_integral: f64,
    pub z_plus_integral: f64,
    pub m_integral: f64,
}

/// Order-0 boundedness profile of the operator over the ball of radius `r`.
pub fn c3_bound_profile(problem: &HammersteinProblem, r: f64, quad: &QuadConfig) -> Result<C3Profile> {
    if !(r > 0.0) {
        return Err(Error::domain("r must be positive"));
    }
    let nl = problem.nonlinearity();
    let dom = nl.dominator().ok_or_else(|| Error::Unsupported("nonlinearity has no dominator".into()))?.clone();
    let kernel = problem.kernel();
    let w = problem.weight();
    let map = *problem.map();
    let grid = problem.grid();
    let phi_r = |s: f64| dom(r, s);
    let z_int = |side: Side| -> Result<f64> {
        if let ExtReal::Finite(a) = map.endpoint(side) {
            let (xa, xb) = kernel.s_range(&map, a);
            return Ok(integrate_compact(&map, xa, xb, |_, s| kernel.slice(w, a, s).abs() * phi_r(s), quad)?.value);
        }
        let v = integrate_compact(
            &map,
            -1.0,
            1.0,
            |_, s| {
                let d = phi_r(s);
                if d == 0.0 {
                    return 0.0;
                }
                kernel.slice_limit(w, &map, side, s).map_or(f64::NAN, f64::abs) * d
            },
            quad,
        )?;
        Ok(v.value)
    };
    let profile = grid
        .t()
        .par_iter()
        .map(|&t| match t {
            ExtReal::Finite(tv) => {
                let (xa, xb) = kernel.s_range(&map, tv);
                integrate_compact(&map, xa, xb, |_, s| kernel.slice(w, tv, s).abs() * phi_r(s), quad).map(|r| r.value)
            }
            _ => z_int(if t == ExtReal::PosInf { Side::Upper } else { Side::Lower }),
        })
        .collect::<Result<Vec<f64>>>()?;
    let sup = profile.iter().fold(0.0f64, |m, v| m.max(*v));
    let omega_integral = match kernel.modulus() {
        Some(om) => Some(integrate_compact(&map, -1.0, 1.0, |_, s| om(s) * phi_r(s), quad)?.value),
        None => None,
    };
    let z_minus_integral = z_int(Side::Lower)?;
    let z_plus_integral = z_int(Side::Upper)?;
    let m_quad = QuadConfig { abs_tol: quad.abs_tol.max(1e-8), ..*quad };
    let m_integral = integrate_compact(
        &map,
        -1.0,
        1.0,
        |_, s| {
            let d = phi_r(s);
            if d == 0.0 {
                0.0
            } else {
                slice_sup(kernel, w, &map, s, 65).unwrap_or(f64::NAN) * d
            }
        },
        &m_quad,
    )?
    .value;
    Ok(C3Profile {
        r,
        t: grid.t().to_vec(),
        profile,
        sup,
        omega_integral,
        z_minus_integral,
        z_plus_integral,
        m_integral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(m: usize) -> (Arc<Grid>, Weight) {
        let g = Arc::new(Grid::new(CompactMap::half_line(0.0, 1.0).unwrap(), m).unwrap());
        (g, Weight::affine(1.0))
    }

    #[test]
    fn green_kernel_values() {
        let (g, w) = setup(17);
        let (k, p) = second_order_ivp_kernel(5.0, g, w).unwrap();
        assert_eq!(k.eval(3.0, 1.0), 2.0);
        assert_eq!(k.eval(1.0, 3.0), 0.0);
        assert!((p.raw_at(2.0) - 10.0).abs() < 1e-12);
        assert!((p.asymptotic_limits().1 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn zero_nonlinearity_returns_forcing() {
        let (g, w) = setup(17);
        let (k, p) = second_order_ivp_kernel(1.0, g, w).unwrap();
        let prob = HammersteinProblem::new(k, Nonlinearity::zero(), p.clone()).unwrap();
        let tu = apply_t(&prob, &p, &QuadConfig::default()).unwrap();
        assert_eq!(tu.tilde_row(0), p.tilde_row(0));
    }

    #[test]
    fn unit_nonlinearity_gives_half_square() {
        let (g, _) = setup(33);
        // φ = (1+t²) keeps t²/2 inside the space
        let w = Weight::power(2.0);
        let (k, _) = second_order_ivp_kernel(0.0, g.clone(), w.clone()).unwrap();
        let zero = WeightedFunction::zero(g.clone(), w.clone(), 0);
        let prob = HammersteinProblem::new(k, Nonlinearity::constant(1.0), zero.clone()).unwrap();
        // f ≡ 1 is not dominated, so only finite nodes are meaningful
        let cfg = QuadConfig::with_abs_tol(1e-12);
        for t in g.t().iter().filter_map(|t| t.finite()) {
            let v = apply_t_at(&prob, &zero, t, &cfg).unwrap();
            assert!((v - t * t / 2.0 / (1.0 + t * t)).abs() < 1e-10, "t = {t}");
        }
        assert!(apply_t(&prob, &zero, &cfg).is_err());
    }

    #[test]
    fn projectile_slice_limits() {
        let (g, w) = setup(9);
        let (k, _) = second_order_ivp_kernel(1.0, g.clone(), w.clone()).unwrap();
        for s in [0.0, 0.5, 3.0, 40.0] {
            let l = kernel_limits(&k, &w, g.map(), s).unwrap();
            assert_eq!(l.z_minus, 0.0);
            assert!((l.z_plus - 1.0).abs() < 1e-9);
            assert!((l.m - 1.0).abs() < 1e-9);
        }
        let z = kernel_limits(&Kernel::zero(), &w, g.map(), 1.0).unwrap();
        assert_eq!((z.z_minus, z.z_plus, z.m), (0.0, 0.0, 0.0));
    }

    #[test]
    fn decaying_slice_sup() {
        let map = CompactMap::full_line(1.0).unwrap();
        let k = Kernel::new("bump", Arc::new(|t: f64, s: f64| (-t.abs()).exp() * s.cos()), Arc::new(|_| 1.0), Support::Full);
        let w = Weight::constant(1.0).unwrap();
        let l = kernel_limits(&k, &w, &map, 2.0).unwrap();
        assert!(l.z_minus.abs() < 1e-12 && l.z_plus.abs() < 1e-12);
        assert!((l.m - 2f64.cos().abs()).abs() < 1e-12);
    }

    #[test]
    fn modulus_checks() {
        let (g, w) = setup(9);
        let (k, _) = second_order_ivp_kernel(1.0, g.clone(), w.clone()).unwrap();
        let rep = kernel_modulus_check(&k, &w, g.map(), &|s| 1.0 + s, &[0.1, 0.01], 1e-6);
        assert!(rep.pass, "{rep:?}");
        let rep = kernel_modulus_check(&k, &w, g.map(), &|_| 1e-9, &[0.1], 1e-6);
        assert!(!rep.pass);
        assert!(rep.worst.is_some());
        let rep = kernel_modulus_check(&Kernel::zero(), &w, g.map(), &|_| 1.0, &[0.1], 1e-6);
        assert!(rep.pass && rep.deltas[0].1.is_infinite());
    }

    #[test]
    fn dominator_checks() {
        let (g, w) = setup(9);
        let f = |t: f64, y: f64| if y > 0.0 { y * (-t).exp() } else { 0.0 };
        let good = Nonlinearity::new("p", Arc::new(f)).with_dominator(Arc::new(|r, t| r * (t + 1.0) * (-t).exp()));
        assert!(dominator_check(&good, &w, g.map(), 2.0, 41).unwrap().pass);
        let bad = Nonlinearity::new("p", Arc::new(f)).with_dominator(Arc::new(|r, t| 0.5 * r * (t + 1.0) * (-t).exp()));
        let rep = dominator_check(&bad, &w, g.map(), 2.0, 41).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.worst.unwrap().1, 2.0);
        assert!(dominator_check(&Nonlinearity::zero(), &w, g.map(), 7.0, 5).unwrap().pass);
        assert!(nonnegativity_check(&good, g.map(), 10.0, 21).is_none());
    }
}
