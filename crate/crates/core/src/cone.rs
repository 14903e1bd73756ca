//! Cone functionals and certificates for the fixed-point index conditions.
//!
//! A cone `K_α = {u : α(u) ≥ 0}` is described by a functional `α`; two more
//! functionals `β` and `γ` measure cone elements for the index lemmas. Every
//! "holds" produced here is a numerically certified sufficient condition; a
//! "fails" only means the condition could not be certified.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compactline::{CompactMap, ExtReal, Grid};
use crate::error::{Error, Result};
use crate::extremum::{sup_on_map, DEFAULT_SAMPLES};
use crate::hammerstein::{
    apply_t, c3_bound_profile, dominator_check, kernel_limits, kernel_modulus_check, nonnegativity_check,
    s_lattice, EnvelopeFn, HammersteinProblem, Kernel, Support,
};
use crate::quadrature::{integrate_compact, QuadConfig};
use crate::weighted_space::{lift, WeightedFunction};
use crate::weights::{Weight, WeightSpec};

/// Tolerance admitted as "≥ 0" in pointwise positivity checks.
pub const POSITIVITY_SLACK: f64 = 1e-12;
/// Relative slack for inequalities checked on sampled cone elements.
pub const SAMPLED_SLACK: f64 = 1e-7;
/// Margin an index inequality must clear to count as certified.
pub const INDEX_SLACK: f64 = 1e-9;

#[derive(Clone)]
pub enum Functional {
    /// `sup |u| / w`
    WeightedSup(Weight),
    /// `∫ u / w`
    WeightedIntegral(Weight),
    /// `∫ u / integral − sup |u| / sup`
    Difference { integral: Weight, sup: Weight },
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Serializable form of a [`Functional`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionalSpec {
    WeightedSup { weight: WeightSpec },
    WeightedIntegral { weight: WeightSpec },
    Difference { integral: WeightSpec, sup: WeightSpec },
}

impl FunctionalSpec {
    pub fn build(&self) -> Result<Functional> {
        Ok(match self {
            FunctionalSpec::WeightedSup { weight } => Functional::WeightedSup(weight.build()?),
            FunctionalSpec::WeightedIntegral { weight } => Functional::WeightedIntegral(weight.build()?),
            FunctionalSpec::Difference { integral, sup } => Functional::Difference {
                integral: integral.build()?,
                sup: sup.build()?,
            },
        })
    }
}

fn divergent(what: &str, e: Error) -> Error {
    Error::Domain(format!("{what}: integral divergent or unresolved ({e})"))
}

impl Functional {
    pub fn label(&self) -> String {
        match self {
            Functional::WeightedSup(w) => format!("sup|u|/{}", w.label()),
            Functional::WeightedIntegral(w) => format!("int u/{}", w.label()),
            Functional::Difference { integral, sup } => {
                format!("int u/{} - sup|u|/{}", integral.label(), sup.label())
            }
        }
    }

    /// Evaluate on a function given through `over(w, t) = g(t)/w(t)`, over
    /// `x ∈ [xa, 1]`.
    fn eval_over<R>(&self, map: &CompactMap, xa: f64, over: R, quad: &QuadConfig) -> Result<f64>
    where
        R: Fn(&Weight, f64) -> f64,
    {
        let sup = |w: &Weight| -> Result<f64> {
            let e = sup_on_map(map, xa, 1.0, |t| over(w, t).abs(), DEFAULT_SAMPLES)?;
            if e.value.is_finite() {
                Ok(e.value.max(0.0))
            } else {
                Err(Error::domain(format!("sup against {} is infinite", w.label())))
            }
        };
        let int = |w: &Weight| -> Result<f64> {
            integrate_compact(map, xa, 1.0, |_, t| over(w, t), quad)
                .map(|r| r.value)
                .map_err(|e| divergent(&w.label(), e))
        };
        match self {
            Functional::WeightedSup(w) => sup(w),
            Functional::WeightedIntegral(w) => int(w),
            Functional::Difference { integral, sup: s } => Ok(int(integral)? - sup(s)?),
        }
    }

    pub fn eval(&self, u: &WeightedFunction, quad: &QuadConfig) -> Result<f64> {
        self.eval_over(u.map(), -1.0, |w, t| u.over(w, t), quad)
    }

    /// Evaluate on a raw function `g` defined on the interval of `map`.
    pub fn eval_fn(&self, map: &CompactMap, g: &dyn Fn(f64) -> f64, quad: &QuadConfig) -> Result<f64> {
        self.eval_over(map, -1.0, |w, t| over_raw(g(t), w, t), quad)
    }

    /// Evaluate on the kernel slice `t ↦ k(t,s)η(s)`.
    pub fn eval_slice(&self, kernel: &Kernel, s: f64, map: &CompactMap, quad: &QuadConfig) -> Result<f64> {
        let xa = match kernel.support() {
            Support::Volterra => map.x_of(s),
            Support::Full => -1.0,
        };
        self.eval_over(map, xa, |w, t| over_raw(kernel.eval(t, s), w, t), quad)
    }
}

#[inline]
fn over_raw(g: f64, w: &Weight, t: f64) -> f64 {
    if g == 0.0 {
        0.0
    } else {
        g * (-w.ln_eval(t)).exp()
    }
}

/// `α`, `β`, `γ` together.
#[derive(Clone, Debug)]
pub struct ConeFunctionals {
    pub alpha: Functional,
    pub beta: Functional,
    pub gamma: Functional,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    pub integral: f64,
    pub positive: bool,
    /// first lattice point where the profile is not positive
    pub witness: Option<f64>,
}

/// `s ↦ F(k(·,s)η(s))` on the probe lattice and `∫ F(k(·,s)η(s)) ds`.
pub fn kernel_functional_integral(
    functional: &Functional,
    kernel: &Kernel,
    map: &CompactMap,
    quad: &QuadConfig,
) -> Result<KernelProfile> {
    let inner = QuadConfig { abs_tol: quad.abs_tol * 1e-2, ..*quad };
    let s = s_lattice(map, 256);
    let values = s
        .par_iter()
        .map(|&s| functional.eval_slice(kernel, s, map, &inner))
        .collect::<Result<Vec<f64>>>()?;
    let witness = s.iter().zip(&values).find(|(_, v)| !(**v > 0.0)).map(|(s, _)| *s);
    let integral = integrate_compact(
        map,
        -1.0,
        1.0,
        |_, s| functional.eval_slice(kernel, s, map, &inner).unwrap_or(f64::NAN),
        quad,
    )
    .map_err(|e| divergent("kernel profile", e))?
    .value;
    Ok(KernelProfile { s, values, integral, positive: witness.is_none(), witness })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotChecked,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub id: String,
    pub status: Status,
    /// tolerance the entry was decided at
    pub tolerance: Option<f64>,
    pub detail: String,
    /// named numbers locating a failure, or the values certified
    #[serde(with = "crate::float_repr::map")]
    pub witness: BTreeMap<String, f64>,
}

impl Entry {
    fn new(id: &str, status: Status, tolerance: Option<f64>, detail: impl Into<String>) -> Self {
        Entry { id: id.into(), status, tolerance, detail: detail.into(), witness: BTreeMap::new() }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.witness.insert(key.into(), v);
        self
    }
}

/// How a bridge between `β` and `γ` was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum Bridge {
    /// `bridge(ρ) = slope·ρ`, derived from the functionals' structure
    Linear { slope: f64 },
    /// `bridge(ρ) = slope·ρ`, estimated from random cone elements
    Heuristic { slope: f64 },
    /// the bridge is `+∞`
    Unbounded,
    NotAvailable,
}

impl Bridge {
    pub fn value(&self, rho: f64) -> Option<f64> {
        match *self {
            Bridge::Linear { slope } | Bridge::Heuristic { slope } => Some(slope * rho),
            _ => None,
        }
    }

    pub fn is_heuristic(&self) -> bool {
        matches!(self, Bridge::Heuristic { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scalars {
    /// `∫ β(k(·,s)η(s)) ds`
    #[serde(with = "crate::float_repr")]
    pub beta_kernel_integral: f64,
    /// `∫ γ(k(·,s)η(s)) ds`
    #[serde(with = "crate::float_repr")]
    pub gamma_kernel_integral: f64,
    #[serde(with = "crate::float_repr")]
    pub beta_p: f64,
    #[serde(with = "crate::float_repr")]
    pub gamma_p: f64,
    #[serde(with = "crate::float_repr")]
    pub alpha_p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub alpha: String,
    pub beta: String,
    pub gamma: String,
    pub entries: Vec<Entry>,
    pub scalars: Scalars,
    /// `β(u) ≤ b(ρ)` whenever `γ(u) < ρ`
    pub bridge_b: Bridge,
    /// `γ(u) ≤ c(ρ)` whenever `β(u) < ρ`
    pub bridge_c: Bridge,
    pub seed: u64,
    pub samples: usize,
}

impl CertificateReport {
    pub fn entry(&self, id: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn status(&self, id: &str) -> Status {
        self.entry(id).map_or(Status::NotChecked, |e| e.status)
    }

    /// Ids of the `C*` entries that failed.
    pub fn failing(&self) -> Vec<String> {
        self.entries
            .iter()
            .filter(|e| e.id.starts_with('C') && e.status == Status::Fail)
            .map(|e| e.id.clone())
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub quad: QuadConfig,
    /// random cone elements for the sampled inequalities
    pub samples: usize,
    pub seed: u64,
    /// radii for the domination and boundedness probes
    pub radii: Vec<f64>,
    /// `ε` values for the continuity-modulus search
    pub eps: Vec<f64>,
    pub delta_min: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            quad: QuadConfig::default(),
            samples: 6,
            seed: 0,
            radii: vec![0.5, 1.0, 2.0, 4.0],
            eps: vec![1e-1, 1e-2, 1e-3],
            delta_min: 1e-7,
        }
    }
}

/// A random element with nonnegative `ũ`: a positive mix of a constant, a
/// ramp and Gaussian bumps in the compact coordinate. Rows up to order 1.
pub fn random_nonnegative(grid: &Arc<Grid>, weight: &Weight, order: usize, rng: &mut ChaCha8Rng) -> Result<WeightedFunction> {
    if order > 1 {
        return Err(Error::Unsupported("random elements are generated up to order 1".into()));
    }
    let c0: f64 = rng.gen_range(0.0..1.0);
    let ramp: f64 = rng.gen_range(0.0..1.0);
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.25..0.8)))
        .collect();
    let map = *grid.map();
    let value = |x: f64| {
        c0 + ramp * 0.5 * (1.0 + x) + bumps.iter().map(|&(a, c, w)| a * (-((x - c) / w).powi(2)).exp()).sum::<f64>()
    };
    let dx = |x: f64| {
        0.5 * ramp + bumps.iter().map(|&(a, c, w)| -2.0 * a * (x - c) / (w * w) * (-((x - c) / w).powi(2)).exp()).sum::<f64>()
    };
    let mut rows = vec![grid.x().iter().map(|&x| value(x)).collect::<Vec<_>>()];
    if order == 1 {
        rows.push(
            grid.x()
                .iter()
                .zip(grid.t())
                .map(|(&x, t)| if t.is_finite() { dx(x) / map.jacobian(x) } else { 0.0 })
                .collect(),
        );
    }
    lift(rows, weight.clone(), grid.clone())
}

/// Random cone element: a nonnegative element, shifted along `ξ` when
/// `α(ξ) > 0` so that `α ≥ 0` holds by superadditivity. `None` when the
/// sample cannot be brought into the cone.
pub fn random_cone_element(
    problem: &HammersteinProblem,
    alpha: &Functional,
    xi: Option<(&WeightedFunction, f64)>,
    rng: &mut ChaCha8Rng,
    quad: &QuadConfig,
) -> Result<Option<WeightedFunction>> {
    let u = random_nonnegative(problem.grid(), problem.weight(), problem.order(), rng)?;
    let a = alpha.eval(&u, quad)?;
    if a >= 0.0 {
        return Ok(Some(u));
    }
    match xi {
        Some((xi, a_xi)) if a_xi > 0.0 => {
            let lambda = 1.05 * (-a) / a_xi;
            let v = u.lincomb(1.0, xi, lambda)?;
            Ok((alpha.eval(&v, quad)? >= 0.0).then_some(v))
        }
        _ => Ok(None),
    }
}

/// `∫ F(k(·,s)η(s)) f(s, u(s)) ds`
fn weighted_kernel_action(
    functional: &Functional,
    problem: &HammersteinProblem,
    u: &WeightedFunction,
    quad: &QuadConfig,
) -> Result<f64> {
    let inner = QuadConfig { abs_tol: quad.abs_tol * 1e-2, ..*quad };
    let map = *problem.map();
    let kernel = problem.kernel();
    let nl = problem.nonlinearity();
    let w = problem.weight();
    integrate_compact(
        &map,
        -1.0,
        1.0,
        |x, s| {
            let fv = nl.eval(s, u.tilde_at_x(x) * w.eval(s));
            if fv == 0.0 {
                return 0.0;
            }
            functional.eval_slice(kernel, s, &map, &inner).unwrap_or(f64::NAN) * fv
        },
        quad,
    )
    .map(|r| r.value)
    .map_err(|e| divergent("kernel action", e))
}

fn weights_proportional(a: &Weight, b: &Weight, grid: &Grid) -> Option<f64> {
    let map = grid.map();
    let mut ts: Vec<f64> = grid.t().iter().filter_map(|t| t.finite()).collect();
    ts.extend(map.tail_points(crate::compactline::Side::Upper));
    if map.lower() == ExtReal::NegInf {
        ts.extend(map.tail_points(crate::compactline::Side::Lower));
    }
    let r0 = a.ratio(b, ts[0]);
    // log-space ratios lose about one ulp of |t|
    ts.iter()
        .all(|&t| (a.ratio(b, t) - r0).abs() <= (1e-13 + 4.0 * f64::EPSILON * t.abs()) * r0.abs())
        .then_some(r0)
}

fn weight_ratio_integral(num: &Weight, den: &Weight, map: &CompactMap, quad: &QuadConfig) -> Option<f64> {
    integrate_compact(map, -1.0, 1.0, |_, t| num.ratio(den, t), quad).ok().map(|r| r.value)
}

/// Derive the bridges `b` and `c` from the structure of the functionals.
fn structural_bridges(f: &ConeFunctionals, grid: &Grid, quad: &QuadConfig) -> (Bridge, Bridge) {
    let mut b = Bridge::NotAvailable;
    let mut c = Bridge::NotAvailable;
    // on K_α: sup|u|/S ≤ ∫u/I = γ(u)/κ when I = κ·G
    if let (Functional::Difference { integral, sup }, Functional::WeightedSup(s), Functional::WeightedIntegral(g)) =
        (&f.alpha, &f.beta, &f.gamma)
    {
        if sup.label() == s.label() {
            if let Some(kappa) = weights_proportional(integral, g, grid) {
                b = Bridge::Linear { slope: 1.0 / kappa };
            }
        }
    }
    // γ(u) ≤ ∫|u|/G ≤ β(u)·∫S/G
    if let (Functional::WeightedSup(s), Functional::WeightedIntegral(g)) = (&f.beta, &f.gamma) {
        let map = grid.map();
        let unbounded_domain = map.upper() == ExtReal::PosInf;
        c = match weight_ratio_integral(s, g, map, quad) {
            Some(v) if v.is_finite() => Bridge::Linear { slope: v },
            _ if unbounded_domain => {
                // S/G bounded below near infinity means γ is unbounded on β-balls
                let tail = map.tail_points(crate::compactline::Side::Upper);
                let last = s.ratio(g, *tail.last().unwrap_or(&1.0));
                if last > 1e-6 {
                    Bridge::Unbounded
                } else {
                    Bridge::NotAvailable
                }
            }
            _ => Bridge::NotAvailable,
        };
    }
    (b, c)
}

/// Estimate `sup num(u)/den(u)` over sampled cone elements.
fn heuristic_slope(num: &Functional, den: &Functional, elems: &[WeightedFunction], quad: &QuadConfig) -> Option<f64> {
    let mut best: Option<f64> = None;
    for u in elems {
        let (Ok(n), Ok(d)) = (num.eval(u, quad), den.eval(u, quad)) else { continue };
        if d > 0.0 {
            let r = n / d;
            best = Some(best.map_or(r, |b: f64| b.max(r)));
        }
    }
    best
}

fn ok_or_fail(pass: bool) -> Status {
    if pass {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// Check the regularity and cone hypotheses on samples and lattices.
pub fn verify_cone_hypotheses(
    problem: &HammersteinProblem,
    f: &ConeFunctionals,
    opts: &VerifyOptions,
) -> Result<CertificateReport> {
    let quad = &opts.quad;
    let map = *problem.map();
    let grid = problem.grid();
    let kernel = problem.kernel();
    let nl = problem.nonlinearity();
    let w = problem.weight();
    let p = problem.forcing();
    let mut entries = Vec::new();
    let lattice = s_lattice(&map, 256);

    // C1: integrable rows, liftable slices, continuity modulus
    {
        let probe_t: Vec<f64> = grid.t().iter().filter_map(|t| t.finite()).step_by(8).collect();
        let mut bad_row = None;
        for &t in &probe_t {
            let r = integrate_compact(&map, -1.0, 1.0, |_, s| kernel.eval(t, s).abs(), quad);
            if r.is_err() {
                bad_row = Some(t);
                break;
            }
        }
        let bad_slice = lattice.iter().find(|&&s| kernel_limits(kernel, w, &map, s).is_err()).copied();
        let entry = if let Some(t) = bad_row {
            Entry::new("C1", Status::Fail, Some(quad.abs_tol), "k(t,·)η not integrable").with("t", t)
        } else if let Some(s) = bad_slice {
            Entry::new("C1", Status::Fail, None, "slice k(·,s)η(s) has no weighted endpoint limit").with("s", s)
        } else if let Some(om) = kernel.modulus() {
            let om = om.clone();
            let rep = kernel_modulus_check(kernel, w, &map, &|s| om(s), &opts.eps, opts.delta_min);
            let mut e = Entry::new(
                "C1",
                ok_or_fail(rep.pass),
                Some(opts.delta_min),
                if rep.pass { "modulus certified on lattice" } else { "no δ ≥ δ_min satisfies the modulus" },
            );
            for (eps, d) in &rep.deltas {
                e = e.with(&format!("delta(eps={eps})"), *d);
            }
            if let Some((t1, t2, s)) = rep.worst {
                e = e.with("t1", t1).with("t2", t2).with("s", s);
            }
            e
        } else {
            Entry::new("C1", Status::NotChecked, None, "rows and slices fine; no continuity modulus supplied")
        };
        let entry = if problem.order() > 0 && entry.status == Status::Pass {
            Entry { detail: format!("{}; derivative orders not checked", entry.detail), ..entry }
        } else {
            entry
        };
        entries.push(entry);
    }

    // C2: sign and domination
    {
        let y_max = 4.0 * opts.radii.iter().fold(1.0f64, |m, r| m.max(*r)) * w.eval(map.t_of(0.0));
        let entry = if let Some((t, y)) = nonnegativity_check(nl, &map, y_max, 41) {
            Entry::new("C2", Status::Fail, Some(0.0), "f takes a negative value").with("t", t).with("y", y)
        } else if nl.dominator().is_none() {
            Entry::new("C2", Status::NotChecked, None, "no dominator supplied")
        } else {
            let mut e = Entry::new("C2", Status::Pass, Some(1e-12), "f(t, yφ(t)) ≤ φ_r(t) on lattice");
            for &r in &opts.radii {
                let rep = dominator_check(nl, w, &map, r, 41)?;
                let dom = nl.dominator().unwrap().clone();
                let l1 = integrate_compact(&map, -1.0, 1.0, |_, s| dom(r, s).abs(), quad);
                if !rep.pass {
                    let (t, y, ex) = rep.worst.unwrap();
                    e = Entry::new("C2", Status::Fail, Some(1e-12), "domination violated")
                        .with("r", r)
                        .with("t", t)
                        .with("y", y)
                        .with("excess", ex);
                    break;
                }
                match l1 {
                    Ok(v) => e = e.with(&format!("int phi_r (r={r})"), v.value),
                    Err(_) => {
                        e = Entry::new("C2", Status::Fail, Some(quad.abs_tol), "φ_r not integrable").with("r", r);
                        break;
                    }
                }
            }
            e
        };
        entries.push(entry);
    }

    // C3: boundedness profile and integrability of z^±φ_r, Mφ_r, ωφ_r
    {
        let entry = if nl.dominator().is_none() {
            Entry::new("C3", Status::NotChecked, None, "no dominator supplied")
        } else {
            let mut e = Entry::new("C3", Status::Pass, Some(quad.abs_tol), "profile bounded, tail scalars finite");
            for &r in &[1.0] {
                match c3_bound_profile(problem, r, quad) {
                    Ok(prof) if prof.sup.is_finite() => {
                        e = e
                            .with(&format!("sup profile (r={r})"), prof.sup)
                            .with(&format!("int |z-| phi_r (r={r})"), prof.z_minus_integral)
                            .with(&format!("int |z+| phi_r (r={r})"), prof.z_plus_integral)
                            .with(&format!("int M phi_r (r={r})"), prof.m_integral);
                        if let Some(o) = prof.omega_integral {
                            e = e.with(&format!("int omega phi_r (r={r})"), o);
                        }
                    }
                    Ok(_) => e = Entry::new("C3", Status::Fail, None, "profile unbounded").with("r", r),
                    Err(err) => e = Entry::new("C3", Status::Fail, None, format!("{err}")).with("r", r),
                }
            }
            e
        };
        entries.push(entry);
    }

    // C4
    {
        let (lo, hi) = p.asymptotic_limits();
        entries.push(
            Entry::new("C4", Status::Pass, None, "forcing stored with finite weighted endpoint values")
                .with("p~(lower)", lo)
                .with("p~(upper)", hi),
        );
    }

    // scalars
    let alpha_p = f.alpha.eval(p, quad)?;
    let beta_p = f.beta.eval(p, quad)?;
    let gamma_p = f.gamma.eval(p, quad)?;
    let beta_prof = kernel_functional_integral(&f.beta, kernel, &map, quad);
    let gamma_prof = kernel_functional_integral(&f.gamma, kernel, &map, quad);

    // C5
    {
        let inner = QuadConfig { abs_tol: quad.abs_tol * 1e-2, ..*quad };
        let vals: Vec<(f64, Result<f64>)> = lattice
            .par_iter()
            .map(|&s| (s, f.alpha.eval_slice(kernel, s, &map, &inner)))
            .collect();
        let mut e = Entry::new("C5", Status::Pass, Some(POSITIVITY_SLACK), "α(k(·,s)η(s)) ≥ 0 on lattice and α(p) ≥ 0")
            .with("alpha(p)", alpha_p);
        if let Some((s, v)) = vals.iter().find(|(_, v)| !matches!(v, Ok(x) if *x >= -POSITIVITY_SLACK)) {
            e = Entry::new("C5", Status::Fail, Some(POSITIVITY_SLACK), "α(k(·,s)η(s)) < 0")
                .with("s", *s)
                .with("alpha(k(.,s))", *v.as_ref().unwrap_or(&f64::NAN))
                .with("alpha(p)", alpha_p);
        } else if alpha_p < -POSITIVITY_SLACK {
            e = Entry::new("C5", Status::Fail, Some(POSITIVITY_SLACK), "α(p) < 0").with("alpha(p)", alpha_p);
        }
        entries.push(e);
    }

    // sampled cone elements for C6, C7, P1–P3 and heuristic bridges
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let xi = (alpha_p > 0.0).then_some((p, alpha_p));
    let mut elems = Vec::new();
    let mut attempts = 0;
    let sampling_supported = problem.order() <= 1;
    while sampling_supported && elems.len() < opts.samples && attempts < 20 * opts.samples.max(1) {
        attempts += 1;
        if let Some(u) = random_cone_element(problem, &f.alpha, xi, &mut rng, quad)? {
            elems.push(u);
        }
    }

    // C6 and the T-inequalities of C7
    let mut c6 = Entry::new("C6", Status::Pass, Some(SAMPLED_SLACK), format!("α(Tu) ≥ ∫α(k)f + α(p) on {} cone samples", elems.len()));
    let mut c7_beta_ineq: Option<Entry> = None;
    let mut c7_gamma_ineq: Option<Entry> = None;
    if elems.is_empty() {
        c6 = Entry::new("C6", Status::NotChecked, None, "no cone elements could be sampled");
    }
    for (i, u) in elems.iter().enumerate() {
        let tu = match apply_t(problem, u, quad) {
            Ok(tu) => tu,
            Err(e) => {
                c6 = Entry::new("C6", Status::NotChecked, None, format!("T could not be applied: {e}"));
                break;
            }
        };
        let slack = |x: f64| SAMPLED_SLACK * x.abs().max(1.0);
        let lhs = f.alpha.eval(&tu, quad)?;
        let rhs = weighted_kernel_action(&f.alpha, problem, u, quad)? + alpha_p;
        if lhs < rhs - slack(rhs) && c6.status == Status::Pass {
            c6 = Entry::new("C6", Status::Fail, Some(SAMPLED_SLACK), "α(Tu) below the kernel bound")
                .with("sample", i as f64)
                .with("alpha(Tu)", lhs)
                .with("rhs", rhs);
        }
        let lhs = f.beta.eval(&tu, quad)?;
        let rhs = weighted_kernel_action(&f.beta, problem, u, quad)? + beta_p;
        if lhs > rhs + slack(rhs) && c7_beta_ineq.is_none() {
            c7_beta_ineq = Some(
                Entry::new("C7", Status::Fail, Some(SAMPLED_SLACK), "β(Tu) above the kernel bound")
                    .with("sample", i as f64)
                    .with("beta(Tu)", lhs)
                    .with("rhs", rhs),
            );
        }
        let lhs = f.gamma.eval(&tu, quad)?;
        let rhs = weighted_kernel_action(&f.gamma, problem, u, quad)? + gamma_p;
        if lhs < rhs - slack(rhs) && c7_gamma_ineq.is_none() {
            c7_gamma_ineq = Some(
                Entry::new("C7", Status::Fail, Some(SAMPLED_SLACK), "γ(Tu) below the kernel bound")
                    .with("sample", i as f64)
                    .with("gamma(Tu)", lhs)
                    .with("rhs", rhs),
            );
        }
    }
    entries.push(c6);

    // C7: homogeneity/superadditivity, positive integrable profiles, T-inequalities
    let (beta_int, gamma_int) = {
        let mut e = Entry::new("C7", Status::Pass, Some(SAMPLED_SLACK), "β, γ profiles positive and integrable; sampled inequalities hold");
        let mut beta_int = f64::NAN;
        let mut gamma_int = f64::NAN;
        match (&beta_prof, &gamma_prof) {
            (Ok(b), Ok(g)) => {
                beta_int = b.integral;
                gamma_int = g.integral;
                e = e.with("int beta(k)", beta_int).with("int gamma(k)", gamma_int);
                if let Some(s) = b.witness {
                    e = Entry::new("C7", Status::Fail, Some(0.0), "β(k(·,s)η(s)) not positive").with("s", s);
                } else if let Some(s) = g.witness {
                    e = Entry::new("C7", Status::Fail, Some(0.0), "γ(k(·,s)η(s)) not positive").with("s", s);
                }
            }
            (Err(err), _) | (_, Err(err)) => {
                e = Entry::new("C7", Status::Fail, None, format!("profile integral failed: {err}"));
            }
        }
        if e.status == Status::Pass {
            if let Some(bad) = c7_beta_ineq.or(c7_gamma_ineq) {
                e = bad;
            }
        }
        if e.status == Status::Pass {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
            for pair in elems.chunks(2).filter(|c| c.len() == 2) {
                let lam: f64 = rng.gen_range(0.0..5.0);
                let (u, v) = (&pair[0], &pair[1]);
                let bu = f.beta.eval(u, quad)?;
                let blu = f.beta.eval(&u.scaled(lam), quad)?;
                let gu = f.gamma.eval(u, quad)?;
                let gv = f.gamma.eval(v, quad)?;
                let guv = f.gamma.eval(&u.lincomb(1.0, v, 1.0)?, quad)?;
                let glu = f.gamma.eval(&u.scaled(lam), quad)?;
                if (blu - lam * bu).abs() > SAMPLED_SLACK * blu.abs().max(1.0) {
                    e = Entry::new("C7", Status::Fail, Some(SAMPLED_SLACK), "β not positively homogeneous")
                        .with("lambda", lam)
                        .with("beta(lambda u)", blu)
                        .with("beta(u)", bu);
                    break;
                }
                if guv < gu + gv - SAMPLED_SLACK * guv.abs().max(1.0) || glu < lam * gu - SAMPLED_SLACK * glu.abs().max(1.0) {
                    e = Entry::new("C7", Status::Fail, Some(SAMPLED_SLACK), "γ not superadditive/homogeneous")
                        .with("gamma(u+v)", guv)
                        .with("gamma(u)+gamma(v)", gu + gv);
                    break;
                }
            }
        }
        entries.push(e);
        (beta_int, gamma_int)
    };

    // C8 with ξ = p
    entries.push(if alpha_p >= -POSITIVITY_SLACK && gamma_p > 0.0 && p.norm(crate::weighted_space::NormKind::Phi) > 0.0 {
        Entry::new("C8", Status::Pass, Some(POSITIVITY_SLACK), "ξ = p lies in the cone with γ(p) > 0").with("gamma(p)", gamma_p)
    } else {
        Entry::new("C8", Status::Fail, Some(POSITIVITY_SLACK), "ξ = p does not certify")
            .with("alpha(p)", alpha_p)
            .with("gamma(p)", gamma_p)
    });

    // C9 via bridges
    let (mut bridge_b, mut bridge_c) = structural_bridges(f, grid, quad);
    if bridge_b == Bridge::NotAvailable {
        if let Some(s) = heuristic_slope(&f.beta, &f.gamma, &elems, quad) {
            bridge_b = Bridge::Heuristic { slope: s };
        }
    }
    if bridge_c == Bridge::NotAvailable {
        if let Some(s) = heuristic_slope(&f.gamma, &f.beta, &elems, quad) {
            bridge_c = Bridge::Heuristic { slope: s };
        }
    }
    {
        let usable = |b: &Bridge| matches!(b, Bridge::Linear { .. } | Bridge::Heuristic { .. });
        let mut e = Entry::new(
            "C9",
            ok_or_fail(usable(&bridge_b) || usable(&bridge_c)),
            None,
            format!("b: {bridge_b:?}; c: {bridge_c:?}"),
        );
        if let Some(v) = bridge_b.value(1.0) {
            e = e.with("b(1)", v);
        }
        if let Some(v) = bridge_c.value(1.0) {
            e = e.with("c(1)", v);
        }
        entries.push(e);
    }

    // P1–P3 on sampled pairs, with and without the cone restriction
    {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
        let mut p1 = Entry::new("P1", Status::Pass, Some(1e-10), "α(u+v) ≥ α(u)+α(v) on samples");
        let mut p2 = Entry::new("P2", Status::Pass, Some(1e-10), "α(λu) ≥ λα(u) on samples");
        let mut p3 = Entry::new("P3", Status::Pass, None, "no nonzero u with α(u) ≥ 0 and α(−u) ≥ 0 found (falsification search)");
        if sampling_supported {
            for _ in 0..opts.samples.max(2) {
                let u = random_nonnegative(grid, w, problem.order(), &mut rng)?;
                let v = random_nonnegative(grid, w, problem.order(), &mut rng)?;
                let lam: f64 = rng.gen_range(0.0..5.0);
                let au = f.alpha.eval(&u, quad)?;
                let av = f.alpha.eval(&v, quad)?;
                let auv = f.alpha.eval(&u.lincomb(1.0, &v, 1.0)?, quad)?;
                let alu = f.alpha.eval(&u.scaled(lam), quad)?;
                let amu = f.alpha.eval(&u.scaled(-1.0), quad)?;
                if auv < au + av - 1e-10 && p1.status == Status::Pass {
                    p1 = Entry::new("P1", Status::Fail, Some(1e-10), "superadditivity violated").with("alpha(u+v)", auv).with("alpha(u)+alpha(v)", au + av);
                }
                if alu < lam * au - 1e-10 && p2.status == Status::Pass {
                    p2 = Entry::new("P2", Status::Fail, Some(1e-10), "homogeneity violated").with("lambda", lam).with("alpha(lambda u)", alu);
                }
                if au >= 0.0 && amu >= 0.0 && u.norm(crate::weighted_space::NormKind::Phi) > 0.0 && p3.status == Status::Pass {
                    p3 = Entry::new("P3", Status::Fail, None, "nonzero u with α(u) ≥ 0 and α(−u) ≥ 0").with("alpha(u)", au).with("alpha(-u)", amu);
                }
            }
        } else {
            p1 = Entry::new("P1", Status::NotChecked, None, "sampling supports order ≤ 1");
            p2 = Entry::new("P2", Status::NotChecked, None, "sampling supports order ≤ 1");
            p3 = Entry::new("P3", Status::NotChecked, None, "sampling supports order ≤ 1");
        }
        entries.extend([p1, p2, p3]);
    }

    Ok(CertificateReport {
        alpha: f.alpha.label(),
        beta: f.beta.label(),
        gamma: f.gamma.label(),
        entries,
        scalars: Scalars {
            beta_kernel_integral: beta_int,
            gamma_kernel_integral: gamma_int,
            beta_p,
            gamma_p,
            alpha_p,
        },
        bridge_b,
        bridge_c,
        seed: opts.seed,
        samples: elems.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexCheck {
    pub rho: f64,
    #[serde(with = "crate::float_repr")]
    pub lhs: f64,
    /// `1 − lhs` for the index-one test, `lhs − 1` for the index-zero test
    #[serde(with = "crate::float_repr")]
    pub margin: f64,
    pub holds: bool,
}

fn envelope_extremum(env: Option<&EnvelopeFn>, map: &CompactMap, rho: f64, upper: bool) -> Result<f64> {
    let Some(env) = env else {
        return Ok(if upper { f64::INFINITY } else { 0.0 });
    };
    let e = if upper {
        sup_on_map(map, -1.0, 1.0, |t| env(t, rho), DEFAULT_SAMPLES)?.value
    } else {
        -sup_on_map(map, -1.0, 1.0, |t| -env(t, rho), DEFAULT_SAMPLES)?.value
    };
    Ok(e / rho)
}

/// Index-one test: `f^ρ ∫β(k) + β(p)/ρ < 1` with `f^ρ ≤ sup_t F(t,ρ)/ρ`.
pub fn check_index_one(report: &CertificateReport, rho: f64, upper: Option<&EnvelopeFn>, map: &CompactMap) -> Result<IndexCheck> {
    if !(rho > 0.0) {
        return Err(Error::domain(format!("ρ must be positive, got {rho}")));
    }
    let f_sup = envelope_extremum(upper, map, rho, true)?;
    let s = &report.scalars;
    let lhs = if s.beta_kernel_integral == 0.0 { 0.0 } else { f_sup * s.beta_kernel_integral } + s.beta_p / rho;
    let margin = 1.0 - lhs;
    Ok(IndexCheck { rho, lhs, margin, holds: margin > INDEX_SLACK })
}

/// Index-zero test: `f_ρ ∫γ(k) + γ(p)/ρ > 1` with `f_ρ ≥ inf_t G(t,ρ)/ρ`
/// (0 when no lower envelope is given).
pub fn check_index_zero(report: &CertificateReport, rho: f64, lower: Option<&EnvelopeFn>, map: &CompactMap) -> Result<IndexCheck> {
    if !(rho > 0.0) {
        return Err(Error::domain(format!("ρ must be positive, got {rho}")));
    }
    let f_inf = envelope_extremum(lower, map, rho, false)?.max(0.0);
    let s = &report.scalars;
    let lhs = f_inf * s.gamma_kernel_integral + s.gamma_p / rho;
    let margin = lhs - 1.0;
    Ok(IndexCheck { rho, lhs, margin, holds: margin > INDEX_SLACK })
}

/// Log-spaced radii.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoScan {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for RhoScan {
    fn default() -> Self {
        RhoScan { min: 0.05, max: 20.0, count: 200 }
    }
}

impl RhoScan {
    pub fn radii(&self) -> Result<Vec<f64>> {
        if !(self.min > 0.0 && self.max > self.min && self.count >= 2) {
            return Err(Error::invalid(format!("bad ρ scan {self:?}")));
        }
        let (a, b) = (self.min.ln(), self.max.ln());
        Ok((0..self.count)
            .map(|i| (a + (b - a) * i as f64 / (self.count - 1) as f64).exp())
            .collect())
    }
}

/// Locate the radius where the index-one test starts to hold: scan, then
/// bisect between the first failing/holding neighbours. Returns the final
/// `(fails, holds)` bracket.
pub fn index_one_threshold(
    report: &CertificateReport,
    upper: Option<&EnvelopeFn>,
    map: &CompactMap,
    scan: &RhoScan,
    tol: f64,
) -> Result<Option<(f64, f64)>> {
    let radii = scan.radii()?;
    let mut prev: Option<f64> = None;
    for &r in &radii {
        let holds = check_index_one(report, r, upper, map)?.holds;
        if holds {
            let Some(mut lo) = prev else { return Ok(None) };
            let mut hi = r;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if check_index_one(report, mid, upper, map)?.holds {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some((lo, hi)));
        }
        prev = Some(r);
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pattern {
    S1,
    S2,
    S3,
    S4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexWindow {
    pub pattern: Pattern,
    pub radii: Vec<f64>,
    /// margins of the index inequalities, in radius order
    pub margins: Vec<f64>,
    /// bridge values the ordering constraints were checked against
    pub bridges: Vec<f64>,
    pub heuristic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSearch {
    pub windows: Vec<IndexWindow>,
    /// failing hypotheses that prevented the search
    pub blocked_by: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Which {
    One,
    Zero,
}

/// Certify a specific window: the index tests at each radius and the
/// bridge ordering between consecutive radii.
pub fn certify_window(
    report: &CertificateReport,
    pattern: Pattern,
    radii: &[f64],
    upper: Option<&EnvelopeFn>,
    lower: Option<&EnvelopeFn>,
    map: &CompactMap,
) -> Result<Option<IndexWindow>> {
    let (tests, bridges): (&[Which], &[Bridge]) = match pattern {
        Pattern::S1 => (&[Which::Zero, Which::One], &[report.bridge_b]),
        Pattern::S2 => (&[Which::One, Which::Zero], &[report.bridge_c]),
        Pattern::S3 => (&[Which::Zero, Which::One, Which::Zero], &[report.bridge_b, report.bridge_c]),
        Pattern::S4 => (&[Which::One, Which::Zero, Which::One], &[report.bridge_c, report.bridge_b]),
    };
    if radii.len() != tests.len() {
        return Err(Error::invalid(format!("{pattern:?} needs {} radii", tests.len())));
    }
    let mut margins = Vec::new();
    for (&r, &which) in radii.iter().zip(tests) {
        let c = match which {
            Which::One => check_index_one(report, r, upper, map)?,
            Which::Zero => check_index_zero(report, r, lower, map)?,
        };
        if !c.holds {
            return Ok(None);
        }
        margins.push(c.margin);
    }
    let mut bvals = Vec::new();
    for (i, b) in bridges.iter().enumerate() {
        match b.value(radii[i]) {
            Some(v) if radii[i + 1] > v => bvals.push(v),
            _ => return Ok(None),
        }
    }
    Ok(Some(IndexWindow {
        pattern,
        radii: radii.to_vec(),
        margins,
        bridges: bvals,
        heuristic: bridges.iter().any(Bridge::is_heuristic),
    }))
}

/// Scan the radii for windows of every pattern. For each first radius the
/// smallest admissible later radii are reported.
pub fn find_solution_windows(
    report: &CertificateReport,
    upper: Option<&EnvelopeFn>,
    lower: Option<&EnvelopeFn>,
    map: &CompactMap,
    scan: &RhoScan,
) -> Result<WindowSearch> {
    let blocked_by = report.failing();
    if !blocked_by.is_empty() {
        return Ok(WindowSearch { windows: vec![], blocked_by });
    }
    let radii = scan.radii()?;
    let one: Vec<IndexCheck> = radii.iter().map(|&r| check_index_one(report, r, upper, map)).collect::<Result<_>>()?;
    let zero: Vec<IndexCheck> = radii.iter().map(|&r| check_index_zero(report, r, lower, map)).collect::<Result<_>>()?;
    let first_after = |checks: &[IndexCheck], bound: f64| checks.iter().find(|c| c.holds && c.rho > bound).map(|c| c.rho);
    let mut windows = Vec::new();
    for pattern in [Pattern::S1, Pattern::S2, Pattern::S3, Pattern::S4] {
        let (first, second, third, b1, b2): (&[IndexCheck], &[IndexCheck], Option<&[IndexCheck]>, Bridge, Option<Bridge>) =
            match pattern {
                Pattern::S1 => (&zero, &one, None, report.bridge_b, None),
                Pattern::S2 => (&one, &zero, None, report.bridge_c, None),
                Pattern::S3 => (&zero, &one, Some(&zero), report.bridge_b, Some(report.bridge_c)),
                Pattern::S4 => (&one, &zero, Some(&one), report.bridge_c, Some(report.bridge_b)),
            };
        for c1 in first.iter().filter(|c| c.holds) {
            let Some(bv) = b1.value(c1.rho) else { break };
            let Some(r2) = first_after(second, bv) else { continue };
            let mut rs = vec![c1.rho, r2];
            if let (Some(third), Some(b2)) = (third, b2) {
                let Some(bv2) = b2.value(r2) else { break };
                let Some(r3) = first_after(third, bv2) else { continue };
                rs.push(r3);
            }
            if let Some(w) = certify_window(report, pattern, &rs, upper, lower, map)? {
                windows.push(w);
            }
        }
    }
    Ok(WindowSearch { windows, blocked_by })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hammerstein::second_order_ivp_kernel;

    fn projectile_parts() -> (CompactMap, Kernel) {
        let map = CompactMap::half_line(0.0, 1.0).unwrap();
        let g = Arc::new(Grid::new(map, 17).unwrap());
        let (k, _) = second_order_ivp_kernel(1.0, g, Weight::affine(1.0)).unwrap();
        (map, k)
    }

    #[test]
    fn slice_functionals_closed_forms() {
        let (map, k) = projectile_parts();
        let q = QuadConfig::with_abs_tol(1e-12);
        let gamma = Functional::WeightedIntegral(Weight::exponential(1.0).unwrap());
        let beta = Functional::WeightedSup(Weight::exponential(1.0).unwrap());
        for s in [0.0, 0.3, 2.0, 9.0, 150.0] {
            let g = gamma.eval_slice(&k, s, &map, &q).unwrap();
            assert!((g - (-s).exp()).abs() < 1e-12, "s = {s}");
            let b = beta.eval_slice(&k, s, &map, &q).unwrap();
            assert!((b - (-(s + 1.0)).exp()).abs() <= 1e-14 * (-s).exp(), "s = {s}");
        }
    }

    #[test]
    fn functional_on_linear_forcing() {
        let map = CompactMap::half_line(0.0, 1.0).unwrap();
        let g = Arc::new(Grid::new(map, 33).unwrap());
        let p = WeightedFunction::from_raw_fn(g, Weight::affine(1.0), |t| t).unwrap();
        let q = QuadConfig::default();
        let gamma = Functional::WeightedIntegral(Weight::exponential(1.0).unwrap());
        assert!((gamma.eval(&p, &q).unwrap() - 1.0).abs() < 1e-9);
        let alpha = Functional::Difference {
            integral: Weight::exponential(2.0).unwrap(),
            sup: Weight::exponential(1.0).unwrap(),
        };
        assert!((alpha.eval(&p, &q).unwrap() - (0.5 - (-1f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn zero_kernel_profile_not_positive() {
        let map = CompactMap::half_line(0.0, 1.0).unwrap();
        let gamma = Functional::WeightedIntegral(Weight::exponential(1.0).unwrap());
        let prof = kernel_functional_integral(&gamma, &Kernel::zero(), &map, &QuadConfig::default()).unwrap();
        assert!(!prof.positive);
        assert_eq!(prof.integral, 0.0);
    }

    #[test]
    fn bridges_from_structure() {
        let map = CompactMap::half_line(0.0, 1.0).unwrap();
        let g = Grid::new(map, 17).unwrap();
        let f = ConeFunctionals {
            alpha: Functional::Difference {
                integral: Weight::exponential(2.0).unwrap(),
                sup: Weight::exponential(1.0).unwrap(),
            },
            beta: Functional::WeightedSup(Weight::exponential(1.0).unwrap()),
            gamma: Functional::WeightedIntegral(Weight::exponential(1.0).unwrap()),
        };
        let (b, c) = structural_bridges(&f, &g, &QuadConfig::default());
        assert_eq!(b, Bridge::Linear { slope: 0.5 });
        assert_eq!(c, Bridge::Unbounded);
    }

    #[test]
    fn rho_scan_is_log_spaced() {
        let r = RhoScan { min: 0.1, max: 10.0, count: 3 }.radii().unwrap();
        assert!((r[1] - 1.0).abs() < 1e-15);
        assert!(RhoScan { min: 1.0, max: 0.5, count: 3 }.radii().is_err());
    }

    #[test]
    fn index_checks_need_positive_radius() {
        let rep = CertificateReport {
            alpha: String::new(),
            beta: String::new(),
            gamma: String::new(),
            entries: vec![],
            scalars: Scalars { beta_kernel_integral: 0.0, gamma_kernel_integral: 0.0, beta_p: 0.0, gamma_p: 0.0, alpha_p: 0.0 },
            bridge_b: Bridge::NotAvailable,
            bridge_c: Bridge::NotAvailable,
            seed: 0,
            samples: 0,
        };
        let map = CompactMap::half_line(0.0, 1.0).unwrap();
        assert!(check_index_one(&rep, 0.0, None, &map).is_err());
        assert!(check_index_zero(&rep, -1.0, None, &map).is_err());
        // γ(p) = 0 and no lower envelope: never certified
        assert!(!check_index_zero(&rep, 0.3, None, &map).unwrap().holds);
    }
}
