//! Elements of the weighted space `C̃ⁿ_φ`.
//!
//! A function `u` is stored only through `ũ = u/φ` (and its derivatives) at
//! the nodes of a Chebyshev–Lobatto grid in compact coordinates. Because the
//! grid contains `x = ±1`, the endpoint values `ũ(±∞)` are ordinary samples,
//! and the space norm `‖u‖_φ = ‖ũ‖_(n)` is read directly from them.
//! Raw values `u = ũ·φ` are only formed on demand.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::compactline::{CompactMap, ExtReal, Grid, Side};
use crate::error::{Error, Result};
use crate::limits::{tail_limit, TailBehavior};
use crate::weights::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    Raw,
    Tilde,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// `‖ũ‖_∞`
    SupTilde,
    /// `‖ũ‖_(n) = max_j ‖ũ^(j)‖_∞`
    OrderN,
    /// `‖u‖_φ`, identical to `OrderN` through the isometry
    Phi,
}

#[derive(Clone, Debug)]
pub struct WeightedFunction {
    weight: Weight,
    grid: Arc<Grid>,
    rows: Vec<Vec<f64>>,
}

/// The isometry `Φ`: wraps tilde samples (rows `j = 0..=n`) as an element of
/// `C̃ⁿ_φ` without multiplying anything out.
pub fn lift(rows: Vec<Vec<f64>>, weight: Weight, grid: Arc<Grid>) -> Result<WeightedFunction> {
    if rows.is_empty() {
        return Err(Error::invalid("need at least the order-0 row"));
    }
    for (j, row) in rows.iter().enumerate() {
        if row.len() != grid.len() {
            return Err(Error::invalid(format!("row {j} has {} samples, grid has {}", row.len(), grid.len())));
        }
        if let Some(i) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("row {j} sample {i} is not finite")));
        }
    }
    Ok(WeightedFunction { weight, grid, rows })
}

impl WeightedFunction {
    /// Order-0 element from a function of the extended variable returning `ũ(t)`.
    pub fn from_tilde_fn<F: Fn(ExtReal) -> f64>(grid: Arc<Grid>, weight: Weight, tilde: F) -> Result<Self> {
        let row = grid.t().iter().map(|&t| tilde(t)).collect();
        lift(vec![row], weight, grid)
    }

    /// Order-0 element from raw values `u(t)`; endpoint samples are the
    /// limits of `u/φ`, which must exist.
    pub fn from_raw_fn<F: Fn(f64) -> f64>(grid: Arc<Grid>, weight: Weight, u: F) -> Result<Self> {
        let over = |t: f64| u(t) * (-weight.ln_eval(t)).exp();
        let map = *grid.map();
        let row = grid
            .t()
            .iter()
            .map(|&t| match t {
                ExtReal::Finite(v) => Ok(over(v)),
                _ => {
                    let side = if t == ExtReal::PosInf { Side::Upper } else { Side::Lower };
                    tail_limit(&map, side, over)
                        .limit()
                        .ok_or_else(|| Error::domain(format!("u/φ has no finite limit at {t}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        lift(vec![row], weight, grid)
    }

    /// Order-n element from evaluators of `ũ^(j)`, `j = 0..=n`.
    ///
    /// At infinite endpoints the order-0 sample is the limit of `ũ` and the
    /// derivative samples are set to 0: a function with a finite limit whose
    /// derivatives have limits must have vanishing derivative limits.
    pub fn from_tilde_derivatives(grid: Arc<Grid>, weight: Weight, derivs: &[&dyn Fn(f64) -> f64]) -> Result<Self> {
        if derivs.is_empty() {
            return Err(Error::invalid("need at least one evaluator"));
        }
        let map = *grid.map();
        let mut rows = Vec::with_capacity(derivs.len());
        for (j, d) in derivs.iter().enumerate() {
            let row = grid
                .t()
                .iter()
                .map(|&t| match t {
                    ExtReal::Finite(v) => Ok(d(v)),
                    _ if j > 0 => Ok(0.0),
                    _ => {
                        let side = if t == ExtReal::PosInf { Side::Upper } else { Side::Lower };
                        tail_limit(&map, side, d)
                            .limit()
                            .ok_or_else(|| Error::domain(format!("ũ has no finite limit at {t}")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        lift(rows, weight, grid)
    }

    pub fn zero(grid: Arc<Grid>, weight: Weight, order: usize) -> Self {
        let m = grid.len();
        WeightedFunction { weight, grid, rows: vec![vec![0.0; m]; order + 1] }
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn map(&self) -> &CompactMap {
        self.grid.map()
    }

    pub fn order(&self) -> usize {
        self.rows.len() - 1
    }

    /// Tilde samples of `ũ^(j)` at the grid nodes.
    pub fn tilde_row(&self, j: usize) -> &[f64] {
        &self.rows[j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Inverse of [`lift`].
    pub fn unlift(&self) -> Vec<Vec<f64>> {
        self.rows.clone()
    }

    /// `ũ` at compact coordinate `x ∈ [-1, 1]`.
    #[inline]
    pub fn tilde_at_x(&self, x: f64) -> f64 {
        self.grid.interp_unchecked(&self.rows[0], x)
    }

    /// `u(t) = ũ(t)·φ(t)` for finite `t` in the interval.
    #[inline]
    pub fn raw_at(&self, t: f64) -> f64 {
        self.tilde_at_x(self.map().x_of(t)) * self.weight.eval(t)
    }

    /// `u(t) / w(t)` for another weight `w`, overflow-safe.
    #[inline]
    pub fn over(&self, w: &Weight, t: f64) -> f64 {
        let ut = self.tilde_at_x(self.map().x_of(t));
        if ut == 0.0 {
            0.0
        } else {
            ut * self.weight.ratio(w, t)
        }
    }

    pub fn eval(&self, t: ExtReal, mode: EvalMode) -> Result<f64> {
        let x = self.map().to_compact(t)?;
        let tilde = self.grid.interp_unchecked(&self.rows[0], x);
        match mode {
            EvalMode::Tilde => Ok(tilde),
            EvalMode::Raw => match t {
                ExtReal::Finite(v) => Ok(tilde * self.weight.eval(v)),
                _ => match self.weight.endpoint_limit(t, self.map()) {
                    Some(w) => Ok(tilde * w),
                    None => Err(Error::domain(format!("raw value at {t} undefined: weight diverges"))),
                },
            },
        }
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        let sup = |row: &[f64]| row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        match kind {
            NormKind::SupTilde => sup(&self.rows[0]),
            NormKind::OrderN | NormKind::Phi => self.rows.iter().fold(0.0f64, |m, r| m.max(sup(r))),
        }
    }

    /// `(ũ(lower end), ũ(+∞))`.
    pub fn asymptotic_limits(&self) -> (f64, f64) {
        let r = &self.rows[0];
        (r[0], r[r.len() - 1])
    }

    fn check_compatible(&self, other: &WeightedFunction) -> Result<()> {
        let same_grid = Arc::ptr_eq(&self.grid, &other.grid)
            || (self.grid.x() == other.grid.x() && self.grid.map() == other.grid.map());
        if !same_grid || self.weight.label() != other.weight.label() || self.order() != other.order() {
            return Err(Error::invalid("functions live in different spaces or grids"));
        }
        Ok(())
    }

    /// `a·self + b·other`.
    pub fn lincomb(&self, a: f64, other: &WeightedFunction, b: f64) -> Result<WeightedFunction> {
        self.check_compatible(other)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(r, s)| r.iter().zip(s).map(|(x, y)| a * x + b * y).collect())
            .collect();
        lift(rows, self.weight.clone(), self.grid.clone())
    }

    pub fn scaled(&self, a: f64) -> WeightedFunction {
        let rows = self.rows.iter().map(|r| r.iter().map(|v| a * v).collect()).collect();
        WeightedFunction { weight: self.weight.clone(), grid: self.grid.clone(), rows }
    }

    /// `‖self − other‖_φ`.
    pub fn distance(&self, other: &WeightedFunction) -> Result<f64> {
        Ok(self.lincomb(1.0, other, -1.0)?.norm(NormKind::Phi))
    }

    /// Module action of a smooth `g` (rows `g^(j)` at the nodes, `j ≤ n`):
    /// `(g·u)~ = g·ũ`, derivatives by the Leibniz rule.
    pub fn mul_smooth(&self, g_rows: &[Vec<f64>]) -> Result<WeightedFunction> {
        let n = self.order();
        if g_rows.len() != n + 1 || g_rows.iter().any(|r| r.len() != self.grid.len()) {
            return Err(Error::invalid("multiplier rows do not match order or grid"));
        }
        let m = self.grid.len();
        let mut rows = vec![vec![0.0; m]; n + 1];
        for (j, row) in rows.iter_mut().enumerate() {
            let mut binom = 1.0;
            for k in 0..=j {
                if k > 0 {
                    binom = binom * (j - k + 1) as f64 / k as f64;
                }
                for i in 0..m {
                    row[i] += binom * self.rows[k][i] * g_rows[j - k][i];
                }
            }
        }
        lift(rows, self.weight.clone(), self.grid.clone())
    }
}

/// Growth comparison of two eventually positive functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationTag {
    /// `f ≻ g`: `f/g → ∞`
    Greater,
    /// `f ≺ g`: `f/g → 0`
    Less,
    /// `f ≍ g`: `f/g` stays between two positive constants
    Comparable,
    /// `f −≍ g`: `f/g` tends to a positive finite limit
    ComparableWithLimit,
    /// `f ∼ g`: `f/g → 1`
    Equivalent,
    /// `f ≽ g`: `f > δ g` eventually
    LowerBounded,
    /// `f ≼ g`: `f < Δ g` eventually
    UpperBounded,
    Undetermined,
}

impl RelationTag {
    pub fn symbol(self) -> &'static str {
        match self {
            RelationTag::Greater => "≻",
            RelationTag::Less => "≺",
            RelationTag::Comparable => "≍",
            RelationTag::ComparableWithLimit => "−≍",
            RelationTag::Equivalent => "∼",
            RelationTag::LowerBounded => "≽",
            RelationTag::UpperBounded => "≼",
            RelationTag::Undetermined => "?",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRelation {
    pub tag: RelationTag,
    pub limit: Option<f64>,
}

impl AsymptoticRelation {
    /// `∼` and `−≍` both carry a limit.
    pub fn has_limit(&self) -> bool {
        matches!(self.tag, RelationTag::ComparableWithLimit | RelationTag::Equivalent)
    }

    /// Whether the relation implies `f ≍ g`.
    pub fn is_comparable(&self) -> bool {
        matches!(
            self.tag,
            RelationTag::Comparable | RelationTag::ComparableWithLimit | RelationTag::Equivalent
        )
    }
}

impl fmt::Display for AsymptoticRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.limit {
            Some(l) => write!(f, "f {} g (limit {l})", self.tag.symbol()),
            None => write!(f, "f {} g", self.tag.symbol()),
        }
    }
}

const LIMIT_AGREE: f64 = 1e-4;
const GROWTH: f64 = 1e6;

/// Classify the growth of `f` against `g` toward `+∞`.
///
/// The ratio `f/g` is read at `t = t(1 − 10^-k)`, `k = 1..=14`. A finite
/// limit is declared when the last three readings agree within `1e-4`
/// relative; `≻`/`≺` when the readings are monotone and end beyond `1e6`
/// or below `1e-6`; `≽`/`≼` for monotone readings that neither settle nor
/// cross those bounds; `≍` for non-monotone readings inside `[1e-6, 1e6]`.
pub fn classify_asymptotic<F, G>(f: F, g: G, map: &CompactMap) -> Result<AsymptoticRelation>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let ts = map.tail_points(Side::Upper);
    let mut ratios = Vec::with_capacity(ts.len());
    for &t in &ts {
        let (fv, gv) = (f(t), g(t));
        if fv.is_nan() || gv.is_nan() || (fv.is_infinite() && gv.is_infinite()) {
            break;
        }
        if fv <= 0.0 || gv <= 0.0 {
            return Err(Error::domain(format!("non-positive tail value at t = {t}")));
        }
        ratios.push(fv / gv);
    }
    if ratios.len() < 4 {
        return Ok(AsymptoticRelation { tag: RelationTag::Undetermined, limit: None });
    }
    let k = ratios.len();
    let last = ratios[k - 1];
    let tail3 = &ratios[k - 3..];
    let spread = tail3.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        - tail3.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if last.is_finite() && spread <= LIMIT_AGREE * last.abs() {
        if last < 1.0 / GROWTH {
            return Ok(AsymptoticRelation { tag: RelationTag::Less, limit: None });
        }
        let tag = if (last - 1.0).abs() <= LIMIT_AGREE {
            RelationTag::Equivalent
        } else {
            RelationTag::ComparableWithLimit
        };
        let limit = if tag == RelationTag::Equivalent { 1.0 } else { last };
        return Ok(AsymptoticRelation { tag, limit: Some(limit) });
    }
    let tail4 = &ratios[k - 4..];
    let increasing = tail4.windows(2).all(|w| w[1] > w[0]);
    let decreasing = tail4.windows(2).all(|w| w[1] < w[0]);
    let tag = if increasing && last > GROWTH {
        RelationTag::Greater
    } else if decreasing && last < 1.0 / GROWTH {
        RelationTag::Less
    } else if increasing {
        RelationTag::LowerBounded
    } else if decreasing {
        RelationTag::UpperBounded
    } else {
        let window = &ratios[k / 2..];
        if window.iter().all(|&r| (1.0 / GROWTH..=GROWTH).contains(&r)) {
            RelationTag::Comparable
        } else {
            RelationTag::Undetermined
        }
    };
    Ok(AsymptoticRelation { tag, limit: None })
}

/// Limit behaviour of a function toward an endpoint, re-exported for callers
/// that build weighted functions by hand.
pub fn endpoint_behavior<F: Fn(f64) -> f64>(map: &CompactMap, side: Side, f: F) -> TailBehavior {
    tail_limit(map, side, f)
}
