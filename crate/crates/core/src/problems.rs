//! Ready-made problems.

use std::sync::Arc;

use crate::compactline::{Grid, Interval};
use crate::cone::{ConeFunctionals, Functional};
use crate::error::{Error, Result};
use crate::hammerstein::{second_order_ivp_kernel, EnvelopeFn, HammersteinProblem, Nonlinearity};
use crate::weights::Weight;

/// Modified projectile problem `u'' = f(t, u)`, `u(0) = 0`, `u'(0) = v₀`,
/// with gravity cancelled so that `f(t, y) = max(y, 0)·e^{-t}`, posed in the
/// space weighted by `t + 1` and measured by
///
/// - `α(u) = ∫ u/(c eᵗ) − sup |u|/eᵗ`
/// - `β(u) = sup |u|/eᵗ`
/// - `γ(u) = ∫ u/eᵗ`
#[derive(Clone, Debug)]
pub struct ProjectileSetup {
    pub v0: f64,
    pub weights: ProjectileWeights,
    pub problem: HammersteinProblem,
    pub functionals: ConeFunctionals,
}

/// `φ` for the space, `φ₂` inside the integral part of `α`, `φ₃` for `β`
/// and `γ` and the sup part of `α`.
#[derive(Clone, Debug)]
pub struct ProjectileWeights {
    pub phi: Weight,
    pub phi2: Weight,
    pub phi3: Weight,
}

impl ProjectileWeights {
    /// `φ = t + 1`, `φ₂ = c eᵗ`, `φ₃ = eᵗ`
    pub fn standard(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!("need c > 0, got {c}")));
        }
        Ok(ProjectileWeights { phi: Weight::affine(1.0), phi2: Weight::exponential(c)?, phi3: Weight::exponential(1.0)? })
    }
}

/// `ρ φ₃(t) e^{-t}`, which bounds `y e^{-t}` whenever `|y| ≤ ρ φ₃(t)`.
fn damped_envelope(phi3: Weight) -> EnvelopeFn {
    Arc::new(move |t, rho| rho * (phi3.ln_eval(t) - t).exp())
}

/// Nonlinearity `max(y, 0)·e^{-t}` with dominator `r φ(t) e^{-t}`, upper
/// envelope `ρ φ₃(t) e^{-t}` and lower envelope `0`.
pub fn damped_linear_nonlinearity(phi: Weight, phi3: Weight) -> Nonlinearity {
    Nonlinearity::new("damped-linear", Arc::new(|t: f64, y: f64| if y > 0.0 { y * (-t).exp() } else { 0.0 }))
        .with_dominator(Arc::new(move |r, t| r * (phi.ln_eval(t) - t).exp()))
        .with_envelopes(Some(damped_envelope(phi3)), Some(Arc::new(|_, _| 0.0)))
}

/// `y⁺e^{-t} / (1 + y⁺e^{-t})`: same bounds as the damped linear term.
pub fn saturating_nonlinearity(phi: Weight, phi3: Weight) -> Nonlinearity {
    Nonlinearity::new(
        "saturating",
        Arc::new(|t: f64, y: f64| {
            let z = y.max(0.0) * (-t).exp();
            z / (1.0 + z)
        }),
    )
    .with_dominator(Arc::new(move |r, t| r * (phi.ln_eval(t) - t).exp()))
    .with_envelopes(Some(damped_envelope(phi3)), Some(Arc::new(|_, _| 0.0)))
}

/// Names accepted by [`registered_nonlinearity`].
pub const REGISTERED: &[&str] = &["damped-linear", "saturating", "zero"];

/// A nonlinearity by name, built for the weights `(φ, φ₃)`.
pub fn registered_nonlinearity(name: &str, phi: Weight, phi3: Weight) -> Option<Nonlinearity> {
    match name {
        "damped-linear" => Some(damped_linear_nonlinearity(phi, phi3)),
        "saturating" => Some(saturating_nonlinearity(phi, phi3)),
        "zero" => Some(Nonlinearity::zero()),
        _ => None,
    }
}

/// `u'' = f(t, u)`, `u(0) = 0`, `u'(0) = v₀` on `[0, ∞)` as a Volterra
/// equation with forcing `v₀t`, measured by `α = γ₂ − β`, `β = sup |u|/φ₃`,
/// `γ = ∫ u/φ₃`, `γ₂ = ∫ u/φ₂`.
pub fn projectile_family(v0: f64, grid: Arc<Grid>, weights: ProjectileWeights, nl: Nonlinearity) -> Result<ProjectileSetup> {
    if grid.map().interval() != (Interval::HalfLine { a: 0.0 }) {
        return Err(Error::domain("the projectile problem lives on [0, ∞)"));
    }
    if !v0.is_finite() {
        return Err(Error::invalid(format!("v0 must be finite, got {v0}")));
    }
    let (kernel, p) = second_order_ivp_kernel(v0, grid, weights.phi.clone())?;
    let problem = HammersteinProblem::new(kernel, nl, p)?;
    let functionals = ConeFunctionals {
        alpha: Functional::Difference { integral: weights.phi2.clone(), sup: weights.phi3.clone() },
        beta: Functional::WeightedSup(weights.phi3.clone()),
        gamma: Functional::WeightedIntegral(weights.phi3.clone()),
    };
    Ok(ProjectileSetup { v0, weights, problem, functionals })
}

/// The damped linear problem with `φ = t + 1`, `φ₂ = c eᵗ`, `φ₃ = eᵗ`.
pub fn modified_projectile(v0: f64, c: f64, grid: Arc<Grid>) -> Result<ProjectileSetup> {
    let weights = ProjectileWeights::standard(c)?;
    let nl = damped_linear_nonlinearity(weights.phi.clone(), weights.phi3.clone());
    projectile_family(v0, grid, weights, nl)
}

/// Right-hand side of radial motion under gravity, `u'' = −gR²/(u + R)²`.
pub fn gravity(g: f64, r: f64) -> Result<impl Fn(f64, f64) -> f64 + Send + Sync + Copy> {
    if !(g > 0.0 && r > 0.0) {
        return Err(Error::domain(format!("need g, R > 0, got g = {g}, R = {r}")));
    }
    Ok(move |_t: f64, y: f64| -g * r * r / ((y + r) * (y + r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compactline::CompactMap;

    #[test]
    fn projectile_rejects_wrong_interval() {
        let g = Arc::new(Grid::new(CompactMap::full_line(1.0).unwrap(), 17).unwrap());
        assert!(modified_projectile(1.0, 2.0, g).is_err());
        let g = Arc::new(Grid::new(CompactMap::half_line(0.0, 1.0).unwrap(), 17).unwrap());
        assert!(modified_projectile(1.0, 0.0, g).is_err());
    }

    #[test]
    fn nonlinearity_vanishes_below_zero() {
        let f = damped_linear_nonlinearity(Weight::affine(1.0), Weight::exponential(1.0).unwrap());
        assert_eq!(f.eval(1.0, -3.0), 0.0);
        assert_eq!(f.eval(0.0, 0.0), 0.0);
        assert!((f.eval(1.0, 2.0) - 2.0 * (-1f64).exp()).abs() < 1e-16);
        let upper = f.upper_envelope().unwrap();
        assert!((upper(30.0, 0.7) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn registry_knows_its_names() {
        for name in REGISTERED {
            assert!(registered_nonlinearity(name, Weight::affine(1.0), Weight::exponential(1.0).unwrap()).is_some());
        }
        assert!(registered_nonlinearity("cubic", Weight::affine(1.0), Weight::affine(1.0)).is_none());
    }

    #[test]
    fn gravity_sign() {
        let f = gravity(1.0, 1.0).unwrap();
        assert_eq!(f(0.0, 0.0), -1.0);
        assert!(gravity(0.0, 1.0).is_err());
    }
}
