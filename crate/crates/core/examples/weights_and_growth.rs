//! Compare weights, lift a function into the weighted space and classify
//! growth rates toward infinity.
//!
//! ```bash
//! cargo run --example weights_and_growth
//! ```

use std::sync::Arc;

use weighted_hammerstein::compactline::{CompactMap, Grid};
use weighted_hammerstein::weighted_space::{classify_asymptotic, NormKind, WeightedFunction};
use weighted_hammerstein::weights::{weights_equivalent, Weight};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let map = CompactMap::half_line(0.0, 1.0)?;
    let grid = Arc::new(Grid::new(map, 65)?);

    let pairs = [
        (Weight::affine(1.0), Weight::affine(3.0)),
        (Weight::affine(1.0), Weight::power(2.0)),
        (Weight::exponential(1.0)?, Weight::exponential(2.0)?),
        (Weight::affine(1.0), Weight::affine(1.0).scaled(4.0)?),
    ];
    for (a, b) in &pairs {
        let e = weights_equivalent(a, b, &grid, 0);
        println!("{} vs {}: {:?} (ratio at +inf {:.4})", a.label(), b.label(), e.verdict, e.upper_limit);
    }

    // u(t) = t sin(t)/(1 + t) + 2t lives in the space weighted by 1 + t
    let phi = Weight::affine(1.0);
    let u = WeightedFunction::from_raw_fn(grid.clone(), phi, |t| t * t.sin() / (1.0 + t) + 2.0 * t)?;
    let (lo, hi) = u.asymptotic_limits();
    println!("u/phi at the ends: {lo:.6}, {hi:.6}; norm {:.6}", u.norm(NormKind::Phi));

    let growth: [(&str, fn(f64) -> f64, &str, fn(f64) -> f64); 4] = [
        ("t", |t| t, "1 + t", |t| 1.0 + t),
        ("t ln t", |t| t * t.ln(), "t", |t| t),
        ("sqrt t", f64::sqrt, "t", |t| t),
        ("3t + sin t", |t| 3.0 * t + t.sin(), "t", |t| t),
    ];
    let tail = CompactMap::half_line(1.0, 1.0)?;
    for (fl, f, gl, g) in growth {
        println!("f = {fl}, g = {gl}: {}", classify_asymptotic(f, g, &tail)?);
    }
    Ok(())
}
