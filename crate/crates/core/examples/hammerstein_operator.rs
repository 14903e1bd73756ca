//! Apply the Hammerstein operator of the damped projectile problem, inspect
//! its kernel slices at infinity and the boundedness profile behind the
//! compactness check.
//!
//! ```bash
//! cargo run --release --example hammerstein_operator
//! ```

use std::sync::Arc;

use weighted_hammerstein::compactline::{CompactMap, Grid};
use weighted_hammerstein::hammerstein::{apply_t, c3_bound_profile, kernel_limits};
use weighted_hammerstein::problems::modified_projectile;
use weighted_hammerstein::quadrature::QuadConfig;
use weighted_hammerstein::weighted_space::NormKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Arc::new(Grid::new(CompactMap::half_line(0.0, 1.0)?, 65)?);
    let setup = modified_projectile(1.0, 2.0, grid)?;
    let p = &setup.problem;
    let quad = QuadConfig::default();

    for s in [0.0, 1.0, 10.0] {
        let l = kernel_limits(p.kernel(), p.weight(), p.map(), s)?;
        println!("s = {s:>4}: z- = {:.6}, z+ = {:.6}, M = {:.6}", l.z_minus, l.z_plus, l.m);
    }

    let mut u = p.forcing().clone();
    for k in 1..=5 {
        let next = apply_t(p, &u, &quad)?;
        println!("T^{k} p: norm {:.12}, value at +inf {:.12}, step {:.3e}", next.norm(NormKind::Phi), next.asymptotic_limits().1, next.distance(&u)?);
        u = next;
    }

    let c3 = c3_bound_profile(p, 1.0, &quad)?;
    println!(
        "bound profile for r = 1: sup {:.10}, int z+ phi_r = {:.10}, int M phi_r = {:.10}",
        c3.sup, c3.z_plus_integral, c3.m_integral
    );
    Ok(())
}
