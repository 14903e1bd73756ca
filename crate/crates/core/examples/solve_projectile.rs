//! Solve the damped projectile problem by Picard iteration in the weighted
//! space and compare against a Runge–Kutta integration of the equivalent
//! initial value problem.
//!
//! ```bash
//! cargo run --release --example solve_projectile -- 1.0
//! ```

use std::sync::Arc;

use weighted_hammerstein::compactline::{CompactMap, Grid};
use weighted_hammerstein::problems::modified_projectile;
use weighted_hammerstein::solver::{ode_oracle, picard_solve, relative_sup_difference, OdeOptions, PicardOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v0: f64 = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(1.0);
    let grid = Arc::new(Grid::new(CompactMap::half_line(0.0, 1.0)?, 129)?);
    let setup = modified_projectile(v0, 2.0, grid)?;
    let problem = &setup.problem;

    let started = std::time::Instant::now();
    let sol = picard_solve(problem, problem.forcing(), &PicardOptions { tol: 1e-10, ..Default::default() })?;
    println!(
        "picard: converged = {} after {} updates, residual {:.3e}, slope ũ(∞) = {:.12} ({:.2?})",
        sol.converged,
        sol.iterations,
        sol.residual,
        sol.slope,
        started.elapsed()
    );

    let nl = problem.nonlinearity().clone();
    let oracle = ode_oracle(&|t, y| nl.eval(t, y), v0, 20.0, &OdeOptions::default())?;
    let probe: Vec<f64> = (0..=400).map(|i| 0.05 * i as f64).collect();
    let diff = relative_sup_difference(&|t| sol.u.raw_at(t), &|t| oracle.eval(t).unwrap().0, &probe);
    println!("oracle on [0, 20]: relative sup difference {diff:.3e} (oracle error estimate {:.1e})", oracle.error_estimate);

    println!("{:>8} {:>20} {:>20}", "t", "picard", "runge-kutta");
    for t in [0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
        println!("{t:>8} {:>20.14} {:>20.14}", sol.u.raw_at(t), oracle.eval(t)?.0);
    }
    Ok(())
}
