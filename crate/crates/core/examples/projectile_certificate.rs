//! Certify the cone hypotheses for the damped projectile problem, locate the
//! index threshold, and search for solution windows.
//!
//! ```bash
//! cargo run --release --example projectile_certificate -- 1.0 2.0
//! ```

use std::sync::Arc;

use weighted_hammerstein::compactline::{CompactMap, Grid};
use weighted_hammerstein::cone::{
    find_solution_windows, index_one_threshold, verify_cone_hypotheses, RhoScan, VerifyOptions,
};
use weighted_hammerstein::problems::modified_projectile;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>());
    let v0 = args.next().transpose()?.unwrap_or(1.0);
    let c = args.next().transpose()?.unwrap_or(2.0);

    let map = CompactMap::half_line(0.0, 1.0)?;
    let grid = Arc::new(Grid::new(map, 65)?);
    let setup = modified_projectile(v0, c, grid)?;
    let nl = setup.problem.nonlinearity();

    let started = std::time::Instant::now();
    let report = verify_cone_hypotheses(&setup.problem, &setup.functionals, &VerifyOptions::default())?;
    println!("hypotheses (v0 = {v0}, c = {c}), {:.2?}", started.elapsed());
    for e in &report.entries {
        println!("  {:<3} {:<11} {}", e.id, format!("{:?}", e.status), e.detail);
    }
    println!("  ∫β(k) = {:.10}  ∫γ(k) = {:.10}", report.scalars.beta_kernel_integral, report.scalars.gamma_kernel_integral);
    println!("  β(p) = {:.10}  γ(p) = {:.10}  α(p) = {:.10}", report.scalars.beta_p, report.scalars.gamma_p, report.scalars.alpha_p);

    let scan = RhoScan::default();
    match index_one_threshold(&report, nl.upper_envelope(), &map, &scan, 1e-9)? {
        Some((lo, hi)) => println!("index-one threshold in [{lo:.9}, {hi:.9}]"),
        None => println!("index-one test never flips on the scan"),
    }

    let search = find_solution_windows(&report, nl.upper_envelope(), nl.lower_envelope(), &map, &scan)?;
    if !search.blocked_by.is_empty() {
        println!("window search blocked by {:?}", search.blocked_by);
    }
    println!("{} windows", search.windows.len());
    for w in search.windows.iter().take(5) {
        println!("  {:?} radii {:?} margins {:?}", w.pattern, w.radii, w.margins);
    }
    Ok(())
}
