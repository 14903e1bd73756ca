//! Map the half line and the real line onto `[-1, 1]`, build a
//! Chebyshev–Lobatto grid and interpolate a function that has finite limits
//! at infinity.
//!
//! ```bash
//! cargo run --example compact_grid -- 33
//! ```

use weighted_hammerstein::compactline::{CompactMap, ExtReal, Grid, Side};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(33);

    for map in [CompactMap::full_line(1.0)?, CompactMap::half_line(0.0, 1.0)?] {
        println!("{:?}", map.interval());
        for x in [-0.9, -0.5, 0.0, 0.5, 0.9] {
            let t = map.t_of(x);
            println!("  x = {x:>5} -> t = {t:>10.6}, back {:>8.5}, jacobian {:.4}", map.x_of(t), map.jacobian(x));
        }
        let tail = map.tail_points(Side::Upper);
        println!("  upper tail probes run from t = {:.3e} to {:.3e}", tail[0], tail[tail.len() - 1]);
    }

    // tanh has limits ±1 at ∓∞, so its samples on the compact grid are smooth
    let grid = Grid::new(CompactMap::full_line(1.0)?, m)?;
    let samples: Vec<f64> = grid
        .t()
        .iter()
        .map(|t| match t {
            ExtReal::NegInf => -1.0,
            ExtReal::PosInf => 1.0,
            ExtReal::Finite(t) => t.tanh(),
        })
        .collect();
    let worst = (0..=2000)
        .map(|i| -10.0 + 0.01 * i as f64)
        .map(|t| (grid.interpolate(&samples, grid.map().x_of(t)).unwrap() - t.tanh()).abs())
        .fold(0.0, f64::max);
    println!("tanh on {m} nodes: max interpolation error on [-10, 10] = {worst:.2e}");
    Ok(())
}
