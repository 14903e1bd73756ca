//! Integrate radial motion under inverse-square gravity at, above and below
//! the escape speed and report the growth of the height.
//!
//! ```bash
//! cargo run --release --example escape_velocity -- 1e5
//! ```

use weighted_hammerstein::problems::gravity;
use weighted_hammerstein::solver::{asymptotic_slope, energy_drift, escape_constants, ode_solve, OdeOptions};
use weighted_hammerstein::Error;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t_max: f64 = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(1e4);
    let (g, r) = (1.0, 1.0);
    let f = gravity(g, r)?;
    let v_s = escape_constants(g, r, 0.0)?.v_s;
    let opts = OdeOptions::default();

    for v0 in [0.8 * v_s, v_s, 1.5 * v_s] {
        let c = escape_constants(g, r, v0)?;
        print!("v0 = {v0:.6}: ");
        match ode_solve(&f, 0.0, 0.0, v0, t_max, &opts) {
            Ok(sol) => {
                let ratio = |t: f64| sol.eval(t).map(|(u, _)| u / t).unwrap_or(f64::NAN);
                let slope = asymptotic_slope(&ratio, t_max)?;
                let u_end = sol.eval(t_max)?.0;
                let drift = energy_drift(&sol, g, r, v0);
                if v0 > v_s {
                    let predicted = c.v_inf.unwrap_or(0.0);
                    println!("u/t -> {:.6} ± {:.1e} (predicted {predicted:.6}), energy drift {drift:.1e}", slope.value, slope.error);
                } else {
                    // at exactly the escape speed u grows like C t^(2/3)
                    let ratio = u_end / t_max.powf(2.0 / 3.0);
                    println!("u/t^(2/3) = {ratio:.6} (C = {:.6}), energy drift {drift:.1e}", c.two_thirds);
                }
            }
            Err(Error::BlowUp { .. }) => println!("falls back to the centre"),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}
