//! Stationary density on a grid and its low-order moments.
//!
//! The long-time density of the overdamped dynamics is the Gibbs profile
//! `p(w) ~ exp(-eta L(w))` with temperature `eta = 2M/(gamma beta)`. On the
//! quadratic bowl this is a Gaussian whose variance is `1/(a eta)`, which the
//! grid quadrature reproduces.
//!
//! ```bash
//! cargo run --example stationary_density
//! ```

use std::collections::BTreeMap;

use escape_lab::fpe::{stationary_density, Grid};
use escape_lab::{Landscape, Schedule};

fn main() -> escape_lab::Result<()> {
    let landscape = Landscape::builtin("quadratic", &BTreeMap::new())?;
    let schedule = Schedule::constant(0.5, 1.0, 1.0); // eta = 4
    let eta = schedule.eta(0.0);

    let grid = Grid::line(-6.0, 6.0, 240)?;
    let density = stationary_density(&landscape, &grid, eta)?;

    let mean = density.expectation(|w| w[0]);
    let var = density.expectation(|w| w[0] * w[0]) - mean * mean;
    println!("eta       = {eta}");
    println!("mass      = {}", density.total_mass());
    println!("mean      = {mean:.3e}");
    println!("variance  = {var:.6}   (exact 1/eta = {})", 1.0 / eta);

    // The double well at the same temperature splits its mass evenly.
    let dw = Landscape::builtin("double_well_1d", &BTreeMap::new())?;
    let grid = Grid::line(-3.0, 3.0, 240)?;
    let density = stationary_density(&dw, &grid, eta)?;
    let left = density.expectation(|w| if w[0] < 0.0 { 1.0 } else { 0.0 });
    println!("double well left-well mass = {left:.6}");
    Ok(())
}
