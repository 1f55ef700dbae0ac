//! Density-equation solve: relaxation toward the stationary profile.
//!
//! Starts the finite-volume solver from a mollified point mass on the double
//! well and tracks the weighted-L2 distance to the Gibbs density together
//! with the conserved total mass.
//!
//! ```bash
//! cargo run --release --example fpe_relaxation
//! ```

use std::collections::BTreeMap;

use escape_lab::fpe::{solve_fpe, stationary_density, weighted_l2_distance, DensityField, Grid};
use escape_lab::{Landscape, Schedule};

fn main() -> escape_lab::Result<()> {
    let landscape = Landscape::builtin("double_well_1d", &BTreeMap::new())?;
    let schedule = Schedule::constant(0.5, 1.0, 1.0); // eta = 4
    let grid = Grid::line(-3.0, 3.0, 240)?;
    let p_inf = stationary_density(&landscape, &grid, schedule.eta(0.0))?;

    // Narrow Gaussian in the left well.
    let values: Vec<f64> = grid
        .axes[0]
        .centers()
        .iter()
        .map(|&w| (-0.5 * (w + 1.0) * (w + 1.0) / 0.01).exp())
        .collect();
    let mut p0 = DensityField::new(grid, values)?;
    p0.normalize()?;

    let solution = solve_fpe(&landscape, &schedule, &p0, 2e-4, 40.0, 20_000)?;
    let weight: Vec<f64> = p_inf.values.iter().map(|v| 1.0 / v.max(1e-290)).collect();
    println!("{:>8} {:>14} {:>14}", "t", "distance", "mass");
    for (t, snap) in solution.times.iter().zip(&solution.snapshots) {
        let d = weighted_l2_distance(snap, &p_inf, &weight)?;
        println!("{t:>8.1} {d:>14.6e} {:>14.12}", snap.total_mass());
    }
    println!("max mass drift = {:.3e}", solution.mass_drift());
    Ok(())
}
