//! Long-time well occupation on a two-well surface with unequal curvature.
//!
//! The two wells of `two_well_2d` share the same depth but differ in Hessian
//! determinant, so the stationary density favors the flatter well by the
//! square root of the determinant ratio — independently of learning rate and
//! batch size separately, only through the temperature. Both the grid
//! quadrature and a long SDE ensemble recover the ratio.
//!
//! ```bash
//! cargo run --release --example well_occupation
//! ```

use escape_lab::asymptotics::well_probability_ratio;
use escape_lab::fpe::Grid;
use escape_lab::sde::{run_ensemble, simulate_sgd_sde};
use escape_lab::{Landscape, Schedule};

fn main() -> escape_lab::Result<()> {
    let landscape = Landscape::two_well_2d(1.0, 4.0, 10.0)?;
    let eta = 8.0;
    let det_law = (landscape.minima[1].hessian_det / landscape.minima[0].hessian_det).sqrt();
    println!("determinant-law prediction: {det_law:.4}");

    let grid = Grid::square(-2.5, 2.5, 160)?;
    let quad = well_probability_ratio(&landscape, eta, &grid)?;
    println!("quadrature ratio:           {quad:.4}");

    // Ensemble occupation after several mean escape times.
    let schedule = Schedule::constant(0.1, 20.0, 50.0); // eta = 8
    let n_paths = 20_000;
    let finals = run_ensemble(n_paths, 7, |k, rng| {
        // Start half the paths in each well.
        let w0 = if k % 2 == 0 { [-1.0, 0.0] } else { [1.0, 0.0] };
        let t = simulate_sgd_sde(&landscape, &schedule, &w0, 2e-3, 400.0, usize::MAX, rng)?;
        Ok(t.last_state().to_vec())
    })?;
    let flat = finals.iter().filter(|w| w[0] < 0.0).count();
    let ratio = flat as f64 / (n_paths - flat) as f64;
    println!("ensemble ratio:             {ratio:.4}   ({n_paths} paths)");
    Ok(())
}
