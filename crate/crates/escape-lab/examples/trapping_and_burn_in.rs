//! Stationary trapping probability and schedule burn-in.
//!
//! Quadrature of the stationary density over an epsilon-ball around the
//! minimizer gives the probability of finding the dynamics trapped there; a
//! settling schedule additionally has a burn-in threshold after which its
//! temperature stays close enough to the limit for rate bounds to apply.
//!
//! ```bash
//! cargo run --example trapping_and_burn_in
//! ```

use std::collections::BTreeMap;

use escape_lab::asymptotics::{burn_in_threshold, trapping_probability};
use escape_lab::fpe::Grid;
use escape_lab::{Landscape, Schedule};

fn main() -> escape_lab::Result<()> {
    let landscape = Landscape::builtin("quadratic", &BTreeMap::new())?;
    let grid = Grid::line(-6.0, 6.0, 600)?;

    // With eta * epsilon^2 = 1 the Gaussian ball mass is erf(1/sqrt(2)).
    let result = trapping_probability(&landscape, 0, 4.0, 0.5, &grid)?;
    println!("trapping probability (quadrature) = {:.6}", result.quadrature);
    println!("closed-form factor                = {:.6}", result.formula_factor);
    println!("factor / quadrature               = {:.4}", result.ratio);

    let schedule = Schedule::ExpApproach {
        gamma: 0.5,
        batch: 1.0,
        beta: 1.0,
        amplitude: 2.0,
        rate: 0.8,
    };
    let burn_in = burn_in_threshold(&schedule, &landscape, 1.0, 5.0)?;
    println!("burn-in threshold = {:.4} (band {:.4})", burn_in.threshold, burn_in.band);
    Ok(())
}
