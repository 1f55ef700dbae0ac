//! Kinetic (phase-space) solve: relaxation of the momentum dynamics.
//!
//! Solves the velocity-diffusive phase-space equation on the quadratic bowl
//! and compares the long-time velocity marginal with the Maxwellian of the
//! kinetic temperature `eta' = (2M/(gamma beta))(1 - xi)`.
//!
//! ```bash
//! cargo run --release --example vfp_relaxation
//! ```

use std::collections::BTreeMap;

use escape_lab::fpe::{solve_vfp, stationary_phase_density, Axis, PhaseDensityField};
use escape_lab::{Landscape, Schedule};

fn main() -> escape_lab::Result<()> {
    let landscape = Landscape::builtin("quadratic", &BTreeMap::new())?;
    let schedule = Schedule::constant(0.04, 10.0, 50.0);
    let xi = 0.8;
    let eta_prime = schedule.eta(0.0) * (1.0 - xi);
    println!("eta' = {eta_prime}");

    let w_axis = Axis::new(-5.0, 5.0, 64)?;
    let v_axis = Axis::new(-5.0, 5.0, 64)?;
    let psi_inf = stationary_phase_density(&landscape, &w_axis, &v_axis, eta_prime)?;

    // Displaced Gaussian blob in phase space.
    let (nw, nv) = (w_axis.n, v_axis.n);
    let values: Vec<f64> = (0..nw * nv)
        .map(|idx| {
            let w = w_axis.center(idx / nv);
            let v = v_axis.center(idx % nv);
            (-((w - 1.0) * (w - 1.0) + v * v)).exp()
        })
        .collect();
    let mut psi0 = PhaseDensityField::new(w_axis.clone(), v_axis.clone(), values)?;
    psi0.normalize()?;

    let solution = solve_vfp(&landscape, &schedule, xi, &psi0, 0.002, 30.0, 5_000)?;
    println!("mass drift = {:.3e}", solution.mass_drift());

    // L1 distance between the velocity marginals, cell-weighted.
    let h_v = v_axis.h();
    let final_marginal = solution.final_density().v_marginal();
    let target_marginal = psi_inf.v_marginal();
    let l1: f64 = final_marginal
        .iter()
        .zip(&target_marginal)
        .map(|(a, b)| (a - b).abs() * h_v)
        .sum();
    println!("velocity-marginal L1 error = {l1:.3e}");
    Ok(())
}
