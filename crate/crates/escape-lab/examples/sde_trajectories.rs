//! Trajectory simulation: continuous diffusions and discrete iterations.
//!
//! Runs the overdamped and momentum diffusions plus their discrete
//! counterparts on the double well from the same seed and prints where each
//! path ends up, demonstrating the shared ensemble seeding.
//!
//! ```bash
//! cargo run --example sde_trajectories
//! ```

use std::collections::BTreeMap;

use escape_lab::rng::path_rng;
use escape_lab::sde::{
    simulate_discrete_msgd, simulate_discrete_sgd, simulate_msgd_sde, simulate_sgd_sde,
};
use escape_lab::{Landscape, Schedule};

fn main() -> escape_lab::Result<()> {
    let landscape = Landscape::builtin("double_well_1d", &BTreeMap::new())?;
    let schedule = Schedule::constant(0.05, 4.0, 8.0);

    let mut rng = path_rng(42, 0);
    let t = simulate_sgd_sde(&landscape, &schedule, &[-1.0], 1e-3, 5.0, 100, &mut rng)?;
    println!("overdamped SDE:   {} samples, final w = {:+.4}", t.len(), t.last_state()[0]);

    let mut rng = path_rng(42, 0);
    let t = simulate_msgd_sde(
        &landscape, &schedule, 0.5, &[-1.0], &[0.0], 1e-3, 5.0, 100, &mut rng,
    )?;
    println!(
        "momentum SDE:     {} samples, final (w, v) = ({:+.4}, {:+.4})",
        t.len(),
        t.last_position()[0],
        t.last_velocity()[0]
    );

    let mut rng = path_rng(42, 0);
    let t = simulate_discrete_sgd(&landscape, &schedule, &[-1.0], 100, 10, &mut rng)?;
    println!("discrete descent: {} samples, final w = {:+.4}", t.len(), t.last_state()[0]);

    let mut rng = path_rng(42, 0);
    let t = simulate_discrete_msgd(&landscape, &schedule, 0.5, &[-1.0], 100, 10, &mut rng)?;
    println!(
        "discrete momentum:{} samples, final (w, v) = ({:+.4}, {:+.4})",
        t.len(),
        t.last_position()[0],
        t.last_velocity()[0]
    );
    Ok(())
}
