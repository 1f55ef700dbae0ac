//! Closed-form escape time versus the Monte Carlo first-passage oracle.
//!
//! Simulates transitions of the overdamped dynamics across the barrier of
//! the symmetric double well at several temperatures and compares the mean
//! first-passage time with the curvature-corrected barrier formula.
//!
//! ```bash
//! cargo run --release --example kramers_escape
//! ```

use std::collections::BTreeMap;

use escape_lab::kramers::{eyring_kramers_time, mc_first_passage};
use escape_lab::{Landscape, Schedule};

fn main() -> escape_lab::Result<()> {
    let landscape = Landscape::builtin("double_well_1d", &BTreeMap::new())?;
    println!("landscape: {}", landscape.fingerprint_text());
    println!("{:>6} {:>12} {:>12} {:>8} {:>9}", "eta", "formula", "mc_mean", "mc_se", "censored");

    for eta in [4.0, 8.0] {
        // Fix beta = 50 and gamma = 0.1; the batch size sets the temperature
        // eta = 2 M / (gamma beta).
        let batch = eta * 0.1 * 50.0 / 2.0;
        let schedule = Schedule::constant(0.1, batch, 50.0);
        let formula = eyring_kramers_time(&landscape, 0, 0, eta)?;
        let stats = mc_first_passage(
            &landscape, &schedule, 0, 1, 0.2, 0.001, 50.0 * formula, 2000, 42,
        )?;
        println!(
            "{eta:>6} {formula:>12.3} {:>12.3} {:>8.3} {:>9}",
            stats.mean, stats.std_err, stats.n_censored
        );
    }
    Ok(())
}
