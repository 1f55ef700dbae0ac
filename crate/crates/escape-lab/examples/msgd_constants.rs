//! Closed-form convergence-rate constants for the momentum dynamics.
//!
//! The hypocoercive estimate splits on the friction ratio
//! `(1 - xi)/sqrt(gamma)` against twice the convexity-split constant of the
//! landscape; both branches are evaluated here, along with the resulting
//! decay rate and envelope prefactor.
//!
//! ```bash
//! cargo run --example msgd_constants
//! ```

use escape_lab::asymptotics::msgd_rate_constants;

fn main() -> escape_lab::Result<()> {
    // Case 1: ratio 1 below 2 C_L = 2 (gamma = 1, xi = 0, C_L = 1).
    let c1 = msgd_rate_constants(1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 1)?;
    // Case 2: ratio 3 above 2 C_L = 2 (gamma = 1/9, xi = 0, C_L = 1).
    let c2 = msgd_rate_constants(1.0 / 9.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 1)?;

    for (label, c) in [("case 1 (small friction ratio)", c1), ("case 2 (large friction ratio)", c2)] {
        println!("{label}:");
        println!("  branch     = {}", c.case);
        println!("  mu         = {:.9}", c.mu);
        println!("  C          = {:.9}", c.c_upper);
        println!("  C_hat      = {:.9}", c.c_hat);
        println!("  lambda_min = {:.9}", c.lambda_min);
        println!("  mu_hat     = {:.9}", c.mu_hat);
        println!("  rate       = {:.9}", c.rate);
        println!("  prefactor  = {:.9}", c.prefactor);
    }
    Ok(())
}
