//! Confinement and regularity report for the landscape catalog.
//!
//! Samples radial shells to test tail confinement, gradient growth,
//! perturbation boundedness, and the bounded split of the Hessian, printing
//! a verdict per assumption for each built-in landscape plus a deliberately
//! non-confining control that must fail.
//!
//! ```bash
//! cargo run --example assumption_report
//! ```

use std::collections::BTreeMap;

use escape_lab::landscapes::{check_assumptions, Verdict};
use escape_lab::Landscape;

fn show(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "FAIL",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn main() -> escape_lab::Result<()> {
    let radii: Vec<f64> = (1..=8).map(|k| k as f64).collect();
    let mut landscapes = vec![
        Landscape::builtin("quadratic", &BTreeMap::new())?,
        Landscape::builtin("double_well_1d", &BTreeMap::new())?,
        Landscape::builtin("two_well_2d", &BTreeMap::new())?,
        Landscape::negative_quadratic(1),
    ];
    let tilted = Landscape::builtin("tilted_double_well_1d", &BTreeMap::new())?;
    landscapes.insert(2, tilted);

    println!("{:<40} {:>6} {:>6} {:>6} {:>14}", "landscape", "A1", "A2", "A3", "A4");
    for l in &landscapes {
        let report = check_assumptions(l, &radii, 64)?;
        let a4 = if report.a4_domain_restricted {
            format!("{} (boxed)", show(report.a4.holds))
        } else {
            show(report.a4.holds).to_string()
        };
        println!(
            "{:<40} {:>6} {:>6} {:>6} {:>14}",
            l.fingerprint_text(),
            show(report.a1.holds),
            show(report.a2.holds),
            show(report.a3.holds),
            a4
        );
    }
    Ok(())
}
