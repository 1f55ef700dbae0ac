//! Numerical laboratory for SGD-as-diffusion dynamics.
//!
//! The crate simulates stochastic-gradient flows as SDEs, solves the
//! associated Fokker-Planck and kinetic Fokker-Planck equations on grids,
//! evaluates closed-form escape-time and convergence-rate predictions, and
//! cross-checks the two against each other. See the `examples/` directory for
//! runnable entry points covering each capability, and the `escape-lab` binary
//! for the config-driven experiment runner.

pub mod asymptotics;
pub mod config;
pub mod error;
pub mod export;
pub mod fpe;
pub mod kramers;
pub mod landscapes;
pub mod minibatch;
pub mod rng;
pub mod runner;
pub mod schedule;
pub mod sde;

pub use error::{Error, Result};
pub use landscapes::{AssumptionReport, Landscape, Minimum, Saddle, Verdict};
pub use schedule::Schedule;
