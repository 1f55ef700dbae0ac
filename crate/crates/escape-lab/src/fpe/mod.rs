//! Grid solvers for the overdamped and kinetic Fokker-Planck equations.

pub mod fokker_planck;
pub mod grid;
pub mod vlasov;

pub use fokker_planck::{discrete_stationary_1d, solve_fpe, solve_fpe_with_noise, FpeSolution};
pub use grid::{
    boundary_indices, stationary_density, weighted_l2_distance, Axis, DensityField, Grid,
};
pub use vlasov::{solve_vfp, stationary_phase_density, PhaseDensityField, VfpSolution};
