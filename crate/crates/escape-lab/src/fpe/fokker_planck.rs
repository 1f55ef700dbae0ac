//! Explicit finite-volume solver for the overdamped Fokker-Planck equation
//!
//! `dp/dt = div(p grad L + grad(D p))`, `D(t, w) = gamma(t) beta(w) / (2 M(t))`,
//!
//! with zero-flux boundaries. Face fluxes use exponential fitting
//! (`J = (D_f / h) [B(z) p_left - B(-z) p_right]` with `B(z) = z / (e^z - 1)`
//! and `z` the potential increment over the face in units of `D_f`), which
//! makes the Gibbs profile an exact fixed point of the discrete operator:
//! for constant `D` the face weights telescope to `exp(-eta L)` at the cell
//! centers. Mass is conserved to rounding because interior fluxes cancel in
//! pairs and boundary fluxes are identically zero.

use crate::error::{Error, Result};
use crate::fpe::grid::{DensityField, Grid};
use crate::landscapes::Landscape;
use crate::schedule::Schedule;

/// `B(z) = z / (e^z - 1)`, continuous at 0, overflow-safe for large `|z|`.
#[inline]
pub(crate) fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - 0.5 * z
    } else {
        z / z.exp_m1()
    }
}

/// Recorded solve: snapshot times, total mass at those times, density snapshots.
#[derive(Debug, Clone)]
pub struct FpeSolution {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub snapshots: Vec<DensityField>,
}

impl FpeSolution {
    pub fn final_density(&self) -> &DensityField {
        self.snapshots.last().expect("solution has at least the initial snapshot")
    }

    /// Largest deviation of recorded mass from the initial mass.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.mass[0];
        self.mass.iter().map(|m| (m - m0).abs()).fold(0.0, f64::max)
    }
}

struct Face {
    /// Flat index of the cell on the low side.
    lo: usize,
    /// Flat index of the cell on the high side.
    hi: usize,
    /// Outflow rate from `lo` (units 1/time): `D_f B(z) / h^2`.
    out_lo: f64,
    /// Outflow rate from `hi`: `D_f B(-z) / h^2`.
    out_hi: f64,
}

/// Assemble all interior-face rates for diffusion field `d` and potential `phi`.
fn assemble_faces(grid: &Grid, d: &[f64], phi: &[f64]) -> Vec<Face> {
    let mut faces = Vec::new();
    let mut push = |lo: usize, hi: usize, h: f64| {
        let d_f = 0.5 * (d[lo] + d[hi]);
        let z = (phi[hi] - phi[lo]) / d_f;
        faces.push(Face {
            lo,
            hi,
            out_lo: d_f * bernoulli(z) / (h * h),
            out_hi: d_f * bernoulli(-z) / (h * h),
        });
    };
    match grid.dim() {
        1 => {
            let h = grid.axes[0].h();
            for i in 0..grid.axes[0].n - 1 {
                push(i, i + 1, h);
            }
        }
        2 => {
            let (n1, n2) = (grid.axes[0].n, grid.axes[1].n);
            let (h1, h2) = (grid.axes[0].h(), grid.axes[1].h());
            for i in 0..n1 {
                for j in 0..n2 {
                    if i + 1 < n1 {
                        push(i * n2 + j, (i + 1) * n2 + j, h1);
                    }
                    if j + 1 < n2 {
                        push(i * n2 + j, i * n2 + j + 1, h2);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    faces
}

fn max_outflow(n_cells: usize, faces: &[Face]) -> f64 {
    let mut out = vec![0.0f64; n_cells];
    for f in faces {
        out[f.lo] += f.out_lo;
        out[f.hi] += f.out_hi;
    }
    out.into_iter().fold(0.0, f64::max)
}

/// Solve with the constant noise scale `beta` taken from the schedule.
pub fn solve_fpe(
    landscape: &Landscape,
    schedule: &Schedule,
    p0: &DensityField,
    dt: f64,
    t_final: f64,
    record_stride: usize,
) -> Result<FpeSolution> {
    let beta = schedule.beta();
    solve_fpe_with_noise(landscape, schedule, p0, dt, t_final, record_stride, &|_| beta)
}

/// Solve with a state-dependent noise scale `beta(w)`.
pub fn solve_fpe_with_noise(
    landscape: &Landscape,
    schedule: &Schedule,
    p0: &DensityField,
    dt: f64,
    t_final: f64,
    record_stride: usize,
    beta_fn: &dyn Fn(&[f64]) -> f64,
) -> Result<FpeSolution> {
    schedule.validate()?;
    let grid = &p0.grid;
    if grid.dim() != landscape.dim {
        return Err(Error::Argument(format!(
            "grid dim {} does not match landscape dim {}",
            grid.dim(),
            landscape.dim
        )));
    }
    if !(dt > 0.0 && t_final > 0.0 && dt.is_finite() && t_final.is_finite()) {
        return Err(Error::Argument(format!(
            "dt and t_final must be positive and finite, got {dt}, {t_final}"
        )));
    }
    let n = grid.n_cells();
    let ls: Vec<f64> = (0..n).map(|i| landscape.value(&grid.center(i))).collect();
    let betas: Vec<f64> = (0..n)
        .map(|i| {
            let b = beta_fn(&grid.center(i));
            if b > 0.0 && b.is_finite() {
                Ok(b)
            } else {
                Err(Error::Argument(format!("beta(w) must be positive and finite, got {b}")))
            }
        })
        .collect::<Result<_>>()?;

    let frozen = matches!(schedule, Schedule::Constant { .. });
    let build = |t: f64| -> Result<Vec<Face>> {
        let scale = schedule.gamma(t) / (2.0 * schedule.batch(t));
        let d: Vec<f64> = betas.iter().map(|b| scale * b).collect();
        let phi: Vec<f64> = ls.iter().zip(&d).map(|(l, di)| l + di).collect();
        let faces = assemble_faces(grid, &d, &phi);
        let out = max_outflow(n, &faces);
        if dt * out > 1.0 {
            return Err(Error::StepSize {
                dt,
                bound: 1.0 / out,
                detail: "explicit Fokker-Planck step would break positivity".into(),
            });
        }
        Ok(faces)
    };
    let mut faces = build(0.0)?;

    let n_steps = (t_final / dt).round().max(1.0) as usize;
    let stride = record_stride.max(1);
    let mut p = p0.values.clone();
    let mut dp = vec![0.0f64; n];
    let vol = grid.cell_volume();
    let mut times = vec![0.0];
    let mut mass = vec![p.iter().sum::<f64>() * vol];
    let mut snapshots = vec![p0.clone()];

    for step in 0..n_steps {
        if !frozen && step > 0 {
            faces = build(step as f64 * dt)?;
        }
        dp.iter_mut().for_each(|x| *x = 0.0);
        for f in &faces {
            let flux = f.out_lo * p[f.lo] - f.out_hi * p[f.hi];
            dp[f.lo] -= flux;
            dp[f.hi] += flux;
        }
        for (pi, di) in p.iter_mut().zip(&dp) {
            *pi += dt * di;
        }
        if (step + 1) % stride == 0 || step + 1 == n_steps {
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!(
                    "non-finite density at t = {}",
                    (step + 1) as f64 * dt
                )));
            }
            times.push((step + 1) as f64 * dt);
            mass.push(p.iter().sum::<f64>() * vol);
            snapshots.push(DensityField {
                grid: grid.clone(),
                values: p.iter().map(|v| v.max(0.0)).collect(),
            });
        }
    }
    Ok(FpeSolution { times, mass, snapshots })
}

/// Exact fixed point of the discrete operator on a 1-d grid with
/// state-dependent noise, built by telescoping the face weights.
pub fn discrete_stationary_1d(
    landscape: &Landscape,
    grid: &Grid,
    schedule: &Schedule,
    beta_fn: &dyn Fn(&[f64]) -> f64,
) -> Result<DensityField> {
    if grid.dim() != 1 || landscape.dim != 1 {
        return Err(Error::Argument("discrete_stationary_1d needs a 1-d problem".into()));
    }
    let n = grid.axes[0].n;
    let scale = schedule.gamma(0.0) / (2.0 * schedule.batch(0.0));
    let centers = grid.axes[0].centers();
    let d: Vec<f64> = centers.iter().map(|&w| scale * beta_fn(&[w])).collect();
    let phi: Vec<f64> = centers
        .iter()
        .zip(&d)
        .map(|(&w, di)| landscape.value(&[w]) + di)
        .collect();
    // J = 0 forces p_{i+1} / p_i = exp(-z) across each face.
    let mut logp = vec![0.0f64; n];
    for i in 0..n - 1 {
        let d_f = 0.5 * (d[i] + d[i + 1]);
        logp[i + 1] = logp[i] - (phi[i + 1] - phi[i]) / d_f;
    }
    let shift = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut field = DensityField::new(
        grid.clone(),
        logp.iter().map(|l| (l - shift).exp()).collect(),
    )?;
    field.normalize()?;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpe::grid::{stationary_density, weighted_l2_distance};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::collections::BTreeMap;

    fn quadratic() -> Landscape {
        Landscape::builtin("quadratic", &BTreeMap::new()).unwrap()
    }

    #[test]
    fn bernoulli_function_identities() {
        assert_relative_eq!(bernoulli(1.0), 1.0 / 1.0f64.exp_m1());
        assert_abs_diff_eq!(bernoulli(0.0), 1.0);
        assert_abs_diff_eq!(bernoulli(1e-12), 1.0, epsilon = 1e-10);
        // B(z) - B(-z) = -z for all z.
        for z in [-30.0, -2.0, -1e-9, 0.5, 3.0, 40.0, 800.0] {
            assert_relative_eq!(bernoulli(z) - bernoulli(-z), -z, max_relative = 1e-12);
        }
        assert!(bernoulli(800.0) >= 0.0 && bernoulli(-800.0).is_finite());
    }

    /// Starting at the Gibbs profile the solver must not move: the profile is
    /// an exact discrete fixed point, so any drift is pure rounding.
    #[test]
    fn gibbs_profile_is_exact_fixed_point() {
        let l = quadratic();
        let s = Schedule::constant(0.1, 10.0, 50.0); // eta = 4
        let grid = Grid::line(-4.0, 4.0, 200).unwrap();
        let p0 = stationary_density(&l, &grid, s.eta(0.0)).unwrap();
        let sol = solve_fpe(&l, &s, &p0, 2e-4, 1.0, 1000).unwrap();
        let drift: f64 = sol
            .final_density()
            .values
            .iter()
            .zip(&p0.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-11, "fixed-point drift {drift}");
        assert!(sol.mass_drift() < 1e-12);
    }

    /// OU relaxation: the second moment follows the analytic law
    /// `var(t) = var0 e^{-2t} + (1/eta)(1 - e^{-2t})`.
    #[test]
    fn ou_variance_relaxation() {
        let l = quadratic();
        let s = Schedule::constant(0.1, 10.0, 50.0); // eta = 4
        let grid = Grid::line(-5.0, 5.0, 250).unwrap();
        // Start from a narrow centered Gaussian (variance 0.04).
        let values: Vec<f64> = grid.axes[0]
            .centers()
            .iter()
            .map(|&w| (-w * w / 0.08).exp())
            .collect();
        let mut p0 = DensityField::new(grid.clone(), values).unwrap();
        p0.normalize().unwrap();
        let var0 = p0.expectation(|w| w[0] * w[0]);
        let sol = solve_fpe(&l, &s, &p0, 2e-4, 1.0, 500).unwrap();
        for (t, snap) in sol.times.iter().zip(&sol.snapshots) {
            let var = snap.expectation(|w| w[0] * w[0]);
            let exact = var0 * (-2.0 * t).exp() + 0.25 * (1.0 - (-2.0 * t).exp());
            assert_relative_eq!(var, exact, max_relative = 2e-3);
        }
        assert!(sol.mass_drift() < 1e-12);
    }

    /// Double-well relaxation reaches the Gibbs density in weighted L2.
    #[test]
    fn double_well_relaxes_to_gibbs() {
        let l = Landscape::builtin("double_well_1d", &BTreeMap::new()).unwrap();
        let s = Schedule::constant(0.1, 10.0, 50.0); // eta = 4
        let grid = Grid::line(-3.0, 3.0, 240).unwrap();
        let p_inf = stationary_density(&l, &grid, 4.0).unwrap();
        // Start in the left well only.
        let values: Vec<f64> = grid.axes[0]
            .centers()
            .iter()
            .map(|&w| (-(w + 1.0) * (w + 1.0) / 0.2).exp())
            .collect();
        let mut p0 = DensityField::new(grid.clone(), values).unwrap();
        p0.normalize().unwrap();
        let sol = solve_fpe(&l, &s, &p0, 1e-4, 60.0, 100_000).unwrap();
        let weight: Vec<f64> = p_inf.values.iter().map(|v| 1.0 / v.max(1e-300)).collect();
        let dist = weighted_l2_distance(sol.final_density(), &p_inf, &weight).unwrap();
        assert!(dist < 1e-3, "weighted distance {dist}");
    }

    /// Halving h reduces the transient-solution error.
    #[test]
    fn refinement_improves_transient_accuracy() {
        let l = quadratic();
        let s = Schedule::constant(0.1, 10.0, 50.0);
        let err = |n: usize| {
            let grid = Grid::line(-5.0, 5.0, n).unwrap();
            let values: Vec<f64> = grid.axes[0]
                .centers()
                .iter()
                .map(|&w| (-(w - 1.0) * (w - 1.0) / 0.5).exp())
                .collect();
            let mut p0 = DensityField::new(grid.clone(), values).unwrap();
            p0.normalize().unwrap();
            let sol = solve_fpe(&l, &s, &p0, 5e-5, 0.5, usize::MAX).unwrap();
            // Exact OU solution: Gaussian with mean e^{-t}, variance by the OU law.
            let t = 0.5f64;
            let mean = (-t).exp();
            let var = 0.25 * (-2.0 * t).exp() + 0.25 * (1.0 - (-2.0 * t).exp());
            let exact: Vec<f64> = grid.axes[0]
                .centers()
                .iter()
                .map(|&w| {
                    (-(w - mean) * (w - mean) / (2.0 * var)).exp()
                        / (2.0 * std::f64::consts::PI * var).sqrt()
                })
                .collect();
            sol.final_density()
                .values
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max)
        };
        let coarse = err(50);
        let fine = err(100);
        assert!(fine < coarse / 1.8, "coarse {coarse}, fine {fine}");
    }

    /// State-dependent noise converges to the telescoped discrete fixed point.
    #[test]
    fn variable_noise_reaches_discrete_stationary() {
        let l = quadratic();
        let s = Schedule::constant(0.1, 10.0, 50.0);
        let beta_fn = |w: &[f64]| 50.0 * (1.0 + 0.5 * w[0] * w[0]);
        let grid = Grid::line(-5.0, 5.0, 150).unwrap();
        let target = discrete_stationary_1d(&l, &grid, &s, &beta_fn).unwrap();
        let uniform = DensityField::new(grid.clone(), vec![0.1; 150]).unwrap();
        let sol =
            solve_fpe_with_noise(&l, &s, &uniform, 1e-4, 30.0, usize::MAX, &beta_fn).unwrap();
        let err: f64 = sol
            .final_density()
            .values
            .iter()
            .zip(&target.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "distance to discrete fixed point {err}");
    }

    #[test]
    fn oversized_step_is_rejected() {
        let l = quadratic();
        let s = Schedule::constant(0.1, 10.0, 50.0);
        let grid = Grid::line(-4.0, 4.0, 200).unwrap();
        let p0 = stationary_density(&l, &grid, 4.0).unwrap();
        let err = solve_fpe(&l, &s, &p0, 0.5, 1.0, 1).unwrap_err();
        assert!(matches!(err, Error::StepSize { .. }), "{err}");
    }

    /// A time-dependent schedule tracks the instantaneous Gibbs profile once
    /// the schedule has settled.
    #[test]
    fn annealed_schedule_settles_to_limit_profile() {
        let l = quadratic();
        let s = Schedule::ExpApproach {
            gamma: 0.1,
            batch: 10.0,
            beta: 50.0,
            amplitude: 1.0,
            rate: 1.0,
        };
        let grid = Grid::line(-5.0, 5.0, 150).unwrap();
        let p0 = stationary_density(&l, &grid, s.eta(0.0)).unwrap();
        let sol = solve_fpe(&l, &s, &p0, 2e-4, 25.0, usize::MAX).unwrap();
        let target = stationary_density(&l, &grid, s.eta_inf().unwrap()).unwrap();
        let err: f64 = sol
            .final_density()
            .values
            .iter()
            .zip(&target.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "distance to limit profile {err}");
    }
}
