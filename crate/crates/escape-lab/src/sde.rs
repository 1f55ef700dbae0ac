//! Euler-Maruyama simulation of the gradient-flow diffusions.
//!
//! Two continuous-time models are covered, together with their discrete
//! optimizer counterparts:
//!
//! * overdamped: `dW = -grad L dt + sqrt(gamma(t) beta / M(t)) dB`, whose
//!   stationary law is proportional to `exp(-eta L)` with
//!   `eta = 2 M / (gamma beta)`;
//! * underdamped (momentum): `dW = V dt`,
//!   `dV = -grad L dt - (1 - xi)/sqrt(gamma) V dt + gamma^{1/4} sqrt(beta / M) dB`,
//!   whose stationary law is proportional to `exp(-eta' (L + |v|^2 / 2))` with
//!   `eta' = 2 M (1 - xi) / (gamma beta)`.
//!
//! All paths draw noise from per-path counter-mode streams, so ensemble
//! results are independent of the rayon thread count.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::landscapes::Landscape;
use crate::rng::{path_rng, PathRng};
use crate::schedule::Schedule;

/// Paths are declared divergent when they leave the ball of this radius.
pub const GUARD_RADIUS: f64 = 10.0;

/// A recorded position path.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    /// Row-major `len x dim` positions.
    pub positions: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }
}

/// A recorded position/velocity path of the momentum dynamics.
#[derive(Debug, Clone)]
pub struct PhaseTrajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl PhaseTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last_position(&self) -> &[f64] {
        self.position(self.len() - 1)
    }

    pub fn last_velocity(&self) -> &[f64] {
        self.velocity(self.len() - 1)
    }
}

/// Mean, variance, and standard error of a scalar ensemble functional.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleStats {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_err: f64,
}

impl EnsembleStats {
    /// Two-pass sample statistics; requires at least two values.
    pub fn from_values(values: &[f64]) -> Result<EnsembleStats> {
        if values.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "ensemble statistics need >= 2 values, got {}",
                values.len()
            )));
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let variance =
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        Ok(EnsembleStats {
            n,
            mean,
            variance,
            std_err: (variance / n as f64).sqrt(),
        })
    }
}

fn check_start(landscape: &Landscape, w0: &[f64]) -> Result<()> {
    if w0.len() != landscape.dim {
        return Err(Error::Argument(format!(
            "initial point has length {}, landscape '{}' has dim {}",
            w0.len(),
            landscape.name,
            landscape.dim
        )));
    }
    if w0.iter().any(|x| !x.is_finite()) {
        return Err(Error::Argument("non-finite initial point".into()));
    }
    Ok(())
}

fn check_dt(landscape: &Landscape, dt: f64, t_final: f64, radius: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::Argument(format!(
            "dt and t_final must be positive and finite, got dt = {dt}, t_final = {t_final}"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Argument(format!("guard radius must be positive, got {radius}")));
    }
    let curvature = landscape.curvature_bound(radius);
    if dt * curvature >= 2.0 {
        return Err(Error::StepSize {
            dt,
            bound: 2.0 / curvature,
            detail: format!(
                "explicit Euler needs dt * sup|hess| < 2; curvature bound {curvature} \
                 on the guard ball of radius {radius}"
            ),
        });
    }
    Ok(())
}

fn guard(w: &[f64], step: usize, t: f64, radius: f64) -> Result<()> {
    let norm2: f64 = w.iter().map(|x| x * x).sum();
    if !norm2.is_finite() || norm2 > radius * radius {
        return Err(Error::Divergence {
            step,
            time: t,
            detail: format!("state norm {} exceeded guard radius {radius}", norm2.sqrt()),
        });
    }
    Ok(())
}

/// Simulate the overdamped SDE, recording every `record_stride`-th step
/// (plus the initial and final states).
pub fn simulate_sgd_sde(
    landscape: &Landscape,
    schedule: &Schedule,
    w0: &[f64],
    dt: f64,
    t_final: f64,
    record_stride: usize,
    rng: &mut PathRng,
) -> Result<Trajectory> {
    simulate_sgd_sde_guarded(landscape, schedule, w0, dt, t_final, record_stride, GUARD_RADIUS, rng)
}

/// Like [`simulate_sgd_sde`] but with an explicit guard-ball radius.
///
/// A tighter guard ball relaxes the step-size admissibility check (the
/// Euler stability bound uses the curvature supremum over the guard ball),
/// which helps on landscapes whose curvature grows rapidly away from the
/// region the dynamics actually visits.
#[allow(clippy::too_many_arguments)]
pub fn simulate_sgd_sde_guarded(
    landscape: &Landscape,
    schedule: &Schedule,
    w0: &[f64],
    dt: f64,
    t_final: f64,
    record_stride: usize,
    guard_radius: f64,
    rng: &mut PathRng,
) -> Result<Trajectory> {
    check_start(landscape, w0)?;
    check_dt(landscape, dt, t_final, guard_radius)?;
    schedule.validate()?;
    let stride = record_stride.max(1);
    let dim = landscape.dim;
    let n_steps = (t_final / dt).round() as usize;
    let mut w = w0.to_vec();
    let mut g = vec![0.0; dim];
    let mut times = Vec::with_capacity(n_steps / stride + 2);
    let mut positions = Vec::with_capacity((n_steps / stride + 2) * dim);
    times.push(0.0);
    positions.extend_from_slice(&w);
    let sqrt_dt = dt.sqrt();
    for step in 0..n_steps {
        let t = step as f64 * dt;
        let amp = (schedule.gamma(t) * schedule.beta() / schedule.batch(t)).sqrt();
        landscape.gradient_into(&w, &mut g);
        for i in 0..dim {
            let xi: f64 = rng.sample(StandardNormal);
            w[i] += -g[i] * dt + amp * sqrt_dt * xi;
        }
        guard(&w, step + 1, t + dt, guard_radius)?;
        if (step + 1) % stride == 0 || step + 1 == n_steps {
            times.push((step + 1) as f64 * dt);
            positions.extend_from_slice(&w);
        }
    }
    Ok(Trajectory { dim, times, positions })
}

/// Simulate the underdamped (momentum) SDE with momentum parameter `xi`.
pub fn simulate_msgd_sde(
    landscape: &Landscape,
    schedule: &Schedule,
    xi: f64,
    w0: &[f64],
    v0: &[f64],
    dt: f64,
    t_final: f64,
    record_stride: usize,
    rng: &mut PathRng,
) -> Result<PhaseTrajectory> {
    check_start(landscape, w0)?;
    check_start(landscape, v0)?;
    check_dt(landscape, dt, t_final, GUARD_RADIUS)?;
    schedule.validate()?;
    if !(0.0..1.0).contains(&xi) {
        return Err(Error::Argument(format!(
            "momentum parameter must satisfy 0 <= xi < 1, got {xi}"
        )));
    }
    let stride = record_stride.max(1);
    let dim = landscape.dim;
    let n_steps = (t_final / dt).round() as usize;
    let mut w = w0.to_vec();
    let mut v = v0.to_vec();
    let mut g = vec![0.0; dim];
    let mut times = Vec::with_capacity(n_steps / stride + 2);
    let mut positions = Vec::with_capacity((n_steps / stride + 2) * dim);
    let mut velocities = Vec::with_capacity((n_steps / stride + 2) * dim);
    times.push(0.0);
    positions.extend_from_slice(&w);
    velocities.extend_from_slice(&v);
    let sqrt_dt = dt.sqrt();
    for step in 0..n_steps {
        let t = step as f64 * dt;
        let gamma = schedule.gamma(t);
        let friction = (1.0 - xi) / gamma.sqrt();
        if dt * friction >= 2.0 {
            return Err(Error::StepSize {
                dt,
                bound: 2.0 / friction,
                detail: format!("friction coefficient {friction} too stiff for explicit step"),
            });
        }
        let amp = gamma.powf(0.25) * (schedule.beta() / schedule.batch(t)).sqrt();
        landscape.gradient_into(&w, &mut g);
        for i in 0..dim {
            let xi_draw: f64 = rng.sample(StandardNormal);
            let w_new = w[i] + v[i] * dt;
            v[i] += -g[i] * dt - friction * v[i] * dt + amp * sqrt_dt * xi_draw;
            w[i] = w_new;
        }
        guard(&w, step + 1, t + dt, GUARD_RADIUS)?;
        guard(&v, step + 1, t + dt, GUARD_RADIUS)?;
        if (step + 1) % stride == 0 || step + 1 == n_steps {
            times.push((step + 1) as f64 * dt);
            positions.extend_from_slice(&w);
            velocities.extend_from_slice(&v);
        }
    }
    Ok(PhaseTrajectory { dim, times, positions, velocities })
}

/// Discrete heavy-ball optimizer with per-step gradient noise of covariance
/// `(beta / M) I`:
/// `z_{k+1} = xi z_k - gamma ghat(w_k)`, `w_{k+1} = w_k + z_{k+1}`.
///
/// Wall-clock time advances by `gamma` per step; the recorded velocity is
/// `z / sqrt(gamma)`, the scaling under which the iterates track the
/// underdamped SDE.
pub fn simulate_discrete_msgd(
    landscape: &Landscape,
    schedule: &Schedule,
    xi: f64,
    w0: &[f64],
    n_steps: usize,
    record_stride: usize,
    rng: &mut PathRng,
) -> Result<PhaseTrajectory> {
    check_start(landscape, w0)?;
    schedule.validate()?;
    if !(0.0..1.0).contains(&xi) {
        return Err(Error::Argument(format!(
            "momentum parameter must satisfy 0 <= xi < 1, got {xi}"
        )));
    }
    let stride = record_stride.max(1);
    let dim = landscape.dim;
    let mut w = w0.to_vec();
    let mut z = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    let mut times = Vec::with_capacity(n_steps / stride + 2);
    let mut positions = Vec::with_capacity((n_steps / stride + 2) * dim);
    let mut velocities = Vec::with_capacity((n_steps / stride + 2) * dim);
    let mut t = 0.0;
    let push =
        |t: f64, w: &[f64], z: &[f64], gamma: f64, times: &mut Vec<f64>, p: &mut Vec<f64>, v: &mut Vec<f64>| {
            times.push(t);
            p.extend_from_slice(w);
            v.extend(z.iter().map(|zi| zi / gamma.sqrt()));
        };
    push(0.0, &w, &z, schedule.gamma(0.0), &mut times, &mut positions, &mut velocities);
    for step in 0..n_steps {
        let gamma = schedule.gamma(t);
        let noise_amp = (schedule.beta() / schedule.batch(t)).sqrt();
        landscape.gradient_into(&w, &mut g);
        for i in 0..dim {
            let draw: f64 = rng.sample(StandardNormal);
            let ghat = g[i] + noise_amp * draw;
            z[i] = xi * z[i] - gamma * ghat;
            w[i] += z[i];
        }
        t += gamma;
        guard(&w, step + 1, t, GUARD_RADIUS)?;
        if (step + 1) % stride == 0 || step + 1 == n_steps {
            push(t, &w, &z, gamma, &mut times, &mut positions, &mut velocities);
        }
    }
    Ok(PhaseTrajectory { dim, times, positions, velocities })
}

/// Discrete SGD: the `xi = 0` special case of [`simulate_discrete_msgd`],
/// reduced to a position path.
pub fn simulate_discrete_sgd(
    landscape: &Landscape,
    schedule: &Schedule,
    w0: &[f64],
    n_steps: usize,
    record_stride: usize,
    rng: &mut PathRng,
) -> Result<Trajectory> {
    let phase = simulate_discrete_msgd(landscape, schedule, 0.0, w0, n_steps, record_stride, rng)?;
    Ok(Trajectory {
        dim: phase.dim,
        times: phase.times,
        positions: phase.positions,
    })
}

/// Run `n_paths` independent path simulations in parallel.
///
/// Path `i` receives the generator `path_rng(master_seed, i)`, and results
/// come back in path order, so the output is a deterministic function of
/// `master_seed` alone, independent of thread scheduling.
pub fn run_ensemble<T, F>(n_paths: usize, master_seed: u64, sim: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut PathRng) -> Result<T> + Sync,
{
    if n_paths == 0 {
        return Err(Error::Argument("ensemble needs at least one path".into()));
    }
    (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(master_seed, i as u64);
            sim(i, &mut rng)
        })
        .collect()
}
