//! Explicit solver for the kinetic (position-velocity) Fokker-Planck equation
//!
//! `d psi/dt + v d_w psi - L'(w) d_v psi
//!     = nu d_v (v psi + (1 / eta') d_v psi)`,
//!
//! with `nu = (1 - xi) / sqrt(gamma)` and `eta' = 2 M (1 - xi) / (gamma beta)`,
//! on a 2-d phase-space grid with zero-flux boundaries. Time stepping is
//! Strang splitting: half a transport step, a full collision step, half a
//! transport step.
//!
//! The transport half uses a well-balanced conservative upwind scheme written
//! in the variable `g = psi / psi_inf`: face coefficients are geometric means
//! of the Gibbs weights `A_i = exp(-eta' L_i)` and `B_j = exp(-eta' v_j^2/2)`,
//! and the discrete velocity / force fields are defined from differences of
//! those same face values. With that choice the discrete transport divergence
//! vanishes identically for `g = 1`, so the kinetic Gibbs profile is an exact
//! fixed point of the full split scheme (the collision step is exponentially
//! fitted and shares the fixed point by telescoping).

use crate::error::{Error, Result};
use crate::fpe::fokker_planck::bernoulli;
use crate::fpe::grid::Axis;
use crate::landscapes::Landscape;
use crate::schedule::Schedule;

/// A density on the `(w, v)` phase-space grid, row-major `nw x nv`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDensityField {
    pub w_axis: Axis,
    pub v_axis: Axis,
    pub values: Vec<f64>,
}

impl PhaseDensityField {
    pub fn new(w_axis: Axis, v_axis: Axis, values: Vec<f64>) -> Result<PhaseDensityField> {
        if values.len() != w_axis.n * v_axis.n {
            return Err(Error::Argument(format!(
                "phase density has {} values for a {} x {} grid",
                values.len(),
                w_axis.n,
                v_axis.n
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Argument(
                "phase density values must be finite and nonnegative".into(),
            ));
        }
        Ok(PhaseDensityField { w_axis, v_axis, values })
    }

    pub fn cell_volume(&self) -> f64 {
        self.w_axis.h() * self.v_axis.h()
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let mass = self.total_mass();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Numeric(format!("cannot normalize phase density of mass {mass}")));
        }
        for v in &mut self.values {
            *v /= mass;
        }
        Ok(())
    }

    /// Marginal density over `v` (integrating out `w`).
    pub fn v_marginal(&self) -> Vec<f64> {
        let (nw, nv) = (self.w_axis.n, self.v_axis.n);
        let hw = self.w_axis.h();
        (0..nv)
            .map(|j| (0..nw).map(|i| self.values[i * nv + j]).sum::<f64>() * hw)
            .collect()
    }

    /// Marginal density over `w` (integrating out `v`).
    pub fn w_marginal(&self) -> Vec<f64> {
        let (nw, nv) = (self.w_axis.n, self.v_axis.n);
        let hv = self.v_axis.h();
        (0..nw)
            .map(|i| self.values[i * nv..(i + 1) * nv].iter().sum::<f64>() * hv)
            .collect()
    }
}

/// Normalized kinetic Gibbs density `exp(-eta' (L(w) + v^2/2))`.
pub fn stationary_phase_density(
    landscape: &Landscape,
    w_axis: &Axis,
    v_axis: &Axis,
    eta_prime: f64,
) -> Result<PhaseDensityField> {
    if landscape.dim != 1 {
        return Err(Error::Argument("phase-space solver covers 1-d landscapes".into()));
    }
    if !(eta_prime > 0.0 && eta_prime.is_finite()) {
        return Err(Error::Argument(format!(
            "eta' must be positive and finite, got {eta_prime}"
        )));
    }
    let lmin = w_axis
        .centers()
        .iter()
        .map(|&w| landscape.value(&[w]))
        .fold(f64::INFINITY, f64::min);
    let (nw, nv) = (w_axis.n, v_axis.n);
    let mut values = vec![0.0; nw * nv];
    for i in 0..nw {
        let a = (-eta_prime * (landscape.value(&[w_axis.center(i)]) - lmin)).exp();
        for j in 0..nv {
            let v = v_axis.center(j);
            values[i * nv + j] = a * (-eta_prime * v * v / 2.0).exp();
        }
    }
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    let mut boundary_max = 0.0f64;
    for i in 0..nw {
        for j in 0..nv {
            if i == 0 || j == 0 || i == nw - 1 || j == nv - 1 {
                boundary_max = boundary_max.max(values[i * nv + j]);
            }
        }
    }
    if boundary_max > 1e-8 * max {
        return Err(Error::Domain(format!(
            "boundary Gibbs weight {boundary_max:e} exceeds 1e-8 of the peak; enlarge the box"
        )));
    }
    let mut field = PhaseDensityField::new(w_axis.clone(), v_axis.clone(), values)?;
    field.normalize()?;
    Ok(field)
}

/// Precomputed discrete fields of the well-balanced scheme.
struct VfpWorkspace {
    nw: usize,
    nv: usize,
    hw: f64,
    hv: f64,
    /// Cell Gibbs weights in `w` and their faces (zeroed at the boundary).
    a: Vec<f64>,
    af: Vec<f64>,
    /// Cell Gibbs weights in `v` and their faces (zeroed at the boundary).
    b: Vec<f64>,
    bf: Vec<f64>,
    /// Discrete velocity field `v_check_j` and force field `l_check_i`.
    v_check: Vec<f64>,
    l_check: Vec<f64>,
    /// Collision face rates: outflow from the low / high cell across v-face m.
    col_lo: Vec<f64>,
    col_hi: Vec<f64>,
}

impl VfpWorkspace {
    fn build(
        landscape: &Landscape,
        w_axis: &Axis,
        v_axis: &Axis,
        eta_prime: f64,
        nu: f64,
    ) -> VfpWorkspace {
        let (nw, nv) = (w_axis.n, v_axis.n);
        let (hw, hv) = (w_axis.h(), v_axis.h());
        let lmin = w_axis
            .centers()
            .iter()
            .map(|&w| landscape.value(&[w]))
            .fold(f64::INFINITY, f64::min);
        let a: Vec<f64> = (0..nw)
            .map(|i| (-eta_prime * (landscape.value(&[w_axis.center(i)]) - lmin)).exp())
            .collect();
        let b: Vec<f64> = (0..nv)
            .map(|j| {
                let v = v_axis.center(j);
                (-eta_prime * v * v / 2.0).exp()
            })
            .collect();
        let mut af = vec![0.0; nw + 1];
        for k in 1..nw {
            af[k] = (a[k - 1] * a[k]).sqrt();
        }
        let mut bf = vec![0.0; nv + 1];
        for m in 1..nv {
            bf[m] = (b[m - 1] * b[m]).sqrt();
        }
        let v_check: Vec<f64> = (0..nv)
            .map(|j| -(bf[j + 1] - bf[j]) / (hv * eta_prime * b[j]))
            .collect();
        let l_check: Vec<f64> = (0..nw)
            .map(|i| -(af[i + 1] - af[i]) / (hw * eta_prime * a[i]))
            .collect();
        // Exponentially fitted collision rates in v with diffusion 1/eta'.
        let d = 1.0 / eta_prime;
        let mut col_lo = vec![0.0; nv + 1];
        let mut col_hi = vec![0.0; nv + 1];
        for m in 1..nv {
            let (vl, vh) = (v_axis.center(m - 1), v_axis.center(m));
            let z = eta_prime * (vh * vh - vl * vl) / 2.0;
            col_lo[m] = nu * d * bernoulli(z) / (hv * hv);
            col_hi[m] = nu * d * bernoulli(-z) / (hv * hv);
        }
        VfpWorkspace { nw, nv, hw, hv, a, af, b, bf, v_check, l_check, col_lo, col_hi }
    }

    /// Largest per-cell outflow rate of a single transport application.
    fn transport_rate_bound(&self) -> f64 {
        let mut max: f64 = 0.0;
        for i in 0..self.nw {
            for j in 0..self.nv {
                let vj = self.v_check[j];
                let w_face = if vj > 0.0 { self.af[i + 1] } else { self.af[i] };
                let rate_w = vj.abs() * w_face / (self.hw * self.a[i]);
                let li = self.l_check[i];
                let v_face = if -li > 0.0 { self.bf[j + 1] } else { self.bf[j] };
                let rate_v = li.abs() * v_face / (self.hv * self.b[j]);
                max = max.max(rate_w + rate_v);
            }
        }
        max
    }

    fn collision_rate_bound(&self) -> f64 {
        (0..self.nv)
            .map(|j| self.col_lo[j + 1] + self.col_hi[j])
            .fold(0.0, f64::max)
    }

    /// Upwind transport divergence in the well-balanced variable; writes
    /// `d psi / dt` into `dpsi`.
    fn transport_derivative(&self, psi: &[f64], dpsi: &mut [f64]) {
        let (nw, nv) = (self.nw, self.nv);
        dpsi.iter_mut().for_each(|x| *x = 0.0);
        // w-direction fluxes across interior faces k = 1..nw-1.
        for k in 1..nw {
            let (il, ih) = (k - 1, k);
            for j in 0..nv {
                let vj = self.v_check[j];
                let g_up = if vj > 0.0 {
                    psi[il * nv + j] / (self.a[il] * self.b[j])
                } else {
                    psi[ih * nv + j] / (self.a[ih] * self.b[j])
                };
                let flux = vj * self.af[k] * self.b[j] * g_up / self.hw;
                dpsi[il * nv + j] -= flux;
                dpsi[ih * nv + j] += flux;
            }
        }
        // v-direction fluxes across interior faces m = 1..nv-1.
        for i in 0..nw {
            let li = self.l_check[i];
            for m in 1..nv {
                let (jl, jh) = (m - 1, m);
                let g_up = if -li > 0.0 {
                    psi[i * nv + jl] / (self.a[i] * self.b[jl])
                } else {
                    psi[i * nv + jh] / (self.a[i] * self.b[jh])
                };
                let flux = -li * self.a[i] * self.bf[m] * g_up / self.hv;
                dpsi[i * nv + jl] -= flux;
                dpsi[i * nv + jh] += flux;
            }
        }
    }

    fn transport_step(&self, psi: &mut [f64], dpsi: &mut [f64], dt: f64) {
        self.transport_derivative(psi, dpsi);
        for (p, d) in psi.iter_mut().zip(dpsi.iter()) {
            *p += dt * d;
        }
    }

    fn collision_step(&self, psi: &mut [f64], dpsi: &mut [f64], dt: f64) {
        let (nw, nv) = (self.nw, self.nv);
        dpsi.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..nw {
            let row = &psi[i * nv..(i + 1) * nv];
            let drow = &mut dpsi[i * nv..(i + 1) * nv];
            for m in 1..nv {
                let flux = self.col_lo[m] * row[m - 1] - self.col_hi[m] * row[m];
                drow[m - 1] -= flux;
                drow[m] += flux;
            }
        }
        for (p, d) in psi.iter_mut().zip(dpsi.iter()) {
            *p += dt * d;
        }
    }
}

/// Recorded kinetic solve.
#[derive(Debug, Clone)]
pub struct VfpSolution {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub snapshots: Vec<PhaseDensityField>,
    pub eta_prime: f64,
    pub nu: f64,
}

impl VfpSolution {
    pub fn final_density(&self) -> &PhaseDensityField {
        self.snapshots.last().expect("solution has at least the initial snapshot")
    }

    pub fn mass_drift(&self) -> f64 {
        let m0 = self.mass[0];
        self.mass.iter().map(|m| (m - m0).abs()).fold(0.0, f64::max)
    }
}

/// Solve the kinetic equation with momentum parameter `xi` and a constant
/// schedule, Strang-split as transport / collision / transport.
pub fn solve_vfp(
    landscape: &Landscape,
    schedule: &Schedule,
    xi: f64,
    psi0: &PhaseDensityField,
    dt: f64,
    t_final: f64,
    record_stride: usize,
) -> Result<VfpSolution> {
    schedule.validate()?;
    if landscape.dim != 1 {
        return Err(Error::Argument("phase-space solver covers 1-d landscapes".into()));
    }
    let Schedule::Constant { gamma, batch, beta } = *schedule else {
        return Err(Error::Argument(
            "the kinetic solver requires a constant schedule".into(),
        ));
    };
    if !(0.0..1.0).contains(&xi) {
        return Err(Error::Argument(format!(
            "momentum parameter must satisfy 0 <= xi < 1, got {xi}"
        )));
    }
    if !(dt > 0.0 && t_final > 0.0 && dt.is_finite() && t_final.is_finite()) {
        return Err(Error::Argument(format!(
            "dt and t_final must be positive and finite, got {dt}, {t_final}"
        )));
    }
    let eta_prime = 2.0 * batch * (1.0 - xi) / (gamma * beta);
    let nu = (1.0 - xi) / gamma.sqrt();
    let ws = VfpWorkspace::build(landscape, &psi0.w_axis, &psi0.v_axis, eta_prime, nu);

    let transport_bound = ws.transport_rate_bound();
    if 0.5 * dt * transport_bound > 1.0 {
        return Err(Error::StepSize {
            dt,
            bound: 2.0 / transport_bound,
            detail: "explicit transport half-step would break positivity".into(),
        });
    }
    let collision_bound = ws.collision_rate_bound();
    if dt * collision_bound > 1.0 {
        return Err(Error::StepSize {
            dt,
            bound: 1.0 / collision_bound,
            detail: "explicit collision step would break positivity".into(),
        });
    }

    let n_steps = (t_final / dt).round().max(1.0) as usize;
    let stride = record_stride.max(1);
    let mut psi = psi0.values.clone();
    let mut dpsi = vec![0.0f64; psi.len()];
    let vol = psi0.cell_volume();
    let mut times = vec![0.0];
    let mut mass = vec![psi.iter().sum::<f64>() * vol];
    let mut snapshots = vec![psi0.clone()];

    for step in 0..n_steps {
        ws.transport_step(&mut psi, &mut dpsi, 0.5 * dt);
        ws.collision_step(&mut psi, &mut dpsi, dt);
        ws.transport_step(&mut psi, &mut dpsi, 0.5 * dt);
        if (step + 1) % stride == 0 || step + 1 == n_steps {
            if psi.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!(
                    "non-finite phase density at t = {}",
                    (step + 1) as f64 * dt
                )));
            }
            times.push((step + 1) as f64 * dt);
            mass.push(psi.iter().sum::<f64>() * vol);
            snapshots.push(PhaseDensityField {
                w_axis: psi0.w_axis.clone(),
                v_axis: psi0.v_axis.clone(),
                values: psi.iter().map(|v| v.max(0.0)).collect(),
            });
        }
    }
    Ok(VfpSolution { times, mass, snapshots, eta_prime, nu })
}
