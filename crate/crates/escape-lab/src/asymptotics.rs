//! Closed-form rate constants and the bound checks that compare them against
//! measured solver output.
//!
//! Covers: stationary trapping probabilities near a minimum, the
//! determinant-ratio law for well occupation, log-linear decay-rate fits,
//! the Poincare constant of the Gibbs measure, the overdamped convergence
//! bound, the burn-in threshold for settling schedules, and the
//! hypocoercive rate constants of the momentum dynamics.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fpe::fokker_planck::FpeSolution;
use crate::fpe::grid::{DensityField, Grid};
use crate::fpe::vlasov::{PhaseDensityField, VfpSolution};
use crate::landscapes::{check_assumptions, Landscape};
use crate::schedule::Schedule;

/// Result of the stationary trapping computation near a minimum.
#[derive(Debug, Clone, Copy)]
pub struct TrappingResult {
    /// Quadrature of the normalized Gibbs density over the epsilon-ball.
    pub quadrature: f64,
    /// The closed-form factor, evaluated verbatim. It is reported alongside
    /// the quadrature and deliberately never reconciled with it; see `ratio`.
    pub formula_factor: f64,
    /// `quadrature / formula_factor`.
    pub ratio: f64,
}

/// Fraction of a cell centered at `center` lying inside the ball
/// `|w - x0| <= eps`, by 5-per-axis subsampling.
fn cell_ball_fraction(center: &[f64], half: &[f64], x0: &[f64], eps: f64) -> f64 {
    let sub = 5usize;
    let offsets: Vec<f64> = (0..sub).map(|k| (k as f64 + 0.5) / sub as f64 - 0.5).collect();
    match center.len() {
        1 => {
            let mut inside = 0usize;
            for &o in &offsets {
                let w = center[0] + 2.0 * half[0] * o;
                if (w - x0[0]).abs() <= eps {
                    inside += 1;
                }
            }
            inside as f64 / sub as f64
        }
        2 => {
            let mut inside = 0usize;
            for &ox in &offsets {
                for &oy in &offsets {
                    let dx = center[0] + 2.0 * half[0] * ox - x0[0];
                    let dy = center[1] + 2.0 * half[1] * oy - x0[1];
                    if dx * dx + dy * dy <= eps * eps {
                        inside += 1;
                    }
                }
            }
            inside as f64 / (sub * sub) as f64
        }
        _ => unreachable!(),
    }
}

/// Stationary probability of the epsilon-ball around `minima[min_index]`
/// under `exp(-eta L)`, together with the closed-form trapping factor.
pub fn trapping_probability(
    landscape: &Landscape,
    min_index: usize,
    eta: f64,
    epsilon: f64,
    grid: &Grid,
) -> Result<TrappingResult> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Argument(format!("epsilon must be positive, got {epsilon}")));
    }
    let minimum = landscape
        .minima
        .get(min_index)
        .ok_or_else(|| Error::Argument(format!("minimum index {min_index} out of range")))?;
    let p_inf = crate::fpe::grid::stationary_density(landscape, grid, eta)?;
    let half: Vec<f64> = grid.axes.iter().map(|a| a.h() / 2.0).collect();
    let vol = grid.cell_volume();
    let mut mass = 0.0;
    for (i, p) in p_inf.values.iter().enumerate() {
        let c = grid.center(i);
        let frac = cell_ball_fraction(&c, &half, &minimum.location, epsilon);
        if frac > 0.0 {
            mass += p * frac * vol;
        }
    }
    // Verbatim closed-form factor. kappa is the Gibbs normalization constant
    // relative to the energy floor at the minimum.
    let d = landscape.dim as f64;
    let z: f64 = (0..grid.n_cells())
        .map(|i| (-eta * (landscape.value(&grid.center(i)) - minimum.value)).exp() * vol)
        .sum();
    let kappa = 1.0 / z;
    let mut product = 1.0;
    for &lam in &minimum.hessian_eigenvalues {
        product *= (1.0 - (-eta * epsilon * epsilon * lam / std::f64::consts::PI).exp()).sqrt();
    }
    let formula_factor = kappa
        * (-2.0 * eta * minimum.value).exp()
        * eta.powf(-d / 2.0)
        * (1.0 / minimum.hessian_det)
        * (eta * epsilon * epsilon).exp()
        * product;
    Ok(TrappingResult {
        quadrature: mass,
        formula_factor,
        ratio: mass / formula_factor,
    })
}

/// Stationary occupation ratio `P(basin of minima[0]) / P(basin of minima[1])`
/// under `exp(-eta L)`, with cells assigned to the nearest minimum.
///
/// For equal-depth wells the large-eta limit is
/// `sqrt(det hess(min 1) / det hess(min 0))`.
pub fn well_probability_ratio(landscape: &Landscape, eta: f64, grid: &Grid) -> Result<f64> {
    if landscape.minima.len() < 2 {
        return Err(Error::Argument(format!(
            "occupation ratio needs at least two minima, '{}' has {}",
            landscape.name,
            landscape.minima.len()
        )));
    }
    let p_inf = crate::fpe::grid::stationary_density(landscape, grid, eta)?;
    let vol = grid.cell_volume();
    let mut masses = vec![0.0f64; landscape.minima.len()];
    for (i, p) in p_inf.values.iter().enumerate() {
        let c = grid.center(i);
        let nearest = landscape
            .minima
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let da: f64 = a.location.iter().zip(&c).map(|(x, y)| (x - y).powi(2)).sum();
                let db: f64 = b.location.iter().zip(&c).map(|(x, y)| (x - y).powi(2)).sum();
                da.partial_cmp(&db).unwrap()
            })
            .map(|(k, _)| k)
            .unwrap();
        masses[nearest] += p * vol;
    }
    if masses[1] <= 0.0 {
        return Err(Error::Numeric("second basin carries no mass".into()));
    }
    Ok(masses[0] / masses[1])
}

/// A least-squares fit of `ln v = intercept - rate * t`.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    /// Decay rate (positive means the values shrink).
    pub rate: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-linear fit.
    pub residual: f64,
}

/// Fit an exponential decay rate to positive samples.
pub fn fit_decay_rate(times: &[f64], values: &[f64]) -> Result<RateFit> {
    if times.len() != values.len() {
        return Err(Error::Argument("times and values must have equal length".into()));
    }
    if times.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "rate fit needs >= 3 samples, got {}",
            times.len()
        )));
    }
    if values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Argument("rate fit needs strictly positive finite values".into()));
    }
    let n = times.len() as f64;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let tm = times.iter().sum::<f64>() / n;
    let lm = logs.iter().sum::<f64>() / n;
    let stt: f64 = times.iter().map(|t| (t - tm).powi(2)).sum();
    if stt == 0.0 {
        return Err(Error::Argument("rate fit needs distinct times".into()));
    }
    let stl: f64 = times.iter().zip(&logs).map(|(t, l)| (t - tm) * (l - lm)).sum();
    let slope = stl / stt;
    let intercept = lm - slope * tm;
    let residual = (times
        .iter()
        .zip(&logs)
        .map(|(t, l)| (l - (intercept + slope * t)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit { rate: -slope, intercept, residual })
}

/// Poincare constant (spectral gap) of the Gibbs measure `exp(-L)` on a 1-d
/// grid: the second eigenvalue of the weighted Neumann Laplacian
/// `-(1/mu) d/dw (mu d/dw)` with geometric-mean face weights.
pub fn poincare_constant(landscape: &Landscape, grid: &Grid) -> Result<f64> {
    if grid.dim() != 1 || landscape.dim != 1 {
        return Err(Error::Argument("the Poincare solver covers 1-d landscapes".into()));
    }
    let n = grid.axes[0].n;
    let h = grid.axes[0].h();
    let centers = grid.axes[0].centers();
    let lmin = centers
        .iter()
        .map(|&w| landscape.value(&[w]))
        .fold(f64::INFINITY, f64::min);
    let mu: Vec<f64> = centers
        .iter()
        .map(|&w| (-(landscape.value(&[w]) - lmin)).exp())
        .collect();
    // Similarity-transformed symmetric matrix: B = S A S^{-1}, S = diag(sqrt mu).
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        let face = (mu[i] * mu[i + 1]).sqrt();
        b[(i, i)] += face / (h * h * mu[i]);
        b[(i + 1, i + 1)] += face / (h * h * mu[i + 1]);
        let off = -face / (h * h * (mu[i] * mu[i + 1]).sqrt());
        b[(i, i + 1)] = off;
        b[(i + 1, i)] = off;
    }
    let mut eigs: Vec<f64> = SymmetricEigen::new(b).eigenvalues.iter().cloned().collect();
    eigs.sort_by(|a, c| a.partial_cmp(c).unwrap());
    if eigs[0].abs() > 1e-6 * eigs[1].abs().max(1.0) {
        return Err(Error::Numeric(format!(
            "constant mode eigenvalue {} did not vanish",
            eigs[0]
        )));
    }
    Ok(eigs[1])
}

/// Outcome of comparing a measured decay against a closed-form bound.
#[derive(Debug, Clone, Copy)]
pub struct BoundCheck {
    pub fit: RateFit,
    pub bound_rate: f64,
    /// The constant multiplying the exponential in the bound.
    pub bound_prefactor: f64,
    /// True when every recorded value obeys the bound (up to `tol`).
    pub holds: bool,
    /// Smallest log-slack `ln(bound) - ln(value)` over the records.
    pub margin: f64,
}

fn check_envelope(
    times: &[f64],
    values: &[f64],
    v0: f64,
    prefactor: f64,
    rate: f64,
    tol: f64,
) -> (bool, f64) {
    let floor = v0 * 1e-13;
    let mut holds = true;
    let mut margin = f64::INFINITY;
    for (&t, &v) in times.iter().zip(values) {
        if v <= floor {
            continue;
        }
        let bound = prefactor * v0 * (-rate * t).exp();
        let slack = (bound * (1.0 + tol) / v).ln();
        margin = margin.min(slack);
        if slack < 0.0 {
            holds = false;
        }
    }
    (holds, margin)
}

/// Check the overdamped convergence bound: the distance to equilibrium in
/// `L2(1/p_inf)` must decay at least at rate `c_p`.
pub fn theorem1_bound_check(
    solution: &FpeSolution,
    p_inf: &DensityField,
    c_p: f64,
    tol: f64,
) -> Result<BoundCheck> {
    if !(c_p > 0.0 && c_p.is_finite()) {
        return Err(Error::Argument(format!("c_p must be positive, got {c_p}")));
    }
    let weight: Vec<f64> = p_inf.values.iter().map(|v| 1.0 / v.max(1e-290)).collect();
    let distances: Vec<f64> = solution
        .snapshots
        .iter()
        .map(|snap| crate::fpe::grid::weighted_l2_distance(snap, p_inf, &weight))
        .collect::<Result<_>>()?;
    let d0 = distances[0];
    if !(d0 > 0.0) {
        return Err(Error::Argument("initial condition already equals the target".into()));
    }
    // Fit over the samples that are clear of the rounding floor, after a
    // transient during which faster modes still contribute.
    let floor = d0 * 1e-10;
    let t_skip = 0.25 * solution.times.last().unwrap();
    let (ft, fv): (Vec<f64>, Vec<f64>) = solution
        .times
        .iter()
        .zip(&distances)
        .filter(|(&t, &d)| d > floor && t >= t_skip)
        .map(|(&t, &d)| (t, d))
        .unzip();
    let fit = fit_decay_rate(&ft, &fv)?;
    let (holds, margin) = check_envelope(&solution.times, &distances, d0, 1.0, c_p, tol);
    Ok(BoundCheck { fit, bound_rate: c_p, bound_prefactor: 1.0, holds, margin })
}

/// Burn-in threshold of a settling schedule.
#[derive(Debug, Clone, Copy)]
pub struct BurnIn {
    /// First time after which the temperature deviation stays inside the band.
    pub threshold: f64,
    /// Width of the tolerance band.
    pub band: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Compute the burn-in threshold: the first time the schedule's temperature
/// deviation envelope enters the band
/// `min(eta_inf / 3, c_p / (3 C1))`, where
/// `C1 = (M_w / 2) max(1, eta_inf) max(int p_inf^{1/3}, 1 + C2 / 2)` and
/// `C2 = sup_{|w| <= radius} |lap L - eta_inf |grad L|^2|`.
pub fn burn_in_threshold(
    schedule: &Schedule,
    landscape: &Landscape,
    c_p: f64,
    radius: f64,
) -> Result<BurnIn> {
    schedule.validate()?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Argument(format!("radius must be positive, got {radius}")));
    }
    let eta_inf = schedule.eta_inf().ok_or_else(|| {
        Error::NoFiniteThreshold("schedule has no limiting temperature".into())
    })?;
    // Regularity witness from the assumption report.
    let radii: Vec<f64> = (1..=8).map(|i| radius * i as f64 / 8.0).collect();
    let report = check_assumptions(landscape, &radii, 32)?;
    let m_w = report.m_w.max(1e-300);

    // C2 and the Gibbs fractional-moment integral, both on [-radius, radius].
    let n = 600usize;
    let h = 2.0 * radius / n as f64;
    let mut c2: f64 = 0.0;
    let mut z = 0.0;
    let mut points = Vec::new();
    match landscape.dim {
        1 => {
            for i in 0..n {
                points.push(vec![-radius + (i as f64 + 0.5) * h]);
            }
        }
        2 => {
            let m = 120usize;
            let hh = 2.0 * radius / m as f64;
            for i in 0..m {
                for j in 0..m {
                    points.push(vec![
                        -radius + (i as f64 + 0.5) * hh,
                        -radius + (j as f64 + 0.5) * hh,
                    ]);
                }
            }
        }
        _ => unreachable!(),
    }
    let vol = if landscape.dim == 1 {
        h
    } else {
        (2.0 * radius / 120.0).powi(2)
    };
    let lmin = points
        .iter()
        .map(|p| landscape.value(p))
        .fold(f64::INFINITY, f64::min);
    for p in &points {
        let g = landscape.gradient(p);
        let g2: f64 = g.iter().map(|x| x * x).sum();
        c2 = c2.max((landscape.laplacian(p) - eta_inf * g2).abs());
        z += (-eta_inf * (landscape.value(p) - lmin)).exp() * vol;
    }
    let frac_moment: f64 = points
        .iter()
        .map(|p| ((-eta_inf * (landscape.value(p) - lmin)).exp() / z).powf(1.0 / 3.0) * vol)
        .sum();
    let c1 = (m_w / 2.0) * eta_inf.max(1.0) * frac_moment.max(1.0 + c2 / 2.0);
    let band = (eta_inf / 3.0).min(c_p / (3.0 * c1));

    let envelope = |t: f64| -> Option<f64> { schedule.deviation_envelope(t) };
    let e0 = envelope(0.0)
        .ok_or_else(|| Error::NoFiniteThreshold("schedule deviation never settles".into()))?;
    if e0 <= band {
        return Ok(BurnIn { threshold: 0.0, band, c1, c2 });
    }
    // The envelope is monotone non-increasing: bracket by doubling, then bisect.
    let mut hi = 1.0;
    let mut tries = 0;
    while envelope(hi).map_or(true, |e| e > band) {
        hi *= 2.0;
        tries += 1;
        if tries > 200 {
            return Err(Error::NoFiniteThreshold(format!(
                "deviation envelope never enters the band {band:e}"
            )));
        }
    }
    let mut lo = hi / 2.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if envelope(mid).map_or(false, |e| e <= band) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BurnIn { threshold: hi, band, c1, c2 })
}

/// Rate constants of the hypocoercive convergence bound for the momentum
/// dynamics.
#[derive(Debug, Clone, Copy)]
pub struct MsgdConstants {
    /// Which branch of the case split applied (1 or 2).
    pub case: u8,
    pub mu: f64,
    pub c_upper: f64,
    pub c_hat: f64,
    pub lambda_min: f64,
    pub mu_hat: f64,
    /// Decay rate of the squared hypocoercive functional: `2 (mu - mu_hat)`.
    pub rate: f64,
    /// Constant in front of the exponential envelope.
    pub prefactor: f64,
}

/// Evaluate the hypocoercive rate constants from the friction ratio
/// `(1 - xi) / sqrt(gamma)` and the convexity-split witnesses `c_l`, `b`.
#[allow(clippy::too_many_arguments)]
pub fn msgd_rate_constants(
    gamma: f64,
    xi: f64,
    batch: f64,
    beta: f64,
    c_l: f64,
    b: f64,
    c_p: f64,
    dim: usize,
) -> Result<MsgdConstants> {
    if !(gamma > 0.0 && batch > 0.0 && beta > 0.0 && c_p > 0.0) {
        return Err(Error::Argument(
            "gamma, batch, beta, c_p must all be positive".into(),
        ));
    }
    if !(0.0..1.0).contains(&xi) {
        return Err(Error::Argument(format!("need 0 <= xi < 1, got {xi}")));
    }
    if !(c_l >= 0.0 && b >= 0.0) {
        return Err(Error::Argument("c_l and b must be nonnegative".into()));
    }
    let ratio = (1.0 - xi) / gamma.sqrt();
    let (case, mu, c_upper, c_hat) = if ratio < 2.0 * c_l {
        (1u8, ratio, c_l * c_l, ratio / 2.0)
    } else {
        (
            2u8,
            ratio - (ratio * ratio - 4.0 * c_l * c_l).sqrt(),
            ratio * ratio / 2.0 - c_l * c_l,
            ratio / 2.0,
        )
    };
    // Smallest eigenvalue of [[1, c_hat], [c_hat, c_upper]].
    let tr = 1.0 + c_upper;
    let disc = ((1.0 - c_upper).powi(2) + 4.0 * c_hat * c_hat).sqrt();
    let lambda_min = 0.5 * (tr - disc);
    if !(lambda_min > 0.0) {
        return Err(Error::Hypothesis(format!(
            "auxiliary metric is not positive definite (lambda_min = {lambda_min})"
        )));
    }
    let mu_hat = (1.0 + 2.0f64.sqrt()) * b / (2.0 * lambda_min);
    if mu <= mu_hat {
        return Err(Error::Hypothesis(format!(
            "perturbation dominates the contraction: mu = {mu} <= mu_hat = {mu_hat}"
        )));
    }
    let prefactor =
        gamma * beta / (2.0 * batch * c_p.min(dim as f64) * (1.0 - xi) * lambda_min);
    Ok(MsgdConstants {
        case,
        mu,
        c_upper,
        c_hat,
        lambda_min,
        mu_hat,
        rate: 2.0 * (mu - mu_hat),
        prefactor,
    })
}

/// Squared weighted distance to kinetic equilibrium:
/// `int (psi / psi_inf - 1)^2 psi_inf`.
pub fn hypocoercive_functional(
    psi: &PhaseDensityField,
    psi_inf: &PhaseDensityField,
) -> Result<f64> {
    if psi.w_axis != psi_inf.w_axis || psi.v_axis != psi_inf.v_axis {
        return Err(Error::Argument("phase grids do not match".into()));
    }
    let vol = psi.cell_volume();
    Ok(psi
        .values
        .iter()
        .zip(&psi_inf.values)
        .map(|(&p, &q)| {
            let q = q.max(1e-290);
            (p / q - 1.0).powi(2) * q * vol
        })
        .sum())
}

/// Check the hypocoercive convergence bound on a kinetic solve: the
/// functional must stay below `prefactor * H(0) * exp(-rate t)`.
pub fn theorem3_bound_check(
    solution: &VfpSolution,
    psi_inf: &PhaseDensityField,
    constants: &MsgdConstants,
    tol: f64,
) -> Result<BoundCheck> {
    let values: Vec<f64> = solution
        .snapshots
        .iter()
        .map(|s| hypocoercive_functional(s, psi_inf))
        .collect::<Result<_>>()?;
    let h0 = values[0];
    if !(h0 > 0.0) {
        return Err(Error::Argument("initial condition already equals the target".into()));
    }
    let floor = h0 * 1e-10;
    // Skip an initial transient before fitting the asymptotic rate.
    let t_skip = 0.2 * solution.times.last().unwrap();
    let (ft, fv): (Vec<f64>, Vec<f64>) = solution
        .times
        .iter()
        .zip(&values)
        .filter(|(&t, &v)| v > floor && t >= t_skip)
        .map(|(&t, &v)| (t, v))
        .unzip();
    let fit = fit_decay_rate(&ft, &fv)?;
    let (holds, margin) = check_envelope(
        &solution.times,
        &values,
        h0,
        constants.prefactor.max(1.0),
        constants.rate,
        tol,
    );
    Ok(BoundCheck {
        fit,
        bound_rate: constants.rate,
        bound_prefactor: constants.prefactor.max(1.0),
        holds,
        margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpe::grid::stationary_density;
    use crate::fpe::solve_fpe;
    use crate::fpe::vlasov::{solve_vfp, stationary_phase_density};
    use crate::fpe::Axis;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::collections::BTreeMap;

    fn quadratic() -> Landscape {
        Landscape::builtin("quadratic", &BTreeMap::new()).unwrap()
    }

    /// `eta eps^2 = 1` puts one Gaussian standard deviation inside the ball:
    /// probability erf(1/sqrt 2) = 0.682689.
    #[test]
    fn trapping_quadrature_matches_gaussian_mass() {
        let l = quadratic();
        let grid = Grid::line(-8.0, 8.0, 1600).unwrap();
        let res = trapping_probability(&l, 0, 1.0, 1.0, &grid).unwrap();
        assert_abs_diff_eq!(res.quadrature, 0.6826895, epsilon = 5e-4);
        let grid = Grid::line(-4.0, 4.0, 1600).unwrap();
        let res = trapping_probability(&l, 0, 4.0, 0.5, &grid).unwrap();
        assert_abs_diff_eq!(res.quadrature, 0.6826895, epsilon = 5e-4);
        assert!(res.formula_factor.is_finite() && res.formula_factor > 0.0);
        assert_relative_eq!(res.ratio, res.quadrature / res.formula_factor);
    }

    #[test]
    fn occupation_ratio_follows_determinant_law() {
        let l = Landscape::two_well_2d(1.0, 4.0, 10.0).unwrap();
        let grid = Grid::square(-2.5, 2.5, 300).unwrap();
        let ratio = well_probability_ratio(&l, 8.0, &grid).unwrap();
        let law = (l.minima[1].hessian_det / l.minima[0].hessian_det).sqrt();
        assert_relative_eq!(law, 2.0, max_relative = 1e-7);
        assert_relative_eq!(ratio, law, max_relative = 0.02);
        // Symmetric wells split the mass evenly.
        let sym = Landscape::two_well_2d(2.0, 2.0, 10.0).unwrap();
        let r = well_probability_ratio(&sym, 8.0, &grid).unwrap();
        assert_relative_eq!(r, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn rate_fit_recovers_synthetic_decay() {
        let times: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        let values: Vec<f64> = times.iter().map(|t| 3.0 * (-1.7 * t).exp()).collect();
        let fit = fit_decay_rate(&times, &values).unwrap();
        assert_relative_eq!(fit.rate, 1.7, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, 3.0f64.ln(), max_relative = 1e-12);
        assert!(fit.residual < 1e-12);
        // Validation.
        assert!(fit_decay_rate(&times[..2], &values[..2]).is_err());
        assert!(fit_decay_rate(&[0.0, 1.0, 2.0], &[1.0, -1.0, 1.0]).is_err());
        assert!(fit_decay_rate(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).is_err());
    }

    /// The Gibbs spectral gap of `a w^2 / 2` is exactly `a`.
    #[test]
    fn poincare_constant_of_single_wells() {
        for a in [1.0, 2.0] {
            let mut params = BTreeMap::new();
            params.insert("a".to_string(), a);
            let l = Landscape::builtin("quadratic", &params).unwrap();
            let half = 8.0 / a.sqrt();
            let grid = Grid::line(-half, half, 400).unwrap();
            let cp = poincare_constant(&l, &grid).unwrap();
            assert_relative_eq!(cp, a, max_relative = 2e-3);
        }
    }

    /// Raising the barrier shrinks the spectral gap exponentially once the
    /// barrier dominates the curvature prefactor.
    #[test]
    fn poincare_constant_decays_with_barrier() {
        let grid = Grid::line(-2.0, 2.0, 400).unwrap();
        let g1 = poincare_constant(&Landscape::scaled_double_well(10.0), &grid).unwrap();
        let g2 = poincare_constant(&Landscape::scaled_double_well(40.0), &grid).unwrap();
        assert!(g1 > 0.0 && g2 > 0.0);
        assert!(g2 < 0.1 * g1, "gap did not shrink: {g1} -> {g2}");
    }

    /// Overdamped bound on the single well: the measured decay rate equals
    /// the Poincare constant 1, independent of the temperature.
    #[test]
    fn theorem1_bound_on_single_well() {
        let l = quadratic();
        let s = Schedule::constant(0.1, 10.0, 50.0); // eta = 4
        let grid = Grid::line(-5.0, 5.0, 250).unwrap();
        let p_inf = stationary_density(&l, &grid, 4.0).unwrap();
        let values: Vec<f64> = grid.axes[0]
            .centers()
            .iter()
            .map(|&w| (-2.0 * (w - 0.3) * (w - 0.3)).exp())
            .collect();
        let mut p0 = DensityField::new(grid.clone(), values).unwrap();
        p0.normalize().unwrap();
        let sol = solve_fpe(&l, &s, &p0, 1e-4, 5.0, 2000).unwrap();
        let check = theorem1_bound_check(&sol, &p_inf, 1.0, 1e-6).unwrap();
        assert!(check.holds, "margin {}", check.margin);
        assert_relative_eq!(check.fit.rate, 1.0, max_relative = 0.02);
    }

    #[test]
    fn burn_in_threshold_of_settling_schedule() {
        let l = quadratic();
        let s = Schedule::ExpApproach {
            gamma: 0.1,
            batch: 10.0,
            beta: 50.0,
            amplitude: 1.0,
            rate: 0.5,
        };
        let b = burn_in_threshold(&s, &l, 1.0, 6.0).unwrap();
        assert!(b.threshold > 0.0 && b.threshold.is_finite());
        let env = s.deviation_envelope(b.threshold).unwrap();
        assert!(env <= b.band * (1.0 + 1e-9));
        let before = s.deviation_envelope(0.99 * b.threshold).unwrap();
        assert!(before > b.band);
        // Constant schedules burn in immediately.
        let c = burn_in_threshold(&Schedule::constant(0.1, 10.0, 50.0), &l, 1.0, 6.0).unwrap();
        assert_eq!(c.threshold, 0.0);
        // Step decay never settles.
        let sd = Schedule::StepDecay {
            gamma0: 0.1,
            factor: 0.5,
            period: 1.0,
            batch: 10.0,
            beta: 50.0,
        };
        assert!(matches!(
            burn_in_threshold(&sd, &l, 1.0, 6.0),
            Err(Error::NoFiniteThreshold(_))
        ));
    }

    /// Hand-worked case-split values.
    #[test]
    fn rate_constants_worked_cases() {
        // Case 1: ratio = 1 < 2 C_L with C_L = 1.
        let c = msgd_rate_constants(1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1).unwrap();
        assert_eq!(c.case, 1);
        assert_abs_diff_eq!(c.mu, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.c_upper, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.c_hat, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(c.lambda_min, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(c.mu_hat, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.rate, 2.0, epsilon = 1e-9);
        // Case 2: ratio = 3 >= 2 C_L with C_L = 1.
        let c = msgd_rate_constants(1.0 / 9.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1).unwrap();
        assert_eq!(c.case, 2);
        assert_abs_diff_eq!(c.mu, 3.0 - 5.0f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(c.c_upper, 3.5, epsilon = 1e-9);
        assert_abs_diff_eq!(c.c_hat, 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(c.lambda_min, (4.5 - 15.25f64.sqrt()) / 2.0, epsilon = 1e-9);
        // A large perturbation bound violates the hypothesis.
        assert!(matches!(
            msgd_rate_constants(1.0, 0.0, 1.0, 1.0, 1.0, 10.0, 1.0, 1),
            Err(Error::Hypothesis(_))
        ));
    }

    /// Kinetic decay on the single well with even initial data: the squared
    /// functional decays at the predicted rate 2 mu = 2.
    #[test]
    fn theorem3_bound_on_single_well() {
        let l = quadratic();
        // gamma = 0.01, xi = 0.9: friction ratio 1, eta' = 1.
        let s = Schedule::constant(0.01, 5.0, 100.0);
        let xi = 0.9;
        let wa = Axis::new(-6.5, 6.5, 96).unwrap();
        let va = Axis::new(-6.5, 6.5, 96).unwrap();
        let psi_inf = stationary_phase_density(&l, &wa, &va, 1.0).unwrap();
        // Even-in-(w, v) perturbation of equilibrium.
        let mut values = psi_inf.values.clone();
        for i in 0..wa.n {
            let w = wa.center(i);
            for j in 0..va.n {
                let v = va.center(j);
                values[i * va.n + j] *= 1.0 + 0.3 * (-(w * w) - v * v).exp();
            }
        }
        let mut psi0 = PhaseDensityField::new(wa.clone(), va.clone(), values).unwrap();
        psi0.normalize().unwrap();
        let sol = solve_vfp(&l, &s, xi, &psi0, 0.004, 5.0, 125).unwrap();
        let consts = msgd_rate_constants(0.01, xi, 5.0, 100.0, 1.0, 0.0, 1.0, 1).unwrap();
        assert_abs_diff_eq!(consts.rate, 2.0, epsilon = 1e-12);
        // The upwind transport's first-order dissipation perturbs the rate at
        // the 1e-2 level on this grid, hence the slightly loose tolerance.
        let check = theorem3_bound_check(&sol, &psi_inf, &consts, 0.1).unwrap();
        assert!(check.holds, "margin {}", check.margin);
        assert!(
            check.fit.rate > 0.85 * consts.rate,
            "fitted {} vs bound {}",
            check.fit.rate,
            consts.rate
        );
    }

    #[test]
    fn hypocoercive_functional_basics() {
        let l = quadratic();
        let wa = Axis::new(-6.5, 6.5, 32).unwrap();
        let va = Axis::new(-6.5, 6.5, 32).unwrap();
        let psi_inf = stationary_phase_density(&l, &wa, &va, 1.0).unwrap();
        assert_abs_diff_eq!(
            hypocoercive_functional(&psi_inf, &psi_inf).unwrap(),
            0.0,
            epsilon = 1e-300
        );
    }
}
