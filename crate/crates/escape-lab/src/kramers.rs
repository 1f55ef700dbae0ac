//! Escape times: the curvature-corrected barrier-crossing formula and a
//! direct Monte Carlo first-passage oracle.
//!
//! For a minimum `w*` separated from the rest of the landscape by a saddle
//! `s` with barrier `H = L(s) - L(w*)` and unique negative saddle curvature
//! `-lambda*`, the expected escape time of the overdamped diffusion at
//! temperature `eta` is
//!
//! `E[tau] = (2 pi / lambda*) sqrt(|det hess L(s)| / det hess L(w*)) exp(eta H)`.
//!
//! In one dimension this reduces to `2 pi / sqrt(lambda* L''(w*)) exp(eta H)`.
//! The Monte Carlo oracle integrates the SDE from one minimum until the path
//! first enters a closed ball of radius `epsilon` around the other minimum.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::landscapes::Landscape;
use crate::schedule::Schedule;
use crate::sde::{run_ensemble, EnsembleStats};

/// Largest exponent passed to `exp` before switching to the overflow error.
const MAX_EXP_ARG: f64 = 700.0;

/// Closed-form expected escape time from `minima[min_index]` across
/// `saddles[saddle_index]` at temperature `eta`.
pub fn eyring_kramers_time(
    landscape: &Landscape,
    min_index: usize,
    saddle_index: usize,
    eta: f64,
) -> Result<f64> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Argument(format!("eta must be positive and finite, got {eta}")));
    }
    let minimum = landscape.minima.get(min_index).ok_or_else(|| {
        Error::Argument(format!(
            "landscape '{}' has {} minima, index {min_index} out of range",
            landscape.name,
            landscape.minima.len()
        ))
    })?;
    let saddle = landscape.saddles.get(saddle_index).ok_or_else(|| {
        Error::Argument(format!(
            "landscape '{}' has {} saddles, index {saddle_index} out of range",
            landscape.name,
            landscape.saddles.len()
        ))
    })?;
    let barrier = *saddle.barriers.get(&min_index).ok_or_else(|| {
        Error::Hypothesis(format!(
            "saddle {saddle_index} is not adjacent to minimum {min_index}"
        ))
    })?;
    if !(saddle.lambda_star > 0.0) || !(minimum.hessian_det > 0.0) || !(barrier > 0.0) {
        return Err(Error::Hypothesis(format!(
            "barrier-crossing formula needs lambda* > 0, det > 0, barrier > 0; got \
             lambda* = {}, det = {}, barrier = {barrier}",
            saddle.lambda_star, minimum.hessian_det
        )));
    }
    let prefactor = (2.0 * std::f64::consts::PI / saddle.lambda_star)
        * (saddle.hessian_det_abs / minimum.hessian_det).sqrt();
    let exp_arg = eta * barrier;
    if exp_arg > MAX_EXP_ARG {
        return Err(Error::Overflow {
            exp_arg,
            log_value: prefactor.ln() + exp_arg,
        });
    }
    Ok(prefactor * exp_arg.exp())
}

/// Monte Carlo first-passage statistics.
#[derive(Debug, Clone, Copy)]
pub struct EscapeStats {
    pub n_paths: usize,
    /// Mean escape time over uncensored paths; a lower bound when censored.
    pub mean: f64,
    pub std_err: f64,
    pub median: f64,
    /// Paths that had not escaped by `t_cap`.
    pub n_censored: usize,
    pub t_cap: f64,
}

impl EscapeStats {
    /// More than 10% of paths censored: the mean is badly biased downward.
    pub fn inconclusive(&self) -> bool {
        10 * self.n_censored > self.n_paths
    }
}

/// Simulate `n_paths` transitions from `minima[from_index]`, declaring escape
/// when the path first enters the closed ball of radius `epsilon` around
/// `minima[to_index]`. Paths still outside at `t_cap` are censored.
#[allow(clippy::too_many_arguments)]
pub fn mc_first_passage(
    landscape: &Landscape,
    schedule: &Schedule,
    from_index: usize,
    to_index: usize,
    epsilon: f64,
    dt: f64,
    t_cap: f64,
    n_paths: usize,
    master_seed: u64,
) -> Result<EscapeStats> {
    schedule.validate()?;
    if !(dt > 0.0 && t_cap > dt) {
        return Err(Error::Argument(format!(
            "need 0 < dt < t_cap, got dt = {dt}, t_cap = {t_cap}"
        )));
    }
    let from = landscape
        .minima
        .get(from_index)
        .ok_or_else(|| Error::Argument(format!("minimum index {from_index} out of range")))?;
    let to = landscape
        .minima
        .get(to_index)
        .ok_or_else(|| Error::Argument(format!("minimum index {to_index} out of range")))?;
    let separation: f64 = from
        .location
        .iter()
        .zip(&to.location)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if !(epsilon > 0.0 && epsilon < 0.5 * separation) {
        return Err(Error::Argument(format!(
            "epsilon must lie in (0, {}), half the inter-minima distance; got {epsilon}",
            0.5 * separation
        )));
    }

    // The target ball must dominate the diffusive step scale.
    let sigma2 = schedule.gamma(0.0) * schedule.beta() / schedule.batch(0.0);
    let dt_bound = epsilon * epsilon / (10.0 * sigma2);
    if dt > dt_bound {
        return Err(Error::StepSize {
            dt,
            bound: dt_bound,
            detail: format!(
                "target ball radius epsilon = {epsilon} requires dt <= eps^2 / (10 sigma^2)"
            ),
        });
    }
    let guard_radius = 5.0_f64.max(
        2.0 + from
            .location
            .iter()
            .chain(&to.location)
            .map(|x| x.abs())
            .fold(0.0, f64::max),
    );
    let curvature = landscape.curvature_bound(guard_radius);
    if dt * curvature >= 2.0 {
        return Err(Error::StepSize {
            dt,
            bound: 2.0 / curvature,
            detail: format!("curvature bound {curvature} on the escape region"),
        });
    }

    let dim = landscape.dim;
    let amp = sigma2.sqrt();
    let sqrt_dt = dt.sqrt();
    let eps2 = epsilon * epsilon;
    let n_steps = (t_cap / dt).ceil() as usize;
    let times: Vec<Option<f64>> = run_ensemble(n_paths, master_seed, |_, rng| {
        let mut w = from.location.clone();
        let mut g = vec![0.0; dim];
        for step in 0..n_steps {
            landscape.gradient_into(&w, &mut g);
            for i in 0..dim {
                let xi: f64 = rng.sample(StandardNormal);
                w[i] += -g[i] * dt + amp * sqrt_dt * xi;
            }
            let r2: f64 = w.iter().map(|x| x * x).sum();
            if !r2.is_finite() || r2 > guard_radius * guard_radius {
                return Err(Error::Divergence {
                    step: step + 1,
                    time: (step + 1) as f64 * dt,
                    detail: format!(
                        "escape path left the guard ball of radius {guard_radius}"
                    ),
                });
            }
            let d2: f64 = w
                .iter()
                .zip(&to.location)
                .map(|(wi, ti)| (wi - ti) * (wi - ti))
                .sum();
            if d2 <= eps2 {
                return Ok(Some((step + 1) as f64 * dt));
            }
        }
        Ok(None)
    })?;

    let mut escaped: Vec<f64> = times.iter().filter_map(|t| *t).collect();
    let n_censored = n_paths - escaped.len();
    if escaped.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "only {} of {n_paths} paths escaped before t_cap = {t_cap}",
            escaped.len()
        )));
    }
    let stats = EnsembleStats::from_values(&escaped)?;
    escaped.sort_by(|a, b| a.total_cmp(b));
    let mid = escaped.len() / 2;
    let median = if escaped.len() % 2 == 1 {
        escaped[mid]
    } else {
        0.5 * (escaped[mid - 1] + escaped[mid])
    };
    Ok(EscapeStats {
        n_paths,
        mean: stats.mean,
        std_err: stats.std_err,
        median,
        n_censored,
        t_cap,
    })
}

/// A numerically located saddle.
#[derive(Debug, Clone)]
pub struct SaddleInfo {
    pub location: Vec<f64>,
    pub value: f64,
    pub lambda_star: f64,
    pub hessian_det_abs: f64,
}

/// Find the lowest saddle between two minima by a string method (straight
/// initial path, equal-arclength reparametrization) followed by Newton
/// refinement of the highest image; the Hessian signature is verified.
pub fn find_min_saddle(landscape: &Landscape, a: &[f64], b: &[f64]) -> Result<SaddleInfo> {
    let dim = landscape.dim;
    if a.len() != dim || b.len() != dim {
        return Err(Error::Argument("endpoint dimension mismatch".into()));
    }
    let n_images = 33usize;
    let mut images: Vec<DVector<f64>> = (0..n_images)
        .map(|k| {
            let t = k as f64 / (n_images - 1) as f64;
            DVector::from_iterator(dim, a.iter().zip(b).map(|(x, y)| x + t * (y - x)))
        })
        .collect();
    let step = 0.05 / landscape.curvature_bound(5.0).max(1.0);
    for _ in 0..4000 {
        // Gradient descent on the interior images.
        for img in images.iter_mut().take(n_images - 1).skip(1) {
            let g = landscape.gradient(img.as_slice());
            for i in 0..dim {
                img[i] -= step * g[i];
            }
        }
        // Reparametrize to equal arclength.
        let mut arcs = vec![0.0f64; n_images];
        for k in 1..n_images {
            arcs[k] = arcs[k - 1] + (&images[k] - &images[k - 1]).norm();
        }
        let total = arcs[n_images - 1];
        if total == 0.0 {
            return Err(Error::SaddleSearch("string collapsed to a point".into()));
        }
        let old = images.clone();
        for k in 1..n_images - 1 {
            let target = total * k as f64 / (n_images - 1) as f64;
            let seg = arcs.partition_point(|&s| s < target).clamp(1, n_images - 1);
            let denom = (arcs[seg] - arcs[seg - 1]).max(1e-300);
            let frac = (target - arcs[seg - 1]) / denom;
            images[k] = &old[seg - 1] + (&old[seg] - &old[seg - 1]) * frac;
        }
    }
    // Highest-energy image seeds a Newton iteration on grad L = 0.
    let mut best = images[0].clone();
    let mut best_val = f64::NEG_INFINITY;
    for img in &images {
        let v = landscape.value(img.as_slice());
        if v > best_val {
            best_val = v;
            best = img.clone();
        }
    }
    let mut x = best;
    for _ in 0..100 {
        let g = DVector::from_vec(landscape.gradient(x.as_slice()));
        if g.norm() < 1e-13 {
            break;
        }
        let h = landscape.hessian(x.as_slice());
        let delta = h
            .lu()
            .solve(&g)
            .ok_or_else(|| Error::SaddleSearch("singular Hessian in Newton refinement".into()))?;
        x -= delta;
    }
    let g = DVector::from_vec(landscape.gradient(x.as_slice()));
    if g.norm() > 1e-8 {
        return Err(Error::SaddleSearch(format!(
            "Newton refinement stalled with gradient norm {}",
            g.norm()
        )));
    }
    let h: DMatrix<f64> = landscape.hessian(x.as_slice());
    let eigs = SymmetricEigen::new(h).eigenvalues;
    let neg: Vec<f64> = eigs.iter().cloned().filter(|&e| e < 0.0).collect();
    if neg.len() != 1 {
        return Err(Error::SaddleSearch(format!(
            "stationary point at {:?} has {} negative curvatures, expected 1",
            x.as_slice(),
            neg.len()
        )));
    }
    Ok(SaddleInfo {
        location: x.as_slice().to_vec(),
        value: landscape.value(x.as_slice()),
        lambda_star: neg[0].abs(),
        hessian_det_abs: eigs.iter().product::<f64>().abs(),
    })
}
