//! Empirical mini-batch experiments: gradient-noise moments and the
//! batch-size / sharpness relationship on small synthetic models.
//!
//! Mini-batches are drawn with replacement, so the rescaled noise
//! `eps = sqrt(M) (ghat - g)` has mean zero and covariance equal to the
//! per-sample gradient covariance, independent of the batch size `M`. The
//! training loop is the plain discrete optimizer from [`crate::sde`] applied
//! to data losses, with the full-data Hessian tracked along the way.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{path_rng, PathRng};

/// A fixed design matrix with one scalar label per row.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Row-major `n x dim` features.
    pub features: Vec<f64>,
    pub labels: Vec<f64>,
    pub n: usize,
    pub dim: usize,
}

impl Dataset {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }
}

/// Per-sample loss family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossFamily {
    /// `(w . x - y)^2 / 2`.
    Squared,
    /// `ln(1 + exp(-y w . x)) + lambda |w|^2 / 2` with labels in {-1, +1}.
    RegularizedCrossEntropy { lambda: f64 },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LossFamily {
    pub fn sample_loss(&self, x: &[f64], y: f64, w: &[f64]) -> f64 {
        match *self {
            LossFamily::Squared => {
                let r = dot(w, x) - y;
                0.5 * r * r
            }
            LossFamily::RegularizedCrossEntropy { lambda } => {
                let z = y * dot(w, x);
                // ln(1 + e^{-z}) computed stably.
                let nll = if z > 0.0 { (-z).exp().ln_1p() } else { -z + z.exp().ln_1p() };
                nll + 0.5 * lambda * dot(w, w)
            }
        }
    }

    /// Add the per-sample gradient to `out`.
    pub fn sample_grad_add(&self, x: &[f64], y: f64, w: &[f64], out: &mut [f64]) {
        match *self {
            LossFamily::Squared => {
                let r = dot(w, x) - y;
                for (o, xi) in out.iter_mut().zip(x) {
                    *o += r * xi;
                }
            }
            LossFamily::RegularizedCrossEntropy { lambda } => {
                let z = y * dot(w, x);
                let s = sigmoid(-z);
                for ((o, xi), wi) in out.iter_mut().zip(x).zip(w) {
                    *o += -y * s * xi + lambda * wi;
                }
            }
        }
    }

    /// Add `scale` times the per-sample Hessian to `out`.
    pub fn sample_hessian_add(&self, x: &[f64], y: f64, w: &[f64], scale: f64, out: &mut DMatrix<f64>) {
        let d = x.len();
        match *self {
            LossFamily::Squared => {
                for i in 0..d {
                    for j in 0..d {
                        out[(i, j)] += scale * x[i] * x[j];
                    }
                }
            }
            LossFamily::RegularizedCrossEntropy { lambda } => {
                let z = y * dot(w, x);
                let s = sigmoid(z) * sigmoid(-z);
                for i in 0..d {
                    for j in 0..d {
                        out[(i, j)] += scale * s * x[i] * x[j];
                    }
                }
                for i in 0..d {
                    out[(i, i)] += scale * lambda;
                }
            }
        }
    }
}

/// Full-data loss.
pub fn full_loss(ds: &Dataset, loss: &LossFamily, w: &[f64]) -> f64 {
    (0..ds.n).map(|i| loss.sample_loss(ds.row(i), ds.labels[i], w)).sum::<f64>() / ds.n as f64
}

/// Full-data gradient.
pub fn full_gradient(ds: &Dataset, loss: &LossFamily, w: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; ds.dim];
    let mut per = vec![0.0; ds.dim];
    for i in 0..ds.n {
        per.iter_mut().for_each(|x| *x = 0.0);
        loss.sample_grad_add(ds.row(i), ds.labels[i], w, &mut per);
        for (gi, pi) in g.iter_mut().zip(&per) {
            *gi += pi / ds.n as f64;
        }
    }
    g
}

/// Full-data Hessian.
pub fn full_hessian(ds: &Dataset, loss: &LossFamily, w: &[f64]) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(ds.dim, ds.dim);
    for i in 0..ds.n {
        loss.sample_hessian_add(ds.row(i), ds.labels[i], w, 1.0 / ds.n as f64, &mut h);
    }
    h
}

/// Linear-regression data: `x ~ N(0, I)`, `y = w* . x + noise_std * N(0, 1)`
/// with the planted weight `w* = (1, ..., 1) / sqrt(dim)`.
pub fn make_regression_dataset(n: usize, dim: usize, noise_std: f64, seed: u64) -> Result<Dataset> {
    if n < 2 || dim == 0 {
        return Err(Error::Argument(format!("dataset needs n >= 2, dim >= 1, got ({n}, {dim})")));
    }
    let mut rng = path_rng(seed, 0);
    let w_star = 1.0 / (dim as f64).sqrt();
    let mut features = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut y = 0.0;
        for _ in 0..dim {
            let x: f64 = rng.sample(StandardNormal);
            features.push(x);
            y += w_star * x;
        }
        let noise: f64 = rng.sample(StandardNormal);
        labels.push(y + noise_std * noise);
    }
    Ok(Dataset { features, labels, n, dim })
}

/// Binary classification data engineered for near-isotropic gradient noise:
/// class `y = +/-1` drawn evenly, `x ~ N(y * separation * e_1, I)`.
pub fn make_mixture_dataset(n: usize, dim: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if n < 2 || dim == 0 {
        return Err(Error::Argument(format!("dataset needs n >= 2, dim >= 1, got ({n}, {dim})")));
    }
    let mut rng = path_rng(seed, 1);
    let mut features = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for k in 0..n {
        let y = if k % 2 == 0 { 1.0 } else { -1.0 };
        for j in 0..dim {
            let x: f64 = rng.sample(StandardNormal);
            let shift = if j == 0 { y * separation } else { 0.0 };
            features.push(x + shift);
        }
        labels.push(y);
    }
    Ok(Dataset { features, labels, n, dim })
}

/// One with-replacement mini-batch gradient of size `m`.
pub fn minibatch_gradient(
    ds: &Dataset,
    loss: &LossFamily,
    w: &[f64],
    m: usize,
    rng: &mut PathRng,
) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::Argument("batch size must be >= 1".into()));
    }
    if w.len() != ds.dim {
        return Err(Error::Argument(format!(
            "weight length {} does not match feature dim {}",
            w.len(),
            ds.dim
        )));
    }
    let mut g = vec![0.0; ds.dim];
    for _ in 0..m {
        let i = rng.gen_range(0..ds.n);
        loss.sample_grad_add(ds.row(i), ds.labels[i], w, &mut g);
    }
    for gi in &mut g {
        *gi /= m as f64;
    }
    Ok(g)
}

/// Sampled moments of the rescaled mini-batch noise `sqrt(M) (ghat - g)`.
#[derive(Debug, Clone)]
pub struct NoiseMoments {
    pub mean: Vec<f64>,
    /// Standard error of each mean component.
    pub mean_std_err: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub n_draws: usize,
    pub batch_size: usize,
}

/// Estimate the noise moments at `w` from `n_draws` independent batches.
pub fn estimate_noise_moments(
    ds: &Dataset,
    loss: &LossFamily,
    w: &[f64],
    m: usize,
    n_draws: usize,
    master_seed: u64,
) -> Result<NoiseMoments> {
    if n_draws < 2 {
        return Err(Error::InsufficientData(format!(
            "noise moments need >= 2 draws, got {n_draws}"
        )));
    }
    let g = full_gradient(ds, loss, w);
    let d = ds.dim;
    let sqrt_m = (m as f64).sqrt();
    let mut draws: Vec<Vec<f64>> = Vec::with_capacity(n_draws);
    for k in 0..n_draws {
        let mut rng = path_rng(master_seed, k as u64);
        let ghat = minibatch_gradient(ds, loss, w, m, &mut rng)?;
        draws.push(ghat.iter().zip(&g).map(|(a, b)| sqrt_m * (a - b)).collect());
    }
    let nf = n_draws as f64;
    let mean: Vec<f64> = (0..d)
        .map(|j| draws.iter().map(|e| e[j]).sum::<f64>() / nf)
        .collect();
    let mut covariance = DMatrix::zeros(d, d);
    for e in &draws {
        for i in 0..d {
            for j in 0..d {
                covariance[(i, j)] += (e[i] - mean[i]) * (e[j] - mean[j]) / (nf - 1.0);
            }
        }
    }
    let mean_std_err: Vec<f64> = (0..d)
        .map(|j| {
            let var: f64 = covariance[(j, j)];
            (var / nf).sqrt()
        })
        .collect();
    Ok(NoiseMoments { mean, mean_std_err, covariance, n_draws, batch_size: m })
}

/// Exact covariance of the rescaled noise: the per-sample gradient
/// covariance `(1/n) sum_i (grad l_i - g)(grad l_i - g)^T`.
pub fn per_sample_gradient_covariance(ds: &Dataset, loss: &LossFamily, w: &[f64]) -> DMatrix<f64> {
    let g = full_gradient(ds, loss, w);
    let d = ds.dim;
    let mut cov = DMatrix::zeros(d, d);
    let mut per = vec![0.0; d];
    for i in 0..ds.n {
        per.iter_mut().for_each(|x| *x = 0.0);
        loss.sample_grad_add(ds.row(i), ds.labels[i], w, &mut per);
        for a in 0..d {
            for b in 0..d {
                cov[(a, b)] += (per[a] - g[a]) * (per[b] - g[b]) / ds.n as f64;
            }
        }
    }
    cov
}

/// Relative distance of a covariance from its isotropic part:
/// `|C - (tr C / d) I|_F / |C|_F`. Zero means perfectly isotropic noise.
pub fn isotropy_diagnostic(cov: &DMatrix<f64>) -> f64 {
    let d = cov.nrows();
    let trace = cov.trace() / d as f64;
    let mut iso = cov.clone();
    for i in 0..d {
        iso[(i, i)] -= trace;
    }
    iso.norm() / cov.norm().max(1e-300)
}

/// Training trace with the full-data Hessian sharpness recorded along the way.
#[derive(Debug, Clone)]
pub struct SharpnessTrace {
    pub steps: Vec<usize>,
    pub losses: Vec<f64>,
    pub sharpness_frobenius: Vec<f64>,
    pub sharpness_det: Vec<f64>,
    pub final_w: Vec<f64>,
}

/// Plain SGD on the data loss (`w+ = w - gamma ghat`) with sharpness
/// measured from the full-data Hessian every `record_stride` steps.
#[allow(clippy::too_many_arguments)]
pub fn train_with_sharpness(
    ds: &Dataset,
    loss: &LossFamily,
    w0: &[f64],
    gamma: f64,
    batch: usize,
    n_steps: usize,
    record_stride: usize,
    master_seed: u64,
) -> Result<SharpnessTrace> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Argument(format!("gamma must be positive, got {gamma}")));
    }
    if w0.len() != ds.dim {
        return Err(Error::Argument("initial weight dimension mismatch".into()));
    }
    let stride = record_stride.max(1);
    let mut w = w0.to_vec();
    let mut rng = path_rng(master_seed, 0);
    let mut trace = SharpnessTrace {
        steps: Vec::new(),
        losses: Vec::new(),
        sharpness_frobenius: Vec::new(),
        sharpness_det: Vec::new(),
        final_w: Vec::new(),
    };
    let record = |step: usize, w: &[f64], trace: &mut SharpnessTrace| {
        let h = full_hessian(ds, loss, w);
        let eigs = SymmetricEigen::new(h.clone()).eigenvalues;
        trace.steps.push(step);
        trace.losses.push(full_loss(ds, loss, w));
        trace.sharpness_frobenius.push(h.norm());
        trace.sharpness_det.push(eigs.iter().product());
    };
    record(0, &w, &mut trace);
    for step in 0..n_steps {
        let g = minibatch_gradient(ds, loss, &w, batch, &mut rng)?;
        for (wi, gi) in w.iter_mut().zip(&g) {
            *wi -= gamma * gi;
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence {
                step: step + 1,
                time: (step + 1) as f64 * gamma,
                detail: "training iterate became non-finite".into(),
            });
        }
        if (step + 1) % stride == 0 || step + 1 == n_steps {
            record(step + 1, &w, &mut trace);
        }
    }
    trace.final_w = w;
    Ok(trace)
}

/// Median of a non-empty slice (by value).
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InsufficientData("median of an empty slice".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = v.len() / 2;
    Ok(if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::DVector;

    fn fd_check(ds: &Dataset, loss: &LossFamily, w: &[f64]) {
        let g = full_gradient(ds, loss, w);
        for i in 0..ds.dim {
            let mut wp = w.to_vec();
            let mut wm = w.to_vec();
            wp[i] += 1e-6;
            wm[i] -= 1e-6;
            let fd = (full_loss(ds, loss, &wp) - full_loss(ds, loss, &wm)) / 2e-6;
            assert_relative_eq!(g[i], fd, max_relative = 1e-5, epsilon = 1e-8);
        }
        let h = full_hessian(ds, loss, w);
        for i in 0..ds.dim {
            let mut wp = w.to_vec();
            let mut wm = w.to_vec();
            wp[i] += 1e-6;
            wm[i] -= 1e-6;
            let gp = full_gradient(ds, loss, &wp);
            let gm = full_gradient(ds, loss, &wm);
            for j in 0..ds.dim {
                let fd = (gp[j] - gm[j]) / 2e-6;
                assert_relative_eq!(h[(j, i)], fd, max_relative = 1e-4, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn losses_match_finite_differences() {
        let ds = make_regression_dataset(40, 3, 0.3, 7).unwrap();
        fd_check(&ds, &LossFamily::Squared, &[0.2, -0.4, 0.7]);
        let ds = make_mixture_dataset(40, 3, 1.5, 7).unwrap();
        fd_check(
            &ds,
            &LossFamily::RegularizedCrossEntropy { lambda: 0.05 },
            &[0.3, -0.2, 0.1],
        );
    }

    #[test]
    fn minibatch_gradient_is_unbiased() {
        let ds = make_regression_dataset(60, 2, 0.5, 3).unwrap();
        let loss = LossFamily::Squared;
        let w = [0.4, -0.1];
        let g = full_gradient(&ds, &loss, &w);
        let n_draws = 20000;
        let mut acc = vec![0.0; 2];
        for k in 0..n_draws {
            let mut rng = path_rng(11, k);
            let ghat = minibatch_gradient(&ds, &loss, &w, 8, &mut rng).unwrap();
            for (a, gi) in acc.iter_mut().zip(&ghat) {
                *a += gi / n_draws as f64;
            }
        }
        for (a, gi) in acc.iter().zip(&g) {
            assert_abs_diff_eq!(a, gi, epsilon = 0.02);
        }
    }

    /// The rescaled noise has mean ~0 and covariance equal to the per-sample
    /// gradient covariance, independent of the batch size.
    #[test]
    fn noise_moments_match_oracle_and_are_batch_free() {
        let ds = make_mixture_dataset(200, 2, 1.0, 21).unwrap();
        let loss = LossFamily::RegularizedCrossEntropy { lambda: 0.01 };
        let w = [0.2, -0.3];
        let oracle = per_sample_gradient_covariance(&ds, &loss, &w);
        for m in [4usize, 8] {
            let mom = estimate_noise_moments(&ds, &loss, &w, m, 20000, 5).unwrap();
            for (mu, se) in mom.mean.iter().zip(&mom.mean_std_err) {
                assert!(mu.abs() < 4.0 * se, "mean {mu} vs SE {se}");
            }
            let diff = (&mom.covariance - &oracle).norm() / oracle.norm();
            assert!(diff < 0.1, "covariance Frobenius error {diff} at batch {m}");
        }
    }

    #[test]
    fn noise_moments_are_seed_deterministic() {
        let ds = make_regression_dataset(50, 2, 0.2, 2).unwrap();
        let loss = LossFamily::Squared;
        let a = estimate_noise_moments(&ds, &loss, &[0.1, 0.1], 4, 100, 9).unwrap();
        let b = estimate_noise_moments(&ds, &loss, &[0.1, 0.1], 4, 100, 9).unwrap();
        assert_eq!(a.covariance, b.covariance);
        let c = estimate_noise_moments(&ds, &loss, &[0.1, 0.1], 4, 100, 10).unwrap();
        assert_ne!(a.covariance, c.covariance);
    }

    #[test]
    fn mixture_noise_is_nearly_isotropic() {
        let ds = make_mixture_dataset(4000, 2, 1.0, 33).unwrap();
        let loss = LossFamily::RegularizedCrossEntropy { lambda: 0.01 };
        let cov = per_sample_gradient_covariance(&ds, &loss, &[0.0, 0.0]);
        let iso = isotropy_diagnostic(&cov);
        assert!(iso < 0.1, "isotropy diagnostic {iso}");
        // A strongly anisotropic covariance scores high.
        let aniso = DMatrix::from_diagonal(&DVector::from_vec(vec![10.0, 0.1]));
        assert!(isotropy_diagnostic(&aniso) > 0.5);
    }

    #[test]
    fn training_reduces_loss_and_records_sharpness() {
        let ds = make_mixture_dataset(300, 2, 1.5, 13).unwrap();
        let loss = LossFamily::RegularizedCrossEntropy { lambda: 0.05 };
        let trace =
            train_with_sharpness(&ds, &loss, &[0.0, 0.0], 0.1, 16, 400, 50, 1).unwrap();
        assert!(trace.losses.last().unwrap() < &trace.losses[0]);
        assert_eq!(trace.steps.len(), trace.sharpness_frobenius.len());
        assert!(trace.sharpness_frobenius.iter().all(|s| s.is_finite() && *s > 0.0));
        assert!(trace.sharpness_det.iter().all(|s| *s > 0.0));
    }

    #[test]
    fn median_helper() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]).unwrap(), 2.5);
        assert!(median(&[]).is_err());
    }
}
