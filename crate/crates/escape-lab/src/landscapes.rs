//! Catalog of analytic risk functions with exact derivatives.
//!
//! Each landscape carries closed-form value, gradient, and Hessian together
//! with hard-coded metadata for its minima and saddles (stationarity is
//! asserted in tests; numeric rediscovery lives in [`crate::kramers::find_min_saddle`]
//! as an independent check). The catalog spans single wells, symmetric and
//! tilted double wells, and a 2-d two-well surface whose wells share the same
//! depth but have different Hessian determinants.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// A catalogued local minimizer.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub location: Vec<f64>,
    pub value: f64,
    pub hessian_det: f64,
    pub hessian_eigenvalues: Vec<f64>,
    pub hessian_frobenius: f64,
}

/// A catalogued saddle point with exactly one negative Hessian eigenvalue.
#[derive(Debug, Clone)]
pub struct Saddle {
    pub location: Vec<f64>,
    pub value: f64,
    /// Magnitude of the unique negative eigenvalue.
    pub lambda_star: f64,
    /// Absolute value of the Hessian determinant at the saddle.
    pub hessian_det_abs: f64,
    /// Barrier height to each adjacent minimum, keyed by minimum index.
    pub barriers: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone)]
enum Kind {
    Quadratic { a: f64 },
    Quadratic2d { a1: f64, a2: f64 },
    /// `scale * (w^2 - 1)^2 / 4`; the builtin uses `scale = 1`.
    DoubleWell1d { scale: f64 },
    TiltedDoubleWell1d { delta: f64 },
    TwoWell2d { c1: f64, c2: f64, k: f64 },
    /// `-|w|^2 / 2`, a deliberately non-confining control case.
    NegativeQuadratic,
}

/// An analytic risk function with exact derivatives and stationary-point metadata.
#[derive(Debug, Clone)]
pub struct Landscape {
    pub name: String,
    pub dim: usize,
    pub parameters: Vec<(String, f64)>,
    kind: Kind,
    pub minima: Vec<Minimum>,
    pub saddles: Vec<Saddle>,
    /// Convexity-split constant `C_L` used by the A.4 decomposition.
    pub convexity_split_constant: f64,
    /// Global bound on the split Hessian entries, when one exists.
    pub hessian_entry_bound: Option<f64>,
}

fn frobenius(eigs: &[f64]) -> f64 {
    eigs.iter().map(|e| e * e).sum::<f64>().sqrt()
}

fn minimum_from_eigs(location: Vec<f64>, value: f64, eigs: Vec<f64>) -> Minimum {
    Minimum {
        location,
        value,
        hessian_det: eigs.iter().product(),
        hessian_frobenius: frobenius(&eigs),
        hessian_eigenvalues: eigs,
    }
}

/// `c(x)` of the two-well surface and its first two derivatives.
fn two_well_c(c1: f64, c2: f64, k: f64, x: f64) -> (f64, f64, f64) {
    let t = (k * x).tanh();
    let sech2 = 1.0 - t * t;
    let mid = 0.5 * (c1 + c2);
    let amp = 0.5 * (c2 - c1);
    (
        mid + amp * t,
        amp * k * sech2,
        -2.0 * amp * k * k * t * sech2,
    )
}

impl Landscape {
    /// Construct a builtin landscape from the catalog.
    ///
    /// Known names: `quadratic(a)`, `double_well_1d`, `tilted_double_well_1d(delta)`,
    /// `two_well_2d(c1, c2, k)`, `quadratic_2d(a1, a2)`.
    pub fn builtin(name: &str, parameters: &BTreeMap<String, f64>) -> Result<Landscape> {
        let get = |key: &str, default: f64| -> f64 {
            parameters.get(key).copied().unwrap_or(default)
        };
        match name {
            "quadratic" => {
                let a = get("a", 1.0);
                if a <= 0.0 {
                    return Err(Error::Argument(format!(
                        "quadratic requires a > 0, got a = {a}"
                    )));
                }
                Ok(Landscape {
                    name: name.to_string(),
                    dim: 1,
                    parameters: vec![("a".into(), a)],
                    kind: Kind::Quadratic { a },
                    minima: vec![minimum_from_eigs(vec![0.0], 0.0, vec![a])],
                    saddles: vec![],
                    convexity_split_constant: a.sqrt(),
                    hessian_entry_bound: Some(0.0),
                })
            }
            "quadratic_2d" => {
                let a1 = get("a1", 1.0);
                let a2 = get("a2", 1.0);
                if a1 <= 0.0 || a2 <= 0.0 {
                    return Err(Error::Argument(format!(
                        "quadratic_2d requires a1, a2 > 0, got ({a1}, {a2})"
                    )));
                }
                let amin = a1.min(a2);
                Ok(Landscape {
                    name: name.to_string(),
                    dim: 2,
                    parameters: vec![("a1".into(), a1), ("a2".into(), a2)],
                    kind: Kind::Quadratic2d { a1, a2 },
                    minima: vec![minimum_from_eigs(vec![0.0, 0.0], 0.0, vec![a1, a2])],
                    saddles: vec![],
                    convexity_split_constant: amin.sqrt(),
                    hessian_entry_bound: Some((a1 - amin).max(a2 - amin)),
                })
            }
            "double_well_1d" => Ok(Self::scaled_double_well(1.0)),
            "tilted_double_well_1d" => {
                let delta = get("delta", 0.1);
                Self::tilted_double_well(delta)
            }
            "two_well_2d" => {
                let c1 = get("c1", 1.0);
                let c2 = get("c2", 4.0);
                let k = get("k", 10.0);
                Self::two_well_2d(c1, c2, k)
            }
            other => Err(Error::Catalog(format!(
                "unknown landscape '{other}'; available: quadratic, quadratic_2d, \
                 double_well_1d, tilted_double_well_1d, two_well_2d"
            ))),
        }
    }

    /// `scale * (w^2 - 1)^2 / 4`; `scale = 1` is the builtin `double_well_1d`.
    pub fn scaled_double_well(scale: f64) -> Landscape {
        assert!(scale > 0.0, "double-well scale must be positive");
        let mut barriers = BTreeMap::new();
        barriers.insert(0, 0.25 * scale);
        barriers.insert(1, 0.25 * scale);
        Landscape {
            name: if scale == 1.0 {
                "double_well_1d".to_string()
            } else {
                format!("double_well_1d(scale={scale})")
            },
            dim: 1,
            parameters: vec![("scale".into(), scale)],
            kind: Kind::DoubleWell1d { scale },
            minima: vec![
                minimum_from_eigs(vec![-1.0], 0.0, vec![2.0 * scale]),
                minimum_from_eigs(vec![1.0], 0.0, vec![2.0 * scale]),
            ],
            saddles: vec![Saddle {
                location: vec![0.0],
                value: 0.25 * scale,
                lambda_star: scale,
                hessian_det_abs: scale,
                barriers,
            }],
            convexity_split_constant: 0.0,
            hessian_entry_bound: None,
        }
    }

    /// Double well with a linear tilt breaking the depth symmetry.
    ///
    /// Requires `|delta| < 2 / (3 sqrt 3)` so two minima and a saddle exist;
    /// their locations are the closed-form roots of `w^3 - w + delta = 0`.
    pub fn tilted_double_well(delta: f64) -> Result<Landscape> {
        let delta_max = 2.0 / (3.0f64.sqrt() * 3.0);
        if !(delta.abs() < delta_max) {
            return Err(Error::Argument(format!(
                "tilted_double_well_1d requires |delta| < {delta_max:.6}, got {delta}"
            )));
        }
        // Trigonometric roots of the depressed cubic t^3 - t + delta = 0.
        let arg = (-1.5 * 3.0f64.sqrt() * delta).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let r = 2.0 / 3.0f64.sqrt();
        let mut roots: Vec<f64> = (0..3)
            .map(|k| r * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let value = |w: f64| (w * w - 1.0).powi(2) / 4.0 + delta * w;
        let curv = |w: f64| 3.0 * w * w - 1.0;
        let (lo, mid, hi) = (roots[0], roots[1], roots[2]);
        let minima = vec![
            minimum_from_eigs(vec![lo], value(lo), vec![curv(lo)]),
            minimum_from_eigs(vec![hi], value(hi), vec![curv(hi)]),
        ];
        let mut barriers = BTreeMap::new();
        barriers.insert(0, value(mid) - value(lo));
        barriers.insert(1, value(mid) - value(hi));
        let saddles = vec![Saddle {
            location: vec![mid],
            value: value(mid),
            lambda_star: -curv(mid),
            hessian_det_abs: curv(mid).abs(),
            barriers,
        }];
        Ok(Landscape {
            name: "tilted_double_well_1d".to_string(),
            dim: 1,
            parameters: vec![("delta".into(), delta)],
            kind: Kind::TiltedDoubleWell1d { delta },
            minima,
            saddles,
            convexity_split_constant: 0.0,
            hessian_entry_bound: None,
        })
    }

    /// `L(x, y) = (x^2 - 1)^2 / 4 + c(x) y^2 / 2` with a tanh curvature blend.
    ///
    /// Both wells sit at depth 0 while their Hessian determinants differ,
    /// which is exactly the configuration the determinant-ratio law needs.
    pub fn two_well_2d(c1: f64, c2: f64, k: f64) -> Result<Landscape> {
        if c1 <= 0.0 || c2 <= 0.0 {
            return Err(Error::Argument(format!(
                "two_well_2d requires c1, c2 > 0 for confinement, got ({c1}, {c2})"
            )));
        }
        if !k.is_finite() {
            return Err(Error::Argument("two_well_2d requires finite k".into()));
        }
        let c_at = |x: f64| two_well_c(c1, c2, k, x).0;
        let minima = vec![
            minimum_from_eigs(vec![-1.0, 0.0], 0.0, vec![2.0, c_at(-1.0)]),
            minimum_from_eigs(vec![1.0, 0.0], 0.0, vec![2.0, c_at(1.0)]),
        ];
        let mut barriers = BTreeMap::new();
        barriers.insert(0, 0.25);
        barriers.insert(1, 0.25);
        let saddles = vec![Saddle {
            location: vec![0.0, 0.0],
            value: 0.25,
            lambda_star: 1.0,
            hessian_det_abs: c_at(0.0),
            barriers,
        }];
        Ok(Landscape {
            name: "two_well_2d".to_string(),
            dim: 2,
            parameters: vec![("c1".into(), c1), ("c2".into(), c2), ("k".into(), k)],
            kind: Kind::TwoWell2d { c1, c2, k },
            minima,
            saddles,
            convexity_split_constant: 0.0,
            hessian_entry_bound: None,
        })
    }

    /// `-|w|^2 / 2`: violates confinement, used as a negative control.
    pub fn negative_quadratic(dim: usize) -> Landscape {
        Landscape {
            name: "negative_quadratic".to_string(),
            dim,
            parameters: vec![],
            kind: Kind::NegativeQuadratic,
            minima: vec![],
            saddles: vec![],
            convexity_split_constant: 0.0,
            hessian_entry_bound: None,
        }
    }

    /// Risk value `L(w)`; no validation, for hot loops.
    #[inline]
    pub fn value(&self, w: &[f64]) -> f64 {
        match &self.kind {
            Kind::Quadratic { a } => 0.5 * a * w[0] * w[0],
            Kind::Quadratic2d { a1, a2 } => 0.5 * (a1 * w[0] * w[0] + a2 * w[1] * w[1]),
            Kind::DoubleWell1d { scale } => {
                let s = w[0] * w[0] - 1.0;
                scale * s * s / 4.0
            }
            Kind::TiltedDoubleWell1d { delta } => {
                let s = w[0] * w[0] - 1.0;
                s * s / 4.0 + delta * w[0]
            }
            Kind::TwoWell2d { c1, c2, k } => {
                let s = w[0] * w[0] - 1.0;
                let (c, _, _) = two_well_c(*c1, *c2, *k, w[0]);
                s * s / 4.0 + 0.5 * c * w[1] * w[1]
            }
            Kind::NegativeQuadratic => -0.5 * w.iter().map(|x| x * x).sum::<f64>(),
        }
    }

    /// Gradient written into `g`; no validation, for hot loops.
    #[inline]
    pub fn gradient_into(&self, w: &[f64], g: &mut [f64]) {
        match &self.kind {
            Kind::Quadratic { a } => g[0] = a * w[0],
            Kind::Quadratic2d { a1, a2 } => {
                g[0] = a1 * w[0];
                g[1] = a2 * w[1];
            }
            Kind::DoubleWell1d { scale } => g[0] = scale * (w[0] * w[0] - 1.0) * w[0],
            Kind::TiltedDoubleWell1d { delta } => g[0] = (w[0] * w[0] - 1.0) * w[0] + delta,
            Kind::TwoWell2d { c1, c2, k } => {
                let (c, dc, _) = two_well_c(*c1, *c2, *k, w[0]);
                g[0] = (w[0] * w[0] - 1.0) * w[0] + 0.5 * dc * w[1] * w[1];
                g[1] = c * w[1];
            }
            Kind::NegativeQuadratic => {
                for (gi, wi) in g.iter_mut().zip(w) {
                    *gi = -wi;
                }
            }
        }
    }

    /// Gradient as a fresh vector.
    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        self.gradient_into(w, &mut g);
        g
    }

    /// Exact Hessian matrix.
    pub fn hessian(&self, w: &[f64]) -> DMatrix<f64> {
        match &self.kind {
            Kind::Quadratic { a } => DMatrix::from_element(1, 1, *a),
            Kind::Quadratic2d { a1, a2 } => {
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![*a1, *a2]))
            }
            Kind::DoubleWell1d { scale } => {
                DMatrix::from_element(1, 1, scale * (3.0 * w[0] * w[0] - 1.0))
            }
            Kind::TiltedDoubleWell1d { .. } => {
                DMatrix::from_element(1, 1, 3.0 * w[0] * w[0] - 1.0)
            }
            Kind::TwoWell2d { c1, c2, k } => {
                let (c, dc, ddc) = two_well_c(*c1, *c2, *k, w[0]);
                let mut m = DMatrix::zeros(2, 2);
                m[(0, 0)] = 3.0 * w[0] * w[0] - 1.0 + 0.5 * ddc * w[1] * w[1];
                m[(0, 1)] = dc * w[1];
                m[(1, 0)] = dc * w[1];
                m[(1, 1)] = c;
                m
            }
            Kind::NegativeQuadratic => {
                DMatrix::from_diagonal_element(self.dim, self.dim, -1.0)
            }
        }
    }

    /// Trace of the Hessian without building the matrix.
    #[inline]
    pub fn laplacian(&self, w: &[f64]) -> f64 {
        match &self.kind {
            Kind::Quadratic { a } => *a,
            Kind::Quadratic2d { a1, a2 } => a1 + a2,
            Kind::DoubleWell1d { scale } => scale * (3.0 * w[0] * w[0] - 1.0),
            Kind::TiltedDoubleWell1d { .. } => 3.0 * w[0] * w[0] - 1.0,
            Kind::TwoWell2d { c1, c2, k } => {
                let (c, _, ddc) = two_well_c(*c1, *c2, *k, w[0]);
                3.0 * w[0] * w[0] - 1.0 + 0.5 * ddc * w[1] * w[1] + c
            }
            Kind::NegativeQuadratic => -(self.dim as f64),
        }
    }

    /// Validated evaluation returning `(L, grad L, hess L)`.
    pub fn evaluate(&self, w: &[f64]) -> Result<(f64, Vec<f64>, DMatrix<f64>)> {
        if w.len() != self.dim {
            return Err(Error::Argument(format!(
                "landscape '{}' has dim {}, got point of length {}",
                self.name,
                self.dim,
                w.len()
            )));
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument(format!(
                "non-finite coordinate in evaluation point {w:?}"
            )));
        }
        Ok((self.value(w), self.gradient(w), self.hessian(w)))
    }

    /// Largest Hessian eigenvalue magnitude sampled on `[-halfwidth, halfwidth]^dim`.
    ///
    /// Used by simulators as the explicit-scheme stability guard.
    pub fn curvature_bound(&self, halfwidth: f64) -> f64 {
        let n = 64usize;
        let mut bound: f64 = 0.0;
        let mut point = vec![0.0; self.dim];
        let coords: Vec<f64> = (0..=n)
            .map(|i| -halfwidth + 2.0 * halfwidth * i as f64 / n as f64)
            .collect();
        let visit = |point: &[f64], bound: &mut f64| {
            let h = self.hessian(point);
            let eig = SymmetricEigen::new(h);
            for e in eig.eigenvalues.iter() {
                *bound = bound.max(e.abs());
            }
        };
        match self.dim {
            1 => {
                for &x in &coords {
                    point[0] = x;
                    visit(&point, &mut bound);
                }
            }
            2 => {
                for &x in &coords {
                    for &y in &coords {
                        point[0] = x;
                        point[1] = y;
                        visit(&[x, y], &mut bound);
                    }
                }
            }
            _ => unreachable!("builtin landscapes are 1- or 2-dimensional"),
        }
        bound
    }

    /// Canonical text form used in fingerprints.
    pub fn fingerprint_text(&self) -> String {
        let params: Vec<String> = self
            .parameters
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("{}[{}]", self.name, params.join(","))
    }
}

/// Sharpness measures of a catalogued minimum: Hessian determinant and Frobenius norm.
pub fn sharpness(minimum: &Minimum) -> (f64, f64) {
    (minimum.hessian_det, minimum.hessian_frobenius)
}

// ---------------------------------------------------------------------------
// Assumption checking
// ---------------------------------------------------------------------------

/// Verdict for one assumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// One sampled quantity backing an assumption verdict.
#[derive(Debug, Clone)]
pub struct EvidenceRow {
    pub assumption: &'static str,
    pub radius: f64,
    pub quantity: &'static str,
    pub value: f64,
}

/// Verdict plus evidence for one assumption.
#[derive(Debug, Clone)]
pub struct AssumptionEntry {
    pub holds: Verdict,
    pub evidence: Vec<EvidenceRow>,
}

/// Report of the confinement / regularity assumptions A.1-A.4.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub a1: AssumptionEntry,
    pub a2: AssumptionEntry,
    pub a3: AssumptionEntry,
    pub a4: AssumptionEntry,
    /// A.3 witness: the sampled supremum.
    pub m_w: f64,
    /// A.4 witnesses.
    pub c_l: f64,
    pub b: f64,
    /// Half-width of the bounded box the A.4 check sampled.
    pub a4_box_halfwidth: f64,
    /// True when the landscape has no finite global Hessian-entry bound and
    /// the A.4 verdict therefore only covers the sampled box.
    pub a4_domain_restricted: bool,
}

impl AssumptionReport {
    pub fn all_rows(&self) -> Vec<(&EvidenceRow, Verdict)> {
        let mut rows = Vec::new();
        for entry in [&self.a1, &self.a2, &self.a3, &self.a4] {
            for row in &entry.evidence {
                rows.push((row, entry.holds));
            }
        }
        rows
    }
}

/// Deterministic points on the shell of radius `r`.
fn shell_points(dim: usize, r: f64, n: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![-r], vec![r]],
        2 => (0..n.max(4))
            .map(|i| {
                let theta = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / n.max(4) as f64;
                vec![r * theta.cos(), r * theta.sin()]
            })
            .collect(),
        _ => unreachable!(),
    }
}

/// Trend of the last half of a sequence.
#[derive(PartialEq, Eq, Clone, Copy)]
enum Trend {
    Increasing,
    Decreasing,
    Mixed,
}

fn tail_trend(values: &[f64]) -> Trend {
    let start = values.len() / 2;
    let tail = &values[start.max(1) - 1..];
    let inc = tail.windows(2).all(|p| p[1] >= p[0] - 1e-12 * p[0].abs().max(1.0));
    let dec = tail.windows(2).all(|p| p[1] <= p[0] + 1e-12 * p[0].abs().max(1.0));
    match (inc, dec) {
        (true, false) => Trend::Increasing,
        (false, true) => Trend::Decreasing,
        _ => Trend::Mixed,
    }
}

/// Tensor-grid quadrature of `e^{-L}` out to radius `rmax`.
fn gibbs_interior_mass(landscape: &Landscape, rmax: f64) -> f64 {
    let n = 400usize;
    let h = 2.0 * rmax / n as f64;
    match landscape.dim {
        1 => (0..n)
            .map(|i| {
                let w = [-rmax + (i as f64 + 0.5) * h];
                (-landscape.value(&w)).exp() * h
            })
            .sum(),
        2 => {
            let mut mass = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let w = [-rmax + (i as f64 + 0.5) * h, -rmax + (j as f64 + 0.5) * h];
                    mass += (-landscape.value(&w)).exp() * h * h;
                }
            }
            mass
        }
        _ => unreachable!(),
    }
}

/// Check Assumptions A.1-A.4 by shell sampling, with the A.4 box defaulting
/// to `[-5, 5]^dim`.
pub fn check_assumptions(
    landscape: &Landscape,
    radii: &[f64],
    samples_per_shell: usize,
) -> Result<AssumptionReport> {
    check_assumptions_with_box(landscape, radii, samples_per_shell, 5.0)
}

/// As [`check_assumptions`] with an explicit A.4 sampling box half-width.
pub fn check_assumptions_with_box(
    landscape: &Landscape,
    radii: &[f64],
    samples_per_shell: usize,
    a4_box_halfwidth: f64,
) -> Result<AssumptionReport> {
    if radii.is_empty() {
        return Err(Error::Argument("radii list must be nonempty".into()));
    }
    if radii.windows(2).any(|p| p[1] <= p[0]) || radii[0] <= 0.0 {
        return Err(Error::Argument("radii must be positive and increasing".into()));
    }
    if samples_per_shell == 0 {
        return Err(Error::Argument("samples_per_shell must be >= 1".into()));
    }

    let dim = landscape.dim;
    let mut a1_rows = Vec::new();
    let mut a2_rows = Vec::new();
    let mut a3_rows = Vec::new();

    let mut shell_min_l = Vec::new();
    let mut shell_growth = Vec::new(); // A.2 first quantity, min over shell
    let mut shell_ratio = Vec::new(); // A.2 second quantity, max over shell
    let mut shell_a3 = Vec::new(); // A.3 quantity, max over shell
    let mut last_min_curv = 0.0;
    let mut last_min_slope = 0.0;

    for &r in radii {
        let pts = shell_points(dim, r, samples_per_shell);
        let mut min_l = f64::INFINITY;
        let mut min_growth = f64::INFINITY;
        let mut max_ratio: f64 = 0.0;
        let mut max_a3: f64 = 0.0;
        let mut min_curv = f64::INFINITY;
        let mut min_slope = f64::INFINITY;
        for p in &pts {
            let l = landscape.value(p);
            let g = landscape.gradient(p);
            let g2: f64 = g.iter().map(|x| x * x).sum();
            let trace = landscape.laplacian(p);
            min_l = min_l.min(l);
            min_growth = min_growth.min(0.5 * g2 - trace);
            if g2 > 0.0 {
                max_ratio = max_ratio.max(trace / g2);
            }
            max_a3 = max_a3.max(((-l).exp() * (g2 - trace)).abs());
            // Curvature along the outward ray, the second derivative that
            // controls how the radial slope evolves past the shell.
            let hess = landscape.hessian(p);
            let mut radial_curv = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    radial_curv += p[i] / r * hess[(i, j)] * p[j] / r;
                }
            }
            min_curv = min_curv.min(radial_curv);
            // Radial slope of L on the shell.
            let radial: f64 = g.iter().zip(p).map(|(gi, wi)| gi * wi / r).sum();
            min_slope = min_slope.min(radial);
        }
        shell_min_l.push(min_l);
        shell_growth.push(min_growth);
        shell_ratio.push(max_ratio);
        shell_a3.push(max_a3);
        last_min_curv = min_curv;
        last_min_slope = min_slope;

        a1_rows.push(EvidenceRow { assumption: "A1", radius: r, quantity: "min_shell_L", value: min_l });
        a2_rows.push(EvidenceRow { assumption: "A2", radius: r, quantity: "min_shell_growth", value: min_growth });
        a2_rows.push(EvidenceRow { assumption: "A2", radius: r, quantity: "max_shell_trace_ratio", value: max_ratio });
        a3_rows.push(EvidenceRow { assumption: "A3", radius: r, quantity: "max_shell_gibbs_defect", value: max_a3 });
    }

    let rmax = *radii.last().unwrap();

    // A.1: L grows along shells and the Gibbs mass beyond the last shell is
    // provably negligible (exponential tail bound from the last shell's
    // minimum radial slope, valid only when the shell curvature is positive).
    let interior = gibbs_interior_mass(landscape, rmax);
    let l_trend = tail_trend(&shell_min_l);
    let surface = if dim == 1 { 2.0 } else { 2.0 * std::f64::consts::PI * rmax };
    let tail_bound = if last_min_curv > 0.0 && last_min_slope > 0.0 {
        surface * (-shell_min_l.last().unwrap()).exp() / last_min_slope
    } else {
        f64::INFINITY
    };
    a1_rows.push(EvidenceRow { assumption: "A1", radius: rmax, quantity: "interior_gibbs_mass", value: interior });
    a1_rows.push(EvidenceRow { assumption: "A1", radius: rmax, quantity: "tail_bound", value: tail_bound });
    let a1_verdict = if l_trend == Trend::Increasing && tail_bound < 1e-6 * interior {
        Verdict::Pass
    } else if l_trend != Trend::Increasing || last_min_slope <= 0.0 {
        // Shell values not growing, or mass flowing outward: counter-evidence.
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };

    // A.2: the growth quantity increases without bound, the trace ratio decays.
    let growth_trend = tail_trend(&shell_growth);
    let ratio_trend = tail_trend(&shell_ratio);
    let ratio_max = shell_ratio.iter().cloned().fold(0.0f64, f64::max);
    let a2_verdict = if growth_trend == Trend::Increasing
        && *shell_growth.last().unwrap() > shell_growth[0]
        && ratio_trend != Trend::Increasing
        && (ratio_max == 0.0 || *shell_ratio.last().unwrap() <= 0.5 * ratio_max)
    {
        Verdict::Pass
    } else if growth_trend == Trend::Decreasing || ratio_trend == Trend::Increasing {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };

    // A.3: the Gibbs-weighted defect stays bounded; its sampled sup is the witness.
    let m_w = shell_a3.iter().cloned().fold(0.0f64, f64::max);
    let a3_trend = tail_trend(&shell_a3);
    let a3_verdict = if a3_trend != Trend::Increasing {
        Verdict::Pass
    } else if *shell_a3.last().unwrap() > 100.0 * (shell_a3[0] + 1e-300) {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };

    // A.4: sup-entry matrix of the split Hessian on the box, spectral radius as b.
    let c_l = landscape.convexity_split_constant;
    let nbox = 41usize;
    let mut sup_entries = DMatrix::zeros(dim, dim);
    let coords: Vec<f64> = (0..nbox)
        .map(|i| -a4_box_halfwidth + 2.0 * a4_box_halfwidth * i as f64 / (nbox - 1) as f64)
        .collect();
    let record = |w: &[f64], sup: &mut DMatrix<f64>| {
        let mut h = landscape.hessian(w);
        for i in 0..dim {
            h[(i, i)] -= c_l * c_l;
        }
        for i in 0..dim {
            for j in 0..dim {
                let a: f64 = h[(i, j)].abs();
                if a > sup[(i, j)] {
                    sup[(i, j)] = a;
                }
            }
        }
    };
    match dim {
        1 => {
            for &x in &coords {
                record(&[x], &mut sup_entries);
            }
        }
        2 => {
            for &x in &coords {
                for &y in &coords {
                    record(&[x, y], &mut sup_entries);
                }
            }
        }
        _ => unreachable!(),
    }
    let b = SymmetricEigen::new(sup_entries.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0f64, |m, e| m.max(e.abs()));
    let a4_domain_restricted = landscape.hessian_entry_bound.is_none();
    let a4_rows = vec![EvidenceRow {
        assumption: "A4",
        radius: a4_box_halfwidth,
        quantity: "sup_entry_spectral_radius",
        value: b,
    }];
    // On the sampled box a finite b always exists; the verdict is only
    // unconditional when the catalog declares a global bound.
    let a4_verdict = if b.is_finite() { Verdict::Pass } else { Verdict::Fail };

    Ok(AssumptionReport {
        a1: AssumptionEntry { holds: a1_verdict, evidence: a1_rows },
        a2: AssumptionEntry { holds: a2_verdict, evidence: a2_rows },
        a3: AssumptionEntry { holds: a3_verdict, evidence: a3_rows },
        a4: AssumptionEntry { holds: a4_verdict, evidence: a4_rows },
        m_w,
        c_l,
        b,
        a4_box_halfwidth,
        a4_domain_restricted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::Rng;

    fn catalog() -> Vec<Landscape> {
        let p = BTreeMap::new();
        vec![
            Landscape::builtin("quadratic", &p).unwrap(),
            Landscape::builtin("double_well_1d", &p).unwrap(),
            Landscape::builtin("tilted_double_well_1d", &p).unwrap(),
            Landscape::builtin("two_well_2d", &p).unwrap(),
            Landscape::builtin("quadratic_2d", &p).unwrap(),
        ]
    }

    fn fd_gradient(l: &Landscape, w: &[f64], step: f64) -> Vec<f64> {
        (0..l.dim)
            .map(|i| {
                let mut wp = w.to_vec();
                let mut wm = w.to_vec();
                wp[i] += step;
                wm[i] -= step;
                (l.value(&wp) - l.value(&wm)) / (2.0 * step)
            })
            .collect()
    }

    fn fd_hessian(l: &Landscape, w: &[f64], step: f64) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(l.dim, l.dim);
        for i in 0..l.dim {
            let mut wp = w.to_vec();
            let mut wm = w.to_vec();
            wp[i] += step;
            wm[i] -= step;
            let gp = l.gradient(&wp);
            let gm = l.gradient(&wm);
            for j in 0..l.dim {
                h[(j, i)] = (gp[j] - gm[j]) / (2.0 * step);
            }
        }
        h
    }

    #[test]
    fn double_well_point_values() {
        let l = Landscape::builtin("double_well_1d", &BTreeMap::new()).unwrap();
        let (v, g, h) = l.evaluate(&[0.0]).unwrap();
        assert_abs_diff_eq!(v, 0.25);
        assert_abs_diff_eq!(g[0], 0.0);
        assert_abs_diff_eq!(h[(0, 0)], -1.0);
        let (v, g, h) = l.evaluate(&[1.0]).unwrap();
        assert_abs_diff_eq!(v, 0.0);
        assert_abs_diff_eq!(g[0], 0.0);
        assert_abs_diff_eq!(h[(0, 0)], 2.0);
    }

    #[test]
    fn quadratic_identity_case() {
        let l = Landscape::builtin("quadratic", &BTreeMap::new()).unwrap();
        let (v, g, h) = l.evaluate(&[0.0]).unwrap();
        assert_eq!((v, g[0], h[(0, 0)]), (0.0, 0.0, 1.0));
    }

    #[test]
    fn evaluate_rejects_bad_input() {
        let l = Landscape::builtin("quadratic", &BTreeMap::new()).unwrap();
        assert!(matches!(l.evaluate(&[0.0, 1.0]), Err(Error::Argument(_))));
        assert!(matches!(l.evaluate(&[f64::NAN]), Err(Error::Argument(_))));
    }

    #[test]
    fn finite_difference_consistency() {
        let mut rng = crate::rng::path_rng(2024, 0);
        for l in catalog() {
            for _ in 0..100 {
                let w: Vec<f64> = (0..l.dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let g = l.gradient(&w);
                let g_fd = fd_gradient(&l, &w, 1e-5);
                for (a, b) in g.iter().zip(&g_fd) {
                    assert_relative_eq!(a, b, max_relative = 1e-6, epsilon = 1e-7);
                }
                let h = l.hessian(&w);
                let h_fd = fd_hessian(&l, &w, 1e-5);
                for i in 0..l.dim {
                    for j in 0..l.dim {
                        assert_relative_eq!(
                            h[(i, j)],
                            h_fd[(i, j)],
                            max_relative = 1e-6,
                            epsilon = 1e-7
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn catalog_stationarity_and_signatures() {
        for l in catalog() {
            for m in &l.minima {
                let g = l.gradient(&m.location);
                assert!(g.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1e-10, "{}", l.name);
                let eigs = SymmetricEigen::new(l.hessian(&m.location)).eigenvalues;
                assert!(eigs.iter().all(|&e| e > 0.0));
                let det: f64 = eigs.iter().product();
                assert_relative_eq!(det, m.hessian_det, max_relative = 1e-10);
                let prod: f64 = m.hessian_eigenvalues.iter().product();
                assert_relative_eq!(prod, m.hessian_det, max_relative = 1e-10);
                assert_abs_diff_eq!(l.value(&m.location), m.value, epsilon = 1e-12);
            }
            for s in &l.saddles {
                let g = l.gradient(&s.location);
                assert!(g.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1e-10, "{}", l.name);
                let eigs = SymmetricEigen::new(l.hessian(&s.location)).eigenvalues;
                let neg: Vec<f64> = eigs.iter().cloned().filter(|&e| e < 0.0).collect();
                assert_eq!(neg.len(), 1, "{} saddle signature", l.name);
                assert_relative_eq!(neg[0].abs(), s.lambda_star, max_relative = 1e-10);
                for (&idx, &barrier) in &s.barriers {
                    assert!(barrier > 0.0);
                    assert_relative_eq!(
                        s.value - l.minima[idx].value,
                        barrier,
                        max_relative = 1e-9
                    );
                }
            }
        }
    }

    #[test]
    fn two_well_metadata_matches_worked_example() {
        let l = Landscape::two_well_2d(1.0, 4.0, 10.0).unwrap();
        let flat = &l.minima[0];
        let sharp = &l.minima[1];
        assert_relative_eq!(flat.hessian_det, 2.0, max_relative = 1e-7);
        assert_relative_eq!(sharp.hessian_det, 8.0, max_relative = 1e-7);
        let s = &l.saddles[0];
        assert_relative_eq!(s.lambda_star, 1.0);
        assert_relative_eq!(s.hessian_det_abs, 2.5);
        assert_relative_eq!(s.barriers[&0], 0.25);
    }

    #[test]
    fn two_well_symmetric_case_is_even() {
        let l = Landscape::two_well_2d(2.0, 2.0, 10.0).unwrap();
        assert_relative_eq!(l.minima[0].hessian_det, l.minima[1].hessian_det);
        for p in [[0.3, 0.7], [1.2, -0.4]] {
            let m = [-p[0], p[1]];
            assert_relative_eq!(l.value(&p), l.value(&m), max_relative = 1e-12);
        }
    }

    #[test]
    fn two_well_rejects_nonconfining_parameters() {
        assert!(matches!(
            Landscape::two_well_2d(-1.0, 4.0, 10.0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn unknown_name_is_catalog_error() {
        assert!(matches!(
            Landscape::builtin("rosenbrock", &BTreeMap::new()),
            Err(Error::Catalog(_))
        ));
    }

    #[test]
    fn sharpness_worked_examples() {
        let m = minimum_from_eigs(vec![0.0, 0.0], 0.0, vec![2.0, 8.0]);
        let (det, fro) = sharpness(&m);
        assert_relative_eq!(det, 16.0);
        assert_relative_eq!(fro, 68.0f64.sqrt(), max_relative = 1e-12);
        let id = minimum_from_eigs(vec![0.0, 0.0], 0.0, vec![1.0, 1.0]);
        assert_eq!(sharpness(&id), (1.0, 2.0f64.sqrt()));
        let dw = Landscape::builtin("double_well_1d", &BTreeMap::new()).unwrap();
        assert_eq!(sharpness(&dw.minima[1]), (2.0, 2.0));
    }

    #[test]
    fn assumptions_pass_for_quadratic() {
        let l = Landscape::builtin("quadratic", &BTreeMap::new()).unwrap();
        let radii: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let rep = check_assumptions(&l, &radii, 16).unwrap();
        assert_eq!(rep.a1.holds, Verdict::Pass);
        assert_eq!(rep.a2.holds, Verdict::Pass);
        assert_eq!(rep.a3.holds, Verdict::Pass);
        assert_eq!(rep.a4.holds, Verdict::Pass);
        assert_relative_eq!(rep.c_l, 1.0);
        assert_abs_diff_eq!(rep.b, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn assumptions_double_well_domain_restricted_a4() {
        let l = Landscape::builtin("double_well_1d", &BTreeMap::new()).unwrap();
        let radii: Vec<f64> = (1..=8).map(|i| i as f64).collect();
        let rep = check_assumptions(&l, &radii, 16).unwrap();
        assert_eq!(rep.a1.holds, Verdict::Pass);
        assert_eq!(rep.a2.holds, Verdict::Pass);
        assert_eq!(rep.a3.holds, Verdict::Pass);
        assert!(rep.a4_domain_restricted);
        assert!(rep.b > 0.0 && rep.b.is_finite());
    }

    #[test]
    fn negative_quadratic_fails_confinement() {
        let l = Landscape::negative_quadratic(1);
        let radii: Vec<f64> = (1..=6).map(|i| i as f64).collect();
        let rep = check_assumptions(&l, &radii, 8).unwrap();
        assert_eq!(rep.a1.holds, Verdict::Fail);
    }

    #[test]
    fn assumption_input_validation() {
        let l = Landscape::builtin("quadratic", &BTreeMap::new()).unwrap();
        assert!(check_assumptions(&l, &[], 8).is_err());
        assert!(check_assumptions(&l, &[2.0, 1.0], 8).is_err());
        assert!(check_assumptions(&l, &[1.0], 0).is_err());
    }
}
