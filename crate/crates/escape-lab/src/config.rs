//! TOML experiment configurations for the `escape-lab` binary.
//!
//! A config names one experiment kind, a landscape, usually a schedule, and
//! one parameter table matching the kind. Unknown keys are hard errors at
//! every level so a typo cannot silently fall back to a default, and the
//! table for a kind other than the one selected is rejected for the same
//! reason. Configs round-trip through serialization, and the canonical
//! serialized form is what gets fingerprinted into artifact headers.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpe::{Axis, Grid};
use crate::landscapes::Landscape;
use crate::rng::fingerprint;
use crate::schedule::Schedule;

/// Which experiment the runner executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Integrate trajectories and export them.
    Simulate,
    /// Grid solve of the density equation.
    SolveFpe,
    /// Grid solve of the kinetic phase-space equation.
    SolveVfp,
    /// Closed-form escape time against the Monte Carlo oracle.
    Kramers,
    /// Evaluate the stationary density on a grid.
    Stationary,
    /// Convergence-rate bound check for the overdamped dynamics.
    Rates,
    /// Closed-form momentum rate constants.
    MsgdRates,
    /// Data-driven noise / sharpness experiments.
    Empirical,
    /// Landscape regularity report.
    Assumptions,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::SolveFpe => "solve-fpe",
            ExperimentKind::SolveVfp => "solve-vfp",
            ExperimentKind::Kramers => "kramers",
            ExperimentKind::Stationary => "stationary",
            ExperimentKind::Rates => "rates",
            ExperimentKind::MsgdRates => "msgd-rates",
            ExperimentKind::Empirical => "empirical",
            ExperimentKind::Assumptions => "assumptions",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    /// Master seed; every stochastic component derives from it.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
}

impl LandscapeSpec {
    pub fn build(&self) -> Result<Landscape> {
        Landscape::builtin(&self.name, &self.parameters)
    }
}

/// One uniform grid axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub cells: usize,
}

impl GridSpec {
    pub fn axis(&self) -> Result<Axis> {
        Axis::new(self.min, self.max, self.cells)
    }

    /// Product grid with this axis repeated once per landscape dimension.
    pub fn grid(&self, dim: usize) -> Result<Grid> {
        Grid::new((0..dim).map(|_| self.axis()).collect::<Result<_>>()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMethod {
    SgdSde,
    MsgdSde,
    SgdDiscrete,
    MsgdDiscrete,
}

impl SimMethod {
    fn is_discrete(&self) -> bool {
        matches!(self, SimMethod::SgdDiscrete | SimMethod::MsgdDiscrete)
    }

    fn has_momentum(&self) -> bool {
        matches!(self, SimMethod::MsgdSde | SimMethod::MsgdDiscrete)
    }
}

fn default_stride() -> usize {
    1
}

fn default_one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub method: SimMethod,
    pub w0: Vec<f64>,
    /// Initial velocity for the continuous momentum method (defaults to 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<Vec<f64>>,
    /// Momentum parameter for the momentum methods.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    /// Step for the continuous methods (discrete methods step by gamma).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    /// Step count for the discrete methods.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default = "default_one")]
    pub n_paths: usize,
}

/// Initial density profile for the grid solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitSpec {
    /// Mollified point mass: an isotropic Gaussian at `center`.
    Gaussian { center: Vec<f64>, width: f64 },
    /// Start at the stationary density (fixed-point check).
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FpeSpec {
    pub grid: GridSpec,
    pub init: InitSpec,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VfpSpec {
    pub w_grid: GridSpec,
    pub v_grid: GridSpec,
    pub xi: f64,
    pub init: InitSpec,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KramersSpec {
    pub from_min: usize,
    pub to_min: usize,
    /// Target-ball radius for the Monte Carlo transition event.
    pub epsilon: f64,
    pub dt: f64,
    /// Censoring cap; defaults to 50x the closed-form time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_cap: Option<f64>,
    pub n_paths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationarySpec {
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSpec {
    pub grid: GridSpec,
    /// The initial density is the stationary profile translated by this much.
    pub init_shift: f64,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MsgdRatesSpec {
    pub xi: f64,
    /// Gradient-noise floor in the dissipation estimate.
    #[serde(default)]
    pub b: f64,
    /// Spectral-gap constant; either given directly or computed on a grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmpiricalMode {
    /// Mini-batch gradient-noise moments at a fixed weight.
    Noise,
    /// Training traces with full-data Hessian sharpness.
    Sharpness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    /// Planted linear regression with squared loss.
    Regression,
    /// Two-cluster logistic task with ridge regularization.
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalSpec {
    pub mode: EmpiricalMode,
    pub task: TaskKind,
    pub n_samples: usize,
    pub dim: usize,
    /// Label noise for the regression task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_std: Option<f64>,
    /// Cluster separation for the logistic task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
    /// Ridge coefficient for the logistic task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub batches: Vec<usize>,
    /// Learning rate (sharpness mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    /// Independent repetitions per batch size (sharpness mode).
    #[serde(default = "default_one")]
    pub n_seeds: usize,
    /// Draw count for noise-moment estimation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_draws: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssumptionsSpec {
    /// Half-width of the box used for the bounded-perturbation check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_halfwidth: Option<f64>,
}

/// A fully parsed experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub landscape: LandscapeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fpe: Option<FpeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vfp: Option<VfpSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kramers: Option<KramersSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary: Option<StationarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<RatesSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub msgd_rates: Option<MsgdRatesSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empirical: Option<EmpiricalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assumptions: Option<AssumptionsSpec>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<ExperimentConfig> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    /// Content hash of the canonical serialized form.
    pub fn fingerprint(&self) -> Result<String> {
        Ok(fingerprint(&[&self.to_toml_string()?]))
    }

    fn require_schedule(&self) -> Result<&Schedule> {
        let s = self
            .schedule
            .as_ref()
            .ok_or_else(|| config_err("this experiment kind requires a [schedule] table"))?;
        s.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(s)
    }

    /// Cross-field validation; returns informational diagnostics on success.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut notes = Vec::new();
        let landscape = self.landscape.build().map_err(|e| config_err(e.to_string()))?;

        // Exactly the parameter table matching the kind must be present.
        let kind = self.experiment.kind;
        let tables: [(&str, bool, bool); 9] = [
            ("simulate", self.simulate.is_some(), kind == ExperimentKind::Simulate),
            ("fpe", self.fpe.is_some(), kind == ExperimentKind::SolveFpe),
            ("vfp", self.vfp.is_some(), kind == ExperimentKind::SolveVfp),
            ("kramers", self.kramers.is_some(), kind == ExperimentKind::Kramers),
            ("stationary", self.stationary.is_some(), kind == ExperimentKind::Stationary),
            ("rates", self.rates.is_some(), kind == ExperimentKind::Rates),
            ("msgd_rates", self.msgd_rates.is_some(), kind == ExperimentKind::MsgdRates),
            ("empirical", self.empirical.is_some(), kind == ExperimentKind::Empirical),
            ("assumptions", self.assumptions.is_some(), kind == ExperimentKind::Assumptions),
        ];
        for (name, present, wanted) in tables {
            if wanted && !present {
                return Err(config_err(format!(
                    "experiment kind '{}' requires a [{name}] table",
                    kind.as_str()
                )));
            }
            if present && !wanted {
                return Err(config_err(format!(
                    "[{name}] table does not belong to experiment kind '{}'",
                    kind.as_str()
                )));
            }
        }

        match kind {
            ExperimentKind::Simulate => {
                let spec = self.simulate.as_ref().unwrap();
                let schedule = self.require_schedule()?;
                if spec.w0.len() != landscape.dim {
                    return Err(config_err(format!(
                        "w0 has {} components, landscape '{}' has dimension {}",
                        spec.w0.len(),
                        landscape.name,
                        landscape.dim
                    )));
                }
                if let Some(v0) = &spec.v0 {
                    if v0.len() != landscape.dim {
                        return Err(config_err("v0 dimension mismatch"));
                    }
                }
                if spec.method.has_momentum() {
                    let xi = spec
                        .xi
                        .ok_or_else(|| config_err("momentum methods require xi"))?;
                    if !(0.0..1.0).contains(&xi) {
                        return Err(config_err(format!("xi must lie in [0, 1), got {xi}")));
                    }
                }
                if spec.method.is_discrete() {
                    if spec.n_steps.is_none() {
                        return Err(config_err("discrete methods require n_steps"));
                    }
                    if spec.dt.is_some() || spec.t_final.is_some() {
                        return Err(config_err(
                            "discrete methods step by gamma; dt / t_final do not apply",
                        ));
                    }
                } else {
                    let dt = spec
                        .dt
                        .ok_or_else(|| config_err("continuous methods require dt"))?;
                    let t_final = spec
                        .t_final
                        .ok_or_else(|| config_err("continuous methods require t_final"))?;
                    if !(dt > 0.0 && t_final > dt) {
                        return Err(config_err(format!(
                            "need 0 < dt < t_final, got dt = {dt}, t_final = {t_final}"
                        )));
                    }
                    let curv = landscape.curvature_bound(crate::sde::GUARD_RADIUS);
                    notes.push(format!(
                        "stability: dt * curvature bound = {:.3e} (must stay < 2)",
                        dt * curv
                    ));
                }
                if spec.n_paths == 0 {
                    return Err(config_err("n_paths must be >= 1"));
                }
                if let Some(eta) = schedule.eta_inf() {
                    notes.push(format!("limiting temperature eta(inf) = {eta}"));
                }
            }
            ExperimentKind::SolveFpe => {
                let spec = self.fpe.as_ref().unwrap();
                let schedule = self.require_schedule()?;
                if !(spec.dt > 0.0 && spec.t_final > spec.dt) {
                    return Err(config_err("need 0 < dt < t_final"));
                }
                let grid = spec.grid.grid(landscape.dim).map_err(|e| config_err(e.to_string()))?;
                self.init_diagnostics(&landscape, schedule, &grid, &spec.init, &mut notes)?;
                notes.push(format!(
                    "grid memory: {} cells x 8 bytes = {} kB per snapshot",
                    grid.n_cells(),
                    grid.n_cells() * 8 / 1024
                ));
            }
            ExperimentKind::SolveVfp => {
                let spec = self.vfp.as_ref().unwrap();
                let schedule = self.require_schedule()?;
                if !matches!(schedule, Schedule::Constant { .. }) {
                    return Err(config_err(
                        "the kinetic solver requires a constant schedule",
                    ));
                }
                if landscape.dim != 1 {
                    return Err(config_err(
                        "the kinetic solver covers 1-d landscapes",
                    ));
                }
                if !(0.0..1.0).contains(&spec.xi) {
                    return Err(config_err(format!("xi must lie in [0, 1), got {}", spec.xi)));
                }
                if !(spec.dt > 0.0 && spec.t_final > spec.dt) {
                    return Err(config_err("need 0 < dt < t_final"));
                }
                spec.w_grid.axis().map_err(|e| config_err(e.to_string()))?;
                spec.v_grid.axis().map_err(|e| config_err(e.to_string()))?;
                let eta_prime = schedule.eta(0.0) * (1.0 - spec.xi);
                notes.push(format!("kinetic temperature eta' = {eta_prime}"));
                let cells = spec.w_grid.cells * spec.v_grid.cells;
                notes.push(format!(
                    "grid memory: {} cells x 8 bytes = {} kB per snapshot",
                    cells,
                    cells * 8 / 1024
                ));
            }
            ExperimentKind::Kramers => {
                let spec = self.kramers.as_ref().unwrap();
                let schedule = self.require_schedule()?;
                if landscape.minima.get(spec.from_min).is_none()
                    || landscape.minima.get(spec.to_min).is_none()
                {
                    return Err(config_err(format!(
                        "landscape '{}' has {} minima; from_min = {}, to_min = {}",
                        landscape.name,
                        landscape.minima.len(),
                        spec.from_min,
                        spec.to_min
                    )));
                }
                if spec.from_min == spec.to_min {
                    return Err(config_err("from_min and to_min must differ"));
                }
                if landscape.saddles.is_empty() {
                    return Err(config_err(format!(
                        "landscape '{}' has no saddle; no barrier to cross",
                        landscape.name
                    )));
                }
                if !(spec.epsilon > 0.0) || !(spec.dt > 0.0) || spec.n_paths < 2 {
                    return Err(config_err(
                        "kramers requires epsilon > 0, dt > 0, n_paths >= 2",
                    ));
                }
                let sigma2 = schedule.gamma(0.0) * schedule.beta() / schedule.batch(0.0);
                notes.push(format!(
                    "stability: dt bound from target ball = {:.3e}",
                    spec.epsilon * spec.epsilon / (10.0 * sigma2)
                ));
                notes.push(format!("temperature eta = {}", schedule.eta(0.0)));
            }
            ExperimentKind::Stationary => {
                let spec = self.stationary.as_ref().unwrap();
                let schedule = self.require_schedule()?;
                let eta = schedule.eta_inf().ok_or_else(|| {
                    config_err("stationary experiments need a schedule with a limiting temperature")
                })?;
                let grid = spec.grid.grid(landscape.dim).map_err(|e| config_err(e.to_string()))?;
                self.boundary_mass_diagnostic(&landscape, eta, &grid, &mut notes);
                notes.push(format!("limiting temperature eta(inf) = {eta}"));
            }
            ExperimentKind::Rates => {
                let spec = self.rates.as_ref().unwrap();
                let schedule = self.require_schedule()?;
                if landscape.dim != 1 {
                    return Err(config_err(
                        "the spectral-gap constant is computed in one dimension",
                    ));
                }
                if !(spec.dt > 0.0 && spec.t_final > spec.dt) {
                    return Err(config_err("need 0 < dt < t_final"));
                }
                let eta = schedule.eta_inf().ok_or_else(|| {
                    config_err("rate experiments need a schedule with a limiting temperature")
                })?;
                let grid = spec.grid.grid(1).map_err(|e| config_err(e.to_string()))?;
                self.boundary_mass_diagnostic(&landscape, eta, &grid, &mut notes);
                notes.push(format!("limiting temperature eta(inf) = {eta}"));
            }
            ExperimentKind::MsgdRates => {
                let spec = self.msgd_rates.as_ref().unwrap();
                self.require_schedule()?;
                if !(0.0..1.0).contains(&spec.xi) {
                    return Err(config_err(format!("xi must lie in [0, 1), got {}", spec.xi)));
                }
                if spec.b < 0.0 {
                    return Err(config_err("b must be non-negative"));
                }
                match (&spec.c_p, &spec.grid) {
                    (Some(c_p), None) => {
                        if !(*c_p > 0.0) {
                            return Err(config_err("c_p must be positive"));
                        }
                    }
                    (None, Some(g)) => {
                        g.axis().map_err(|e| config_err(e.to_string()))?;
                        if landscape.dim != 1 {
                            return Err(config_err(
                                "computing c_p on a grid needs a 1-d landscape",
                            ));
                        }
                    }
                    _ => {
                        return Err(config_err(
                            "give exactly one of c_p (explicit) or grid (computed)",
                        ))
                    }
                }
            }
            ExperimentKind::Empirical => {
                let spec = self.empirical.as_ref().unwrap();
                if spec.n_samples < 2 || spec.dim == 0 {
                    return Err(config_err("need n_samples >= 2 and dim >= 1"));
                }
                if spec.batches.is_empty() || spec.batches.contains(&0) {
                    return Err(config_err("batches must be non-empty and positive"));
                }
                match spec.mode {
                    EmpiricalMode::Noise => {
                        if spec.n_draws.unwrap_or(0) < 2 {
                            return Err(config_err("noise mode requires n_draws >= 2"));
                        }
                    }
                    EmpiricalMode::Sharpness => {
                        let gamma = spec
                            .gamma
                            .ok_or_else(|| config_err("sharpness mode requires gamma"))?;
                        if !(gamma > 0.0) {
                            return Err(config_err("gamma must be positive"));
                        }
                        if spec.n_steps.unwrap_or(0) == 0 {
                            return Err(config_err("sharpness mode requires n_steps >= 1"));
                        }
                        if spec.n_seeds == 0 {
                            return Err(config_err("n_seeds must be >= 1"));
                        }
                    }
                }
                if spec.task == TaskKind::Logistic && spec.lambda.map_or(false, |l| l < 0.0) {
                    return Err(config_err("lambda must be non-negative"));
                }
            }
            ExperimentKind::Assumptions => {
                let spec = self.assumptions.as_ref().unwrap();
                if let Some(h) = spec.box_halfwidth {
                    if !(h > 0.0) {
                        return Err(config_err("box_halfwidth must be positive"));
                    }
                }
            }
        }
        Ok(notes)
    }

    fn init_diagnostics(
        &self,
        landscape: &Landscape,
        schedule: &Schedule,
        grid: &Grid,
        init: &InitSpec,
        notes: &mut Vec<String>,
    ) -> Result<()> {
        if let InitSpec::Gaussian { center, width } = init {
            if center.len() != grid.dim() {
                return Err(config_err("init center dimension mismatch"));
            }
            if !(*width > 0.0) {
                return Err(config_err("init width must be positive"));
            }
        }
        if let Some(eta) = schedule.eta_inf() {
            self.boundary_mass_diagnostic(landscape, eta, grid, notes);
        }
        Ok(())
    }

    /// Warn when the stationary density has visible mass on the grid boundary.
    fn boundary_mass_diagnostic(
        &self,
        landscape: &Landscape,
        eta: f64,
        grid: &Grid,
        notes: &mut Vec<String>,
    ) {
        let mut peak = f64::NEG_INFINITY;
        let mut boundary_worst: Option<(f64, String)> = None;
        for idx in 0..grid.n_cells() {
            let x = grid.center(idx);
            let log_p = -eta * landscape.value(&x);
            peak = peak.max(log_p);
        }
        for idx in crate::fpe::boundary_indices(grid) {
            let x = grid.center(idx);
            let log_p = -eta * landscape.value(&x);
            if boundary_worst.as_ref().map_or(true, |(b, _)| log_p > *b) {
                boundary_worst = Some((log_p, format!("{x:?}")));
            }
        }
        if let Some((log_p, loc)) = boundary_worst {
            let rel = (log_p - peak).exp();
            if rel > 1e-8 {
                notes.push(format!(
                    "boundary mass: stationary density at boundary cell {loc} is {rel:.2e} \
                     of its peak; widen the grid bounds"
                ));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KRAMERS_TOML: &str = r#"
[experiment]
kind = "kramers"
seed = 7

[landscape]
name = "double_well_1d"

[schedule]
kind = "constant"
gamma = 0.1
batch = 10.0
beta = 50.0

[kramers]
from_min = 0
to_min = 1
epsilon = 0.2
dt = 0.001
n_paths = 100
"#;

    #[test]
    fn parses_and_validates_kramers_config() {
        let cfg = ExperimentConfig::from_toml_str(KRAMERS_TOML).unwrap();
        assert_eq!(cfg.experiment.kind, ExperimentKind::Kramers);
        let notes = cfg.validate().unwrap();
        assert!(notes.iter().any(|n| n.contains("eta = 4")));
    }

    #[test]
    fn round_trips_through_serialization() {
        let cfg = ExperimentConfig::from_toml_str(KRAMERS_TOML).unwrap();
        let text = cfg.to_toml_string().unwrap();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.fingerprint().unwrap(), back.fingerprint().unwrap());
    }

    #[test]
    fn unknown_keys_are_errors() {
        let bad = KRAMERS_TOML.replace("n_paths = 100", "n_paths = 100\nn_pathz = 3");
        let err = ExperimentConfig::from_toml_str(&bad).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn mismatched_table_is_rejected() {
        let extra = format!("{KRAMERS_TOML}\n[stationary]\ngrid = {{ min = -3.0, max = 3.0, cells = 64 }}\n");
        let cfg = ExperimentConfig::from_toml_str(&extra).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("does not belong"), "{err}");
    }

    #[test]
    fn missing_table_is_rejected() {
        let cfg = ExperimentConfig::from_toml_str(
            "[experiment]\nkind = \"stationary\"\nseed = 1\n\n[landscape]\nname = \"quadratic\"\n",
        )
        .unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("requires a [stationary]"), "{err}");
    }

    #[test]
    fn unknown_landscape_lists_catalog() {
        let cfg = ExperimentConfig::from_toml_str(
            &KRAMERS_TOML.replace("double_well_1d", "triple_well"),
        )
        .unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("available"), "{err}");
    }

    #[test]
    fn small_grid_triggers_boundary_diagnostic() {
        let toml = r#"
[experiment]
kind = "stationary"
seed = 1

[landscape]
name = "quadratic"

[schedule]
kind = "constant"
gamma = 0.5
batch = 1.0
beta = 1.0

[stationary]
grid = { min = -1.0, max = 1.0, cells = 32 }
"#;
        let cfg = ExperimentConfig::from_toml_str(toml).unwrap();
        let notes = cfg.validate().unwrap();
        assert!(notes.iter().any(|n| n.contains("boundary mass")), "{notes:?}");
    }

    #[test]
    fn negative_dt_is_config_error() {
        let bad = KRAMERS_TOML.replace("dt = 0.001", "dt = -0.001");
        let cfg = ExperimentConfig::from_toml_str(&bad).unwrap();
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
