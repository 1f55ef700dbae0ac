//! Experiment dispatch: turn a validated config into artifacts on disk.
//!
//! Every experiment first renders its artifacts in memory and only touches
//! the filesystem once the whole computation has succeeded, so a failed run
//! leaves no partial files behind. The run manifest is written last.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use crate::asymptotics::{msgd_rate_constants, poincare_constant, theorem1_bound_check};
use crate::config::{
    EmpiricalMode, ExperimentConfig, ExperimentKind, InitSpec, SimMethod, TaskKind,
};
use crate::error::{Error, Result};
use crate::export::{density_binary, fmt_f64, Artifact, CsvBuilder, RunManifest};
use crate::fpe::{
    solve_fpe, solve_vfp, stationary_density, stationary_phase_density, weighted_l2_distance,
    DensityField, Grid, PhaseDensityField,
};
use crate::kramers::{eyring_kramers_time, mc_first_passage};
use crate::landscapes::{check_assumptions_with_box, Landscape, Verdict};
use crate::minibatch::{
    estimate_noise_moments, full_loss, isotropy_diagnostic, make_mixture_dataset,
    make_regression_dataset, median, per_sample_gradient_covariance, train_with_sharpness,
    Dataset, LossFamily,
};
use crate::schedule::Schedule;
use crate::sde::{
    run_ensemble, simulate_discrete_msgd, simulate_discrete_sgd, simulate_msgd_sde,
    simulate_sgd_sde,
};

/// Execute the experiment and write artifacts plus `manifest.json` to
/// `out_dir`.
pub fn run(config: &ExperimentConfig, out_dir: &Path, plot_data: bool) -> Result<RunManifest> {
    let start = Instant::now();
    config.validate()?;
    let artifacts = execute(config, plot_data)?;
    std::fs::create_dir_all(out_dir)?;
    for artifact in &artifacts {
        std::fs::write(out_dir.join(&artifact.name), &artifact.bytes)?;
    }
    let mut versions = BTreeMap::new();
    versions.insert("escape-lab".to_string(), env!("CARGO_PKG_VERSION").to_string());
    let manifest = RunManifest {
        fingerprint: config.fingerprint()?,
        master_seed: config.experiment.seed,
        artifacts: artifacts.iter().map(|a| a.name.clone()).collect(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        versions,
    };
    std::fs::write(out_dir.join("manifest.json"), manifest.to_json())?;
    Ok(manifest)
}

/// Run the experiment without touching the filesystem.
pub fn execute(config: &ExperimentConfig, plot_data: bool) -> Result<Vec<Artifact>> {
    let landscape = config.landscape.build()?;
    let fp = config.fingerprint()?;
    let seed = config.experiment.seed;
    let ctx = Ctx {
        landscape: &landscape,
        schedule: config.schedule.as_ref(),
        fingerprint: &fp,
        seed,
    };
    match config.experiment.kind {
        ExperimentKind::Simulate => run_simulate(config, &ctx),
        ExperimentKind::SolveFpe => run_fpe(config, &ctx),
        ExperimentKind::SolveVfp => run_vfp(config, &ctx),
        ExperimentKind::Kramers => run_kramers(config, &ctx),
        ExperimentKind::Stationary => run_stationary(config, &ctx),
        ExperimentKind::Rates => run_rates(config, &ctx),
        ExperimentKind::MsgdRates => run_msgd_rates(config, &ctx),
        ExperimentKind::Empirical => run_empirical(config, &ctx, plot_data),
        ExperimentKind::Assumptions => run_assumptions(config, &ctx),
    }
}

struct Ctx<'a> {
    landscape: &'a Landscape,
    schedule: Option<&'a Schedule>,
    fingerprint: &'a str,
    seed: u64,
}

impl<'a> Ctx<'a> {
    fn schedule(&self) -> &'a Schedule {
        self.schedule.expect("validated config has a schedule")
    }

    fn csv(&self, columns: &[&str]) -> CsvBuilder {
        let mut b = CsvBuilder::new(self.fingerprint, self.seed, columns);
        b.meta("landscape", self.landscape.fingerprint_text());
        b
    }
}

fn run_simulate(config: &ExperimentConfig, ctx: &Ctx) -> Result<Vec<Artifact>> {
    let spec = config.simulate.as_ref().unwrap();
    let landscape = ctx.landscape;
    let schedule = ctx.schedule();
    let dim = landscape.dim;
    let momentum = matches!(spec.method, SimMethod::MsgdSde | SimMethod::MsgdDiscrete);

    // (times, positions, velocities) per path, via the deterministic ensemble.
    let paths: Vec<(Vec<f64>, Vec<f64>, Option<Vec<f64>>)> =
        run_ensemble(spec.n_paths, ctx.seed, |_, rng| match spec.method {
            SimMethod::SgdSde => {
                let t = simulate_sgd_sde(
                    landscape,
                    schedule,
                    &spec.w0,
                    spec.dt.unwrap(),
                    spec.t_final.unwrap(),
                    spec.record_stride,
                    rng,
                )?;
                Ok((t.times, t.positions, None))
            }
            SimMethod::MsgdSde => {
                let v0 = spec.v0.clone().unwrap_or_else(|| vec![0.0; dim]);
                let t = simulate_msgd_sde(
                    landscape,
                    schedule,
                    spec.xi.unwrap(),
                    &spec.w0,
                    &v0,
                    spec.dt.unwrap(),
                    spec.t_final.unwrap(),
                    spec.record_stride,
                    rng,
                )?;
                Ok((t.times, t.positions, Some(t.velocities)))
            }
            SimMethod::SgdDiscrete => {
                let t = simulate_discrete_sgd(
                    landscape,
                    schedule,
                    &spec.w0,
                    spec.n_steps.unwrap(),
                    spec.record_stride,
                    rng,
                )?;
                Ok((t.times, t.positions, None))
            }
            SimMethod::MsgdDiscrete => {
                let t = simulate_discrete_msgd(
                    landscape,
                    schedule,
                    spec.xi.unwrap(),
                    &spec.w0,
                    spec.n_steps.unwrap(),
                    spec.record_stride,
                    rng,
                )?;
                Ok((t.times, t.positions, Some(t.velocities)))
            }
        })?;

    let mut columns: Vec<String> = vec!["t".into()];
    for i in 1..=dim {
        columns.push(format!("w_{i}"));
    }
    if momentum {
        for i in 1..=dim {
            columns.push(format!("v_{i}"));
        }
    }
    let col_refs: Vec<&str> = columns.iter().map(String::as_str).collect();

    let mut artifacts = Vec::new();
    let (times, positions, velocities) = &paths[0];
    let mut traj = ctx.csv(&col_refs);
    traj.meta("method", method_name(spec.method));
    for (k, &t) in times.iter().enumerate() {
        let mut row = vec![t];
        row.extend_from_slice(&positions[k * dim..(k + 1) * dim]);
        if let Some(v) = velocities {
            row.extend_from_slice(&v[k * dim..(k + 1) * dim]);
        }
        traj.row_f64(&row);
    }
    artifacts.push(traj.finish("trajectory.csv"));

    if spec.n_paths > 1 {
        let mut fin_cols: Vec<String> = vec!["path".into()];
        fin_cols.extend(col_refs.iter().skip(1).map(|c| c.to_string()));
        let fin_refs: Vec<&str> = fin_cols.iter().map(String::as_str).collect();
        let mut fin = ctx.csv(&fin_refs);
        for (p, (times, positions, velocities)) in paths.iter().enumerate() {
            let last = times.len() - 1;
            let mut row = vec![p as f64];
            row.extend_from_slice(&positions[last * dim..(last + 1) * dim]);
            if let Some(v) = velocities {
                row.extend_from_slice(&v[last * dim..(last + 1) * dim]);
            }
            fin.row_f64(&row);
        }
        artifacts.push(fin.finish("final_states.csv"));
    }
    Ok(artifacts)
}

fn method_name(m: SimMethod) -> &'static str {
    match m {
        SimMethod::SgdSde => "sgd-sde",
        SimMethod::MsgdSde => "msgd-sde",
        SimMethod::SgdDiscrete => "sgd-discrete",
        SimMethod::MsgdDiscrete => "msgd-discrete",
    }
}

fn gaussian_density(grid: Grid, center: &[f64], width: f64) -> Result<DensityField> {
    let values: Vec<f64> = (0..grid.n_cells())
        .map(|idx| {
            let x = grid.center(idx);
            let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
            (-0.5 * r2 / (width * width)).exp()
        })
        .collect();
    let mut field = DensityField::new(grid, values)?;
    field.normalize()?;
    Ok(field)
}

fn density_csv(ctx: &Ctx, field: &DensityField, name: &str) -> Artifact {
    let dim = field.grid.dim();
    let mut columns: Vec<String> = (1..=dim).map(|i| format!("w_{i}")).collect();
    columns.push("value".into());
    let col_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut csv = ctx.csv(&col_refs);
    for idx in 0..field.grid.n_cells() {
        let mut row = field.grid.center(idx);
        row.push(field.values[idx]);
        csv.row_f64(&row);
    }
    csv.finish(name)
}

fn mass_csv(ctx: &Ctx, times: &[f64], mass: &[f64]) -> Artifact {
    let mut csv = ctx.csv(&["t", "mass"]);
    for (&t, &m) in times.iter().zip(mass) {
        csv.row_f64(&[t, m]);
    }
    csv.finish("mass.csv")
}

fn run_fpe(config: &ExperimentConfig, ctx: &Ctx) -> Result<Vec<Artifact>> {
    let spec = config.fpe.as_ref().unwrap();
    let schedule = ctx.schedule();
    let grid = spec.grid.grid(ctx.landscape.dim)?;
    let p0 = match &spec.init {
        InitSpec::Gaussian { center, width } => gaussian_density(grid, center, *width)?,
        InitSpec::Stationary => {
            let eta = schedule.eta_inf().ok_or_else(|| {
                Error::Config("stationary init needs a limiting temperature".into())
            })?;
            stationary_density(ctx.landscape, &grid, eta)?
        }
    };
    let solution = solve_fpe(
        ctx.landscape,
        schedule,
        &p0,
        spec.dt,
        spec.t_final,
        spec.record_stride,
    )?;
    let final_density = solution.final_density();
    let t_last = *solution.times.last().unwrap();
    Ok(vec![
        density_csv(ctx, final_density, "density.csv"),
        density_binary(final_density, t_last, "density.bin"),
        mass_csv(ctx, &solution.times, &solution.mass),
    ])
}

fn run_vfp(config: &ExperimentConfig, ctx: &Ctx) -> Result<Vec<Artifact>> {
    let spec = config.vfp.as_ref().unwrap();
    let schedule = ctx.schedule();
    let w_axis = spec.w_grid.axis()?;
    let v_axis = spec.v_grid.axis()?;
    let eta_prime = schedule.eta(0.0) * (1.0 - spec.xi);
    let psi0 = match &spec.init {
        InitSpec::Gaussian { center, width } => {
            if center.len() != 2 {
                return Err(Error::Config("phase-space init center needs (w, v)".into()));
            }
            let (nw, nv) = (w_axis.n, v_axis.n);
            let values: Vec<f64> = (0..nw * nv)
                .map(|idx| {
                    let w = w_axis.center(idx / nv);
                    let v = v_axis.center(idx % nv);
                    let r2 = (w - center[0]).powi(2) + (v - center[1]).powi(2);
                    (-0.5 * r2 / (width * width)).exp()
                })
                .collect();
            let mut f = PhaseDensityField::new(w_axis.clone(), v_axis.clone(), values)?;
            f.normalize()?;
            f
        }
        InitSpec::Stationary => {
            stationary_phase_density(ctx.landscape, &w_axis, &v_axis, eta_prime)?
        }
    };
    let solution = solve_vfp(
        ctx.landscape,
        schedule,
        spec.xi,
        &psi0,
        spec.dt,
        spec.t_final,
        spec.record_stride,
    )?;
    let psi = solution.final_density();

    let mut phase = ctx.csv(&["w", "v", "value"]);
    phase.meta("eta_prime", fmt_f64(solution.eta_prime));
    let nv = v_axis.n;
    for (idx, &val) in psi.values.iter().enumerate() {
        phase.row_f64(&[w_axis.center(idx / nv), v_axis.center(idx % nv), val]);
    }

    let mut wm = ctx.csv(&["w", "value"]);
    for (i, m) in psi.w_marginal().iter().enumerate() {
        wm.row_f64(&[w_axis.center(i), *m]);
    }
    let mut vm = ctx.csv(&["v", "value"]);
    for (j, m) in psi.v_marginal().iter().enumerate() {
        vm.row_f64(&[v_axis.center(j), *m]);
    }

    Ok(vec![
        phase.finish("phase_density.csv"),
        wm.finish("w_marginal.csv"),
        vm.finish("v_marginal.csv"),
        mass_csv(ctx, &solution.times, &solution.mass),
    ])
}

fn run_kramers(config: &ExperimentConfig, ctx: &Ctx) -> Result<Vec<Artifact>> {
    let spec = config.kramers.as_ref().unwrap();
    let schedule = ctx.schedule();
    let eta = schedule.eta(0.0);
    let saddle_index = ctx
        .landscape
        .saddles
        .iter()
        .position(|s| s.barriers.contains_key(&spec.from_min))
        .ok_or_else(|| {
            Error::Hypothesis(format!("no saddle adjacent to minimum {}", spec.from_min))
        })?;
    let formula = eyring_kramers_time(ctx.landscape, spec.from_min, saddle_index, eta)?;
    let t_cap = spec.t_cap.unwrap_or(50.0 * formula);
    let stats = mc_first_passage(
        ctx.landscape,
        schedule,
        spec.from_min,
        spec.to_min,
        spec.epsilon,
        spec.dt,
        t_cap,
        spec.n_paths,
        ctx.seed,
    )?;
    let mut csv = ctx.csv(&[
        "eta",
        "epsilon",
        "formula_time",
        "mc_mean",
        "mc_se",
        "mc_median",
        "n_paths",
        "censored",
    ]);
    csv.meta("from_min", spec.from_min.to_string());
    csv.meta("to_min", spec.to_min.to_string());
    if stats.inconclusive() {
        csv.meta("warning", "more than 10% of paths censored; mean is a lower bound");
    }
    csv.row_f64(&[
        eta,
        spec.epsilon,
        formula,
        stats.mean,
        stats.std_err,
        stats.median,
        stats.n_paths as f64,
        stats.n_censored as f64,
    ]);
    Ok(vec![csv.finish("escape.csv")])
}

fn run_stationary(config: &ExperimentConfig, ctx: &Ctx) -> Result<Vec<Artifact>> {
    let spec = config.stationary.as_ref().unwrap();
    let eta = ctx.schedule().eta_inf().ok_or_else(|| {
        Error::Config("stationary experiments need a limiting temperature".into())
    })?;
    let grid = spec.grid.grid(ctx.landscape.dim)?;
    let field = stationary_density(ctx.landscape, &grid, eta)?;
    Ok(vec![
        density_csv(ctx, &field, "density.csv"),
        density_binary(&field, 0.0, "density.bin"),
    ])
}

fn run_rates(config: &ExperimentConfig, ctx: &Ctx) -> Result<Vec<Artifact>> {
    let spec = config.rates.as_ref().unwrap();
    let schedule = ctx.schedule();
    let eta = schedule
        .eta_inf()
        .ok_or_else(|| Error::Config("rate experiments need a limiting temperature".into()))?;
    let grid = spec.grid.grid(1)?;
    let p_inf = stationary_density(ctx.landscape, &grid, eta)?;
    let c_p = poincare_constant(ctx.landscape, &grid)?;

    // Initial profile: the stationary density translated by init_shift.
    let shifted = Landscape::builtin(&config.landscape.name, &config.landscape.parameters)?;
    let values: Vec<f64> = (0..grid.n_cells())
        .map(|idx| {
            let x = grid.center(idx)[0] - spec.init_shift;
            (-eta * shifted.value(&[x])).exp()
        })
        .collect();
    let mut p0 = DensityField::new(grid.clone(), values)?;
    p0.normalize()?;

    let solution = solve_fpe(
        ctx.landscape,
        schedule,
        &p0,
        spec.dt,
        spec.t_final,
        spec.record_stride,
    )?;

    // The squared distance obeys rate c_p * gamma beta / (2 M); the distance
    // itself obeys half that.
    let diffusion = schedule.gamma(0.0) * schedule.beta() / (2.0 * schedule.batch(0.0));
    let rate_sq = c_p * diffusion;
    let check = theorem1_bound_check(&solution, &p_inf, 0.5 * rate_sq, 0.05)?;

    let weight: Vec<f64> = p_inf.values.iter().map(|v| 1.0 / v.max(1e-290)).collect();
    let mut csv = ctx.csv(&["t", "measured", "bound", "satisfied"]);
    csv.meta("c_p", fmt_f64(c_p));
    csv.meta("eta_inf", fmt_f64(eta));
    csv.meta("bound_rate_squared", fmt_f64(rate_sq));
    csv.meta("fitted_rate_squared", fmt_f64(2.0 * check.fit.rate));
    csv.meta("fit_residual", fmt_f64(check.fit.residual));
    csv.meta("bound_holds", if check.holds { "true" } else { "false" });
    csv.meta("bound_margin", fmt_f64(check.margin));
    let d0 = weighted_l2_distance(&solution.snapshots[0], &p_inf, &weight)?;
    for (t, snap) in solution.times.iter().zip(&solution.snapshots) {
        let d = weighted_l2_distance(snap, &p_inf, &weight)?;
        let measured = d * d;
        let bound = d0 * d0 * (-rate_sq * t).exp();
        let ok = measured <= bound * 1.05 + 1e-300;
        csv.row(&[
            fmt_f64(*t),
            fmt_f64(measured),
            fmt_f64(bound),
            (if ok { "true" } else { "false" }).to_string(),
        ]);
    }
    Ok(vec![csv.finish("rates.csv")])
}

fn run_msgd_rates(config: &ExperimentConfig, ctx: &Ctx) -> Result<Vec<Artifact>> {
    let spec = config.msgd_rates.as_ref().unwrap();
    let schedule = ctx.schedule();
    let c_p = match (&spec.c_p, &spec.grid) {
        (Some(c_p), None) => *c_p,
        (None, Some(g)) => poincare_constant(ctx.landscape, &g.grid(1)?)?,
        _ => unreachable!("validated config"),
    };
    let constants = msgd_rate_constants(
        schedule.gamma(0.0),
        spec.xi,
        schedule.batch(0.0),
        schedule.beta(),
        ctx.landscape.convexity_split_constant,
        spec.b,
        c_p,
        ctx.landscape.dim,
    )?;
    let mut csv = ctx.csv(&["constant", "value"]);
    csv.meta("c_p", fmt_f64(c_p));
    let rows: [(&str, f64); 8] = [
        ("case", constants.case as f64),
        ("mu", constants.mu),
        ("c_upper", constants.c_upper),
        ("c_hat", constants.c_hat),
        ("lambda_min", constants.lambda_min),
        ("mu_hat", constants.mu_hat),
        ("rate", constants.rate),
        ("prefactor", constants.prefactor),
    ];
    for (name, value) in rows {
        csv.row(&[name.to_string(), fmt_f64(value)]);
    }
    Ok(vec![csv.finish("msgd_rates.csv")])
}

fn empirical_dataset(config: &ExperimentConfig, seed: u64) -> Result<(Dataset, LossFamily)> {
    let spec = config.empirical.as_ref().unwrap();
    match spec.task {
        TaskKind::Regression => Ok((
            make_regression_dataset(
                spec.n_samples,
                spec.dim,
                spec.noise_std.unwrap_or(0.1),
                seed,
            )?,
            LossFamily::Squared,
        )),
        TaskKind::Logistic => Ok((
            make_mixture_dataset(
                spec.n_samples,
                spec.dim,
                spec.separation.unwrap_or(2.0),
                seed,
            )?,
            LossFamily::RegularizedCrossEntropy {
                lambda: spec.lambda.unwrap_or(0.1),
            },
        )),
    }
}

fn run_empirical(config: &ExperimentConfig, ctx: &Ctx, plot_data: bool) -> Result<Vec<Artifact>> {
    let spec = config.empirical.as_ref().unwrap();
    let (ds, loss) = empirical_dataset(config, ctx.seed)?;
    match spec.mode {
        EmpiricalMode::Noise => {
            let w = vec![0.0; spec.dim];
            let exact = per_sample_gradient_covariance(&ds, &loss, &w);
            let mut moments_csv = ctx.csv(&["batch", "component", "mean", "std_err"]);
            let mut cov_csv = ctx.csv(&["batch", "i", "j", "empirical", "exact"]);
            let mut summary = ctx.csv(&[
                "batch",
                "frobenius_rel_err",
                "isotropy",
                "max_abs_mean_over_se",
            ]);
            for (k, &m) in spec.batches.iter().enumerate() {
                let moments = estimate_noise_moments(
                    &ds,
                    &loss,
                    &w,
                    m,
                    spec.n_draws.unwrap(),
                    ctx.seed.wrapping_add(1 + k as u64),
                )?;
                let mut worst = 0.0f64;
                for (i, (&mu, &se)) in moments.mean.iter().zip(&moments.mean_std_err).enumerate() {
                    moments_csv.row_f64(&[m as f64, i as f64, mu, se]);
                    if se > 0.0 {
                        worst = worst.max(mu.abs() / se);
                    }
                }
                let mut num = 0.0;
                let mut den = 0.0;
                for i in 0..spec.dim {
                    for j in 0..spec.dim {
                        let e = moments.covariance[(i, j)];
                        let x = exact[(i, j)];
                        cov_csv.row_f64(&[m as f64, i as f64, j as f64, e, x]);
                        num += (e - x) * (e - x);
                        den += x * x;
                    }
                }
                summary.row_f64(&[
                    m as f64,
                    (num / den.max(1e-290)).sqrt(),
                    isotropy_diagnostic(&moments.covariance),
                    worst,
                ]);
            }
            Ok(vec![
                moments_csv.finish("noise_moments.csv"),
                cov_csv.finish("noise_covariance.csv"),
                summary.finish("noise_summary.csv"),
            ])
        }
        EmpiricalMode::Sharpness => {
            let gamma = spec.gamma.unwrap();
            let n_steps = spec.n_steps.unwrap();
            let w0 = vec![0.0; spec.dim];
            let mut tidy = ctx.csv(&["batch", "run", "step", "loss", "frobenius", "det"]);
            tidy.meta("gamma", fmt_f64(gamma));
            let mut summary = ctx.csv(&[
                "batch",
                "median_terminal_frobenius",
                "median_terminal_loss",
            ]);
            let mut series = Vec::new();
            for (k, &m) in spec.batches.iter().enumerate() {
                let mut terminal_frob = Vec::new();
                let mut terminal_loss = Vec::new();
                // log-Frobenius per recorded step, across runs.
                let mut per_step: Vec<Vec<f64>> = Vec::new();
                let mut steps_axis: Vec<usize> = Vec::new();
                for run in 0..spec.n_seeds {
                    let trace = train_with_sharpness(
                        &ds,
                        &loss,
                        &w0,
                        gamma,
                        m,
                        n_steps,
                        spec.record_stride,
                        ctx.seed
                            .wrapping_add(1_000_000 * (k as u64 + 1))
                            .wrapping_add(run as u64),
                    )?;
                    if run == 0 {
                        steps_axis = trace.steps.clone();
                        per_step = vec![Vec::with_capacity(spec.n_seeds); trace.steps.len()];
                    }
                    for (row, (((&s, &l), &f), &d)) in trace
                        .steps
                        .iter()
                        .zip(&trace.losses)
                        .zip(&trace.sharpness_frobenius)
                        .zip(&trace.sharpness_det)
                        .enumerate()
                    {
                        tidy.row_f64(&[m as f64, run as f64, s as f64, l, f, d]);
                        per_step[row].push(f.max(1e-290).ln());
                    }
                    terminal_frob.push(*trace.sharpness_frobenius.last().unwrap());
                    terminal_loss.push(full_loss(&ds, &loss, &trace.final_w));
                }
                summary.row_f64(&[
                    m as f64,
                    median(&terminal_frob)?,
                    median(&terminal_loss)?,
                ]);
                if plot_data {
                    let mut s = ctx.csv(&["step", "median_log_frobenius"]);
                    s.meta("gamma", fmt_f64(gamma));
                    s.meta("batch", m.to_string());
                    for (row, &step) in steps_axis.iter().enumerate() {
                        s.row_f64(&[step as f64, median(&per_step[row])?]);
                    }
                    series.push(s.finish(&format!("series_M{m}.csv")));
                }
            }
            let mut artifacts = vec![
                tidy.finish("sharpness.csv"),
                summary.finish("sharpness_summary.csv"),
            ];
            artifacts.extend(series);
            Ok(artifacts)
        }
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn run_assumptions(config: &ExperimentConfig, ctx: &Ctx) -> Result<Vec<Artifact>> {
    let spec = config.assumptions.as_ref().unwrap();
    let radii: Vec<f64> = (1..=8).map(|k| k as f64).collect();
    let report = check_assumptions_with_box(
        ctx.landscape,
        &radii,
        64,
        spec.box_halfwidth.unwrap_or(5.0),
    )?;
    let mut csv = ctx.csv(&["assumption", "radius", "quantity", "value", "verdict"]);
    csv.meta("m_w", fmt_f64(report.m_w));
    csv.meta("c_l", fmt_f64(report.c_l));
    csv.meta("b", fmt_f64(report.b));
    for (entry, label) in [
        (&report.a1, "A1"),
        (&report.a2, "A2"),
        (&report.a3, "A3"),
        (&report.a4, "A4"),
    ] {
        let verdict = verdict_str(entry.holds);
        for row in &entry.evidence {
            csv.row(&[
                label.to_string(),
                fmt_f64(row.radius),
                row.quantity.to_string(),
                fmt_f64(row.value),
                verdict.to_string(),
            ]);
        }
        if entry.evidence.is_empty() {
            csv.row(&[
                label.to_string(),
                fmt_f64(0.0),
                "summary".to_string(),
                fmt_f64(0.0),
                verdict.to_string(),
            ]);
        }
    }
    Ok(vec![csv.finish("assumptions.csv")])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn artifact_text(artifacts: &[Artifact], name: &str) -> String {
        let a = artifacts.iter().find(|a| a.name == name).unwrap_or_else(|| {
            panic!("missing artifact {name}; have {:?}",
                artifacts.iter().map(|a| &a.name).collect::<Vec<_>>())
        });
        String::from_utf8(a.bytes.clone()).unwrap()
    }

    #[test]
    fn stationary_run_recovers_gaussian_variance() {
        let toml = r#"
[experiment]
kind = "stationary"
seed = 3

[landscape]
name = "quadratic"

[schedule]
kind = "constant"
gamma = 0.5
batch = 1.0
beta = 1.0

[stationary]
grid = { min = -6.0, max = 6.0, cells = 240 }
"#;
        let cfg = ExperimentConfig::from_toml_str(toml).unwrap();
        cfg.validate().unwrap();
        let artifacts = execute(&cfg, false).unwrap();
        let text = artifact_text(&artifacts, "density.csv");
        let mut var = 0.0;
        let mut mass = 0.0;
        let h = 12.0 / 240.0;
        for line in text.lines().skip_while(|l| l.starts_with('#')).skip(1) {
            let mut it = line.split(',');
            let w: f64 = it.next().unwrap().parse().unwrap();
            let p: f64 = it.next().unwrap().parse().unwrap();
            var += w * w * p * h;
            mass += p * h;
        }
        // eta = 4 makes the stationary density N(0, 1/4).
        assert!((mass - 1.0).abs() < 1e-10, "mass {mass}");
        assert!((var - 0.25).abs() < 1e-3, "variance {var}");
    }

    #[test]
    fn kramers_run_emits_escape_row() {
        let toml = r#"
[experiment]
kind = "kramers"
seed = 11

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
dt = 0.005
n_paths = 400
"#;
        let cfg = ExperimentConfig::from_toml_str(toml).unwrap();
        let artifacts = execute(&cfg, false).unwrap();
        let text = artifact_text(&artifacts, "escape.csv");
        let data = text.lines().find(|l| !l.starts_with('#') && !l.starts_with("eta")).unwrap();
        let cells: Vec<f64> = data.split(',').map(|c| c.parse().unwrap()).collect();
        let formula = cells[2];
        let mc_mean = cells[3];
        assert!((formula - 12.0774).abs() < 1e-3);
        assert!((mc_mean - formula).abs() / formula < 0.2, "mc {mc_mean}");
    }

    #[test]
    fn execute_is_deterministic() {
        let toml = r#"
[experiment]
kind = "simulate"
seed = 5

[landscape]
name = "double_well_1d"

[schedule]
kind = "constant"
gamma = 0.05
batch = 4.0
beta = 8.0

[simulate]
method = "sgd-sde"
w0 = [-1.0]
dt = 0.002
t_final = 2.0
record_stride = 10
n_paths = 8
"#;
        let cfg = ExperimentConfig::from_toml_str(toml).unwrap();
        let a = execute(&cfg, false).unwrap();
        let b = execute(&cfg, false).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.bytes, y.bytes, "artifact {} differs", x.name);
        }
    }

    #[test]
    fn msgd_rates_run_reports_worked_case() {
        // gamma = 1, xi = 0, quadratic(1): ratio 1 vs 2 C_L = 2 -> case 1.
        let toml = r#"
[experiment]
kind = "msgd-rates"
seed = 1

[landscape]
name = "quadratic"

[schedule]
kind = "constant"
gamma = 1.0
batch = 1.0
beta = 2.0

[msgd_rates]
xi = 0.0
c_p = 1.0
"#;
        let cfg = ExperimentConfig::from_toml_str(toml).unwrap();
        let artifacts = execute(&cfg, false).unwrap();
        let text = artifact_text(&artifacts, "msgd_rates.csv");
        assert!(text.contains("mu,1"), "{text}");
        assert!(text.contains("lambda_min,0.5"), "{text}");
    }

    #[test]
    fn run_writes_manifest_and_cleans_nothing_on_success() {
        let dir = tempfile::tempdir().unwrap();
        let toml = r#"
[experiment]
kind = "assumptions"
seed = 2

[landscape]
name = "quadratic"

[assumptions]
"#;
        let cfg = ExperimentConfig::from_toml_str(toml).unwrap();
        let manifest = run(&cfg, dir.path(), false).unwrap();
        assert!(manifest.artifacts.contains(&"assumptions.csv".to_string()));
        assert!(dir.path().join("assumptions.csv").exists());
        let json = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        assert!(json.contains(&manifest.fingerprint));
    }

    #[test]
    fn failed_run_leaves_no_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        // Grid far too coarse in time: the explicit step-size guard trips.
        let toml = r#"
[experiment]
kind = "solve-fpe"
seed = 2

[landscape]
name = "quadratic"

[schedule]
kind = "constant"
gamma = 0.5
batch = 1.0
beta = 1.0

[fpe]
grid = { min = -6.0, max = 6.0, cells = 200 }
init = { profile = "stationary" }
dt = 0.5
t_final = 5.0
"#;
        let cfg = ExperimentConfig::from_toml_str(toml).unwrap();
        let err = run(&cfg, &out, false).unwrap_err();
        assert_eq!(err.exit_code(), 3, "{err}");
        assert!(!out.exists());
    }
}
