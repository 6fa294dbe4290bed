use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, ParticleSpec};
use super::initial::{initial_condition, taylor_green, taylor_green_exact};
use super::io::{write_json, write_manifest, write_snapshot, write_table, write_timeseries, RunManifest};
use crate::diagnostics::{
    correlation, divergence_norm, energy_audit, eulerian_acceleration, galilean_invariance_report, observed_order,
    transport_check, EnergyBudgetRow, GalileanReport, ParticleSet, TransportOptions,
};
use crate::error::{Error, Result};
use crate::fields::{l2_norm, Grid, L2Norm};
use crate::models::{
    galilean_alt_force, incompressible_pressure, project, stable_dt, ExtraForce, ForcingSpec, ModelConfig, ModelKind,
    PoissonSolver, Simulation, State,
};

/// Finished run: its typed report, every file written (manifest excluded)
/// and the manifest.
#[derive(Clone, Debug)]
pub struct RunOutcome<R> {
    pub report: R,
    pub files: Vec<PathBuf>,
    pub manifest: RunManifest,
}

impl<R: Serialize> RunOutcome<R> {
    fn erase(self) -> Result<RunOutcome<serde_json::Value>> {
        Ok(RunOutcome { report: serde_json::to_value(&self.report)?, files: self.files, manifest: self.manifest })
    }
}

/// Smallest number of equal steps of size at most `dt_max` covering
/// `t_final`, and that step.
pub fn uniform_steps(t_final: f64, dt_max: f64) -> (usize, f64) {
    let steps = ((t_final / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (steps, t_final / steps as f64)
}

/// Stability bound with the dimensionless velocity scale of at least one.
fn step_bound(state: &State, cfg: &ModelConfig, cfl: f64) -> f64 {
    stable_dt(state, cfg, cfl).min(cfl * state.grid().spacing())
}

fn grid_of(cfg: &ExperimentConfig) -> Result<Grid> {
    Grid::new(cfg.n, cfg.period)
}

fn steps_for(cfg: &ExperimentConfig, state: &State, model: &ModelConfig) -> (usize, f64) {
    uniform_steps(cfg.t_final, cfg.dt.unwrap_or_else(|| step_bound(state, model, cfg.cfl)))
}

fn finish<R: Serialize>(
    dir: &Path,
    cfg: &ExperimentConfig,
    start: Instant,
    mut files: Vec<PathBuf>,
    report: R,
) -> Result<RunOutcome<R>> {
    let report_path = dir.join("report.json");
    write_json(&report_path, &report)?;
    files.push(report_path);
    let manifest = write_manifest(dir, serde_json::to_value(cfg)?, start.elapsed().as_secs_f64(), &files)?;
    Ok(RunOutcome { report, files, manifest })
}

fn require(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    cfg.validate()?;
    if cfg.experiment != kind {
        return Err(Error::Experiment(format!("expected experiment {kind:?}, got {:?}", cfg.experiment)));
    }
    Ok(())
}

fn sanity(what: &str, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Experiment(format!("sanity check failed: {what}")))
    }
}

/// Least-squares slope of `log y` against `log x`.
fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// Rolling three-sample window turning a time-stepped run into budget rows.
struct BudgetStream<'a> {
    forcing: &'a ForcingSpec,
    cfg: &'a ModelConfig,
    window: Vec<State>,
    rows: Vec<EnergyBudgetRow>,
}

impl<'a> BudgetStream<'a> {
    fn new(forcing: &'a ForcingSpec, cfg: &'a ModelConfig) -> Self {
        Self { forcing, cfg, window: Vec::with_capacity(3), rows: Vec::new() }
    }

    fn push(&mut self, state: &State) -> Result<()> {
        if self.window.len() == 3 {
            self.window.remove(0);
        }
        self.window.push(state.clone());
        if self.window.len() == 3 {
            self.rows.extend(energy_audit(&self.window, self.forcing, self.cfg)?);
        }
        Ok(())
    }
}

/// Advances `sim` by `steps` steps of `dt`, calling `each` with the step
/// index and state after every step (and once with index 0 before).
fn drive(sim: &mut Simulation, steps: usize, dt: f64, mut each: impl FnMut(usize, &State) -> Result<()>) -> Result<()> {
    each(0, sim.state())?;
    for k in 1..=steps {
        sim.step(dt)?;
        each(k, sim.state())?;
    }
    Ok(())
}

// ---------------------------------------------------------------- Taylor–Green

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorGreenLevel {
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    pub l2_error: f64,
    pub divergence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorGreenReport {
    pub re: f64,
    pub t_final: f64,
    pub levels: Vec<TaylorGreenLevel>,
    pub observed_order: f64,
}

/// Runs the projection solver from the Taylor–Green state with `steps`
/// equal steps to `t_final`; returns the final state and its L2 velocity
/// error against the exact decaying solution.
pub fn taylor_green_error(grid: Grid, re: f64, t_final: f64, steps: usize) -> Result<(State, f64)> {
    let cfg = ModelConfig::incompressible(re);
    let mut sim = Simulation::new(taylor_green(grid), cfg, ForcingSpec::Zero)?;
    if t_final > 0.0 {
        let dt = t_final / steps as f64;
        for _ in 0..steps {
            sim.step(dt)?;
        }
    }
    let exact = taylor_green_exact(grid, re, t_final);
    let err = sim.state().v.sub(&exact.v).l2_norm();
    Ok((sim.into_state(), err))
}

/// Projection solver against the exact Taylor–Green decay on `n` and `2n`
/// cells with the step halved along with the spacing.
pub fn run_taylor_green(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome<TaylorGreenReport>> {
    require(cfg, ExperimentKind::TaylorGreen)?;
    let start = Instant::now();
    fs::create_dir_all(dir)?;
    let re = cfg.model.re;
    let coarse = grid_of(cfg)?;
    let dt_max = cfg.dt.unwrap_or(cfg.cfl * coarse.spacing());
    let (steps, _) = uniform_steps(cfg.t_final, dt_max);

    let mut files = Vec::new();
    let mut levels = Vec::new();
    for (n, steps) in [(cfg.n, steps), (2 * cfg.n, 2 * steps)] {
        let grid = Grid::new(n, cfg.period)?;
        let (state, l2_error) = taylor_green_error(grid, re, cfg.t_final, steps)?;
        sanity("finite Taylor–Green error", l2_error.is_finite())?;
        files.extend(write_snapshot(&state, &dir.join(format!("final_n{n}")))?);
        levels.push(TaylorGreenLevel { n, dt: cfg.t_final / steps as f64, steps, l2_error, divergence: divergence_norm(&state) });
    }
    let table = dir.join("errors.csv");
    write_table(&table, &["n", "dt", "l2_error"], &levels.iter().map(|l| vec![l.n as f64, l.dt, l.l2_error]).collect::<Vec<_>>())?;
    files.push(table);
    let observed_order = observed_order(levels[0].l2_error, levels[1].l2_error);
    finish(dir, cfg, start, files, TaylorGreenReport { re, t_final: cfg.t_final, levels, observed_order })
}

// ---------------------------------------------------------------- K sweep

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMember {
    pub k: f64,
    pub dt: f64,
    pub steps: usize,
    /// `max_t ‖∇·v‖₂`, including the initial state.
    pub max_divergence: Option<f64>,
    /// `‖v_K - v_inc‖₂` at `t_final`.
    pub terminal_gap: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSweepReport {
    pub members: Vec<SweepMember>,
    pub reference_dt: f64,
    pub reference_steps: usize,
    pub reference_divergence: f64,
    pub divergence_slope: Option<f64>,
    pub terminal_gap_slope: Option<f64>,
    pub divergence_decreasing: bool,
    pub terminal_gap_decreasing: bool,
}

/// Well-prepared data for bulk modulus `model.k`: the solenoidal part of
/// `base`, plus its compressive part scaled by `k_min/K`, with the
/// incompressible pressure.
pub fn well_prepared_state(base: &State, model: &ModelConfig, forcing: &ForcingSpec, k_min: f64) -> Result<State> {
    let (solenoidal, _) = project(&base.v, &PoissonSolver::default(), None)?;
    let compressive = base.v.sub(&solenoidal);
    let mut v = solenoidal;
    v.axpy(k_min / model.k, &compressive);
    let p = incompressible_pressure(&v, base.time, forcing, model, None)?;
    State::new(v, p, base.time)
}

fn sweep_initial(base: &State, model: &ModelConfig, forcing: &ForcingSpec, k_min: f64, well_prepared: bool) -> Result<State> {
    if well_prepared {
        well_prepared_state(base, model, forcing, k_min)
    } else {
        Ok(base.clone())
    }
}

fn sweep_member(
    base: &State,
    model: &ModelConfig,
    cfg: &ExperimentConfig,
    k_min: f64,
    reference: Option<&State>,
) -> (SweepMember, Option<State>) {
    let start = match sweep_initial(base, model, &cfg.forcing, k_min, cfg.well_prepared) {
        Ok(s) => s,
        Err(e) => {
            let m = SweepMember { k: model.k, dt: 0.0, steps: 0, max_divergence: None, terminal_gap: None, error: Some(e.to_string()) };
            return (m, None);
        }
    };
    let (steps, dt) = steps_for(cfg, &start, model);
    let mut member = SweepMember { k: model.k, dt, steps, max_divergence: None, terminal_gap: None, error: None };
    let mut max_div = 0.0f64;
    let run = Simulation::new(start, model.clone(), cfg.forcing.clone()).and_then(|mut sim| {
        drive(&mut sim, steps, dt, |_, s| {
            max_div = max_div.max(divergence_norm(s));
            Ok(())
        })?;
        Ok(sim.into_state())
    });
    match run {
        Ok(state) => {
            member.max_divergence = Some(max_div);
            member.terminal_gap = reference.map(|r| state.v.sub(&r.v).l2_norm());
            (member, Some(state))
        }
        Err(e) => {
            member.error = Some(e.to_string());
            (member, None)
        }
    }
}

/// Runs the quasi-incompressible model for every K of the list and the
/// projection reference from the projected initial velocity.
///
/// Members run concurrently; a failing member is reported and the sweep
/// continues, but the run then fails without a manifest.
pub fn run_k_sweep(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome<KSweepReport>> {
    require(cfg, ExperimentKind::KSweep)?;
    if !cfg.model.uses_bulk_modulus() {
        return Err(Error::Experiment("k_sweep needs a model with a bulk modulus".into()));
    }
    let start = Instant::now();
    fs::create_dir_all(dir)?;
    let grid = grid_of(cfg)?;
    let base = initial_condition(&cfg.initial_condition, grid, cfg.seed)?;
    let ks = cfg.k_list.clone().expect("validated");
    let k_min = ks.iter().cloned().fold(f64::INFINITY, f64::min);

    // reference: projection solver with a step well below every member's
    // advective bound
    let inc_cfg = ModelConfig { model: ModelKind::Incompressible, ..cfg.model.clone() };
    let (v0, _) = project(&base.v, &PoissonSolver::default(), None)?;
    let p0 = incompressible_pressure(&v0, base.time, &cfg.forcing, &inc_cfg, None)?;
    let (reference_steps, reference_dt) = uniform_steps(cfg.t_final, cfg.cfl * grid.spacing() / 8.0);
    let mut reference_sim = Simulation::new(State::new(v0, p0, base.time)?, inc_cfg, cfg.forcing.clone())?;
    let reference = drive(&mut reference_sim, reference_steps, reference_dt, |_, _| Ok(())).map(|_| reference_sim.into_state());
    let reference = reference?;

    let members: Vec<(SweepMember, Option<State>)> = ks
        .par_iter()
        .map(|&k| sweep_member(&base, &ModelConfig { k, ..cfg.model.clone() }, cfg, k_min, Some(&reference)))
        .collect();

    let mut files = write_snapshot(&reference, &dir.join("reference"))?;
    for (i, (_, state)) in members.iter().enumerate() {
        if let Some(s) = state {
            files.extend(write_snapshot(s, &dir.join(format!("member_{i:02}")))?);
        }
    }
    let table = dir.join("k_sweep.csv");
    let rows: Vec<Vec<f64>> = members
        .iter()
        .map(|(m, _)| {
            vec![m.k, m.dt, m.steps as f64, m.max_divergence.unwrap_or(f64::NAN), m.terminal_gap.unwrap_or(f64::NAN)]
        })
        .collect();
    write_table(&table, &["k", "dt", "steps", "max_divergence", "terminal_gap"], &rows)?;
    files.push(table);

    let members: Vec<SweepMember> = members.into_iter().map(|(m, _)| m).collect();
    let ok: Vec<&SweepMember> = members.iter().filter(|m| m.error.is_none()).collect();
    let k_ok: Vec<f64> = ok.iter().map(|m| m.k).collect();
    let divs: Vec<f64> = ok.iter().filter_map(|m| m.max_divergence).collect();
    let gaps: Vec<f64> = ok.iter().filter_map(|m| m.terminal_gap).collect();
    let slope = |y: &[f64]| (y.len() >= 2 && y.iter().all(|v| *v > 0.0)).then(|| log_log_slope(&k_ok, y));
    let report = KSweepReport {
        reference_dt,
        reference_steps,
        reference_divergence: divergence_norm(&reference),
        divergence_slope: slope(&divs),
        terminal_gap_slope: slope(&gaps),
        divergence_decreasing: ok.len() == members.len() && strictly_decreasing(&divs),
        terminal_gap_decreasing: ok.len() == members.len() && strictly_decreasing(&gaps),
        members,
    };
    if let Some(bad) = report.members.iter().find(|m| m.error.is_some()) {
        write_json(&dir.join("report.json"), &report)?;
        return Err(Error::Experiment(format!(
            "k_sweep member K = {} failed: {}",
            bad.k,
            bad.error.as_deref().unwrap_or_default()
        )));
    }
    finish(dir, cfg, start, files, report)
}

// ---------------------------------------------------------------- energy audit

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyAuditReport {
    pub dt: f64,
    pub steps: usize,
    pub sample_interval: f64,
    /// Energies of the shared initial state in both runs.
    pub initial_energy: [f64; 2],
    /// `max |residual|` with the extra force.
    pub temam_residual: f64,
    /// `max |residual - defect_predicted|` without it.
    pub none_defect_gap: f64,
    pub none_max_defect: f64,
    pub none_max_dissipation: f64,
    pub residual_defect_correlation: Option<f64>,
    /// Largest increase of `e_kin + e_press` between samples, per unit time.
    pub temam_max_energy_rate: f64,
    pub temam_energy_non_increasing: bool,
}

fn budget_run(start: &State, model: &ModelConfig, forcing: &ForcingSpec, steps: usize, dt: f64, every: usize) -> Result<Vec<EnergyBudgetRow>> {
    let mut sim = Simulation::new(start.clone(), model.clone(), forcing.clone())?;
    let mut stream = BudgetStream::new(forcing, model);
    drive(&mut sim, steps, dt, |k, s| if k % every == 0 { stream.push(s) } else { Ok(()) })?;
    Ok(stream.rows)
}

fn energy_at(state: &State, model: &ModelConfig) -> f64 {
    let e = 0.5 * crate::fields::integrate(&state.v.magnitude_sq());
    if model.uses_bulk_modulus() {
        e + crate::fields::integrate(&state.p.mul(&state.p)) / (2.0 * model.k)
    } else {
        e
    }
}

/// Paired runs with and without the extra force from identical data.
pub fn run_energy_audit(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome<EnergyAuditReport>> {
    require(cfg, ExperimentKind::EnergyAudit)?;
    let start = Instant::now();
    fs::create_dir_all(dir)?;
    let grid = grid_of(cfg)?;
    let init = initial_condition(&cfg.initial_condition, grid, cfg.seed)?;
    let with = ModelConfig { extra_force: ExtraForce::Temam, ..cfg.model.clone() };
    let without = ModelConfig { extra_force: ExtraForce::None, ..cfg.model.clone() };
    let (mut steps, dt) = steps_for(cfg, &init, &with);
    steps -= steps % cfg.sample_every;
    if steps < 2 * cfg.sample_every {
        return Err(Error::TooFewSamples { needed: 3, found: steps / cfg.sample_every + 1 });
    }
    let every = cfg.sample_every;
    let (rows_with, rows_without) = rayon::join(
        || budget_run(&init, &with, &cfg.forcing, steps, dt, every),
        || budget_run(&init, &without, &cfg.forcing, steps, dt, every),
    );
    let (rows_with, rows_without) = (rows_with?, rows_without?);

    let mut files = vec![dir.join("budget_temam.csv"), dir.join("budget_none.csv")];
    write_timeseries(&rows_with, &files[0])?;
    write_timeseries(&rows_without, &files[1])?;
    files.extend(write_snapshot(&init, &dir.join("initial"))?);

    let max_abs = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, |a, b| a.max(b.abs()));
    let temam_residual = max_abs(&mut rows_with.iter().map(|r| r.residual));
    let sample_interval = dt * every as f64;
    let temam_max_energy_rate = rows_with
        .windows(2)
        .map(|w| (w[1].total_energy() - w[0].total_energy()) / sample_interval)
        .fold(f64::NEG_INFINITY, f64::max);
    let residuals: Vec<f64> = rows_without.iter().map(|r| r.residual).collect();
    let defects: Vec<f64> = rows_without.iter().map(|r| r.defect_predicted).collect();
    let report = EnergyAuditReport {
        dt,
        steps,
        sample_interval,
        initial_energy: [energy_at(&init, &with), energy_at(&init, &without)],
        temam_residual,
        none_defect_gap: max_abs(&mut rows_without.iter().map(|r| r.residual - r.defect_predicted)),
        none_max_defect: max_abs(&mut defects.iter().copied()),
        none_max_dissipation: max_abs(&mut rows_without.iter().map(|r| r.dissipation)),
        residual_defect_correlation: correlation(&residuals, &defects),
        temam_max_energy_rate,
        temam_energy_non_increasing: temam_max_energy_rate <= temam_residual,
    };
    sanity("finite budgets", report.temam_residual.is_finite() && report.none_defect_gap.is_finite())?;
    finish(dir, cfg, start, files, report)
}

// ---------------------------------------------------------------- Galilean

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalileanExperimentReport {
    pub time: f64,
    pub boost: [f64; 2],
    pub gaps: GalileanReport,
    pub k_list: Vec<f64>,
    /// `‖f̃_e‖₂` for each K at the same state.
    pub alternative_force_norms: Vec<f64>,
    pub alternative_force_slope: f64,
}

const DEFAULT_K_LIST: [f64; 4] = [1e2, 1e3, 1e4, 1e5];

/// Evolves the configured data to `t_final`, then compares both inertial
/// terms across the boost and tabulates the alternative force against K.
pub fn run_galilean(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome<GalileanExperimentReport>> {
    require(cfg, ExperimentKind::Galilean)?;
    let start = Instant::now();
    fs::create_dir_all(dir)?;
    let grid = grid_of(cfg)?;
    let init = initial_condition(&cfg.initial_condition, grid, cfg.seed)?;
    let (steps, dt) = steps_for(cfg, &init, &cfg.model);
    let mut sim = Simulation::new(init, cfg.model.clone(), cfg.forcing.clone())?;
    drive(&mut sim, steps, dt, |_, _| Ok(()))?;
    let state = sim.into_state();
    let boost = cfg.boost.expect("validated");
    let gaps = galilean_invariance_report(&state, boost, &cfg.model)?;

    let k_list = cfg.k_list.clone().unwrap_or_else(|| DEFAULT_K_LIST.to_vec());
    let rate_cfg = ModelConfig { model: ModelKind::Temam, extra_force: ExtraForce::Temam, ..cfg.model.clone() };
    let dv_dt = eulerian_acceleration(&state, &rate_cfg)?;
    let alternative_force_norms: Vec<f64> = k_list
        .iter()
        .map(|&k| l2_norm(&galilean_alt_force(&state, &dv_dt, &ModelConfig { k, ..rate_cfg.clone() })))
        .collect();
    let alternative_force_slope = log_log_slope(&k_list, &alternative_force_norms);

    let mut files = write_snapshot(&state, &dir.join("state"))?;
    let table = dir.join("alternative_force.csv");
    write_table(&table, &["k", "norm"], &k_list.iter().zip(&alternative_force_norms).map(|(k, f)| vec![*k, *f]).collect::<Vec<_>>())?;
    files.push(table);
    let report = GalileanExperimentReport { time: state.time, boost, gaps, k_list, alternative_force_norms, alternative_force_slope };
    sanity("finite gaps", report.gaps.standard_gap.is_finite() && report.gaps.temam_gap.is_finite())?;
    finish(dir, cfg, start, files, report)
}

// ---------------------------------------------------------------- transport

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportExperimentReport {
    pub dt: f64,
    pub steps: usize,
    pub particles: usize,
    pub gap: f64,
    pub j_route_gap: Option<f64>,
    pub max_power: f64,
}

/// Runs the model with uniform sampling and checks the convected energy
/// rate against the inertial power along particle paths.
pub fn run_transport_check(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome<TransportExperimentReport>> {
    require(cfg, ExperimentKind::TransportCheck)?;
    let start = Instant::now();
    fs::create_dir_all(dir)?;
    let grid = grid_of(cfg)?;
    let init = initial_condition(&cfg.initial_condition, grid, cfg.seed)?;
    let (steps, _) = steps_for(cfg, &init, &cfg.model);
    // an even number of sampling intervals uses every sample
    let every = cfg.sample_every;
    let intervals = steps.div_ceil(every).max(4);
    let intervals = intervals + intervals % 2;
    let steps = intervals * every;
    let dt = cfg.t_final / steps as f64;

    let mut sim = Simulation::new(init, cfg.model.clone(), cfg.forcing.clone())?;
    let mut trajectory = Vec::with_capacity(intervals + 1);
    drive(&mut sim, steps, dt, |k, s| {
        if k % every == 0 {
            trajectory.push(s.clone());
        }
        Ok(())
    })?;

    let spec = cfg.particles.unwrap_or(ParticleSpec {
        center: [0.5 * cfg.period, 0.5 * cfg.period],
        side: 0.25 * cfg.period,
        m: 32,
    });
    let half = 0.5 * spec.side;
    let particles = ParticleSet::seed_uniform([spec.center[0] - half, spec.center[1] - half], spec.side, spec.m)?;
    let report = transport_check(&trajectory, &particles, &TransportOptions::default())?;

    let table = dir.join("transport.csv");
    let rows: Vec<Vec<f64>> =
        report.times.iter().zip(&report.lhs).zip(&report.rhs).map(|((t, l), r)| vec![*t, *l, *r]).collect();
    write_table(&table, &["time", "lhs", "rhs"], &rows)?;
    let summary = TransportExperimentReport {
        dt,
        steps,
        particles: particles.len(),
        gap: report.gap,
        j_route_gap: report.j_route_gap,
        max_power: report.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs())),
    };
    sanity("finite transport gap", summary.gap.is_finite())?;
    finish(dir, cfg, start, vec![table], summary)
}

// ---------------------------------------------------------------- free run

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeRunReport {
    pub dt: f64,
    pub steps: usize,
    pub final_time: f64,
    pub final_energy: f64,
    pub final_divergence: f64,
    pub max_budget_residual: f64,
}

/// Plain time integration with periodic snapshots and a budget series.
pub fn run_free(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome<FreeRunReport>> {
    require(cfg, ExperimentKind::FreeRun)?;
    let start = Instant::now();
    fs::create_dir_all(dir)?;
    let grid = grid_of(cfg)?;
    let init = initial_condition(&cfg.initial_condition, grid, cfg.seed)?;
    let (steps, dt) = steps_for(cfg, &init, &cfg.model);
    let mut sim = Simulation::new(init, cfg.model.clone(), cfg.forcing.clone())?;
    let mut stream = BudgetStream::new(&cfg.forcing, &cfg.model);
    let mut files = Vec::new();
    if cfg.snapshot_every > 0 {
        fs::create_dir_all(dir.join("snapshots"))?;
    }
    drive(&mut sim, steps, dt, |k, s| {
        if cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0 {
            files.extend(write_snapshot(s, &dir.join("snapshots").join(format!("step_{k:06}")))?);
        }
        if k % cfg.sample_every == 0 {
            stream.push(s)?;
        }
        Ok(())
    })?;
    let rows = stream.rows;
    let state = sim.into_state();
    files.extend(write_snapshot(&state, &dir.join("final"))?);
    let budget = dir.join("budget.csv");
    write_timeseries(&rows, &budget)?;
    files.push(budget);
    let report = FreeRunReport {
        dt,
        steps,
        final_time: state.time,
        final_energy: energy_at(&state, &cfg.model),
        final_divergence: divergence_norm(&state),
        max_budget_residual: rows.iter().fold(0.0f64, |a, r| a.max(r.residual.abs())),
    };
    sanity("finite final state", report.final_energy.is_finite())?;
    finish(dir, cfg, start, files, report)
}

/// Dispatches on the configured experiment kind.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome<serde_json::Value>> {
    match cfg.experiment {
        ExperimentKind::TaylorGreen => run_taylor_green(cfg, dir)?.erase(),
        ExperimentKind::KSweep => run_k_sweep(cfg, dir)?.erase(),
        ExperimentKind::EnergyAudit => run_energy_audit(cfg, dir)?.erase(),
        ExperimentKind::Galilean => run_galilean(cfg, dir)?.erase(),
        ExperimentKind::TransportCheck => run_transport_check(cfg, dir)?.erase(),
        ExperimentKind::FreeRun => run_free(cfg, dir)?.erase(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn uniform_steps_cover_the_interval() {
        assert_eq!(uniform_steps(1.0, 0.25), (4, 0.25));
        let (n, dt) = uniform_steps(1.0, 0.3);
        assert_eq!(n, 4);
        assert!((dt * n as f64 - 1.0).abs() < 1e-15);
        assert_eq!(uniform_steps(0.1, 1.0).0, 1);
    }

    #[test]
    fn slope_fit() {
        let x = [1.0, 10.0, 100.0];
        let y = [3.0, 0.3, 0.03];
        assert!((log_log_slope(&x, &y) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn taylor_green_at_time_zero_is_exact() {
        let g = Grid::periodic_2pi(16).unwrap();
        let (_, err) = taylor_green_error(g, 100.0, 0.0, 1).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn free_run_writes_manifest_last() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            r#"{"experiment":"free_run","n":16,"t_final":0.2,"snapshot_every":2,
                "model":{"model":"temam","re":50,"k":20},
                "initial_condition":{"kind":"compressive_pulse"}}"#,
        );
        let out = run_free(&cfg, dir.path()).unwrap();
        assert!(dir.path().join("manifest.json").exists());
        assert_eq!(out.manifest.files.len(), out.files.len());
        let budget = fs::read_to_string(dir.path().join("budget.csv")).unwrap();
        // one row per interior sample
        assert_eq!(budget.lines().count() - 1, out.report.steps - 1);
        assert!(dir.path().join("snapshots/step_000002.v.bin").exists());
    }

    #[test]
    fn failed_run_leaves_no_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            r#"{"experiment":"free_run","n":16,"t_final":5,"dt":1.0,
                "model":{"model":"temam","re":100,"k":1e6},
                "initial_condition":{"kind":"taylor_green","perturbation":0.5}}"#,
        );
        assert!(run_free(&cfg, dir.path()).is_err());
        assert!(!dir.path().join("manifest.json").exists());
    }

    #[test]
    fn wrong_experiment_kind_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(r#"{"experiment":"free_run","n":16,"t_final":0.2,"initial_condition":{"kind":"taylor_green"}}"#);
        assert!(matches!(run_galilean(&cfg, dir.path()), Err(Error::Experiment(_))));
    }

    #[test]
    fn sweep_member_steps_follow_the_acoustic_bound() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            r#"{"experiment":"k_sweep","n":16,"t_final":0.5,"k_list":[400,1600,6400],
                "initial_condition":{"kind":"taylor_green","perturbation":0.001}}"#,
        );
        let out = run_k_sweep(&cfg, dir.path()).unwrap();
        let dts: Vec<f64> = out.report.members.iter().map(|m| m.dt).collect();
        // quadrupling K halves the bound; uniform steps round it down slightly
        for w in dts.windows(2) {
            assert!((w[0] / w[1] - 2.0).abs() < 0.1, "{dts:?}");
        }
        assert!(dir.path().join("manifest.json").exists());
    }
}
