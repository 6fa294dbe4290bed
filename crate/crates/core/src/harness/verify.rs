//! Built-in acceptance suite. Each criterion runs at desk scale, writes its
//! artifacts under its own directory and reports pass/fail with the
//! measured quantities. Running the suite twice and comparing output
//! checksums is itself the last criterion.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, InitialCondition, ParticleSpec};
use super::experiments::{run_energy_audit, run_galilean, run_k_sweep, run_taylor_green, run_transport_check};
use super::initial::{compressive_pulse, taylor_green};
use super::io::{write_json, write_manifest, RunManifest};
use crate::diagnostics::{galilean_invariance_report, observed_order};
use crate::error::Result;
use crate::fields::{inner_product, integrate, Grid, L2Norm, ScalarField, VectorField};
use crate::inertia::{
    inertial_force_standard, inertial_force_star, jacobian_from_density, kappa_r_star_rate_identity_residual,
    kinetic_density_referential, kinetic_density_star, power_consistency_residual, KinematicSample,
};
use crate::models::{model_rhs, ForcingSpec, ModelConfig, Simulation, State};
use crate::operators::{
    convection, directional_derivative, divergence, grad_div, gradient, laplacian, velocity_gradient_sq,
    ConvectionForm,
};

/// Smallest observed order accepted wherever second order is expected.
pub const MIN_ORDER: f64 = 1.9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
}

impl CriterionResult {
    fn new(id: u8, name: &str) -> Self {
        Self { id, name: name.to_string(), passed: true, detail: String::new(), metrics: BTreeMap::new() }
    }

    fn metric(&mut self, key: &str, value: f64) -> f64 {
        self.metrics.insert(key.to_string(), value);
        value
    }

    /// Records a named condition; the criterion fails if any check fails.
    fn check(&mut self, what: &str, ok: bool) {
        if !ok {
            self.passed = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str("failed: ");
            self.detail.push_str(what);
        }
    }

    fn failed(id: u8, name: &str, error: &crate::Error) -> Self {
        let mut r = Self::new(id, name);
        r.passed = false;
        r.detail = format!("error: {error}");
        r
    }

    /// One line: `criterion N [PASS|FAIL] name: detail`.
    pub fn line(&self) -> String {
        let mut metrics: Vec<String> = self.metrics.iter().map(|(k, v)| format!("{k}={v:.4e}")).collect();
        if !self.detail.is_empty() {
            metrics.insert(0, self.detail.clone());
        }
        format!(
            "criterion {} [{}] {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            metrics.join(", ")
        )
    }
}

#[derive(Clone, Debug)]
pub struct SuiteRun {
    pub results: Vec<CriterionResult>,
    pub files: Vec<PathBuf>,
    pub manifest: RunManifest,
}

#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub results: Vec<CriterionResult>,
    pub first: SuiteRun,
    pub second: SuiteRun,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn criterion(&self, id: u8) -> &CriterionResult {
        self.results.iter().find(|r| r.id == id).expect("every criterion is reported")
    }
}

fn base_config(experiment: ExperimentKind, n: usize, t_final: f64, model: ModelConfig, ic: InitialCondition) -> ExperimentConfig {
    ExperimentConfig {
        experiment,
        n,
        period: 2.0 * PI,
        t_final,
        cfl: crate::models::DEFAULT_CFL,
        dt: None,
        out_dir: None,
        model,
        forcing: ForcingSpec::Zero,
        k_list: None,
        initial_condition: ic,
        snapshot_every: 0,
        seed: 0,
        sample_every: 1,
        boost: None,
        particles: None,
        well_prepared: true,
    }
}

// ---------------------------------------------------------------- 1

struct Manufactured {
    s: ScalarField,
    grad_s: VectorField,
    lap_s: ScalarField,
    v: VectorField,
    div_v: ScalarField,
    lap_v: VectorField,
    conv_v: VectorField,
    grad_div_v: VectorField,
    grad_v_sq: ScalarField,
    dir_v: VectorField,
}

const DIRECTION: [f64; 2] = [0.7, -0.3];

/// Trigonometric fields with closed-form derivatives:
/// `s = sin x cos 2y + ½ cos(x + y)`, `v = (sin x cos y, cos(x + 2y))`.
fn manufactured(g: Grid) -> Manufactured {
    let du = |x: f64, y: f64| [x.cos() * y.cos(), -x.sin() * y.sin()];
    let dw = |x: f64, y: f64| [-(x + 2.0 * y).sin(), -2.0 * (x + 2.0 * y).sin()];
    let vel = |x: f64, y: f64| [x.sin() * y.cos(), (x + 2.0 * y).cos()];
    let [a, b] = DIRECTION;
    Manufactured {
        s: ScalarField::from_fn(g, |x, y| x.sin() * (2.0 * y).cos() + 0.5 * (x + y).cos()),
        grad_s: VectorField::from_fn(g, |x, y| {
            [
                x.cos() * (2.0 * y).cos() - 0.5 * (x + y).sin(),
                -2.0 * x.sin() * (2.0 * y).sin() - 0.5 * (x + y).sin(),
            ]
        }),
        lap_s: ScalarField::from_fn(g, |x, y| -5.0 * x.sin() * (2.0 * y).cos() - (x + y).cos()),
        v: VectorField::from_fn(g, vel),
        div_v: ScalarField::from_fn(g, |x, y| du(x, y)[0] + dw(x, y)[1]),
        lap_v: VectorField::from_fn(g, |x, y| [-2.0 * x.sin() * y.cos(), -5.0 * (x + 2.0 * y).cos()]),
        conv_v: VectorField::from_fn(g, |x, y| {
            let (v, u, w) = (vel(x, y), du(x, y), dw(x, y));
            [v[0] * u[0] + v[1] * u[1], v[0] * w[0] + v[1] * w[1]]
        }),
        grad_div_v: VectorField::from_fn(g, |x, y| {
            [-x.sin() * y.cos() - 2.0 * (x + 2.0 * y).cos(), -x.cos() * y.sin() - 4.0 * (x + 2.0 * y).cos()]
        }),
        grad_v_sq: ScalarField::from_fn(g, |x, y| {
            let (u, w) = (du(x, y), dw(x, y));
            u[0] * u[0] + u[1] * u[1] + w[0] * w[0] + w[1] * w[1]
        }),
        dir_v: VectorField::from_fn(g, |x, y| {
            let (u, w) = (du(x, y), dw(x, y));
            [a * u[0] + b * u[1], a * w[0] + b * w[1]]
        }),
    }
}

fn operator_errors(n: usize) -> Result<Vec<(&'static str, f64)>> {
    let g = Grid::periodic_2pi(n)?;
    let m = manufactured(g);
    // skew form: (v·∇)v + ½(∇·v)v
    let skew = m.conv_v.add(&m.v.scale_by(&m.div_v.scaled(0.5)));
    Ok(vec![
        ("gradient", gradient(&m.s).sub(&m.grad_s).l2_norm()),
        ("divergence", divergence(&m.v).sub(&m.div_v).l2_norm()),
        ("laplacian_scalar", laplacian(&m.s).sub(&m.lap_s).l2_norm()),
        ("laplacian_vector", laplacian(&m.v).sub(&m.lap_v).l2_norm()),
        ("convection_advective", convection(&m.v, ConvectionForm::Advective).sub(&m.conv_v).l2_norm()),
        ("convection_skew", convection(&m.v, ConvectionForm::Skew).sub(&skew).l2_norm()),
        ("grad_div", grad_div(&m.v).sub(&m.grad_div_v).l2_norm()),
        ("velocity_gradient_sq", velocity_gradient_sq(&m.v).sub(&m.grad_v_sq).l2_norm()),
        ("directional_derivative", directional_derivative(DIRECTION, &m.v).sub(&m.dir_v).l2_norm()),
    ])
}

/// Relative defect of `∫ s ∇·v = -∫ ∇s·v`.
fn summation_by_parts_defect(n: usize) -> Result<f64> {
    let g = Grid::periodic_2pi(n)?;
    let s = ScalarField::from_fn(g, |x, y| (x + y).sin().exp());
    let v = VectorField::from_fn(g, |x, y| [(x + y).cos(), (2.0 * y).cos() + x.sin()]);
    let a = integrate(&s.mul(&divergence(&v)));
    let b = inner_product(&gradient(&s), &v)?;
    Ok((a + b).abs() / a.abs().max(b.abs()))
}

pub fn criterion_operators(dir: &Path) -> Result<(CriterionResult, Vec<PathBuf>)> {
    let mut r = CriterionResult::new(1, "operator convergence and summation by parts");
    let coarse = operator_errors(64)?;
    let fine = operator_errors(128)?;
    let mut table = Vec::new();
    for ((name, e1), (_, e2)) in coarse.iter().zip(&fine) {
        let order = r.metric(&format!("order_{name}"), observed_order(*e1, *e2));
        r.check(&format!("{name} order {order:.3} < {MIN_ORDER}"), order >= MIN_ORDER);
        table.push(serde_json::json!({"operator": name, "error_n64": e1, "error_n128": e2, "order": order}));
    }
    for n in [64, 128] {
        let defect = r.metric(&format!("sbp_relative_defect_n{n}"), summation_by_parts_defect(n)?);
        r.check(&format!("summation by parts defect {defect:.2e} at n = {n}"), defect <= 1e-12);
    }
    fs::create_dir_all(dir)?;
    let path = dir.join("operators.json");
    write_json(&path, &table)?;
    Ok((r, vec![path]))
}

// ---------------------------------------------------------------- 2

pub fn criterion_taylor_green(dir: &Path) -> Result<(CriterionResult, Vec<PathBuf>)> {
    let mut r = CriterionResult::new(2, "Taylor-Green projection convergence");
    let cfg = base_config(
        ExperimentKind::TaylorGreen,
        32,
        1.0,
        ModelConfig::incompressible(100.0),
        InitialCondition::TaylorGreen { perturbation: 0.0 },
    );
    let out = run_taylor_green(&cfg, dir)?;
    r.metric("error_n32", out.report.levels[0].l2_error);
    r.metric("error_n64", out.report.levels[1].l2_error);
    let order = r.metric("order", out.report.observed_order);
    r.check(&format!("order {order:.3} < {MIN_ORDER}"), order >= MIN_ORDER);
    Ok((r, out.files))
}

// ---------------------------------------------------------------- 3

pub fn criterion_k_limit(dir: &Path) -> Result<(CriterionResult, Vec<PathBuf>)> {
    let mut r = CriterionResult::new(3, "K-limit: divergence and distance to the incompressible flow");
    let mut cfg = base_config(
        ExperimentKind::KSweep,
        64,
        1.0,
        ModelConfig::temam(100.0, 1e3),
        InitialCondition::TaylorGreen { perturbation: 1e-3 },
    );
    cfg.k_list = Some(vec![1e2, 1e3, 1e4, 1e5]);
    let out = run_k_sweep(&cfg, dir)?;
    let rep = &out.report;
    let div_slope = r.metric("divergence_slope", rep.divergence_slope.unwrap_or(f64::NAN));
    let gap_slope = r.metric("terminal_gap_slope", rep.terminal_gap_slope.unwrap_or(f64::NAN));
    for (i, m) in rep.members.iter().enumerate() {
        r.metric(&format!("max_divergence_{i}"), m.max_divergence.unwrap_or(f64::NAN));
        r.metric(&format!("terminal_gap_{i}"), m.terminal_gap.unwrap_or(f64::NAN));
    }
    r.check("time-max divergence strictly decreasing", rep.divergence_decreasing);
    r.check(&format!("divergence slope {div_slope:.3} outside [-1.3, -0.7]"), (-1.3..=-0.7).contains(&div_slope));
    r.check("terminal distance strictly decreasing", rep.terminal_gap_decreasing);
    r.check(&format!("terminal distance slope {gap_slope:.3} outside [-1.3, -0.7]"), (-1.3..=-0.7).contains(&gap_slope));
    Ok((r, out.files))
}

// ---------------------------------------------------------------- 4

pub fn criterion_energy(dir: &Path) -> Result<(CriterionResult, Vec<PathBuf>)> {
    let mut r = CriterionResult::new(4, "energy budget closure and defect attribution");
    let k = 10.0;
    let mut reports = Vec::new();
    let mut files = Vec::new();
    for n in [64usize, 128] {
        let mut cfg = base_config(
            ExperimentKind::EnergyAudit,
            n,
            1.0,
            ModelConfig::temam(100.0, k),
            InitialCondition::CompressivePulse { amplitude: 0.5 },
        );
        cfg.dt = Some(0.4 * (2.0 * PI / n as f64) / f64::sqrt(k));
        let out = run_energy_audit(&cfg, &dir.join(format!("n{n}")))?;
        files.extend(out.files);
        reports.push(out.report);
    }
    let (a, b) = (&reports[0], &reports[1]);
    r.metric("temam_residual_n64", a.temam_residual);
    r.metric("temam_residual_n128", b.temam_residual);
    let closure = r.metric("temam_residual_order", observed_order(a.temam_residual, b.temam_residual));
    let attribution = r.metric("defect_gap_order", observed_order(a.none_defect_gap, b.none_defect_gap));
    r.metric("defect_over_dissipation", b.none_max_defect / b.none_max_dissipation);
    r.check(&format!("residual order {closure:.3} < {MIN_ORDER}"), closure >= MIN_ORDER);
    r.check(&format!("defect gap order {attribution:.3} < {MIN_ORDER}"), attribution >= MIN_ORDER);
    for (n, rep) in [(64, a), (128, b)] {
        let corr = r.metric(&format!("correlation_n{n}"), rep.residual_defect_correlation.unwrap_or(f64::NAN));
        r.check(&format!("correlation {corr:.5} at n = {n}"), corr > 0.99);
        r.check(&format!("total energy increases at n = {n}"), rep.temam_energy_non_increasing);
        r.check("paired runs start from different energies", rep.initial_energy[0] == rep.initial_energy[1]);
    }
    Ok((r, files))
}

// ---------------------------------------------------------------- 5

fn kappa_residual(n: usize) -> Result<f64> {
    let g = Grid::periodic_2pi(n)?;
    let m = manufactured(g);
    let rho_star = 1.3;
    let rho = ScalarField::from_fn(g, |x, y| rho_star * (1.0 + 0.1 * x.sin() * y.sin()));
    let rho_rate = rho.mul(&m.div_v).scaled(-1.0);
    let sample = KinematicSample::new(m.v, m.lap_v, rho, rho_star)?;
    kappa_r_star_rate_identity_residual(&sample, &rho_rate)
}

fn power_residual(n: usize) -> Result<f64> {
    let g = Grid::periodic_2pi(n)?;
    let cfg = ModelConfig::temam(100.0, 10.0);
    let init = State::new(compressive_pulse(g, 0.5), ScalarField::zeros(g), 0.0)?;
    let mut sim = Simulation::new(init, cfg.clone(), ForcingSpec::Zero)?;
    let dt = 0.5 / 48.0 * 64.0 / n as f64;
    let mid_step = 48 * n / 64;
    let mut samples = Vec::new();
    for k in 0..=mid_step + 1 {
        if k + 1 >= mid_step {
            let s = sim.state();
            let dv = model_rhs(s, &ForcingSpec::Zero, &cfg, None)?.dv;
            samples.push(KinematicSample::at_reference_density(s.v.clone(), dv, 1.0)?);
        }
        if k <= mid_step {
            sim.step(dt)?;
        }
    }
    Ok(power_consistency_residual(&samples[0], &samples[1], &samples[2], dt)?.abs())
}

pub fn criterion_inertia(dir: &Path) -> Result<(CriterionResult, Vec<PathBuf>)> {
    let mut r = CriterionResult::new(5, "inertial-force and kinetic-energy identities");
    let g = Grid::periodic_2pi(64)?;
    let m = manufactured(g);
    let rho_star = 1.3;

    let sample = KinematicSample::at_reference_density(m.v.clone(), m.lap_v.clone(), rho_star)?;
    let expected = m.v.scale_by(&divergence(&m.v).scaled(-0.5 * rho_star));
    let diff = inertial_force_star(&sample).sub(&inertial_force_standard(&sample));
    let d18 = r.metric("force_difference_defect", diff.sub(&expected).max_magnitude() / expected.max_magnitude());
    r.check(&format!("force difference identity {d18:.2e}"), d18 <= 1e-13);

    let rho = ScalarField::from_fn(g, |x, y| rho_star * (1.0 + 0.1 * x.sin() * y.sin()));
    let sample = KinematicSample::new(m.v.clone(), m.lap_v.clone(), rho.clone(), rho_star)?;
    let j = jacobian_from_density(&rho, rho_star)?;
    let kr = kinetic_density_referential(&sample);
    let ks = kinetic_density_star(&sample);
    let d19 = r.metric("referential_energy_defect", kr.sub(&ks).max_abs() / ks.max_abs());
    r.check(&format!("referential energy identity {d19:.2e}"), d19 <= 1e-14);
    r.metric("min_jacobian", j.min());

    let (k1, k2) = (kappa_residual(64)?, kappa_residual(128)?);
    r.metric("kappa_rate_residual_n64", k1);
    let kappa_order = r.metric("kappa_rate_order", observed_order(k1, k2));
    r.check(&format!("kappa rate order {kappa_order:.3}"), kappa_order >= MIN_ORDER);

    let (p1, p2) = (power_residual(64)?, power_residual(128)?);
    r.metric("power_residual_n64", p1);
    let power_order = r.metric("power_consistency_order", observed_order(p1, p2));
    r.check(&format!("power consistency order {power_order:.3}"), power_order >= MIN_ORDER);

    fs::create_dir_all(dir)?;
    let path = dir.join("identities.json");
    write_json(&path, &r.metrics)?;
    Ok((r, vec![path]))
}

// ---------------------------------------------------------------- 6

pub fn criterion_galilean(dir: &Path) -> Result<(CriterionResult, Vec<PathBuf>)> {
    let mut r = CriterionResult::new(6, "Galilean frame gaps and alternative-force scaling");
    let n = 64;
    let h = 2.0 * PI / n as f64;
    // w t = (8h, 4h): a whole-cell shift
    let mut cfg = base_config(
        ExperimentKind::Galilean,
        n,
        8.0 * h,
        ModelConfig::temam(100.0, 10.0),
        InitialCondition::CompressivePulse { amplitude: 0.5 },
    );
    cfg.boost = Some([1.0, 0.5]);
    let out = run_galilean(&cfg, dir)?;
    let gaps = out.report.gaps;
    r.metric("standard_gap", gaps.standard_gap);
    r.metric("temam_gap", gaps.temam_gap);
    let rel = r.metric("closed_form_relative_error", gaps.closed_form_rel_error);
    let slope = r.metric("alternative_force_slope", out.report.alternative_force_slope);
    r.check("boost is not a whole-cell shift", gaps.on_grid);
    r.check(&format!("standard gap {:.2e} above floor", gaps.standard_gap), gaps.standard_gap <= 1e-10);
    r.check(&format!("closed form mismatch {rel:.2e}"), rel <= 0.01);
    r.check(&format!("alternative force slope {slope:.4}"), (-1.05..=-0.95).contains(&slope));

    let g = Grid::periodic_2pi(n)?;
    let tg = State { time: 8.0 * h, ..taylor_green(g) };
    let solenoidal = galilean_invariance_report(&tg, [1.0, 0.5], &ModelConfig::incompressible(100.0))?;
    r.metric("solenoidal_temam_gap", solenoidal.temam_gap);
    r.metric("solenoidal_standard_gap", solenoidal.standard_gap);
    r.check(
        "divergence-free state shows a frame gap",
        solenoidal.temam_gap <= 1e-10 && solenoidal.standard_gap <= 1e-10,
    );
    let path = dir.join("solenoidal.json");
    write_json(&path, &solenoidal)?;
    let mut files = out.files;
    files.push(path);
    Ok((r, files))
}

// ---------------------------------------------------------------- 7

pub fn criterion_transport(dir: &Path) -> Result<(CriterionResult, Vec<PathBuf>)> {
    let mut r = CriterionResult::new(7, "Lagrangian transport check");
    let mut reports = Vec::new();
    let mut files = Vec::new();
    for (n, dt, m) in [(64usize, 0.01, 32usize), (128, 0.005, 64)] {
        let mut cfg = base_config(
            ExperimentKind::TransportCheck,
            n,
            0.64,
            ModelConfig::temam(100.0, 10.0),
            InitialCondition::CompressivePulse { amplitude: 0.5 },
        );
        cfg.dt = Some(dt);
        cfg.particles = Some(ParticleSpec { center: [PI, PI], side: PI / 2.0, m });
        let out = run_transport_check(&cfg, &dir.join(format!("n{n}")))?;
        files.extend(out.files);
        reports.push(out.report);
    }
    let (a, b) = (&reports[0], &reports[1]);
    r.metric("gap_n64", a.gap);
    r.metric("gap_n128", b.gap);
    r.metric("max_power_n128", b.max_power);
    let gap_order = r.metric("gap_order", observed_order(a.gap, b.gap));
    let (ja, jb) = (a.j_route_gap.unwrap_or(f64::NAN), b.j_route_gap.unwrap_or(f64::NAN));
    r.metric("jacobian_route_gap_n64", ja);
    let j_order = r.metric("jacobian_route_order", observed_order(ja, jb));
    r.check(&format!("gap order {gap_order:.3}"), gap_order >= MIN_ORDER);
    r.check(&format!("Jacobian route order {j_order:.3}"), j_order >= MIN_ORDER);
    Ok((r, files))
}

// ---------------------------------------------------------------- suite

type Criterion = fn(&Path) -> Result<(CriterionResult, Vec<PathBuf>)>;

const CRITERIA: [(u8, &str, &str, Criterion); 7] = [
    (1, "operators", "operator convergence and summation by parts", criterion_operators),
    (2, "taylor_green", "Taylor-Green projection convergence", criterion_taylor_green),
    (3, "k_limit", "K-limit: divergence and distance to the incompressible flow", criterion_k_limit),
    (4, "energy", "energy budget closure and defect attribution", criterion_energy),
    (5, "inertia", "inertial-force and kinetic-energy identities", criterion_inertia),
    (6, "galilean", "Galilean frame gaps and alternative-force scaling", criterion_galilean),
    (7, "transport", "Lagrangian transport check", criterion_transport),
];

/// Runs criteria 1 to 7 into `dir` and writes `results.json` and a manifest
/// over every artifact. `progress` sees each result as it completes.
pub fn run_suite(dir: &Path, mut progress: impl FnMut(&CriterionResult)) -> Result<SuiteRun> {
    let start = Instant::now();
    fs::create_dir_all(dir)?;
    let mut results = Vec::new();
    let mut files = Vec::new();
    for (id, slug, name, run) in CRITERIA {
        let sub = dir.join(format!("c{id}_{slug}"));
        let result = match run(&sub) {
            Ok((r, f)) => {
                files.extend(f);
                r
            }
            Err(e) => CriterionResult::failed(id, name, &e),
        };
        progress(&result);
        results.push(result);
    }
    let summary = dir.join("results.json");
    write_json(&summary, &results)?;
    files.push(summary);
    let manifest = write_manifest(dir, serde_json::json!({"suite": "verify"}), start.elapsed().as_secs_f64(), &files)?;
    Ok(SuiteRun { results, files, manifest })
}

/// Criterion 8: both suite runs produced the same files with the same
/// checksums.
pub fn compare_runs(first: &SuiteRun, second: &SuiteRun) -> CriterionResult {
    let mut r = CriterionResult::new(8, "reproducibility of output checksums");
    r.metric("files", first.manifest.files.len() as f64);
    let differing: Vec<&String> = first
        .manifest
        .files
        .iter()
        .filter(|(k, v)| second.manifest.files.get(*k) != Some(*v))
        .map(|(k, _)| k)
        .chain(second.manifest.files.keys().filter(|k| !first.manifest.files.contains_key(*k)))
        .collect();
    r.metric("differing_files", differing.len() as f64);
    r.check(&format!("checksums differ for {differing:?}"), differing.is_empty());
    r.check("no outputs", !first.manifest.files.is_empty());
    r
}

/// Runs the suite twice (`dir/run_1`, `dir/run_2`), adds the
/// reproducibility criterion and writes `dir/verify.json`.
pub fn verify(dir: &Path, mut progress: impl FnMut(&CriterionResult)) -> Result<VerifyOutcome> {
    let first = run_suite(&dir.join("run_1"), &mut progress)?;
    let second = run_suite(&dir.join("run_2"), |_| {})?;
    let mut results = first.results.clone();
    let repro = compare_runs(&first, &second);
    progress(&repro);
    results.push(repro);
    write_json(&dir.join("verify.json"), &results)?;
    Ok(VerifyOutcome { results, first, second })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manufactured_fields_are_consistent() {
        // the closed forms agree with each other: ∇·v from the gradient pieces
        let g = Grid::periodic_2pi(256).unwrap();
        let m = manufactured(g);
        assert!(divergence(&m.v).sub(&m.div_v).max_abs() < 1e-3);
        assert!(gradient(&m.div_v).sub(&m.grad_div_v).max_magnitude() < 5e-3);
        assert!(laplacian(&m.s).sub(&m.lap_s).max_abs() < 1e-3);
    }

    #[test]
    fn result_line_format() {
        let mut r = CriterionResult::new(3, "x");
        r.metric("a", 1.0);
        assert_eq!(r.line(), "criterion 3 [PASS] x: a=1.0000e0");
        r.check("thing", false);
        assert!(r.line().starts_with("criterion 3 [FAIL] x: failed: thing"));
    }

    #[test]
    fn identical_manifests_compare_equal() {
        let manifest = RunManifest {
            config: serde_json::Value::Null,
            code_version: "0".into(),
            wall_time_seconds: 1.0,
            files: [("a".to_string(), "00".to_string())].into_iter().collect(),
        };
        let run = SuiteRun { results: vec![], files: vec![], manifest: manifest.clone() };
        let mut other = run.clone();
        other.manifest.wall_time_seconds = 2.0;
        assert!(compare_runs(&run, &other).passed);
        other.manifest.files.insert("a".into(), "01".into());
        assert!(!compare_runs(&run, &other).passed);
    }
}
