//! Browser bindings for the flow laboratory: a live simulation, the
//! Galilean frame gaps of a compressive state, and the divergence of
//! well-prepared runs as the bulk modulus grows.
//!
//! Every export has a plain-Rust counterpart returning `qins::Result` so the
//! logic is testable off the browser; the exports only convert errors.

use wasm_bindgen::prelude::*;

use qins::diagnostics::{divergence_norm, galilean_invariance_report};
use qins::fields::{integrate, Grid, ScalarField};
use qins::harness::{compressive_pulse, initial_condition, uniform_steps, well_prepared_state, InitialCondition};
use qins::models::{stable_dt, ExtraForce, ForcingSpec, ModelConfig, Simulation, State};
use qins::operators::divergence;
use qins::{Error, Result};

const CFL: f64 = 0.4;

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

fn model_config(model: &str, re: f64, k: f64) -> Result<ModelConfig> {
    match model {
        "temam" => Ok(ModelConfig::temam(re, k)),
        "no_extra_force" => Ok(ModelConfig::temam(re, k).with_extra_force(ExtraForce::None)),
        "incompressible" => Ok(ModelConfig::incompressible(re)),
        other => Err(Error::Experiment(format!("unknown model `{other}`"))),
    }
}

fn initial(name: &str, grid: Grid, seed: u64) -> Result<State> {
    let spec = match name {
        "taylor_green" => InitialCondition::TaylorGreen { perturbation: 0.0 },
        "perturbed_taylor_green" => InitialCondition::TaylorGreen { perturbation: 0.1 },
        "pulse" => InitialCondition::CompressivePulse { amplitude: 0.5 },
        "random" => InitialCondition::RandomSmooth { seed: Some(seed), modes: 4, amplitude: 1.0 },
        other => return Err(Error::Experiment(format!("unknown initial condition `{other}`"))),
    };
    initial_condition(&spec, grid, seed)
}

/// Stability bound with a velocity scale of at least one.
fn step_bound(state: &State, cfg: &ModelConfig) -> f64 {
    stable_dt(state, cfg, CFL).min(CFL * state.grid().spacing())
}

#[wasm_bindgen]
pub struct FlowDemo {
    sim: Simulation,
    cfg: ModelConfig,
}

impl FlowDemo {
    pub fn build(n: usize, model: &str, re: f64, k: f64, init: &str, seed: u64) -> Result<Self> {
        let grid = Grid::periodic_2pi(n)?;
        let cfg = model_config(model, re, k)?;
        let sim = Simulation::new(initial(init, grid, seed)?, cfg.clone(), ForcingSpec::Zero)?;
        Ok(Self { sim, cfg })
    }

    pub fn advance_by(&mut self, steps: u32) -> Result<()> {
        for _ in 0..steps {
            let dt = step_bound(self.sim.state(), &self.cfg);
            self.sim.step(dt)?;
        }
        Ok(())
    }

    fn state(&self) -> &State {
        self.sim.state()
    }
}

#[wasm_bindgen]
impl FlowDemo {
    /// `model`: `temam`, `no_extra_force` or `incompressible`; `init`:
    /// `taylor_green`, `perturbed_taylor_green`, `pulse` or `random`.
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, model: &str, re: f64, k: f64, init: &str, seed: u32) -> std::result::Result<FlowDemo, JsError> {
        Self::build(n, model, re, k, init, u64::from(seed)).map_err(js)
    }

    /// Takes `steps` steps at the stability bound.
    pub fn advance(&mut self, steps: u32) -> std::result::Result<(), JsError> {
        self.advance_by(steps).map_err(js)
    }

    pub fn n(&self) -> usize {
        self.state().grid().n()
    }

    pub fn time(&self) -> f64 {
        self.state().time
    }

    /// `e_kin + e_press`, the pressure part only for models with a bulk
    /// modulus.
    pub fn energy(&self) -> f64 {
        let s = self.state();
        let kinetic = 0.5 * integrate(&s.v.magnitude_sq());
        if self.cfg.uses_bulk_modulus() {
            kinetic + integrate(&s.p.mul(&s.p)) / (2.0 * self.cfg.k)
        } else {
            kinetic
        }
    }

    pub fn divergence_l2(&self) -> f64 {
        divergence_norm(self.state())
    }

    /// Row-major samples of `|v|`, `∇·v` or `p` (`field`: `speed`,
    /// `divergence`, `pressure`).
    pub fn field(&self, field: &str) -> std::result::Result<Vec<f64>, JsError> {
        self.field_values(field).map_err(js)
    }
}

impl FlowDemo {
    pub fn field_values(&self, field: &str) -> Result<Vec<f64>> {
        let s = self.state();
        let f: ScalarField = match field {
            "speed" => s.v.magnitude_sq().map(f64::sqrt),
            "divergence" => divergence(&s.v),
            "pressure" => s.p.clone(),
            other => return Err(Error::Experiment(format!("unknown field `{other}`"))),
        };
        Ok(f.into_values())
    }
}

/// `[standard_gap, temam_gap, closed_form]` for the compressive pulse under
/// a boost `w`.
pub fn frame_gaps(n: usize, wx: f64, wy: f64) -> Result<[f64; 3]> {
    let grid = Grid::periodic_2pi(n)?;
    let state = State::new(compressive_pulse(grid, 0.5), ScalarField::zeros(grid), 0.0)?;
    let r = galilean_invariance_report(&state, [wx, wy], &ModelConfig::temam(100.0, 10.0))?;
    Ok([r.standard_gap, r.temam_gap, r.temam_gap_closed_form])
}

#[wasm_bindgen]
pub fn galilean_gaps(n: usize, wx: f64, wy: f64) -> std::result::Result<Vec<f64>, JsError> {
    frame_gaps(n, wx, wy).map(Vec::from).map_err(js)
}

/// Time-max `‖∇·v‖₂` up to `t_final` for each bulk modulus in `ks`,
/// starting from well-prepared perturbed Taylor-Green data.
pub fn max_divergence_per_k(n: usize, t_final: f64, ks: &[f64]) -> Result<Vec<f64>> {
    let k_min = ks.iter().copied().fold(f64::INFINITY, f64::min);
    if ks.is_empty() || !(k_min > 0.0) || !(t_final > 0.0) {
        return Err(Error::Experiment("need positive bulk moduli and t_final".into()));
    }
    let grid = Grid::periodic_2pi(n)?;
    let base = initial_condition(&InitialCondition::TaylorGreen { perturbation: 1e-3 }, grid, 0)?;
    ks.iter()
        .map(|&k| {
            let cfg = ModelConfig::temam(100.0, k);
            let start = well_prepared_state(&base, &cfg, &ForcingSpec::Zero, k_min)?;
            let (steps, dt) = uniform_steps(t_final, step_bound(&start, &cfg));
            let mut max_div = divergence_norm(&start);
            let mut sim = Simulation::new(start, cfg, ForcingSpec::Zero)?;
            for _ in 0..steps {
                sim.step(dt)?;
                max_div = max_div.max(divergence_norm(sim.state()));
            }
            Ok(max_div)
        })
        .collect()
}

#[wasm_bindgen]
pub fn divergence_vs_k(n: usize, t_final: f64, ks: Vec<f64>) -> std::result::Result<Vec<f64>, JsError> {
    max_divergence_per_k(n, t_final, &ks).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_steps_and_reports_fields() {
        let mut demo = FlowDemo::build(16, "temam", 100.0, 10.0, "pulse", 1).unwrap();
        let e0 = demo.energy();
        demo.advance_by(5).unwrap();
        assert!(demo.time() > 0.0);
        assert!(demo.energy() < e0);
        for f in ["speed", "divergence", "pressure"] {
            assert_eq!(demo.field_values(f).unwrap().len(), 256);
        }
        assert!(demo.field_values("vorticity").is_err());
        assert!(FlowDemo::build(16, "euler", 1.0, 1.0, "pulse", 0).is_err());
    }

    #[test]
    fn incompressible_demo_stays_divergence_free() {
        let mut demo = FlowDemo::build(16, "incompressible", 100.0, 1.0, "taylor_green", 0).unwrap();
        demo.advance_by(3).unwrap();
        assert!(demo.divergence_l2() < 1e-10);
    }

    #[test]
    fn gaps_follow_the_closed_form() {
        let [standard, temam, closed] = frame_gaps(32, 1.0, 0.5).unwrap();
        assert!(standard < 1e-12);
        assert!((temam - closed).abs() <= 1e-12 * closed);
    }

    #[test]
    fn divergence_falls_with_k() {
        let d = max_divergence_per_k(16, 0.2, &[1e2, 1e3, 1e4]).unwrap();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
        assert!(max_divergence_per_k(16, 0.2, &[]).is_err());
    }
}
