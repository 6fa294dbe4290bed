use crate::error::{Error, Result};
use crate::fields::VectorField;

use super::{incompressible_step, model_rhs, ForcingSpec, ModelConfig, ModelKind, State, Tendency};

pub const DEFAULT_CFL: f64 = 0.4;

/// `cfl · min(h/|v|∞, Re h²/4, h/√K)`; the acoustic bound applies only to
/// models that carry a bulk modulus.
pub fn stable_dt(state: &State, cfg: &ModelConfig, cfl: f64) -> f64 {
    let h = state.grid().spacing();
    let mut bound = cfg.re * h * h / 4.0;
    let vmax = state.v.max_magnitude();
    if vmax > 0.0 {
        bound = bound.min(h / vmax);
    }
    if cfg.uses_bulk_modulus() {
        bound = bound.min(h / cfg.k.sqrt());
    }
    cfl * bound
}

fn advance(state: &State, tendency: &Tendency, dt: f64) -> State {
    let mut v = state.v.clone();
    v.axpy(dt, &tendency.dv);
    let mut p = state.p.clone();
    p.axpy(dt, &tendency.dp);
    State { v, p, time: state.time + dt }
}

/// Classical four-stage Runge-Kutta update of `(v, p)`.
pub fn step_rk4<R>(rhs: R, state: &State, forcing: &ForcingSpec, cfg: &ModelConfig, dt: f64) -> Result<State>
where
    R: Fn(&State, &ForcingSpec, &ModelConfig) -> Result<Tendency>,
{
    let k1 = rhs(state, forcing, cfg)?;
    let k2 = rhs(&advance(state, &k1, 0.5 * dt), forcing, cfg)?;
    let k3 = rhs(&advance(state, &k2, 0.5 * dt), forcing, cfg)?;
    let k4 = rhs(&advance(state, &k3, dt), forcing, cfg)?;

    let mut v = state.v.clone();
    let mut p = state.p.clone();
    for (w, k) in [(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)] {
        v.axpy(w * dt / 6.0, &k.dv);
        p.axpy(w * dt / 6.0, &k.dp);
    }
    if !v.is_finite() || !p.is_finite() {
        let cfl = dt * state.v.max_magnitude() / state.grid().spacing();
        return Err(Error::BlowUp { time: state.time + dt, cfl });
    }
    Ok(State { v, p, time: state.time + dt })
}

/// A running simulation of one model. Owns its state and, for the
/// Galilean-invariant extra force, the lagged acceleration
/// `(v_n - v_{n-1}) / dt` (zero before the first step).
#[derive(Clone, Debug)]
pub struct Simulation {
    state: State,
    cfg: ModelConfig,
    forcing: ForcingSpec,
    accel_lag: Option<VectorField>,
}

impl Simulation {
    pub fn new(state: State, cfg: ModelConfig, forcing: ForcingSpec) -> Result<Self> {
        cfg.validate()?;
        forcing.evaluate(state.grid(), state.time)?;
        Ok(Self { state, cfg, forcing, accel_lag: None })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn into_state(self) -> State {
        self.state
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn forcing(&self) -> &ForcingSpec {
        &self.forcing
    }

    pub fn stable_dt(&self, cfl: f64) -> f64 {
        stable_dt(&self.state, &self.cfg, cfl)
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        let next = match self.cfg.model {
            ModelKind::Incompressible => incompressible_step(&self.state, &self.forcing, &self.cfg, dt)?,
            _ => {
                let lag = self.accel_lag.as_ref();
                step_rk4(|s, f, c| model_rhs(s, f, c, lag), &self.state, &self.forcing, &self.cfg, dt)?
            }
        };
        self.accel_lag = Some(next.v.sub(&self.state.v).scaled(1.0 / dt));
        self.state = next;
        Ok(())
    }

    /// Takes `steps` steps of size `dt`, recording the initial state and then
    /// every `every`-th state.
    pub fn trajectory(&mut self, dt: f64, steps: usize, every: usize) -> Result<Vec<State>> {
        let every = every.max(1);
        let mut out = Vec::with_capacity(steps / every + 1);
        out.push(self.state.clone());
        for k in 1..=steps {
            self.step(dt)?;
            if k % every == 0 {
                out.push(self.state.clone());
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Grid, ScalarField};

    #[test]
    fn rest_is_stationary_for_every_model() {
        let g = Grid::periodic_2pi(8).unwrap();
        for cfg in [
            ModelConfig::temam(10.0, 100.0),
            ModelConfig::compressible(10.0, 100.0, 1.0),
            ModelConfig::incompressible(10.0),
        ] {
            let mut sim = Simulation::new(State::rest(g), cfg, ForcingSpec::Zero).unwrap();
            sim.step(0.01).unwrap();
            assert_eq!(sim.state().v.max_magnitude(), 0.0);
            assert_eq!(sim.state().p.max_abs(), 0.0);
        }
    }

    // dp/dt = -λ p through the Temam pressure equation: with v = 0 the
    // velocity never moves and the pressure tendency is whatever rhs says.
    fn decay_step(lambda: f64, p0: f64, dt: f64) -> f64 {
        let g = Grid::periodic_2pi(4).unwrap();
        let s = State::new(VectorField::zeros(g), ScalarField::constant(g, p0), 0.0).unwrap();
        let rhs = |s: &State, _: &ForcingSpec, _: &ModelConfig| {
            Ok(Tendency { dv: VectorField::zeros(*s.grid()), dp: s.p.scaled(-lambda) })
        };
        let out = step_rk4(rhs, &s, &ForcingSpec::Zero, &ModelConfig::default(), dt).unwrap();
        out.p.values()[0]
    }

    #[test]
    fn rk4_local_error_is_fifth_order() {
        let lambda = 1.3;
        let err = |dt: f64| (decay_step(lambda, 1.0, dt) - (-lambda * dt).exp()).abs();
        let ratio = err(0.1) / err(0.05);
        // local error ∝ dt⁵ ⇒ ratio ≈ 32
        assert!((ratio - 32.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn half_steps_versus_full_step() {
        let lambda = 0.7;
        let gap = |dt: f64| {
            let half = decay_step(lambda, decay_step(lambda, 1.0, dt / 2.0), dt / 2.0);
            (half - decay_step(lambda, 1.0, dt)).abs()
        };
        let ratio = gap(0.2) / gap(0.1);
        assert!((ratio - 32.0).abs() < 2.5, "ratio {ratio}");
    }

    #[test]
    fn stable_dt_follows_the_acoustic_bound() {
        let g = Grid::periodic_2pi(64).unwrap();
        let s = State::new(VectorField::constant(g, [0.5, 0.0]), ScalarField::zeros(g), 0.0).unwrap();
        let dt1 = stable_dt(&s, &ModelConfig::temam(100.0, 1e4), 0.4);
        let dt2 = stable_dt(&s, &ModelConfig::temam(100.0, 2e4), 0.4);
        assert!((dt1 / dt2 - 2f64.sqrt()).abs() < 1e-12);
        let h = g.spacing();
        assert!((dt1 - 0.4 * h / 100.0).abs() < 1e-15);
    }

    #[test]
    fn blow_up_is_reported() {
        let g = Grid::periodic_2pi(16).unwrap();
        let v = VectorField::from_fn(g, |x, y| [x.sin(), y.cos()]);
        let s = State::new(v, ScalarField::zeros(g), 0.0).unwrap();
        let mut sim = Simulation::new(s, ModelConfig::temam(100.0, 1e6), ForcingSpec::Zero).unwrap();
        let mut result = Ok(());
        for _ in 0..200 {
            result = sim.step(1.0);
            if result.is_err() {
                break;
            }
        }
        assert!(matches!(result, Err(Error::BlowUp { .. })));
    }
}
