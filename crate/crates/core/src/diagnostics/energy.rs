use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{inner_product, integrate};
use crate::models::{ForcingSpec, ModelConfig, State};
use crate::operators::{divergence, velocity_gradient_sq};

/// Energy budget at one trajectory sample.
///
/// `residual = d/dt(e_kin + e_press) - injection + dissipation`, which the
/// quasi-incompressible system with its extra force closes exactly in the
/// continuum. Without the extra force the residual equals
/// `defect_predicted = ½∫(∇·v)|v|²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBudgetRow {
    pub time: f64,
    pub e_kin: f64,
    pub e_press: f64,
    pub dissipation: f64,
    pub injection: f64,
    pub defect_predicted: f64,
    pub residual: f64,
}

impl EnergyBudgetRow {
    pub const CSV_HEADER: [&'static str; 7] =
        ["time", "e_kin", "e_press", "dissipation", "injection", "defect_predicted", "residual"];

    pub fn values(&self) -> [f64; 7] {
        [
            self.time,
            self.e_kin,
            self.e_press,
            self.dissipation,
            self.injection,
            self.defect_predicted,
            self.residual,
        ]
    }

    pub fn total_energy(&self) -> f64 {
        self.e_kin + self.e_press
    }
}

/// Sampling interval of a trajectory, checked to be uniform.
pub fn uniform_spacing(trajectory: &[State]) -> Result<f64> {
    if trajectory.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, found: trajectory.len() });
    }
    let dt = trajectory[1].time - trajectory[0].time;
    if !(dt > 0.0) {
        return Err(Error::NonUniformSampling(format!("non-increasing times, first step {dt}")));
    }
    for w in trajectory.windows(2) {
        let step = w[1].time - w[0].time;
        if ((step - dt) / dt).abs() > 1e-6 {
            return Err(Error::NonUniformSampling(format!("step {step} differs from {dt}")));
        }
    }
    Ok(dt)
}

fn pressure_energy(state: &State, cfg: &ModelConfig) -> f64 {
    if cfg.uses_bulk_modulus() {
        integrate(&state.p.mul(&state.p)) / (2.0 * cfg.k)
    } else {
        0.0
    }
}

/// One row per interior sample; time derivatives are centred differences
/// over the stored samples.
pub fn energy_audit(trajectory: &[State], forcing: &ForcingSpec, cfg: &ModelConfig) -> Result<Vec<EnergyBudgetRow>> {
    if trajectory.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, found: trajectory.len() });
    }
    let dt = uniform_spacing(trajectory)?;
    let grid = *trajectory[0].grid();
    for s in trajectory {
        grid.ensure_same(s.grid())?;
    }

    let e_kin: Vec<f64> = trajectory.iter().map(|s| 0.5 * integrate(&s.v.magnitude_sq())).collect();
    let e_press: Vec<f64> = trajectory.iter().map(|s| pressure_energy(s, cfg)).collect();

    let mut rows = Vec::with_capacity(trajectory.len() - 2);
    for k in 1..trajectory.len() - 1 {
        let s = &trajectory[k];
        let dissipation = integrate(&velocity_gradient_sq(&s.v)) / cfg.re;
        let injection = if forcing.is_zero() {
            0.0
        } else {
            inner_product(&forcing.evaluate(&grid, s.time)?, &s.v)?
        };
        let defect_predicted = 0.5 * integrate(&divergence(&s.v).mul(&s.v.magnitude_sq()));
        let rate = (e_kin[k + 1] + e_press[k + 1] - e_kin[k - 1] - e_press[k - 1]) / (2.0 * dt);
        rows.push(EnergyBudgetRow {
            time: s.time,
            e_kin: e_kin[k],
            e_press: e_press[k],
            dissipation,
            injection,
            defect_predicted,
            residual: rate - injection + dissipation,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Grid, ScalarField, VectorField};
    use crate::models::{ExtraForce, Simulation};

    #[test]
    fn rest_trajectory_gives_zero_rows() {
        let g = Grid::periodic_2pi(8).unwrap();
        let traj: Vec<State> = (0..5)
            .map(|k| State { time: 0.1 * k as f64, ..State::rest(g) })
            .collect();
        let rows = energy_audit(&traj, &ForcingSpec::Zero, &ModelConfig::temam(10.0, 10.0)).unwrap();
        assert_eq!(rows.len(), 3);
        for r in rows {
            assert_eq!([r.e_kin, r.e_press, r.dissipation, r.injection, r.defect_predicted, r.residual], [0.0; 6]);
        }
    }

    #[test]
    fn too_few_or_irregular_samples() {
        let g = Grid::periodic_2pi(8).unwrap();
        let cfg = ModelConfig::temam(10.0, 10.0);
        let two = vec![State::rest(g), State { time: 1.0, ..State::rest(g) }];
        assert!(matches!(energy_audit(&two, &ForcingSpec::Zero, &cfg), Err(Error::TooFewSamples { .. })));
        let uneven: Vec<State> =
            [0.0, 1.0, 3.0].iter().map(|&t| State { time: t, ..State::rest(g) }).collect();
        assert!(matches!(energy_audit(&uneven, &ForcingSpec::Zero, &cfg), Err(Error::NonUniformSampling(_))));
    }

    fn pulse(g: Grid) -> State {
        let v = VectorField::from_fn(g, |x, y| {
            let e = (x.cos() + y.cos() - 2.0).exp();
            [-0.5 * x.sin() * e, -0.5 * y.sin() * e]
        });
        State::new(v, ScalarField::zeros(g), 0.0).unwrap()
    }

    #[test]
    fn residual_tracks_defect_without_extra_force() {
        let g = Grid::periodic_2pi(32).unwrap();
        let run = |ef| {
            let cfg = ModelConfig::temam(50.0, 10.0).with_extra_force(ef);
            let mut sim = Simulation::new(pulse(g), cfg.clone(), ForcingSpec::Zero).unwrap();
            let dt = sim.stable_dt(0.4);
            let traj = sim.trajectory(dt, 40, 1).unwrap();
            energy_audit(&traj, &ForcingSpec::Zero, &cfg).unwrap()
        };
        let with = run(ExtraForce::Temam);
        let without = run(ExtraForce::None);
        let max_defect = without.iter().map(|r| r.defect_predicted.abs()).fold(0.0, f64::max);
        let max_with = with.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
        let max_gap = without.iter().map(|r| (r.residual - r.defect_predicted).abs()).fold(0.0, f64::max);
        assert!(max_defect > 10.0 * max_with, "defect {max_defect} vs closed residual {max_with}");
        assert!(max_defect > 10.0 * max_gap);
    }

    #[test]
    fn forcing_injection_is_reported() {
        let g = Grid::periodic_2pi(16).unwrap();
        let v = VectorField::from_fn(g, |_, y| [y.sin(), 0.0]);
        let traj: Vec<State> = (0..3)
            .map(|k| State::new(v.clone(), ScalarField::zeros(g), k as f64 * 0.1).unwrap())
            .collect();
        let f = ForcingSpec::SteadyShear { amplitude: 2.0, mode: 1 };
        let rows = energy_audit(&traj, &f, &ModelConfig::temam(1.0, 1.0)).unwrap();
        // ∫ 2 sin²y = 2 · 2π · π
        let expected = 4.0 * std::f64::consts::PI.powi(2);
        assert!((rows[0].injection - expected).abs() < 1e-10);
    }
}
