//! Lagrangian check that the power of the inertial force equals the rate
//! of kinetic energy of a region convected with the fluid.
//!
//! Particles carry a quadrature weight `w` (referential area) and a
//! Jacobian `J` with `J̇ = J ∇·v`, so `Σ w J g(x)` approximates `∫_Ω(t) g`.

use serde::{Deserialize, Serialize};

use super::energy::uniform_spacing;
use crate::error::{Error, Result};
use crate::fields::{ScalarField, VectorField};
use crate::interp::Interpolation;
use crate::models::State;
use crate::operators::{convection, divergence, ConvectionForm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleSet {
    positions: Vec<[f64; 2]>,
    jacobians: Vec<f64>,
    weights: Vec<f64>,
}

impl ParticleSet {
    pub fn new(positions: Vec<[f64; 2]>, jacobians: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if jacobians.len() != positions.len() || weights.len() != positions.len() {
            return Err(Error::SampleCount { expected: positions.len(), found: jacobians.len().min(weights.len()) });
        }
        if let Some(index) = jacobians.iter().position(|j| !(j.is_finite() && *j > 0.0)) {
            return Err(Error::ParticleDegraded { index, reason: format!("jacobian {}", jacobians[index]) });
        }
        if let Some(index) = positions.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::NonFinite { index });
        }
        if let Some(index) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { positions, jacobians, weights })
    }

    /// `m × m` particles at the midpoints of a uniform lattice on the square
    /// `[origin, origin + side)²`, each with weight `(side/m)²` and `J = 1`.
    pub fn seed_uniform(origin: [f64; 2], side: f64, m: usize) -> Result<Self> {
        if m == 0 || !(side > 0.0) {
            return Err(Error::InvalidConfig(format!("particle lattice {m}×{m} on side {side}")));
        }
        let d = side / m as f64;
        let positions = (0..m * m)
            .map(|k| [origin[0] + (k % m) as f64 * d + 0.5 * d, origin[1] + (k / m) as f64 * d + 0.5 * d])
            .collect();
        Self::new(positions, vec![1.0; m * m], vec![d * d; m * m])
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn jacobians(&self) -> &[f64] {
        &self.jacobians
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportOptions {
    /// Catmull-Rom by default: bilinear gradients are only first order,
    /// which caps the agreement of the two Jacobian routes.
    pub interpolation: Interpolation,
    /// Reference density multiplying every energy and power term.
    pub rho_star: f64,
    /// Also evolve `∂ρ/∂t = -∇·(ρv)` from `ρ = ρ*` and compare `J` with `ρ*/ρ`.
    pub co_evolve_density: bool,
    /// Largest particle displacement per step, in cells.
    pub max_cells_per_step: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self { interpolation: Interpolation::CatmullRom, rho_star: 1.0, co_evolve_density: true, max_cells_per_step: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    pub times: Vec<f64>,
    /// `d/dt Σ w J ρ*|v|²/2` by centred differences.
    pub lhs: Vec<f64>,
    /// `Σ w J (ρ* v̇ + (ρ*/2)(∇·v) v)·v` at the particle positions.
    pub rhs: Vec<f64>,
    /// `max |lhs - rhs|`
    pub gap: f64,
    /// Largest over sampled times of the weighted RMS of `J - ρ*/ρ` over
    /// particles, when density is co-evolved.
    pub j_route_gap: Option<f64>,
    pub particles: ParticleSet,
}

struct Tracer {
    pos: [f64; 2],
    ln_j: f64,
}

fn tracer_rate(v: &VectorField, div: &ScalarField, pos: [f64; 2], kind: Interpolation) -> [f64; 3] {
    let u = v.sample(pos[0], pos[1], kind);
    [u[0], u[1], div.sample(pos[0], pos[1], kind)]
}

/// RK4 over `[t, t + 2Δ]` with the odd trajectory sample as the midpoint.
fn advect(t: &mut Tracer, fields: [(&VectorField, &ScalarField); 3], dt: f64, kind: Interpolation) {
    let at = |pos: [f64; 2], lj: f64, k: [f64; 3], s: f64| ([pos[0] + s * k[0], pos[1] + s * k[1]], lj + s * k[2]);
    let k1 = tracer_rate(fields[0].0, fields[0].1, t.pos, kind);
    let (p2, _) = at(t.pos, t.ln_j, k1, 0.5 * dt);
    let k2 = tracer_rate(fields[1].0, fields[1].1, p2, kind);
    let (p3, _) = at(t.pos, t.ln_j, k2, 0.5 * dt);
    let k3 = tracer_rate(fields[1].0, fields[1].1, p3, kind);
    let (p4, _) = at(t.pos, t.ln_j, k3, dt);
    let k4 = tracer_rate(fields[2].0, fields[2].1, p4, kind);
    for c in 0..2 {
        t.pos[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }
    t.ln_j += dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
}

fn continuity_rate(rho: &ScalarField, v: &VectorField) -> ScalarField {
    divergence(&v.scale_by(rho)).scaled(-1.0)
}

fn evolve_density(rho: &ScalarField, v: [&VectorField; 3], dt: f64) -> ScalarField {
    let stage = |r: &ScalarField, k: &ScalarField, s: f64| {
        let mut out = r.clone();
        out.axpy(s, k);
        out
    };
    let k1 = continuity_rate(rho, v[0]);
    let k2 = continuity_rate(&stage(rho, &k1, 0.5 * dt), v[1]);
    let k3 = continuity_rate(&stage(rho, &k2, 0.5 * dt), v[1]);
    let k4 = continuity_rate(&stage(rho, &k3, dt), v[2]);
    let mut out = rho.clone();
    for (w, k) in [(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)] {
        out.axpy(w * dt / 6.0, k);
    }
    out
}

/// Advects `particles` through `trajectory` and compares the rate of the
/// convected kinetic energy with the power of the inertial force.
///
/// Particles move with steps of two trajectory intervals, so an odd number
/// of samples (at least five) uses every sample. `lhs` and `rhs` are
/// reported at the interior even samples.
pub fn transport_check(trajectory: &[State], particles: &ParticleSet, options: &TransportOptions) -> Result<TransportReport> {
    if trajectory.len() < 5 {
        return Err(Error::TooFewSamples { needed: 5, found: trajectory.len() });
    }
    let delta = uniform_spacing(trajectory)?;
    let grid = *trajectory[0].grid();
    for s in trajectory {
        grid.ensure_same(s.grid())?;
    }
    let kind = options.interpolation;
    let rho_star = options.rho_star;
    let steps = (trajectory.len() - 1) / 2;
    let divs: Vec<ScalarField> = trajectory.iter().map(|s| divergence(&s.v)).collect();
    let max_shift = options.max_cells_per_step * grid.spacing();
    let total_weight: f64 = particles.weights.iter().sum();
    if !(total_weight > 0.0) {
        return Err(Error::InvalidConfig("particle weights sum to zero".into()));
    }

    let mut tracers: Vec<Tracer> =
        particles.positions.iter().zip(&particles.jacobians).map(|(p, j)| Tracer { pos: *p, ln_j: j.ln() }).collect();
    let mut rho = options.co_evolve_density.then(|| ScalarField::constant(grid, rho_star));
    let mut j_route_gap = options.co_evolve_density.then_some(0.0f64);

    // (Σ w J ρ*|v|²/2, Σ w J (ρ* v̇ + ρ*/2 (∇·v) v)·v) at every even sample
    let mut energy = Vec::with_capacity(steps + 1);
    let mut power = Vec::with_capacity(steps + 1);
    for m in 0..=steps {
        let k = 2 * m;
        let state = &trajectory[k];
        let accel = (m > 0 && m < steps).then(|| {
            let mut a = trajectory[k + 1].v.sub(&trajectory[k - 1].v).scaled(0.5 / delta);
            a.axpy(1.0, &convection(&state.v, ConvectionForm::Advective));
            a
        });
        let mut e = 0.0;
        let mut pw = 0.0;
        let mut j_sq = 0.0;
        for (t, w) in tracers.iter().zip(&particles.weights) {
            let j = t.ln_j.exp();
            let u = state.v.sample(t.pos[0], t.pos[1], kind);
            let speed_sq = u[0] * u[0] + u[1] * u[1];
            e += w * j * 0.5 * rho_star * speed_sq;
            if let Some(a) = &accel {
                let acc = a.sample(t.pos[0], t.pos[1], kind);
                let d = divs[k].sample(t.pos[0], t.pos[1], kind);
                pw += w * j * rho_star * ((acc[0] * u[0] + acc[1] * u[1]) + 0.5 * d * speed_sq);
            }
            if let Some(r) = &rho {
                let from_density = rho_star / r.sample(t.pos[0], t.pos[1], kind);
                j_sq += w * (j - from_density).powi(2);
            }
        }
        if let Some(gap) = j_route_gap.as_mut() {
            *gap = gap.max((j_sq / total_weight).sqrt());
        }
        energy.push(e);
        power.push(pw);

        if m == steps {
            break;
        }
        let fields = [(&trajectory[k].v, &divs[k]), (&trajectory[k + 1].v, &divs[k + 1]), (&trajectory[k + 2].v, &divs[k + 2])];
        for (index, t) in tracers.iter_mut().enumerate() {
            let before = t.pos;
            advect(t, fields, 2.0 * delta, kind);
            let shift = ((t.pos[0] - before[0]).powi(2) + (t.pos[1] - before[1]).powi(2)).sqrt();
            if !(shift <= max_shift) || !t.ln_j.is_finite() {
                return Err(Error::ParticleDegraded {
                    index,
                    reason: format!("moved {shift:.3e} with ln J = {:.3e} at t = {}", t.ln_j, trajectory[k + 2].time),
                });
            }
        }
        if let Some(r) = rho.as_mut() {
            *r = evolve_density(r, [&trajectory[k].v, &trajectory[k + 1].v, &trajectory[k + 2].v], 2.0 * delta);
            if r.min() <= 0.0 || !r.is_finite() {
                return Err(Error::NonPositiveDensity { index: 0, value: r.min() });
            }
        }
    }

    let mut times = Vec::with_capacity(steps.saturating_sub(1));
    let mut lhs = Vec::with_capacity(times.capacity());
    let mut rhs = Vec::with_capacity(times.capacity());
    let mut gap = 0.0f64;
    for m in 1..steps {
        let l = (energy[m + 1] - energy[m - 1]) / (4.0 * delta);
        times.push(trajectory[2 * m].time);
        lhs.push(l);
        rhs.push(power[m]);
        gap = gap.max((l - power[m]).abs());
    }
    let positions = tracers.iter().map(|t| t.pos).collect();
    let jacobians = tracers.iter().map(|t| t.ln_j.exp()).collect();
    let particles = ParticleSet::new(positions, jacobians, particles.weights.clone())?;
    Ok(TransportReport { times, lhs, rhs, gap, j_route_gap, particles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::observed_order;
    use crate::fields::Grid;
    use crate::models::{ForcingSpec, ModelConfig, Simulation};
    use std::f64::consts::PI;

    fn frozen(v: VectorField, samples: usize, dt: f64) -> Vec<State> {
        let g = *v.grid();
        (0..samples).map(|k| State::new(v.clone(), ScalarField::zeros(g), k as f64 * dt).unwrap()).collect()
    }

    #[test]
    fn seeding() {
        let p = ParticleSet::seed_uniform([1.0, 2.0], 2.0, 4).unwrap();
        assert_eq!(p.len(), 16);
        assert_eq!(p.positions()[0], [1.25, 2.25]);
        assert_eq!(p.positions()[5], [1.75, 2.75]);
        assert!((p.weights().iter().sum::<f64>() - 4.0).abs() < 1e-15);
        assert!(ParticleSet::new(vec![[0.0, 0.0]], vec![0.0], vec![1.0]).is_err());
        assert!(ParticleSet::new(vec![[0.0, 0.0]], vec![1.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn rest_flow() {
        let g = Grid::periodic_2pi(16).unwrap();
        let traj = frozen(VectorField::zeros(g), 7, 0.1);
        let p = ParticleSet::seed_uniform([1.0, 1.0], 2.0, 4).unwrap();
        let r = transport_check(&traj, &p, &TransportOptions::default()).unwrap();
        assert_eq!(r.lhs, vec![0.0, 0.0]);
        assert_eq!(r.rhs, vec![0.0, 0.0]);
        assert_eq!(r.gap, 0.0);
        assert_eq!(r.particles.positions(), p.positions());
    }

    #[test]
    fn uniform_flow_keeps_unit_jacobian() {
        let g = Grid::periodic_2pi(16).unwrap();
        let traj = frozen(VectorField::constant(g, [0.5, -0.25]), 9, 0.1);
        let p = ParticleSet::seed_uniform([1.0, 1.0], 2.0, 4).unwrap();
        let r = transport_check(&traj, &p, &TransportOptions::default()).unwrap();
        assert!(r.gap < 1e-13);
        assert!(r.rhs.iter().all(|x| x.abs() < 1e-13));
        assert!(r.particles.jacobians().iter().all(|j| (j - 1.0).abs() < 1e-14));
        let moved = r.particles.positions()[0];
        assert!((moved[0] - (p.positions()[0][0] + 0.4)).abs() < 1e-12);
        assert!(r.j_route_gap.unwrap() < 1e-13);
    }

    #[test]
    fn too_few_samples_and_runaway_particles() {
        let g = Grid::periodic_2pi(16).unwrap();
        let p = ParticleSet::seed_uniform([1.0, 1.0], 2.0, 2).unwrap();
        let opts = TransportOptions::default();
        assert!(matches!(
            transport_check(&frozen(VectorField::zeros(g), 4, 0.1), &p, &opts),
            Err(Error::TooFewSamples { .. })
        ));
        let fast = frozen(VectorField::constant(g, [50.0, 0.0]), 5, 0.1);
        assert!(matches!(transport_check(&fast, &p, &opts), Err(Error::ParticleDegraded { .. })));
    }

    fn pulse(g: Grid) -> State {
        // converging bump centred on the particle patch
        let v = VectorField::from_fn(g, |x, y| {
            let e = (-x.cos() - y.cos() - 2.0).exp();
            [0.5 * x.sin() * e, 0.5 * y.sin() * e]
        });
        State::new(v, ScalarField::zeros(g), 0.0).unwrap()
    }

    fn gaps_dt(n: usize, kind: Interpolation, dt: f64, m: usize) -> (f64, f64) {
        let g = Grid::periodic_2pi(n).unwrap();
        let cfg = ModelConfig::temam(100.0, 10.0);
        let mut sim = Simulation::new(pulse(g), cfg, ForcingSpec::Zero).unwrap();
        let steps = 2 * (0.32 / dt).round() as usize;
        let traj = sim.trajectory(dt, steps, 1).unwrap();
        let side = PI / 2.0;
        let p = ParticleSet::seed_uniform([PI - side / 2.0, PI - side / 2.0], side, m).unwrap();
        let opts = TransportOptions { interpolation: kind, ..TransportOptions::default() };
        let r = transport_check(&traj, &p, &opts).unwrap();
        (r.gap, r.j_route_gap.unwrap())
    }

    #[test]
    fn compressive_flow_converges() {
        let opts = TransportOptions::default();
        let (g1, j1) = gaps_dt(32, opts.interpolation, 0.02, 16);
        let (g2, j2) = gaps_dt(64, opts.interpolation, 0.01, 32);
        assert!(observed_order(g1, g2) > 1.6, "gap {g1:.3e} -> {g2:.3e}");
        assert!(observed_order(j1, j2) > 1.8, "J routes {j1:.3e} -> {j2:.3e}");
    }

    #[test]
    fn bilinear_jacobian_routes_lag_behind() {
        let order = |kind| {
            let (_, j1) = gaps_dt(32, kind, 0.02, 16);
            let (_, j2) = gaps_dt(64, kind, 0.01, 32);
            observed_order(j1, j2)
        };
        let (bilinear, cubic) = (order(Interpolation::Bilinear), order(Interpolation::CatmullRom));
        assert!(bilinear < 1.9 && cubic > 1.95, "bilinear {bilinear}, Catmull-Rom {cubic}");
    }
}
