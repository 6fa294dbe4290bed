use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::InitialCondition;
use super::io::read_snapshot;
use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField, VectorField};
use crate::models::State;

/// `v = (sin kx cos ky, -cos kx sin ky)`, `p = ¼(cos 2kx + cos 2ky)` with
/// `k` the base wavenumber of the grid.
pub fn taylor_green(grid: Grid) -> State {
    taylor_green_exact(grid, f64::INFINITY, 0.0)
}

/// The decaying Taylor–Green solution at time `t` for Reynolds number `re`.
pub fn taylor_green_exact(grid: Grid, re: f64, t: f64) -> State {
    let k = grid.base_wavenumber();
    let decay = (-2.0 * k * k * t / re).exp();
    let v = VectorField::from_fn(grid, |x, y| {
        [decay * (k * x).sin() * (k * y).cos(), -decay * (k * x).cos() * (k * y).sin()]
    });
    let p = ScalarField::from_fn(grid, |x, y| 0.25 * decay * decay * ((2.0 * k * x).cos() + (2.0 * k * y).cos()));
    State { v, p, time: t }
}

/// `v = ∇φ`, `φ = (A/k) exp(-cos kx - cos ky - 2)`: a converging bump with
/// peak `|v| = A·O(1)` at the cell centre.
pub fn compressive_pulse(grid: Grid, amplitude: f64) -> VectorField {
    let k = grid.base_wavenumber();
    VectorField::from_fn(grid, |x, y| {
        let e = amplitude * (-(k * x).cos() - (k * y).cos() - 2.0).exp();
        [e * (k * x).sin(), e * (k * y).sin()]
    })
}

fn random_smooth(grid: Grid, seed: u64, modes: u32, amplitude: f64) -> Result<VectorField> {
    if modes == 0 || !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::Experiment(format!("random_smooth needs modes > 0 and amplitude ≥ 0, got {modes}, {amplitude}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = modes as i32;
    let mut terms = Vec::new();
    for ky in -m..=m {
        for kx in -m..=m {
            if (kx, ky) == (0, 0) {
                continue;
            }
            let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let decay = 1.0 / ((kx * kx + ky * ky) as f64).sqrt();
            terms.push((kx as f64, ky as f64, c.map(|a| a * decay)));
        }
    }
    let k0 = grid.base_wavenumber();
    let v = VectorField::from_fn(grid, |x, y| {
        let mut out = [0.0; 2];
        for (kx, ky, c) in &terms {
            let (s, co) = (k0 * (kx * x + ky * y)).sin_cos();
            out[0] += c[0] * co + c[1] * s;
            out[1] += c[2] * co + c[3] * s;
        }
        out
    });
    let peak = v.max_magnitude();
    Ok(if peak > 0.0 { v.scaled(amplitude / peak) } else { v })
}

/// Builds the initial state on `grid`; `seed` is the run seed used when the
/// spec carries none.
pub fn initial_condition(spec: &InitialCondition, grid: Grid, seed: u64) -> Result<State> {
    match spec {
        InitialCondition::TaylorGreen { perturbation } => {
            let mut s = taylor_green(grid);
            if *perturbation != 0.0 {
                s.v.axpy(*perturbation, &compressive_pulse(grid, 1.0));
            }
            State::new(s.v, s.p, 0.0)
        }
        InitialCondition::CompressivePulse { amplitude } => {
            State::new(compressive_pulse(grid, *amplitude), ScalarField::zeros(grid), 0.0)
        }
        InitialCondition::RandomSmooth { seed: own, modes, amplitude } => {
            let v = random_smooth(grid, own.unwrap_or(seed), *modes, *amplitude)?;
            State::new(v, ScalarField::zeros(grid), 0.0)
        }
        InitialCondition::FromSnapshot { path } => {
            let state = read_snapshot(path)?;
            if state.grid() != &grid {
                return Err(Error::GridMismatch { left: state.grid().to_string(), right: grid.to_string() });
            }
            Ok(state)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::integrate;
    use crate::operators::divergence;
    use crate::fields::l2_norm;
    use std::f64::consts::PI;

    #[test]
    fn taylor_green_oracles() {
        let g = Grid::periodic_2pi(32).unwrap();
        let s = initial_condition(&InitialCondition::TaylorGreen { perturbation: 0.0 }, g, 0).unwrap();
        assert!(l2_norm(&divergence(&s.v)) < 1e-12);
        let e = 0.5 * integrate(&s.v.magnitude_sq());
        assert!((e - PI * PI).abs() < 1e-10);
        let exact = taylor_green_exact(g, 100.0, 0.0);
        assert_eq!(exact.v, s.v);
    }

    #[test]
    fn taylor_green_scales_with_period() {
        let g = Grid::new(32, 1.0).unwrap();
        let s = taylor_green(g);
        // energy density is ¼ on average
        assert!((integrate(&s.v.magnitude_sq()) * 0.5 - 0.25).abs() < 1e-12);
        assert!(l2_norm(&divergence(&s.v)) < 1e-12);
    }

    #[test]
    fn compressive_pulse_has_divergence() {
        let g = Grid::periodic_2pi(64).unwrap();
        let s = initial_condition(&InitialCondition::CompressivePulse { amplitude: 0.5 }, g, 0).unwrap();
        let d = l2_norm(&divergence(&s.v));
        assert!(d > 0.1, "{d}");
        assert_eq!(s.p.max_abs(), 0.0);
        // converging towards the centre
        assert!(divergence(&s.v).at(32, 32) < 0.0);
    }

    #[test]
    fn random_smooth_is_seeded_and_normalised() {
        let g = Grid::periodic_2pi(16).unwrap();
        let spec = |seed| InitialCondition::RandomSmooth { seed, modes: 3, amplitude: 0.7 };
        let a = initial_condition(&spec(Some(5)), g, 0).unwrap();
        let b = initial_condition(&spec(None), g, 5).unwrap();
        let c = initial_condition(&spec(Some(6)), g, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.v.max_magnitude() - 0.7).abs() < 1e-12);
        assert!(initial_condition(&InitialCondition::RandomSmooth { seed: None, modes: 0, amplitude: 1.0 }, g, 0)
            .is_err());
    }
}
