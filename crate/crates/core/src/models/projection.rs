//! Pressure projection for the incompressible reference solver.
//!
//! The Poisson operator is the composition `∇_h·∇_h` of the central
//! divergence and gradient, so a projected field is discretely solenoidal to
//! solver tolerance. On even grids that operator also annihilates the four
//! sub-lattice indicator fields; right-hand sides are cleaned of those
//! components and the iteration never leaves their orthogonal complement.

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField, VectorField};
use crate::operators::{convection, ddx, ddy, divergence, gradient, laplacian};

use super::{ForcingSpec, ModelConfig, ModelKind, State};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonSolver {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for PoissonSolver {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_iter: 20_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Removes the mean over each of the `(i mod 2, j mod 2)` sub-lattices (or
/// the global mean on odd grids).
fn remove_null_space(grid: &Grid, f: &mut [f64]) {
    let n = grid.n();
    if n % 2 == 1 {
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        f.iter_mut().for_each(|v| *v -= mean);
        return;
    }
    let mut sums = [0.0; 4];
    for j in 0..n {
        for i in 0..n {
            sums[(j % 2) * 2 + i % 2] += f[j * n + i];
        }
    }
    let count = (f.len() / 4) as f64;
    for j in 0..n {
        for i in 0..n {
            f[j * n + i] -= sums[(j % 2) * 2 + i % 2] / count;
        }
    }
}

/// `-∇_h·∇_h`, symmetric positive semidefinite.
fn neg_div_grad(grid: &Grid, x: &[f64]) -> Vec<f64> {
    let gx = ddx(grid, x);
    let gy = ddy(grid, x);
    let mut out = ddx(grid, &gx);
    for (o, b) in out.iter_mut().zip(ddy(grid, &gy)) {
        *o = -(*o + b);
    }
    out
}

impl PoissonSolver {
    /// Solves `∇_h·∇_h φ = rhs` by conjugate gradients, warm-started from
    /// `guess`. The returned potential has zero mean.
    pub fn solve(
        &self,
        rhs: &ScalarField,
        guess: Option<&ScalarField>,
    ) -> Result<(ScalarField, PoissonStats)> {
        let grid = *rhs.grid();
        let mut b: Vec<f64> = rhs.values().iter().map(|v| -v).collect();
        remove_null_space(&grid, &mut b);
        let b_norm = dot(&b, &b).sqrt();
        if b_norm == 0.0 {
            return Ok((ScalarField::zeros(grid), PoissonStats { iterations: 0, rel_residual: 0.0 }));
        }

        let mut x = match guess {
            Some(g) => {
                grid.ensure_same(g.grid())?;
                g.values().to_vec()
            }
            None => vec![0.0; grid.len()],
        };
        remove_null_space(&grid, &mut x);

        let ax = neg_div_grad(&grid, &x);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        remove_null_space(&grid, &mut r);
        let mut p = r.clone();
        let mut rs_old = dot(&r, &r);
        let target = self.rel_tol * b_norm;

        let mut iterations = 0;
        while rs_old.sqrt() > target {
            if iterations == self.max_iter {
                return Err(Error::PoissonNotConverged {
                    iterations,
                    residual: rs_old.sqrt() / b_norm,
                });
            }
            let ap = neg_div_grad(&grid, &p);
            let alpha = rs_old / dot(&p, &ap);
            for k in 0..x.len() {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            let rs_new = dot(&r, &r);
            let beta = rs_new / rs_old;
            for k in 0..p.len() {
                p[k] = r[k] + beta * p[k];
            }
            rs_old = rs_new;
            iterations += 1;
        }

        let mean = x.iter().sum::<f64>() / x.len() as f64;
        x.iter_mut().for_each(|v| *v -= mean);
        let stats = PoissonStats { iterations, rel_residual: rs_old.sqrt() / b_norm };
        Ok((ScalarField::from_raw(grid, x), stats))
    }
}

/// Helmholtz projection onto discretely solenoidal fields. Returns the
/// projected field and the potential `φ` with `w = u - ∇φ`.
pub fn project(
    u: &VectorField,
    solver: &PoissonSolver,
    guess: Option<&ScalarField>,
) -> Result<(VectorField, ScalarField)> {
    let (phi, _) = solver.solve(&divergence(u), guess)?;
    Ok((u.sub(&gradient(&phi)), phi))
}

fn momentum_without_pressure(
    v: &VectorField,
    time: f64,
    forcing: &ForcingSpec,
    cfg: &ModelConfig,
) -> Result<VectorField> {
    let mut f = convection(v, cfg.convection).scaled(-1.0);
    f.axpy(1.0 / cfg.re, &laplacian(v));
    if !forcing.is_zero() {
        f.axpy(1.0, &forcing.evaluate(v.grid(), time)?);
    }
    Ok(f)
}

/// The incompressible pressure of a solenoidal velocity: the potential that
/// makes `∂v/∂t` solenoidal.
pub fn incompressible_pressure(
    v: &VectorField,
    time: f64,
    forcing: &ForcingSpec,
    cfg: &ModelConfig,
    guess: Option<&ScalarField>,
) -> Result<ScalarField> {
    let f = momentum_without_pressure(v, time, forcing, cfg)?;
    Ok(project(&f, &PoissonSolver::default(), guess)?.1)
}

/// One step of the incompressible solver.
///
/// Each of the four Runge-Kutta stages is a Chorin splitting: the explicit
/// advection-diffusion predictor is projected onto solenoidal fields by a
/// pressure Poisson solve. The combined update is projected once more so the
/// returned velocity is solenoidal to solver tolerance, and the returned
/// pressure is the one consistent with the new velocity.
pub fn incompressible_step(
    state: &State,
    forcing: &ForcingSpec,
    cfg: &ModelConfig,
    dt: f64,
) -> Result<State> {
    cfg.require_model(ModelKind::Incompressible)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig(format!("time step must be positive, got {dt}")));
    }
    let solver = PoissonSolver::default();
    let t0 = state.time;
    let mut pressure = state.p.clone();

    let mut stage = |v: &VectorField, t: f64| -> Result<VectorField> {
        let f = momentum_without_pressure(v, t, forcing, cfg)?;
        let (k, phi) = project(&f, &solver, Some(&pressure))?;
        pressure = phi;
        Ok(k)
    };

    let v0 = &state.v;
    let k1 = stage(v0, t0)?;
    let mut tmp = v0.clone();
    tmp.axpy(0.5 * dt, &k1);
    let k2 = stage(&tmp, t0 + 0.5 * dt)?;
    let mut tmp = v0.clone();
    tmp.axpy(0.5 * dt, &k2);
    let k3 = stage(&tmp, t0 + 0.5 * dt)?;
    let mut tmp = v0.clone();
    tmp.axpy(dt, &k3);
    let k4 = stage(&tmp, t0 + dt)?;

    let mut v = v0.clone();
    v.axpy(dt / 6.0, &k1);
    v.axpy(dt / 3.0, &k2);
    v.axpy(dt / 3.0, &k3);
    v.axpy(dt / 6.0, &k4);
    let (v, _) = project(&v, &solver, None)?;
    let p = incompressible_pressure(&v, t0 + dt, forcing, cfg, Some(&pressure))?;

    if !v.is_finite() || !p.is_finite() {
        return Err(Error::BlowUp { time: t0 + dt, cfl: dt * v0.max_magnitude() / v0.grid().spacing() });
    }
    Ok(State { v, p, time: t0 + dt })
}
