//! Second-order central-difference operators on periodic cell-centred fields.
//!
//! The central gradient and divergence are exact negative adjoints of each
//! other under the midpoint quadrature, which is what keeps the discrete
//! pressure work term out of the energy budget.

use serde::{Deserialize, Serialize};

use crate::fields::{Grid, ScalarField, VectorField};

/// How the nonlinear term `(v·∇)v` is discretised.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvectionForm {
    /// `v_j ∂_j v_i`
    #[default]
    Advective,
    /// `½ [v_j ∂_j v_i + ∂_j (v_j v_i)]`
    Skew,
}

#[inline]
fn wrap_prev(i: usize, n: usize) -> usize {
    if i == 0 { n - 1 } else { i - 1 }
}

#[inline]
fn wrap_next(i: usize, n: usize) -> usize {
    if i + 1 == n { 0 } else { i + 1 }
}

/// Central x-derivative of a raw row-major sample array.
pub(crate) fn ddx(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let inv = 0.5 / grid.spacing();
    let mut out = vec![0.0; f.len()];
    for j in 0..n {
        let row = j * n;
        for i in 0..n {
            out[row + i] = (f[row + wrap_next(i, n)] - f[row + wrap_prev(i, n)]) * inv;
        }
    }
    out
}

pub(crate) fn ddy(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let inv = 0.5 / grid.spacing();
    let mut out = vec![0.0; f.len()];
    for j in 0..n {
        let up = wrap_next(j, n) * n;
        let down = wrap_prev(j, n) * n;
        let row = j * n;
        for i in 0..n {
            out[row + i] = (f[up + i] - f[down + i]) * inv;
        }
    }
    out
}

fn lap5(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let inv = 1.0 / grid.cell_area();
    let mut out = vec![0.0; f.len()];
    for j in 0..n {
        let up = wrap_next(j, n) * n;
        let down = wrap_prev(j, n) * n;
        let row = j * n;
        for i in 0..n {
            let c = f[row + i];
            out[row + i] = (f[row + wrap_next(i, n)] + f[row + wrap_prev(i, n)] + f[up + i]
                + f[down + i]
                - 4.0 * c)
                * inv;
        }
    }
    out
}

pub fn gradient(s: &ScalarField) -> VectorField {
    let g = *s.grid();
    VectorField::from_raw(g, ddx(&g, s.values()), ddy(&g, s.values()))
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let g = *v.grid();
    let mut d = ddx(&g, v.x());
    for (a, b) in d.iter_mut().zip(ddy(&g, v.y())) {
        *a += b;
    }
    ScalarField::from_raw(g, d)
}

/// Five-point Laplacian, applied per component for vector fields.
pub trait Laplacian: Sized {
    fn laplacian(&self) -> Self;
}

impl Laplacian for ScalarField {
    fn laplacian(&self) -> Self {
        ScalarField::from_raw(*self.grid(), lap5(self.grid(), self.values()))
    }
}

impl Laplacian for VectorField {
    fn laplacian(&self) -> Self {
        let g = *self.grid();
        VectorField::from_raw(g, lap5(&g, self.x()), lap5(&g, self.y()))
    }
}

pub fn laplacian<F: Laplacian>(field: &F) -> F {
    field.laplacian()
}

fn advective(v: &VectorField) -> (Vec<f64>, Vec<f64>) {
    let g = v.grid();
    let (vx, vy) = (v.x(), v.y());
    let (ux_x, ux_y) = (ddx(g, vx), ddy(g, vx));
    let (uy_x, uy_y) = (ddx(g, vy), ddy(g, vy));
    let cx = (0..g.len()).map(|k| vx[k] * ux_x[k] + vy[k] * ux_y[k]).collect();
    let cy = (0..g.len()).map(|k| vx[k] * uy_x[k] + vy[k] * uy_y[k]).collect();
    (cx, cy)
}

/// Discrete `(v·∇)v` in the requested form.
pub fn convection(v: &VectorField, form: ConvectionForm) -> VectorField {
    let g = *v.grid();
    let (mut cx, mut cy) = advective(v);
    if form == ConvectionForm::Skew {
        let (vx, vy) = (v.x(), v.y());
        let xx: Vec<f64> = vx.iter().map(|a| a * a).collect();
        let xy: Vec<f64> = vx.iter().zip(vy).map(|(a, b)| a * b).collect();
        let yy: Vec<f64> = vy.iter().map(|a| a * a).collect();
        let (dxx, dxy_y) = (ddx(&g, &xx), ddy(&g, &xy));
        let (dxy_x, dyy) = (ddx(&g, &xy), ddy(&g, &yy));
        for k in 0..g.len() {
            cx[k] = 0.5 * (cx[k] + dxx[k] + dxy_y[k]);
            cy[k] = 0.5 * (cy[k] + dxy_x[k] + dyy[k]);
        }
    }
    VectorField::from_raw(g, cx, cy)
}

/// Advection of `v` by an arbitrary velocity `a`: `(a·∇)v`.
pub fn directional_derivative(a: [f64; 2], v: &VectorField) -> VectorField {
    let g = *v.grid();
    let dx = |f: &[f64]| ddx(&g, f);
    let dy = |f: &[f64]| ddy(&g, f);
    let combine = |fx: Vec<f64>, fy: Vec<f64>| -> Vec<f64> {
        fx.iter().zip(&fy).map(|(p, q)| a[0] * p + a[1] * q).collect()
    };
    VectorField::from_raw(g, combine(dx(v.x()), dy(v.x())), combine(dx(v.y()), dy(v.y())))
}

/// `∇(∇·v)` as the composition of the central divergence and gradient.
pub fn grad_div(v: &VectorField) -> VectorField {
    gradient(&divergence(v))
}

/// Frobenius norm squared of the central velocity gradient, pointwise.
pub fn velocity_gradient_sq(v: &VectorField) -> ScalarField {
    let g = *v.grid();
    let (a, b) = (ddx(&g, v.x()), ddy(&g, v.x()));
    let (c, d) = (ddx(&g, v.y()), ddy(&g, v.y()));
    let values = (0..g.len()).map(|k| a[k] * a[k] + b[k] * b[k] + c[k] * c[k] + d[k] * d[k]).collect();
    ScalarField::from_raw(g, values)
}
