//! Periodic interpolation of cell-centred samples.

use serde::{Deserialize, Serialize};

use crate::fields::{Grid, ScalarField, VectorField};

/// Bilinear reproduces values to second order but its gradient only to
/// first order; Catmull-Rom is C¹ with second-order gradients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Bilinear,
    CatmullRom,
}

#[derive(Clone, Copy, Debug)]
struct Stencil {
    i0: usize,
    i1: usize,
    j0: usize,
    j1: usize,
    tx: f64,
    ty: f64,
}

fn locate(grid: &Grid, x: f64, y: f64) -> Stencil {
    let n = grid.n() as isize;
    let h = grid.spacing();
    let fx = x / h - 0.5;
    let fy = y / h - 0.5;
    let (bx, by) = (fx.floor(), fy.floor());
    let wrap = |k: isize| k.rem_euclid(n) as usize;
    let (ix, iy) = (bx as isize, by as isize);
    Stencil { i0: wrap(ix), i1: wrap(ix + 1), j0: wrap(iy), j1: wrap(iy + 1), tx: fx - bx, ty: fy - by }
}

fn blend(grid: &Grid, f: &[f64], s: &Stencil) -> f64 {
    let n = grid.n();
    let a = f[s.j0 * n + s.i0];
    let b = f[s.j0 * n + s.i1];
    let c = f[s.j1 * n + s.i0];
    let d = f[s.j1 * n + s.i1];
    let lower = a + s.tx * (b - a);
    let upper = c + s.tx * (d - c);
    lower + s.ty * (upper - lower)
}

fn catmull_rom_weights(t: f64) -> [f64; 4] {
    let (t2, t3) = (t * t, t * t * t);
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

fn cubic(grid: &Grid, f: &[f64], x: f64, y: f64) -> f64 {
    let n = grid.n() as isize;
    let h = grid.spacing();
    let (fx, fy) = (x / h - 0.5, y / h - 0.5);
    let (bx, by) = (fx.floor(), fy.floor());
    let (wx, wy) = (catmull_rom_weights(fx - bx), catmull_rom_weights(fy - by));
    let (ix, iy) = (bx as isize, by as isize);
    let mut acc = 0.0;
    for (b, wyb) in wy.iter().enumerate() {
        let j = (iy + b as isize - 1).rem_euclid(n) as usize;
        let row = &f[j * grid.n()..(j + 1) * grid.n()];
        let mut line = 0.0;
        for (a, wxa) in wx.iter().enumerate() {
            line += wxa * row[(ix + a as isize - 1).rem_euclid(n) as usize];
        }
        acc += wyb * line;
    }
    acc
}

fn sample(grid: &Grid, f: &[f64], x: f64, y: f64, kind: Interpolation) -> f64 {
    match kind {
        Interpolation::Bilinear => blend(grid, f, &locate(grid, x, y)),
        Interpolation::CatmullRom => cubic(grid, f, x, y),
    }
}

impl ScalarField {
    /// Bilinear value at an arbitrary point, wrapping periodically.
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        self.sample(x, y, Interpolation::Bilinear)
    }

    pub fn sample(&self, x: f64, y: f64, kind: Interpolation) -> f64 {
        sample(self.grid(), self.values(), x, y, kind)
    }
}

impl VectorField {
    pub fn interpolate(&self, x: f64, y: f64) -> [f64; 2] {
        self.sample(x, y, Interpolation::Bilinear)
    }

    pub fn sample(&self, x: f64, y: f64, kind: Interpolation) -> [f64; 2] {
        [sample(self.grid(), self.x(), x, y, kind), sample(self.grid(), self.y(), x, y, kind)]
    }
}

/// Whether a displacement lands every cell centre on another cell centre.
pub fn is_on_grid_shift(grid: &Grid, shift: [f64; 2]) -> bool {
    shift.iter().all(|s| {
        let cells = s / grid.spacing();
        (cells - cells.round()).abs() < 1e-9
    })
}

/// `g(x) = f(x - shift)` on the periodic grid: an exact roll for whole-cell
/// shifts, bilinear interpolation otherwise.
pub fn shift_scalar(f: &ScalarField, shift: [f64; 2]) -> ScalarField {
    let grid = *f.grid();
    if is_on_grid_shift(&grid, shift) {
        let n = grid.n() as isize;
        let mx = (shift[0] / grid.spacing()).round() as isize;
        let my = (shift[1] / grid.spacing()).round() as isize;
        let vals = f.values();
        let mut out = Vec::with_capacity(grid.len());
        for j in 0..n {
            let sj = (j - my).rem_euclid(n) as usize;
            for i in 0..n {
                let si = (i - mx).rem_euclid(n) as usize;
                out.push(vals[sj * grid.n() + si]);
            }
        }
        ScalarField::from_raw(grid, out)
    } else {
        ScalarField::from_fn(grid, |x, y| f.interpolate(x - shift[0], y - shift[1]))
    }
}

pub fn shift_vector(v: &VectorField, shift: [f64; 2]) -> VectorField {
    let (x, y) = v.clone().into_components();
    VectorField::from_components(shift_scalar(&x, shift), shift_scalar(&y, shift))
        .expect("components share a grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_samples_and_linear_data() {
        let g = Grid::new(8, 8.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y| x * 10.0 + y);
        assert_eq!(f.interpolate(g.coord(3), g.coord(5)), f.at(3, 5));
        // linear in the interior of the periodic cell
        let v = f.interpolate(2.2, 3.9);
        assert!((v - (22.0 + 3.9)).abs() < 1e-12);
        // periodic wrap
        assert!((f.interpolate(2.2 + 8.0, 3.9 - 16.0) - v).abs() < 1e-12);
    }

    #[test]
    fn whole_cell_shift_is_a_roll() {
        let g = Grid::periodic_2pi(16).unwrap();
        let f = ScalarField::from_fn(g, |x, y| (x + 2.0 * y).sin());
        let h = g.spacing();
        let s = shift_scalar(&f, [3.0 * h, -2.0 * h]);
        assert!(is_on_grid_shift(&g, [3.0 * h, -2.0 * h]));
        assert_eq!(s.at(5, 7), f.at(2, 9));
        let back = shift_scalar(&s, [-3.0 * h, 2.0 * h]);
        assert_eq!(back, f);
    }

    #[test]
    fn off_grid_shift_is_second_order() {
        let err = |n| {
            let g = Grid::periodic_2pi(n).unwrap();
            let f = ScalarField::from_fn(g, |x, y| x.sin() * y.cos());
            let shifted = shift_scalar(&f, [0.3, 0.1]);
            let exact = ScalarField::from_fn(g, |x, y| (x - 0.3).sin() * (y - 0.1).cos());
            shifted.sub(&exact).max_abs()
        };
        assert!((err(32) / err(64)).log2() > 1.9);
    }

    #[test]
    fn catmull_rom_reproduces_samples_and_cubics() {
        let g = Grid::new(16, 16.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y| (x * 0.4).sin() + (y * 0.4).cos());
        let k = Interpolation::CatmullRom;
        assert!((f.sample(g.coord(3), g.coord(11), k) - f.at(3, 11)).abs() < 1e-14);
        // quadratic data away from the periodic seam is reproduced exactly
        let q = ScalarField::from_fn(g, |x, y| x * x - 3.0 * x * y + 0.5 * y);
        let (x, y) = (6.3, 8.7);
        assert!((q.sample(x, y, k) - (x * x - 3.0 * x * y + 0.5 * y)).abs() < 1e-10);
    }

    #[test]
    fn catmull_rom_gradient_is_second_order() {
        // centred finite difference of the interpolant, worst over off-node points
        let err = |n| {
            let g = Grid::periodic_2pi(n).unwrap();
            let f = ScalarField::from_fn(g, |x, y| x.sin() * y.cos());
            let d = 1e-6;
            (0..200)
                .map(|k| {
                    let (x, y) = (0.0317 * k as f64, 0.0713 * k as f64);
                    let fd = (f.sample(x + d, y, Interpolation::CatmullRom) - f.sample(x - d, y, Interpolation::CatmullRom))
                        / (2.0 * d);
                    (fd - x.cos() * y.cos()).abs()
                })
                .fold(0.0, f64::max)
        };
        assert!((err(32) / err(64)).log2() > 1.8);
    }
}
