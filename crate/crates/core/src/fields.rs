//! Uniform periodic grid and cell-centred field storage.
//!
//! Samples live at cell centres `((i + 1/2) h, (j + 1/2) h)` and are stored
//! row-major: index `j * n + i`, with `i` running along x.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Square periodic lattice with `n` cells per side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: usize,
    period: f64,
    spacing: f64,
}

impl Grid {
    pub const MIN_CELLS: usize = 4;

    pub fn new(n: usize, period: f64) -> Result<Self> {
        if n < Self::MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} cells per side, got {n}",
                Self::MIN_CELLS
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!("period must be positive, got {period}")));
        }
        Ok(Self { n, period, spacing: period / n as f64 })
    }

    /// Grid on the default `[0, 2π)²` domain.
    pub fn periodic_2pi(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn period(&self) -> f64 {
        self.period
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    /// Cell-centre coordinate of column (or row) `i`.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.spacing
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    /// Fundamental wavenumber `2π / period`.
    pub fn base_wavenumber(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch { left: self.to_string(), right: other.to_string() })
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} (period {})", self.n, self.n, self.period)
    }
}

pub fn make_grid(n: usize, period: f64) -> Result<Grid> {
    Grid::new(n, period)
}

fn check_samples(grid: &Grid, values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::SampleCount { expected: grid.len(), found: values.len() });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        check_samples(&grid, &values)?;
        Ok(Self { grid, values })
    }

    /// Samples `f(x, y)` at every cell centre.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..n {
            let y = grid.coord(j);
            for i in 0..n {
                values.push(f(grid.coord(i), y));
            }
        }
        Self { grid, values }
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&a| f(a)).collect())
    }

    /// Pointwise combination; panics on a grid mismatch, which is a caller bug
    /// for the internal operator code that uses it.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch in pointwise operation");
        Self::from_raw(
            self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|x| a * x)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Self) {
        assert_eq!(self.grid, other.grid, "grid mismatch in axpy");
        for (s, &o) in self.values.iter_mut().zip(&other.values) {
            *s += a * o;
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, x: vec![0.0; grid.len()], y: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: [f64; 2]) -> Self {
        Self { grid, x: vec![c[0]; grid.len()], y: vec![c[1]; grid.len()] }
    }

    pub fn from_components(x: ScalarField, y: ScalarField) -> Result<Self> {
        x.grid.ensure_same(&y.grid)?;
        Ok(Self { grid: x.grid, x: x.values, y: y.values })
    }

    pub fn from_values(grid: Grid, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_samples(&grid, &x)?;
        check_samples(&grid, &y)?;
        Ok(Self { grid, x, y })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let n = grid.n();
        let mut x = Vec::with_capacity(grid.len());
        let mut y = Vec::with_capacity(grid.len());
        for j in 0..n {
            let yc = grid.coord(j);
            for i in 0..n {
                let [a, b] = f(grid.coord(i), yc);
                x.push(a);
                y.push(b);
            }
        }
        Self { grid, x, y }
    }

    pub(crate) fn from_raw(grid: Grid, x: Vec<f64>, y: Vec<f64>) -> Self {
        debug_assert_eq!(x.len(), grid.len());
        debug_assert_eq!(y.len(), grid.len());
        Self { grid, x, y }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    #[inline]
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn component_x(&self) -> ScalarField {
        ScalarField::from_raw(self.grid, self.x.clone())
    }

    pub fn component_y(&self) -> ScalarField {
        ScalarField::from_raw(self.grid, self.y.clone())
    }

    pub fn into_components(self) -> (ScalarField, ScalarField) {
        (ScalarField::from_raw(self.grid, self.x), ScalarField::from_raw(self.grid, self.y))
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> [f64; 2] {
        let k = self.grid.index(i, j);
        [self.x[k], self.y[k]]
    }

    pub fn map_components(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(
            self.grid,
            self.x.iter().map(|&a| f(a)).collect(),
            self.y.iter().map(|&a| f(a)).collect(),
        )
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch in pointwise operation");
        Self::from_raw(
            self.grid,
            self.x.iter().zip(&other.x).map(|(&a, &b)| f(a, b)).collect(),
            self.y.iter().zip(&other.y).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map_components(|x| a * x)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    /// Multiplies both components by a scalar field pointwise.
    pub fn scale_by(&self, s: &ScalarField) -> Self {
        assert_eq!(self.grid, s.grid, "grid mismatch in pointwise operation");
        Self::from_raw(
            self.grid,
            self.x.iter().zip(&s.values).map(|(&a, &b)| a * b).collect(),
            self.y.iter().zip(&s.values).map(|(&a, &b)| a * b).collect(),
        )
    }

    /// Adds a constant vector to every sample.
    pub fn offset(&self, w: [f64; 2]) -> Self {
        Self::from_raw(
            self.grid,
            self.x.iter().map(|a| a + w[0]).collect(),
            self.y.iter().map(|a| a + w[1]).collect(),
        )
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        assert_eq!(self.grid, other.grid, "grid mismatch in axpy");
        for (s, &o) in self.x.iter_mut().zip(&other.x) {
            *s += a * o;
        }
        for (s, &o) in self.y.iter_mut().zip(&other.y) {
            *s += a * o;
        }
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &Self) -> ScalarField {
        assert_eq!(self.grid, other.grid, "grid mismatch in pointwise operation");
        let values = (0..self.grid.len())
            .map(|k| self.x[k] * other.x[k] + self.y[k] * other.y[k])
            .collect();
        ScalarField::from_raw(self.grid, values)
    }

    pub fn magnitude_sq(&self) -> ScalarField {
        self.dot(self)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .fold(0.0f64, |m, (a, b)| m.max((a * a + b * b).sqrt()))
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }
}

/// Midpoint-rule quadrature, summed in storage order so the result is
/// reproducible for a fixed input.
pub fn integrate(field: &ScalarField) -> f64 {
    field.grid.cell_area() * field.values.iter().sum::<f64>()
}

pub fn inner_product(a: &VectorField, b: &VectorField) -> Result<f64> {
    a.grid.ensure_same(&b.grid)?;
    Ok(integrate(&a.dot(b)))
}

/// Square root of the integrated squared magnitude.
pub trait L2Norm {
    fn l2_norm(&self) -> f64;
}

impl L2Norm for ScalarField {
    fn l2_norm(&self) -> f64 {
        (self.grid.cell_area() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }
}

impl L2Norm for VectorField {
    fn l2_norm(&self) -> f64 {
        integrate(&self.magnitude_sq()).sqrt()
    }
}

pub fn l2_norm<F: L2Norm + ?Sized>(field: &F) -> f64 {
    field.l2_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_construction() {
        let g = make_grid(64, 2.0 * PI).unwrap();
        assert_eq!(g.spacing(), 2.0 * PI / 64.0);
        assert_eq!(g.spacing() * 64.0, g.period());

        let g = make_grid(4, 1.0).unwrap();
        assert_eq!(g.spacing(), 0.25);

        assert!(matches!(make_grid(3, 2.0 * PI), Err(Error::InvalidGrid(_))));
        assert!(make_grid(8, 0.0).is_err());
        assert!(make_grid(8, -1.0).is_err());
        assert!(make_grid(8, f64::NAN).is_err());
    }

    #[test]
    fn integrate_constant_and_trig() {
        let g = Grid::periodic_2pi(32).unwrap();
        let c = ScalarField::constant(g, 3.5);
        let expected = 3.5 * (2.0 * PI).powi(2);
        assert!((integrate(&c) - expected).abs() < 1e-12 * expected);

        let s = ScalarField::from_fn(g, |x, _| x.sin());
        assert!(integrate(&s).abs() < 1e-12);

        // ∫∫ sin²x = (2π)·π
        let g = Grid::periodic_2pi(64).unwrap();
        let s2 = ScalarField::from_fn(g, |x, _| x.sin().powi(2));
        assert!((integrate(&s2) - 2.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn inner_product_examples() {
        let g = Grid::periodic_2pi(16).unwrap();
        let v = VectorField::from_fn(g, |x, y| [x.sin() * y.cos(), y.sin()]);
        let zero = VectorField::zeros(g);
        assert_eq!(inner_product(&v, &zero).unwrap(), 0.0);

        let e = VectorField::constant(g, [1.0, 0.0]);
        let ip = inner_product(&e, &e).unwrap();
        assert!((ip - (2.0 * PI).powi(2)).abs() < 1e-12);

        let w = VectorField::from_fn(g, |x, y| [(x + y).cos(), x.sin()]);
        assert_eq!(inner_product(&v, &w).unwrap(), inner_product(&w, &v).unwrap());

        let other = VectorField::zeros(Grid::periodic_2pi(8).unwrap());
        assert!(matches!(inner_product(&v, &other), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn norms() {
        let g = Grid::periodic_2pi(16).unwrap();
        assert_eq!(l2_norm(&ScalarField::zeros(g)), 0.0);
        assert_eq!(l2_norm(&VectorField::zeros(g)), 0.0);
        assert!((l2_norm(&ScalarField::constant(g, 1.0)) - 2.0 * PI).abs() < 1e-12);

        let g = Grid::periodic_2pi(128).unwrap();
        let s = ScalarField::from_fn(g, |x, _| x.sin());
        assert!((l2_norm(&s) - (2.0 * PI * PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_samples() {
        let g = Grid::periodic_2pi(4).unwrap();
        assert!(matches!(
            ScalarField::from_values(g, vec![0.0; 15]),
            Err(Error::SampleCount { expected: 16, found: 15 })
        ));
        let mut vals = vec![0.0; 16];
        vals[5] = f64::NAN;
        assert!(matches!(ScalarField::from_values(g, vals), Err(Error::NonFinite { index: 5 })));
    }

    #[test]
    fn spectral_convergence_of_quadrature() {
        // e^{cos x} has ∫_0^{2π} = 2π I0(1); the periodic midpoint rule is
        // already at round-off by n = 16.
        let i0_1 = 1.266_065_877_752_008_4;
        let exact = 2.0 * PI * 2.0 * PI * i0_1;
        let err = |n| {
            let g = Grid::periodic_2pi(n).unwrap();
            (integrate(&ScalarField::from_fn(g, |x, _| x.cos().exp())) - exact).abs()
        };
        assert!(err(4) > 1e-6);
        assert!(err(16) < 1e-12 * exact);
    }

    proptest! {
        #[test]
        fn integrate_is_linear(a in -5.0f64..5.0, b in -5.0f64..5.0, k in 1usize..4) {
            let g = Grid::periodic_2pi(16).unwrap();
            let f = ScalarField::from_fn(g, |x, y| (k as f64 * x).cos() + y.sin() + 1.0);
            let h = ScalarField::from_fn(g, |x, y| (x * y).sin().exp());
            let combo = f.scaled(a).add(&h.scaled(b));
            let lhs = integrate(&combo);
            let rhs = a * integrate(&f) + b * integrate(&h);
            prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()));
        }

        #[test]
        fn self_inner_product_nonnegative(seed in 0u64..1000) {
            let g = Grid::periodic_2pi(8).unwrap();
            let s = seed as f64;
            let v = VectorField::from_fn(g, |x, y| [(x * s).sin(), (y + s).cos() * 0.0]);
            let ip = inner_product(&v, &v).unwrap();
            prop_assert!(ip >= 0.0);
            if v.max_magnitude() > 0.0 {
                prop_assert!(ip > 0.0);
            }
        }
    }
}
