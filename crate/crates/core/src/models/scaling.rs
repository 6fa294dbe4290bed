//! Linear equation of state and the map between dimensional and
//! dimensionless fields.

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField, VectorField};

use super::ModelConfig;

/// Dimensional bulk modulus `K = k ρ* V²`.
fn bulk_modulus(cfg: &ModelConfig) -> Result<f64> {
    Ok(cfg.k * cfg.require_scales()?.dynamic_pressure())
}

/// `p = K (ρ/ρ* - 1) + p*`, dimensional.
pub fn eos(rho: &ScalarField, cfg: &ModelConfig) -> Result<ScalarField> {
    let scales = cfg.require_scales()?;
    if let Some(index) = rho.values().iter().position(|&r| r <= 0.0) {
        return Err(Error::NonPositiveDensity { index, value: rho.values()[index] });
    }
    let k = bulk_modulus(cfg)?;
    Ok(rho.map(|r| k * (r / scales.rho_star - 1.0) + scales.p_star))
}

/// `ρ = ρ* (1 + (p - p*)/K)`; fails on the sample with the smallest density
/// if any would be non-positive.
pub fn eos_inverse(p: &ScalarField, cfg: &ModelConfig) -> Result<ScalarField> {
    let scales = cfg.require_scales()?;
    let k = bulk_modulus(cfg)?;
    let rho = p.map(|p| scales.rho_star * (1.0 + (p - scales.p_star) / k));
    let (index, &value) = rho
        .values()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grids are never empty");
    if value <= 0.0 {
        return Err(Error::NonPositiveDensity { index, value });
    }
    Ok(rho)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionalFields {
    pub v: VectorField,
    pub p: ScalarField,
    pub f: VectorField,
    pub time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionlessFields {
    pub v: VectorField,
    pub p: ScalarField,
    pub f: VectorField,
    pub time: f64,
}

fn rescale_grid(grid: &Grid, factor: f64) -> Result<Grid> {
    Grid::new(grid.n(), grid.period() * factor)
}

fn regrid_vector(v: &VectorField, grid: Grid, a: f64) -> VectorField {
    VectorField::from_raw(
        grid,
        v.x().iter().map(|x| a * x).collect(),
        v.y().iter().map(|y| a * y).collect(),
    )
}

/// `v/V`, `(p - p*)/(ρ* V²)`, `L f/(ρ* V²)`, with lengths over `L` and times
/// over `L/V`.
pub fn nondimensionalize(fields: &DimensionalFields, cfg: &ModelConfig) -> Result<DimensionlessFields> {
    cfg.validate()?;
    let s = cfg.require_scales()?;
    let grid = rescale_grid(fields.v.grid(), 1.0 / s.l_char)?;
    let q = s.dynamic_pressure();
    Ok(DimensionlessFields {
        v: regrid_vector(&fields.v, grid, 1.0 / s.v_char),
        p: ScalarField::from_raw(grid, fields.p.values().iter().map(|p| (p - s.p_star) / q).collect()),
        f: regrid_vector(&fields.f, grid, s.l_char / q),
        time: fields.time * s.v_char / s.l_char,
    })
}

pub fn redimensionalize(fields: &DimensionlessFields, cfg: &ModelConfig) -> Result<DimensionalFields> {
    cfg.validate()?;
    let s = cfg.require_scales()?;
    let grid = rescale_grid(fields.v.grid(), s.l_char)?;
    let q = s.dynamic_pressure();
    Ok(DimensionalFields {
        v: regrid_vector(&fields.v, grid, s.v_char),
        p: ScalarField::from_raw(grid, fields.p.values().iter().map(|p| p * q + s.p_star).collect()),
        f: regrid_vector(&fields.f, grid, q / s.l_char),
        time: fields.time * s.l_char / s.v_char,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::L2Norm;
    use crate::models::ReferenceScales;

    fn cfg(k_dimensional: f64, p_star: f64) -> ModelConfig {
        let scales = ReferenceScales { rho_star: 1000.0, p_star, v_char: 2.0, l_char: 0.5, mu: 1e-3 };
        let k = scales.dimensionless_bulk_modulus(k_dimensional);
        ModelConfig::temam(scales.reynolds(), k).with_scales(scales)
    }

    #[test]
    fn eos_examples() {
        let g = Grid::new(8, 1.0).unwrap();
        let c = cfg(1e5, 101_325.0);
        let rho = ScalarField::constant(g, 1000.0);
        let p = eos(&rho, &c).unwrap();
        assert!(p.values().iter().all(|&v| (v - 101_325.0).abs() < 1e-9));

        let c0 = cfg(1e5, 0.0);
        let p = eos(&ScalarField::constant(g, 2000.0), &c0).unwrap();
        assert!(p.values().iter().all(|&v| (v - 1e5).abs() < 1e-9));

        assert!(eos(&ScalarField::constant(g, 0.0), &c0).is_err());
    }

    #[test]
    fn eos_inverse_examples() {
        let g = Grid::new(8, 1.0).unwrap();
        let c = cfg(2e6, 5.0e4);
        let rho = eos_inverse(&ScalarField::constant(g, 5.0e4), &c).unwrap();
        assert!(rho.values().iter().all(|&r| (r - 1000.0).abs() < 1e-12));

        let p = ScalarField::from_fn(g, |x, y| 5.0e4 + 3.0e3 * (6.0 * x).sin() * (6.0 * y).cos());
        let dev = |k: f64| eos_inverse(&p, &cfg(k, 5.0e4)).unwrap().map(|r| r - 1000.0).l2_norm();
        assert!((dev(2e6) / dev(2e7) - 10.0).abs() < 1e-9);

        let mut vals = vec![5.0e4; 64];
        vals[17] = 5.0e4 - 2.0 * 2e6;
        vals[3] = 5.0e4 - 1.5 * 2e6;
        let err = eos_inverse(&ScalarField::from_values(g, vals).unwrap(), &c).unwrap_err();
        assert!(matches!(err, Error::NonPositiveDensity { index: 17, .. }));
    }

    #[test]
    fn eos_round_trip() {
        let g = Grid::new(16, 1.0).unwrap();
        let c = cfg(2.2e9, 101_325.0);
        let rho = ScalarField::from_fn(g, |x, y| 1000.0 * (1.0 + 0.01 * (6.0 * x).sin() * y));
        let back = eos_inverse(&eos(&rho, &c).unwrap(), &c).unwrap();
        assert!(back.sub(&rho).max_abs() < 1e-9);
    }

    #[test]
    fn scaling_round_trip_and_reference_pressure() {
        let g = Grid::new(8, 3.0).unwrap();
        let c = cfg(1e6, 2.0e3);
        let dim = DimensionalFields {
            v: VectorField::from_fn(g, |x, y| [x.sin() * 3.0, y]),
            p: ScalarField::constant(g, 2.0e3),
            f: VectorField::from_fn(g, |x, _| [x, -x]),
            time: 0.7,
        };
        let nd = nondimensionalize(&dim, &c).unwrap();
        assert_eq!(nd.v.grid().period(), 6.0);
        assert!(nd.p.max_abs() == 0.0);
        assert!((nd.time - 0.7 * 2.0 / 0.5).abs() < 1e-15);
        let back = redimensionalize(&nd, &c).unwrap();
        assert!(back.v.sub(&dim.v).max_magnitude() < 1e-14);
        assert!(back.f.sub(&dim.f).max_magnitude() < 1e-14);
        assert!(back.p.sub(&dim.p).max_abs() < 1e-10);
        assert!((back.time - dim.time).abs() < 1e-15);
    }
}
