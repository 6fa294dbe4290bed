use crate::error::{Error, Result};
use crate::fields::{ScalarField, VectorField};
use crate::operators::{convection, divergence, grad_div, gradient, laplacian};

use super::{ExtraForce, ForcingSpec, ModelConfig, ModelKind, PressureTransport, State};

/// Time derivatives of `(v, p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tendency {
    pub dv: VectorField,
    pub dp: ScalarField,
}

/// `f_e = -½ (∇·v) v`
pub fn temam_extra_force(v: &VectorField) -> VectorField {
    v.scale_by(&divergence(v).scaled(-0.5))
}

/// Dimensionless `-(p/K)(∂v/∂t + (v·∇)v)`.
pub fn galilean_alt_force(state: &State, dv_dt: &VectorField, cfg: &ModelConfig) -> VectorField {
    let accel = dv_dt.add(&convection(&state.v, cfg.convection));
    accel.scale_by(&state.p.scaled(-1.0 / cfg.k))
}

/// Right-hand side of the quasi-incompressible system.
///
/// `accel_lag` is the previously accepted `∂v/∂t`, consulted only by
/// [`ExtraForce::GalileanAlt`]; `None` means zero.
pub fn temam_rhs(
    state: &State,
    forcing: &ForcingSpec,
    cfg: &ModelConfig,
    accel_lag: Option<&VectorField>,
) -> Result<Tendency> {
    cfg.require_model(ModelKind::Temam)?;
    let grid = *state.grid();
    let v = &state.v;

    let mut dv = convection(v, cfg.convection).scaled(-1.0);
    dv.axpy(-1.0, &gradient(&state.p));
    dv.axpy(1.0 / cfg.re, &laplacian(v));
    if !forcing.is_zero() {
        dv.axpy(1.0, &forcing.evaluate(&grid, state.time)?);
    }

    let div = divergence(v);
    match cfg.extra_force {
        ExtraForce::Temam => dv.axpy(1.0, &v.scale_by(&div.scaled(-0.5))),
        ExtraForce::None => {}
        ExtraForce::GalileanAlt => {
            let zero;
            let lag = match accel_lag {
                Some(a) => a,
                None => {
                    zero = VectorField::zeros(grid);
                    &zero
                }
            };
            dv.axpy(1.0, &galilean_alt_force(state, lag, cfg));
        }
    }

    let mut dp = div.scaled(-cfg.k);
    if cfg.pressure_transport == PressureTransport::Material {
        dp.axpy(-1.0, &v.dot(&gradient(&state.p)));
    }
    Ok(Tendency { dv, dp })
}

/// Right-hand side of the compressible system with the linear equation of
/// state, `ρ̂ = 1 + p/K` in dimensionless form.
pub fn compressible_rhs(state: &State, forcing: &ForcingSpec, cfg: &ModelConfig) -> Result<Tendency> {
    cfg.require_model(ModelKind::Compressible)?;
    let grid = *state.grid();
    let v = &state.v;
    let rho = state.p.map(|p| 1.0 + p / cfg.k);
    if let Some(index) = rho.values().iter().position(|&r| r <= 0.0) {
        return Err(Error::NonPositiveDensity { index, value: rho.values()[index] });
    }

    let mut num = convection(v, cfg.convection).scale_by(&rho).scaled(-1.0);
    num.axpy(-1.0, &gradient(&state.p));
    num.axpy(1.0 / cfg.re, &laplacian(v));
    num.axpy((cfg.zeta_over_mu + 1.0 / 3.0) / cfg.re, &grad_div(v));
    if !forcing.is_zero() {
        num.axpy(1.0, &forcing.evaluate(&grid, state.time)?);
    }
    let dv = num.scale_by(&rho.map(|r| 1.0 / r));
    let dp = divergence(&v.scale_by(&rho)).scaled(-cfg.k);
    Ok(Tendency { dv, dp })
}

/// Dispatches to the compressible-family right-hand side selected by `cfg`.
pub fn model_rhs(
    state: &State,
    forcing: &ForcingSpec,
    cfg: &ModelConfig,
    accel_lag: Option<&VectorField>,
) -> Result<Tendency> {
    match cfg.model {
        ModelKind::Temam => temam_rhs(state, forcing, cfg, accel_lag),
        ModelKind::Compressible => compressible_rhs(state, forcing, cfg),
        ModelKind::Incompressible => Err(Error::ModelMismatch {
            expected: "temam or compressible",
            found: cfg.model.name(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{l2_norm, Grid, L2Norm};
    use proptest::prelude::*;

    fn taylor_green(g: Grid) -> State {
        let v = VectorField::from_fn(g, |x, y| [x.sin() * y.cos(), -x.cos() * y.sin()]);
        let p = ScalarField::from_fn(g, |x, y| 0.25 * ((2.0 * x).cos() + (2.0 * y).cos()));
        State::new(v, p, 0.0).unwrap()
    }

    #[test]
    fn rest_state_is_fixed_point() {
        let g = Grid::periodic_2pi(16).unwrap();
        let rest = State::rest(g);
        for ef in [ExtraForce::Temam, ExtraForce::None, ExtraForce::GalileanAlt] {
            let cfg = ModelConfig::temam(10.0, 100.0).with_extra_force(ef);
            let t = temam_rhs(&rest, &ForcingSpec::Zero, &cfg, None).unwrap();
            assert_eq!(t.dv.max_magnitude(), 0.0);
            assert_eq!(t.dp.max_abs(), 0.0);
        }
        let cfg = ModelConfig::compressible(10.0, 100.0, 0.5);
        let t = compressible_rhs(&rest, &ForcingSpec::Zero, &cfg).unwrap();
        assert_eq!(t.dv.max_magnitude(), 0.0);
        assert_eq!(t.dp.max_abs(), 0.0);
    }

    #[test]
    fn extra_force_examples() {
        let g = Grid::periodic_2pi(64).unwrap();
        assert_eq!(temam_extra_force(&VectorField::constant(g, [1.0, 2.0])).max_magnitude(), 0.0);
        assert_eq!(temam_extra_force(&VectorField::zeros(g)).max_magnitude(), 0.0);
        let v = VectorField::from_fn(g, |x, _| [x.sin(), 0.0]);
        let fe = temam_extra_force(&v);
        let exact = ScalarField::from_fn(g, |x, _| -0.25 * (2.0 * x).sin());
        assert!(fe.component_x().sub(&exact).max_abs() < 1e-3);
    }

    #[test]
    fn extra_force_vanishes_on_solenoidal_fields() {
        let gap = |n| {
            let s = taylor_green(Grid::periodic_2pi(n).unwrap());
            let a = temam_rhs(&s, &ForcingSpec::Zero, &ModelConfig::temam(50.0, 1e4), None).unwrap();
            let none = ModelConfig::temam(50.0, 1e4).with_extra_force(ExtraForce::None);
            let b = temam_rhs(&s, &ForcingSpec::Zero, &none, None).unwrap();
            (a.dv.sub(&b.dv).l2_norm(), a.dp.l2_norm())
        };
        // Taylor-Green is discretely solenoidal under the central divergence.
        let (dv_gap, dp) = gap(32);
        assert!(dv_gap < 1e-12);
        assert!(dp < 1e-9);
    }

    #[test]
    fn material_pressure_transport_adds_advection() {
        let g = Grid::periodic_2pi(32).unwrap();
        let s = taylor_green(g);
        let mut cfg = ModelConfig::temam(50.0, 10.0);
        let partial = temam_rhs(&s, &ForcingSpec::Zero, &cfg, None).unwrap();
        cfg.pressure_transport = PressureTransport::Material;
        let material = temam_rhs(&s, &ForcingSpec::Zero, &cfg, None).unwrap();
        let expected = s.v.dot(&gradient(&s.p)).scaled(-1.0);
        assert!(material.dp.sub(&partial.dp).sub(&expected).max_abs() < 1e-12);
    }

    #[test]
    fn galilean_alt_examples() {
        let g = Grid::periodic_2pi(16).unwrap();
        let v = VectorField::from_fn(g, |x, y| [x.sin(), y.cos()]);
        let a = VectorField::from_fn(g, |x, _| [x.cos(), 1.0]);
        let cfg = ModelConfig::temam(10.0, 100.0);
        let at_rest = State::new(v.clone(), ScalarField::zeros(g), 0.0).unwrap();
        assert_eq!(galilean_alt_force(&at_rest, &a, &cfg).max_magnitude(), 0.0);

        let s = State::new(v, ScalarField::from_fn(g, |x, y| (x + y).cos()), 0.0).unwrap();
        let f1 = galilean_alt_force(&s, &a, &cfg);
        let cfg10 = ModelConfig::temam(10.0, 1000.0);
        let f10 = galilean_alt_force(&s, &a, &cfg10);
        assert!((l2_norm(&f1) / l2_norm(&f10) - 10.0).abs() < 1e-12);

        let steady = State::new(VectorField::constant(g, [0.3, -0.2]), s.p.clone(), 0.0).unwrap();
        let f = galilean_alt_force(&steady, &VectorField::zeros(g), &cfg);
        assert_eq!(f.max_magnitude(), 0.0);
    }

    #[test]
    fn compressible_reduces_to_temam_plus_grad_div() {
        let g = Grid::periodic_2pi(32).unwrap();
        let v = VectorField::from_fn(g, |x, y| [x.sin() + 0.2 * y.cos(), (x + y).sin()]);
        let s = State::new(v.clone(), ScalarField::zeros(g), 0.0).unwrap();
        let forcing = ForcingSpec::SteadyShear { amplitude: 0.3, mode: 2 };
        let c = compressible_rhs(&s, &forcing, &ModelConfig::compressible(20.0, 50.0, 0.0)).unwrap();
        let none = ModelConfig::temam(20.0, 50.0).with_extra_force(ExtraForce::None);
        let t = temam_rhs(&s, &forcing, &none, None).unwrap();
        let expected = t.dv.add(&grad_div(&v).scaled(1.0 / (3.0 * 20.0)));
        assert!(c.dv.sub(&expected).max_magnitude() < 1e-13);
        assert!(c.dp.sub(&t.dp).max_abs() < 1e-12);
    }

    #[test]
    fn compressible_rejects_vacuum() {
        let g = Grid::periodic_2pi(8).unwrap();
        let s = State::new(VectorField::zeros(g), ScalarField::constant(g, -20.0), 0.0).unwrap();
        let err = compressible_rhs(&s, &ForcingSpec::Zero, &ModelConfig::compressible(1.0, 10.0, 0.0));
        assert!(matches!(err, Err(Error::NonPositiveDensity { .. })));
        assert!(matches!(
            temam_rhs(&s, &ForcingSpec::Zero, &ModelConfig::incompressible(1.0), None),
            Err(Error::ModelMismatch { .. })
        ));
    }

    #[test]
    fn pressure_rate_is_linear_in_k() {
        let g = Grid::periodic_2pi(16).unwrap();
        let v = VectorField::from_fn(g, |x, y| [x.sin() * y.sin(), x.cos()]);
        let s = State::new(v.clone(), ScalarField::zeros(g), 0.0).unwrap();
        for k in [1.0, 37.0, 1e5] {
            let t = temam_rhs(&s, &ForcingSpec::Zero, &ModelConfig::temam(5.0, k), None).unwrap();
            let scaled = t.dp.scaled(1.0 / k);
            assert!(scaled.add(&divergence(&v)).max_abs() < 1e-14 * divergence(&v).max_abs().max(1.0) * 10.0);
        }
    }

    proptest! {
        #[test]
        fn extra_force_is_quadratic(alpha in -4.0f64..4.0) {
            let g = Grid::periodic_2pi(16).unwrap();
            let v = VectorField::from_fn(g, |x, y| [x.sin() * y.cos(), (x - y).sin()]);
            let lhs = temam_extra_force(&v.scaled(alpha));
            let rhs = temam_extra_force(&v).scaled(alpha * alpha);
            prop_assert!(lhs.sub(&rhs).max_magnitude() <= 1e-13 * (1.0 + alpha * alpha));
        }
    }
}
