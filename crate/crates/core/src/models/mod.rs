//! Flow models: configuration, state, forcing, right-hand sides and time
//! stepping for the incompressible, quasi-incompressible (Temam) and
//! compressible systems in dimensionless variables.

mod projection;
mod rhs;
mod scaling;
mod stepping;

pub use projection::{
    incompressible_pressure, incompressible_step, project, PoissonSolver, PoissonStats,
};
pub use rhs::{
    compressible_rhs, galilean_alt_force, model_rhs, temam_extra_force, temam_rhs, Tendency,
};
pub use scaling::{
    eos, eos_inverse, nondimensionalize, redimensionalize, DimensionalFields,
    DimensionlessFields,
};
pub use stepping::{stable_dt, step_rk4, Simulation, DEFAULT_CFL};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField, VectorField};
pub use crate::operators::ConvectionForm;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Incompressible,
    #[default]
    Temam,
    Compressible,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Incompressible => "incompressible",
            ModelKind::Temam => "temam",
            ModelKind::Compressible => "compressible",
        }
    }
}

/// Which extra body force the quasi-incompressible momentum equation carries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtraForce {
    /// `f_e = -½ (∇·v) v`
    #[default]
    Temam,
    None,
    /// `-(p/K)(∂v/∂t + (v·∇)v)`, with `∂v/∂t` lagged one step.
    GalileanAlt,
}

/// Form of the pressure equation: `∂p/∂t` or the material rate `ṗ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureTransport {
    #[default]
    Partial,
    Material,
}

/// Dimensional reference quantities used by the scaling operations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceScales {
    pub rho_star: f64,
    pub p_star: f64,
    pub v_char: f64,
    pub l_char: f64,
    pub mu: f64,
}

impl ReferenceScales {
    pub fn reynolds(&self) -> f64 {
        self.rho_star * self.l_char * self.v_char / self.mu
    }

    /// Dynamic pressure `ρ* V²`, the unit of dimensionless pressure.
    pub fn dynamic_pressure(&self) -> f64 {
        self.rho_star * self.v_char * self.v_char
    }

    /// `K / (ρ* V²)`
    pub fn dimensionless_bulk_modulus(&self, k_dimensional: f64) -> f64 {
        k_dimensional / self.dynamic_pressure()
    }

    fn validate(&self) -> Result<()> {
        let named = [
            ("rho_star", self.rho_star),
            ("v_char", self.v_char),
            ("l_char", self.l_char),
            ("mu", self.mu),
        ];
        for (name, value) in named {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {value}")));
            }
        }
        if !self.p_star.is_finite() {
            return Err(Error::InvalidConfig("p_star must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub model: ModelKind,
    pub re: f64,
    /// Dimensionless bulk modulus.
    pub k: f64,
    pub zeta_over_mu: f64,
    pub extra_force: ExtraForce,
    pub convection: ConvectionForm,
    pub pressure_transport: PressureTransport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scales: Option<ReferenceScales>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Temam,
            re: 100.0,
            k: 1.0e3,
            zeta_over_mu: 0.0,
            extra_force: ExtraForce::Temam,
            convection: ConvectionForm::Advective,
            pressure_transport: PressureTransport::Partial,
            scales: None,
        }
    }
}

impl ModelConfig {
    pub fn temam(re: f64, k: f64) -> Self {
        Self { model: ModelKind::Temam, re, k, ..Self::default() }
    }

    pub fn incompressible(re: f64) -> Self {
        Self { model: ModelKind::Incompressible, re, ..Self::default() }
    }

    pub fn compressible(re: f64, k: f64, zeta_over_mu: f64) -> Self {
        Self { model: ModelKind::Compressible, re, k, zeta_over_mu, ..Self::default() }
    }

    pub fn with_extra_force(mut self, extra_force: ExtraForce) -> Self {
        self.extra_force = extra_force;
        self
    }

    pub fn with_scales(mut self, scales: ReferenceScales) -> Self {
        self.scales = Some(scales);
        self
    }

    pub fn uses_bulk_modulus(&self) -> bool {
        self.model != ModelKind::Incompressible
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.re.is_finite() && self.re > 0.0) {
            return Err(Error::InvalidConfig(format!("re must be positive, got {}", self.re)));
        }
        if self.uses_bulk_modulus() && !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::InvalidConfig(format!("k must be positive, got {}", self.k)));
        }
        if !(self.zeta_over_mu.is_finite() && self.zeta_over_mu >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "zeta_over_mu must be non-negative, got {}",
                self.zeta_over_mu
            )));
        }
        if let Some(scales) = &self.scales {
            scales.validate()?;
            let derived = scales.reynolds();
            if ((derived - self.re) / self.re).abs() > 1e-12 {
                return Err(Error::InconsistentReynolds { configured: self.re, derived });
            }
        }
        Ok(())
    }

    pub(crate) fn require_scales(&self) -> Result<&ReferenceScales> {
        self.scales
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("operation needs reference scales".into()))
    }

    pub(crate) fn require_model(&self, expected: ModelKind) -> Result<()> {
        if self.model == expected {
            Ok(())
        } else {
            Err(Error::ModelMismatch { expected: expected.name(), found: self.model.name() })
        }
    }
}

/// Dimensionless velocity and pressure at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub v: VectorField,
    pub p: ScalarField,
    pub time: f64,
}

impl State {
    pub fn new(v: VectorField, p: ScalarField, time: f64) -> Result<Self> {
        v.grid().ensure_same(p.grid())?;
        if !v.is_finite() || !p.is_finite() || !time.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(Self { v, p, time })
    }

    pub fn rest(grid: Grid) -> Self {
        Self { v: VectorField::zeros(grid), p: ScalarField::zeros(grid), time: 0.0 }
    }

    pub fn grid(&self) -> &Grid {
        self.v.grid()
    }
}

/// Non-inertial body force `f(x, t)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSpec {
    #[default]
    Zero,
    /// Kolmogorov-type shear forcing `(A sin(m k₀ y), 0)`.
    SteadyShear { amplitude: f64, mode: u32 },
    /// Sampled force on an `n × n` grid (row-major, x-block then y-block).
    Table { n: usize, x: Vec<f64>, y: Vec<f64> },
}

impl ForcingSpec {
    pub fn is_zero(&self) -> bool {
        match self {
            ForcingSpec::Zero => true,
            ForcingSpec::SteadyShear { amplitude, .. } => *amplitude == 0.0,
            ForcingSpec::Table { x, y, .. } => x.iter().chain(y).all(|&a| a == 0.0),
        }
    }

    pub fn evaluate(&self, grid: &Grid, _time: f64) -> Result<VectorField> {
        match self {
            ForcingSpec::Zero => Ok(VectorField::zeros(*grid)),
            ForcingSpec::SteadyShear { amplitude, mode } => {
                let k = *mode as f64 * grid.base_wavenumber();
                let a = *amplitude;
                if !a.is_finite() {
                    return Err(Error::InvalidConfig("forcing amplitude must be finite".into()));
                }
                Ok(VectorField::from_fn(*grid, |_, y| [a * (k * y).sin(), 0.0]))
            }
            ForcingSpec::Table { n, x, y } => {
                if *n != grid.n() {
                    return Err(Error::GridMismatch {
                        left: format!("forcing table {n}x{n}"),
                        right: grid.to_string(),
                    });
                }
                VectorField::from_values(*grid, x.clone(), y.clone())
            }
        }
    }
}
