use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ForcingSpec, ModelConfig, DEFAULT_CFL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    TaylorGreen,
    KSweep,
    EnergyAudit,
    Galilean,
    TransportCheck,
    FreeRun,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// The decaying vortex, optionally plus `perturbation` times the unit
    /// compressive pulse.
    TaylorGreen {
        #[serde(default)]
        perturbation: f64,
    },
    /// `v = ∇φ` for a periodic bump centred in the cell, `p = 0`.
    CompressivePulse {
        #[serde(default = "default_pulse_amplitude")]
        amplitude: f64,
    },
    /// Trigonometric sum over wavenumbers `|k| ≤ modes`, normalised so the
    /// largest speed equals `amplitude`, `p = 0`. Without a seed the run
    /// seed is used.
    RandomSmooth {
        #[serde(default)]
        seed: Option<u64>,
        modes: u32,
        amplitude: f64,
    },
    /// A state written by `write_snapshot`, given by its path stem.
    FromSnapshot { path: PathBuf },
}

fn default_pulse_amplitude() -> f64 {
    0.5
}

/// Particle lattice for the transport check: `m × m` particles on the
/// square of side `side` centred at `center`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSpec {
    pub center: [f64; 2],
    pub side: f64,
    pub m: usize,
}

fn default_period() -> f64 {
    2.0 * PI
}

fn default_cfl() -> f64 {
    DEFAULT_CFL
}

fn default_one() -> usize {
    1
}

fn default_true() -> bool {
    true
}

/// One run, read from a JSON document. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    #[serde(default = "default_period")]
    pub period: f64,
    pub t_final: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Fixed time step; when absent the step follows the stability bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub forcing: ForcingSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_list: Option<Vec<f64>>,
    pub initial_condition: InitialCondition,
    /// Steps between snapshots; 0 writes only the final state.
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub seed: u64,
    /// Steps between trajectory samples used by budgets and particle checks.
    #[serde(default = "default_one")]
    pub sample_every: usize,
    /// Galilean boost velocity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boost: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<ParticleSpec>,
    /// K-sweep only: keep the solenoidal part of the initial data, scale its
    /// compressive part by `K_min/K` and start from the incompressible
    /// pressure, so that no acoustic transient of order `K^0` is excited.
    #[serde(default = "default_true")]
    pub well_prepared: bool,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::TaylorGreen => "taylor_green",
            ExperimentKind::KSweep => "k_sweep",
            ExperimentKind::EnergyAudit => "energy_audit",
            ExperimentKind::Galilean => "galilean",
            ExperimentKind::TransportCheck => "transport_check",
            ExperimentKind::FreeRun => "free_run",
        }
    }
}

/// Output directory precedence: explicit override, then the configured
/// `out_dir`, then `<env_root>/<experiment>`, then `out/<experiment>`.
pub fn resolve_out_dir(
    explicit: Option<&Path>,
    configured: Option<&Path>,
    env_root: Option<&Path>,
    experiment: &str,
) -> PathBuf {
    explicit
        .or(configured)
        .map(Path::to_path_buf)
        .unwrap_or_else(|| env_root.unwrap_or(Path::new("out")).join(experiment))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Experiment(msg));
        if self.n < 4 {
            return bad(format!("n must be at least 4, got {}", self.n));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return bad(format!("period must be positive, got {}", self.period));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if !(self.cfl.is_finite() && self.cfl > 0.0) {
            return bad(format!("cfl must be positive, got {}", self.cfl));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1".into());
        }
        self.model.validate()?;
        if let Some(ks) = &self.k_list {
            if ks.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
                return bad("k_list entries must be positive".into());
            }
            if ks.windows(2).any(|w| w[1] <= w[0]) {
                return bad("k_list must be strictly increasing".into());
            }
        }
        match self.experiment {
            ExperimentKind::KSweep => match &self.k_list {
                Some(ks) if ks.len() >= 3 => {}
                _ => return bad("k_sweep needs a k_list with at least 3 entries".into()),
            },
            ExperimentKind::Galilean if self.boost.is_none() => {
                return bad("galilean needs a boost velocity".into());
            }
            _ => {}
        }
        if let Some(p) = &self.particles {
            if p.m == 0 || !(p.side > 0.0) {
                return bad("particles need m > 0 and side > 0".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"experiment":"free_run","n":16,"t_final":0.5,
        "initial_condition":{"kind":"taylor_green"}}"#;

    #[test]
    fn output_directory_precedence() {
        let (a, b, c) = (Path::new("a"), Path::new("b"), Path::new("c"));
        assert_eq!(resolve_out_dir(Some(a), Some(b), Some(c), "x"), a);
        assert_eq!(resolve_out_dir(None, Some(b), Some(c), "x"), b);
        assert_eq!(resolve_out_dir(None, None, Some(c), "x"), c.join("x"));
        assert_eq!(resolve_out_dir(None, None, None, "x"), Path::new("out/x"));
    }

    #[test]
    fn kind_names_match_serde() {
        for kind in [ExperimentKind::TaylorGreen, ExperimentKind::KSweep, ExperimentKind::TransportCheck] {
            assert_eq!(serde_json::to_value(kind).unwrap(), kind.name());
        }
    }

    #[test]
    fn minimal_document_uses_defaults() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.cfl, DEFAULT_CFL);
        assert_eq!(cfg.period, 2.0 * PI);
        assert_eq!(cfg.model, ModelConfig::default());
        assert_eq!(cfg.initial_condition, InitialCondition::TaylorGreen { perturbation: 0.0 });
        assert!(cfg.well_prepared);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let top = MINIMAL.replace("\"n\":16", "\"n\":16,\"nn\":3");
        assert!(matches!(ExperimentConfig::from_json(&top), Err(Error::Json(_))));
        let nested = MINIMAL.replace("\"t_final\":0.5", "\"t_final\":0.5,\"model\":{\"reynolds\":3}");
        assert!(ExperimentConfig::from_json(&nested).is_err());
        let ic = MINIMAL.replace("\"kind\":\"taylor_green\"", "\"kind\":\"taylor_green\",\"amp\":1");
        assert!(ExperimentConfig::from_json(&ic).is_err());
    }

    #[test]
    fn invariants_are_checked() {
        let neg = MINIMAL.replace("0.5", "-1");
        assert!(matches!(ExperimentConfig::from_json(&neg), Err(Error::Experiment(_))));
        let sweep = MINIMAL.replace("free_run", "k_sweep");
        assert!(ExperimentConfig::from_json(&sweep).is_err());
        let unordered = sweep.replace("\"n\":16", "\"n\":16,\"k_list\":[10,1000,100]");
        assert!(ExperimentConfig::from_json(&unordered).is_err());
        let ok = sweep.replace("\"n\":16", "\"n\":16,\"k_list\":[10,100,1000]");
        ExperimentConfig::from_json(&ok).unwrap();
        let gal = MINIMAL.replace("free_run", "galilean");
        assert!(ExperimentConfig::from_json(&gal).is_err());
    }

    #[test]
    fn serialisation_roundtrip() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }
}
