//! Energy budgets, divergence norms, Galilean-boost experiments and the
//! Lagrangian transport check.

mod energy;
mod galilean;
mod transport;

pub use energy::{energy_audit, uniform_spacing, EnergyBudgetRow};
pub use galilean::{eulerian_acceleration, galilean_boost, galilean_invariance_report, GalileanReport};
pub use transport::{transport_check, ParticleSet, TransportOptions, TransportReport};

use crate::fields::l2_norm;
use crate::models::State;
use crate::operators::divergence;

/// `‖∇·v‖₂`
pub fn divergence_norm(state: &State) -> f64 {
    l2_norm(&divergence(&state.v))
}

/// Pearson correlation of two equally long series; `None` if either is
/// constant.
pub fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        None
    } else {
        Some(sab / (saa * sbb).sqrt())
    }
}

/// Observed convergence order between two errors at refinement ratio 2.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Grid, ScalarField, VectorField};
    use std::f64::consts::PI;

    #[test]
    fn divergence_norm_examples() {
        let g = Grid::periodic_2pi(128).unwrap();
        let s = State::new(VectorField::from_fn(g, |x, _| [x.sin(), 0.0]), ScalarField::zeros(g), 0.0).unwrap();
        assert!((divergence_norm(&s) - (2.0 * PI * PI).sqrt()).abs() < 2e-3);
        let c = State::new(VectorField::constant(g, [1.0, 2.0]), ScalarField::zeros(g), 0.0).unwrap();
        assert_eq!(divergence_norm(&c), 0.0);
    }

    #[test]
    fn correlation_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((correlation(&a, &[2.0, 4.0, 6.0, 8.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((correlation(&a, &[-1.0, -2.0, -3.0, -4.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(correlation(&a, &[1.0; 4]).is_none());
    }
}
