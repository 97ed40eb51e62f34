//! Time integration of the cubic wave equation: the split-step evolver for
//! the full and decomposed formulations, the Duhamel fixed-point oracle,
//! energy bookkeeping, the Gronwall envelope, and growth fits.

pub mod duhamel;
pub mod gronwall;
pub mod growth;
pub mod record;
pub mod stepper;

pub use duhamel::{local_solve_duhamel, DuhamelOptions, DuhamelSolution, Forcing};
pub use gronwall::{gronwall_envelope, GronwallConstants, GronwallEnvelope};
pub use growth::{fit_growth, GrowthFit};
pub use record::{Snapshot, TrajectoryRecord};
pub use stepper::{
    energy_flux_check, evolve_decomposed, evolve_full, EvolveOptions, FluxCheck, GuardMode,
    Split, SplitState, WaveStepper,
};

use crate::error::Result;
use crate::spectral::GridField;

/// Energy functional of the remainder,
/// E(w) = 1/2 <wt^2> + 1/2 <|grad w|^2> + 1/4 <w^4>,
/// evaluated from grid samples with the gradient computed spectrally.
pub fn energy(w: &GridField, wt: &GridField) -> Result<f64> {
    use crate::error::Error;
    use crate::spectral::SpectralEngine;

    if w.n_grid() != wt.n_grid() {
        return Err(Error::InvalidInput(format!(
            "mismatched grids: {} vs {}",
            w.n_grid(),
            wt.n_grid()
        )));
    }
    // the largest ball that the grid can represent without aliasing
    let n_max = ((w.n_grid() - 2) / 2) as u32;
    let mut engine = SpectralEngine::new(w.n_grid());
    let spec = engine.analyze(w, n_max)?;
    let mut gradient = 0.0;
    for (m, bc) in spec.modes.iter().zip(&spec.bc) {
        let w2 = m.norm_sq() as f64;
        gradient += 0.5 * w2 * (bc[0] * bc[0] + bc[1] * bc[1]);
    }
    let kinetic = wt.mean_of(|v| v * v);
    let quartic = w.mean_of(|v| v * v * v * v);
    Ok(0.5 * kinetic + 0.5 * gradient + 0.25 * quartic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Component, SpectralEngine, SpectrumPair};
    use approx::assert_relative_eq;

    #[test]
    fn energy_of_constant_field() {
        let w = GridField::constant(8, 1.0);
        let wt = GridField::constant(8, 0.0);
        assert_relative_eq!(energy(&w, &wt).unwrap(), 0.25, max_relative = 1e-14);
    }

    #[test]
    fn energy_of_pure_velocity() {
        let w = GridField::constant(8, 0.0);
        let wt = GridField::constant(8, 2.0);
        assert_relative_eq!(energy(&w, &wt).unwrap(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn energy_of_cosine() {
        // mean cos^2 = 1/2 and mean cos^4 = 3/8:
        // E = 1/2 * 1/2 + 1/4 * 3/8 = 0.34375
        let mut sp = SpectrumPair::zero(0.0, 1);
        sp.set_mode([1, 0, 0], Component::Position, 1.0, 0.0).unwrap();
        let mut eng = SpectralEngine::new(8);
        let w = eng.synthesize(&sp, Component::Position).unwrap();
        let wt = GridField::constant(8, 0.0);
        assert_relative_eq!(energy(&w, &wt).unwrap(), 0.34375, max_relative = 1e-12);
    }

    #[test]
    fn energy_rejects_mismatched_grids() {
        let w = GridField::constant(8, 1.0);
        let wt = GridField::constant(12, 0.0);
        assert!(energy(&w, &wt).is_err());
    }
}
