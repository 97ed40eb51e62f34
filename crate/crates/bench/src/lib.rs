//! Shared fixtures for the benchmarks.

use randwave::random::{randomize, CoefficientLaw, SeedSpec};
use randwave::spectral::{Component, SpectrumPair};

/// Gaussian randomization of a power-decay spectrum, the workload every hot
/// path sees.
pub fn bench_spectrum(n_max: u32, sigma: f64) -> SpectrumPair {
    let mut base = SpectrumPair::zero(0.5, n_max);
    base.set_zero_mode(Component::Position, 1.0);
    base.set_zero_mode(Component::Velocity, 1.0);
    for (k, m) in base.modes().clone().iter().enumerate() {
        let w = m.bracket_sq().powf(-0.5 * sigma);
        base.coef_mut()[k].b = [w, w];
        base.coef_mut()[k].c = [w, w];
    }
    randomize(&base, &CoefficientLaw::gaussian(), SeedSpec::new(7, 0)).unwrap()
}
