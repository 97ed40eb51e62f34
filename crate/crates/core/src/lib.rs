//! Pseudospectral simulation of the cubic defocusing wave equation on the
//! 3-torus with randomized Fourier initial data, together with the
//! Monte-Carlo machinery used to verify its statistical behaviour: tail
//! estimation with confidence intervals, frequency-threshold event rates, a
//! probabilistic-continuity probe, and a Gaussian product-measure
//! equivalence classifier.
//!
//! Layout:
//! - [`spectral`]: lattice spectra, Sobolev/Lebesgue norms, projectors, the
//!   exact free propagator, and FFT synthesis/analysis;
//! - [`random`]: coefficient laws and the seeded randomization map;
//! - [`evolve`]: the split-step integrator, the Duhamel fixed-point solver,
//!   energy bookkeeping, envelope and growth fits;
//! - [`deviation`]: tail curves, event-set rates, the continuity probe;
//! - [`kakutani`]: Hellinger products and the equivalence verdict.

pub mod error;
pub mod numeric;

pub mod deviation;
pub mod evolve;
pub mod kakutani;
pub mod random;
pub mod spectral;

pub use error::{Error, Result};
pub use random::{CoefficientLaw, LawKind, SeedSpec};
pub use spectral::{
    Component, GridField, LatticeIndex, ModeSet, NormComponent, SpectralEngine, SpectrumPair,
};
