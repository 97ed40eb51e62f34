//! Lattice spectra, norms, projectors, the free wave propagator, and the
//! FFT synthesis/analysis machinery.

pub mod grid;
pub mod lattice;
pub mod spacetime;
pub mod spectrum;
pub mod transform;

pub use grid::GridField;
pub use lattice::{LatticeIndex, ModeSet};
pub use spacetime::{
    for_each_slice, weighted_spacetime_norm, Projector, WeightedNorm, WeightedNormParams,
};
pub use spectrum::{Component, ModeCoef, NormComponent, SpectrumPair};
pub use transform::{
    dealias_grid, good_grid_size, min_grid, norm_grid, ComponentSpectrum, SpectralEngine,
};
