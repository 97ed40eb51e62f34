//! Coefficient laws, the randomization map, and reproducible seed streams.

pub mod law;
pub mod sample;
pub mod seed;

pub use law::{CoefficientLaw, LawKind, MgfReport};
pub use sample::{flip_sample, odot, randomize, SignPattern};
pub use seed::SeedSpec;
