//! Monte-Carlo estimation: exceedance tails, frequency-threshold event
//! rates, and the probabilistic-continuity probe.

pub mod continuity;
pub mod events;
pub mod tail;
pub mod wilson;

pub use continuity::{
    continuity_probe, xt_distance, ContinuityParams, ContinuityReport, EtaReport,
};
pub use events::{event_rates, CutoffRates, EventParams, EventRates};
pub use tail::{estimate_tail, fit_tail_exponent, NormFunctional, TailCurve, TailFit};
pub use wilson::{wilson_interval, wilson_interval_z};
