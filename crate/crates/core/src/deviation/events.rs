//! Monte-Carlo rates of the frequency-threshold events used by the growth
//! argument. For a cutoff N the four events on a randomized draw (v0, v1)
//! are
//!   F: |P_N (v0, v1)|_{H^1}                          <= N^(1 - s + eps)
//!   G: |P_N v0|_{L^4}                                <= N^eps
//!   H: |<t>^-delta  S(t) P^N (v0, v1)|_{L^2_t L^inf} <= N^(eps - s)
//!   K: |<t>^-dtilde S(t) P^N (v0, v1)|_{L^3_t L^6}   <= N^(eps - s)
//! and E is their intersection.

use rayon::prelude::*;

use super::wilson::wilson_interval;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::random::{randomize, CoefficientLaw, SeedSpec};
use crate::spectral::{for_each_slice, grid::lp_norm_raw, Component, NormComponent, SpectralEngine, SpectrumPair};

#[derive(Debug, Clone, Copy)]
pub struct EventParams {
    pub s: f64,
    pub epsilon: f64,
    /// Weight exponent of the L^2_t L^inf_x norm; must exceed 1/2.
    pub delta: f64,
    /// Weight exponent of the L^3_t L^6_x norm; must exceed 1/3.
    pub delta_tilde: f64,
    /// Half-width of the time quadrature window.
    pub t_max: f64,
    /// Time quadrature step.
    pub dt: f64,
}

/// Rates for one cutoff.
#[derive(Debug, Clone, Copy)]
pub struct CutoffRates {
    pub n: u32,
    /// Membership rates of F, G, H, K and the intersection E.
    pub rate: [f64; 5],
    /// Complement rates with Wilson intervals, same order F, G, H, K, E.
    pub complement: [f64; 5],
    pub complement_ci: [(f64, f64); 5],
}

#[derive(Debug, Clone)]
pub struct EventRates {
    pub params: EventParams,
    pub trials: u64,
    pub cutoffs: Vec<CutoffRates>,
}

pub fn event_rates(
    base: &SpectrumPair,
    law: &CoefficientLaw,
    params: &EventParams,
    n_list: &[u32],
    trials: u64,
    seed: SeedSpec,
) -> Result<EventRates> {
    if params.delta <= 0.5 {
        return Err(Error::InvalidInput(format!(
            "delta must exceed 1/2, got {}",
            params.delta
        )));
    }
    if params.delta_tilde <= 1.0 / 3.0 {
        return Err(Error::InvalidInput(format!(
            "delta_tilde must exceed 1/3, got {}",
            params.delta_tilde
        )));
    }
    if !(params.epsilon.is_finite() && params.s.is_finite()) {
        return Err(Error::InvalidInput("non-finite s or epsilon".into()));
    }
    if n_list.is_empty() {
        return Err(Error::InvalidInput("empty cutoff list".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    base.validate()?;
    let n_max = base.n_max();

    // per-trial membership bitmasks, one entry per cutoff
    let memberships: Vec<Vec<[bool; 4]>> = (0..trials)
        .into_par_iter()
        .map_init(
            || SpectralEngine::for_norms(n_max),
            |engine, k| -> Result<Vec<[bool; 4]>> {
                let draw = randomize(base, law, seed.with_stream(seed.stream_id + k))?;
                n_list
                    .iter()
                    .map(|&n| trial_membership(engine, &draw, n, params))
                    .collect()
            },
        )
        .collect::<Result<Vec<_>>>()?;

    let mut cutoffs = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        let mut hits = [0u64; 5];
        for row in &memberships {
            let m = row[i];
            let all = m.iter().all(|&b| b);
            for (j, &b) in m.iter().enumerate() {
                if b {
                    hits[j] += 1;
                }
            }
            if all {
                hits[4] += 1;
            }
        }
        let mut rate = [0.0; 5];
        let mut complement = [0.0; 5];
        let mut complement_ci = [(0.0, 0.0); 5];
        for j in 0..5 {
            rate[j] = hits[j] as f64 / trials as f64;
            let misses = trials - hits[j];
            complement[j] = misses as f64 / trials as f64;
            complement_ci[j] = wilson_interval(misses, trials);
        }
        cutoffs.push(CutoffRates {
            n,
            rate,
            complement,
            complement_ci,
        });
    }
    Ok(EventRates {
        params: *params,
        trials,
        cutoffs,
    })
}

fn trial_membership(
    engine: &mut SpectralEngine,
    draw: &SpectrumPair,
    n: u32,
    params: &EventParams,
) -> Result<[bool; 4]> {
    let nf = n as f64;
    let low = draw.project_low(n);
    let f_ok = low.sobolev_norm(1.0, NormComponent::Pair)? <= nf.powf(1.0 - params.s + params.epsilon);
    let g_ok =
        engine.synthesize(&low, Component::Position)?.lp_norm(4.0)? <= nf.powf(params.epsilon);

    let high = draw.project_high(n);
    let threshold = nf.powf(params.epsilon - params.s);
    let empty_high = high.zero_modes() == [0.0, 0.0]
        && high.coef().iter().all(|c| c.b == [0.0; 2] && c.c == [0.0; 2]);
    let (h_ok, k_ok) = if empty_high {
        (true, true)
    } else {
        // one pass over the time window serves both weighted norms
        let mut acc_h = CompensatedSum::new();
        let mut acc_k = CompensatedSum::new();
        for_each_slice(engine, &high, params.t_max, params.dt, |t, w, values| {
            let weight2 = (1.0 + t * t).powf(-params.delta);
            let weight3 = (1.0 + t * t).powf(-1.5 * params.delta_tilde);
            let linf = lp_norm_raw(values, f64::INFINITY).expect("p = inf is valid");
            let l6 = lp_norm_raw(values, 6.0).expect("p = 6 is valid");
            acc_h.add(w * weight2 * linf * linf);
            acc_k.add(w * weight3 * l6 * l6 * l6);
        })?;
        (
            acc_h.value().max(0.0).sqrt() <= threshold,
            acc_k.value().max(0.0).cbrt() <= threshold,
        )
    };
    Ok([f_ok, g_ok, h_ok, k_ok])
}
