//! Probabilistic-continuity probe: are two flows starting eta-close likely
//! to stay close in the trajectory metric
//!   X_T = sup_{t <= T} |pair difference|_{H^s} + |position difference|_{L^4([0,T] x T^3)} ?
//!
//! Pairs are built by the coupled construction V' = V + eta W with W an
//! independent randomized draw normalised to unit H^s norm; conditioning on
//! |V - V'| < eta by rejection from the product measure is hopeless at this
//! scale.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolve::{evolve_full, EvolveOptions, GuardMode, TrajectoryRecord};
use crate::numeric::{cumulative_trapezoid, linear_fit, quantile_sorted};
use crate::random::{randomize, CoefficientLaw, SeedSpec};
use crate::spectral::{Component, NormComponent, SpectralEngine, SpectrumPair};

/// Trajectory distance sup_{t<=T} H^s + space-time L^4, from snapshots.
pub fn xt_distance(a: &TrajectoryRecord, b: &TrajectoryRecord, s: f64, t_cap: f64) -> Result<f64> {
    let snaps_a = a
        .snapshots
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("first trajectory carries no snapshots".into()))?;
    let snaps_b = b
        .snapshots
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("second trajectory carries no snapshots".into()))?;
    if !a.same_time_grid(b) || snaps_a.len() != snaps_b.len() {
        return Err(Error::InvalidInput(
            "trajectories recorded on different time grids".into(),
        ));
    }
    if snaps_a.is_empty() {
        return Err(Error::InvalidInput("empty trajectories".into()));
    }

    let n_max = snaps_a[0].state.n_max();
    let mut engine = SpectralEngine::for_norms(n_max);
    let mut sup_hs = 0.0f64;
    let mut times = Vec::new();
    let mut l4_pow4 = Vec::new();
    for (sa, sb) in snaps_a.iter().zip(snaps_b) {
        if sa.t > t_cap * (1.0 + 1e-12) {
            break;
        }
        let diff = sa.state.sub(&sb.state)?;
        sup_hs = sup_hs.max(diff.sobolev_norm(s, NormComponent::Pair)?);
        let field = engine.synthesize(&diff, Component::Position)?;
        times.push(sa.t);
        l4_pow4.push(field.mean_of(|v| v * v * v * v));
    }
    if times.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "no snapshots inside [0, {t_cap}]"
        )));
    }
    let integral = *cumulative_trapezoid(&times, &l4_pow4)
        .last()
        .expect("nonempty");
    Ok(sup_hs + integral.max(0.0).powf(0.25))
}

#[derive(Debug, Clone, Copy)]
pub struct ContinuityParams {
    pub s: f64,
    /// Radius A of the data ball; pairs outside are resampled.
    pub ball_radius: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Steps between snapshots.
    pub record_every: usize,
    pub pairs_per_eta: usize,
    pub max_attempts: u32,
}

#[derive(Debug, Clone)]
pub struct EtaReport {
    pub eta: f64,
    pub samples: usize,
    pub rejections: u64,
    /// 10/25/50/75/90 percent quantiles of the X_T distance.
    pub quantiles: [f64; 5],
    pub mean: f64,
}

#[derive(Debug, Clone)]
pub struct ContinuityReport {
    pub per_eta: Vec<EtaReport>,
    /// log-log slope of the median distance against eta (NaN when fewer
    /// than two etas have positive medians).
    pub slope: f64,
    pub slope_residual: f64,
}

pub fn continuity_probe(
    base: &SpectrumPair,
    law: &CoefficientLaw,
    params: &ContinuityParams,
    etas: &[f64],
    seed: SeedSpec,
) -> Result<ContinuityReport> {
    if etas.is_empty() {
        return Err(Error::InvalidInput("empty eta grid".into()));
    }
    if params.pairs_per_eta == 0 {
        return Err(Error::InvalidInput("need at least one pair per eta".into()));
    }
    if !(params.ball_radius > 0.0) {
        return Err(Error::InvalidInput("ball radius must be positive".into()));
    }
    base.validate()?;

    let opts = EvolveOptions {
        dt: params.dt,
        t_end: params.t_end,
        record_every: params.record_every,
        snapshots: true,
        guard: GuardMode::Auto,
        nonlinearity: true,
    };

    let tasks: Vec<(usize, usize)> = (0..etas.len())
        .flat_map(|e| (0..params.pairs_per_eta).map(move |k| (e, k)))
        .collect();
    let results: Vec<(usize, f64, u64)> = tasks
        .par_iter()
        .map(|&(e, k)| -> Result<(usize, f64, u64)> {
            let eta = etas[e];
            let task_index = (e * params.pairs_per_eta + k) as u64;
            let (v, v_prime, rejections) =
                build_pair(base, law, params, eta, seed, task_index)?;
            let ta = evolve_full(&v, &opts)?;
            let tb = evolve_full(&v_prime, &opts)?;
            let d = xt_distance(&ta, &tb, params.s, params.t_end)?;
            Ok((e, d, rejections))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut per_eta = Vec::with_capacity(etas.len());
    for (e, &eta) in etas.iter().enumerate() {
        let mut distances: Vec<f64> = results
            .iter()
            .filter(|(ei, _, _)| *ei == e)
            .map(|&(_, d, _)| d)
            .collect();
        let rejections: u64 = results
            .iter()
            .filter(|(ei, _, _)| *ei == e)
            .map(|&(_, _, r)| r)
            .sum();
        distances.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        let quantiles = [
            quantile_sorted(&distances, 0.10),
            quantile_sorted(&distances, 0.25),
            quantile_sorted(&distances, 0.50),
            quantile_sorted(&distances, 0.75),
            quantile_sorted(&distances, 0.90),
        ];
        let mean = distances.iter().sum::<f64>() / distances.len() as f64;
        per_eta.push(EtaReport {
            eta,
            samples: distances.len(),
            rejections,
            quantiles,
            mean,
        });
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for report in &per_eta {
        if report.eta > 0.0 && report.quantiles[2] > 0.0 {
            xs.push(report.eta.ln());
            ys.push(report.quantiles[2].ln());
        }
    }
    let (slope, residual) = if xs.len() >= 2 {
        let (intercept, slope, _) = linear_fit(&xs, &ys);
        let sse: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        (slope, (sse / xs.len() as f64).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };

    Ok(ContinuityReport {
        per_eta,
        slope,
        slope_residual: residual,
    })
}

/// Coupled pair construction with ball rejection. Attempt `a` of task `i`
/// draws from streams 2 (i * max_attempts + a) and its successor, so
/// resampling never perturbs other tasks.
fn build_pair(
    base: &SpectrumPair,
    law: &CoefficientLaw,
    params: &ContinuityParams,
    eta: f64,
    seed: SeedSpec,
    task_index: u64,
) -> Result<(SpectrumPair, SpectrumPair, u64)> {
    let mut rejections = 0u64;
    for attempt in 0..params.max_attempts.max(1) as u64 {
        let stream = seed.stream_id + 2 * (task_index * params.max_attempts.max(1) as u64 + attempt);
        let v = randomize(base, law, seed.with_stream(stream))?;
        let w_raw = randomize(base, law, seed.with_stream(stream + 1))?;
        let w_norm = w_raw.sobolev_norm(params.s, NormComponent::Pair)?;
        if w_norm == 0.0 {
            rejections += 1;
            continue;
        }
        let w_unit = w_raw.scale(1.0 / w_norm);
        let v_prime = v.add(&w_unit.scale(eta))?;
        let v_in = v.sobolev_norm(params.s, NormComponent::Pair)? <= params.ball_radius;
        let vp_in = v_prime.sobolev_norm(params.s, NormComponent::Pair)? <= params.ball_radius;
        if v_in && vp_in {
            return Ok((v, v_prime, rejections));
        }
        rejections += 1;
    }
    Err(Error::InvalidInput(format!(
        "could not draw a pair inside the ball of radius {} after {} attempts",
        params.ball_radius, params.max_attempts
    )))
}
