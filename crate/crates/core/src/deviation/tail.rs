//! Monte-Carlo exceedance curves P(F(v^omega) > lambda) and the sub-gaussian
//! exponent fit log p = log C - c lambda^2.

use rayon::prelude::*;

use super::wilson::wilson_interval;
use crate::error::{Error, Result};
use crate::numeric::weighted_linear_fit;
use crate::random::{randomize, CoefficientLaw, SeedSpec};
use crate::spectral::{
    weighted_spacetime_norm, Component, NormComponent, Projector, SpectralEngine, SpectrumPair,
    WeightedNormParams,
};

/// Norm functional evaluated on each randomized draw.
#[derive(Debug, Clone)]
pub enum NormFunctional {
    /// L^p norm of the low-frequency projection of the position slot.
    LpOfLowProjection { p: f64, n_cut: u32 },
    /// H^sigma x H^(sigma-1) norm of the pair.
    SobolevPair { sigma: f64 },
    /// Weighted space-time norm of the projected free evolution.
    WeightedSpaceTime {
        params: WeightedNormParams,
        projector: Projector,
    },
}

impl NormFunctional {
    pub fn from_name(name: &str, p: f64, n_cut: u32, sigma: f64) -> Result<Self> {
        match name {
            "lp_low" => Ok(NormFunctional::LpOfLowProjection { p, n_cut }),
            "sobolev_pair" => Ok(NormFunctional::SobolevPair { sigma }),
            other => Err(Error::Config(format!("unknown functional '{other}'"))),
        }
    }

    pub fn eval(&self, engine: &mut SpectralEngine, sample: &SpectrumPair) -> Result<f64> {
        match self {
            NormFunctional::LpOfLowProjection { p, n_cut } => {
                let low = sample.project_low(*n_cut);
                engine.synthesize(&low, Component::Position)?.lp_norm(*p)
            }
            NormFunctional::SobolevPair { sigma } => {
                sample.sobolev_norm(*sigma, NormComponent::Pair)
            }
            NormFunctional::WeightedSpaceTime { params, projector } => {
                Ok(weighted_spacetime_norm(engine, sample, params, *projector)?.value)
            }
        }
    }
}

/// Empirical exceedance probabilities over a threshold grid, with Wilson 95%
/// intervals. Raw counts; no isotonic adjustment is applied.
#[derive(Debug, Clone)]
pub struct TailCurve {
    pub lambdas: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    pub trials: u64,
}

/// Run `trials` independent randomizations and count exceedances of each
/// threshold. Trial k draws from stream `seed.stream_id + k`, so the result
/// is independent of evaluation order and worker count.
pub fn estimate_tail(
    functional: &NormFunctional,
    base: &SpectrumPair,
    law: &CoefficientLaw,
    lambdas: &[f64],
    trials: u64,
    seed: SeedSpec,
) -> Result<TailCurve> {
    if trials < 100 {
        return Err(Error::InvalidInput(format!(
            "need at least 100 trials, got {trials}"
        )));
    }
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("empty threshold grid".into()));
    }
    for w in lambdas.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidInput("thresholds must increase".into()));
        }
    }
    base.validate()?;

    let n_max = base.n_max();
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map_init(
            || SpectralEngine::for_norms(n_max),
            |engine, k| -> Result<f64> {
                let draw = randomize(base, law, seed.with_stream(seed.stream_id + k))?;
                functional.eval(engine, &draw)
            },
        )
        .collect::<Result<Vec<f64>>>()?;

    let mut counts = vec![0u64; lambdas.len()];
    for &v in &values {
        for (i, &lambda) in lambdas.iter().enumerate() {
            if v > lambda {
                counts[i] += 1;
            } else {
                break;
            }
        }
    }
    let mut p_hat = Vec::with_capacity(lambdas.len());
    let mut ci_lo = Vec::with_capacity(lambdas.len());
    let mut ci_hi = Vec::with_capacity(lambdas.len());
    for &c in &counts {
        let (lo, hi) = wilson_interval(c, trials);
        p_hat.push(c as f64 / trials as f64);
        ci_lo.push(lo);
        ci_hi.push(hi);
    }
    Ok(TailCurve {
        lambdas: lambdas.to_vec(),
        p_hat,
        ci_lo,
        ci_hi,
        trials,
    })
}

/// Fitted tail exponent: weighted least squares of log p against lambda^2,
/// using only informative grid points (0 < p < 1).
#[derive(Debug, Clone, Copy)]
pub struct TailFit {
    /// Decay rate c in p ~ C e^{-c lambda^2}.
    pub c: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

pub fn fit_tail_exponent(curve: &TailCurve) -> Result<TailFit> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut w = Vec::new();
    for (i, &p) in curve.p_hat.iter().enumerate() {
        if p > 0.0 && p < 1.0 {
            x.push(curve.lambdas[i] * curve.lambdas[i]);
            y.push(p.ln());
            // delta-method variance of log p_hat is (1-p)/(n p)
            w.push(curve.trials as f64 * p / (1.0 - p));
        }
    }
    if x.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "only {} informative grid points (need 4)",
            x.len()
        )));
    }
    let (intercept, slope, r2) = weighted_linear_fit(&x, &y, &w);
    Ok(TailFit {
        c: -slope,
        prefactor: intercept.exp(),
        r_squared: r2,
        points_used: x.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_base() -> SpectrumPair {
        let mut sp = SpectrumPair::zero(0.0, 2);
        sp.set_mode([1, 0, 0], Component::Position, 1.0, 0.0).unwrap();
        sp
    }

    #[test]
    fn lambda_zero_has_full_exceedance() {
        let curve = estimate_tail(
            &NormFunctional::SobolevPair { sigma: 0.0 },
            &cos_base(),
            &CoefficientLaw::gaussian(),
            &[0.0, 1e9],
            200,
            SeedSpec::new(5, 0),
        )
        .unwrap();
        assert_eq!(curve.p_hat[0], 1.0);
        // beyond any observed value: zero exceedances, CI upper near 3/n
        assert_eq!(curve.p_hat[1], 0.0);
        assert!(curve.ci_hi[1] < 5.0 / 200.0);
    }

    #[test]
    fn deterministic_and_order_invariant() {
        let lambdas = [0.2, 0.5, 0.8];
        let a = estimate_tail(
            &NormFunctional::SobolevPair { sigma: 0.0 },
            &cos_base(),
            &CoefficientLaw::uniform(),
            &lambdas,
            300,
            SeedSpec::new(9, 100),
        )
        .unwrap();
        let b = estimate_tail(
            &NormFunctional::SobolevPair { sigma: 0.0 },
            &cos_base(),
            &CoefficientLaw::uniform(),
            &lambdas,
            300,
            SeedSpec::new(9, 100),
        )
        .unwrap();
        assert_eq!(a.p_hat, b.p_hat);
    }

    #[test]
    fn bernoulli_tail_is_a_step_at_the_base_norm() {
        let base = cos_base();
        let norm = base.sobolev_norm(0.0, NormComponent::Pair).unwrap();
        let curve = estimate_tail(
            &NormFunctional::SobolevPair { sigma: 0.0 },
            &base,
            &CoefficientLaw::bernoulli(),
            &[norm * 0.999, norm * 1.001],
            200,
            SeedSpec::new(1, 0),
        )
        .unwrap();
        assert_eq!(curve.p_hat[0], 1.0);
        assert_eq!(curve.p_hat[1], 0.0);
    }

    #[test]
    fn planted_gaussian_curve_fit() {
        // synthetic curve p = e^{-2 lambda^2}
        let lambdas: Vec<f64> = (1..12).map(|k| k as f64 * 0.1).collect();
        let p_hat: Vec<f64> = lambdas.iter().map(|&l| (-2.0 * l * l).exp()).collect();
        let n = lambdas.len();
        let curve = TailCurve {
            lambdas,
            p_hat,
            ci_lo: vec![0.0; n],
            ci_hi: vec![1.0; n],
            trials: 100_000,
        };
        let fit = fit_tail_exponent(&curve).unwrap();
        assert!((fit.c - 2.0).abs() < 1e-6, "c = {}", fit.c);
        assert!((fit.prefactor - 1.0).abs() < 1e-6);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn model_mismatch_is_flagged_by_r_squared() {
        // p = min(1, e^{1 - lambda}): not sub-gaussian in lambda^2
        let lambdas: Vec<f64> = (1..20).map(|k| k as f64 * 0.35).collect();
        let p_hat: Vec<f64> = lambdas.iter().map(|&l| (1.0 - l).exp().min(0.999)).collect();
        let n = lambdas.len();
        let curve = TailCurve {
            lambdas,
            p_hat,
            ci_lo: vec![0.0; n],
            ci_hi: vec![1.0; n],
            trials: 100_000,
        };
        let fit = fit_tail_exponent(&curve).unwrap();
        assert!(fit.r_squared < 0.95, "r2 = {}", fit.r_squared);
    }

    #[test]
    fn too_few_informative_points_is_an_error() {
        let curve = TailCurve {
            lambdas: vec![0.1, 0.2, 0.3],
            p_hat: vec![1.0, 0.5, 0.0],
            ci_lo: vec![0.0; 3],
            ci_hi: vec![1.0; 3],
            trials: 1000,
        };
        assert!(fit_tail_exponent(&curve).is_err());
    }
}
