//! Equivalence vs singularity of Gaussian product measures.
//!
//! Two centered Gaussian product measures with per-slot standard deviations
//! x_{n,1}, x_{n,2} are mutually absolutely continuous exactly when every
//! slot vanishes simultaneously and the product of the per-slot Hellinger
//! affinities (2 x1 x2 / (x1^2 + x2^2))^(1/2) stays positive, which amounts
//! to sum (x2/x1 - 1)^2 < infinity. On finite data the dichotomy becomes a
//! pair of thresholds: the log-affinity must either stay near zero with a
//! converged tail, or sink below the singularity cutoff.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::spectral::SpectrumPair;

/// Hellinger affinity of two centered Gaussians with standard deviations
/// `x1`, `x2`. Equal to 1 iff x1 = x2; 0 when exactly one is degenerate;
/// by convention 1 when both vanish.
pub fn hellinger_factor(x1: f64, x2: f64) -> Result<f64> {
    if !(x1 >= 0.0) || !(x2 >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "standard deviations must be nonnegative, got ({x1}, {x2})"
        )));
    }
    if x1 == 0.0 && x2 == 0.0 {
        return Ok(1.0);
    }
    if x1 == 0.0 || x2 == 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * x1 * x2 / (x1 * x1 + x2 * x2)).sqrt())
}

/// Paired standard-deviation sequences, one slot per coefficient.
#[derive(Debug, Clone)]
pub struct VarianceSequences {
    x1: Vec<f64>,
    x2: Vec<f64>,
}

impl VarianceSequences {
    pub fn new(x1: Vec<f64>, x2: Vec<f64>) -> Result<Self> {
        if x1.len() != x2.len() {
            return Err(Error::IndexSetMismatch(format!(
                "sequence lengths differ: {} vs {}",
                x1.len(),
                x2.len()
            )));
        }
        if x1.iter().chain(&x2).any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(
                "standard deviations must be finite and nonnegative".into(),
            ));
        }
        Ok(VarianceSequences { x1, x2 })
    }

    pub fn len(&self) -> usize {
        self.x1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x1.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Equivalent,
    MutuallySingular,
    InconclusiveFiniteData,
}

/// Finite-sample thresholds for the dichotomy.
#[derive(Debug, Clone, Copy)]
pub struct KakutaniThresholds {
    /// Verdict is singular once log-affinity sinks below this (default
    /// log 1e-6, i.e. affinity below one in a million).
    pub singular_log_affinity: f64,
    /// Verdict is equivalent when the mean per-slot -log factor over the
    /// last half of the sequence falls below this.
    pub tail_mean: f64,
}

impl Default for KakutaniThresholds {
    fn default() -> Self {
        KakutaniThresholds {
            singular_log_affinity: 1e-6f64.ln(),
            tail_mean: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AffinityReport {
    /// Sum of log Hellinger factors; -inf on a zero mismatch.
    pub log_affinity: f64,
    /// Product affinity in (0, 1]; 0 on a zero mismatch.
    pub affinity: f64,
    /// Sum of (|x2/x1| - 1)^2 over slots where both deviations are positive.
    pub partial_ratio_sum: f64,
    pub verdict: Verdict,
    /// Some slot vanished on one side only.
    pub zero_mismatch: bool,
    /// Mean per-slot -log factor over the trailing half.
    pub tail_mean: f64,
    pub slots: usize,
}

/// Accumulate the Hellinger product over all slots and classify.
pub fn affinity(seqs: &VarianceSequences, thresholds: &KakutaniThresholds) -> Result<AffinityReport> {
    let n = seqs.len();
    let mut neg_log = CompensatedSum::new();
    let mut tail_neg_log = CompensatedSum::new();
    let mut ratio_sum = CompensatedSum::new();
    let mut zero_mismatch = false;
    let tail_start = n / 2;

    for k in 0..n {
        let (x1, x2) = (seqs.x1[k], seqs.x2[k]);
        let factor = hellinger_factor(x1, x2)?;
        if factor == 0.0 {
            zero_mismatch = true;
            continue;
        }
        if x1 > 0.0 && x2 > 0.0 {
            let eps = (x2 / x1).abs() - 1.0;
            ratio_sum.add(eps * eps);
        }
        let term = -factor.ln();
        neg_log.add(term);
        if k >= tail_start {
            tail_neg_log.add(term);
        }
    }

    let log_affinity = if zero_mismatch {
        f64::NEG_INFINITY
    } else {
        -neg_log.value()
    };
    let tail_len = n - tail_start;
    let tail_mean = if tail_len > 0 {
        tail_neg_log.value() / tail_len as f64
    } else {
        0.0
    };

    let verdict = if zero_mismatch || log_affinity < thresholds.singular_log_affinity {
        Verdict::MutuallySingular
    } else if tail_mean < thresholds.tail_mean {
        Verdict::Equivalent
    } else {
        Verdict::InconclusiveFiniteData
    };

    Ok(AffinityReport {
        log_affinity,
        affinity: log_affinity.exp(),
        partial_ratio_sum: ratio_sum.value(),
        verdict,
        zero_mismatch,
        tail_mean,
        slots: n,
    })
}

/// Classify the Gaussian randomizations of two base spectra. The slot order
/// is a0, a1, then (b0, c0, b1, c1) per canonical mode; under a Gaussian
/// randomization each slot is a centered Gaussian whose standard deviation
/// is the absolute base coefficient. Singularity is immediate when a
/// coefficient vanishes on one side only.
pub fn classify(
    base: &SpectrumPair,
    other: &SpectrumPair,
    thresholds: &KakutaniThresholds,
) -> Result<AffinityReport> {
    base.validate()?;
    other.validate()?;
    if !base.same_index_set(other) {
        return Err(Error::IndexSetMismatch(format!(
            "spectra truncated at different radii: {} vs {}",
            base.n_max(),
            other.n_max()
        )));
    }
    let seqs = VarianceSequences::new(slot_deviations(base), slot_deviations(other))?;
    affinity(&seqs, thresholds)
}

fn slot_deviations(sp: &SpectrumPair) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 + 4 * sp.coef().len());
    out.push(sp.zero_modes()[0].abs());
    out.push(sp.zero_modes()[1].abs());
    for c in sp.coef() {
        out.push(c.b[0].abs());
        out.push(c.c[0].abs());
        out.push(c.b[1].abs());
        out.push(c.c[1].abs());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Component;
    use approx::assert_relative_eq;

    #[test]
    fn factor_of_identical_gaussians_is_one() {
        assert_eq!(hellinger_factor(5.0, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn factor_one_two() {
        assert_relative_eq!(
            hellinger_factor(1.0, 2.0).unwrap(),
            (4.0f64 / 5.0).sqrt(),
            max_relative = 1e-15
        );
        assert_relative_eq!(hellinger_factor(1.0, 2.0).unwrap(), 0.894427, max_relative = 1e-6);
    }

    #[test]
    fn degenerate_factor_is_zero() {
        assert_eq!(hellinger_factor(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(hellinger_factor(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(hellinger_factor(0.0, 0.0).unwrap(), 1.0);
        assert!(hellinger_factor(-1.0, 1.0).is_err());
    }

    #[test]
    fn factor_symmetry_and_scale_invariance() {
        for (a, b) in [(0.3, 1.7), (2.0, 2.0), (1e-6, 1.0)] {
            let f1 = hellinger_factor(a, b).unwrap();
            let f2 = hellinger_factor(b, a).unwrap();
            assert_relative_eq!(f1, f2, max_relative = 1e-15);
            let f3 = hellinger_factor(7.5 * a, 7.5 * b).unwrap();
            assert_relative_eq!(f1, f3, max_relative = 1e-14);
        }
    }

    #[test]
    fn identical_sequences_are_equivalent() {
        let x: Vec<f64> = (1..200).map(|k| 1.0 / k as f64).collect();
        let seqs = VarianceSequences::new(x.clone(), x).unwrap();
        let report = affinity(&seqs, &KakutaniThresholds::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Equivalent);
        assert_eq!(report.affinity, 1.0);
        assert_eq!(report.partial_ratio_sum, 0.0);
    }

    #[test]
    fn convergent_perturbation_is_equivalent() {
        let n = 1_000_000usize;
        let x1 = vec![1.0; n];
        let x2: Vec<f64> = (1..=n).map(|k| 1.0 + 1.0 / k as f64).collect();
        let seqs = VarianceSequences::new(x1, x2).unwrap();
        let report = affinity(&seqs, &KakutaniThresholds::default()).unwrap();
        // sum 1/k^2 -> pi^2/6
        assert_relative_eq!(
            report.partial_ratio_sum,
            std::f64::consts::PI * std::f64::consts::PI / 6.0,
            max_relative = 2e-5
        );
        assert_eq!(report.verdict, Verdict::Equivalent);
    }

    #[test]
    fn affinity_matches_direct_product_oracle() {
        // independent route: multiply the factors directly, renormalising
        // through the exponent to avoid underflow
        let n = 1_000_000usize;
        let x2: Vec<f64> = (1..=n).map(|k| 1.0 + 1.0 / k as f64).collect();
        let seqs = VarianceSequences::new(vec![1.0; n], x2.clone()).unwrap();
        let report = affinity(&seqs, &KakutaniThresholds::default()).unwrap();

        let mut mantissa = 1.0f64;
        let mut exponent = 0i64;
        for &x in &x2 {
            mantissa *= (2.0 * x / (1.0 + x * x)).sqrt();
            let (m, e) = frexp(mantissa);
            mantissa = m;
            exponent += e;
        }
        let oracle = mantissa.ln() + exponent as f64 * std::f64::consts::LN_2;
        assert!(
            (report.log_affinity - oracle).abs() < 1e-6,
            "log affinity {} vs oracle {oracle}",
            report.log_affinity
        );
    }

    fn frexp(x: f64) -> (f64, i64) {
        if x == 0.0 {
            return (0.0, 0);
        }
        let e = x.abs().log2().floor() as i64 + 1;
        (x / (2.0f64).powi(e as i32), e)
    }

    #[test]
    fn harmonic_divergence_grows_like_quarter_log() {
        // x2 = 1 + 1/sqrt(k): -log factors ~ 1/(4k), so the log affinity
        // drops by about (1/4) log 10 per decade
        let at = |n: usize| {
            let x2: Vec<f64> = (1..=n).map(|k| 1.0 + 1.0 / (k as f64).sqrt()).collect();
            let seqs = VarianceSequences::new(vec![1.0; n], x2).unwrap();
            affinity(&seqs, &KakutaniThresholds::default()).unwrap()
        };
        let r5 = at(100_000);
        let r6 = at(1_000_000);
        let drop = r5.log_affinity - r6.log_affinity;
        assert_relative_eq!(drop, 0.25 * 10.0f64.ln(), max_relative = 0.02);
        assert_ne!(r6.verdict, Verdict::Equivalent);
    }

    #[test]
    fn strong_divergence_crosses_the_singular_threshold() {
        // eps_k = 4/sqrt(k) drives the log affinity below log(1e-6) within
        // a modest number of slots
        let n = 1_000_000usize;
        let x2: Vec<f64> = (1..=n).map(|k| 1.0 + 4.0 / (k as f64).sqrt()).collect();
        let seqs = VarianceSequences::new(vec![1.0; n], x2).unwrap();
        let report = affinity(&seqs, &KakutaniThresholds::default()).unwrap();
        assert!(report.log_affinity < 1e-6f64.ln());
        assert_eq!(report.verdict, Verdict::MutuallySingular);
    }

    #[test]
    fn affinity_below_any_subproduct() {
        let x1 = vec![1.0, 2.0, 0.5, 1.5];
        let x2 = vec![1.1, 1.9, 0.7, 1.2];
        let seqs = VarianceSequences::new(x1.clone(), x2.clone()).unwrap();
        let report = affinity(&seqs, &KakutaniThresholds::default()).unwrap();
        for k in 0..x1.len() {
            let f = hellinger_factor(x1[k], x2[k]).unwrap();
            assert!(report.affinity <= f + 1e-15);
        }
    }

    #[test]
    fn classify_identical_spectra() {
        let mut sp = SpectrumPair::zero(0.5, 3);
        sp.set_zero_mode(Component::Position, 1.0);
        for k in 0..sp.coef().len() {
            sp.coef_mut()[k].b = [0.5, 0.25];
            sp.coef_mut()[k].c = [0.5, 0.25];
        }
        let report = classify(&sp, &sp, &KakutaniThresholds::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Equivalent);
        assert_eq!(report.affinity, 1.0);
    }

    #[test]
    fn classify_zeroed_coefficient_is_singular() {
        let mut sp = SpectrumPair::zero(0.5, 2);
        sp.set_zero_mode(Component::Position, 1.0);
        for k in 0..sp.coef().len() {
            sp.coef_mut()[k].b = [0.5, 0.25];
            sp.coef_mut()[k].c = [0.5, 0.25];
        }
        let mut other = sp.clone();
        other.coef_mut()[3].b[0] = 0.0;
        let report = classify(&sp, &other, &KakutaniThresholds::default()).unwrap();
        assert!(report.zero_mismatch);
        assert_eq!(report.verdict, Verdict::MutuallySingular);
        assert_eq!(report.affinity, 0.0);
    }

    #[test]
    fn classify_doubled_spectrum() {
        let mut sp = SpectrumPair::zero(0.5, 4);
        sp.set_zero_mode(Component::Position, 1.0);
        sp.set_zero_mode(Component::Velocity, 1.0);
        for k in 0..sp.coef().len() {
            sp.coef_mut()[k].b = [0.5, 0.25];
            sp.coef_mut()[k].c = [0.5, 0.25];
        }
        let doubled = sp.scale(2.0);
        let report = classify(&sp, &doubled, &KakutaniThresholds::default()).unwrap();
        // every slot contributes (sqrt(4/5)) to the product and 1 to the
        // ratio sum
        let slots = 2 + 4 * sp.coef().len();
        assert_relative_eq!(report.partial_ratio_sum, slots as f64, max_relative = 1e-12);
        assert_relative_eq!(
            report.log_affinity,
            slots as f64 * 0.5 * (4.0f64 / 5.0).ln(),
            max_relative = 1e-12
        );
        // ratio-2 on every slot over hundreds of slots is far below the
        // singularity cutoff
        assert_eq!(report.verdict, Verdict::MutuallySingular);
    }

    #[test]
    fn classify_requires_matching_truncation() {
        let a = SpectrumPair::zero(0.5, 2);
        let b = SpectrumPair::zero(0.5, 3);
        assert!(classify(&a, &b, &KakutaniThresholds::default()).is_err());
    }

    #[test]
    fn two_slot_monte_carlo_cross_check() {
        // estimate the Hellinger affinity of two 2-slot Gaussian products by
        // sampling: E_{x ~ mu2} sqrt(p1(x)/p2(x)) = integral sqrt(p1 p2)
        use rand::Rng;
        let (s11, s12) = (1.0f64, 0.8f64);
        let (s21, s22) = (1.3f64, 0.5f64);
        let seqs = VarianceSequences::new(vec![s11, s12], vec![s21, s22]).unwrap();
        let closed = affinity(&seqs, &KakutaniThresholds::default())
            .unwrap()
            .affinity;

        let mut rng = crate::random::SeedSpec::new(2024, 0).rng();
        let n = 400_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let z1: f64 = rng.sample(rand_distr::StandardNormal);
            let z2: f64 = rng.sample(rand_distr::StandardNormal);
            let (x1, x2) = (z1 * s21, z2 * s22);
            let log_p1 = -0.5 * (x1 * x1 / (s11 * s11) + x2 * x2 / (s12 * s12))
                - (s11 * s12).ln();
            let log_p2 = -0.5 * (x1 * x1 / (s21 * s21) + x2 * x2 / (s22 * s22))
                - (s21 * s22).ln();
            sum += (0.5 * (log_p1 - log_p2)).exp();
        }
        let estimate = sum / n as f64;
        assert!(
            (estimate - closed).abs() < 0.01,
            "mc {estimate} vs closed {closed}"
        );
    }
}
