//! Coefficient laws: the distribution of the i.i.d. multipliers applied to
//! every stored Fourier coefficient.
//!
//! All laws are mean zero with unit variance and satisfy the sub-gaussian
//! moment bound E[e^{gamma X}] <= e^{c gamma^2}; the constant c is checked at
//! construction against the closed-form moment generating functions.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    /// Standard normal; the mgf bound holds with equality at c = 1/2.
    Gaussian,
    /// Signs +-1 with equal probability; cosh(g) <= e^{g^2/2}.
    Bernoulli,
    /// Uniform on [-sqrt(3), sqrt(3)], endpoints chosen for unit variance.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientLaw {
    kind: LawKind,
    subgaussian_c: f64,
}

/// Result of evaluating E[e^{gamma X}] / e^{c gamma^2} over a grid.
#[derive(Debug, Clone)]
pub struct MgfReport {
    pub max_ratio: f64,
    pub worst_gamma: f64,
    pub violations: usize,
}

impl CoefficientLaw {
    pub fn new(kind: LawKind) -> Result<Self> {
        let law = CoefficientLaw {
            kind,
            subgaussian_c: 0.5,
        };
        let gammas: Vec<f64> = (-60..=60).map(|k| k as f64 * 0.25).collect();
        let report = law.mgf_check(&gammas);
        if report.violations > 0 {
            return Err(Error::InvalidInput(format!(
                "law {kind:?} violates the sub-gaussian bound at gamma = {} (ratio {})",
                report.worst_gamma, report.max_ratio
            )));
        }
        Ok(law)
    }

    pub fn gaussian() -> Self {
        Self::new(LawKind::Gaussian).expect("gaussian law satisfies its own bound")
    }

    pub fn bernoulli() -> Self {
        Self::new(LawKind::Bernoulli).expect("bernoulli law satisfies the bound")
    }

    pub fn uniform() -> Self {
        Self::new(LawKind::Uniform).expect("uniform law satisfies the bound")
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Self::gaussian()),
            "bernoulli" | "sign" => Ok(Self::bernoulli()),
            "uniform" => Ok(Self::uniform()),
            other => Err(Error::Config(format!("unknown coefficient law '{other}'"))),
        }
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            LawKind::Gaussian => "gaussian",
            LawKind::Bernoulli => "bernoulli",
            LawKind::Uniform => "uniform",
        }
    }

    pub fn subgaussian_c(&self) -> f64 {
        self.subgaussian_c
    }

    /// All supported laws are symmetric about zero.
    pub fn is_symmetric(&self) -> bool {
        true
    }

    /// Closed-form moment generating function E[e^{gamma X}].
    pub fn mgf(&self, gamma: f64) -> f64 {
        match self.kind {
            LawKind::Gaussian => (0.5 * gamma * gamma).exp(),
            LawKind::Bernoulli => gamma.cosh(),
            LawKind::Uniform => {
                let u = SQRT_3 * gamma;
                if u.abs() < 1e-4 {
                    // sinh(u)/u, series to avoid cancellation near zero
                    1.0 + u * u / 6.0 + u.powi(4) / 120.0
                } else {
                    u.sinh() / u
                }
            }
        }
    }

    pub fn mgf_check(&self, gammas: &[f64]) -> MgfReport {
        let mut max_ratio = f64::NEG_INFINITY;
        let mut worst_gamma = 0.0;
        let mut violations = 0usize;
        for &g in gammas {
            let bound = (self.subgaussian_c * g * g).exp();
            let ratio = self.mgf(g) / bound;
            if ratio > max_ratio {
                max_ratio = ratio;
                worst_gamma = g;
            }
            if ratio > 1.0 + 1e-12 {
                violations += 1;
            }
        }
        MgfReport {
            max_ratio,
            worst_gamma,
            violations,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            LawKind::Gaussian => StandardNormal.sample(rng),
            LawKind::Bernoulli => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            LawKind::Uniform => (2.0 * rng.random::<f64>() - 1.0) * SQRT_3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::SeedSpec;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_mgf_ratio_is_one() {
        let law = CoefficientLaw::gaussian();
        let report = law.mgf_check(&[-3.0, -1.0, 0.0, 0.5, 2.0, 7.5]);
        assert_relative_eq!(report.max_ratio, 1.0, max_relative = 1e-12);
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn bernoulli_mgf_at_two() {
        let law = CoefficientLaw::bernoulli();
        let ratio = law.mgf(2.0) / (0.5f64 * 4.0).exp();
        assert_relative_eq!(ratio, 2.0f64.cosh() / 2.0f64.exp(), max_relative = 1e-14);
        assert!((ratio - 0.5092).abs() < 1e-4);
        assert!(ratio <= 1.0);
    }

    #[test]
    fn mgf_ratio_is_one_at_gamma_zero() {
        for law in [
            CoefficientLaw::gaussian(),
            CoefficientLaw::bernoulli(),
            CoefficientLaw::uniform(),
        ] {
            assert_relative_eq!(law.mgf(0.0), 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn all_laws_pass_construction_check() {
        for kind in [LawKind::Gaussian, LawKind::Bernoulli, LawKind::Uniform] {
            assert!(CoefficientLaw::new(kind).is_ok());
        }
    }

    #[test]
    fn samples_have_unit_variance() {
        for law in [
            CoefficientLaw::gaussian(),
            CoefficientLaw::bernoulli(),
            CoefficientLaw::uniform(),
        ] {
            let mut rng = SeedSpec::new(42, 0).rng();
            let n = 200_000;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..n {
                let x = law.sample(&mut rng);
                sum += x;
                sum_sq += x * x;
            }
            let mean = sum / n as f64;
            let var = sum_sq / n as f64 - mean * mean;
            assert!(mean.abs() < 0.01, "{}: mean {mean}", law.name());
            assert!((var - 1.0).abs() < 0.02, "{}: var {var}", law.name());
        }
    }

    #[test]
    fn uniform_mgf_series_matches_direct() {
        let law = CoefficientLaw::uniform();
        // across the series/direct switch at |sqrt(3) gamma| = 1e-4
        let left = law.mgf(5.0e-5);
        let right = law.mgf(6.0e-5);
        assert!(left < right);
        assert!((law.mgf(1e-8) - 1.0).abs() < 1e-15);
    }
}
