//! The randomization map and the sign-flip symmetrisation device.

use std::sync::Arc;

use rand::Rng;

use super::law::CoefficientLaw;
use super::seed::SeedSpec;
use crate::error::{Error, Result};
use crate::spectral::{ModeSet, SpectrumPair};

/// Multiply every stored coefficient of `base` by an independent draw from
/// `law`. Deterministic in `seed`; the draw order is fixed as a0, a1, then
/// (b0, c0, b1, c1) per canonical mode.
pub fn randomize(base: &SpectrumPair, law: &CoefficientLaw, seed: SeedSpec) -> Result<SpectrumPair> {
    base.validate()?;
    let mut rng = seed.rng();
    let mut out = base.clone();
    let a0 = out.zero_modes()[0] * law.sample(&mut rng);
    let a1 = out.zero_modes()[1] * law.sample(&mut rng);
    out.set_zero_mode(crate::spectral::Component::Position, a0);
    out.set_zero_mode(crate::spectral::Component::Velocity, a1);
    for coef in out.coef_mut() {
        coef.b[0] *= law.sample(&mut rng);
        coef.c[0] *= law.sample(&mut rng);
        coef.b[1] *= law.sample(&mut rng);
        coef.c[1] *= law.sample(&mut rng);
    }
    Ok(out)
}

/// Signs in {-1, +1} for every coefficient slot of a spectrum.
#[derive(Debug, Clone)]
pub struct SignPattern {
    modes: Arc<ModeSet>,
    a: [i8; 2],
    /// per mode: signs for (b0, c0, b1, c1)
    signs: Vec<[i8; 4]>,
}

impl SignPattern {
    pub fn all_plus(template: &SpectrumPair) -> Self {
        SignPattern {
            modes: template.modes().clone(),
            a: [1, 1],
            signs: vec![[1, 1, 1, 1]; template.coef().len()],
        }
    }

    pub fn zero_mode_signs(&self) -> [i8; 2] {
        self.a
    }

    pub fn signs(&self) -> &[[i8; 4]] {
        &self.signs
    }
}

/// Independent Bernoulli signs for every slot of `template`'s index set.
pub fn flip_sample(template: &SpectrumPair, seed: SeedSpec) -> SignPattern {
    let mut rng = seed.rng();
    let draw = |rng: &mut rand_chacha::ChaCha12Rng| if rng.random::<bool>() { 1i8 } else { -1i8 };
    let a = [draw(&mut rng), draw(&mut rng)];
    let signs = (0..template.coef().len())
        .map(|_| {
            [
                draw(&mut rng),
                draw(&mut rng),
                draw(&mut rng),
                draw(&mut rng),
            ]
        })
        .collect();
    SignPattern {
        modes: template.modes().clone(),
        a,
        signs,
    }
}

/// Multiply each coefficient of `sp` by its sign. Involutive: applying the
/// same pattern twice returns the input exactly.
pub fn odot(pattern: &SignPattern, sp: &SpectrumPair) -> Result<SpectrumPair> {
    if pattern.modes.n_max() != sp.n_max() || pattern.signs.len() != sp.coef().len() {
        return Err(Error::IndexSetMismatch(format!(
            "pattern over {} modes (n_max {}) applied to spectrum with {} modes (n_max {})",
            pattern.signs.len(),
            pattern.modes.n_max(),
            sp.coef().len(),
            sp.n_max()
        )));
    }
    let mut out = sp.clone();
    let a = out.zero_modes();
    out.set_zero_mode(
        crate::spectral::Component::Position,
        a[0] * pattern.a[0] as f64,
    );
    out.set_zero_mode(
        crate::spectral::Component::Velocity,
        a[1] * pattern.a[1] as f64,
    );
    for (coef, sign) in out.coef_mut().iter_mut().zip(&pattern.signs) {
        coef.b[0] *= sign[0] as f64;
        coef.c[0] *= sign[1] as f64;
        coef.b[1] *= sign[2] as f64;
        coef.c[1] *= sign[3] as f64;
    }
    Ok(out)
}
