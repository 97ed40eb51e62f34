//! Truncated real-Fourier representation of an initial-data pair.
//!
//! A `SpectrumPair` holds the pair (u0, u1) through its zero modes a_j and
//! per-frequency cosine/sine coefficients b_{n,j}, c_{n,j}, j = 0 for the
//! position slot and j = 1 for the velocity slot. All norms use the Haar
//! measure normalised to total mass one, so the L^2 norm of cos(n.x) is
//! sqrt(1/2) and norms are grid averages.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use super::lattice::{LatticeIndex, ModeSet};
use crate::error::{Error, Result};
use crate::numeric::fmt_g17;

/// Which slot of the pair a scalar operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Position,
    Velocity,
}

impl Component {
    pub fn index(self) -> usize {
        match self {
            Component::Position => 0,
            Component::Velocity => 1,
        }
    }
}

/// Norm selector: one slot, or the pair norm of H^sigma x H^(sigma-1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormComponent {
    Position,
    Velocity,
    Pair,
}

/// Coefficients of one lattice mode: `b[j]`, `c[j]` for j in {0, 1}.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModeCoef {
    pub b: [f64; 2],
    pub c: [f64; 2],
}

/// Truncated spectrum of a data pair (u0, u1).
#[derive(Debug, Clone)]
pub struct SpectrumPair {
    s: f64,
    modes: Arc<ModeSet>,
    a: [f64; 2],
    coef: Vec<ModeCoef>,
}

impl SpectrumPair {
    /// The zero spectrum at Sobolev index `s`, truncated at `n_max`.
    pub fn zero(s: f64, n_max: u32) -> Self {
        let modes = ModeSet::ball(n_max);
        let coef = vec![ModeCoef::default(); modes.len()];
        SpectrumPair {
            s,
            modes,
            a: [0.0; 2],
            coef,
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn n_max(&self) -> u32 {
        self.modes.n_max()
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    pub fn zero_mode(&self, comp: Component) -> f64 {
        self.a[comp.index()]
    }

    pub fn set_zero_mode(&mut self, comp: Component, value: f64) {
        self.a[comp.index()] = value;
    }

    pub fn coef(&self) -> &[ModeCoef] {
        &self.coef
    }

    pub fn coef_mut(&mut self) -> &mut [ModeCoef] {
        &mut self.coef
    }

    pub fn zero_modes(&self) -> [f64; 2] {
        self.a
    }

    /// Set the coefficient of a single canonical mode.
    pub fn set_mode(&mut self, n: [i32; 3], comp: Component, b: f64, c: f64) -> Result<()> {
        let idx = LatticeIndex(n);
        if !idx.is_canonical() {
            return Err(Error::InvalidInput(format!(
                "mode {n:?} is not a canonical half-lattice representative"
            )));
        }
        let pos = self.modes.position(&idx).ok_or_else(|| {
            Error::InvalidInput(format!("mode {n:?} outside the ball |n| <= {}", self.n_max()))
        })?;
        let j = comp.index();
        self.coef[pos].b[j] = b;
        self.coef[pos].c[j] = c;
        Ok(())
    }

    /// Fails on any non-finite coefficient.
    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::InvalidInput("non-finite Sobolev index".into()));
        }
        if !self.a.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("non-finite zero mode".into()));
        }
        for (k, m) in self.coef.iter().enumerate() {
            if !(m.b[0].is_finite() && m.b[1].is_finite() && m.c[0].is_finite() && m.c[1].is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "non-finite coefficient at mode {:?}",
                    self.modes.modes()[k]
                )));
            }
        }
        Ok(())
    }

    pub fn same_index_set(&self, other: &SpectrumPair) -> bool {
        Arc::ptr_eq(&self.modes, &other.modes) || self.modes.n_max() == other.modes.n_max()
    }

    /// Sobolev norm of one slot or of the pair. The position slot of the
    /// pair carries weight <n>^sigma, the velocity slot <n>^(sigma-1); zero
    /// modes always carry weight one.
    pub fn sobolev_norm(&self, sigma: f64, which: NormComponent) -> Result<f64> {
        self.validate()?;
        if !sigma.is_finite() {
            return Err(Error::InvalidInput("non-finite Sobolev exponent".into()));
        }
        let sq = match which {
            NormComponent::Position => self.slot_norm_sq(sigma, 0),
            NormComponent::Velocity => self.slot_norm_sq(sigma - 1.0, 1),
            NormComponent::Pair => self.slot_norm_sq(sigma, 0) + self.slot_norm_sq(sigma - 1.0, 1),
        };
        Ok(sq.sqrt())
    }

    fn slot_norm_sq(&self, weight_exp: f64, j: usize) -> f64 {
        let mut sum = self.a[j] * self.a[j];
        for (m, coef) in self.modes.iter().zip(&self.coef) {
            let w = m.bracket_sq().powf(weight_exp);
            sum += 0.5 * w * (coef.b[j] * coef.b[j] + coef.c[j] * coef.c[j]);
        }
        sum
    }

    /// Low-frequency projector: keeps the zero mode and |n| <= n.
    pub fn project_low(&self, n: u32) -> SpectrumPair {
        let cutoff = (n as i64) * (n as i64);
        let mut out = self.clone();
        for (m, coef) in out.modes.modes().iter().zip(out.coef.iter_mut()) {
            if m.norm_sq() > cutoff {
                *coef = ModeCoef::default();
            }
        }
        out
    }

    /// High-frequency projector: identity minus `project_low`, so the zero
    /// mode is always dropped.
    pub fn project_high(&self, n: u32) -> SpectrumPair {
        let cutoff = (n as i64) * (n as i64);
        let mut out = self.clone();
        out.a = [0.0; 2];
        for (m, coef) in out.modes.modes().iter().zip(out.coef.iter_mut()) {
            if m.norm_sq() <= cutoff {
                *coef = ModeCoef::default();
            }
        }
        out
    }

    /// Keeps only the zero modes a_j.
    pub fn project_zero(&self) -> SpectrumPair {
        self.project_low(0)
    }

    /// Exact free wave propagator: returns (S(t)V, d/dt S(t)V).
    ///
    /// Per mode the position coefficient maps by b0 cos(t w) + b1 sin(t w)/w
    /// with w = |n|, the velocity by -b0 w sin(t w) + b1 cos(t w); the zero
    /// mode moves affinely (a0 + a1 t, a1).
    pub fn free_evolve(&self, t: f64) -> SpectrumPair {
        let mut out = self.clone();
        out.a[0] = self.a[0] + self.a[1] * t;
        for (m, coef) in self.modes.iter().zip(out.coef.iter_mut()) {
            let omega = m.norm();
            let (sin, cos) = (t * omega).sin_cos();
            let src = *coef;
            coef.b[0] = src.b[0] * cos + src.b[1] * sin / omega;
            coef.b[1] = -src.b[0] * omega * sin + src.b[1] * cos;
            coef.c[0] = src.c[0] * cos + src.c[1] * sin / omega;
            coef.c[1] = -src.c[0] * omega * sin + src.c[1] * cos;
        }
        out
    }

    /// Coefficient-wise sum; both spectra must share the index set.
    pub fn add(&self, other: &SpectrumPair) -> Result<SpectrumPair> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Coefficient-wise difference.
    pub fn sub(&self, other: &SpectrumPair) -> Result<SpectrumPair> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &SpectrumPair, op: impl Fn(f64, f64) -> f64) -> Result<SpectrumPair> {
        if !self.same_index_set(other) {
            return Err(Error::IndexSetMismatch(format!(
                "n_max {} vs {}",
                self.n_max(),
                other.n_max()
            )));
        }
        let mut out = self.clone();
        for j in 0..2 {
            out.a[j] = op(self.a[j], other.a[j]);
        }
        for (dst, (x, y)) in out.coef.iter_mut().zip(self.coef.iter().zip(&other.coef)) {
            for j in 0..2 {
                dst.b[j] = op(x.b[j], y.b[j]);
                dst.c[j] = op(x.c[j], y.c[j]);
            }
        }
        Ok(out)
    }

    /// Multiply every coefficient by `k`.
    pub fn scale(&self, k: f64) -> SpectrumPair {
        let mut out = self.clone();
        out.a[0] *= k;
        out.a[1] *= k;
        for coef in &mut out.coef {
            for j in 0..2 {
                coef.b[j] *= k;
                coef.c[j] *= k;
            }
        }
        out
    }

    pub fn with_s(mut self, s: f64) -> SpectrumPair {
        self.s = s;
        self
    }

    /// JSON encoding with every coefficient printed at 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = String::with_capacity(64 + 96 * self.coef.len());
        out.push_str("{\n");
        let _ = write!(out, "  \"s\": {},\n", fmt_g17(self.s));
        let _ = write!(out, "  \"n_max\": {},\n", self.n_max());
        let _ = write!(out, "  \"a0\": {},\n", fmt_g17(self.a[0]));
        let _ = write!(out, "  \"a1\": {},\n", fmt_g17(self.a[1]));
        out.push_str("  \"modes\": [\n");
        for (k, (m, coef)) in self.modes.iter().zip(&self.coef).enumerate() {
            let [x, y, z] = m.0;
            let _ = write!(
                out,
                "    {{\"n\": [{}, {}, {}], \"b0\": {}, \"c0\": {}, \"b1\": {}, \"c1\": {}}}{}",
                x,
                y,
                z,
                fmt_g17(coef.b[0]),
                fmt_g17(coef.c[0]),
                fmt_g17(coef.b[1]),
                fmt_g17(coef.c[1]),
                if k + 1 == self.coef.len() { "\n" } else { ",\n" }
            );
        }
        out.push_str("  ]\n}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<SpectrumPair> {
        let file: SpectrumFile = serde_json::from_str(text)?;
        let mut out = SpectrumPair::zero(file.s, file.n_max);
        out.a = [file.a0, file.a1];
        for entry in file.modes {
            let idx = LatticeIndex(entry.n);
            if !idx.is_canonical() {
                return Err(Error::InvalidInput(format!(
                    "mode {:?} is not canonical",
                    entry.n
                )));
            }
            let pos = out.modes.position(&idx).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "mode {:?} outside the ball |n| <= {}",
                    entry.n, file.n_max
                ))
            })?;
            out.coef[pos] = ModeCoef {
                b: [entry.b0, entry.b1],
                c: [entry.c0, entry.c1],
            };
        }
        out.validate()?;
        Ok(out)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<SpectrumPair> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

#[derive(Deserialize)]
struct SpectrumFile {
    s: f64,
    n_max: u32,
    a0: f64,
    a1: f64,
    modes: Vec<ModeEntry>,
}

#[derive(Deserialize)]
struct ModeEntry {
    n: [i32; 3],
    #[serde(default)]
    b0: f64,
    #[serde(default)]
    c0: f64,
    #[serde(default)]
    b1: f64,
    #[serde(default)]
    c1: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single_cos_x1(s: f64, n_max: u32) -> SpectrumPair {
        let mut sp = SpectrumPair::zero(s, n_max);
        sp.set_mode([1, 0, 0], Component::Position, 1.0, 0.0).unwrap();
        sp
    }

    #[test]
    fn sobolev_norm_of_cos_x1() {
        let sp = single_cos_x1(0.0, 4);
        let n = sp.sobolev_norm(0.0, NormComponent::Position).unwrap();
        assert_relative_eq!(n, (0.5f64).sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn sobolev_norm_zero_spectrum() {
        let sp = SpectrumPair::zero(0.5, 4);
        assert_eq!(sp.sobolev_norm(0.7, NormComponent::Pair).unwrap(), 0.0);
    }

    #[test]
    fn sobolev_norm_half_exponent() {
        let sp = single_cos_x1(0.5, 4);
        let n = sp.sobolev_norm(0.5, NormComponent::Position).unwrap();
        // <(1,0,0)>^2 = 2, so the squared norm is 0.5 * 2^(1/2).
        assert_relative_eq!(n, (0.5 * 2.0f64.sqrt()).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(n, 0.84089641525371461, max_relative = 1e-12);
    }

    #[test]
    fn non_finite_rejected() {
        let mut sp = SpectrumPair::zero(0.0, 2);
        sp.set_zero_mode(Component::Position, f64::NAN);
        assert!(sp.sobolev_norm(0.0, NormComponent::Pair).is_err());
    }

    #[test]
    fn projector_full_range_is_identity() {
        let mut sp = SpectrumPair::zero(0.0, 3);
        sp.set_mode([1, 0, 0], Component::Position, 0.3, -0.4).unwrap();
        sp.set_mode([0, 3, 0], Component::Velocity, 1.5, 0.25).unwrap();
        sp.set_zero_mode(Component::Position, 2.0);
        let low = sp.project_low(3);
        assert_eq!(low.coef(), sp.coef());
        assert_eq!(low.zero_modes(), sp.zero_modes());
    }

    #[test]
    fn projector_zero_cutoff_keeps_only_constants() {
        let mut sp = SpectrumPair::zero(0.0, 3);
        sp.set_mode([1, 0, 0], Component::Position, 0.3, -0.4).unwrap();
        sp.set_zero_mode(Component::Position, 2.0);
        sp.set_zero_mode(Component::Velocity, -1.0);
        let z = sp.project_low(0);
        assert_eq!(z.zero_modes(), [2.0, -1.0]);
        assert!(z.coef().iter().all(|c| *c == ModeCoef::default()));
        // project_low(0) and project_zero agree by definition
        let z2 = sp.project_zero();
        assert_eq!(z.zero_modes(), z2.zero_modes());
        assert_eq!(z.coef(), z2.coef());
    }

    #[test]
    fn high_projector_keeps_only_high_modes() {
        let mut sp = SpectrumPair::zero(0.0, 3);
        sp.set_mode([1, 0, 0], Component::Position, 1.0, 0.0).unwrap();
        sp.set_mode([3, 0, 0], Component::Position, 2.0, 0.0).unwrap();
        sp.set_zero_mode(Component::Position, 5.0);
        let high = sp.project_high(2);
        assert_eq!(high.zero_modes(), [0.0, 0.0]);
        let pos3 = high.modes().position(&LatticeIndex([3, 0, 0])).unwrap();
        let pos1 = high.modes().position(&LatticeIndex([1, 0, 0])).unwrap();
        assert_eq!(high.coef()[pos3].b[0], 2.0);
        assert_eq!(high.coef()[pos1].b[0], 0.0);
    }

    #[test]
    fn free_evolve_identity_at_zero() {
        let mut sp = SpectrumPair::zero(0.0, 2);
        sp.set_mode([1, 1, 0], Component::Position, 0.7, 0.2).unwrap();
        sp.set_zero_mode(Component::Velocity, 3.0);
        let out = sp.free_evolve(0.0);
        assert_eq!(out.coef(), sp.coef());
        assert_eq!(out.zero_modes(), sp.zero_modes());
    }

    #[test]
    fn free_evolve_half_period_of_unit_mode() {
        let mut sp = SpectrumPair::zero(0.0, 2);
        sp.set_mode([1, 0, 0], Component::Position, 1.0, 0.0).unwrap();
        let out = sp.free_evolve(std::f64::consts::PI);
        let pos = out.modes().position(&LatticeIndex([1, 0, 0])).unwrap();
        assert_relative_eq!(out.coef()[pos].b[0], -1.0, max_relative = 1e-14);
        assert!(out.coef()[pos].b[1].abs() < 1e-13);
    }

    #[test]
    fn free_evolve_zero_mode_is_affine() {
        let mut sp = SpectrumPair::zero(0.0, 1);
        sp.set_zero_mode(Component::Position, 2.0);
        sp.set_zero_mode(Component::Velocity, 3.0);
        let out = sp.free_evolve(1.5);
        assert_eq!(out.zero_modes(), [6.5, 3.0]);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut sp = SpectrumPair::zero(0.5, 3);
        sp.set_mode([1, 0, 0], Component::Position, 0.1234567890123456, -7.0e-3)
            .unwrap();
        sp.set_mode([0, 2, 1], Component::Velocity, 1.0 / 3.0, 2.0f64.sqrt())
            .unwrap();
        sp.set_zero_mode(Component::Position, 0.1 + 0.2);
        let back = SpectrumPair::from_json(&sp.to_json()).unwrap();
        assert_eq!(back.zero_modes(), sp.zero_modes());
        assert_eq!(back.coef(), sp.coef());
        assert_eq!(back.s(), sp.s());
    }
}
