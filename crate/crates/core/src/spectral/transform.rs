//! Trigonometric synthesis and analysis on the 3-torus via complex FFTs.
//!
//! Synthesis evaluates u(x) = a + sum_n (b_n cos(n.x) + c_n sin(n.x)) on the
//! uniform grid by scattering the real coefficients onto the complex cube
//! (F[+n] = (b - ic)/2, F[-n] = conj) and running an unnormalised inverse
//! transform. Analysis is the forward transform scaled by 1/N^3; the two are
//! mutual inverses to roundoff for band-limited fields.
//!
//! The spectral cube is mostly empty (modes live in a ball, the grid is a
//! dealiased cube), so the first passes of each 3D transform only visit
//! columns that can carry data.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::grid::GridField;
use super::lattice::ModeSet;
use super::spectrum::{Component, SpectrumPair};
use crate::error::{Error, Result};

/// Grid sizes with fast mixed-radix plans, in increasing order.
const GOOD_SIZES: &[usize] = &[
    4, 6, 8, 9, 12, 16, 18, 24, 27, 32, 36, 48, 54, 64, 72, 96, 108, 128, 144, 162, 192, 216,
    256, 288, 324, 384, 432, 512,
];

/// Smallest fast grid size >= `min`.
pub fn good_grid_size(min: usize) -> usize {
    for &g in GOOD_SIZES {
        if g >= min {
            return g;
        }
    }
    min.next_power_of_two()
}

/// Minimal per-axis grid needed to represent modes up to `n_max` with
/// anti-aliasing headroom.
pub fn min_grid(n_max: u32) -> usize {
    2 * n_max as usize + 2
}

/// Grid on which norms of band-limited fields are evaluated.
pub fn norm_grid(n_max: u32) -> usize {
    good_grid_size(min_grid(n_max))
}

/// Grid on which a cubic product of band-`n_max` fields can be projected
/// back onto the ball without aliasing: pollution of a kept mode k needs
/// |k + N e| <= 3 n_max for a nonzero integer shift e, which is impossible
/// once N > 4 n_max.
pub fn dealias_grid(n_max: u32) -> usize {
    good_grid_size((4 * n_max as usize + 1).max(min_grid(n_max)))
}

/// One analysed component: zero mode plus (b, c) per canonical lattice mode.
#[derive(Debug, Clone)]
pub struct ComponentSpectrum {
    pub modes: Arc<ModeSet>,
    pub a: f64,
    pub bc: Vec<[f64; 2]>,
}

/// FFT workspace pinned to one grid size. Not shareable across threads;
/// each worker owns its engine.
pub struct SpectralEngine {
    n_grid: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    cube: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    col: Vec<Complex<f64>>,
    gather: Vec<[f64; 2]>,
}

impl SpectralEngine {
    pub fn new(n_grid: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n_grid);
        let inv = planner.plan_fft_inverse(n_grid);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        SpectralEngine {
            n_grid,
            fwd,
            inv,
            cube: vec![Complex::default(); n_grid * n_grid * n_grid],
            scratch: vec![Complex::default(); scratch_len],
            col: vec![Complex::default(); n_grid],
            gather: Vec::new(),
        }
    }

    /// Engine sized for norm evaluation at truncation `n_max`.
    pub fn for_norms(n_max: u32) -> Self {
        Self::new(norm_grid(n_max))
    }

    /// Engine sized for cubic nonlinearities at truncation `n_max`.
    pub fn for_cubic(n_max: u32) -> Self {
        Self::new(dealias_grid(n_max))
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    fn check_bandwidth(&self, n_max: u32) -> Result<()> {
        if self.n_grid < min_grid(n_max) {
            return Err(Error::GridTooSmall {
                n_grid: self.n_grid,
                n_max,
                needed: min_grid(n_max),
            });
        }
        Ok(())
    }

    #[inline]
    fn flat(&self, n: [i32; 3]) -> usize {
        let ng = self.n_grid as i32;
        let w = |v: i32| (v.rem_euclid(ng)) as usize;
        w(n[0]) + self.n_grid * (w(n[1]) + self.n_grid * w(n[2]))
    }

    /// Evaluate one component on the grid, writing samples into `out`.
    pub fn synthesize_into(
        &mut self,
        modes: &ModeSet,
        a: f64,
        bc: &[[f64; 2]],
        out: &mut Vec<f64>,
    ) -> Result<()> {
        self.check_bandwidth(modes.n_max())?;
        if bc.len() != modes.len() {
            return Err(Error::IndexSetMismatch(format!(
                "{} coefficients for {} modes",
                bc.len(),
                modes.len()
            )));
        }
        self.cube.iter_mut().for_each(|v| *v = Complex::default());
        self.cube[0] = Complex::new(a, 0.0);
        for (m, coef) in modes.iter().zip(bc) {
            let plus = Complex::new(0.5 * coef[0], -0.5 * coef[1]);
            let ip = self.flat(m.0);
            let im = self.flat(m.negated());
            self.cube[ip] = plus;
            self.cube[im] = plus.conj();
        }
        self.fft3(false, modes.n_max() as usize);
        out.clear();
        out.extend(self.cube.iter().map(|v| v.re));
        Ok(())
    }

    /// Evaluate an explicit list of modes on the grid. The list may be far
    /// sparser than the ball; only the given entries are scattered.
    pub fn synthesize_sparse_into(
        &mut self,
        n_max: u32,
        a: f64,
        modes: &[([i32; 3], f64, f64)],
        out: &mut Vec<f64>,
    ) -> Result<()> {
        self.check_bandwidth(n_max)?;
        self.cube.iter_mut().for_each(|v| *v = Complex::default());
        self.cube[0] = Complex::new(a, 0.0);
        for &(n, b, c) in modes {
            let plus = Complex::new(0.5 * b, -0.5 * c);
            let ip = self.flat(n);
            let im = self.flat([-n[0], -n[1], -n[2]]);
            self.cube[ip] = plus;
            self.cube[im] = plus.conj();
        }
        self.fft3(false, n_max as usize);
        out.clear();
        out.extend(self.cube.iter().map(|v| v.re));
        Ok(())
    }

    pub fn synthesize(&mut self, sp: &SpectrumPair, comp: Component) -> Result<GridField> {
        sp.validate()?;
        let j = comp.index();
        let mut gather = std::mem::take(&mut self.gather);
        gather.clear();
        gather.extend(sp.coef().iter().map(|c| [c.b[j], c.c[j]]));
        let mut values = Vec::new();
        let result = self.synthesize_into(sp.modes(), sp.zero_modes()[j], &gather, &mut values);
        self.gather = gather;
        result?;
        GridField::new(self.n_grid, values)
    }

    /// Recover band-limited coefficients from grid samples.
    pub fn analyze_into(
        &mut self,
        values: &[f64],
        modes: &ModeSet,
        a: &mut f64,
        bc: &mut Vec<[f64; 2]>,
    ) -> Result<()> {
        self.check_bandwidth(modes.n_max())?;
        if values.len() != self.cube.len() {
            return Err(Error::InvalidInput(format!(
                "field has {} samples, engine grid holds {}",
                values.len(),
                self.cube.len()
            )));
        }
        for (dst, &v) in self.cube.iter_mut().zip(values) {
            *dst = Complex::new(v, 0.0);
        }
        self.fft3(true, modes.n_max() as usize);
        let scale = 1.0 / (self.cube.len() as f64);
        *a = self.cube[0].re * scale;
        bc.clear();
        for m in modes.iter() {
            let f = self.cube[self.flat(m.0)] * scale;
            bc.push([2.0 * f.re, -2.0 * f.im]);
        }
        Ok(())
    }

    pub fn analyze(&mut self, field: &GridField, n_max: u32) -> Result<ComponentSpectrum> {
        if field.n_grid() != self.n_grid {
            return Err(Error::InvalidInput(format!(
                "field grid {} does not match engine grid {}",
                field.n_grid(),
                self.n_grid
            )));
        }
        let modes = ModeSet::ball(n_max);
        let mut a = 0.0;
        let mut bc = Vec::with_capacity(modes.len());
        self.analyze_into(field.values(), &modes, &mut a, &mut bc)?;
        Ok(ComponentSpectrum { modes, a, bc })
    }

    /// In-place 3D transform over the cube. `band` bounds the per-axis
    /// frequency support that actually matters, which lets the sparse passes
    /// skip empty columns: on the inverse side the input cube is zero outside
    /// the band, on the forward side only in-band outputs are read.
    fn fft3(&mut self, forward: bool, band: usize) {
        let n = self.n_grid;
        let plan = if forward {
            self.fwd.clone()
        } else {
            self.inv.clone()
        };
        let full = band * 2 + 1 >= n;
        let in_band = |i: usize| full || i <= band || i + band >= n;

        if forward {
            // Dense input: transform z, then y on banded z-planes, then x on
            // banded (y, z) columns.
            self.pass_z(&plan, |_, _| true);
            self.pass_y(&plan, |_, iz| in_band(iz));
            self.pass_x(&plan, |iy, iz| in_band(iy) && in_band(iz));
        } else {
            // Sparse input: transform x on banded (y, z) columns first, then
            // y on banded z-planes, then z everywhere.
            self.pass_x(&plan, |iy, iz| in_band(iy) && in_band(iz));
            self.pass_y(&plan, |_, iz| in_band(iz));
            self.pass_z(&plan, |_, _| true);
        }
    }

    fn pass_x(&mut self, plan: &Arc<dyn Fft<f64>>, keep: impl Fn(usize, usize) -> bool) {
        let n = self.n_grid;
        for iz in 0..n {
            for iy in 0..n {
                if !keep(iy, iz) {
                    continue;
                }
                let off = n * (iy + n * iz);
                plan.process_with_scratch(&mut self.cube[off..off + n], &mut self.scratch);
            }
        }
    }

    fn pass_y(&mut self, plan: &Arc<dyn Fft<f64>>, keep: impl Fn(usize, usize) -> bool) {
        let n = self.n_grid;
        for iz in 0..n {
            for ix in 0..n {
                if !keep(ix, iz) {
                    continue;
                }
                for iy in 0..n {
                    self.col[iy] = self.cube[ix + n * (iy + n * iz)];
                }
                plan.process_with_scratch(&mut self.col, &mut self.scratch);
                for iy in 0..n {
                    self.cube[ix + n * (iy + n * iz)] = self.col[iy];
                }
            }
        }
    }

    fn pass_z(&mut self, plan: &Arc<dyn Fft<f64>>, keep: impl Fn(usize, usize) -> bool) {
        let n = self.n_grid;
        for iy in 0..n {
            for ix in 0..n {
                if !keep(ix, iy) {
                    continue;
                }
                for iz in 0..n {
                    self.col[iz] = self.cube[ix + n * (iy + n * iz)];
                }
                plan.process_with_scratch(&mut self.col, &mut self.scratch);
                for iz in 0..n {
                    self.cube[ix + n * (iy + n * iz)] = self.col[iz];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{randomize, CoefficientLaw, SeedSpec};
    use crate::spectral::spectrum::NormComponent;
    use approx::assert_relative_eq;

    #[test]
    fn grid_size_tables() {
        assert_eq!(norm_grid(8), 18);
        assert_eq!(dealias_grid(8), 36);
        assert_eq!(dealias_grid(2), 9);
        assert!(dealias_grid(16) >= 65);
    }

    #[test]
    fn zero_spectrum_synthesizes_to_zero() {
        let sp = SpectrumPair::zero(0.0, 4);
        let mut eng = SpectralEngine::for_norms(4);
        let f = eng.synthesize(&sp, Component::Position).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_mode_matches_cos_samples() {
        let mut sp = SpectrumPair::zero(0.0, 4);
        sp.set_mode([1, 0, 0], Component::Position, 1.0, 0.0).unwrap();
        let mut eng = SpectralEngine::new(16);
        let f = eng.synthesize(&sp, Component::Position).unwrap();
        let n = 16;
        for ix in 0..n {
            let x = 2.0 * std::f64::consts::PI * ix as f64 / n as f64;
            let got = f.values()[ix];
            assert_relative_eq!(got, x.cos(), epsilon = 1e-12);
        }
        assert_relative_eq!(f.values()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_too_small_is_refused() {
        let sp = SpectrumPair::zero(0.0, 8);
        let mut eng = SpectralEngine::new(12);
        assert!(matches!(
            eng.synthesize(&sp, Component::Position),
            Err(Error::GridTooSmall { .. })
        ));
    }

    #[test]
    fn analyze_inverts_synthesize_on_random_spectrum() {
        let base = {
            let mut sp = SpectrumPair::zero(0.0, 4);
            for k in 0..sp.coef().len() {
                sp.coef_mut()[k].b[0] = 1.0;
                sp.coef_mut()[k].c[0] = 1.0;
            }
            sp.set_zero_mode(Component::Position, 1.0);
            sp
        };
        let sp = randomize(&base, &CoefficientLaw::gaussian(), SeedSpec::new(11, 0)).unwrap();
        let mut eng = SpectralEngine::new(16);
        let f = eng.synthesize(&sp, Component::Position).unwrap();
        let rec = eng.analyze(&f, 4).unwrap();
        assert_relative_eq!(rec.a, sp.zero_modes()[0], max_relative = 1e-12);
        for (k, coef) in sp.coef().iter().enumerate() {
            assert_relative_eq!(rec.bc[k][0], coef.b[0], max_relative = 1e-12, epsilon = 1e-13);
            assert_relative_eq!(rec.bc[k][1], coef.c[0], max_relative = 1e-12, epsilon = 1e-13);
        }
    }

    #[test]
    fn parseval_on_band_limited_field() {
        let base = {
            let mut sp = SpectrumPair::zero(0.0, 3);
            for k in 0..sp.coef().len() {
                sp.coef_mut()[k].b[0] = 0.7;
                sp.coef_mut()[k].c[0] = -0.2;
            }
            sp.set_zero_mode(Component::Position, 0.4);
            sp
        };
        let sp = randomize(&base, &CoefficientLaw::gaussian(), SeedSpec::new(3, 5)).unwrap();
        let mut eng = SpectralEngine::for_norms(3);
        let f = eng.synthesize(&sp, Component::Position).unwrap();
        let l2 = f.lp_norm(2.0).unwrap();
        let sob = sp.sobolev_norm(0.0, NormComponent::Position).unwrap();
        assert_relative_eq!(l2, sob, max_relative = 1e-12);
    }
}
