//! Time series recorded along a trajectory.

use std::io::Write;

use crate::error::{Error, Result};
use crate::numeric::fmt_g17;
use crate::spectral::SpectrumPair;

/// Full solution state (v, dt v) at one record time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub state: SpectrumPair,
}

/// Scalar series sampled at record times: the energy of the nonlinear
/// remainder, its H^1-pair norm, the forcing amplitudes f(t) = |S(t)V|_Linf
/// and g(t) = |S(t)V|^3_L6, the running space-time L^4 norm of v, and the
/// H^s norm of the full pair.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub e_w: Vec<f64>,
    pub h1_w: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub l4_acc: Vec<f64>,
    pub hs_v: Vec<f64>,
    pub snapshots: Option<Vec<Snapshot>>,
}

impl TrajectoryRecord {
    pub fn with_snapshots() -> Self {
        TrajectoryRecord {
            snapshots: Some(Vec::new()),
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if [&self.e_w, &self.h1_w, &self.f, &self.g, &self.l4_acc, &self.hs_v]
            .iter()
            .any(|v| v.len() != n)
        {
            return Err(Error::InvalidInput("ragged trajectory columns".into()));
        }
        for w in self.times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidInput("record times must increase".into()));
            }
        }
        for col in [&self.e_w, &self.h1_w, &self.f, &self.g, &self.l4_acc, &self.hs_v] {
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite trajectory entry".into()));
            }
        }
        Ok(())
    }

    /// True when both trajectories were recorded on the same time grid.
    pub fn same_time_grid(&self, other: &TrajectoryRecord) -> bool {
        self.times.len() == other.times.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
    }

    /// CSV with one row per record time, 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,E_w,H1_w,f,g,L4_acc,Hs_v")?;
        for k in 0..self.times.len() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_g17(self.times[k]),
                fmt_g17(self.e_w[k]),
                fmt_g17(self.h1_w[k]),
                fmt_g17(self.f[k]),
                fmt_g17(self.g[k]),
                fmt_g17(self.l4_acc[k]),
                fmt_g17(self.hs_v[k]),
            )?;
        }
        Ok(())
    }
}
