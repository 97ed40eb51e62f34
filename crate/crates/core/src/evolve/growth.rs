//! Least-squares fits of long-time norm growth.
//!
//! For s > 0 the model is y(t) = C (M + t)^gamma, fitted in log space with a
//! one-dimensional search over the offset M; for s = 0 it is
//! y(t) = C e^{c2 (t + M)^2}, which is linear in (log C, M c2, c2) after
//! expanding the square.

use super::record::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::numeric::{golden_section_min, linear_fit, quadratic_fit};

#[derive(Debug, Clone, Copy)]
pub struct GrowthFit {
    /// Fitted time offset M > 0.
    pub m: f64,
    /// Power-law exponent (s > 0 model) or quadratic-in-t coefficient (s = 0).
    pub exponent: f64,
    /// Fitted prefactor C.
    pub prefactor: f64,
    /// Root-mean-square residual of the log fit.
    pub residual: f64,
    /// Set when the series carries no usable variation; the exponent is then
    /// reported as zero.
    pub degenerate: bool,
}

/// Pool the H^1 remainder norms of the given trajectories against a common
/// time grid and fit the growth model selected by `s`.
pub fn fit_growth(trajs: &[TrajectoryRecord], s: f64) -> Result<GrowthFit> {
    if trajs.is_empty() {
        return Err(Error::InvalidInput("no trajectories to fit".into()));
    }
    if !(0.0..1.0).contains(&s) {
        return Err(Error::InvalidInput(format!("s must lie in [0, 1), got {s}")));
    }
    for traj in trajs {
        traj.validate()?;
        if !traj.same_time_grid(&trajs[0]) {
            return Err(Error::InvalidInput(
                "trajectories recorded on different time grids".into(),
            ));
        }
    }
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for traj in trajs {
        for (&t, &y) in traj.times.iter().zip(&traj.h1_w) {
            if y > 0.0 && y.is_finite() {
                ts.push(t);
                logs.push(y.ln());
            }
        }
    }
    if ts.len() < 3 {
        return Err(Error::DegenerateFit(
            "fewer than three positive samples".into(),
        ));
    }
    let spread = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - logs.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < 1e-9 {
        return Ok(GrowthFit {
            m: 1.0,
            exponent: 0.0,
            prefactor: logs[0].exp(),
            residual: 0.0,
            degenerate: true,
        });
    }

    if s > 0.0 {
        fit_power_law(&ts, &logs)
    } else {
        fit_exp_square(&ts, &logs)
    }
}

fn fit_power_law(ts: &[f64], logs: &[f64]) -> Result<GrowthFit> {
    let sse_at = |log_m: f64| -> (f64, f64, f64) {
        let m = log_m.exp();
        let xs: Vec<f64> = ts.iter().map(|&t| (m + t).ln()).collect();
        let (intercept, slope, _) = linear_fit(&xs, logs);
        let sse: f64 = xs
            .iter()
            .zip(logs)
            .map(|(&x, &y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        (sse, intercept, slope)
    };
    // coarse scan over the offset, then a golden-section refinement
    let (lo, hi) = (-7.0f64, 9.5f64); // M from ~1e-3 to ~1.3e4
    let mut best = lo;
    let mut best_sse = f64::INFINITY;
    let scan = 240;
    for k in 0..=scan {
        let log_m = lo + (hi - lo) * k as f64 / scan as f64;
        let (sse, _, _) = sse_at(log_m);
        if sse < best_sse {
            best_sse = sse;
            best = log_m;
        }
    }
    let width = (hi - lo) / scan as f64;
    let log_m = golden_section_min(
        |lm| sse_at(lm).0,
        (best - 2.0 * width).max(lo),
        (best + 2.0 * width).min(hi),
        1e-13,
    );
    let (sse, intercept, slope) = sse_at(log_m);
    Ok(GrowthFit {
        m: log_m.exp(),
        exponent: slope,
        prefactor: intercept.exp(),
        residual: (sse / ts.len() as f64).sqrt(),
        degenerate: false,
    })
}

fn fit_exp_square(ts: &[f64], logs: &[f64]) -> Result<GrowthFit> {
    // log y = (log C + c2 M^2) + 2 c2 M t + c2 t^2
    let c = quadratic_fit(ts, logs);
    let c2 = c[2];
    if c2.abs() < 1e-14 {
        return Ok(GrowthFit {
            m: 1.0,
            exponent: 0.0,
            prefactor: c[0].exp(),
            residual: rms_residual(ts, logs, &c),
            degenerate: true,
        });
    }
    let m = c[1] / (2.0 * c2);
    let log_c = c[0] - c2 * m * m;
    Ok(GrowthFit {
        m,
        exponent: c2,
        prefactor: log_c.exp(),
        residual: rms_residual(ts, logs, &c),
        degenerate: false,
    })
}

fn rms_residual(ts: &[f64], logs: &[f64], c: &[f64; 3]) -> f64 {
    let sse: f64 = ts
        .iter()
        .zip(logs)
        .map(|(&t, &y)| {
            let r = y - c[0] - c[1] * t - c[2] * t * t;
            r * r
        })
        .sum();
    (sse / ts.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(times: Vec<f64>, values: Vec<f64>) -> TrajectoryRecord {
        let n = times.len();
        TrajectoryRecord {
            times,
            e_w: vec![0.0; n],
            h1_w: values,
            f: vec![0.0; n],
            g: vec![0.0; n],
            l4_acc: vec![0.0; n],
            hs_v: vec![0.0; n],
            snapshots: None,
        }
    }

    #[test]
    fn planted_power_law_recovered() {
        let times: Vec<f64> = (0..200).map(|k| k as f64 * 0.25).collect();
        let values: Vec<f64> = times.iter().map(|&t| (1.0 + t).powi(2)).collect();
        let fit = fit_growth(&[series(times, values)], 0.5).unwrap();
        assert!(
            (fit.exponent - 2.0).abs() < 1e-10,
            "exponent {}",
            fit.exponent
        );
        assert!((fit.m - 1.0).abs() < 1e-6, "offset {}", fit.m);
        assert!(!fit.degenerate);
    }

    #[test]
    fn planted_exp_square_recovered() {
        let times: Vec<f64> = (0..100).map(|k| k as f64 * 0.02).collect();
        let values: Vec<f64> = times.iter().map(|&t| ((t + 1.0) * (t + 1.0)).exp()).collect();
        let fit = fit_growth(&[series(times, values)], 0.0).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-9, "c2 {}", fit.exponent);
        assert!((fit.m - 1.0).abs() < 1e-7, "offset {}", fit.m);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let values = vec![3.5; 50];
        let fit = fit_growth(&[series(times, values)], 0.5).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.exponent, 0.0);
    }

    #[test]
    fn pooled_fit_across_trajectories() {
        let times: Vec<f64> = (0..100).map(|k| k as f64 * 0.5).collect();
        let a: Vec<f64> = times.iter().map(|&t| 1.02 * (2.0 + t).powf(1.5)).collect();
        let b: Vec<f64> = times.iter().map(|&t| 0.98 * (2.0 + t).powf(1.5)).collect();
        let fit = fit_growth(
            &[series(times.clone(), a), series(times, b)],
            0.4,
        )
        .unwrap();
        assert!((fit.exponent - 1.5).abs() < 1e-2, "exponent {}", fit.exponent);
    }
}
