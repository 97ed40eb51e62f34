//! Fixed-point local solver for the integral form of the forced cubic wave
//! equation,
//!   v(t) = S(t)(v0, v1) - int_0^t sin((t-r) |D|) / |D| [(f(r) + v(r))^3] dr,
//! iterated on a time-node grid with trapezoid quadrature. Completely
//! independent of the split-step scheme, which makes it the cross-validation
//! oracle for short intervals.

use super::stepper::Split;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::spectral::{Component, ModeCoef, SpectralEngine, SpectrumPair};

/// Forcing of the local problem: nothing, or free-evolved data (f = S(t)V).
#[derive(Debug, Clone)]
pub enum Forcing {
    None,
    Free(SpectrumPair),
}

impl Forcing {
    /// Build the forcing of the decomposed problem for data V and a split.
    pub fn for_split(v: &SpectrumPair, split: Split) -> (SpectrumPair, Forcing) {
        match split {
            Split::At(n) => (v.project_low(n), Forcing::Free(v.project_high(n))),
            Split::All => (
                SpectrumPair::zero(v.s(), v.n_max()),
                Forcing::Free(v.clone()),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DuhamelOptions {
    /// Number of quadrature intervals on [a, a + tau].
    pub intervals: usize,
    /// Successive-iterate distance (sup-in-time H^1 of the position) below
    /// which the iteration stops.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for DuhamelOptions {
    fn default() -> Self {
        DuhamelOptions {
            intervals: 128,
            tol: 1e-12,
            max_iters: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DuhamelSolution {
    /// Absolute node times a, a + h, ..., a + tau.
    pub times: Vec<f64>,
    /// Solution pair (v, dt v) at each node.
    pub states: Vec<SpectrumPair>,
    pub iterations: usize,
}

/// One iterate: position coefficients per node.
#[derive(Clone)]
struct NodeField {
    a: f64,
    bc: Vec<[f64; 2]>,
}

pub fn local_solve_duhamel(
    data: &SpectrumPair,
    forcing: &Forcing,
    t_start: f64,
    tau: f64,
    opts: &DuhamelOptions,
) -> Result<DuhamelSolution> {
    data.validate()?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidInput(format!("tau must be positive, got {tau}")));
    }
    if opts.intervals == 0 || !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(
            "need at least one interval and a positive tolerance".into(),
        ));
    }
    if let Forcing::Free(f) = forcing {
        f.validate()?;
        if !f.same_index_set(data) {
            return Err(Error::IndexSetMismatch(
                "forcing truncated at a different radius".into(),
            ));
        }
    }

    let modes = data.modes().clone();
    let omega: Vec<f64> = modes.iter().map(|m| m.norm()).collect();
    let n_nodes = opts.intervals + 1;
    let h = tau / opts.intervals as f64;
    let times: Vec<f64> = (0..n_nodes).map(|k| t_start + h * k as f64).collect();

    let mut engine = SpectralEngine::for_cubic(modes.n_max());

    // free part of the iterate at each node (relative lapse from t_start)
    let free_states: Vec<SpectrumPair> = (0..n_nodes)
        .map(|k| data.free_evolve(h * k as f64))
        .collect();
    // forcing at each absolute node time
    let forcing_states: Option<Vec<SpectrumPair>> = match forcing {
        Forcing::None => None,
        Forcing::Free(f) => Some(times.iter().map(|&t| f.free_evolve(t)).collect()),
    };

    let free_pos = |k: usize| -> NodeField {
        let sp = &free_states[k];
        NodeField {
            a: sp.zero_modes()[0],
            bc: sp.coef().iter().map(|c| [c.b[0], c.c[0]]).collect(),
        }
    };

    let mut current: Vec<NodeField> = (0..n_nodes).map(free_pos).collect();
    let mut iterations = 0usize;
    let mut prev_dist = f64::INFINITY;
    let mut growth_streak = 0usize;

    // scratch
    let mut gather: Vec<[f64; 2]> = Vec::with_capacity(modes.len());
    let mut grid: Vec<f64> = Vec::new();
    let mut cube_bc: Vec<[f64; 2]> = Vec::with_capacity(modes.len());

    loop {
        iterations += 1;
        if iterations > opts.max_iters {
            return Err(Error::IntervalTooLong(format!(
                "no contraction after {} iterations (last distance {prev_dist:.3e})",
                opts.max_iters
            )));
        }

        // projected cube (f + v)^3 at every node
        let mut integrands: Vec<NodeField> = Vec::with_capacity(n_nodes);
        for k in 0..n_nodes {
            gather.clear();
            let mut a = current[k].a;
            if let Some(fs) = &forcing_states {
                a += fs[k].zero_modes()[0];
                for (c, fc) in current[k].bc.iter().zip(fs[k].coef()) {
                    gather.push([c[0] + fc.b[0], c[1] + fc.c[0]]);
                }
            } else {
                gather.extend(current[k].bc.iter().copied());
            }
            engine.synthesize_into(&modes, a, &gather, &mut grid)?;
            for v in grid.iter_mut() {
                *v = *v * *v * *v;
            }
            let mut cube_a = 0.0;
            engine.analyze_into(&grid, &modes, &mut cube_a, &mut cube_bc)?;
            integrands.push(NodeField {
                a: cube_a,
                bc: cube_bc.clone(),
            });
        }

        // next iterate: free part minus the memory integral
        let mut next: Vec<NodeField> = Vec::with_capacity(n_nodes);
        let mut dist = 0.0f64;
        for i in 0..n_nodes {
            let mut node = free_pos(i);
            let mut zero_acc = CompensatedSum::new();
            if i > 0 {
                for j in 0..=i {
                    let weight = if j == 0 || j == i { 0.5 * h } else { h };
                    let lapse = h * (i - j) as f64;
                    zero_acc.add(weight * lapse * integrands[j].a);
                    for ((bc, &w), src) in node
                        .bc
                        .iter_mut()
                        .zip(&omega)
                        .zip(&integrands[j].bc)
                    {
                        let kernel = (lapse * w).sin() / w;
                        bc[0] -= weight * kernel * src[0];
                        bc[1] -= weight * kernel * src[1];
                    }
                }
            }
            node.a -= zero_acc.value();
            // sup-in-time H^1 distance between iterates
            let mut diff_sq = (node.a - current[i].a).powi(2);
            for (m, mode) in modes.iter().enumerate() {
                let db = node.bc[m][0] - current[i].bc[m][0];
                let dc = node.bc[m][1] - current[i].bc[m][1];
                diff_sq += 0.5 * mode.bracket_sq() * (db * db + dc * dc);
            }
            dist = dist.max(diff_sq.sqrt());
            next.push(node);
        }
        current = next;

        if dist < opts.tol {
            break;
        }
        if !dist.is_finite() || dist > 1e8 {
            return Err(Error::IntervalTooLong(format!(
                "iterates diverge (distance {dist:.3e} after {iterations} iterations)"
            )));
        }
        if dist > prev_dist {
            growth_streak += 1;
            if growth_streak >= 3 {
                return Err(Error::IntervalTooLong(format!(
                    "successive-iterate distance grows ({prev_dist:.3e} -> {dist:.3e}); interval too long for contraction"
                )));
            }
        } else {
            growth_streak = 0;
        }
        prev_dist = dist;
    }

    // rebuild the final integrands once more for the velocity reconstruction
    let mut integrands: Vec<NodeField> = Vec::with_capacity(n_nodes);
    for k in 0..n_nodes {
        gather.clear();
        let mut a = current[k].a;
        if let Some(fs) = &forcing_states {
            a += fs[k].zero_modes()[0];
            for (c, fc) in current[k].bc.iter().zip(fs[k].coef()) {
                gather.push([c[0] + fc.b[0], c[1] + fc.c[0]]);
            }
        } else {
            gather.extend(current[k].bc.iter().copied());
        }
        engine.synthesize_into(&modes, a, &gather, &mut grid)?;
        for v in grid.iter_mut() {
            *v = *v * *v * *v;
        }
        let mut cube_a = 0.0;
        engine.analyze_into(&grid, &modes, &mut cube_a, &mut cube_bc)?;
        integrands.push(NodeField {
            a: cube_a,
            bc: cube_bc.clone(),
        });
    }

    let mut states = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let mut pair = SpectrumPair::zero(data.s(), modes.n_max());
        pair.set_zero_mode(Component::Position, current[i].a);
        let free = &free_states[i];
        let mut vel_a = free.zero_modes()[1];
        let mut vel_bc: Vec<[f64; 2]> = free.coef().iter().map(|c| [c.b[1], c.c[1]]).collect();
        if i > 0 {
            for j in 0..=i {
                let weight = if j == 0 || j == i { 0.5 * h } else { h };
                let lapse = h * (i - j) as f64;
                vel_a -= weight * integrands[j].a;
                for (m, &w) in omega.iter().enumerate() {
                    let kernel = (lapse * w).cos();
                    vel_bc[m][0] -= weight * kernel * integrands[j].bc[m][0];
                    vel_bc[m][1] -= weight * kernel * integrands[j].bc[m][1];
                }
            }
        }
        pair.set_zero_mode(Component::Velocity, vel_a);
        for (k, dst) in pair.coef_mut().iter_mut().enumerate() {
            *dst = ModeCoef {
                b: [current[i].bc[k][0], vel_bc[k][0]],
                c: [current[i].bc[k][1], vel_bc[k][1]],
            };
        }
        states.push(pair);
    }

    Ok(DuhamelSolution {
        times,
        states,
        iterations,
    })
}
