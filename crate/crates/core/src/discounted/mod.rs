//! Discounted Bellman operators, the maximal solution family, the diverging
//! family built from a strict subsolution, and Picard iteration for general
//! contact models.
//!
//! A discrete subsolution is any `u` with `u <= B[u]` node-wise, i.e. every
//! edge constraint `u(x) <= α(y) u(y) + β(y) c(e)` holds.

mod diverging;
mod operators;

pub use diverging::{solve_diverging_family, DivergingReport};
pub use operators::{AffineBellman, ContactBellman};

use crate::error::{config, Error, Result};
use crate::field::{sup_distance, GridField};
use crate::grid::EdgeGraph;
use crate::models::ContactModel;

/// Magnitude beyond which an iterate is declared divergent.
pub const DIVERGENCE_BOUND: f64 = 1e6;
pub const DEFAULT_MAX_ITERS: usize = 2_000_000;
const HISTORY_STRIDE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    Diverged,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub u: GridField,
    pub iterations: usize,
    /// `sup |u - B[u]|` at the returned field.
    pub residual: f64,
    pub status: SolveStatus,
    /// Minimizing incoming edge per node at the returned field.
    pub policy: Vec<usize>,
    /// Sup-norm change, sampled every 1000 sweeps and at the last sweep.
    pub history: Vec<f64>,
    pub damped: bool,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// Backward calibrated chain `γ(0) = x, γ(k+1) = source of policy[γ(k)]`.
    pub fn trajectory(&self, graph: &EdgeGraph, x: usize, steps: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(steps + 1);
        let mut node = x;
        out.push(node);
        for _ in 0..steps {
            node = graph.edge(self.policy[node]).source;
            out.push(node);
        }
        out
    }
}

/// One backward step `min over incoming (y,v) of e^{-λ a(y) dt} [u(y) + dt (L + c0)]`.
///
/// `a` is sampled per node, `reduced` holds `L + c0` per edge.
pub fn backward_step_linear(graph: &EdgeGraph, u: &[f64], lambda: f64, a: &[f64], reduced: &[f64]) -> Result<Vec<f64>> {
    check_weight(graph, lambda, a)?;
    Ok(AffineBellman::linear(graph, lambda, a, reduced).backward(u))
}

/// Rejects `λ dt max|a| >= 0.5`.
pub fn check_weight(graph: &EdgeGraph, lambda: f64, a: &[f64]) -> Result<()> {
    let amax = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if lambda.is_nan() || lambda <= 0.0 || lambda * graph.dt() * amax >= 0.5 {
        return config(format!("need 0 < λ and λ·dt·max|a| < 0.5, got λ = {lambda}, max|a| = {amax}"));
    }
    Ok(())
}

/// A-priori oscillation scale: half the hops across each axis at the largest unit-hop cost.
pub fn oscillation_estimate(graph: &EdgeGraph, reduced: &[f64]) -> f64 {
    let controls = graph.controls();
    let unit = reduced
        .iter()
        .enumerate()
        .filter(|(e, _)| controls.offset(graph.edge(*e).velocity).iter().all(|k| k.abs() <= 1))
        .fold(0.0_f64, |m, (_, l)| m.max(l.abs()));
    let grid = graph.grid();
    grid.dim() as f64 * (grid.n() as f64 / 2.0) * graph.dt() * unit
}

/// Initial upper level `10 (1 + C)` for [`solve_maximal`].
pub fn default_upper_level(graph: &EdgeGraph, reduced: &[f64]) -> f64 {
    10.0 * (1.0 + oscillation_estimate(graph, reduced))
}

/// Value iteration `u ← min(cap, B[u])` (no cap when `None`) until the sup-change is `<= tol`.
pub fn iterate_backward(
    op: &AffineBellman,
    start: &[f64],
    cap: Option<f64>,
    tol: f64,
    max_iters: usize,
) -> Result<SolveReport> {
    let mut u = start.to_vec();
    let mut next = vec![0.0; u.len()];
    let mut history = Vec::new();
    let mut status = SolveStatus::MaxIters;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        op.backward_into(&u, &mut next);
        if let Some(c) = cap {
            for v in next.iter_mut() {
                *v = v.min(c);
            }
        }
        let change = sup_distance(&next, &u);
        std::mem::swap(&mut u, &mut next);
        if iterations % HISTORY_STRIDE == 0 {
            history.push(change);
        }
        if change <= tol {
            history.push(change);
            status = SolveStatus::Converged;
            break;
        }
        if u.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND) {
            history.push(change);
            status = SolveStatus::Diverged;
            break;
        }
    }
    finish(op, u, iterations, status, history)
}

fn finish(op: &AffineBellman, u: Vec<f64>, iterations: usize, status: SolveStatus, history: Vec<f64>) -> Result<SolveReport> {
    let (bu, policy) = op.backward_policy(&u);
    let residual = sup_distance(&u, &bu);
    let clipped: Vec<f64> = u.iter().map(|v| v.clamp(-1e300, 1e300)).collect();
    let u = GridField::new(*op.graph().grid(), clipped)?;
    Ok(SolveReport { u, iterations, residual, status, policy, history, damped: false })
}

/// Maximal discrete solution by monotone iteration from an upper constant.
///
/// Iterates `u ← min(U, B[u])` from `u ≡ U`. The iterates are non-increasing
/// from the first sweep and converge to the largest subsolution below `U`. If
/// that limit still touches `U`, the level is raised tenfold once; touching
/// again is reported as divergence.
pub fn solve_maximal(op: &AffineBellman, upper: f64, tol: f64, max_iters: usize) -> Result<SolveReport> {
    let n = op.graph().node_count();
    let mut level = upper;
    for attempt in 0..2 {
        let mut report = iterate_backward(op, &vec![level; n], Some(level), tol, max_iters)?;
        if report.status != SolveStatus::Converged {
            return Ok(report);
        }
        // clamp active somewhere: the limit is not a fixed point of B
        let unclamped = op.backward(report.u.values());
        let touches = unclamped.iter().any(|v| *v > level);
        if !touches {
            return Ok(report);
        }
        if attempt == 1 {
            report.status = SolveStatus::Diverged;
            return Ok(report);
        }
        level *= 10.0;
    }
    unreachable!()
}

/// Base subsolution shifted down: `φ - 1/√λ`, with per-edge slack checks.
#[derive(Debug, Clone, PartialEq)]
pub struct StrictSubsolution {
    pub phi: GridField,
    /// Smallest edge slack over edges leaving the Aubry neighborhood.
    pub strict_slack: f64,
    /// Smallest edge slack over all edges.
    pub min_slack: f64,
}

/// `φ_λ = φ - 1/√λ`. Fails unless every edge constraint holds and every edge
/// whose source lies outside `neighborhood` holds strictly.
pub fn strict_subsolution(op: &AffineBellman, base: &[f64], lambda: f64, neighborhood: &[usize]) -> Result<StrictSubsolution> {
    let graph = op.graph();
    let shift = 1.0 / lambda.sqrt();
    let phi: Vec<f64> = base.iter().map(|v| v - shift).collect();
    let slack = op.edge_slack(&phi);
    let mut strict = f64::INFINITY;
    let mut min_slack = f64::INFINITY;
    for (id, e) in graph.edges().iter().enumerate() {
        min_slack = min_slack.min(slack[id]);
        if !neighborhood.contains(&e.source) {
            strict = strict.min(slack[id]);
        }
    }
    if min_slack < -1e-12 {
        return Err(Error::NotStrict(format!("edge constraint violated by {}", -min_slack)));
    }
    if strict <= 0.0 {
        return Err(Error::NotStrict(format!("slack {strict} off the Aubry neighborhood")));
    }
    Ok(StrictSubsolution { phi: GridField::new(*graph.grid(), phi)?, strict_slack: strict, min_slack })
}

/// Aubry nodes together with their one-hop neighbors.
pub fn aubry_neighborhood(graph: &EdgeGraph, aubry: &[usize]) -> Vec<usize> {
    let mut set: Vec<usize> = aubry.to_vec();
    for &y in aubry {
        for e in graph.outgoing(y) {
            let edge = graph.edge(e);
            if graph.controls().offset(edge.velocity).iter().all(|k| k.abs() <= 1) {
                set.push(edge.target);
            }
        }
    }
    set.sort_unstable();
    set.dedup();
    set
}

/// Picard iteration for a general contact model from `start`.
///
/// Once the sup-change fails to decrease for 10 consecutive sweeps the update
/// is damped to `u ← (u + B[u]) / 2`; [`SolveReport::damped`] records this.
pub fn solve_general_contact(op: &ContactBellman, start: &[f64], tol: f64, max_iters: usize) -> Result<SolveReport> {
    let mut u = start.to_vec();
    let mut history = Vec::new();
    let mut status = SolveStatus::MaxIters;
    let mut iterations = 0;
    let mut prev_change = f64::INFINITY;
    let mut rising = 0;
    let mut damped = false;
    while iterations < max_iters {
        iterations += 1;
        let bu = op.backward(&u);
        let next: Vec<f64> = if damped { u.iter().zip(&bu).map(|(a, b)| 0.5 * (a + b)).collect() } else { bu };
        let change = sup_distance(&next, &u);
        u = next;
        if iterations % HISTORY_STRIDE == 0 {
            history.push(change);
        }
        if change <= tol {
            history.push(change);
            status = SolveStatus::Converged;
            break;
        }
        if u.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND) {
            history.push(change);
            status = SolveStatus::Diverged;
            break;
        }
        rising = if change >= prev_change { rising + 1 } else { 0 };
        prev_change = change;
        if rising >= 10 {
            damped = true;
        }
    }
    let (bu, policy) = op.backward_policy(&u);
    let residual = sup_distance(&u, &bu);
    let clipped: Vec<f64> = u.iter().map(|v| v.clamp(-1e300, 1e300)).collect();
    Ok(SolveReport {
        u: GridField::new(*op.graph().grid(), clipped)?,
        iterations,
        residual,
        status,
        policy,
        history,
        damped,
    })
}

/// `sup |u - Op[u]|` for any operator given as a closure.
pub fn residual<F: Fn(&[f64]) -> Vec<f64>>(u: &[f64], op: F) -> f64 {
    sup_distance(u, &op(u))
}

/// Constant `A₊ = max(C, K) D e^{K D}` of the discrete Harnack bound.
///
/// `C = max |L_G(·,·,0) + c0|` over unit hops, `K` the Lipschitz constant of
/// `L_G` in `u`, and `D = 1/2` the sup-norm diameter of the torus.
pub fn harnack_constant(graph: &EdgeGraph, model: &ContactModel, c0: f64) -> f64 {
    let costs = model.base().edge_costs(graph);
    let controls = graph.controls();
    let c = costs
        .iter()
        .enumerate()
        .filter(|(e, _)| controls.offset(graph.edge(*e).velocity).iter().all(|k| k.abs() <= 1))
        .fold(0.0_f64, |m, (_, l)| m.max((l + c0).abs()));
    let k = model.lipschitz_k();
    let d = 0.5;
    c.max(k) * d * (k * d).exp()
}

/// `max w <= min w + A₊ (1 + λ min|w|)`, up to `1e-9` relative slack.
pub fn harnack_holds(w: &GridField, lambda: f64, a_plus: f64) -> bool {
    let min_abs = w.values().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let bound = w.min() + a_plus * (1.0 + lambda * min_abs);
    w.max() <= bound + 1e-9 * (1.0 + bound.abs())
}
