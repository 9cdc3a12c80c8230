use super::{finish, AffineBellman, SolveReport, SolveStatus, DIVERGENCE_BOUND};
use crate::error::Result;
use crate::field::{sup_distance, GridField};

#[derive(Debug, Clone, PartialEq)]
pub struct DivergingReport {
    /// Backward fixed point `v_λ` reached from `v₊`.
    pub v: SolveReport,
    /// Forward limit `v₊` from the strict subsolution.
    pub v_plus: GridField,
    pub forward_iterations: usize,
    pub forward_status: SolveStatus,
    /// `sup |v₊ - F[v₊]|`.
    pub forward_residual: f64,
    /// Nodes on the cycles of the forward maximizing policy, held at `v₊` during the backward stage.
    pub touching: Vec<usize>,
    /// `min_x |v_λ(x) - v₊(x)|`.
    pub touching_gap: f64,
}

/// Forward limit `v₊ = lim F^k[φ_λ]`, then backward limit `v_λ = lim B^k[v₊]`.
///
/// The forward stage runs value iteration until the maximizing policy settles,
/// then finishes by exact policy evaluation: values on each policy cycle solve
/// the cyclic affine system in closed form, tree nodes follow by substitution.
/// Those cycle nodes are where `v_λ` touches `v₊`. They are repelling for `B`
/// (the weight exceeds one there), so they stay pinned while the backward
/// stage iterates on the remaining nodes; the pinned limit is still an exact
/// fixed point of `B` because each cycle edge is tight.
pub fn solve_diverging_family(op: &AffineBellman, phi: &[f64], tol: f64, max_iters: usize) -> Result<DivergingReport> {
    let n = phi.len();
    let graph = op.graph();

    // forward warm-up
    let mut u = phi.to_vec();
    let (_, mut policy) = op.forward_policy(&u);
    let mut stable = 0;
    let mut forward_iterations = 0;
    let mut forward_status = SolveStatus::MaxIters;
    let warm_limit = max_iters.min(200 * n + 10_000);
    while forward_iterations < warm_limit {
        forward_iterations += 1;
        let (next, pol) = op.forward_policy(&u);
        let change = sup_distance(&next, &u);
        stable = if pol == policy { stable + 1 } else { 0 };
        policy = pol;
        u = next;
        if u.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND) {
            forward_status = SolveStatus::Diverged;
            break;
        }
        if change <= tol {
            forward_status = SolveStatus::Converged;
            break;
        }
        if stable >= 4 * n {
            break;
        }
    }

    if forward_status != SolveStatus::Diverged {
        for _ in 0..100 {
            let values = evaluate_policy(op, &policy);
            let (fv, improved) = op.forward_policy(&values);
            let mut changed = false;
            for y in 0..n {
                let better = if values[y] == f64::NEG_INFINITY {
                    fv[y] > f64::NEG_INFINITY
                } else {
                    fv[y] > values[y] + 1e-12 * (1.0 + values[y].abs())
                };
                if better && improved[y] != policy[y] {
                    policy[y] = improved[y];
                    changed = true;
                } else if fv[y] == f64::NEG_INFINITY && op.alpha()[y] > 1.0 && policy[y] != graph.rest_edge(y) {
                    // a resting loop with weight above one attracts the forward recursion
                    policy[y] = graph.rest_edge(y);
                    changed = true;
                }
            }
            if !changed {
                if values.iter().all(|v| v.is_finite()) {
                    u = values;
                    forward_status = SolveStatus::Converged;
                } else {
                    forward_status = SolveStatus::Diverged;
                }
                break;
            }
        }
    }

    let forward_residual = sup_distance(&u, &op.forward(&u));
    if forward_status != SolveStatus::Converged {
        let v_plus = GridField::new(*graph.grid(), u.iter().map(|v| v.clamp(-1e300, 1e300)).collect())?;
        let mut v = finish(op, v_plus.values().to_vec(), 0, forward_status, Vec::new())?;
        v.status = forward_status;
        return Ok(DivergingReport {
            v,
            v_plus,
            forward_iterations,
            forward_status,
            forward_residual,
            touching: Vec::new(),
            touching_gap: f64::INFINITY,
        });
    }

    let touching = policy_cycles(op, &policy).into_iter().flatten().collect::<Vec<_>>();
    let mut pinned = vec![false; n];
    for &z in &touching {
        pinned[z] = true;
    }
    let v_plus = u.clone();

    // pinned backward stage
    let mut w = u;
    let mut next = vec![0.0; n];
    let mut history = Vec::new();
    let mut status = SolveStatus::MaxIters;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        op.backward_into(&w, &mut next);
        for z in 0..n {
            if pinned[z] {
                next[z] = v_plus[z];
            }
        }
        let change = sup_distance(&next, &w);
        std::mem::swap(&mut w, &mut next);
        if iterations % 1000 == 0 {
            history.push(change);
        }
        if change <= tol {
            history.push(change);
            status = SolveStatus::Converged;
            break;
        }
        if w.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND) {
            status = SolveStatus::Diverged;
            break;
        }
    }
    let touching_gap = w.iter().zip(&v_plus).map(|(a, b)| (a - b).abs()).fold(f64::INFINITY, f64::min);
    let v = finish(op, w, iterations, status, history)?;
    Ok(DivergingReport {
        v,
        v_plus: GridField::new(*graph.grid(), v_plus)?,
        forward_iterations,
        forward_status,
        forward_residual,
        touching,
        touching_gap,
    })
}

/// Cycles of the functional graph `y → target(policy[y])`, each listed from its smallest node.
fn policy_cycles(op: &AffineBellman, policy: &[usize]) -> Vec<Vec<usize>> {
    let graph = op.graph();
    let n = policy.len();
    let next = |y: usize| graph.edge(policy[y]).target;
    // 0 = unvisited, 1 = on current path, 2 = done
    let mut state = vec![0u8; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut y = start;
        while state[y] == 0 {
            state[y] = 1;
            path.push(y);
            y = next(y);
        }
        if state[y] == 1 {
            let pos = path.iter().position(|&p| p == y).unwrap_or(0);
            let mut cycle = path[pos..].to_vec();
            let min_pos = cycle.iter().enumerate().min_by_key(|(_, v)| **v).map_or(0, |(i, _)| i);
            cycle.rotate_left(min_pos);
            cycles.push(cycle);
        }
        for p in path {
            state[p] = 2;
        }
    }
    cycles
}

/// Exact values of the forward recursion `v(y) = (v(next) - β c) / α(y)` under a fixed policy.
///
/// A cycle whose product of `1/α` is at least one repels the forward iteration;
/// from a negative start its nodes and their trees get `-∞`.
fn evaluate_policy(op: &AffineBellman, policy: &[usize]) -> Vec<f64> {
    let graph = op.graph();
    let n = policy.len();
    let alpha = op.alpha();
    let next = |y: usize| graph.edge(policy[y]).target;
    let mut value = vec![f64::NAN; n];
    let mut known = vec![false; n];
    for cycle in policy_cycles(op, policy) {
        // v(z0) = slope * v(z0) + intercept, composing from the last node back to z0
        let mut slope = 1.0;
        let mut intercept = 0.0;
        for &z in cycle.iter().rev() {
            let off = op.edge_offset(policy[z]);
            intercept = (intercept - off) / alpha[z];
            slope /= alpha[z];
        }
        let v0 = if slope < 1.0 - 1e-15 { intercept / (1.0 - slope) } else { f64::NEG_INFINITY };
        value[cycle[0]] = v0;
        known[cycle[0]] = true;
        for &z in cycle.iter().skip(1).rev() {
            let t = next(z);
            value[z] = (value[t] - op.edge_offset(policy[z])) / alpha[z];
            known[z] = true;
        }
    }
    for start in 0..n {
        let mut path = Vec::new();
        let mut y = start;
        while !known[y] {
            path.push(y);
            y = next(y);
        }
        for &p in path.iter().rev() {
            value[p] = (value[next(p)] - op.edge_offset(policy[p])) / alpha[p];
            known[p] = true;
        }
    }
    value
}
