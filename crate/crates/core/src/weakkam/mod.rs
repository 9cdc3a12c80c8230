//! Critical value, Peierls barrier, Aubry set and critical solutions on the edge graph.
//!
//! Step costs along an edge `(y, v)` are `dt·(L(y, v) + c0)`. The critical value
//! is computed three ways: Karp's min-mean cycle, a linear program, and the
//! ergodic limit `-λ u_λ`.

mod barrier;
mod karp;

pub use barrier::{all_barriers, peierls_barrier, BarrierData, BarrierMatrix, BarrierWindow};
pub use karp::{cycle_mean, min_mean_cycle};

use crate::error::{config, Error, Result};
use crate::field::GridField;
use crate::grid::EdgeGraph;
use crate::lp::{solve_lp, LinearProgram};
use crate::models::LagrangianModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalMethod {
    Karp,
    Lp,
    Ergodic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CriticalWitness {
    /// Minimizing cycle as edge ids in traversal order.
    Cycle(Vec<usize>),
    /// Critical subsolution `w`.
    Subsolution(GridField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalData {
    pub c0: f64,
    pub method: CriticalMethod,
    pub witness: CriticalWitness,
}

impl CriticalData {
    pub fn cycle_nodes(&self, graph: &EdgeGraph) -> Vec<usize> {
        match &self.witness {
            CriticalWitness::Cycle(edges) => edges.iter().map(|&e| graph.edge(e).source).collect(),
            CriticalWitness::Subsolution(_) => Vec::new(),
        }
    }
}

/// `L + c0` per edge.
pub fn reduced_costs(costs: &[f64], c0: f64) -> Vec<f64> {
    costs.iter().map(|l| l + c0).collect()
}

pub fn critical_value_karp(graph: &EdgeGraph, model: &LagrangianModel) -> CriticalData {
    critical_value_karp_costs(graph, &model.edge_costs(graph))
}

pub fn critical_value_karp_costs(graph: &EdgeGraph, costs: &[f64]) -> CriticalData {
    let (mean, cycle) = min_mean_cycle(graph, costs);
    CriticalData { c0: -mean, method: CriticalMethod::Karp, witness: CriticalWitness::Cycle(cycle) }
}

pub fn critical_value_lp(graph: &EdgeGraph, model: &LagrangianModel) -> Result<CriticalData> {
    critical_value_lp_costs(graph, &model.edge_costs(graph))
}

/// Closed probability measures on edges: `Σμ = 1` (row 0) and `out(x) - in(x) = 0` (row `1 + x`).
pub(crate) fn closed_measure_rows(graph: &EdgeGraph, objective: Vec<f64>) -> Result<LinearProgram> {
    let mut lp = LinearProgram::new(objective);
    let e = graph.edge_count();
    lp.add_equality(vec![1.0; e], 1.0)?;
    for x in 0..graph.node_count() {
        let mut row = vec![0.0; e];
        for id in graph.outgoing(x) {
            row[id] += 1.0;
        }
        for &id in graph.incoming(x) {
            row[id] -= 1.0;
        }
        lp.add_equality(row, 0.0)?;
    }
    Ok(lp)
}

/// Solves `min c  s.t.  w(target) - w(source) <= dt·(L + c)` per edge.
///
/// The program is solved through its dual, the closed-measure program
/// `min Σ μ L` over flow-conserving probability measures. Its multipliers give
/// `-c` on the mass row and `-w / dt` on the node rows.
pub fn critical_value_lp_costs(graph: &EdgeGraph, costs: &[f64]) -> Result<CriticalData> {
    let lp = closed_measure_rows(graph, costs.to_vec())?;
    let sol = solve_lp(&lp)?;
    let sol = sol.optimal().map_err(|e| Error::Internal(format!("critical LP: {e}")))?;
    let c0 = -sol.dual[0];
    let dt = graph.dt();
    let base = sol.dual[1];
    let w: Vec<f64> = (0..graph.node_count()).map(|x| dt * (base - sol.dual[1 + x])).collect();
    let w = GridField::new(*graph.grid(), w)?;
    Ok(CriticalData { c0, method: CriticalMethod::Lp, witness: CriticalWitness::Subsolution(w) })
}

/// Largest violation of `w(target) - w(source) <= dt·(L + c0)` over all edges.
pub fn subsolution_violation(graph: &EdgeGraph, reduced: &[f64], w: &[f64]) -> f64 {
    let dt = graph.dt();
    graph
        .edges()
        .iter()
        .zip(reduced)
        .map(|(e, l)| w[e.target] - w[e.source] - dt * l)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Undiscounted backward operator `min over incoming (y,v) of u(y) + dt·(L + c0)`.
pub fn critical_operator(graph: &EdgeGraph, reduced: &[f64], u: &[f64]) -> Vec<f64> {
    let dt = graph.dt();
    (0..graph.node_count())
        .map(|x| {
            graph
                .incoming(x)
                .iter()
                .map(|&e| u[graph.edge(e).source] + dt * reduced[e])
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicResult {
    /// The field `-λ u_λ`.
    pub field: GridField,
    pub iterations: usize,
    pub converged: bool,
    /// `sup |u - B_λ[u]|` at the returned `u_λ`.
    pub residual: f64,
}

pub fn critical_value_ergodic(
    graph: &EdgeGraph,
    model: &LagrangianModel,
    lambda: f64,
    max_iters: usize,
    tol: f64,
) -> Result<ErgodicResult> {
    critical_value_ergodic_costs(graph, &model.edge_costs(graph), lambda, max_iters, tol)
}

/// Fixed point of `B_λ[u](x) = min over incoming (y,v) of (1 - λ dt) u(y) + dt L(y,v)`.
///
/// Iterates on the relative value `w = u - u(node 0)`. Since `B_λ[w + s] =
/// B_λ[w] + (1 - λ dt) s`, a relative fixed point `B_λ[w] = w + g` lifts to the
/// exact fixed point `u = w + g / (λ dt)`.
pub fn critical_value_ergodic_costs(
    graph: &EdgeGraph,
    costs: &[f64],
    lambda: f64,
    max_iters: usize,
    tol: f64,
) -> Result<ErgodicResult> {
    let dt = graph.dt();
    if lambda.is_nan() || lambda <= 0.0 {
        return config(format!("lambda must be positive, got {lambda}"));
    }
    if lambda * dt >= 1.0 {
        return config(format!("lambda·dt = {} must be < 1", lambda * dt));
    }
    let rho = 1.0 - lambda * dt;
    let apply = |u: &[f64]| -> Vec<f64> {
        (0..graph.node_count())
            .map(|x| {
                graph
                    .incoming(x)
                    .iter()
                    .map(|&e| rho * u[graph.edge(e).source] + dt * costs[e])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    };
    let n = graph.node_count();
    let mut w = vec![0.0; n];
    let mut g = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        let bw = apply(&w);
        g = bw[0];
        let next: Vec<f64> = bw.iter().map(|v| v - g).collect();
        let change = crate::field::sup_distance(&next, &w);
        w = next;
        if change <= tol * dt {
            converged = true;
            break;
        }
    }
    let shift = g / (lambda * dt);
    let u: Vec<f64> = w.iter().map(|v| v + shift).collect();
    let residual = crate::field::sup_distance(&u, &apply(&u));
    let field = GridField::new(*graph.grid(), u.iter().map(|v| -lambda * v).collect())?;
    Ok(ErgodicResult { field, iterations, converged, residual })
}

/// `{y : h(y,y) <= tol}`; errors when empty.
pub fn aubry_set(self_values: &[f64], tol: f64) -> Result<Vec<usize>> {
    let set: Vec<usize> = (0..self_values.len()).filter(|&y| self_values[y] <= tol).collect();
    if set.is_empty() {
        return Err(Error::Internal("Aubry set is empty".into()));
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakKamSolution {
    pub u: GridField,
    /// `sup |u - B_0[u]|` for the undiscounted backward operator.
    pub residual: f64,
}

/// `h(y, ·)` as a critical solution, together with its fixed-point residual.
pub fn weak_kam_solution(graph: &EdgeGraph, reduced: &[f64], barrier: &BarrierData) -> WeakKamSolution {
    let u = barrier.h.clone();
    let residual = crate::field::sup_distance(u.values(), &critical_operator(graph, reduced, u.values()));
    WeakKamSolution { u, residual }
}
