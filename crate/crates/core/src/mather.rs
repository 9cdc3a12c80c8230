//! Mather measures as solutions of the closed-measure linear program, extremal
//! queries over the Mather polytope, and discounted occupation measures.
//!
//! A measure is a nonnegative weight per edge. Closedness is flow conservation
//! at every node; the Mather polytope adds `Σ μ (L + c0) = 0`, imposed within
//! a band of half-width [`POLYTOPE_TOL`].

use crate::error::{Error, Result};
use crate::grid::EdgeGraph;
use crate::lp::{solve_lp, LinearProgram};
use crate::weakkam::closed_measure_rows;

pub const SUPPORT_TOL: f64 = 1e-12;
pub const POLYTOPE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Weights within `-1e-12` of zero are clamped to zero; anything more negative is rejected.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < -SUPPORT_TOL) {
            return Err(Error::Dimension(format!("invalid measure weight {} on edge {i}", weights[i])));
        }
        Ok(Self { weights: weights.into_iter().map(|w| w.max(0.0)).collect() })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&e| self.weights[e] > SUPPORT_TOL).collect()
    }

    /// Sorted nodes touched (as source or target) by the support.
    pub fn support_nodes(&self, graph: &EdgeGraph) -> Vec<usize> {
        let mut nodes: Vec<usize> = self
            .support()
            .into_iter()
            .flat_map(|e| {
                let edge = graph.edge(e);
                [edge.source, edge.target]
            })
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    pub fn integrate(&self, g: &[f64]) -> f64 {
        self.weights.iter().zip(g).map(|(w, v)| w * v).sum()
    }

    /// Largest `|out(x) - in(x)|` over nodes.
    pub fn flow_residual(&self, graph: &EdgeGraph) -> f64 {
        let mut balance = vec![0.0; graph.node_count()];
        for (e, w) in graph.edges().iter().zip(&self.weights) {
            balance[e.source] += w;
            balance[e.target] -= w;
        }
        balance.iter().fold(0.0, |acc, b| acc.max(b.abs()))
    }

    /// CSV with columns `node_i0[,node_i1],vel_k0[,vel_k1],weight` over the support.
    pub fn to_csv(&self, graph: &EdgeGraph) -> String {
        let dim = graph.grid().dim();
        let mut out = String::new();
        if dim == 1 {
            out.push_str("node_i0,vel_k0,weight\n");
        } else {
            out.push_str("node_i0,node_i1,vel_k0,vel_k1,weight\n");
        }
        for e in self.support() {
            let edge = graph.edge(e);
            let idx = graph.grid().axis_indices(edge.source);
            for i in &idx[..dim] {
                out.push_str(&format!("{i},"));
            }
            for k in graph.controls().offset(edge.velocity) {
                out.push_str(&format!("{k},"));
            }
            out.push_str(&format!("{}\n", self.weights[e]));
        }
        out
    }
}

/// Minimizes `Σ μ L` over closed probability measures; returns the witness and the value.
pub fn mather_lp(graph: &EdgeGraph, costs: &[f64]) -> Result<(DiscreteMeasure, f64)> {
    let lp = closed_measure_rows(graph, costs.to_vec())?;
    let sol = solve_lp(&lp)?.optimal().map_err(|e| Error::Internal(format!("Mather LP: {e}")))?;
    Ok((DiscreteMeasure::new(sol.primal)?, sol.value))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatherPolytopeQuery {
    /// `g(e)` per edge.
    pub functional: Vec<f64>,
    pub direction: Direction,
}

/// Closed probability measures with `|Σ μ (L + c0)| <= POLYTOPE_TOL`, over `extra`
/// additional trailing variables. Returns the program with zero objective.
fn polytope_program(graph: &EdgeGraph, costs: &[f64], c0: f64, extra: usize) -> Result<LinearProgram> {
    let e = graph.edge_count();
    let total = e + 2 + extra;
    let mut lp = LinearProgram::new(vec![0.0; total]);
    let base = closed_measure_rows(graph, vec![0.0; e])?;
    for i in 0..base.num_constraints() {
        let mut row = base.row(i).to_vec();
        row.resize(total, 0.0);
        lp.add_equality(row, base.rhs()[i])?;
    }
    let mut upper: Vec<f64> = costs.iter().map(|l| l + c0).collect();
    upper.resize(total, 0.0);
    let mut lower = upper.clone();
    upper[e] = 1.0;
    lower[e + 1] = -1.0;
    lp.add_equality(upper, POLYTOPE_TOL)?;
    lp.add_equality(lower, -POLYTOPE_TOL)?;
    Ok(lp)
}

fn with_objective(lp: &LinearProgram, objective: Vec<f64>) -> Result<LinearProgram> {
    let mut out = LinearProgram::new(objective);
    for i in 0..lp.num_constraints() {
        out.add_equality(lp.row(i).to_vec(), lp.rhs()[i])?;
    }
    Ok(out)
}

/// Extremal value of `Σ μ g` over the Mather polytope and an extremal measure.
pub fn polytope_extremum(
    graph: &EdgeGraph,
    costs: &[f64],
    c0: f64,
    query: &MatherPolytopeQuery,
) -> Result<(f64, DiscreteMeasure)> {
    let e = graph.edge_count();
    if query.functional.len() != e {
        return Err(Error::Dimension(format!(
            "functional has {} entries, graph has {e} edges",
            query.functional.len()
        )));
    }
    let sign = match query.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    let mut objective: Vec<f64> = query.functional.iter().map(|g| sign * g).collect();
    objective.extend([0.0, 0.0]);
    let lp = with_objective(&polytope_program(graph, costs, c0, 0)?, objective)?;
    let sol = solve_lp(&lp)?.optimal().map_err(|err| Error::Internal(format!("Mather polytope: {err}")))?;
    let measure = DiscreteMeasure::new(sol.primal[..e].to_vec())?;
    Ok((measure.integrate(&query.functional), measure))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub holds: bool,
    pub margin: f64,
    pub witness: DiscreteMeasure,
}

/// Positivity of `∫ a dμ` on every Mather measure; `a` holds `a(source)` per edge.
pub fn check_condition_a1(graph: &EdgeGraph, costs: &[f64], c0: f64, a: &[f64]) -> Result<ConditionCheck> {
    let query = MatherPolytopeQuery { functional: a.to_vec(), direction: Direction::Minimize };
    let (margin, witness) = polytope_extremum(graph, costs, c0, &query)?;
    Ok(ConditionCheck { holds: margin > 0.0, margin, witness })
}

/// Negativity of `∫ ∂L_G/∂u(·,·,0) dμ` on every Mather measure; the margin is `-max`.
pub fn check_condition_l5(graph: &EdgeGraph, costs: &[f64], c0: f64, dlg: &[f64]) -> Result<ConditionCheck> {
    let query = MatherPolytopeQuery { functional: dlg.to_vec(), direction: Direction::Maximize };
    let (max, witness) = polytope_extremum(graph, costs, c0, &query)?;
    Ok(ConditionCheck { holds: max < 0.0, margin: -max, witness })
}

/// Whether every node touched by the support lies in `aubry` (sorted or not).
pub fn projected_mather_in_aubry(graph: &EdgeGraph, measure: &DiscreteMeasure, aubry: &[usize]) -> bool {
    measure.support_nodes(graph).iter().all(|x| aubry.contains(x))
}

/// Occupation measure of a backward-extracted trajectory.
///
/// `trajectory[0]` is the terminal node and `trajectory[k + 1] -> trajectory[k]`
/// is the k-th edge going back in time. The k-th edge gets weight proportional
/// to `exp(λ dt Σ_{j<=k} g_j)` with `g = ∂L_G/∂u(·,·,0)` per edge.
pub fn discounted_occupation(
    graph: &EdgeGraph,
    trajectory: &[usize],
    lambda: f64,
    dlg: &[f64],
) -> Result<DiscreteMeasure> {
    if trajectory.len() < 2 {
        return Err(Error::Config("trajectory needs at least two nodes".into()));
    }
    let dt = graph.dt();
    let mut exponents = Vec::with_capacity(trajectory.len() - 1);
    let mut edges = Vec::with_capacity(trajectory.len() - 1);
    let mut acc = 0.0;
    for k in 0..trajectory.len() - 1 {
        let e = graph
            .edge_between(trajectory[k + 1], trajectory[k])
            .ok_or_else(|| Error::Config(format!("trajectory step {k} is not a hop")))?;
        acc += lambda * dt * dlg[e];
        exponents.push(acc);
        edges.push(e);
    }
    let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weights = vec![0.0; graph.edge_count()];
    for (e, x) in edges.iter().zip(&exponents) {
        weights[*e] += (x - top).exp();
    }
    let mass: f64 = weights.iter().sum();
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Internal("occupation weights vanish".into()));
    }
    DiscreteMeasure::new(weights.into_iter().map(|w| w / mass).collect())
}

/// Total-variation distance `½ Σ |μ - ν|` from a probability measure to the Mather polytope.
///
/// Solved as `1 - max Σ_e t_e` with `t_e <= μ_e`, `t_e <= ν_e` over the support of `μ`.
pub fn tv_distance_to_polytope(graph: &EdgeGraph, costs: &[f64], c0: f64, measure: &DiscreteMeasure) -> Result<f64> {
    let e = graph.edge_count();
    let support = measure.support();
    let s = support.len();
    // layout: ν (e), band slacks (2), t (s), slack of t <= μ (s), slack of t <= ν (s)
    let total = e + 2 + 3 * s;
    let base = polytope_program(graph, costs, c0, 3 * s)?;
    let mut objective = vec![0.0; total];
    for k in 0..s {
        objective[e + 2 + k] = -1.0;
    }
    let mut lp = with_objective(&base, objective)?;
    for (k, &edge) in support.iter().enumerate() {
        let t = e + 2 + k;
        lp.add_sparse_equality(&[(t, 1.0), (e + 2 + s + k, 1.0)], measure.weights()[edge])?;
        lp.add_sparse_equality(&[(t, 1.0), (edge, -1.0), (e + 2 + 2 * s + k, 1.0)], 0.0)?;
    }
    let sol = solve_lp(&lp)?.optimal().map_err(|err| Error::Internal(format!("TV projection: {err}")))?;
    Ok((measure.mass() + sol.value).max(0.0))
}
