//! The vanishing-discount limit `u0`, computed two ways, the integral condition
//! it satisfies on Mather measures, and the classifier for solution families.

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::grid::EdgeGraph;
use crate::lp::{solve_lp, LinearProgram, LpStatus};
use crate::mather::{polytope_extremum, Direction, DiscreteMeasure, MatherPolytopeQuery, POLYTOPE_TOL};
use crate::weakkam::BarrierMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMethod {
    FractionalLp,
    Extrapolation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitSolution {
    pub u0: GridField,
    pub method: LimitMethod,
    /// Minimizing Mather measure per node (fractional LP only).
    pub witnesses: Vec<DiscreteMeasure>,
    /// Consecutive sup-gaps `‖u_{λ_k} - u_{λ_{k+1}}‖∞` (extrapolation only).
    pub gaps: Vec<f64>,
    /// Whether the last three gaps are non-increasing (always true for the LP).
    pub cauchy: bool,
}

/// Whether `∂L_G/∂u(·,·,0) <= 0` on every edge of the support.
pub fn pointwise_nonpositive(measure: &DiscreteMeasure, dlg: &[f64]) -> bool {
    measure.support().iter().all(|&e| dlg[e] <= 0.0)
}

/// Edges lying on a zero-cost cycle: `dt (L + c0)(e) + h(target, source) <= tol`.
///
/// A closed measure with zero reduced action decomposes into zero-cost cycles,
/// so the Mather measures are exactly the closed probability measures on these edges.
pub fn zero_cycle_edges(graph: &EdgeGraph, costs: &[f64], c0: f64, barriers: &BarrierMatrix, tol: f64) -> Vec<usize> {
    let dt = graph.dt();
    graph
        .edges()
        .iter()
        .enumerate()
        .filter(|(id, e)| dt * (costs[*id] + c0) + barriers.get(e.target, e.source) <= tol)
        .map(|(id, _)| id)
        .collect()
}

/// Tolerance on cycle costs when selecting the Mather edges.
pub const CYCLE_TOL: f64 = 1e-6;

/// `u0(x) = inf over Mather μ of Σ h(y,x) g μ / Σ g μ`, `g = ∂L_G/∂u(·,·,0)` per edge.
///
/// With `ĝ = -g` and the substitution `ν = μ / Σ ĝ μ`, each node solves
/// `min Σ h(y,x) ĝ(e) ν(e)` over `ν >= 0` with homogeneous flow conservation,
/// `Σ ĝ ν = 1` and `|Σ (L + c0) ν| <= 1e-8`. Columns are restricted to
/// [`zero_cycle_edges`], which carries every Mather measure.
pub fn u0_fractional_lp(
    graph: &EdgeGraph,
    costs: &[f64],
    c0: f64,
    barriers: &BarrierMatrix,
    dlg: &[f64],
) -> Result<LimitSolution> {
    let e = graph.edge_count();
    let n = graph.node_count();
    let cols = zero_cycle_edges(graph, costs, c0, barriers, CYCLE_TOL);
    let k = cols.len();
    let total = k + 2;
    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for x in 0..n {
        let mut terms = Vec::new();
        for (j, &id) in cols.iter().enumerate() {
            let edge = graph.edge(id);
            if edge.source == x && edge.target != x {
                terms.push((j, 1.0));
            } else if edge.target == x && edge.source != x {
                terms.push((j, -1.0));
            }
        }
        if !terms.is_empty() {
            rows.push((terms, 0.0));
        }
    }
    rows.push((cols.iter().enumerate().map(|(j, &id)| (j, -dlg[id])).collect(), 1.0));
    let action: Vec<(usize, f64)> = cols.iter().enumerate().map(|(j, &id)| (j, costs[id] + c0)).collect();
    let mut upper = action.clone();
    upper.push((k, 1.0));
    let mut lower = action;
    lower.push((k + 1, -1.0));
    rows.push((upper, POLYTOPE_TOL));
    rows.push((lower, -POLYTOPE_TOL));

    let mut values = Vec::with_capacity(n);
    let mut witnesses = Vec::with_capacity(n);
    for x in 0..n {
        let mut objective: Vec<f64> =
            cols.iter().map(|&id| -barriers.get(graph.edge(id).source, x) * dlg[id]).collect();
        objective.extend([0.0, 0.0]);
        let mut lp = LinearProgram::new(objective);
        for (terms, rhs) in &rows {
            lp.add_sparse_equality(terms, *rhs)?;
        }
        debug_assert_eq!(lp.num_vars(), total);
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                return Err(Error::Internal(format!(
                    "fractional LP infeasible at node {x}: ∂L_G/∂u(·,·,0) does not have a strict sign on Mather measures"
                )))
            }
            LpStatus::Unbounded => {
                return Err(Error::Internal(format!("fractional LP unbounded at node {x}")));
            }
        }
        values.push(sol.value);
        let mass: f64 = sol.primal[..k].iter().sum();
        let mut weights = vec![0.0; e];
        for (j, &id) in cols.iter().enumerate() {
            weights[id] = sol.primal[j] / mass;
        }
        witnesses.push(DiscreteMeasure::new(weights)?);
    }
    Ok(LimitSolution {
        u0: GridField::new(*graph.grid(), values)?,
        method: LimitMethod::FractionalLp,
        witnesses,
        gaps: Vec::new(),
        cauchy: true,
    })
}

/// Gaps at or below this level are solver noise and count as zero in monotonicity checks.
pub const GAP_FLOOR: f64 = 1e-6;

/// Whether the last `steps` steps of `seq` are non-increasing, treating values `<= GAP_FLOOR` as zero.
pub fn tail_non_increasing(seq: &[f64], steps: usize) -> bool {
    if seq.len() < steps + 1 {
        return false;
    }
    let floor = |v: f64| if v <= GAP_FLOOR { 0.0 } else { v };
    seq[seq.len() - steps - 1..]
        .windows(2)
        .all(|w| floor(w[1]) <= floor(w[0]) + 1e-12 * (1.0 + w[0].abs()))
}

/// `u0 ≈ u_{λ_K}` with the Cauchy certificate of the schedule.
///
/// `solutions` must follow the decreasing schedule. The sequence of gaps must be
/// non-increasing over its last three steps for `cauchy` to hold.
pub fn u0_by_extrapolation(solutions: &[GridField]) -> Result<LimitSolution> {
    let Some(last) = solutions.last() else {
        return Err(Error::Config("extrapolation needs at least one solution".into()));
    };
    let gaps: Vec<f64> = solutions.windows(2).map(|w| w[0].sup_distance(&w[1])).collect();
    let cauchy = tail_non_increasing(&gaps, 3);
    Ok(LimitSolution { u0: last.clone(), method: LimitMethod::Extrapolation, witnesses: Vec::new(), gaps, cauchy })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionS {
    pub holds: bool,
    pub margin: f64,
}

/// `min over Mather μ of Σ w(y) g(e) μ(e)`; the condition holds when the margin is `>= -1e-8`.
pub fn check_condition_s(graph: &EdgeGraph, costs: &[f64], c0: f64, w: &[f64], dlg: &[f64]) -> Result<ConditionS> {
    let functional: Vec<f64> = graph.edges().iter().zip(dlg).map(|(e, g)| w[e.source] * g).collect();
    let query = MatherPolytopeQuery { functional, direction: Direction::Minimize };
    let (margin, _) = polytope_extremum(graph, costs, c0, &query)?;
    Ok(ConditionS { holds: margin >= -1e-8, margin })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converges,
    DivergesPlus,
    DivergesMinus,
    Undetermined,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Converges => "Converges",
            Verdict::DivergesPlus => "DivergesPlus",
            Verdict::DivergesMinus => "DivergesMinus",
            Verdict::Undetermined => "Undetermined",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Convergence radius around `u0`.
    pub theta: f64,
    /// Divergence level.
    pub big_theta: f64,
}

impl Thresholds {
    /// `θ = 5 (dx + λ_min)`, `Θ = 10 (1 + ‖u0‖∞)`.
    pub fn defaults(dx: f64, lambda_min: f64, u0: &GridField) -> Self {
        Self { theta: 5.0 * (dx + lambda_min), big_theta: 10.0 * (1.0 + u0.sup_norm()) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyDiagnostics {
    pub lambdas: Vec<f64>,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    pub gaps: Vec<f64>,
    /// Running `max_{j<=k} max v_j` and `min_{j<=k} min v_j`.
    pub upper_envelope: Vec<f64>,
    pub lower_envelope: Vec<f64>,
    pub verdict: Verdict,
    pub thresholds: Thresholds,
}

impl FamilyDiagnostics {
    /// Rows `family,lambda,min,max,sup_gap_to_u0,verdict` (no header).
    pub fn csv_rows(&self, family: &str) -> String {
        let mut out = String::new();
        for k in 0..self.lambdas.len() {
            out.push_str(&format!(
                "{family},{},{},{},{},{}\n",
                self.lambdas[k], self.mins[k], self.maxs[k], self.gaps[k], self.verdict
            ));
        }
        out
    }

    pub fn spreads(&self) -> Vec<f64> {
        self.maxs.iter().zip(&self.mins).map(|(a, b)| a - b).collect()
    }
}

fn strictly_decreasing(seq: &[f64]) -> bool {
    seq.windows(2).all(|w| w[1] < w[0])
}

/// Classifies a family over a decreasing λ schedule (at least four values).
pub fn classify_family(
    lambdas: &[f64],
    family: &[GridField],
    u0: &GridField,
    thresholds: Thresholds,
) -> Result<FamilyDiagnostics> {
    if lambdas.len() != family.len() {
        return Err(Error::Dimension("one solution per λ required".into()));
    }
    if lambdas.len() < 4 || lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("classification needs at least 4 strictly decreasing λ values".into()));
    }
    let mins: Vec<f64> = family.iter().map(GridField::min).collect();
    let maxs: Vec<f64> = family.iter().map(GridField::max).collect();
    let gaps: Vec<f64> = family.iter().map(|v| v.sup_distance(u0)).collect();
    let mut upper_envelope = Vec::with_capacity(maxs.len());
    let mut lower_envelope = Vec::with_capacity(mins.len());
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for (a, b) in maxs.iter().zip(&mins) {
        hi = hi.max(*a);
        lo = lo.min(*b);
        upper_envelope.push(hi);
        lower_envelope.push(lo);
    }
    let last = lambdas.len() - 1;
    let neg_mins: Vec<f64> = mins.iter().map(|v| -v).collect();
    let verdict = if gaps[last] <= thresholds.theta && tail_non_increasing(&gaps, 3) {
        Verdict::Converges
    } else if strictly_decreasing(&maxs) && maxs[last] <= -thresholds.big_theta {
        Verdict::DivergesMinus
    } else if strictly_decreasing(&neg_mins) && mins[last] >= thresholds.big_theta {
        Verdict::DivergesPlus
    } else {
        Verdict::Undetermined
    };
    Ok(FamilyDiagnostics {
        lambdas: lambdas.to_vec(),
        mins,
        maxs,
        gaps,
        upper_envelope,
        lower_envelope,
        verdict,
        thresholds,
    })
}
