#![allow(dead_code, clippy::too_many_arguments, clippy::needless_range_loop)]

use kamlab::grid::{build_edge_graph, make_grid, EdgeGraph};
use kamlab::lp::LinearProgram;
use kamlab::models::{LagrangianModel, LagrangianTable, Potential, PotentialSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn graph_1d(n: usize, m: usize) -> EdgeGraph {
    let g = make_grid(1, n).unwrap();
    build_edge_graph(&g, g.dx(), m).unwrap()
}

pub fn mechanical(graph: &EdgeGraph, spec: PotentialSpec) -> LagrangianModel {
    LagrangianModel::Mechanical { potential: Potential::new(spec, graph.grid()).unwrap() }
}

pub fn cos_potential() -> PotentialSpec {
    PotentialSpec::cosine(1.0, 1.0, 0.0, 0.0)
}

/// Raw uniform costs in `[-1, 1]`.
pub fn random_costs(graph: &EdgeGraph, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..graph.edge_count()).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Table model convex in `v`: `b(x) + c(x) v + q(x) v²` with `q > 0`.
pub fn random_table(graph: &EdgeGraph, seed: u64) -> LagrangianModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = graph.node_count();
    let coeffs: Vec<(f64, f64, f64)> = (0..nodes)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5), rng.gen_range(0.1..1.0)))
        .collect();
    let values = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(id, e)| {
            let (b, c, q) = coeffs[e.source];
            let v: f64 = graph.velocity(id).iter().sum();
            let v2: f64 = graph.velocity(id).iter().map(|s| s * s).sum();
            b + c * v + q * v2
        })
        .collect();
    LagrangianModel::Table(LagrangianTable::new(graph, values).unwrap())
}

/// Minimum mean over all simple cycles, by exhaustive DFS.
pub fn brute_force_min_mean(graph: &EdgeGraph, costs: &[f64]) -> f64 {
    fn dfs(
        graph: &EdgeGraph,
        costs: &[f64],
        start: usize,
        node: usize,
        on_path: &mut Vec<bool>,
        total: f64,
        len: usize,
        best: &mut f64,
    ) {
        for e in graph.outgoing(node) {
            let t = graph.edge(e).target;
            let c = total + costs[e];
            if t == start {
                *best = best.min(c / (len + 1) as f64);
            } else if t > start && !on_path[t] {
                on_path[t] = true;
                dfs(graph, costs, start, t, on_path, c, len + 1, best);
                on_path[t] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut on_path = vec![false; graph.node_count()];
    for s in 0..graph.node_count() {
        on_path[s] = true;
        dfs(graph, costs, s, s, &mut on_path, 0.0, 0, &mut best);
        on_path[s] = false;
    }
    best
}

/// Solves the square system by Gaussian elimination with partial pivoting.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            for j in col..n {
                a[i][j] -= f * a[col][j];
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Minimum of `cᵀx` over all basic feasible solutions.
pub fn vertex_minimum(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let m = b.len();
    let mut best: Option<f64> = None;
    for cols in subsets(c.len(), m) {
        let basis: Vec<Vec<f64>> = a.iter().map(|row| cols.iter().map(|&j| row[j]).collect()).collect();
        if let Some(xb) = solve_square(basis, b.to_vec()) {
            if xb.iter().all(|&v| v >= -1e-10) {
                let value: f64 = cols.iter().zip(&xb).map(|(&j, v)| c[j] * v).sum();
                best = Some(best.map_or(value, |bv: f64| bv.min(value)));
            }
        }
    }
    best
}

/// Feasible bounded program: 6 variables, 3 rows, one of them all ones.
pub fn random_program(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let n = 6;
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let mut a = vec![vec![1.0; n]];
    for _ in 0..2 {
        a.push((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }
    let b = a.iter().map(|row| row.iter().zip(&x0).map(|(r, x)| r * x).sum()).collect();
    (c, a, b)
}

pub fn program(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LinearProgram {
    let mut lp = LinearProgram::new(c.to_vec());
    for (row, &bi) in a.iter().zip(b) {
        lp.add_equality(row.clone(), bi).unwrap();
    }
    lp
}

/// Pointwise minimum of randomly lowered copies of `base` rows.
pub fn random_subsolution(rng: &mut ChaCha8Rng, base: &[Vec<f64>]) -> Vec<f64> {
    let n = base[0].len();
    let mut u = vec![f64::INFINITY; n];
    for row in base {
        let shift = rng.gen_range(0.0..2.0);
        for (slot, v) in u.iter_mut().zip(row) {
            *slot = slot.min(v - shift);
        }
    }
    u
}
