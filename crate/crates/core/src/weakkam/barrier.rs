use crate::error::{Error, Result};
use crate::field::GridField;
use crate::grid::EdgeGraph;

/// Window `[burn_in, horizon]` of step counts over which the discrete liminf is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BarrierWindow {
    pub burn_in: usize,
    pub horizon: usize,
}

impl BarrierWindow {
    /// `[4N, 8N]` for `N` nodes.
    pub fn for_nodes(nodes: usize) -> Self {
        Self { burn_in: 4 * nodes, horizon: 8 * nodes }
    }

    pub fn validate(&self, nodes: usize) -> Result<()> {
        if self.burn_in < nodes || self.horizon <= self.burn_in {
            return Err(Error::Config(format!(
                "barrier window needs horizon > burn_in >= node count ({nodes}), got [{}, {}]",
                self.burn_in, self.horizon
            )));
        }
        Ok(())
    }
}

/// Barrier `h(y, ·)` from one source.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierData {
    pub source: usize,
    pub h: GridField,
    pub self_value: f64,
    pub window: BarrierWindow,
}

/// Single-source barrier by the vector min-plus recursion with step cost `dt·(L + c0)`.
///
/// `reduced` holds `L + c0` per edge.
pub fn peierls_barrier(graph: &EdgeGraph, reduced: &[f64], source: usize, window: BarrierWindow) -> Result<BarrierData> {
    let nodes = graph.node_count();
    window.validate(nodes)?;
    if source >= nodes {
        return Err(Error::Dimension(format!("source node {source} out of range")));
    }
    let dt = graph.dt();
    let step: Vec<f64> = reduced.iter().map(|l| dt * l).collect();
    let mut h = vec![f64::INFINITY; nodes];
    h[source] = 0.0;
    let mut next = vec![0.0; nodes];
    let mut running = vec![f64::INFINITY; nodes];
    for k in 1..=window.horizon {
        for (x, slot) in next.iter_mut().enumerate() {
            *slot = graph
                .incoming(x)
                .iter()
                .map(|&e| h[graph.edge(e).source] + step[e])
                .fold(f64::INFINITY, f64::min);
        }
        std::mem::swap(&mut h, &mut next);
        if k >= window.burn_in {
            for (r, v) in running.iter_mut().zip(&h) {
                *r = r.min(*v);
            }
        }
    }
    let field = GridField::new(*graph.grid(), running)?;
    Ok(BarrierData { source, self_value: field.get(source), h: field, window })
}

/// All-pairs barriers `h(y, x)` stored row-major by source.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierMatrix {
    nodes: usize,
    values: Vec<f64>,
    window: BarrierWindow,
}

impl BarrierMatrix {
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn window(&self) -> BarrierWindow {
        self.window
    }

    pub fn get(&self, source: usize, target: usize) -> f64 {
        self.values[source * self.nodes + target]
    }

    pub fn row(&self, source: usize) -> &[f64] {
        &self.values[source * self.nodes..(source + 1) * self.nodes]
    }

    pub fn self_values(&self) -> Vec<f64> {
        (0..self.nodes).map(|y| self.get(y, y)).collect()
    }

    pub fn barrier(&self, graph: &EdgeGraph, source: usize) -> Result<BarrierData> {
        let h = GridField::new(*graph.grid(), self.row(source).to_vec())?;
        Ok(BarrierData { source, self_value: self.get(source, source), h, window: self.window })
    }

    /// Largest violation of `h(x,z) <= h(x,y) + h(y,z)` over all triples.
    pub fn triangle_violation(&self) -> f64 {
        let n = self.nodes;
        let mut worst = f64::NEG_INFINITY;
        for x in 0..n {
            for y in 0..n {
                let hxy = self.get(x, y);
                for z in 0..n {
                    worst = worst.max(self.get(x, z) - hxy - self.get(y, z));
                }
            }
        }
        worst
    }
}

/// Dense min-plus matrix product `a ⊗ b`; `+∞` entries of `a` are skipped.
fn min_plus(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![f64::INFINITY; n * n];
    for i in 0..n {
        let row = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == f64::INFINITY {
                continue;
            }
            for (o, bkj) in row.iter_mut().zip(&b[k * n..(k + 1) * n]) {
                let c = aik + bkj;
                if c < *o {
                    *o = c;
                }
            }
        }
    }
    out
}

fn min_plus_power(base: &[f64], mut exp: usize, n: usize) -> Vec<f64> {
    let mut result = vec![f64::INFINITY; n * n];
    for i in 0..n {
        result[i * n + i] = 0.0;
    }
    let mut square = base.to_vec();
    while exp > 0 {
        if exp & 1 == 1 {
            result = min_plus(&result, &square, n);
        }
        exp >>= 1;
        if exp > 0 {
            square = min_plus(&square, &square, n);
        }
    }
    result
}

/// All-sources barriers via `P^{T_b} ⊗ (I ⊕ P)^{T_h - T_b}`, `P` the one-step cost matrix.
pub fn all_barriers(graph: &EdgeGraph, reduced: &[f64], window: BarrierWindow) -> Result<BarrierMatrix> {
    let n = graph.node_count();
    window.validate(n)?;
    let dt = graph.dt();
    let mut p = vec![f64::INFINITY; n * n];
    for (e, edge) in graph.edges().iter().enumerate() {
        let slot = &mut p[edge.source * n + edge.target];
        *slot = slot.min(dt * reduced[e]);
    }
    let mut lazy = p.clone();
    for i in 0..n {
        lazy[i * n + i] = lazy[i * n + i].min(0.0);
    }
    let head = min_plus_power(&p, window.burn_in, n);
    let tail = min_plus_power(&lazy, window.horizon - window.burn_in, n);
    let values = min_plus(&head, &tail, n);
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Internal(format!("barrier entry {i} is not finite; graph not strongly connected?")));
    }
    Ok(BarrierMatrix { nodes: n, values, window })
}
