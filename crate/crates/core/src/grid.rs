//! Periodic grids on the flat tori T¹ and T², node-to-node control sets, and
//! the edge graph that every Bellman operator and linear program lives on.
//!
//! Coordinates are dimensionless in `[0, 1)`. Node indices are linear, with the
//! first axis varying fastest: `index = i0 + n * i1`. Velocities are integer hop
//! offsets `k` with `|k_j| <= m`, so each hop `x + v dt` lands exactly on a node.

use crate::error::{config, Result};

/// Largest point dimension handled by the crate.
pub const MAX_DIM: usize = 2;

/// A coordinate or velocity vector; only the first `dim` entries are meaningful.
pub type Point = [f64; MAX_DIM];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
}

impl TorusGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn node_count(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Per-axis integer indices of a node.
    pub fn axis_indices(&self, node: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        let mut rest = node;
        for slot in out.iter_mut().take(self.dim) {
            *slot = rest % self.n;
            rest /= self.n;
        }
        out
    }

    pub fn node_from_axis(&self, idx: &[usize]) -> usize {
        idx.iter()
            .take(self.dim)
            .rev()
            .fold(0, |acc, &i| acc * self.n + (i % self.n))
    }

    pub fn coords(&self, node: usize) -> Point {
        let idx = self.axis_indices(node);
        let mut x = [0.0; MAX_DIM];
        for j in 0..self.dim {
            x[j] = idx[j] as f64 * self.dx();
        }
        x
    }

    /// Nearest node to an arbitrary point of the torus.
    pub fn nearest_node(&self, x: &[f64]) -> usize {
        let mut idx = [0usize; MAX_DIM];
        for j in 0..self.dim {
            let r = (x[j].rem_euclid(1.0) * self.n as f64).round() as usize;
            idx[j] = r % self.n;
        }
        self.node_from_axis(&idx[..self.dim])
    }

    /// Node reached from `node` by the integer offset `k` (periodic per axis).
    pub fn shift(&self, node: usize, k: &[i32]) -> usize {
        let idx = self.axis_indices(node);
        let n = self.n as i64;
        let mut out = [0usize; MAX_DIM];
        for j in 0..self.dim {
            out[j] = (idx[j] as i64 + k[j] as i64).rem_euclid(n) as usize;
        }
        self.node_from_axis(&out[..self.dim])
    }
}

/// Builds a uniform periodic grid with `dx = 1/n`.
pub fn make_grid(dim: usize, n: usize) -> Result<TorusGrid> {
    if !(1..=MAX_DIM).contains(&dim) {
        return config(format!("dim must be 1 or 2, got {dim}"));
    }
    if n < 4 {
        return config(format!("n must be >= 4, got {n}"));
    }
    Ok(TorusGrid { dim, n })
}

/// Integer hop offsets with radius `m` and their physical velocities `k dx / dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSet {
    dt: f64,
    radius: usize,
    dim: usize,
    offsets: Vec<[i32; MAX_DIM]>,
    velocities: Vec<Point>,
    zero: usize,
}

impl ControlSet {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offset(&self, j: usize) -> &[i32] {
        &self.offsets[j][..self.dim]
    }

    pub fn velocity(&self, j: usize) -> &[f64] {
        &self.velocities[j][..self.dim]
    }

    /// Index of the rest velocity.
    pub fn zero_index(&self) -> usize {
        self.zero
    }

    /// Largest per-axis hop speed `m dx / dt`.
    pub fn max_speed(&self) -> f64 {
        self.velocities
            .iter()
            .flat_map(|v| v[..self.dim].iter())
            .fold(0.0_f64, |acc, s| acc.max(s.abs()))
    }

    /// Index of the velocity `-v`.
    pub fn reverse_index(&self, j: usize) -> usize {
        let side = 2 * self.radius + 1;
        let mut idx = 0;
        for axis in (0..self.dim).rev() {
            let k = -self.offsets[j][axis];
            idx = idx * side + (k + self.radius as i32) as usize;
        }
        idx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub velocity: usize,
    pub target: usize,
}

/// Complete hop graph: every node has one outgoing edge per velocity.
///
/// Edge ids are `source * velocity_count + velocity`, so the outgoing edges of a
/// node form a contiguous range. Incoming lists are sorted by edge id.
#[derive(Debug, Clone)]
pub struct EdgeGraph {
    grid: TorusGrid,
    controls: ControlSet,
    edges: Vec<Edge>,
    incoming: Vec<Vec<usize>>,
}

impl EdgeGraph {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn controls(&self) -> &ControlSet {
        &self.controls
    }

    pub fn dt(&self) -> f64 {
        self.controls.dt
    }

    pub fn node_count(&self) -> usize {
        self.grid.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn edge_id(&self, source: usize, velocity: usize) -> usize {
        source * self.controls.len() + velocity
    }

    pub fn outgoing(&self, node: usize) -> std::ops::Range<usize> {
        let v = self.controls.len();
        node * v..(node + 1) * v
    }

    pub fn incoming(&self, node: usize) -> &[usize] {
        &self.incoming[node]
    }

    /// The unique edge from `source` to `target`, if the hop exists.
    pub fn edge_between(&self, source: usize, target: usize) -> Option<usize> {
        self.outgoing(source).find(|&e| self.edges[e].target == target)
    }

    /// Velocity vector carried by an edge.
    pub fn velocity(&self, id: usize) -> &[f64] {
        self.controls.velocity(self.edges[id].velocity)
    }

    /// Evaluates `f(x_source, v)` on every edge, in edge-id order.
    pub fn map_edges<F: FnMut(&[f64], &[f64]) -> f64>(&self, mut f: F) -> Vec<f64> {
        let dim = self.grid.dim;
        self.edges
            .iter()
            .map(|e| {
                let x = self.grid.coords(e.source);
                f(&x[..dim], self.controls.velocity(e.velocity))
            })
            .collect()
    }

    /// Rest (zero-velocity) edge at a node.
    pub fn rest_edge(&self, node: usize) -> usize {
        self.edge_id(node, self.controls.zero)
    }
}

/// Builds the hop graph with time step `dt` and radius `m`.
pub fn build_edge_graph(grid: &TorusGrid, dt: f64, m: usize) -> Result<EdgeGraph> {
    if !(dt.is_finite() && dt > 0.0) {
        return config(format!("dt must be positive, got {dt}"));
    }
    if m == 0 {
        return config("control radius m must be >= 1");
    }
    if 2 * m >= grid.n {
        return config(format!(
            "control radius m = {m} must satisfy m < n/2 = {}",
            grid.n as f64 / 2.0
        ));
    }
    let dim = grid.dim;
    let side = 2 * m + 1;
    let count = side.pow(dim as u32);
    let mut offsets = Vec::with_capacity(count);
    let mut velocities = Vec::with_capacity(count);
    for j in 0..count {
        let mut k = [0i32; MAX_DIM];
        let mut v = [0.0; MAX_DIM];
        let mut rest = j;
        for axis in 0..dim {
            k[axis] = (rest % side) as i32 - m as i32;
            rest /= side;
            v[axis] = k[axis] as f64 * grid.dx() / dt;
        }
        offsets.push(k);
        velocities.push(v);
    }
    let zero = (0..dim).fold(0, |acc, _| acc * side + m);
    let controls = ControlSet { dt, radius: m, dim, offsets, velocities, zero };

    let nodes = grid.node_count();
    let mut edges = Vec::with_capacity(nodes * count);
    let mut incoming = vec![Vec::with_capacity(count); nodes];
    for source in 0..nodes {
        for velocity in 0..count {
            let target = grid.shift(source, controls.offset(velocity));
            incoming[target].push(edges.len());
            edges.push(Edge { source, velocity, target });
        }
    }
    Ok(EdgeGraph { grid: *grid, controls, edges, incoming })
}
