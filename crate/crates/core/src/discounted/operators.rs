use crate::grid::EdgeGraph;
use crate::models::ContactModel;

/// Backward/forward pair of the affine form
/// `B[u](x) = min over incoming e = (y → x) of α(y) u(y) + β(y) c(e)`.
///
/// The forward operator is its exact order adjoint,
/// `F[u](y) = max over outgoing e = (y → x) of (u(x) - β(y) c(e)) / α(y)`,
/// so that `F[u] <= w` holds exactly when `u <= B[w]`.
#[derive(Debug, Clone)]
pub struct AffineBellman<'g> {
    graph: &'g EdgeGraph,
    alpha: Vec<f64>,
    /// `β(source) c(e)` per edge.
    offset: Vec<f64>,
    // incoming slots, flattened per target node
    in_start: Vec<usize>,
    in_source: Vec<usize>,
    in_edge: Vec<usize>,
}

impl<'g> AffineBellman<'g> {
    /// `α`, `β` per node, `c` per edge.
    pub fn new(graph: &'g EdgeGraph, alpha: Vec<f64>, beta: &[f64], cost: &[f64]) -> Self {
        let offset = graph.edges().iter().zip(cost).map(|(e, c)| beta[e.source] * c).collect();
        let mut in_start = Vec::with_capacity(graph.node_count() + 1);
        let mut in_source = Vec::with_capacity(graph.edge_count());
        let mut in_edge = Vec::with_capacity(graph.edge_count());
        in_start.push(0);
        for x in 0..graph.node_count() {
            for &e in graph.incoming(x) {
                in_source.push(graph.edge(e).source);
                in_edge.push(e);
            }
            in_start.push(in_edge.len());
        }
        Self { graph, alpha, offset, in_start, in_source, in_edge }
    }

    /// Discounted step with weight `α(y) = e^{-λ a(y) dt}` on both `u(y)` and the cost.
    pub fn linear(graph: &'g EdgeGraph, lambda: f64, a: &[f64], reduced: &[f64]) -> Self {
        let dt = graph.dt();
        let alpha: Vec<f64> = a.iter().map(|ai| (-lambda * ai * dt).exp()).collect();
        let beta: Vec<f64> = alpha.iter().map(|al| al * dt).collect();
        Self::new(graph, alpha, &beta, reduced)
    }

    /// Undiscounted step `u(y) + dt (L + c0)`.
    pub fn critical(graph: &'g EdgeGraph, reduced: &[f64]) -> Self {
        let n = graph.node_count();
        Self::new(graph, vec![1.0; n], &vec![graph.dt(); n], reduced)
    }

    /// Euler-weighted step `(1 - λ dt) u(y) + dt L`.
    pub fn ergodic(graph: &'g EdgeGraph, lambda: f64, costs: &[f64]) -> Self {
        let n = graph.node_count();
        Self::new(graph, vec![1.0 - lambda * graph.dt(); n], &vec![graph.dt(); n], costs)
    }

    pub fn graph(&self) -> &'g EdgeGraph {
        self.graph
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `β(source) c(e)`.
    pub fn edge_offset(&self, e: usize) -> f64 {
        self.offset[e]
    }

    pub fn backward(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.backward_into(u, &mut out);
        out
    }

    pub(crate) fn backward_into(&self, u: &[f64], out: &mut [f64]) {
        for (x, slot) in out.iter_mut().enumerate() {
            let mut best = f64::INFINITY;
            for k in self.in_start[x]..self.in_start[x + 1] {
                let s = self.in_source[k];
                let cand = self.alpha[s] * u[s] + self.offset[self.in_edge[k]];
                if cand < best {
                    best = cand;
                }
            }
            *slot = best;
        }
    }

    /// Backward step with the minimizing incoming edge per node (lowest id on ties).
    pub fn backward_policy(&self, u: &[f64]) -> (Vec<f64>, Vec<usize>) {
        let n = u.len();
        let mut out = vec![f64::INFINITY; n];
        let mut policy = vec![0; n];
        for x in 0..n {
            for k in self.in_start[x]..self.in_start[x + 1] {
                let s = self.in_source[k];
                let cand = self.alpha[s] * u[s] + self.offset[self.in_edge[k]];
                if cand < out[x] {
                    out[x] = cand;
                    policy[x] = self.in_edge[k];
                }
            }
        }
        (out, policy)
    }

    pub fn forward(&self, u: &[f64]) -> Vec<f64> {
        self.forward_policy(u).0
    }

    /// Forward step with the maximizing outgoing edge per node (lowest id on ties).
    pub fn forward_policy(&self, u: &[f64]) -> (Vec<f64>, Vec<usize>) {
        let n = u.len();
        let mut out = vec![f64::NEG_INFINITY; n];
        let mut policy = vec![0; n];
        for y in 0..n {
            for e in self.graph.outgoing(y) {
                let cand = u[self.graph.edge(e).target] - self.offset[e];
                if cand > out[y] {
                    out[y] = cand;
                    policy[y] = e;
                }
            }
            out[y] /= self.alpha[y];
        }
        (out, policy)
    }

    /// `α(y) u(y) + β(y) c(e) - u(x)` per edge; nonnegative everywhere iff `u` is a subsolution.
    pub fn edge_slack(&self, u: &[f64]) -> Vec<f64> {
        self.graph
            .edges()
            .iter()
            .enumerate()
            .map(|(id, e)| self.alpha[e.source] * u[e.source] + self.offset[id] - u[e.target])
            .collect()
    }

    /// `sup |u - B[u]|`.
    pub fn residual(&self, u: &[f64]) -> f64 {
        crate::field::sup_distance(u, &self.backward(u))
    }
}

/// Picard operator `B[u](x) = min over incoming (y,v) of u(y) + dt (L_G(y, v, λ u(y)) + c0)`.
#[derive(Debug, Clone)]
pub struct ContactBellman<'g> {
    graph: &'g EdgeGraph,
    model: &'g ContactModel,
    lambda: f64,
    c0: f64,
    coords: Vec<[f64; crate::grid::MAX_DIM]>,
}

impl<'g> ContactBellman<'g> {
    pub fn new(graph: &'g EdgeGraph, model: &'g ContactModel, lambda: f64, c0: f64) -> Self {
        let coords = (0..graph.node_count()).map(|x| graph.grid().coords(x)).collect();
        Self { graph, model, lambda, c0, coords }
    }

    pub fn graph(&self) -> &'g EdgeGraph {
        self.graph
    }

    fn step(&self, u: &[f64], e: usize) -> f64 {
        let edge = self.graph.edge(e);
        let dim = self.graph.grid().dim();
        let x = &self.coords[edge.source][..dim];
        let uy = u[edge.source];
        uy + self.graph.dt() * (self.model.eval_lg(x, self.graph.velocity(e), self.lambda * uy) + self.c0)
    }

    pub fn backward(&self, u: &[f64]) -> Vec<f64> {
        self.backward_policy(u).0
    }

    pub fn backward_policy(&self, u: &[f64]) -> (Vec<f64>, Vec<usize>) {
        let n = u.len();
        let mut out = vec![f64::INFINITY; n];
        let mut policy = vec![0; n];
        for x in 0..n {
            for &e in self.graph.incoming(x) {
                let cand = self.step(u, e);
                if cand < out[x] {
                    out[x] = cand;
                    policy[x] = e;
                }
            }
        }
        (out, policy)
    }

    pub fn residual(&self, u: &[f64]) -> f64 {
        crate::field::sup_distance(u, &self.backward(u))
    }
}
