//! Hamiltonian, Lagrangian and contact-model catalogue.
//!
//! Built-in models carry closed-form Lagrangians. Table models sample `L` on
//! the hops of an [`EdgeGraph`] and take `H` as the discrete convex conjugate
//! of those samples, so the Fenchel inequality holds on them by construction.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{config, Error, Result};
use crate::grid::{EdgeGraph, Point, TorusGrid, MAX_DIM};

/// A scalar field on the torus: potentials `V` and discount coefficients `a`.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `offset + amplitude * cos(2π frequency (x₀ - phase))`.
    Cosine { amplitude: f64, frequency: f64, phase: f64, offset: f64 },
    /// `offset + amplitude * Σ_j cos(2π frequency (x_j - phase))`.
    SumOfCosines { amplitude: f64, frequency: f64, phase: f64, offset: f64 },
    /// One sample per node.
    Table(Vec<f64>),
}

impl PotentialSpec {
    pub fn cosine(amplitude: f64, frequency: f64, phase: f64, offset: f64) -> Self {
        PotentialSpec::Cosine { amplitude, frequency, phase, offset }
    }

    pub fn constant(value: f64) -> Self {
        PotentialSpec::cosine(0.0, 0.0, 0.0, value)
    }

    /// Reads a table: one value per non-empty line.
    pub fn from_table_file(path: &Path, grid: &TorusGrid) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::parse_table(&text, grid)
    }

    pub fn parse_table(text: &str, grid: &TorusGrid) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::Config(format!("table line {}: not a number: {line:?}", lineno + 1)))?;
            if !v.is_finite() {
                return config(format!("table line {}: non-finite value", lineno + 1));
            }
            values.push(v);
        }
        if values.len() != grid.node_count() {
            return config(format!(
                "table has {} values, grid has {} nodes",
                values.len(),
                grid.node_count()
            ));
        }
        Ok(PotentialSpec::Table(values))
    }
}

/// A [`PotentialSpec`] bound to a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    spec: PotentialSpec,
    grid: TorusGrid,
}

impl Potential {
    pub fn new(spec: PotentialSpec, grid: &TorusGrid) -> Result<Self> {
        if let PotentialSpec::Table(values) = &spec {
            if values.len() != grid.node_count() {
                return config(format!(
                    "table has {} values, grid has {} nodes",
                    values.len(),
                    grid.node_count()
                ));
            }
        }
        Ok(Self { spec, grid: *grid })
    }

    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.spec {
            PotentialSpec::Cosine { amplitude, frequency, phase, offset } => {
                offset + amplitude * (2.0 * PI * frequency * (x[0] - phase)).cos()
            }
            PotentialSpec::SumOfCosines { amplitude, frequency, phase, offset } => {
                let s: f64 = x
                    .iter()
                    .take(self.grid.dim())
                    .map(|xj| (2.0 * PI * frequency * (xj - phase)).cos())
                    .sum();
                offset + amplitude * s
            }
            PotentialSpec::Table(values) => values[self.grid.nearest_node(x)],
        }
    }

    pub fn at_node(&self, node: usize) -> f64 {
        match &self.spec {
            PotentialSpec::Table(values) => values[node],
            _ => {
                let x = self.grid.coords(node);
                self.eval(&x[..self.grid.dim()])
            }
        }
    }

    pub fn sample(&self) -> Vec<f64> {
        (0..self.grid.node_count()).map(|i| self.at_node(i)).collect()
    }

    /// Upper bound of `|value|` over the torus (exact on grid samples for tables).
    pub fn sup_bound(&self) -> f64 {
        match &self.spec {
            PotentialSpec::Cosine { amplitude, offset, .. } => offset.abs() + amplitude.abs(),
            PotentialSpec::SumOfCosines { amplitude, offset, .. } => {
                offset.abs() + amplitude.abs() * self.grid.dim() as f64
            }
            PotentialSpec::Table(values) => values.iter().fold(0.0, |acc, v| acc.max(v.abs())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagrangianKind {
    Mechanical,
    EikonalQuadratic,
    Table,
}

/// `L` sampled on the hops of a graph, indexed like its edges.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianTable {
    grid: TorusGrid,
    velocities: Vec<Point>,
    values: Vec<f64>,
}

impl LagrangianTable {
    pub fn new(graph: &EdgeGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.edge_count() {
            return Err(Error::Dimension(format!(
                "table has {} samples, graph has {} edges",
                values.len(),
                graph.edge_count()
            )));
        }
        let controls = graph.controls();
        let velocities = (0..controls.len())
            .map(|j| {
                let mut v = [0.0; MAX_DIM];
                v[..graph.grid().dim()].copy_from_slice(controls.velocity(j));
                v
            })
            .collect();
        Ok(Self { grid: *graph.grid(), velocities, values })
    }

    fn velocity_index(&self, v: &[f64]) -> Option<usize> {
        let dim = self.grid.dim();
        self.velocities
            .iter()
            .position(|s| s[..dim].iter().zip(v).all(|(a, b)| (a - b).abs() <= 1e-9))
    }
}

/// Lagrangian `L(x, v)` together with its Hamiltonian `H(x, p)`.
#[derive(Debug, Clone, PartialEq)]
pub enum LagrangianModel {
    /// `H = |p|²/2 + V(x)`, `L = |v|²/2 - V(x)`.
    Mechanical { potential: Potential },
    /// `H = |p|²`, `L = |v|²/4`.
    EikonalQuadratic,
    /// Sampled `L`; `+∞` off the sampled hops, `H` its discrete conjugate.
    Table(LagrangianTable),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

impl LagrangianModel {
    pub fn kind(&self) -> LagrangianKind {
        match self {
            LagrangianModel::Mechanical { .. } => LagrangianKind::Mechanical,
            LagrangianModel::EikonalQuadratic => LagrangianKind::EikonalQuadratic,
            LagrangianModel::Table(_) => LagrangianKind::Table,
        }
    }

    pub fn eval_l(&self, x: &[f64], v: &[f64]) -> f64 {
        match self {
            LagrangianModel::Mechanical { potential } => 0.5 * norm2(v) - potential.eval(x),
            LagrangianModel::EikonalQuadratic => 0.25 * norm2(v),
            LagrangianModel::Table(t) => match t.velocity_index(v) {
                Some(j) => t.values[t.grid.nearest_node(x) * t.velocities.len() + j],
                None => f64::INFINITY,
            },
        }
    }

    pub fn eval_h(&self, x: &[f64], p: &[f64]) -> f64 {
        match self {
            LagrangianModel::Mechanical { potential } => 0.5 * norm2(p) + potential.eval(x),
            LagrangianModel::EikonalQuadratic => norm2(p),
            LagrangianModel::Table(t) => {
                let node = t.grid.nearest_node(x);
                let dim = t.grid.dim();
                let nv = t.velocities.len();
                t.velocities
                    .iter()
                    .enumerate()
                    .map(|(j, v)| dot(p, &v[..dim]) - t.values[node * nv + j])
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// `L(x_source, v)` on every edge.
    pub fn edge_costs(&self, graph: &EdgeGraph) -> Vec<f64> {
        match self {
            LagrangianModel::Table(t) if t.values.len() == graph.edge_count() => t.values.clone(),
            _ => graph.map_edges(|x, v| self.eval_l(x, v)),
        }
    }

    /// Tolerance used for the convexity and Fenchel checks.
    pub fn check_tolerance(&self, dp: f64) -> f64 {
        match self {
            LagrangianModel::Table(_) => 10.0 * dp,
            _ => 1e-9,
        }
    }

    /// Base strict-off-Aubry critical subsolution, when known in closed form.
    ///
    /// For `L = |v|²/2 - V` and `L = |v|²/4` the zero function works: `H(x, 0) =
    /// V(x) <= max V = c₀` with equality only on `argmax V`.
    pub fn base_subsolution(&self) -> Option<f64> {
        match self {
            LagrangianModel::Mechanical { .. } | LagrangianModel::EikonalQuadratic => Some(0.0),
            LagrangianModel::Table(_) => None,
        }
    }
}

/// Fenchel gap `L(x,v) + H(x,p) - p·v`; nonnegative for a conjugate pair.
pub fn fenchel_gap(model: &LagrangianModel, x: &[f64], v: &[f64], p: &[f64]) -> f64 {
    model.eval_l(x, v) + model.eval_h(x, p) - dot(p, v)
}

/// Midpoint convexity defect `L(θv₁+(1-θ)v₂) - θL(v₁) - (1-θ)L(v₂)`; `<= tol` when convex.
pub fn convexity_defect(model: &LagrangianModel, x: &[f64], v1: &[f64], v2: &[f64], theta: f64) -> f64 {
    let mid: Vec<f64> = v1.iter().zip(v2).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
    model.eval_l(x, &mid) - theta * model.eval_l(x, v1) - (1.0 - theta) * model.eval_l(x, v2)
}

/// Default momentum box half-width: twice the largest hop speed plus two.
pub fn momentum_range(max_speed: f64) -> f64 {
    2.0 * max_speed + 2.0
}

/// `sup_z (y·z - f(z))` over the grid `[-range, range]^dim` with spacing `step`.
///
/// Errors when the maximizer sits on the boundary of the box: the supremum is
/// then not certified to be attained in the interior.
pub fn convex_conjugate_numeric<F: Fn(&[f64]) -> f64>(
    f: F,
    y: &[f64],
    range: f64,
    step: f64,
) -> Result<f64> {
    if !(range > 0.0 && step > 0.0) {
        return config("conjugate range and step must be positive");
    }
    let dim = y.len();
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Dimension(format!("unsupported point dimension {dim}")));
    }
    let per_axis = (2.0 * range / step).round() as usize + 1;
    let total = per_axis.pow(dim as u32);
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = [0usize; MAX_DIM];
    let mut z = [0.0; MAX_DIM];
    for flat in 0..total {
        let mut idx = [0usize; MAX_DIM];
        let mut rest = flat;
        for axis in 0..dim {
            idx[axis] = rest % per_axis;
            rest /= per_axis;
            z[axis] = -range + idx[axis] as f64 * step;
        }
        let value = dot(y, &z[..dim]) - f(&z[..dim]);
        if value > best {
            best = value;
            best_idx = idx;
        }
    }
    if best_idx[..dim].iter().any(|&i| i == 0 || i + 1 == per_axis) {
        return Err(Error::RangeExhausted { range });
    }
    Ok(best)
}

/// Numeric Legendre transform `L(x,v) = sup_p (p·v - H(x,p))` on a momentum grid.
pub fn legendre_transform_numeric<H: Fn(&[f64], &[f64]) -> f64>(
    eval_h: H,
    x: &[f64],
    v: &[f64],
    range: f64,
    step: f64,
) -> Result<f64> {
    convex_conjugate_numeric(|p| eval_h(x, p), v, range, step)
}

/// Contact Hamiltonians `G(x, p, u)` and their Lagrangians `L_G(x, v, u)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ContactModel {
    /// `G = a(x) u + H(x, p)`, `L_G = L(x, v) - a(x) u`.
    Linear { base: LagrangianModel, coefficient: Potential },
    /// `G = sin(u) + |p|²`, `L_G = |v|²/4 - sin(u)`.
    SinContact,
}

static EIKONAL: LagrangianModel = LagrangianModel::EikonalQuadratic;

impl ContactModel {
    /// The Lagrangian `L_G(·, ·, 0)` whose critical value and Mather set govern the limit.
    pub fn base(&self) -> &LagrangianModel {
        match self {
            ContactModel::Linear { base, .. } => base,
            ContactModel::SinContact => &EIKONAL,
        }
    }

    pub fn eval_lg(&self, x: &[f64], v: &[f64], u: f64) -> f64 {
        match self {
            ContactModel::Linear { base, coefficient } => base.eval_l(x, v) - coefficient.eval(x) * u,
            ContactModel::SinContact => 0.25 * norm2(v) - u.sin(),
        }
    }

    pub fn eval_g(&self, x: &[f64], p: &[f64], u: f64) -> f64 {
        match self {
            ContactModel::Linear { base, coefficient } => coefficient.eval(x) * u + base.eval_h(x, p),
            ContactModel::SinContact => u.sin() + norm2(p),
        }
    }

    /// `∂L_G/∂u (x, v, 0)`.
    pub fn eval_dlg_du0(&self, x: &[f64], _v: &[f64]) -> f64 {
        match self {
            ContactModel::Linear { coefficient, .. } => -coefficient.eval(x),
            ContactModel::SinContact => -1.0,
        }
    }

    pub fn linear_coefficient(&self, x: &[f64]) -> Option<f64> {
        match self {
            ContactModel::Linear { coefficient, .. } => Some(coefficient.eval(x)),
            ContactModel::SinContact => None,
        }
    }

    pub fn coefficient(&self) -> Option<&Potential> {
        match self {
            ContactModel::Linear { coefficient, .. } => Some(coefficient),
            ContactModel::SinContact => None,
        }
    }

    /// Lipschitz constant `K` of `u ↦ L_G(x, v, u)`.
    pub fn lipschitz_k(&self) -> f64 {
        match self {
            ContactModel::Linear { coefficient, .. } => coefficient.sup_bound(),
            ContactModel::SinContact => 1.0,
        }
    }

    /// `∂L_G/∂u (x_source, v, 0)` on every edge.
    pub fn edge_dlg_du0(&self, graph: &EdgeGraph) -> Vec<f64> {
        match self {
            ContactModel::Linear { coefficient, .. } => {
                let a = coefficient.sample();
                graph.edges().iter().map(|e| -a[e.source]).collect()
            }
            ContactModel::SinContact => vec![-1.0; graph.edge_count()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Lagrangian(LagrangianModel),
    Contact(ContactModel),
}

/// Parameters for [`make_builtin_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub potential: PotentialSpec,
    pub coefficient: Option<PotentialSpec>,
    /// Base Lagrangian of `linear-discount`: `mechanical` or `eikonal2`.
    pub base: String,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            potential: PotentialSpec::cosine(1.0, 1.0, 0.0, 0.0),
            coefficient: None,
            base: "mechanical".to_string(),
        }
    }
}

pub const BUILTIN_MODELS: [&str; 4] = ["mechanical", "eikonal2", "sin-contact", "linear-discount"];

/// Builds one of the catalogue models on a grid.
pub fn make_builtin_model(name: &str, params: &ModelParams, grid: &TorusGrid) -> Result<Model> {
    let lagrangian = |base: &str| -> Result<LagrangianModel> {
        match base {
            "mechanical" => Ok(LagrangianModel::Mechanical {
                potential: Potential::new(params.potential.clone(), grid)?,
            }),
            "eikonal2" => Ok(LagrangianModel::EikonalQuadratic),
            other => config(format!("unknown base Lagrangian {other:?} (mechanical | eikonal2)")),
        }
    };
    match name {
        "mechanical" | "eikonal2" => Ok(Model::Lagrangian(lagrangian(name)?)),
        "sin-contact" => Ok(Model::Contact(ContactModel::SinContact)),
        "linear-discount" => {
            let Some(coefficient) = params.coefficient.clone() else {
                return config("linear-discount requires a coefficient a(x)");
            };
            Ok(Model::Contact(ContactModel::Linear {
                base: lagrangian(&params.base)?,
                coefficient: Potential::new(coefficient, grid)?,
            }))
        }
        other => config(format!("unknown model {other:?}; known: {}", BUILTIN_MODELS.join(", "))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_edge_graph, make_grid};

    fn mechanical(grid: &TorusGrid) -> LagrangianModel {
        LagrangianModel::Mechanical {
            potential: Potential::new(PotentialSpec::cosine(1.0, 1.0, 0.0, 0.0), grid).unwrap(),
        }
    }

    #[test]
    fn legendre_of_square() {
        let l = legendre_transform_numeric(|_, p| p[0] * p[0], &[0.0], &[1.0], 4.0, 0.01).unwrap();
        assert!((l - 0.25).abs() < 1e-12);
    }

    #[test]
    fn legendre_of_mechanical_at_rest() {
        let g = make_grid(1, 64).unwrap();
        let model = mechanical(&g);
        let x = [0.3];
        let l = legendre_transform_numeric(|x, p| model.eval_h(x, p), &x, &[0.0], 8.0, g.dx()).unwrap();
        assert!((l + model.eval_h(&x, &[0.0])).abs() < 1e-12);
    }

    #[test]
    fn legendre_matches_closed_form() {
        let g = make_grid(1, 64).unwrap();
        let model = mechanical(&g);
        let dp = g.dx();
        let numeric = legendre_transform_numeric(|x, p| model.eval_h(x, p), &[0.0], &[1.0], 8.0, dp).unwrap();
        let analytic = 0.5 - 1.0;
        assert!((numeric - analytic).abs() <= dp * dp);
        // off-grid maximizer: v = 0.37 is not a multiple of dp
        let numeric = legendre_transform_numeric(|x, p| model.eval_h(x, p), &[0.1], &[0.37], 8.0, dp).unwrap();
        let analytic = model.eval_l(&[0.1], &[0.37]);
        assert!(numeric <= analytic + 1e-12 && analytic - numeric <= dp * dp);
    }

    #[test]
    fn legendre_boundary_is_an_error() {
        let err = legendre_transform_numeric(|_, p| p[0] * p[0], &[0.0], &[10.0], 2.0, 0.1);
        assert!(matches!(err, Err(Error::RangeExhausted { .. })));
    }

    #[test]
    fn builtin_values() {
        let g = make_grid(1, 64).unwrap();
        let Model::Lagrangian(mech) = make_builtin_model("mechanical", &ModelParams::default(), &g).unwrap() else {
            panic!()
        };
        assert_eq!(mech.eval_l(&[0.5], &[0.0]), 1.0);

        let sin = ContactModel::SinContact;
        assert_eq!(sin.eval_lg(&[0.2], &[0.0], PI / 2.0), -1.0);
        assert_eq!(sin.eval_dlg_du0(&[0.2], &[1.0]), -1.0);

        let params = ModelParams {
            coefficient: Some(PotentialSpec::cosine(1.0, 1.0, 0.0, 0.5)),
            ..ModelParams::default()
        };
        let Model::Contact(lin) = make_builtin_model("linear-discount", &params, &g).unwrap() else {
            panic!()
        };
        assert_eq!(lin.eval_dlg_du0(&[0.0], &[1.0]), -1.5);
        for &(x, v, u) in &[(0.1, 0.5, 2.0), (0.7, -1.5, -3.0)] {
            let a = lin.linear_coefficient(&[x]).unwrap();
            assert_eq!(lin.eval_lg(&[x], &[v], u), lin.base().eval_l(&[x], &[v]) - a * u);
            assert_eq!(lin.eval_dlg_du0(&[x], &[v]), -a);
        }
    }

    #[test]
    fn unknown_model_rejected() {
        let g = make_grid(1, 8).unwrap();
        assert!(make_builtin_model("quartic", &ModelParams::default(), &g).is_err());
        assert!(make_builtin_model("linear-discount", &ModelParams::default(), &g).is_err());
    }

    #[test]
    fn table_potential_parsing() {
        let g = make_grid(1, 4).unwrap();
        let spec = PotentialSpec::parse_table("1\n2.5\n\n-1\n0\n", &g).unwrap();
        assert_eq!(spec, PotentialSpec::Table(vec![1.0, 2.5, -1.0, 0.0]));
        assert!(PotentialSpec::parse_table("1\n2\n3\n", &g).is_err());
        assert!(PotentialSpec::parse_table("1\n2\nx\n4\n", &g).is_err());
    }

    #[test]
    fn table_lagrangian_is_its_own_conjugate_pair() {
        let g = make_grid(1, 8).unwrap();
        let graph = build_edge_graph(&g, g.dx(), 1).unwrap();
        let values: Vec<f64> = (0..graph.edge_count()).map(|e| (e as f64 * 0.37).sin()).collect();
        let table = LagrangianModel::Table(LagrangianTable::new(&graph, values.clone()).unwrap());
        assert_eq!(table.edge_costs(&graph), values);
        for e in 0..graph.edge_count() {
            let x = g.coords(graph.edge(e).source);
            let v = graph.velocity(e);
            assert_eq!(table.eval_l(&x[..1], v), values[e]);
            for p in [-2.0, -0.3, 0.0, 1.7] {
                assert!(fenchel_gap(&table, &x[..1], v, &[p]) >= -1e-12);
            }
        }
        assert_eq!(table.eval_l(&[0.0], &[0.5]), f64::INFINITY);
    }
}
