//! Dense two-phase primal simplex with Bland's rule.
//!
//! Solves `min cᵀx  s.t.  Ax = b, x >= 0`. Rows are sign-normalized to
//! `b >= 0` and scaled to unit max-norm; every comparison uses the absolute
//! tolerance [`EPS`] on that normalized data. Columns that already form a
//! positive unit vector in some row seed the initial basis; the remaining rows
//! get artificial variables. Ties are always broken by the lowest index, so the
//! returned vertex is deterministic.

use crate::error::{Error, Result};

pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        Self { objective, rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn add_equality(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<()> {
        if coeffs.len() != self.objective.len() {
            return Err(Error::Dimension(format!(
                "constraint has {} coefficients, program has {} variables",
                coeffs.len(),
                self.objective.len()
            )));
        }
        if !rhs.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Dimension("non-finite constraint data".into()));
        }
        self.rows.push(coeffs);
        self.rhs.push(rhs);
        Ok(())
    }

    /// Adds `Σ coeff_j x_j = rhs` from `(index, coeff)` pairs; repeated indices accumulate.
    pub fn add_sparse_equality(&mut self, terms: &[(usize, f64)], rhs: f64) -> Result<()> {
        let mut row = vec![0.0; self.objective.len()];
        for &(j, c) in terms {
            if j >= row.len() {
                return Err(Error::Dimension(format!("variable index {j} out of range")));
            }
            row[j] += c;
        }
        self.add_equality(row, rhs)
    }

    /// Primal residual `max_i |A_i x - b_i|`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| (row.iter().zip(x).map(|(a, xi)| a * xi).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub primal: Vec<f64>,
    /// Multipliers `y` of the equality rows: `cᵀx = bᵀy` at optimality.
    pub dual: Vec<f64>,
    pub pivots: usize,
}

impl LpSolution {
    pub fn dual_value(&self, program: &LinearProgram) -> f64 {
        self.dual.iter().zip(&program.rhs).map(|(y, b)| y * b).sum()
    }

    /// Reduced costs `c - Aᵀy`.
    pub fn reduced_costs(&self, program: &LinearProgram) -> Vec<f64> {
        let mut d = program.objective.clone();
        for (row, y) in program.rows.iter().zip(&self.dual) {
            for (dj, a) in d.iter_mut().zip(row) {
                *dj -= a * y;
            }
        }
        d
    }

    /// Returns the solution when optimal, otherwise a status error.
    pub fn optimal(self) -> Result<Self> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            LpStatus::Infeasible => Err(Error::LpStatus("infeasible")),
            LpStatus::Unbounded => Err(Error::LpStatus("unbounded")),
        }
    }
}

struct Tableau {
    /// `rows + 1` rows (last is the reduced-cost row), `cols + 1` columns (last is the rhs).
    data: Vec<f64>,
    width: usize,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.data[r * w + c];
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= p;
        }
        self.data[r * w + c] = 1.0;
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [f64]| {
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        };
        before.chunks_mut(w).for_each(eliminate);
        after.chunks_mut(w).for_each(eliminate);
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Rewrites the cost row for the objective `cost` (indexed by column).
    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.width;
        let m = self.rows;
        let mut row = vec![0.0; w];
        row[..self.cols].copy_from_slice(cost);
        for i in 0..m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (v, t) in row.iter_mut().zip(&self.data[i * w..(i + 1) * w]) {
                    *v -= cb * t;
                }
            }
        }
        self.data[m * w..(m + 1) * w].copy_from_slice(&row);
    }

    /// Bland iterations over the columns `0..allowed`. Returns false when unbounded.
    fn run(&mut self, allowed: usize, limit: usize) -> Result<bool> {
        let m = self.rows;
        loop {
            let Some(c) = (0..allowed).find(|&j| self.at(m, j) < -EPS) else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.at(i, c);
                if a > EPS {
                    let ratio = self.rhs(i) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - EPS || (ratio <= br + EPS && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = best else {
                return Ok(false);
            };
            self.pivot(r, c);
            if self.pivots > limit {
                return Err(Error::Internal(format!("simplex exceeded {limit} pivots")));
            }
        }
    }
}

/// Solves the program; infeasibility and unboundedness are reported in the status.
pub fn solve_lp(program: &LinearProgram) -> Result<LpSolution> {
    let n = program.num_vars();
    for row in &program.rows {
        if row.len() != n {
            return Err(Error::Dimension("ragged constraint matrix".into()));
        }
    }
    if program.objective.iter().any(|c| !c.is_finite()) {
        return Err(Error::Dimension("non-finite objective".into()));
    }

    // Normalize: b >= 0 and unit max-norm rows. `scale[i]` maps normalized
    // multipliers back to the original rows.
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    let mut origin = Vec::new();
    let mut scale = Vec::new();
    for (i, (row, &b)) in program.rows.iter().zip(&program.rhs).enumerate() {
        let norm = row.iter().fold(0.0_f64, |acc, a| acc.max(a.abs()));
        if norm == 0.0 {
            if b.abs() > EPS {
                return Ok(infeasible(n, program.num_constraints()));
            }
            continue;
        }
        let s = if b < 0.0 { -1.0 / norm } else { 1.0 / norm };
        let mut r: Vec<f64> = row.iter().map(|a| a * s).collect();
        for a in r.iter_mut() {
            if a.abs() < 1e-15 {
                *a = 0.0;
            }
        }
        rows.push(r);
        rhs.push(b * s);
        origin.push(i);
        scale.push(s);
    }
    let m = rows.len();

    // Crash basis from positive unit columns.
    let mut nonzeros = vec![0usize; n];
    for row in &rows {
        for (j, a) in row.iter().enumerate() {
            if *a != 0.0 {
                nonzeros[j] += 1;
            }
        }
    }
    let mut used = vec![false; n];
    let mut seed: Vec<Option<usize>> = vec![None; m];
    for i in 0..m {
        if let Some(j) = (0..n).find(|&j| !used[j] && nonzeros[j] == 1 && rows[i][j] > 0.0) {
            used[j] = true;
            seed[i] = Some(j);
            let p = rows[i][j];
            for a in rows[i].iter_mut() {
                *a /= p;
            }
            rhs[i] /= p;
            scale[i] /= p;
        }
    }
    let art_rows: Vec<usize> = (0..m).filter(|&i| seed[i].is_none()).collect();
    let cols = n + art_rows.len();
    let width = cols + 1;
    let mut data = vec![0.0; (m + 1) * width];
    let mut basis = vec![0; m];
    // Column whose original form is the unit vector of row i; yields that row's multiplier.
    let mut identity = vec![0; m];
    for i in 0..m {
        data[i * width..i * width + n].copy_from_slice(&rows[i]);
        data[i * width + cols] = rhs[i];
        if let Some(j) = seed[i] {
            basis[i] = j;
            identity[i] = j;
        }
    }
    for (k, &i) in art_rows.iter().enumerate() {
        data[i * width + n + k] = 1.0;
        basis[i] = n + k;
        identity[i] = n + k;
    }
    let mut t = Tableau { data, width, rows: m, cols, basis, pivots: 0 };
    let limit = 200 * (m + cols) + 10_000;

    if !art_rows.is_empty() {
        let mut phase1 = vec![0.0; cols];
        for c in phase1.iter_mut().skip(n) {
            *c = 1.0;
        }
        t.set_costs(&phase1);
        t.run(cols, limit)?;
        let infeas: f64 = (0..m).filter(|&i| t.basis[i] >= n).map(|i| t.rhs(i)).sum();
        if infeas > EPS * (1.0 + rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()))) {
            return Ok(infeasible(n, program.num_constraints()));
        }
        for i in 0..m {
            if t.basis[i] >= n {
                if let Some(j) = (0..n).find(|&j| t.at(i, j).abs() > EPS) {
                    t.pivot(i, j);
                }
            }
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&program.objective);
    t.set_costs(&cost);
    if !t.run(n, limit)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: f64::NEG_INFINITY,
            primal: Vec::new(),
            dual: Vec::new(),
            pivots: t.pivots,
        });
    }

    let mut primal = vec![0.0; n];
    for i in 0..m {
        if t.basis[i] < n {
            primal[t.basis[i]] = t.rhs(i).max(0.0);
        }
    }
    let value = program.objective.iter().zip(&primal).map(|(c, x)| c * x).sum();
    let mut dual = vec![0.0; program.num_constraints()];
    for i in 0..m {
        let j = identity[i];
        let y_scaled = cost[j] - t.at(m, j);
        dual[origin[i]] = y_scaled * scale[i];
    }
    Ok(LpSolution { status: LpStatus::Optimal, value, primal, dual, pivots: t.pivots })
}

fn infeasible(n: usize, m: usize) -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        value: f64::INFINITY,
        primal: vec![0.0; n],
        dual: vec![0.0; m],
        pivots: 0,
    }
}
