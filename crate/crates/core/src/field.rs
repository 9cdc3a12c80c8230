use crate::error::{Error, Result};
use crate::grid::TorusGrid;

/// One real value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::Dimension(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Internal(format!("non-finite field value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: TorusGrid, value: f64) -> Self {
        Self { grid, values: vec![value; grid.node_count()] }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &GridField) -> f64 {
        sup_distance(&self.values, &other.values)
    }

    /// Pointwise `self + shift`.
    pub fn shifted(&self, shift: f64) -> GridField {
        GridField { grid: self.grid, values: self.values.iter().map(|v| v + shift).collect() }
    }

    /// CSV with columns `x0[,x1],value`.
    pub fn to_csv(&self) -> String {
        let dim = self.grid.dim();
        let mut out = String::new();
        out.push_str(if dim == 1 { "x0,value\n" } else { "x0,x1,value\n" });
        for (i, v) in self.values.iter().enumerate() {
            let x = self.grid.coords(i);
            for c in &x[..dim] {
                out.push_str(&format!("{c},"));
            }
            out.push_str(&format!("{v}\n"));
        }
        out
    }
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn csv_layout() {
        let g = make_grid(1, 4).unwrap();
        let f = GridField::new(g, vec![1.0, 0.5, -0.25, 0.1]).unwrap();
        assert_eq!(f.to_csv(), "x0,value\n0,1\n0.25,0.5\n0.5,-0.25\n0.75,0.1\n");
        assert_eq!(f.min(), -0.25);
        assert_eq!(f.max(), 1.0);
    }

    #[test]
    fn rejects_wrong_length_and_nan() {
        let g = make_grid(1, 4).unwrap();
        assert!(GridField::new(g, vec![0.0; 3]).is_err());
        assert!(GridField::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }
}
