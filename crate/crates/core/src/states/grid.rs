use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a grid samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// ρ(p̃, p̃′) of the motional state, internal levels traced out.
    MomentumCoherence,
    /// P(x̃, ỹ), real and non-negative.
    PositionProbability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisQuantity {
    Momentum,
    Position,
}

impl AxisQuantity {
    pub fn unit(self) -> &'static str {
        match self {
            AxisQuantity::Momentum => "p0",
            AxisQuantity::Position => "x0",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub label: String,
    pub quantity: AxisQuantity,
    pub values: Vec<f64>,
}

impl GridAxis {
    pub fn new(label: impl Into<String>, quantity: AxisQuantity, values: Vec<f64>) -> Result<Self> {
        let axis = GridAxis {
            label: label.into(),
            quantity,
            values,
        };
        axis.validate()?;
        Ok(axis)
    }

    fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("grid", format!("axis {} is empty", self.label)));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid", format!("axis {} has non-finite values", self.label)));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "grid",
                format!("axis {} is not strictly increasing", self.label),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest spacing between neighbouring points.
    pub fn max_spacing(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Trapezoid weights.
    fn weights(&self) -> Vec<f64> {
        let v = &self.values;
        let n = v.len();
        if n < 2 {
            return vec![0.0; n];
        }
        (0..n)
            .map(|i| {
                let left = if i > 0 { v[i] - v[i - 1] } else { 0.0 };
                let right = if i + 1 < n { v[i + 1] - v[i] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    }
}

/// `points` uniformly spaced values on [−extent, extent].
pub fn uniform_axis(extent: f64, points: usize) -> Result<Vec<f64>> {
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(Error::invalid("grid_extent", "must be positive and finite"));
    }
    if points < 2 {
        return Err(Error::invalid("grid_points", "need at least two points"));
    }
    let step = 2.0 * extent / (points - 1) as f64;
    Ok((0..points).map(|i| -extent + step * i as f64).collect())
}

/// Sampled two-dimensional observable with axis metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub kind: GridKind,
    pub rows: GridAxis,
    pub cols: GridAxis,
    /// Row-major, `rows.len() × cols.len()`.
    values: Vec<Complex64>,
    pub metadata: BTreeMap<String, String>,
}

impl DensityGrid {
    pub fn new(kind: GridKind, rows: GridAxis, cols: GridAxis, values: Vec<Complex64>) -> Result<Self> {
        rows.validate()?;
        cols.validate()?;
        if values.len() != rows.len() * cols.len() {
            return Err(Error::ShapeMismatch(format!(
                "grid has {} values for {}×{} points",
                values.len(),
                rows.len(),
                cols.len()
            )));
        }
        Ok(DensityGrid {
            kind,
            rows,
            cols,
            values,
            metadata: BTreeMap::new(),
        })
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.cols.len() + j]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// max |ρ(i,j) − ρ(j,i)*|; requires identical row and column axes.
    pub fn hermiticity_error(&self) -> Result<f64> {
        if self.rows.values != self.cols.values {
            return Err(Error::ShapeMismatch("hermiticity needs a square grid".into()));
        }
        let n = self.rows.len();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        Ok(worst)
    }

    /// ∫ρ(p,p) dp for coherence grids or ∬P dx dy for probability grids,
    /// by trapezoid quadrature.
    pub fn trace(&self) -> f64 {
        match self.kind {
            GridKind::MomentumCoherence => {
                let w = self.rows.weights();
                (0..self.rows.len().min(self.cols.len()))
                    .map(|i| w[i] * self.get(i, i).re)
                    .sum()
            }
            GridKind::PositionProbability => {
                let wr = self.rows.weights();
                let wc = self.cols.weights();
                let mut total = 0.0;
                for (i, a) in wr.iter().enumerate() {
                    for (j, b) in wc.iter().enumerate() {
                        total += a * b * self.get(i, j).re;
                    }
                }
                total
            }
        }
    }

    /// Probability-weighted mean (row coordinate, column coordinate).
    pub fn centroid(&self) -> Result<(f64, f64)> {
        if self.kind != GridKind::PositionProbability {
            return Err(Error::ShapeMismatch("centroid needs a probability grid".into()));
        }
        let wr = self.rows.weights();
        let wc = self.cols.weights();
        let (mut total, mut mx, mut my) = (0.0, 0.0, 0.0);
        for (i, a) in wr.iter().enumerate() {
            for (j, b) in wc.iter().enumerate() {
                let p = a * b * self.get(i, j).re;
                total += p;
                mx += p * self.rows.values[i];
                my += p * self.cols.values[j];
            }
        }
        if !(total > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok((mx / total, my / total))
    }

    /// Largest pointwise |Δ| between grids sampled on identical axes.
    pub fn max_abs_diff(&self, other: &DensityGrid) -> Result<f64> {
        if self.kind != other.kind
            || self.rows.values != other.rows.values
            || self.cols.values != other.cols.values
        {
            return Err(Error::ShapeMismatch("grids are sampled differently".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Weighted sum of grids with identical axes (classical mixtures).
    pub fn weighted_sum(parts: &[(f64, DensityGrid)]) -> Result<DensityGrid> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::invalid("grid", "empty mixture"))?;
        let mut out = first.clone();
        out.values.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (w, g) in parts {
            out.max_abs_diff(g)?;
            for (dst, v) in out.values.iter_mut().zip(&g.values) {
                *dst += v * *w;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(vals: &[f64]) -> GridAxis {
        GridAxis::new("p", AxisQuantity::Momentum, vals.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_increasing_axes() {
        assert!(GridAxis::new("p", AxisQuantity::Momentum, vec![0.0, 0.0, 1.0]).is_err());
        assert!(GridAxis::new("p", AxisQuantity::Momentum, vec![]).is_err());
    }

    #[test]
    fn rejects_mismatched_values() {
        let a = axis(&[0.0, 1.0]);
        assert!(DensityGrid::new(GridKind::MomentumCoherence, a.clone(), a, vec![Complex64::default(); 3]).is_err());
    }

    #[test]
    fn hermiticity_detects_asymmetry() {
        let a = axis(&[0.0, 1.0]);
        let mut vals = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.2, 0.3),
            Complex64::new(0.2, -0.3),
            Complex64::new(1.0, 0.0),
        ];
        let g = DensityGrid::new(GridKind::MomentumCoherence, a.clone(), a.clone(), vals.clone()).unwrap();
        assert_eq!(g.hermiticity_error().unwrap(), 0.0);
        vals[1] = Complex64::new(0.2, 0.1);
        let g = DensityGrid::new(GridKind::MomentumCoherence, a.clone(), a, vals).unwrap();
        assert!((g.hermiticity_error().unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn uniform_axis_endpoints() {
        let v = uniform_axis(5.0, 11).unwrap();
        assert_eq!(v.first(), Some(&-5.0));
        assert_eq!(v.last(), Some(&5.0));
        assert!(uniform_axis(5.0, 1).is_err());
    }
}
