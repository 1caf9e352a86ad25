//! Dense row-major matrix of f64 values.
//!
//! `FeatureMatrix` is the single in-memory representation of embeddings,
//! logits and gradients. Rows are sample vectors of a fixed dimension.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    /// Builds a matrix and rejects non-finite entries.
    pub fn new(rows: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * dim {
            return Err(Error::Shape(format!(
                "expected {} values for a {}x{} matrix, got {}",
                rows * dim,
                rows,
                dim,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerics("non-finite matrix entry".into()));
        }
        Ok(Self { rows, dim, data })
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_raw(rows: usize, dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * dim);
        Self { rows, dim, data }
    }

    pub fn zeros(rows: usize, dim: usize) -> Self {
        Self {
            rows,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::Shape(format!(
                    "row {} has dim {}, expected {}",
                    i,
                    r.len(),
                    dim
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), dim, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1))
    }

    /// Row subset in the given index order.
    pub fn gather(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.rows {
                return Err(Error::Index(format!(
                    "row {} out of range (rows = {})",
                    i, self.rows
                )));
            }
            data.extend_from_slice(self.row(i));
        }
        Ok(Self::from_raw(indices.len(), self.dim, data))
    }

    /// dst += scale * src, elementwise.
    pub fn add_scaled(&mut self, src: &FeatureMatrix, scale: f64) -> Result<()> {
        if self.rows != src.rows || self.dim != src.dim {
            return Err(Error::Shape(format!(
                "cannot accumulate {}x{} into {}x{}",
                src.rows, src.dim, self.rows, self.dim
            )));
        }
        for (d, s) in self.data.iter_mut().zip(src.data.iter()) {
            *d += scale * s;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Euclidean distance between two equal-length vectors.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_entries() {
        let err = FeatureMatrix::new(1, 2, vec![1.0, f64::NAN]);
        assert!(matches!(err, Err(Error::Numerics(_))));
        let err = FeatureMatrix::new(1, 2, vec![f64::INFINITY, 0.0]);
        assert!(matches!(err, Err(Error::Numerics(_))));
    }

    #[test]
    fn rejects_bad_length() {
        assert!(matches!(
            FeatureMatrix::new(2, 3, vec![0.0; 5]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn gather_selects_rows_in_order() {
        let m = FeatureMatrix::new(3, 2, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let g = m.gather(&[2, 0]).unwrap();
        assert_eq!(g.row(0), &[4.0, 5.0]);
        assert_eq!(g.row(1), &[0.0, 1.0]);
        assert!(m.gather(&[3]).is_err());
    }

    #[test]
    fn euclidean_345() {
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
    }
}
