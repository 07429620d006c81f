//! Domain values shared across the crate.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Strictly positive Poisson rates `θ = (θ₁, …, θ_p)`.
///
/// The sum `γ` and the proportions `π_i = θ_i / γ` are derived on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MeanVector(Vec<f64>);

impl MeanVector {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(bad) = theta.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(invalid(
                "theta",
                format!("components must be finite and > 0, got {bad}"),
            ));
        }
        Ok(Self(theta))
    }

    /// `p` copies of `gamma / p`.
    pub fn uniform(p: usize, gamma: f64) -> Result<Self> {
        Self::new(vec![gamma / p as f64; p])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.len() as f64
    }

    pub fn proportions(&self) -> Vec<f64> {
        let gamma = self.sum();
        self.0.iter().map(|t| t / gamma).collect()
    }

    /// Mean inverse proportion `B(π) = (1/p) Σ 1/π_i`; its minimum is `p`.
    pub fn mean_inverse_proportion(&self) -> f64 {
        let gamma = self.sum();
        self.0.iter().map(|t| gamma / t).sum::<f64>() / self.len() as f64
    }
}

impl TryFrom<Vec<f64>> for MeanVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MeanVector> for Vec<f64> {
    fn from(v: MeanVector) -> Self {
        v.0
    }
}

/// Observed Poisson counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CountVector(Vec<u64>);

impl CountVector {
    pub fn new(y: Vec<u64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Empty);
        }
        Ok(Self(y))
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total count `Z`.
    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.total() as f64 / self.len() as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().copied()
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.0
    }

    pub(crate) fn require_len(&self, min: usize, what: &'static str) -> Result<()> {
        if self.len() < min {
            return Err(invalid(
                what,
                format!("requires p >= {min}, got p = {}", self.len()),
            ));
        }
        Ok(())
    }
}

impl TryFrom<Vec<u64>> for CountVector {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        Self::new(v)
    }
}

/// A `k × p` grid of counts `Y_{i,j}`: `k` processes observed in `p` windows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountMatrix {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
}

impl CountMatrix {
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::Empty);
        }
        let p = rows[0].len();
        if p == 0 {
            return Err(Error::Empty);
        }
        let mut counts = Vec::with_capacity(k * p);
        for row in rows {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: row.len(),
                });
            }
            counts.extend(row);
        }
        Ok(Self {
            rows: k,
            cols: p,
            counts,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.counts[i * self.cols..(i + 1) * self.cols]
    }

    /// Row totals `Y_i(τ)`.
    pub fn row_totals(&self) -> Vec<u64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    /// Column totals `Z_j`.
    pub fn column_totals(&self) -> Vec<u64> {
        let mut out = vec![0; self.cols];
        for i in 0..self.rows {
            for (o, y) in out.iter_mut().zip(self.row(i)) {
                *o += y;
            }
        }
        out
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Estimates `δ = (δ₁, …, δ_p)`, generic over the numeric type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EstimateVector<T = f64>(Vec<T>);

impl<T: Scalar> EstimateVector<T> {
    /// Builds an estimate, rejecting negative components.
    pub fn new(delta: Vec<T>) -> Result<Self> {
        if delta.iter().any(|d| d.is_negative()) {
            return Err(invalid("delta", "estimates must be nonnegative"));
        }
        Ok(Self(delta))
    }

    /// Builds an estimate without the sign check. Used by the quadratic-loss
    /// dominators, whose corrections `A⁻¹ψ` may push a component below zero
    /// for an arbitrary positive-definite `A`.
    pub fn from_unchecked(delta: Vec<T>) -> Self {
        Self(delta)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn sum(&self) -> T {
        crate::scalar::sum(self.0.iter().cloned())
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.0.iter().any(|d| d.is_negative())
    }

    pub fn to_f64(&self) -> EstimateVector<f64> {
        EstimateVector(self.0.iter().map(Scalar::to_f64).collect())
    }
}

/// A `k × p` matrix of estimates, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateMatrix<T = f64> {
    rows: usize,
    cols: usize,
    values: Vec<T>,
}

impl<T: Scalar> EstimateMatrix<T> {
    pub(crate) fn from_parts(rows: usize, cols: usize, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        Self { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows)
            .map(|i| crate::scalar::sum(self.row(i).iter().cloned()))
            .collect()
    }

    pub fn column_sums(&self) -> Vec<T> {
        (0..self.cols)
            .map(|j| crate::scalar::sum((0..self.rows).map(|i| self.get(i, j).clone())))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_vector_rejects_nonpositive() {
        assert!(MeanVector::new(vec![1.0, 0.0]).is_err());
        assert!(MeanVector::new(vec![1.0, -2.0]).is_err());
        assert!(MeanVector::new(vec![f64::NAN]).is_err());
        assert!(matches!(MeanVector::new(vec![]), Err(Error::Empty)));
    }

    #[test]
    fn proportions_sum_to_one() {
        let theta = MeanVector::new(vec![0.3, 7.0, 1e-4, 12.5]).unwrap();
        let s: f64 = theta.proportions().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_proportion_minimum_is_p() {
        let theta = MeanVector::uniform(5, 3.0).unwrap();
        assert!((theta.mean_inverse_proportion() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn count_matrix_totals_agree() {
        let m = CountMatrix::from_rows(vec![vec![1, 2, 3], vec![0, 4, 1]]).unwrap();
        assert_eq!(m.row_totals(), vec![6, 5]);
        assert_eq!(m.column_totals(), vec![1, 6, 4]);
        assert_eq!(m.total(), 11);
        assert!(CountMatrix::from_rows(vec![vec![1, 2], vec![3]]).is_err());
    }
}
