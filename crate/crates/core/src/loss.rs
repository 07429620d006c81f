//! Loss functions and the loss matrices used by the quadratic-loss estimators.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::types::{EstimateVector, MeanVector};

/// A symmetric positive-definite loss matrix `A` for `(δ−θ)ᵀA(δ−θ)`.
///
/// The smallest eigenvalue and the inverse are computed once at
/// construction. Some constructors also record a bound constant `M` that
/// differs from `1/λ_min` (the cumulative matrix uses `M = 4` for every `p`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct QuadraticForm {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    smallest_eigenvalue: f64,
    recorded_bound: Option<f64>,
}

impl QuadraticForm {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 {
            return Err(Error::Empty);
        }
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.ncols(),
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite("non-finite entry".into()));
        }
        let scale = matrix.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::NotPositiveDefinite(format!(
                        "asymmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let eigen = SymmetricEigen::new(matrix.clone());
        let smallest = eigen.eigenvalues.min();
        if smallest <= 1e-10 * eigen.eigenvalues.amax() {
            return Err(Error::NotPositiveDefinite(format!(
                "smallest eigenvalue {smallest:e}"
            )));
        }
        let inverse = matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))?
            .inverse();
        Ok(Self {
            matrix,
            inverse,
            smallest_eigenvalue: smallest,
            recorded_bound: None,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotPositiveDefinite("matrix must be square".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(p: usize) -> Result<Self> {
        Self::new(DMatrix::identity(p, p))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        self.smallest_eigenvalue
    }

    /// Bound constant recorded by the constructor, if any.
    pub fn recorded_bound(&self) -> Option<f64> {
        self.recorded_bound
    }

    /// The `M` used by default: the recorded constant when there is one,
    /// otherwise `1/λ_min`.
    pub fn bound_constant(&self) -> f64 {
        self.recorded_bound
            .unwrap_or(1.0 / self.smallest_eigenvalue)
    }

    /// `(δ−θ)ᵀA(δ−θ)` for arbitrary real vectors.
    pub fn form(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        (v.transpose() * &self.matrix * &v)[(0, 0)]
    }

    /// `ψᵀA⁻¹ψ`.
    pub fn inverse_form(&self, psi: &[f64]) -> f64 {
        let v = DVector::from_column_slice(psi);
        (v.transpose() * &self.inverse * &v)[(0, 0)]
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        (&self.inverse * DVector::from_column_slice(rhs))
            .iter()
            .copied()
            .collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for QuadraticForm {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<QuadraticForm> for Vec<Vec<f64>> {
    fn from(q: QuadraticForm) -> Self {
        let n = q.dim();
        (0..n)
            .map(|i| (0..n).map(|j| q.matrix[(i, j)]).collect())
            .collect()
    }
}

/// `A₀ = I + c·eeᵀ`: squared error plus `c` times the squared error of the sum.
pub fn build_sum_penalty_matrix(p: usize, c: f64) -> Result<QuadraticForm> {
    if p == 0 {
        return Err(Error::Empty);
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(invalid("c", format!("must be finite and >= 0, got {c}")));
    }
    let m = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 + c } else { c });
    let mut q = QuadraticForm::new(m)?;
    // Spectrum is {1 (×p−1), 1+cp}.
    q.smallest_eigenvalue = 1.0;
    q.recorded_bound = Some(1.0);
    Ok(q)
}

/// `a_{i,j} = p + 1 − max(i, j)`, the matrix turning squared error of the
/// cumulative sums `λ_i = Σ_{j≤i} θ_j` into a quadratic form in `δ − θ`.
pub fn build_cumulative_matrix(p: usize) -> Result<QuadraticForm> {
    if p < 2 {
        return Err(invalid(
            "p",
            format!("cumulative matrix requires p >= 2, got {p}"),
        ));
    }
    let m = DMatrix::from_fn(p, p, |i, j| (p - i.max(j)) as f64);
    let mut q = QuadraticForm::new(m)?;
    q.recorded_bound = Some(4.0);
    Ok(q)
}

/// `M = 1/λ_min(A)`, so that `ψᵀA⁻¹ψ ≤ M Σψ_i²`.
pub fn loss_matrix_bound(a: &QuadraticForm) -> f64 {
    1.0 / a.smallest_eigenvalue()
}

/// The loss functions in use. JSON form carries a `kind` discriminator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    /// `(δ−θ)ᵀA(δ−θ)`.
    QuadraticForm {
        #[serde(rename = "A")]
        a: QuadraticForm,
    },
    /// `L_c = Σ(δ_i−θ_i)²/θ_i + c(Σδ_i−γ)²/γ`; `c = 0` is `L₁*`.
    WeightedLc { c: f64 },
    /// `L_w = Σ w_i(δ_i−θ_i)²/θ_i`.
    WeightedW { w: Vec<f64> },
    /// `L_c` summed over the rows of a `k × p` parameter matrix stored
    /// row-major. Without `cols` the whole vector is one row.
    MatrixLc {
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cols: Option<usize>,
    },
}

impl LossSpec {
    pub fn l1_star() -> Self {
        LossSpec::WeightedLc { c: 0.0 }
    }

    pub fn lc(c: f64) -> Self {
        LossSpec::WeightedLc { c }
    }

    /// Loss `L(θ, δ)` for an estimate already converted to `f64`.
    pub fn eval(&self, theta: &MeanVector, delta: &[f64]) -> Result<f64> {
        let th = theta.as_slice();
        if th.len() != delta.len() {
            return Err(Error::DimensionMismatch {
                expected: th.len(),
                got: delta.len(),
            });
        }
        match self {
            LossSpec::QuadraticForm { a } => {
                if a.dim() != th.len() {
                    return Err(Error::DimensionMismatch {
                        expected: a.dim(),
                        got: th.len(),
                    });
                }
                let diff: Vec<f64> = delta.iter().zip(th).map(|(d, t)| d - t).collect();
                Ok(a.form(&diff))
            }
            LossSpec::WeightedLc { c } => Ok(lc_loss(*c, th, delta)),
            LossSpec::WeightedW { w } => {
                if w.len() != th.len() {
                    return Err(Error::DimensionMismatch {
                        expected: w.len(),
                        got: th.len(),
                    });
                }
                Ok(w.iter()
                    .zip(th)
                    .zip(delta)
                    .map(|((w, t), d)| w * (d - t) * (d - t) / t)
                    .sum())
            }
            LossSpec::MatrixLc { c, cols } => {
                let cols = cols.unwrap_or(th.len());
                if cols == 0 || !th.len().is_multiple_of(cols) {
                    return Err(Error::DimensionMismatch {
                        expected: cols,
                        got: th.len(),
                    });
                }
                Ok(th
                    .chunks(cols)
                    .zip(delta.chunks(cols))
                    .map(|(t, d)| lc_loss(*c, t, d))
                    .sum())
            }
        }
    }
}

fn lc_loss(c: f64, theta: &[f64], delta: &[f64]) -> f64 {
    let gamma: f64 = theta.iter().sum();
    let sum_delta: f64 = delta.iter().sum();
    let weighted: f64 = theta
        .iter()
        .zip(delta)
        .map(|(t, d)| (d - t) * (d - t) / t)
        .sum();
    weighted + c * (sum_delta - gamma) * (sum_delta - gamma) / gamma
}

/// Scalar loss `L(θ, δ)`; zero iff `δ = θ` for every positive-definite spec.
pub fn eval_loss(loss: &LossSpec, theta: &MeanVector, delta: &EstimateVector) -> Result<f64> {
    loss.eval(theta, delta.as_slice())
}
