//! Estimators for the weighted loss `L_w = Σ w_i(δ_i−θ_i)²/θ_i`.

use std::collections::BTreeMap;

use crate::error::{invalid, Error, Result};
use crate::scalar::{sum, Scalar};
use crate::types::{CountVector, EstimateVector};

/// Finitely many positive weights.
///
/// Weights are only required to be positive. [`WeightScheme::in_unit_envelope`]
/// reports whether they also lie inside a closed interval of `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme<T: Scalar = f64> {
    weights: Vec<T>,
}

impl<T: Scalar> WeightScheme<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(invalid("w", format!("weights must be positive, got {w:?}")));
        }
        Ok(WeightScheme { weights })
    }

    pub fn uniform(p: usize, w: T) -> Result<Self> {
        Self::new(vec![w; p])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `w₀ = Σ w_i`.
    pub fn total(&self) -> T {
        sum(self.weights.iter().cloned())
    }

    /// `(min w_i, max w_i)`.
    pub fn envelope(&self) -> (T, T) {
        let mut lo = self.weights[0].clone();
        let mut hi = self.weights[0].clone();
        for w in &self.weights[1..] {
            if *w < lo {
                lo = w.clone();
            }
            if *w > hi {
                hi = w.clone();
            }
        }
        (lo, hi)
    }

    pub fn in_unit_envelope(&self) -> bool {
        let (_, hi) = self.envelope();
        hi < T::one()
    }

    /// `v(y) = Σ w_i y_i`.
    pub fn weighted_total(&self, y: &[u64]) -> T {
        sum(self
            .weights
            .iter()
            .zip(y)
            .map(|(w, &v)| w.clone() * T::from_count(v)))
    }
}

fn check_len<T: Scalar>(y: &CountVector, w: &WeightScheme<T>) -> Result<()> {
    if y.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            got: y.len(),
        });
    }
    Ok(())
}

/// `δ_i = {1 − (w₀−1)/(w₀−1+v(y))}·y_i`; requires `w₀ > 1`.
pub fn weighted_cz<T: Scalar>(y: &CountVector, w: &WeightScheme<T>) -> Result<EstimateVector<T>> {
    check_len(y, w)?;
    let w0 = w.total();
    if w0 <= T::one() {
        return Err(invalid(
            "w0",
            format!("total weight must exceed 1, got {w0:?}"),
        ));
    }
    let k = w0 - T::one();
    let v = w.weighted_total(y.as_slice());
    Ok(scale(y, k.clone() / (k + v)))
}

/// `δ_i = {1 − ψ(v)/(w₀−ε+v)}·y_i`; requires `w₀ > ε`.
///
/// `ψ ≡ w₀−1`, `ε = 1` recovers [`weighted_cz`].
pub fn weighted_cz_general<T: Scalar>(
    y: &CountVector,
    w: &WeightScheme<T>,
    psi: impl Fn(&T) -> T,
    eps: T,
) -> Result<EstimateVector<T>> {
    check_len(y, w)?;
    let w0 = w.total();
    if w0 <= eps {
        return Err(invalid(
            "eps",
            format!("total weight {w0:?} must exceed eps {eps:?}"),
        ));
    }
    let v = w.weighted_total(y.as_slice());
    let shrink = psi(&v) / (w0 - eps + v);
    Ok(scale(y, shrink))
}

fn scale<T: Scalar>(y: &CountVector, shrink: T) -> EstimateVector<T> {
    let factor = T::one() - shrink;
    EstimateVector::from_unchecked(
        y.iter()
            .map(|c| factor.clone() * T::from_count(c))
            .collect(),
    )
}

/// Tail tolerance for infinite weight sequences.
pub const TRUNCATION_TOL: f64 = 1e-12;

const MAX_WEIGHT_TERMS: usize = 10_000_000;

/// A weight sequence over indices `1, 2, …` with a known tail.
pub trait SummableWeights: Sync {
    /// `w_i`, 1-based.
    fn weight(&self, i: usize) -> f64;
    /// `Σ_{j ≥ from} w_j`; infinite when the sequence is not summable.
    fn tail_sum(&self, from: usize) -> f64;
}

/// `w_i = first · ratio^{i−1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricWeights {
    pub first: f64,
    pub ratio: f64,
}

impl SummableWeights for GeometricWeights {
    fn weight(&self, i: usize) -> f64 {
        self.first * self.ratio.powi(i as i32 - 1)
    }

    fn tail_sum(&self, from: usize) -> f64 {
        if self.ratio >= 1.0 {
            return f64::INFINITY;
        }
        self.weight(from) / (1.0 - self.ratio)
    }
}

/// `w₀` summed until the remaining tail is below [`TRUNCATION_TOL`].
///
/// Returns the total and the number of terms used.
pub fn truncated_total(w: &dyn SummableWeights) -> Result<(f64, usize)> {
    let mut total = 0.0;
    let mut comp = 0.0;
    for n in 1..=MAX_WEIGHT_TERMS {
        let wi = w.weight(n);
        if !(wi > 0.0 && wi.is_finite()) {
            return Err(invalid(
                "w",
                format!("weight {n} must be positive, got {wi}"),
            ));
        }
        // Kahan summation keeps the total accurate over long tails.
        let t = wi - comp;
        let next = total + t;
        comp = (next - total) - t;
        total = next;
        let tail = w.tail_sum(n + 1);
        if tail.is_finite() && tail < TRUNCATION_TOL {
            return Ok((total, n));
        }
    }
    Err(Error::SeriesDivergence {
        max_terms: MAX_WEIGHT_TERMS,
    })
}

/// Weighted estimator over infinitely many indices, of which finitely many
/// are nonzero. Keys are 1-based; absent keys are zero counts and map to zero.
pub fn weighted_cz_truncated(
    y: &BTreeMap<usize, u64>,
    w: &dyn SummableWeights,
) -> Result<BTreeMap<usize, f64>> {
    if y.contains_key(&0) {
        return Err(invalid("y", "indices are 1-based"));
    }
    let (w0, _) = truncated_total(w)?;
    if w0 <= 1.0 {
        return Err(invalid(
            "w0",
            format!("total weight must exceed 1, got {w0}"),
        ));
    }
    let v: f64 = y.iter().map(|(&i, &c)| w.weight(i) * c as f64).sum();
    let factor = 1.0 - (w0 - 1.0) / (w0 - 1.0 + v);
    Ok(y.iter()
        .filter(|(_, &c)| c > 0)
        .map(|(&i, &c)| (i, factor * c as f64))
        .collect())
}
