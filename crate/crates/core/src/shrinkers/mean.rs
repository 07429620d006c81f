//! Shrinkage toward the data mean `ȳ = Z/p`.
//!
//! All members have the form `δ_i = y_i − g(Z)(y_i − ȳ)·h(y)` and therefore
//! preserve the total: `Σδ_i = Z` for every input.

use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::types::{CountVector, EstimateVector};

/// `δ_i = y_i − g(Z)(y_i − ȳ)` for an arbitrary factor `g`.
///
/// Components may be negative when `g > 1`.
pub fn mean_shrink<T: Scalar>(y: &CountVector, g: impl Fn(u64) -> T) -> Result<EstimateVector<T>> {
    y.require_len(2, "mean_shrink")?;
    let z = y.total();
    Ok(shrink_toward_mean(y, g(z)))
}

fn shrink_toward_mean<T: Scalar>(y: &CountVector, g: T) -> EstimateVector<T> {
    let p = T::from_usize(y.len());
    let mean = T::from_count(y.total()) / p;
    EstimateVector::from_unchecked(
        y.iter()
            .map(|v| {
                let v = T::from_count(v);
                v.clone() - g.clone() * (v - mean.clone())
            })
            .collect(),
    )
}

/// `g(Z) = (p−1)/{p−1+(b0−1)Z}`, dominating `Y` on the region where
/// `B(π) ≤ p·b0`.
pub fn mean_shrink_b0<T: Scalar>(y: &CountVector, b0: T) -> Result<EstimateVector<T>> {
    y.require_len(2, "mean_shrink_b0")?;
    if b0 <= T::one() {
        return Err(invalid("b0", format!("must exceed 1, got {b0:?}")));
    }
    let pm1 = T::from_usize(y.len() - 1);
    let g = pm1.clone() / (pm1 + (b0 - T::one()) * T::from_count(y.total()));
    Ok(shrink_toward_mean(y, g))
}

/// `b0 = (α − 1/p)/(α − 1)`: the bound on `B(π)` that holds on average
/// under a symmetric Dirichlet(α) law for the proportions.
pub fn b0_from_dirichlet_alpha(alpha: f64, p: usize) -> Result<f64> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(invalid("alpha", format!("must exceed 1, got {alpha}")));
    }
    if p == 0 {
        return Err(crate::Error::Empty);
    }
    Ok((alpha - 1.0 / p as f64) / (alpha - 1.0))
}

/// `g₀(z) = (p−1)/{p−1−z+z²/(2p)}`; the denominator is at least `p/2 − 1`.
pub fn careful_g0<T: Scalar>(p: usize, z: u64) -> Result<T> {
    if p < 3 {
        return Err(crate::Error::NonpositiveDenominator(
            "p - 1 - z + z^2/(2p) needs p >= 3",
        ));
    }
    let pm1 = T::from_usize(p - 1);
    let zt = T::from_count(z);
    let denom = pm1.clone() - zt.clone() + zt.clone() * zt / T::from_usize(2 * p);
    Ok(pm1 / denom)
}

/// Shrinks toward the mean with `g₀` only when every count is positive.
pub fn mean_shrink_careful<T: Scalar>(y: &CountVector) -> Result<EstimateVector<T>> {
    y.require_len(3, "mean_shrink_careful")?;
    if y.iter().any(|v| v == 0) {
        return Ok(EstimateVector::from_unchecked(
            y.iter().map(T::from_count).collect(),
        ));
    }
    let g = careful_g0::<T>(y.len(), y.total())?;
    Ok(shrink_toward_mean(y, g))
}
