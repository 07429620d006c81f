//! Shrinkage for a `k × p` count matrix with columns `j = 1..p`.

use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::types::{CountMatrix, EstimateMatrix};

/// `δ̂_{i,j} = [(1+c)(p−1+Z_j)/{p−1+(1+c)Z}]·Y_{i,j}`, with `Z_j` the column
/// totals and `Z` the grand total.
///
/// With a single column the factor is one and `Y` is returned.
pub fn matrix_shrinker<T: Scalar>(y: &CountMatrix, c: T) -> Result<EstimateMatrix<T>> {
    if c.is_negative() {
        return Err(invalid("c", format!("must be nonnegative, got {c:?}")));
    }
    let p = y.cols();
    let one_c = T::one() + c;
    let pm1 = T::from_usize(p - 1);
    let denom = pm1.clone() + one_c.clone() * T::from_count(y.total());
    let factors: Vec<T> = y
        .column_totals()
        .into_iter()
        .map(|zj| {
            if denom.is_positive() {
                one_c.clone() * (pm1.clone() + T::from_count(zj)) / denom.clone()
            } else {
                // p = 1 and Z = 0: the whole matrix is zero.
                T::one()
            }
        })
        .collect();
    let mut values = Vec::with_capacity(y.rows() * p);
    for i in 0..y.rows() {
        for (j, f) in factors.iter().enumerate() {
            values.push(f.clone() * T::from_count(y.get(i, j)));
        }
    }
    Ok(EstimateMatrix::from_parts(y.rows(), p, values))
}
