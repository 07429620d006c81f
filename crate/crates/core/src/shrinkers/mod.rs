//! Data-only estimators: no prior enters their construction.
//!
//! * [`mle`]: the benchmark `δ₀ = Y`.
//! * [`delta_c`] and [`dc_family`]: shrinkage toward the origin under `L_c`.
//! * [`quad_dominator`] and [`cumulative_estimator`]: improvements on `Y`
//!   under an arbitrary quadratic-form loss.
//! * [`mean_shrink_b0`] and [`mean_shrink_careful`]: sum-preserving
//!   shrinkage toward the data mean.
//! * [`weighted_cz`] and [`weighted_cz_truncated`]: weighted loss, including
//!   infinitely many parameters.
//! * [`matrix_shrinker`]: `k × p` count matrices.

mod matrix;
mod mean;
mod origin;
mod quadratic;
mod weighted;

pub use matrix::matrix_shrinker;
pub use mean::{
    b0_from_dirichlet_alpha, careful_g0, mean_shrink, mean_shrink_b0, mean_shrink_careful,
};
pub use origin::{dc_family, delta_c, phi_dc, phi_delta_c, PsiFunction};
pub use quadratic::{
    cumulative_estimator, harmonic, hwang_psi, monotonicity_violations, positive_count,
    quad_dominator, CumulativeEstimate, PositiveCountRule, QuadOptions,
};
pub use weighted::{
    truncated_total, weighted_cz, weighted_cz_general, weighted_cz_truncated, GeometricWeights,
    SummableWeights, WeightScheme, TRUNCATION_TOL,
};

use crate::error::Result;
use crate::scalar::Scalar;
use crate::types::{CountVector, EstimateVector};

/// The maximum likelihood estimator `δ₀ = Y`.
pub fn mle<T: Scalar>(y: &CountVector) -> Result<EstimateVector<T>> {
    EstimateVector::new(y.iter().map(T::from_count).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mle_is_identity() {
        let y = CountVector::new(vec![3, 0, 5]).unwrap();
        let d: EstimateVector = mle(&y).unwrap();
        assert_eq!(d.as_slice(), &[3.0, 0.0, 5.0]);
        assert!(CountVector::new(vec![]).is_err());
    }
}
