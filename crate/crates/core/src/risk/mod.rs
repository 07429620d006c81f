//! Risk evaluation: exact series over the law of `Z`, Monte Carlo with
//! reproducible substreams, dominance verifiers and risk curves.

pub mod curve;
pub mod dominance;
pub mod exact;
pub mod mc;

pub use curve::{gamma_grid, risk_curve_mc, risk_curve_series, CurveMethod, RiskCurve};
pub use dominance::{
    dominance_check_quad, dominance_check_theorem2, ConditionResult, QuadReport, QuadViolation,
    Theorem2Report, QUAD_GRID_LIMIT,
};
pub use exact::{
    appendix_rhs, d_star, mbr_gamma, mean_shrink_bound, risk_bayes_gamma_l1, risk_delta_c_closed,
    risk_eb, risk_eb_terms, risk_mean_shrink, risk_shrink_family, BayesGammaRisk, EbRiskTerms,
};
pub use mc::{
    careful_d0, mc_expectation, mc_risk, mc_risk_diff, risk_careful_shrink, McEstimate, MIN_DRAWS,
};

use serde::Serialize;

use crate::error::Result;
use crate::loss::LossSpec;
use crate::series::SeriesConfig;
use crate::types::{CountVector, EstimateVector, MeanVector};

/// Both sides of the risk identity for `δ_i = (1+c)Y_iκ(Z)/{p−1+(1+c)Z}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixCheck {
    /// Monte Carlo risk under `L_c`.
    pub lhs: McEstimate,
    /// Exact series.
    pub rhs: f64,
    pub diff: f64,
}

/// Compares the Monte Carlo risk of the `κ` rule at `θ` with the series
/// form at `γ = Σθ_i`.
pub fn appendix_identity_check<K>(
    theta: &MeanVector,
    c: f64,
    kappa: K,
    n: usize,
    seed: u64,
    cfg: &SeriesConfig,
) -> Result<AppendixCheck>
where
    K: Fn(u64) -> f64 + Send + Sync + Copy,
{
    let p = theta.len();
    let rhs = appendix_rhs(p, c, theta.sum(), kappa, cfg)?;
    let est = move |y: &CountVector| {
        let z = y.total();
        let f = (1.0 + c) * kappa(z) / (p as f64 - 1.0 + (1.0 + c) * z as f64);
        Ok(EstimateVector::from_unchecked(
            y.iter().map(|v| f * v as f64).collect(),
        ))
    };
    let lhs = mc_risk(&est, &LossSpec::lc(c), theta, n, seed)?;
    Ok(AppendixCheck {
        lhs,
        rhs,
        diff: (lhs.mean - rhs).abs(),
    })
}
