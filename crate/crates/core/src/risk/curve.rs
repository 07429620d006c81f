//! Risk as a function of the total mean `γ`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bayes::eb_factor;
use crate::error::{invalid, Result};
use crate::estimator::EstimatorSpec;
use crate::loss::LossSpec;
use crate::risk::exact::{risk_eb, risk_mean_shrink, risk_shrink_family};
use crate::risk::mc::mc_risk;
use crate::series::SeriesConfig;
use crate::types::MeanVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveMethod {
    ExactSeries,
    MonteCarlo { n: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskCurve {
    pub gamma_grid: Vec<f64>,
    pub risk_values: Vec<f64>,
    /// Present for Monte Carlo curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_errors: Option<Vec<f64>>,
    pub estimator: EstimatorSpec,
    pub loss: LossSpec,
    pub method: CurveMethod,
}

impl RiskCurve {
    /// `gamma,risk,se_or_zero` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gamma,risk,se_or_zero\n");
        for (i, (g, r)) in self.gamma_grid.iter().zip(&self.risk_values).enumerate() {
            let se = self.standard_errors.as_ref().map_or(0.0, |s| s[i]);
            let _ = writeln!(out, "{g},{r},{se}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serializes")
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.risk_values.windows(2).all(|w| w[1] >= w[0])
    }
}

/// `points` values from `min` to `max`, evenly spaced or log-spaced.
pub fn gamma_grid(min: f64, max: f64, points: usize, log_spaced: bool) -> Result<Vec<f64>> {
    if !(min > 0.0 && min < max && max.is_finite()) {
        return Err(invalid(
            "gamma grid",
            format!("need 0 < min < max, got [{min}, {max}]"),
        ));
    }
    if points < 2 {
        return Err(invalid(
            "gamma grid",
            format!("need at least 2 points, got {points}"),
        ));
    }
    let step = |k: usize| k as f64 / (points - 1) as f64;
    Ok((0..points)
        .map(|k| {
            if log_spaced {
                (min.ln() + (max.ln() - min.ln()) * step(k)).exp()
            } else {
                min + (max - min) * step(k)
            }
        })
        .collect())
}

fn lc_penalty(loss: &LossSpec) -> Result<f64> {
    match loss {
        LossSpec::WeightedLc { c } => Ok(*c),
        other => Err(invalid(
            "loss",
            format!("series curves need an L_c loss, got {other:?}"),
        )),
    }
}

/// Exact-series risk curve at uniform proportions `θ = (γ/p, …, γ/p)`.
///
/// Supports the origin-shrinkage family, the empirical Bayes rule under
/// `L₁*` and the `b0` mean-shrinkage rule.
pub fn risk_curve_series(
    spec: &EstimatorSpec,
    p: usize,
    loss: &LossSpec,
    grid: &[f64],
    cfg: &SeriesConfig,
) -> Result<RiskCurve> {
    let c = lc_penalty(loss)?;
    let risk: Vec<f64> = if let Some(phi) = spec.shrink_phi(p) {
        grid.iter()
            .map(|&g| risk_shrink_family(|z| phi(z), p, c, g, cfg))
            .collect::<Result<_>>()?
    } else {
        match spec {
            EstimatorSpec::Eb { alpha, c: c_est } => {
                if c != 0.0 || *c_est != 0.0 {
                    return Err(invalid(
                        "c",
                        "the empirical Bayes series covers L1* with c = 0 only",
                    ));
                }
                if alpha.len() != p {
                    return Err(crate::Error::DimensionMismatch {
                        expected: p,
                        got: alpha.len(),
                    });
                }
                let pab: f64 = alpha.iter().sum();
                eb_factor(&pab, p, &0.0, 0)?;
                grid.iter()
                    .map(|&g| {
                        let theta = MeanVector::uniform(p, g)?;
                        risk_eb(
                            |z| eb_factor(&pab, p, &0.0, z).unwrap_or(f64::NAN),
                            p,
                            alpha,
                            &theta,
                            cfg,
                        )
                    })
                    .collect::<Result<_>>()?
            }
            EstimatorSpec::MeanShrink { b0 } => {
                if !(*b0 > 1.0) {
                    return Err(invalid("b0", format!("must exceed 1, got {b0}")));
                }
                let pm1 = p as f64 - 1.0;
                let b0 = *b0;
                grid.iter()
                    .map(|&g| {
                        let d = risk_mean_shrink(
                            |z| pm1 / (pm1 + (b0 - 1.0) * z as f64),
                            p,
                            g,
                            p as f64,
                            cfg,
                        )?;
                        Ok(p as f64 + c + d)
                    })
                    .collect::<Result<_>>()?
            }
            other => {
                return Err(invalid(
                    "estimator",
                    format!("no series risk for `{}`; use Monte Carlo", other.kind()),
                ))
            }
        }
    };
    Ok(RiskCurve {
        gamma_grid: grid.to_vec(),
        risk_values: risk,
        standard_errors: None,
        estimator: spec.clone(),
        loss: loss.clone(),
        method: CurveMethod::ExactSeries,
    })
}

/// Monte Carlo risk curve at uniform proportions; grid point `k` uses seed
/// `seed + k`.
pub fn risk_curve_mc(
    spec: &EstimatorSpec,
    p: usize,
    loss: &LossSpec,
    grid: &[f64],
    n: usize,
    seed: u64,
) -> Result<RiskCurve> {
    let est = spec.build(p)?;
    let mut risk = Vec::with_capacity(grid.len());
    let mut se = Vec::with_capacity(grid.len());
    for (k, &g) in grid.iter().enumerate() {
        let r = mc_risk(
            est.as_ref(),
            loss,
            &MeanVector::uniform(p, g)?,
            n,
            seed.wrapping_add(k as u64),
        )?;
        risk.push(r.mean);
        se.push(r.se);
    }
    Ok(RiskCurve {
        gamma_grid: grid.to_vec(),
        risk_values: risk,
        standard_errors: Some(se),
        estimator: spec.clone(),
        loss: loss.clone(),
        method: CurveMethod::MonteCarlo { n, seed },
    })
}
