//! Simulated regression study for the empirical Bayes rule.
//!
//! A fixed design `x_i ~ U(x_min, x_max)` sets prior shapes
//! `α_i = exp(γ₀ + γ₁x_i)`; each replication draws `θ_i ~ Gamma(α_i, β)` and
//! `Y_i ~ Poisson(θ_i)`, then shrinks `Y` toward `α_i/β` with `β` estimated
//! from the data.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::empirical_bayes;
use crate::error::{invalid, Result};
use crate::risk::McEstimate;
use crate::sampling::{gamma, poisson, substream};
use crate::types::CountVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EbDemoConfig {
    pub p: usize,
    pub gamma0: f64,
    pub gamma1: f64,
    pub x_min: f64,
    pub x_max: f64,
    /// Prior rate of the `θ_i`.
    pub beta: f64,
    pub c: f64,
    pub replications: usize,
    pub seed: u64,
}

impl Default for EbDemoConfig {
    fn default() -> Self {
        EbDemoConfig {
            p: 50,
            gamma0: 0.5,
            gamma1: 1.0,
            x_min: 0.0,
            x_max: 2.0,
            beta: 1.0,
            c: 0.0,
            replications: 200,
            seed: 20_240_917,
        }
    }
}

impl EbDemoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(invalid("p", format!("must be at least 2, got {}", self.p)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(invalid(
                "beta",
                format!("must be positive, got {}", self.beta),
            ));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min <= self.x_max) {
            return Err(invalid(
                "x range",
                format!("need x_min <= x_max, got [{}, {}]", self.x_min, self.x_max),
            ));
        }
        if !(self.gamma0.is_finite() && self.gamma1.is_finite()) {
            return Err(invalid("regression coefficients", "must be finite"));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(invalid("c", format!("must be nonnegative, got {}", self.c)));
        }
        if self.replications < 2 {
            return Err(invalid(
                "replications",
                format!("need at least 2, got {}", self.replications),
            ));
        }
        Ok(())
    }
}

/// One replication: truth, data and both estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EbReplication {
    pub theta: Vec<f64>,
    pub y: Vec<u64>,
    pub eb: Vec<f64>,
    pub raw_loss: f64,
    pub eb_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EbDemoResult {
    pub x: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Prior means `α_i/β`.
    pub prior_mean: Vec<f64>,
    /// The first replication, for scatter plots.
    pub first: EbReplication,
    pub raw_loss: McEstimate,
    pub eb_loss: McEstimate,
    /// Paired `L₁*(EB) − L₁*(Y)` over replications.
    pub diff: McEstimate,
}

fn l1_star(theta: &[f64], d: impl Iterator<Item = f64>) -> f64 {
    theta.iter().zip(d).map(|(t, d)| (d - t).powi(2) / t).sum()
}

fn replicate(cfg: &EbDemoConfig, alpha: &[f64], r: u64) -> Result<EbReplication> {
    let mut rng = substream(cfg.seed, r + 1);
    // Gamma draws with tiny shapes can underflow to zero; L₁* needs θ > 0.
    let theta: Vec<f64> = alpha
        .iter()
        .map(|&a| gamma(&mut rng, a, cfg.beta).max(f64::MIN_POSITIVE))
        .collect();
    let y: Vec<u64> = theta.iter().map(|&t| poisson(&mut rng, t)).collect();
    let eb = empirical_bayes(&CountVector::new(y.clone())?, alpha, cfg.c)?.into_inner();
    Ok(EbReplication {
        raw_loss: l1_star(&theta, y.iter().map(|&v| v as f64)),
        eb_loss: l1_star(&theta, eb.iter().copied()),
        theta,
        y,
        eb,
    })
}

fn summarize(xs: impl Iterator<Item = f64> + Clone) -> McEstimate {
    let n = xs.clone().count();
    let mean = xs.clone().sum::<f64>() / n as f64;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    McEstimate {
        mean,
        se: (var / n as f64).sqrt(),
        n,
    }
}

/// Runs the study. The design reads substream 0 of `seed`, replication `r`
/// reads substream `r + 1`, so results do not depend on thread count.
pub fn eb_regression_demo(cfg: &EbDemoConfig) -> Result<EbDemoResult> {
    cfg.validate()?;
    let mut rng = substream(cfg.seed, 0);
    let x: Vec<f64> = (0..cfg.p)
        .map(|_| cfg.x_min + (cfg.x_max - cfg.x_min) * rng.random::<f64>())
        .collect();
    let alpha: Vec<f64> = x
        .iter()
        .map(|xi| (cfg.gamma0 + cfg.gamma1 * xi).exp())
        .collect();
    let reps: Vec<EbReplication> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| replicate(cfg, &alpha, r))
        .collect::<Result<_>>()?;
    let raw_loss = summarize(reps.iter().map(|r| r.raw_loss));
    let eb_loss = summarize(reps.iter().map(|r| r.eb_loss));
    let diff = summarize(reps.iter().map(|r| r.eb_loss - r.raw_loss));
    let prior_mean = alpha.iter().map(|a| a / cfg.beta).collect();
    Ok(EbDemoResult {
        x,
        alpha,
        prior_mean,
        first: reps.into_iter().next().expect("at least two replications"),
        raw_loss,
        eb_loss,
        diff,
    })
}
