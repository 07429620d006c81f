//! Monte Carlo risk with reproducible parallel substreams.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::estimator::Estimator;
use crate::loss::LossSpec;
use crate::sampling::{poisson, substream, CHUNK_SIZE};
use crate::shrinkers::{careful_g0, mean_shrink_careful};
use crate::types::{CountVector, MeanVector};

/// Smallest sample accepted by the risk estimators.
pub const MIN_DRAWS: usize = 1000;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl McEstimate {
    /// `|mean − target| / se`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.se
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n / n,
            m2: self.m2 + other.m2 + d * d * self.n * other.n / n,
        }
    }
}

/// `E f(Y)` for `Y_i ~ Poisson(θ_i)` independently.
///
/// Draws are split into fixed chunks of [`CHUNK_SIZE`], chunk `k` reading
/// substream `k` of `seed`; chunk summaries are merged in index order, so
/// the result depends only on `(θ, n, seed)`.
pub fn mc_expectation<F>(theta: &[f64], n: usize, seed: u64, f: F) -> Result<McEstimate>
where
    F: Fn(&[u64]) -> Result<f64> + Sync,
{
    if n < 2 {
        return Err(invalid("n", format!("need at least 2 draws, got {n}")));
    }
    let chunks = n.div_ceil(CHUNK_SIZE);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, k as u64);
            let len = CHUNK_SIZE.min(n - k * CHUNK_SIZE);
            let mut y = vec![0u64; theta.len()];
            let mut m = Moments::default();
            for _ in 0..len {
                for (yi, &t) in y.iter_mut().zip(theta) {
                    *yi = poisson(&mut rng, t);
                }
                m.push(f(&y)?);
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = m.m2 / (m.n - 1.0);
    Ok(McEstimate {
        mean: m.mean,
        se: (var / m.n).sqrt(),
        n,
    })
}

fn check_draws(n: usize) -> Result<()> {
    if n < MIN_DRAWS {
        return Err(invalid(
            "n",
            format!("need at least {MIN_DRAWS} draws, got {n}"),
        ));
    }
    Ok(())
}

fn loss_of(est: &dyn Estimator, loss: &LossSpec, theta: &MeanVector, y: &[u64]) -> Result<f64> {
    let d = est.estimate(&CountVector::new(y.to_vec())?)?;
    loss.eval(theta, d.as_slice())
}

/// Monte Carlo risk `E_θ L(θ, δ(Y))`.
pub fn mc_risk(
    est: &dyn Estimator,
    loss: &LossSpec,
    theta: &MeanVector,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_draws(n)?;
    mc_expectation(theta.as_slice(), n, seed, |y| loss_of(est, loss, theta, y))
}

/// Paired risk difference `R(a) − R(b)` on common draws.
pub fn mc_risk_diff(
    a: &dyn Estimator,
    b: &dyn Estimator,
    loss: &LossSpec,
    theta: &MeanVector,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_draws(n)?;
    mc_expectation(theta.as_slice(), n, seed, |y| {
        Ok(loss_of(a, loss, theta, y)? - loss_of(b, loss, theta, y)?)
    })
}

/// Risk of the careful mean-shrinkage rule under `L₁*`.
pub fn risk_careful_shrink(theta: &MeanVector, n: usize, seed: u64) -> Result<McEstimate> {
    if theta.len() < 3 {
        return Err(invalid(
            "p",
            format!("must be at least 3, got {}", theta.len()),
        ));
    }
    let est = |y: &CountVector| mean_shrink_careful::<f64>(y);
    mc_risk(&est, &LossSpec::l1_star(), theta, n, seed)
}

/// `D₀(y)` with `R(δ, θ) = p + E_θ D₀(Y)` for the careful mean-shrinkage
/// rule under `L₁*`. With `g = g₀(z+1)`:
///
/// * every `y_i ≥ 1`: `g²{p−2−z+(z+1)²/p²·Σ1/(y_i+1)} − 2g(p−1)`;
/// * exactly one zero: `g²u² − 2gu` with `u = 1 − (z+1)/p`;
/// * otherwise `0`.
pub fn careful_d0(y: &CountVector) -> Result<f64> {
    y.require_len(3, "careful_d0")?;
    let p = y.len() as f64;
    let z = y.total();
    let zeros = y.iter().filter(|&v| v == 0).count();
    let g: f64 = careful_g0(y.len(), z + 1)?;
    let z1 = z as f64 + 1.0;
    Ok(match zeros {
        0 => {
            let s: f64 = y.iter().map(|v| 1.0 / (v as f64 + 1.0)).sum();
            g * g * (p - 2.0 - z as f64 + z1 * z1 / (p * p) * s) - 2.0 * g * (p - 1.0)
        }
        1 => {
            let u = 1.0 - z1 / p;
            g * g * u * u - 2.0 * g * u
        }
        _ => 0.0,
    })
}
