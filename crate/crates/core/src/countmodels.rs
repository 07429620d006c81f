//! Count models built from an independent sum `γ = Σθ_i` and proportions
//! `π = θ/γ`: sampling, conjugate updates, marginal pmfs and moments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sampling::{dirichlet, gamma, poisson, substream, CHUNK_SIZE};
use crate::scalar::Scalar;
use crate::series::negbin_ln_pmf;
use crate::special::{ln_factorial, ln_gamma};
use crate::types::CountVector;

/// Prior law `q(γ)` for the sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SumLaw<T: Scalar = f64> {
    /// Improper `q(γ) ∝ 1`.
    Flat,
    /// Shape `alpha0`, rate `beta0`.
    Gamma { alpha0: T, beta0: T },
}

impl<T: Scalar> SumLaw<T> {
    pub fn validate(&self) -> Result<()> {
        if let SumLaw::Gamma { alpha0, beta0 } = self {
            if !alpha0.is_positive() || !beta0.is_positive() {
                return Err(invalid(
                    "sum_law",
                    format!("gamma parameters must be positive, got ({alpha0:?}, {beta0:?})"),
                ));
            }
        }
        Ok(())
    }

    pub fn is_proper(&self) -> bool {
        matches!(self, SumLaw::Gamma { .. })
    }

    /// `ρ(z) = K(z)/K(z−1)` with `K(z) = ∫ γ^z e^{−γ} q(γ) dγ`.
    pub fn k_ratio(&self, z: u64) -> T {
        match self {
            SumLaw::Flat => T::from_count(z),
            SumLaw::Gamma { alpha0, beta0 } => {
                (alpha0.clone() + T::from_count(z) - T::one()) / (beta0.clone() + T::one())
            }
        }
    }

    /// Law of `γ` given a total `z`.
    pub fn posterior(&self, z: u64) -> SumLaw<T> {
        match self {
            SumLaw::Flat => SumLaw::Gamma {
                alpha0: T::from_count(z + 1),
                beta0: T::one(),
            },
            SumLaw::Gamma { alpha0, beta0 } => SumLaw::Gamma {
                alpha0: alpha0.clone() + T::from_count(z),
                beta0: beta0.clone() + T::one(),
            },
        }
    }
}

/// `K(z)` in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KFunction {
    law: (f64, f64),
    flat: bool,
}

impl KFunction {
    pub fn new(law: &SumLaw) -> Result<Self> {
        law.validate()?;
        Ok(match *law {
            SumLaw::Flat => KFunction {
                law: (1.0, 0.0),
                flat: true,
            },
            SumLaw::Gamma { alpha0, beta0 } => KFunction {
                law: (alpha0, beta0),
                flat: false,
            },
        })
    }

    /// `ln K(z)`; `K(z) = z!` for the flat law.
    pub fn ln_k(&self, z: u64) -> f64 {
        if self.flat {
            return ln_factorial(z);
        }
        let (a, b) = self.law;
        a * b.ln() + ln_gamma(a + z as f64) - ln_gamma(a) - (a + z as f64) * (1.0 + b).ln()
    }

    pub fn ratio(&self, z: u64) -> f64 {
        if self.flat {
            z as f64
        } else {
            (self.law.0 + z as f64 - 1.0) / (self.law.1 + 1.0)
        }
    }
}

/// `γ ~ q` independent of `π ~ Dirichlet(α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumProportionsPrior {
    pub sum_law: SumLaw,
    pub alpha: Vec<f64>,
}

impl SumProportionsPrior {
    pub fn new(sum_law: SumLaw, alpha: Vec<f64>) -> Result<Self> {
        let prior = SumProportionsPrior { sum_law, alpha };
        prior.validate()?;
        Ok(prior)
    }

    pub fn validate(&self) -> Result<()> {
        self.sum_law.validate()?;
        if self.alpha.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(invalid(
                "alpha",
                format!("must be positive and finite, got {a}"),
            ));
        }
        Ok(())
    }

    /// Symmetric prior: `Dirichlet(α, …, α)` over `p` cells.
    pub fn symmetric(sum_law: SumLaw, p: usize, alpha: f64) -> Result<Self> {
        Self::new(sum_law, vec![alpha; p])
    }

    /// `γ ~ Gamma(pα, β)`, `π ~ Dirichlet(α, …, α)`: independent
    /// `θ_i ~ Gamma(α, β)`.
    pub fn independent_gamma(p: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::symmetric(
            SumLaw::Gamma {
                alpha0: p as f64 * alpha,
                beta0: beta,
            },
            p,
            alpha,
        )
    }

    pub fn p(&self) -> usize {
        self.alpha.len()
    }

    fn symmetric_alpha(&self) -> Option<f64> {
        let a = self.alpha[0];
        self.alpha.iter().all(|&x| x == a).then_some(a)
    }
}

/// One draw of `(θ, y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDraw {
    pub theta: Vec<f64>,
    pub y: Vec<u64>,
}

/// `n` draws of `γ ~ q`, `π ~ Dirichlet(α)`, `θ = γπ`, `y_i ~ Poisson(θ_i)`.
///
/// Draw `k` comes from substream `k / CHUNK_SIZE` of `seed`, so the output
/// is a function of `(seed, n)` only.
pub fn sample_joint(prior: &SumProportionsPrior, seed: u64, n: usize) -> Result<Vec<JointDraw>> {
    prior.validate()?;
    let SumLaw::Gamma { alpha0, beta0 } = prior.sum_law else {
        return Err(Error::ImproperPrior(
            "cannot sample from a flat sum law".into(),
        ));
    };
    let chunks = n.div_ceil(CHUNK_SIZE);
    let out: Vec<Vec<JointDraw>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, k as u64);
            let len = CHUNK_SIZE.min(n - k * CHUNK_SIZE);
            (0..len)
                .map(|_| {
                    let g = gamma(&mut rng, alpha0, beta0);
                    let pi = dirichlet(&mut rng, &prior.alpha);
                    let theta: Vec<f64> = pi.iter().map(|x| g * x).collect();
                    let y = theta.iter().map(|&t| poisson(&mut rng, t)).collect();
                    JointDraw { theta, y }
                })
                .collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

/// Conjugate update: `α → α + y`, `Gamma(α₀, β₀) → Gamma(α₀+Z, β₀+1)`,
/// flat `→ Gamma(Z+1, 1)`.
pub fn posterior(prior: &SumProportionsPrior, y: &CountVector) -> Result<SumProportionsPrior> {
    prior.validate()?;
    if y.len() != prior.p() {
        return Err(Error::DimensionMismatch {
            expected: prior.p(),
            got: y.len(),
        });
    }
    Ok(SumProportionsPrior {
        sum_law: prior.sum_law.posterior(y.total()),
        alpha: prior
            .alpha
            .iter()
            .zip(y.iter())
            .map(|(a, v)| a + v as f64)
            .collect(),
    })
}

/// `ln f(y)` for the marginal law of the counts.
pub fn ln_marginal_pmf(y: &CountVector, prior: &SumProportionsPrior) -> Result<f64> {
    prior.validate()?;
    if y.len() != prior.p() {
        return Err(Error::DimensionMismatch {
            expected: prior.p(),
            got: y.len(),
        });
    }
    if !prior.sum_law.is_proper() {
        return Err(Error::ImproperPrior(
            "the flat sum law has no normalised marginal".into(),
        ));
    }
    let k = KFunction::new(&prior.sum_law)?;
    let z = y.total();
    let a_sum: f64 = prior.alpha.iter().sum();
    let mut ln = k.ln_k(z) + ln_gamma(a_sum) - ln_gamma(a_sum + z as f64);
    for (a, v) in prior.alpha.iter().zip(y.iter()) {
        ln += ln_gamma(a + v as f64) - ln_gamma(*a) - ln_factorial(v);
    }
    Ok(ln)
}

pub fn marginal_pmf(y: &CountVector, prior: &SumProportionsPrior) -> Result<f64> {
    ln_marginal_pmf(y, prior).map(f64::exp)
}

/// `Pr{Z = z}` when `θ_i ~ Gamma(α_i, β)` independently and `pᾱ = Σα_i`.
pub fn marginal_z_pmf(z: u64, p_alpha_bar: f64, beta: f64) -> Result<f64> {
    if !(p_alpha_bar > 0.0 && beta > 0.0) {
        return Err(invalid(
            "marginal_z_pmf",
            format!("need positive p*alpha_bar and beta, got {p_alpha_bar} and {beta}"),
        ));
    }
    Ok(negbin_ln_pmf(z, p_alpha_bar, beta).exp())
}

/// Prior moments for a symmetric prior with a Gamma sum law whose mean is
/// `pθ₀` and variance `pτ₀²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountMoments {
    pub theta0: f64,
    pub tau0_sq: f64,
    pub var_theta: f64,
    pub cov_theta: f64,
    /// `corr(θ_i, θ_j)`.
    pub rho: f64,
    pub var_y: f64,
    /// `cov(Y_i, Y_j) = cov(θ_i, θ_j)`.
    pub cov_y: f64,
    pub corr_y: f64,
}

pub fn count_moments(prior: &SumProportionsPrior) -> Result<CountMoments> {
    prior.validate()?;
    let SumLaw::Gamma { alpha0, beta0 } = prior.sum_law else {
        return Err(Error::ImproperPrior("moments need a proper sum law".into()));
    };
    let alpha = prior
        .symmetric_alpha()
        .ok_or_else(|| invalid("alpha", "moment formulas need a symmetric Dirichlet"))?;
    let p = prior.p() as f64;
    let theta0 = alpha0 / (p * beta0);
    let tau0_sq = alpha0 / (p * beta0 * beta0);
    let pa1 = p * alpha + 1.0;
    let var_theta = theta0 * theta0 * (p - 1.0) / pa1 + tau0_sq * (alpha + 1.0) / pa1;
    let cov_theta = (alpha * tau0_sq - theta0 * theta0) / pa1;
    let rho = (alpha * tau0_sq - theta0 * theta0)
        / ((alpha + 1.0) * tau0_sq + (p - 1.0) * theta0 * theta0);
    let var_y = theta0 + var_theta;
    Ok(CountMoments {
        theta0,
        tau0_sq,
        var_theta,
        cov_theta,
        rho,
        var_y,
        cov_y: cov_theta,
        corr_y: rho * var_theta / var_y,
    })
}

/// `ln Γ(pα)/Γ(α)^p · ΠΓ(α+y_i)/Γ(pα+z)`: the likelihood of a symmetric
/// Dirichlet α given the counts, with the sum law integrated out.
pub fn symmetric_alpha_ln_lik(y: &CountVector, alpha: f64) -> f64 {
    let p = y.len() as f64;
    let z = y.total() as f64;
    let mut ln = ln_gamma(p * alpha) - ln_gamma(p * alpha + z);
    for v in y.iter() {
        ln += ln_gamma(alpha + v as f64) - ln_gamma(alpha);
    }
    ln
}

/// Maximiser of [`symmetric_alpha_ln_lik`] over `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaFit {
    pub alpha: f64,
    pub ln_lik: f64,
    /// `(α − 1/p)/(α − 1)` when `α > 1`.
    pub b0: Option<f64>,
}

/// Golden-section search over `ln α`.
pub fn fit_symmetric_alpha(y: &CountVector, lo: f64, hi: f64) -> Result<AlphaFit> {
    y.require_len(2, "fit_symmetric_alpha")?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(invalid(
            "bounds",
            format!("need 0 < lo < hi, got [{lo}, {hi}]"),
        ));
    }
    let f = |t: f64| symmetric_alpha_ln_lik(y, t.exp());
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-10 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    let alpha = (0.5 * (a + b)).exp();
    let p = y.len() as f64;
    Ok(AlphaFit {
        alpha,
        ln_lik: symmetric_alpha_ln_lik(y, alpha),
        b0: (alpha > 1.0).then(|| (alpha - 1.0 / p) / (alpha - 1.0)),
    })
}

/// Row priors for dependence over time within each of `k` processes:
/// row `i` gets `γ_i ~ Gamma(pα_i, β_i)` and `Dirichlet(α_i, …, α_i)` over
/// its `p` windows.
pub fn time_dependence_priors(
    alpha: &[f64],
    beta: &[f64],
    p: usize,
) -> Result<Vec<SumProportionsPrior>> {
    paired_priors(alpha, beta, p)
}

/// Column priors for dependence across `k` processes: window `j` gets
/// `κ_j ~ Gamma(kα_j, β_j)` and `Dirichlet(α_j, …, α_j)` over the processes.
pub fn cross_process_priors(
    alpha: &[f64],
    beta: &[f64],
    k: usize,
) -> Result<Vec<SumProportionsPrior>> {
    paired_priors(alpha, beta, k)
}

fn paired_priors(alpha: &[f64], beta: &[f64], cells: usize) -> Result<Vec<SumProportionsPrior>> {
    if alpha.len() != beta.len() {
        return Err(Error::DimensionMismatch {
            expected: alpha.len(),
            got: beta.len(),
        });
    }
    if cells == 0 {
        return Err(Error::Empty);
    }
    alpha
        .iter()
        .zip(beta)
        .map(|(&a, &b)| SumProportionsPrior::independent_gamma(cells, a, b))
        .collect()
}
