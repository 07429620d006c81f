//! JSON-described estimators and the [`Estimator`] trait used by the
//! Monte Carlo engine and the command-line tools.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bayes::{
    bayes_gamma, bayes_sum_dirichlet, empirical_bayes, hierarchical_bayes, GammaPriorVec,
    HyperPrior,
};
use crate::countmodels::SumLaw;
use crate::error::{invalid, Error, Result};
use crate::loss::{build_cumulative_matrix, build_sum_penalty_matrix, QuadraticForm};
use crate::shrinkers::{
    dc_family, delta_c, matrix_shrinker, mean_shrink_b0, mean_shrink_careful, mle, phi_dc,
    phi_delta_c, quad_dominator, weighted_cz, PositiveCountRule, PsiFunction, QuadOptions,
    WeightScheme,
};
use crate::types::{CountMatrix, CountVector, EstimateVector};

/// Version of the [`EstimatorSpec`] JSON schema.
pub const ESTIMATOR_SPEC_VERSION: u32 = 1;

/// A map from counts to estimates.
pub trait Estimator: Send + Sync {
    fn estimate(&self, y: &CountVector) -> Result<EstimateVector>;
}

impl<F> Estimator for F
where
    F: Fn(&CountVector) -> Result<EstimateVector> + Send + Sync,
{
    fn estimate(&self, y: &CountVector) -> Result<EstimateVector> {
        self(y)
    }
}

/// `ψ` as written in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PsiSpec {
    Const {
        value: f64,
    },
    /// `ψ(z) = values[min(z, len−1)]`.
    Table {
        values: Vec<f64>,
    },
}

impl PsiSpec {
    pub fn to_psi(&self) -> PsiFunction {
        match self {
            PsiSpec::Const { value } => PsiFunction::Constant(*value),
            PsiSpec::Table { values } => PsiFunction::Table(values.clone()),
        }
    }
}

/// Loss matrix as written in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixSpec {
    Identity,
    SumPenalty { c: f64 },
    Cumulative,
    Explicit { rows: Vec<Vec<f64>> },
}

impl MatrixSpec {
    pub fn build(&self, p: usize) -> Result<QuadraticForm> {
        let a = match self {
            MatrixSpec::Identity => QuadraticForm::identity(p)?,
            MatrixSpec::SumPenalty { c } => build_sum_penalty_matrix(p, *c)?,
            MatrixSpec::Cumulative => build_cumulative_matrix(p)?,
            MatrixSpec::Explicit { rows } => QuadraticForm::from_rows(rows.clone())?,
        };
        if a.dim() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: a.dim(),
            });
        }
        Ok(a)
    }
}

fn zero() -> f64 {
    0.0
}

/// Every estimator reachable from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorSpec {
    Mle,
    DeltaC {
        c: f64,
    },
    /// Clevenson–Zidek, `δ^c` at `c = 0`.
    Cz,
    DcFamily {
        c: f64,
        psi: PsiSpec,
    },
    QuadDominator {
        #[serde(rename = "A")]
        a: MatrixSpec,
        #[serde(default)]
        variant: PositiveCountRule,
    },
    Eb {
        alpha: Vec<f64>,
        #[serde(default = "zero")]
        c: f64,
    },
    WeightedCz {
        w: Vec<f64>,
    },
    MeanShrink {
        b0: f64,
    },
    MeanShrinkCareful,
    BayesGamma {
        alpha: Vec<f64>,
        beta: f64,
        #[serde(default = "zero")]
        c: f64,
    },
    BayesSumDirichlet {
        sum_law: SumLaw,
        #[serde(default = "zero")]
        c: f64,
    },
    HierarchicalBayes {
        eta: f64,
        zeta: f64,
        #[serde(default = "zero")]
        c: f64,
    },
    /// Counts are a row-major `k × cols` matrix; `cols` defaults to the
    /// whole vector.
    Matrix {
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cols: Option<usize>,
    },
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

impl EstimatorSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            EstimatorSpec::Mle => "mle",
            EstimatorSpec::DeltaC { .. } => "delta_c",
            EstimatorSpec::Cz => "cz",
            EstimatorSpec::DcFamily { .. } => "dc_family",
            EstimatorSpec::QuadDominator { .. } => "quad_dominator",
            EstimatorSpec::Eb { .. } => "eb",
            EstimatorSpec::WeightedCz { .. } => "weighted_cz",
            EstimatorSpec::MeanShrink { .. } => "mean_shrink",
            EstimatorSpec::MeanShrinkCareful => "mean_shrink_careful",
            EstimatorSpec::BayesGamma { .. } => "bayes_gamma",
            EstimatorSpec::BayesSumDirichlet { .. } => "bayes_sum_dirichlet",
            EstimatorSpec::HierarchicalBayes { .. } => "hierarchical_bayes",
            EstimatorSpec::Matrix { .. } => "matrix",
        }
    }

    /// Validates the parameters for dimension `p` and returns a reusable
    /// estimator.
    pub fn build(&self, p: usize) -> Result<Arc<dyn Estimator>> {
        if p == 0 {
            return Err(Error::Empty);
        }
        Ok(match self.clone() {
            EstimatorSpec::Mle => Arc::new(|y: &CountVector| mle::<f64>(y)),
            EstimatorSpec::DeltaC { c } => Arc::new(move |y: &CountVector| delta_c(y, c)),
            EstimatorSpec::Cz => Arc::new(|y: &CountVector| delta_c(y, 0.0)),
            EstimatorSpec::DcFamily { c, psi } => {
                let psi = psi.to_psi();
                Arc::new(move |y: &CountVector| dc_family(y, c, &psi))
            }
            EstimatorSpec::QuadDominator { a, variant } => {
                let a = a.build(p)?;
                Arc::new(move |y: &CountVector| {
                    let opts = QuadOptions {
                        rule: variant,
                        ..Default::default()
                    };
                    quad_dominator(y, &a, &opts)
                })
            }
            EstimatorSpec::Eb { alpha, c } => {
                check_len(p, alpha.len())?;
                Arc::new(move |y: &CountVector| empirical_bayes(y, &alpha, c))
            }
            EstimatorSpec::WeightedCz { w } => {
                let w = WeightScheme::new(w)?;
                check_len(p, w.len())?;
                Arc::new(move |y: &CountVector| weighted_cz(y, &w))
            }
            EstimatorSpec::MeanShrink { b0 } => {
                Arc::new(move |y: &CountVector| mean_shrink_b0(y, b0))
            }
            EstimatorSpec::MeanShrinkCareful => {
                Arc::new(|y: &CountVector| mean_shrink_careful::<f64>(y))
            }
            EstimatorSpec::BayesGamma { alpha, beta, c } => {
                let prior = GammaPriorVec::new(alpha, beta)?;
                check_len(p, prior.alpha().len())?;
                Arc::new(move |y: &CountVector| bayes_gamma(y, &prior, c))
            }
            EstimatorSpec::BayesSumDirichlet { sum_law, c } => {
                sum_law.validate()?;
                Arc::new(move |y: &CountVector| bayes_sum_dirichlet(y, c, &sum_law))
            }
            EstimatorSpec::HierarchicalBayes { eta, zeta, c } => {
                let h = HyperPrior::new(eta, zeta)?;
                Arc::new(move |y: &CountVector| hierarchical_bayes(y, &h, c).map(|r| r.estimate))
            }
            EstimatorSpec::Matrix { c, cols } => {
                let cols = cols.unwrap_or(p);
                if cols == 0 || !p.is_multiple_of(cols) {
                    return Err(invalid("cols", format!("{cols} does not divide {p}")));
                }
                Arc::new(move |y: &CountVector| {
                    let rows = y.as_slice().chunks(cols).map(<[u64]>::to_vec).collect();
                    let m = matrix_shrinker(&CountMatrix::from_rows(rows)?, c)?;
                    EstimateVector::new((0..m.rows()).flat_map(|i| m.row(i).to_vec()).collect())
                })
            }
        })
    }

    /// Shrinkage factor `φ(z)` with `δ = {1 − φ(Z)}Y`, for estimators of
    /// that form. `None` for all others.
    pub fn shrink_phi(&self, p: usize) -> Option<Arc<dyn Fn(u64) -> f64 + Send + Sync>> {
        match self {
            EstimatorSpec::Mle => Some(Arc::new(|_| 0.0)),
            EstimatorSpec::DeltaC { c } => Some(Arc::new(phi_delta_c(p, *c))),
            EstimatorSpec::Cz => Some(Arc::new(phi_delta_c(p, 0.0))),
            EstimatorSpec::DcFamily { c, psi } => Some(Arc::new(phi_dc(p, *c, psi.to_psi()))),
            EstimatorSpec::Eb { alpha, c } if alpha.iter().all(|&a| a == 1.0) => {
                Some(Arc::new(phi_delta_c(p, *c)))
            }
            EstimatorSpec::BayesSumDirichlet {
                sum_law: SumLaw::Flat,
                c,
            } => Some(Arc::new(phi_delta_c(p, *c))),
            EstimatorSpec::HierarchicalBayes { eta, zeta, c } => {
                let h = HyperPrior {
                    eta: *eta,
                    zeta: *zeta,
                };
                let psi = h.psi(p, *c);
                let (pm1, c) = (p as f64 - 1.0, *c);
                Some(Arc::new(move |z| psi(z) / (pm1 + (1.0 + c) * z as f64)))
            }
            _ => None,
        }
    }
}
