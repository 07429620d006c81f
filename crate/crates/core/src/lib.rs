//! Simultaneous estimation of Poisson means.
//!
//! Given independent counts `Y_i ~ Poisson(θ_i)`, `i = 1..p`, the crate
//! provides estimators that improve on `Y` under weighted quadratic losses,
//! their Bayes and empirical Bayes counterparts, and the machinery to check
//! those improvements: exact risk series over the law of `Z = ΣY_i`,
//! seeded Monte Carlo, and dominance verifiers.
//!
//! ```
//! use poisson_shrink::{delta_c, CountVector};
//!
//! let y = CountVector::new(vec![1; 9]).unwrap();
//! let d = delta_c(&y, 3.0).unwrap();
//! assert!((d.as_slice()[0] - 9.0 / 11.0).abs() < 1e-15);
//! ```

pub mod bayes;
pub mod countmodels;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod loss;
pub mod risk;
pub mod sampling;
pub mod scalar;
pub mod series;
pub mod shrinkers;
pub mod special;
pub mod types;

/// Library version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use bayes::{
    bayes_gamma, bayes_general_lc, bayes_matrix, bayes_sum_dirichlet, eb_factor, empirical_bayes,
    hierarchical_bayes, GammaPriorVec, HierarchicalBayes, HyperPrior, PosteriorMoments,
};
pub use countmodels::{
    count_moments, fit_symmetric_alpha, ln_marginal_pmf, marginal_pmf, marginal_z_pmf, posterior,
    sample_joint, CountMoments, JointDraw, KFunction, SumLaw, SumProportionsPrior,
};
pub use error::{Error, Result};
pub use estimator::{Estimator, EstimatorSpec, MatrixSpec, PsiSpec, ESTIMATOR_SPEC_VERSION};
pub use experiments::{eb_regression_demo, EbDemoConfig, EbDemoResult};
pub use loss::{
    build_cumulative_matrix, build_sum_penalty_matrix, eval_loss, loss_matrix_bound, LossSpec,
    QuadraticForm,
};
pub use scalar::{exact, Exact, Scalar};
pub use series::{negbin_expectation, poisson_expectation, SeriesConfig};
pub use shrinkers::*;
pub use types::{CountMatrix, CountVector, EstimateMatrix, EstimateVector, MeanVector};
