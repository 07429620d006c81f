//! Bayes, hierarchical-Bayes and empirical-Bayes estimators under `L_c`.

use serde::{Deserialize, Serialize};

use crate::countmodels::SumLaw;
use crate::error::{invalid, Error, Result};
use crate::scalar::{sum, Scalar};
use crate::shrinkers::PsiFunction;
use crate::types::{CountMatrix, CountVector, EstimateMatrix, EstimateVector};

/// Independent `θ_i ~ Gamma(α_i, β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaPriorVec<T: Scalar = f64> {
    alpha: Vec<T>,
    beta: T,
}

impl<T: Scalar> GammaPriorVec<T> {
    pub fn new(alpha: Vec<T>, beta: T) -> Result<Self> {
        check_shapes(&alpha)?;
        if !beta.is_positive() {
            return Err(invalid("beta", format!("must be positive, got {beta:?}")));
        }
        Ok(GammaPriorVec { alpha, beta })
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn beta(&self) -> &T {
        &self.beta
    }

    /// `ᾱ`.
    pub fn alpha_bar(&self) -> T {
        sum(self.alpha.iter().cloned()) / T::from_usize(self.alpha.len())
    }
}

fn check_shapes<T: Scalar>(alpha: &[T]) -> Result<()> {
    if alpha.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(a) = alpha.iter().find(|a| !a.is_positive()) {
        return Err(invalid(
            "alpha",
            format!("shapes must be positive, got {a:?}"),
        ));
    }
    Ok(())
}

fn check_c<T: Scalar>(c: &T) -> Result<()> {
    if c.is_negative() {
        return Err(invalid("c", format!("must be nonnegative, got {c:?}")));
    }
    Ok(())
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Hyperprior `s(β) ∝ β^{η−1}(β+1)^{−(η+ζ)}` on the common Gamma rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperPrior {
    pub eta: f64,
    pub zeta: f64,
}

impl HyperPrior {
    pub fn new(eta: f64, zeta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(invalid("eta", format!("must be positive, got {eta}")));
        }
        if !(zeta > 0.0 && zeta.is_finite()) {
            return Err(invalid("zeta", format!("must be positive, got {zeta}")));
        }
        Ok(HyperPrior { eta, zeta })
    }

    /// `η ≤ (p−2−c)/(1+c)`.
    pub fn is_minimax(&self, p: usize, c: f64) -> bool {
        self.eta <= (p as f64 - 2.0 - c) / (1.0 + c)
    }

    /// `ψ(z) = (1+c)(p−1+z)(p+η)/(p−1+η+ζ+z) − c(p−1)`, the numerator of the
    /// induced shrinkage factor `φ(z) = ψ(z)/{p−1+(1+c)z}`.
    pub fn psi(&self, p: usize, c: f64) -> impl Fn(u64) -> f64 + Copy + Send + Sync {
        let (eta, zeta) = (self.eta, self.zeta);
        let pm1 = p as f64 - 1.0;
        move |z| {
            let z = z as f64;
            (1.0 + c) * (pm1 + z) * (p as f64 + eta) / (pm1 + eta + zeta + z) - c * pm1
        }
    }

    /// `sup_z ψ(z) = (1+c)(p+η) − c(p−1)`, approached as `z → ∞`.
    pub fn psi_sup(&self, p: usize, c: f64) -> f64 {
        (1.0 + c) * (p as f64 + self.eta) - c * (p as f64 - 1.0)
    }

    pub fn psi_function(&self, p: usize, c: f64) -> PsiFunction {
        PsiFunction::custom(self.psi(p, c))
    }
}

/// `a_i = {E(θ_i⁻¹|y)}⁻¹` and `b = {E(γ⁻¹|y)}⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMoments<T: Scalar = f64> {
    pub a_i: Vec<T>,
    pub b: T,
}

impl<T: Scalar> PosteriorMoments<T> {
    pub fn new(a_i: Vec<T>, b: T) -> Result<Self> {
        if a_i.is_empty() {
            return Err(Error::Empty);
        }
        if a_i.iter().any(Scalar::is_negative) || b.is_negative() {
            return Err(invalid("moments", "must be nonnegative"));
        }
        Ok(PosteriorMoments { a_i, b })
    }

    pub fn a(&self) -> T {
        sum(self.a_i.iter().cloned())
    }
}

/// `δ_i = (1+c)/(1 + c·a/b)·a_i`, the Bayes rule under `L_c`.
pub fn bayes_general_lc<T: Scalar>(m: &PosteriorMoments<T>, c: T) -> Result<EstimateVector<T>> {
    check_c(&c)?;
    if c.is_zero() || m.a_i.iter().all(|a| a.is_zero()) {
        return EstimateVector::new(m.a_i.clone());
    }
    if !m.b.is_positive() {
        return Err(Error::NonpositiveDenominator(
            "b must be positive when some a_i > 0",
        ));
    }
    let one_c = T::one() + c.clone();
    let factor = one_c / (T::one() + c * m.a() / m.b.clone());
    EstimateVector::new(m.a_i.iter().map(|a| factor.clone() * a.clone()).collect())
}

/// `α_i + y_i − 1`, or zero when `y_i = 0` and `α_i ≤ 1`: a negative (or
/// zero) value there would leave every other estimate with infinite risk.
fn shifted_count<T: Scalar>(alpha: &T, y: u64) -> T {
    if y == 0 && *alpha <= T::one() {
        T::zero()
    } else {
        alpha.clone() + T::from_count(y) - T::one()
    }
}

fn bayes_denominator<T: Scalar>(p_alpha_bar: &T, z: u64, c: &T, p: usize) -> Result<T> {
    let one_c = T::one() + c.clone();
    let d = one_c * (p_alpha_bar.clone() + T::from_count(z) - T::one())
        - c.clone() * T::from_usize(p - 1);
    if !d.is_positive() {
        return Err(Error::NonpositiveDenominator(
            "(1+c)(p*alpha_bar+z-1) - c(p-1)",
        ));
    }
    Ok(d)
}

/// Bayes rule for independent Gamma priors:
/// `δ_i = h_c(Z)(α_i+y_i−1)/(β+1)` with
/// `h_c(z) = (1+c)(pᾱ+z−1)/[(1+c)(pᾱ+z−1) − c(p−1)]`.
pub fn bayes_gamma<T: Scalar>(
    y: &CountVector,
    prior: &GammaPriorVec<T>,
    c: T,
) -> Result<EstimateVector<T>> {
    y.require_len(2, "bayes_gamma")?;
    check_dims(prior.alpha.len(), y.len())?;
    check_c(&c)?;
    let p_alpha_bar = sum(prior.alpha.iter().cloned());
    let z = y.total();
    let denom = bayes_denominator(&p_alpha_bar, z, &c, y.len())?;
    let h = (T::one() + c) * (p_alpha_bar + T::from_count(z) - T::one()) / denom;
    let scale = h / (prior.beta.clone() + T::one());
    EstimateVector::new(
        prior
            .alpha
            .iter()
            .zip(y.iter())
            .map(|(a, v)| scale.clone() * shifted_count(a, v))
            .collect(),
    )
}

/// Bayes rule when `γ` follows `sum_law` and the proportions are uniform on
/// the simplex: `δ_i = ρ(Z)·(1+c)/{p−1+(1+c)Z}·y_i` with `ρ(z) = K(z)/K(z−1)`.
///
/// The flat law gives `ρ(z) = z` and reproduces [`delta_c`](crate::shrinkers::delta_c).
pub fn bayes_sum_dirichlet<T: Scalar>(
    y: &CountVector,
    c: T,
    sum_law: &SumLaw<T>,
) -> Result<EstimateVector<T>> {
    y.require_len(2, "bayes_sum_dirichlet")?;
    check_c(&c)?;
    sum_law.validate()?;
    let z = y.total();
    if z == 0 {
        return EstimateVector::new(vec![T::zero(); y.len()]);
    }
    let one_c = T::one() + c;
    let denom = T::from_usize(y.len() - 1) + one_c.clone() * T::from_count(z);
    let factor = sum_law.k_ratio(z) * one_c / denom;
    EstimateVector::new(
        y.iter()
            .map(|v| factor.clone() * T::from_count(v))
            .collect(),
    )
}

/// Output of [`hierarchical_bayes`].
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalBayes {
    pub estimate: EstimateVector,
    /// `sup_z ψ(z)`.
    pub psi_sup: f64,
    /// Whether the induced `ψ` meets both dominance conditions: the
    /// supremum stays below `2(p−1)` and `ψ(1) > 0`.
    pub is_dominating: bool,
}

/// Bayes rule with `α_i ≡ 1` and the rate `β` integrated over `h`:
/// `δ_i = [(1+c)(p−1+z)/{p−1+(1+c)z}]·[(z+ζ−1)/(p+η+ζ+z−1)]·y_i`.
///
/// At `z = 0` the second factor may be negative but multiplies a zero vector.
pub fn hierarchical_bayes(y: &CountVector, h: &HyperPrior, c: f64) -> Result<HierarchicalBayes> {
    y.require_len(2, "hierarchical_bayes")?;
    check_c(&c)?;
    let h = HyperPrior::new(h.eta, h.zeta)?;
    let p = y.len();
    let pm1 = p as f64 - 1.0;
    let z = y.total() as f64;
    let estimate = if y.total() == 0 {
        vec![0.0; p]
    } else {
        let f = (1.0 + c) * (pm1 + z) / (pm1 + (1.0 + c) * z) * (z + h.zeta - 1.0)
            / (p as f64 + h.eta + h.zeta + z - 1.0);
        y.iter().map(|v| f * v as f64).collect()
    };
    Ok(HierarchicalBayes {
        estimate: EstimateVector::new(estimate)?,
        psi_sup: h.psi_sup(p, c),
        is_dominating: h.is_minimax(p, c) && h.psi(p, c)(1) > 0.0,
    })
}

/// `h_c(z) = (1+c)z/[(1+c)(pᾱ+z−1) − c(p−1)]`.
pub fn eb_factor<T: Scalar>(p_alpha_bar: &T, p: usize, c: &T, z: u64) -> Result<T> {
    let denom = bayes_denominator(p_alpha_bar, z, c, p)?;
    Ok((T::one() + c.clone()) * T::from_count(z) / denom)
}

/// Empirical Bayes version of [`bayes_gamma`] with `β` replaced by its
/// unbiased estimate: `δ_i = h_c(Z)(α_i+y_i−1)`.
pub fn empirical_bayes<T: Scalar>(y: &CountVector, alpha: &[T], c: T) -> Result<EstimateVector<T>> {
    y.require_len(2, "empirical_bayes")?;
    check_shapes(alpha)?;
    check_dims(alpha.len(), y.len())?;
    check_c(&c)?;
    let p_alpha_bar = sum(alpha.iter().cloned());
    let h = eb_factor(&p_alpha_bar, y.len(), &c, y.total())?;
    EstimateVector::new(
        alpha
            .iter()
            .zip(y.iter())
            .map(|(a, v)| h.clone() * shifted_count(a, v))
            .collect(),
    )
}

/// Bayes rule for a `k × p` matrix with one shared Dirichlet(α) draw for
/// the column proportions and independent `Gamma(α₀ᵢ, β₀ᵢ)` row totals.
pub fn bayes_matrix(
    y: &CountMatrix,
    alpha_cols: &[f64],
    row_priors: &[(f64, f64)],
    c: f64,
) -> Result<EstimateMatrix<f64>> {
    check_shapes(alpha_cols)?;
    check_dims(y.cols(), alpha_cols.len())?;
    check_dims(y.rows(), row_priors.len())?;
    check_c(&c)?;
    for &(a0, b0) in row_priors {
        if !(a0 > 0.0 && b0 > 0.0) {
            return Err(invalid(
                "row_priors",
                format!("need positive (alpha0, beta0), got ({a0}, {b0})"),
            ));
        }
    }
    let p = y.cols();
    let p_alpha_bar: f64 = alpha_cols.iter().sum();
    let denom = bayes_denominator(&p_alpha_bar, y.total(), &c, p.max(1))?;
    let col: Vec<f64> = y
        .column_totals()
        .into_iter()
        .map(|zj| (1.0 + c) * (p_alpha_bar + zj as f64 - 1.0) / denom)
        .collect();
    let mut values = Vec::with_capacity(y.rows() * p);
    for (i, total) in y.row_totals().into_iter().enumerate() {
        let (a0, b0) = row_priors[i];
        let row = shifted_count(&a0, total) / (b0 + 1.0);
        values.extend(col.iter().map(|f| f * row));
    }
    Ok(EstimateMatrix::from_parts(y.rows(), p, values))
}
