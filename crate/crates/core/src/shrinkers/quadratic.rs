//! Improvements on `Y` under a quadratic-form loss `(δ−θ)ᵀA(δ−θ)`.
//!
//! The correction is `δ = y − A⁻¹ψ(y)` with
//! `ψ_i(y) = d(y)·T(y_i)/B(y)`, `T` the harmonic partial sum and
//! `B(y) = Σ T(y_i)T(y_i+1)`.

use crate::error::{invalid, Result};
use crate::loss::QuadraticForm;
use crate::types::{CountVector, EstimateVector};

/// `T(0) = 0`, `T(y) = Σ_{j≤y} 1/j`.
pub fn harmonic(y: u64) -> f64 {
    (1..=y).map(|j| 1.0 / j as f64).sum()
}

/// Which coordinates the count `N(y)` tallies.
///
/// The dominance bound needs the coordinates with positive counts. The
/// `AtMostOne` reading is kept so that the two can be compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositiveCountRule {
    /// `N(y) = #{i : y_i ≥ 1}`.
    #[default]
    #[serde(rename = "N-geq-1")]
    AtLeastOne,
    /// `N(y) = #{i : y_i ≤ 1}`.
    #[serde(rename = "N-leq-1")]
    AtMostOne,
}

pub fn positive_count(y: &[u64], rule: PositiveCountRule) -> usize {
    match rule {
        PositiveCountRule::AtLeastOne => y.iter().filter(|&&v| v >= 1).count(),
        PositiveCountRule::AtMostOne => y.iter().filter(|&&v| v <= 1).count(),
    }
}

fn harmonic_table(y: &[u64]) -> Vec<f64> {
    let max = y.iter().copied().max().unwrap_or(0);
    let mut t = Vec::with_capacity(max as usize + 2);
    t.push(0.0);
    let mut acc = 0.0;
    for j in 1..=max + 1 {
        acc += 1.0 / j as f64;
        t.push(acc);
    }
    t
}

/// `ψ_{0,i}(y) = (1/M)·T(y_i)/B(y)·{N(y)−2}₊`; zero when `B(y) = 0`.
pub fn hwang_psi(y: &[u64], bound_m: f64, rule: PositiveCountRule) -> Vec<f64> {
    let excess = positive_count(y, rule).saturating_sub(2) as f64;
    psi_with_d(y, excess / bound_m)
}

fn psi_with_d(y: &[u64], d: f64) -> Vec<f64> {
    let t = harmonic_table(y);
    let b: f64 = y.iter().map(|&v| t[v as usize] * t[v as usize + 1]).sum();
    if b == 0.0 || d == 0.0 {
        return vec![0.0; y.len()];
    }
    y.iter().map(|&v| d * t[v as usize] / b).collect()
}

/// Options for [`quad_dominator`].
#[derive(Default)]
pub struct QuadOptions<'a> {
    /// Overrides `d₀(y) = (1/M){N(y)−2}₊`.
    pub d: Option<&'a dyn Fn(&[u64]) -> f64>,
    /// Overrides `M = 1/λ_min(A)`.
    pub bound_m: Option<f64>,
    pub rule: PositiveCountRule,
}

/// `δ = y − A⁻¹ψ₀(y)`. Returns `y` unchanged when the correction vanishes
/// (`N(y) ≤ 2` or `B(y) = 0`).
pub fn quad_dominator(
    y: &CountVector,
    a: &QuadraticForm,
    opts: &QuadOptions<'_>,
) -> Result<EstimateVector> {
    y.require_len(3, "quad_dominator")?;
    if a.dim() != y.len() {
        return Err(crate::Error::DimensionMismatch {
            expected: a.dim(),
            got: y.len(),
        });
    }
    let m = opts.bound_m.unwrap_or_else(|| a.bound_constant());
    if !(m > 0.0 && m.is_finite()) {
        return Err(invalid("M", format!("must be positive, got {m}")));
    }
    let ys = y.as_slice();
    let psi = match opts.d {
        Some(d) => psi_with_d(ys, d(ys)),
        None => hwang_psi(ys, m, opts.rule),
    };
    let correction = a.solve(&psi);
    Ok(EstimateVector::from_unchecked(
        ys.iter()
            .zip(correction)
            .map(|(&v, corr)| v as f64 - corr)
            .collect(),
    ))
}

/// Output of [`cumulative_estimator`].
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeEstimate {
    /// Estimates of the window rates `θ_i`.
    pub rates: EstimateVector,
    /// Estimates of the cumulative intensities `λ_i = Σ_{j≤i} θ_j`.
    pub cumulative: EstimateVector,
}

/// Improvement on `Y` when loss is squared error of the cumulative sums.
///
/// Applies the second-difference stencil of `A⁻¹` to `ψ₀` computed with the
/// bound constant `M = 4`.
pub fn cumulative_estimator(y: &CountVector) -> Result<CumulativeEstimate> {
    y.require_len(3, "cumulative_estimator")?;
    let ys = y.as_slice();
    let p = ys.len();
    let psi = hwang_psi(ys, 4.0, PositiveCountRule::AtLeastOne);
    let mut rates = Vec::with_capacity(p);
    for i in 0..p {
        let left = if i > 0 { psi[i - 1] } else { 0.0 };
        let v = ys[i] as f64;
        let d = if i == 0 {
            v - psi[0] + psi[1]
        } else if i == p - 1 {
            v + left - 2.0 * psi[i]
        } else {
            v + left - 2.0 * psi[i] + psi[i + 1]
        };
        rates.push(d);
    }
    let mut cumulative = Vec::with_capacity(p);
    let mut running = 0u64;
    for i in 0..p {
        running += ys[i];
        let next = if i + 1 < p { psi[i + 1] } else { 0.0 };
        cumulative.push(running as f64 - psi[i] + next);
    }
    Ok(CumulativeEstimate {
        rates: EstimateVector::from_unchecked(rates),
        cumulative: EstimateVector::from_unchecked(cumulative),
    })
}

/// Number of adjacent pairs with `λ̂_{i+1} < λ̂_i`.
pub fn monotonicity_violations(cumulative: &[f64]) -> usize {
    cumulative.windows(2).filter(|w| w[1] < w[0]).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::build_cumulative_matrix;

    fn cv(v: &[u64]) -> CountVector {
        CountVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(0), 0.0);
        assert!((harmonic(3) - 11.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn truncation_returns_y() {
        let a = QuadraticForm::identity(3).unwrap();
        let d = quad_dominator(&cv(&[1, 1, 0]), &a, &QuadOptions::default()).unwrap();
        assert_eq!(d.as_slice(), &[1.0, 1.0, 0.0]);
        let d = quad_dominator(&cv(&[0, 0, 0]), &a, &QuadOptions::default()).unwrap();
        assert_eq!(d.as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn all_ones_identity() {
        // N = 3, T(1) = 1, T(2) = 3/2, B = 4.5, ψ_i = 1/4.5.
        let a = QuadraticForm::identity(3).unwrap();
        let d = quad_dominator(&cv(&[1, 1, 1]), &a, &QuadOptions::default()).unwrap();
        for v in d.as_slice() {
            assert!((v - 7.0 / 9.0).abs() < 1e-14);
        }
    }

    #[test]
    fn d_override_scales_correction() {
        let a = QuadraticForm::identity(4).unwrap();
        let y = cv(&[2, 1, 3, 1]);
        let half = |ys: &[u64]| {
            0.5 * positive_count(ys, PositiveCountRule::AtLeastOne).saturating_sub(2) as f64
        };
        let opts = QuadOptions {
            d: Some(&half),
            ..Default::default()
        };
        let d_half = quad_dominator(&y, &a, &opts).unwrap();
        let d_full = quad_dominator(&y, &a, &QuadOptions::default()).unwrap();
        for ((h, f), yv) in d_half
            .as_slice()
            .iter()
            .zip(d_full.as_slice())
            .zip(y.iter())
        {
            assert!(((yv as f64 - h) * 2.0 - (yv as f64 - f)).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_small_p() {
        let a = QuadraticForm::identity(2).unwrap();
        assert!(quad_dominator(&cv(&[1, 2]), &a, &QuadOptions::default()).is_err());
        assert!(cumulative_estimator(&cv(&[1, 2])).is_err());
    }

    #[test]
    fn cumulative_matches_general_dominator_with_m4() {
        let y = cv(&[3, 0, 2, 5, 1]);
        let a = build_cumulative_matrix(5).unwrap();
        let general = quad_dominator(&y, &a, &QuadOptions::default()).unwrap();
        let est = cumulative_estimator(&y).unwrap();
        for (g, s) in general.as_slice().iter().zip(est.rates.as_slice()) {
            assert!((g - s).abs() < 1e-12);
        }
    }

    #[test]
    fn cumulative_truncated_case() {
        let est = cumulative_estimator(&cv(&[0, 4, 0, 2])).unwrap();
        assert_eq!(est.rates.as_slice(), &[0.0, 4.0, 0.0, 2.0]);
        assert_eq!(est.cumulative.as_slice(), &[0.0, 4.0, 4.0, 6.0]);
    }
}
