//! Numerical verifiers for the two dominance results: the conditions on
//! `φ` for shrinkage toward the origin under `L_c`, and the pointwise
//! risk-difference bound for the quadratic-loss dominator.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::loss::QuadraticForm;
use crate::risk::exact::risk_shrink_family;
use crate::series::SeriesConfig;
use crate::shrinkers::{hwang_psi, positive_count, PositiveCountRule};

/// Outcome of one condition over its checked range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub name: &'static str,
    pub passed: bool,
    pub first_violation: Option<u64>,
    pub violations: u64,
    /// Smallest slack over the range (negative when violated).
    pub worst_margin: f64,
    pub worst_z: u64,
}

impl ConditionResult {
    fn new(name: &'static str) -> Self {
        ConditionResult {
            name,
            passed: true,
            first_violation: None,
            violations: 0,
            worst_margin: f64::INFINITY,
            worst_z: 0,
        }
    }

    fn record(&mut self, z: u64, margin: f64) {
        if margin < self.worst_margin {
            self.worst_margin = margin;
            self.worst_z = z;
        }
        if !(margin > 0.0) {
            self.passed = false;
            self.violations += 1;
            self.first_violation.get_or_insert(z);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem2Report {
    pub p: usize,
    pub c: f64,
    pub z_max: u64,
    pub conditions: Vec<ConditionResult>,
    pub passed: bool,
    /// `sup_γ E_γ D*(φ, Z)` over the supplied grid: the largest risk
    /// difference against `Y`.
    pub sup_risk_diff: f64,
    pub argmax_gamma: f64,
}

/// Checks `0 < φ(z)`, `φ(z) < 2(p−1)/{p−1+(1+c)z}` and
/// `zφ(z) < (z+1)φ(z+1)` for `z ∈ [1, z_max]` (plus `0 ≤ φ(1)` at the
/// left end), and evaluates the risk difference on `gamma_grid`.
///
/// Pass/fail is decided by the conditions alone; the risk differences are
/// diagnostics.
pub fn dominance_check_theorem2(
    phi: impl Fn(u64) -> f64,
    p: usize,
    c: f64,
    z_max: u64,
    gamma_grid: &[f64],
    cfg: &SeriesConfig,
) -> Result<Theorem2Report> {
    if z_max < 10 {
        return Err(invalid(
            "z_max",
            format!("must be at least 10, got {z_max}"),
        ));
    }
    if p < 2 {
        return Err(invalid("p", format!("must be at least 2, got {p}")));
    }
    let pm1 = p as f64 - 1.0;
    let mut positive = ConditionResult::new("phi(z) > 0");
    let mut upper = ConditionResult::new("phi(z) < 2(p-1)/(p-1+(1+c)z)");
    let mut monotone = ConditionResult::new("z phi(z) strictly increasing");
    let mut prev = phi(1);
    if prev < 0.0 {
        monotone.record(0, prev);
    }
    for z in 1..=z_max {
        let f = prev;
        let zf = z as f64;
        positive.record(z, f);
        upper.record(z, 2.0 * pm1 / (pm1 + (1.0 + c) * zf) - f);
        let next = phi(z + 1);
        let (lhs, rhs) = (zf * f, (zf + 1.0) * next);
        // Relative slack so the test is scale-free.
        monotone.record(z, (rhs - lhs) / rhs.abs().max(f64::MIN_POSITIVE));
        prev = next;
    }
    let mut sup = f64::NEG_INFINITY;
    let mut argmax = f64::NAN;
    for &g in gamma_grid {
        let d = risk_shrink_family(&phi, p, c, g, cfg)? - (p as f64 + c);
        if d > sup {
            sup = d;
            argmax = g;
        }
    }
    let conditions = vec![positive, upper, monotone];
    Ok(Theorem2Report {
        p,
        c,
        z_max,
        passed: conditions.iter().all(|r| r.passed),
        conditions,
        sup_risk_diff: sup,
        argmax_gamma: argmax,
    })
}

/// Largest grid `p·(y_max+1)^p` accepted by [`dominance_check_quad`].
pub const QUAD_GRID_LIMIT: u128 = 10_000_000;

/// A grid point where the bound fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadViolation {
    pub y: Vec<u64>,
    pub d: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadReport {
    pub p: usize,
    pub y_max: u64,
    pub variant: PositiveCountRule,
    pub bound_m: f64,
    pub points: u64,
    pub violation_count: u64,
    /// The first violations found, at most [`QuadReport::LISTED`].
    pub violations: Vec<QuadViolation>,
    /// `max_y {D(y) − bound(y)}` and where it occurs.
    pub worst_excess: f64,
    pub worst_y: Vec<u64>,
    pub passed: bool,
}

impl QuadReport {
    pub const LISTED: usize = 20;
}

/// Enumerates `{0, …, y_max}^p` and checks
/// `D(y) = −Σ2y_i{ψ_i(y) − ψ_i(y−e_i)} + ψᵀA⁻¹ψ ≤ −M⁻¹{N(y)−2}₊²/B(y)`.
///
/// `M` defaults to [`QuadraticForm::bound_constant`].
pub fn dominance_check_quad(
    p: usize,
    a: &QuadraticForm,
    y_max: u64,
    variant: PositiveCountRule,
    bound_m: Option<f64>,
) -> Result<QuadReport> {
    if p < 3 {
        return Err(invalid("p", format!("must be at least 3, got {p}")));
    }
    if a.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: a.dim(),
        });
    }
    let size = (y_max as u128 + 1)
        .checked_pow(p as u32)
        .and_then(|n| n.checked_mul(p as u128))
        .unwrap_or(u128::MAX);
    if size > QUAD_GRID_LIMIT {
        return Err(Error::GridTooLarge {
            size,
            limit: QUAD_GRID_LIMIT,
        });
    }
    let m = bound_m.unwrap_or_else(|| a.bound_constant());
    let mut report = QuadReport {
        p,
        y_max,
        variant,
        bound_m: m,
        points: 0,
        violation_count: 0,
        violations: Vec::new(),
        worst_excess: f64::NEG_INFINITY,
        worst_y: Vec::new(),
        passed: true,
    };
    let mut y = vec![0u64; p];
    let mut down = vec![0u64; p];
    loop {
        let psi = hwang_psi(&y, m, variant);
        let mut d = a.inverse_form(&psi);
        for i in 0..p {
            if y[i] == 0 {
                continue;
            }
            down.copy_from_slice(&y);
            down[i] -= 1;
            let psi_down = hwang_psi(&down, m, variant);
            d -= 2.0 * y[i] as f64 * (psi[i] - psi_down[i]);
        }
        let b: f64 = y
            .iter()
            .map(|&v| crate::shrinkers::harmonic(v) * crate::shrinkers::harmonic(v + 1))
            .sum();
        let excess_n = positive_count(&y, variant).saturating_sub(2) as f64;
        let bound = if b == 0.0 {
            0.0
        } else {
            -excess_n * excess_n / (m * b)
        };
        let excess = d - bound;
        if excess > report.worst_excess {
            report.worst_excess = excess;
            report.worst_y = y.clone();
        }
        if excess > 1e-12 * (1.0 + bound.abs()) {
            report.violation_count += 1;
            if report.violations.len() < QuadReport::LISTED {
                report.violations.push(QuadViolation {
                    y: y.clone(),
                    d,
                    bound,
                });
            }
        }
        report.points += 1;
        let mut i = 0;
        while i < p {
            y[i] += 1;
            if y[i] <= y_max {
                break;
            }
            y[i] = 0;
            i += 1;
        }
        if i == p {
            break;
        }
    }
    report.passed = report.violation_count == 0;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{build_cumulative_matrix, build_sum_penalty_matrix};
    use crate::shrinkers::phi_delta_c;

    fn grid() -> Vec<f64> {
        (0..24)
            .map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / 23.0))
            .collect()
    }

    #[test]
    fn delta_c_passes() {
        for (p, c) in [(2, 0.0), (5, 1.0), (9, 3.0)] {
            let r = dominance_check_theorem2(
                phi_delta_c(p, c),
                p,
                c,
                10_000,
                &grid(),
                &SeriesConfig::default(),
            )
            .unwrap();
            assert!(r.passed, "{r:?}");
            assert!(r.sup_risk_diff < 0.0, "{r:?}");
        }
    }

    #[test]
    fn cz_fails_under_heavy_sum_penalty() {
        let r = dominance_check_theorem2(
            phi_delta_c(5, 0.0),
            5,
            2.0,
            10_000,
            &[1.0],
            &SeriesConfig::default(),
        )
        .unwrap();
        assert!(!r.passed);
        let upper = &r.conditions[1];
        assert!(!upper.passed);
        // Fails exactly when z > (p−1)/(c−1) = 4.
        assert_eq!(upper.first_violation, Some(4));
    }

    #[test]
    fn quad_grid_variants() {
        for a in [
            QuadraticForm::identity(3).unwrap(),
            build_sum_penalty_matrix(3, 1.0).unwrap(),
            build_cumulative_matrix(3).unwrap(),
        ] {
            let r = dominance_check_quad(3, &a, 5, PositiveCountRule::AtLeastOne, None).unwrap();
            assert!(r.passed, "{r:?}");
            assert_eq!(r.points, 216);
        }
        let a = QuadraticForm::identity(3).unwrap();
        let r = dominance_check_quad(3, &a, 5, PositiveCountRule::AtMostOne, None).unwrap();
        assert!(!r.passed);
        assert!(r.violation_count > 0);
    }

    #[test]
    fn cumulative_with_eigen_bound() {
        let a = build_cumulative_matrix(3).unwrap();
        let m = 1.0 / a.smallest_eigenvalue();
        let r = dominance_check_quad(3, &a, 5, PositiveCountRule::AtLeastOne, Some(m)).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn quad_guard() {
        let a = QuadraticForm::identity(8).unwrap();
        assert!(matches!(
            dominance_check_quad(8, &a, 9, PositiveCountRule::AtLeastOne, None),
            Err(Error::GridTooLarge { .. })
        ));
    }
}
