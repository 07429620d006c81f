//! Risk functions evaluated as truncated series over the law of `Z`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::series::{negbin_expectation, poisson_expectation, SeriesConfig};
use crate::types::MeanVector;

fn check_p(p: usize, min: usize) -> Result<()> {
    if p < min {
        return Err(invalid("p", format!("must be at least {min}, got {p}")));
    }
    Ok(())
}

fn check_c(c: f64) -> Result<()> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(invalid("c", format!("must be finite and >= 0, got {c}")));
    }
    Ok(())
}

/// `D*(φ, z) = {φ(z+1)² − 2φ(z+1)}{p−1+(1+c)(z+1)} + 2(1+c)φ(z)z`.
pub fn d_star(phi: &impl Fn(u64) -> f64, p: usize, c: f64, z: u64) -> f64 {
    let next = phi(z + 1);
    let zf = z as f64;
    let here = if z == 0 {
        0.0
    } else {
        2.0 * (1.0 + c) * phi(z) * zf
    };
    (next * next - 2.0 * next) * (p as f64 - 1.0 + (1.0 + c) * (zf + 1.0)) + here
}

/// Risk under `L_c` of `δ = {1 − φ(Z)}Y`: `p + c + E_γ D*(φ, Z)`.
pub fn risk_shrink_family(
    phi: impl Fn(u64) -> f64,
    p: usize,
    c: f64,
    gamma: f64,
    cfg: &SeriesConfig,
) -> Result<f64> {
    check_p(p, 1)?;
    check_c(c)?;
    let e = poisson_expectation(|z| d_star(&phi, p, c, z), gamma, cfg)?;
    Ok(p as f64 + c + e)
}

/// Risk of `δ^c` under `L_c` from its own closed expression:
/// `p + c − E[(p−1)²/{p−1+(1+c)(Z+1)}·{1 + 2(1+c)/(p−1+(1+c)Z)}]`.
pub fn risk_delta_c_closed(p: usize, c: f64, gamma: f64, cfg: &SeriesConfig) -> Result<f64> {
    check_p(p, 2)?;
    check_c(c)?;
    let pm1 = p as f64 - 1.0;
    let k = 1.0 + c;
    let e = poisson_expectation(
        |z| {
            let z = z as f64;
            pm1 * pm1 / (pm1 + k * (z + 1.0)) * (1.0 + 2.0 * k / (pm1 + k * z))
        },
        gamma,
        cfg,
    )?;
    Ok(p as f64 + c - e)
}

/// Risk difference against `Y` of the mean-shrinkage rule with factor `g`,
/// given `B(π) = b_pi`:
/// `d(θ) = E[g(Z+1)²{p−1+(Z+1)(B(π)/p−1)} − 2(p−1)g(Z+1)]`.
///
/// The difference is the same under every `L_c` because the estimator
/// preserves the total.
pub fn risk_mean_shrink(
    g: impl Fn(u64) -> f64,
    p: usize,
    gamma: f64,
    b_pi: f64,
    cfg: &SeriesConfig,
) -> Result<f64> {
    check_p(p, 2)?;
    let pf = p as f64;
    // Small slack: B(π) computed from proportions can dip below p by rounding.
    if !(b_pi >= pf * (1.0 - 1e-12)) {
        return Err(invalid(
            "B_pi",
            format!("must be at least p = {p}, got {b_pi}"),
        ));
    }
    poisson_expectation(
        |z| {
            let g1 = g(z + 1);
            let z1 = z as f64 + 1.0;
            g1 * g1 * (pf - 1.0 + z1 * (b_pi / pf - 1.0)) - 2.0 * (pf - 1.0) * g1
        },
        gamma,
        cfg,
    )
}

/// `−E (p−1)²/{p−1+(b0−1)(Z+1)}`, the guaranteed improvement of the `b0`
/// rule wherever `B(π) ≤ p·b0`.
pub fn mean_shrink_bound(p: usize, b0: f64, gamma: f64, cfg: &SeriesConfig) -> Result<f64> {
    check_p(p, 2)?;
    let pm1 = p as f64 - 1.0;
    poisson_expectation(
        |z| -pm1 * pm1 / (pm1 + (b0 - 1.0) * (z as f64 + 1.0)),
        gamma,
        cfg,
    )
}

/// Terms of the empirical-Bayes risk decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EbRiskTerms {
    pub risk: f64,
    pub c_pi: f64,
    pub m1: f64,
    pub m2: f64,
    pub r1: f64,
    pub r2: f64,
}

/// Risk under `L₁*` of `δ_i = h(Z)(α_i + Y_i − 1)`:
/// `p·m₁·C(π)/γ + R₁ + 2(pᾱ−p)R₂ + (p−1)m₂`.
pub fn risk_eb(
    h: impl Fn(u64) -> f64,
    p: usize,
    alpha: &[f64],
    theta: &MeanVector,
    cfg: &SeriesConfig,
) -> Result<f64> {
    risk_eb_terms(h, p, alpha, theta, cfg).map(|t| t.risk)
}

pub fn risk_eb_terms(
    h: impl Fn(u64) -> f64,
    p: usize,
    alpha: &[f64],
    theta: &MeanVector,
    cfg: &SeriesConfig,
) -> Result<EbRiskTerms> {
    check_p(p, 2)?;
    if alpha.len() != p || theta.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: if alpha.len() != p {
                alpha.len()
            } else {
                theta.len()
            },
        });
    }
    if h(0) != 0.0 {
        return Err(invalid("h", format!("h(0) must be 0, got {}", h(0))));
    }
    let gamma = theta.sum();
    let pf = p as f64;
    let c_pi = alpha
        .iter()
        .zip(theta.proportions())
        .map(|(a, pi)| (a - 1.0).powi(2) / pi)
        .sum::<f64>()
        / pf;
    let p_alpha_bar: f64 = alpha.iter().sum();
    let m1 = poisson_expectation(|z| h(z).powi(2), gamma, cfg)?;
    let m2 = poisson_expectation(|z| h(z + 1).powi(2), gamma, cfg)?;
    let r1 = poisson_expectation(
        |z| {
            let z1 = z as f64 + 1.0;
            h(z + 1).powi(2) * z1 - 2.0 * h(z) * z as f64 + gamma
        },
        gamma,
        cfg,
    )?;
    let r2 = poisson_expectation(
        |z| {
            let z1 = z as f64 + 1.0;
            let h1 = h(z + 1);
            (h1 * z1 - gamma) * h1 / z1
        },
        gamma,
        cfg,
    )?;
    Ok(EbRiskTerms {
        risk: pf * m1 * c_pi / gamma + r1 + 2.0 * (p_alpha_bar - pf) * r2 + (pf - 1.0) * m2,
        c_pi,
        m1,
        m2,
        r1,
        r2,
    })
}

/// Risk of the Gamma-prior Bayes rule under `L₁*` and where it beats `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BayesGammaRisk {
    /// `(β+1)^{−2}{Σ(α_i−1−βθ_i)²/θ_i + p}`.
    pub risk: f64,
    /// `A(θ) = (1/p)Σ(α_i−1−βθ_i)²/(βθ_i)`.
    pub a_theta: f64,
    /// `A(θ) ≤ 2 + β`, equivalent to `risk ≤ p`.
    pub dominates: bool,
}

pub fn risk_bayes_gamma_l1(alpha: &[f64], beta: f64, theta: &MeanVector) -> Result<BayesGammaRisk> {
    if alpha.len() != theta.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            got: alpha.len(),
        });
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    let p = theta.len() as f64;
    let s: f64 = alpha
        .iter()
        .zip(theta.as_slice())
        .map(|(a, t)| (a - 1.0 - beta * t).powi(2) / t)
        .sum();
    let a_theta = s / (p * beta);
    Ok(BayesGammaRisk {
        risk: (s + p) / (beta + 1.0).powi(2),
        a_theta,
        dominates: a_theta <= 2.0 + beta,
    })
}

/// Minimum Bayes risk under `L_c` for i.i.d. `Gamma(1, β)` priors:
/// `(1+c)/(1+β)·E[{p(p−1)+(p+c)Z}/{p−1+(1+c)Z}]` with `Z` negative
/// binomial of shape `p` and rate `β`.
pub fn mbr_gamma(p: usize, c: f64, beta: f64, cfg: &SeriesConfig) -> Result<f64> {
    check_p(p, 2)?;
    check_c(c)?;
    let pf = p as f64;
    let e = negbin_expectation(
        |z| {
            let z = z as f64;
            (pf * (pf - 1.0) + (pf + c) * z) / (pf - 1.0 + (1.0 + c) * z)
        },
        pf,
        beta,
        cfg,
    )?;
    Ok((1.0 + c) / (1.0 + beta) * e)
}

/// Series side of the risk identity for `δ_i = (1+c)Y_iκ(Z)/{p−1+(1+c)Z}`:
/// `E[(1+c)²Z/D·(κ(Z)−γ)²/γ + (p−1)(1+c)γ/D]` with `D = p−1+(1+c)Z`.
pub fn appendix_rhs(
    p: usize,
    c: f64,
    gamma: f64,
    kappa: impl Fn(u64) -> f64,
    cfg: &SeriesConfig,
) -> Result<f64> {
    check_p(p, 2)?;
    check_c(c)?;
    let pm1 = p as f64 - 1.0;
    let k = 1.0 + c;
    poisson_expectation(
        |z| {
            let zf = z as f64;
            let d = pm1 + k * zf;
            let first = if z == 0 {
                0.0
            } else {
                k * k * zf / d * (kappa(z) - gamma).powi(2) / gamma
            };
            first + pm1 * k * gamma / d
        },
        gamma,
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::eb_factor;
    use crate::shrinkers::{mean_shrink_b0, phi_delta_c};

    fn cfg() -> SeriesConfig {
        SeriesConfig::default()
    }

    #[test]
    fn zero_phi_gives_constant_risk() {
        for c in [0.0, 1.5] {
            let r = risk_shrink_family(|_| 0.0, 7, c, 3.3, &cfg()).unwrap();
            assert!((r - 7.0 - c).abs() < 1e-12);
        }
    }

    #[test]
    fn family_matches_closed_form() {
        for g in [0.5, 2.0, 10.0, 50.0] {
            let a = risk_shrink_family(phi_delta_c(9, 3.0), 9, 3.0, g, &cfg()).unwrap();
            let b = risk_delta_c_closed(9, 3.0, g, &cfg()).unwrap();
            assert!((a - b).abs() < 1e-9, "gamma {g}: {a} vs {b}");
        }
    }

    #[test]
    fn cz_golden_value() {
        let r = risk_shrink_family(phi_delta_c(2, 0.0), 2, 0.0, 1.0, &cfg()).unwrap();
        assert!(r < 2.0);
        assert!((r - 1.103_638_323_514_327).abs() < 1e-9, "{r}");
    }

    #[test]
    fn origin_limit() {
        let r = risk_delta_c_closed(9, 3.0, 1e-6, &cfg()).unwrap();
        assert!((r - 4.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn mean_shrink_risk() {
        assert_eq!(risk_mean_shrink(|_| 0.0, 3, 5.0, 3.0, &cfg()).unwrap(), 0.0);
        let (p, b0) = (3usize, 2.0);
        let g = move |z: u64| (p as f64 - 1.0) / (p as f64 - 1.0 + (b0 - 1.0) * z as f64);
        let d = risk_mean_shrink(g, p, 5.0, 3.0, &cfg()).unwrap();
        assert!(d < 0.0);
        assert!((d - (-0.925_071_671_413_846_3)).abs() < 1e-9, "{d}");
        assert!(risk_mean_shrink(g, p, 5.0, 2.9, &cfg()).is_err());
    }

    #[test]
    fn mean_shrink_b0_rule_matches_its_estimator() {
        // The factor used by the series is the estimator's factor.
        let y = crate::types::CountVector::new(vec![4, 0]).unwrap();
        let d = mean_shrink_b0(&y, 2.0).unwrap();
        let g = 1.0 / (1.0 + 4.0);
        assert!((d.as_slice()[0] - (4.0 - g * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn eb_no_shrinkage_gives_p() {
        let theta = MeanVector::new(vec![0.4, 2.0, 1.1, 3.0]).unwrap();
        let t = risk_eb_terms(
            |z| if z >= 1 { 1.0 } else { 0.0 },
            4,
            &[1.0; 4],
            &theta,
            &cfg(),
        )
        .unwrap();
        assert!((t.r1 - 1.0).abs() < 1e-12);
        assert!((t.m2 - 1.0).abs() < 1e-12);
        assert!((t.risk - 4.0).abs() < 1e-12);
        assert!(risk_eb(|_| 1.0, 4, &[1.0; 4], &theta, &cfg()).is_err());
    }

    #[test]
    fn eb_matches_closed_delta_c() {
        for p in [3usize, 9] {
            for g in [1.0, 5.0, 25.0] {
                let theta = MeanVector::uniform(p, g).unwrap();
                let h = |z| eb_factor(&(p as f64), p, &0.0, z).unwrap();
                let a = risk_eb(h, p, &vec![1.0; p], &theta, &cfg()).unwrap();
                let b = risk_delta_c_closed(p, 0.0, g, &cfg()).unwrap();
                assert!((a - b).abs() < 1e-8, "p {p}, gamma {g}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn eb_moments_in_unit_interval() {
        let p = 5;
        let h = |z| eb_factor(&(p as f64), p, &0.0, z).unwrap();
        let mut prev = 0.0;
        for g in [0.5, 5.0, 50.0, 5000.0] {
            let t = risk_eb_terms(h, p, &[1.0; 5], &MeanVector::uniform(p, g).unwrap(), &cfg())
                .unwrap();
            assert!(t.m1 > 0.0 && t.m1 < 1.0 && t.m2 > 0.0 && t.m2 < 1.0);
            assert!(t.m2 > prev);
            prev = t.m2;
        }
        assert!(prev > 0.99);
    }

    #[test]
    fn bayes_gamma_prior_centre() {
        let alpha = [2.0, 3.0, 1.5];
        let beta = 0.5;
        let theta = MeanVector::new(alpha.iter().map(|a| (a - 1.0) / beta).collect()).unwrap();
        let r = risk_bayes_gamma_l1(&alpha, beta, &theta).unwrap();
        assert!((r.risk - 3.0 / 2.25).abs() < 1e-12);
        assert!(r.a_theta.abs() < 1e-12 && r.dominates);
    }

    #[test]
    fn mbr_limits() {
        let big = mbr_gamma(9, 3.0, 1e6, &cfg()).unwrap();
        assert!(big < 1e-4 * 12.0);
        let mut prev = 0.0;
        for beta in [1.0, 0.1, 0.01, 1e-3] {
            let m = mbr_gamma(9, 3.0, beta, &cfg()).unwrap();
            assert!(m > prev && m < 12.0);
            prev = m;
        }
    }

    #[test]
    fn appendix_rhs_matches_closed_form() {
        for g in [0.5, 5.0, 50.0] {
            let rhs = appendix_rhs(9, 3.0, g, |z| z as f64, &cfg()).unwrap();
            let closed = risk_delta_c_closed(9, 3.0, g, &cfg()).unwrap();
            assert!((rhs - closed).abs() < 1e-9, "{rhs} vs {closed}");
        }
        let oracle = appendix_rhs(9, 3.0, 5.0, |_| 5.0, &cfg()).unwrap();
        assert!(oracle > 0.0);
    }
}
