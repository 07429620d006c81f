//! Truncated series for expectations over the count total `Z`.
//!
//! Every risk formula expressed as an expectation over a Poisson or
//! negative-binomial `Z` goes through [`poisson_expectation`] or
//! [`negbin_expectation`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::{ln_factorial, ln_gamma, CompensatedSum};

/// Stopping rule for the series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    /// Stop once the pmf mass still unaccounted for is below this.
    pub tail_mass_tol: f64,
    pub min_terms: usize,
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            tail_mass_tol: 1e-12,
            min_terms: 1,
            max_terms: 50_000_000,
        }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_mass_tol > 0.0 && self.tail_mass_tol < 1e-6) {
            return Err(invalid(
                "tail_mass_tol",
                format!("must lie in (0, 1e-6), got {}", self.tail_mass_tol),
            ));
        }
        if self.min_terms < 1 || self.max_terms < self.min_terms {
            return Err(invalid(
                "max_terms",
                format!(
                    "need max_terms >= min_terms >= 1, got {} and {}",
                    self.max_terms, self.min_terms
                ),
            ));
        }
        Ok(())
    }
}

/// Value of a truncated series with its stopping diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    /// First `z` not included.
    pub z_stop: u64,
    pub terms: usize,
    /// Upper bound on the pmf mass beyond `z_stop`.
    pub tail_mass: f64,
}

// Below this log-pmf the start value underflows and the recurrence starts
// further right instead.
const LN_UNDERFLOW: f64 = -700.0;
// Standard deviations skipped to the left of the mean in that case. The
// Chernoff bound puts the skipped mass far below f64 resolution.
const LEFT_SKIP_SD: f64 = 40.0;

struct Law<R: Fn(u64) -> f64> {
    mean: f64,
    sd: f64,
    ln_pmf: Box<dyn Fn(u64) -> f64>,
    /// `p(z+1)/p(z)`.
    ratio: R,
    /// Bound on every ratio beyond `z` given the current one.
    ratio_bound: Box<dyn Fn(f64) -> f64>,
}

fn run<R: Fn(u64) -> f64>(
    law: Law<R>,
    mut f: impl FnMut(u64) -> f64,
    cfg: &SeriesConfig,
) -> Result<SeriesSum> {
    cfg.validate()?;
    let mut z = 0u64;
    let mut ln_p0 = (law.ln_pmf)(0);
    let log_start = ln_p0 < LN_UNDERFLOW;
    if log_start {
        // The log pmf increases up to the mean; bisect for the first
        // representable term to the right of the skipped region.
        let mut lo = (law.mean - LEFT_SKIP_SD * law.sd).floor().max(0.0) as u64;
        let mut hi = law.mean.floor() as u64;
        if (law.ln_pmf)(lo) < LN_UNDERFLOW {
            while hi > lo + 1 {
                let mid = lo + (hi - lo) / 2;
                if (law.ln_pmf)(mid) < LN_UNDERFLOW {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo = hi;
        }
        z = lo;
        ln_p0 = (law.ln_pmf)(z);
    }
    let mut pz = ln_p0.exp();
    let required = (law.mean + 10.0 * law.sd + 20.0).ceil() as usize;
    let min_terms = cfg
        .min_terms
        .max(required.saturating_sub(z as usize))
        .min(cfg.max_terms);
    let mut value = CompensatedSum::default();
    let mut mass = CompensatedSum::default();
    let mut terms = 0usize;
    loop {
        if pz > 0.0 {
            value.add(f(z) * pz);
        }
        mass.add(pz);
        terms += 1;
        let r = (law.ratio)(z);
        let next = pz * r;
        z += 1;
        let rho = (law.ratio_bound)(r);
        let analytic_tail = if rho < 1.0 {
            next / (1.0 - rho)
        } else {
            f64::INFINITY
        };
        let mass_tail = 1.0 - mass.value();
        if terms >= min_terms {
            let tail = analytic_tail.min(mass_tail.max(0.0));
            if mass_tail < cfg.tail_mass_tol || analytic_tail < cfg.tail_mass_tol {
                // A log-space start carries the rounding of lnΓ at large
                // arguments as a common relative error in every term;
                // normalising by the accumulated mass removes it.
                let scale = if log_start { mass.value() } else { 1.0 };
                return Ok(SeriesSum {
                    value: value.value() / scale,
                    z_stop: z,
                    terms,
                    tail_mass: tail,
                });
            }
        }
        if terms >= cfg.max_terms {
            return Err(Error::SeriesDivergence {
                max_terms: cfg.max_terms,
            });
        }
        pz = next;
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(
            name,
            format!("must be positive and finite, got {v}"),
        ));
    }
    Ok(())
}

/// `E f(Z)` for `Z ~ Poisson(γ)`.
pub fn poisson_expectation(
    f: impl FnMut(u64) -> f64,
    gamma: f64,
    cfg: &SeriesConfig,
) -> Result<f64> {
    poisson_expectation_detailed(f, gamma, cfg).map(|s| s.value)
}

pub fn poisson_expectation_detailed(
    f: impl FnMut(u64) -> f64,
    gamma: f64,
    cfg: &SeriesConfig,
) -> Result<SeriesSum> {
    check_positive("gamma", gamma)?;
    let ln_g = gamma.ln();
    let law = Law {
        mean: gamma,
        sd: gamma.sqrt(),
        ln_pmf: Box::new(move |z| z as f64 * ln_g - gamma - ln_factorial(z)),
        ratio: move |z: u64| gamma / (z as f64 + 1.0),
        // Ratios decrease in z.
        ratio_bound: Box::new(|r| r),
    };
    run(law, f, cfg)
}

/// `ln Pr{Z = z}` for the negative binomial with shape `r` and rate `β`:
/// `Γ(r+z)/{Γ(r) z!} · β^r/(1+β)^{r+z}`.
pub fn negbin_ln_pmf(z: u64, shape: f64, beta: f64) -> f64 {
    ln_gamma(shape + z as f64) - ln_gamma(shape) - ln_factorial(z) + shape * beta.ln()
        - (shape + z as f64) * (1.0 + beta).ln()
}

/// `E f(Z)` for the Gamma(shape, β)-mixed Poisson `Z`.
pub fn negbin_expectation(
    f: impl FnMut(u64) -> f64,
    shape: f64,
    beta: f64,
    cfg: &SeriesConfig,
) -> Result<f64> {
    negbin_expectation_detailed(f, shape, beta, cfg).map(|s| s.value)
}

pub fn negbin_expectation_detailed(
    f: impl FnMut(u64) -> f64,
    shape: f64,
    beta: f64,
    cfg: &SeriesConfig,
) -> Result<SeriesSum> {
    check_positive("shape", shape)?;
    check_positive("beta", beta)?;
    let q = 1.0 / (1.0 + beta);
    let law = Law {
        mean: shape / beta,
        sd: (shape * (1.0 + beta)).sqrt() / beta,
        ln_pmf: Box::new(move |z| negbin_ln_pmf(z, shape, beta)),
        ratio: move |z: u64| (shape + z as f64) / (z as f64 + 1.0) * q,
        // Ratios decrease when shape ≥ 1 and increase towards q otherwise.
        ratio_bound: Box::new(move |r| if shape >= 1.0 { r } else { q }),
    };
    run(law, f, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SeriesConfig {
        SeriesConfig::default()
    }

    #[test]
    fn poisson_moments() {
        for g in [1e-6, 0.5, 5.0, 50.0, 900.0, 1e5] {
            let one = poisson_expectation(|_| 1.0, g, &cfg()).unwrap();
            assert!((one - 1.0).abs() < 1e-12, "gamma {g}: {one}");
            let m = poisson_expectation(|z| z as f64, g, &cfg()).unwrap();
            assert!((m - g).abs() < 1e-9 * g.max(1.0), "gamma {g}: {m}");
        }
        let m2 = poisson_expectation(|z| (z * z) as f64, 5.0, &cfg()).unwrap();
        assert!((m2 - 30.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(poisson_expectation(|_| 1.0, 0.0, &cfg()).is_err());
        let bad = SeriesConfig {
            tail_mass_tol: 1e-3,
            ..cfg()
        };
        assert!(poisson_expectation(|_| 1.0, 1.0, &bad).is_err());
        let capped = SeriesConfig {
            max_terms: 5,
            min_terms: 1,
            ..cfg()
        };
        assert!(matches!(
            poisson_expectation(|_| 1.0, 50.0, &capped),
            Err(Error::SeriesDivergence { .. })
        ));
    }

    #[test]
    fn min_terms_rule() {
        let s = poisson_expectation_detailed(|_| 1.0, 4.0, &cfg()).unwrap();
        assert!(s.terms >= 4 + 20 + 20);
        assert!(s.tail_mass < 1e-12);
    }

    #[test]
    fn negbin_moments() {
        for (r, b) in [(9.0, 0.5), (2.0, 1.0), (0.3, 0.2), (9.0, 1e-4)] {
            let one = negbin_expectation(|_| 1.0, r, b, &cfg()).unwrap();
            assert!((one - 1.0).abs() < 1e-10, "{r} {b}: {one}");
            let m = negbin_expectation(|z| z as f64, r, b, &cfg()).unwrap();
            assert!((m - r / b).abs() < 1e-8 * (r / b).max(1.0));
        }
    }
}
