use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::types::{CountVector, EstimateVector};

/// The numerator `ψ(z)` of the shrinkage factor `φ(z) = ψ(z)/{p−1+(1+c)z}`.
///
/// Valid members are nondecreasing with `0 < ψ(z) < 2(p−1)`. Only `z ≥ 1`
/// is held to the positivity bound: at `z = 0` the data vector is zero and
/// `ψ(0)` never enters an estimate or a risk.
#[derive(Clone)]
pub enum PsiFunction<T: Scalar = f64> {
    Constant(T),
    /// `ψ(z) = table[min(z, len − 1)]`.
    Table(Vec<T>),
    Custom(Arc<dyn Fn(u64) -> T + Send + Sync>),
}

impl<T: Scalar> fmt::Debug for PsiFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiFunction::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            PsiFunction::Table(t) => f.debug_tuple("Table").field(t).finish(),
            PsiFunction::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl<T: Scalar> PsiFunction<T> {
    /// `ψ ≡ κ(p−1)`; valid for `κ ∈ (0, 2)`.
    pub fn constant_fraction(kappa: T, p: usize) -> Self {
        PsiFunction::Constant(kappa * T::from_usize(p - 1))
    }

    pub fn custom(f: impl Fn(u64) -> T + Send + Sync + 'static) -> Self {
        PsiFunction::Custom(Arc::new(f))
    }

    pub fn eval(&self, z: u64) -> T {
        match self {
            PsiFunction::Constant(v) => v.clone(),
            PsiFunction::Table(t) => t[(z as usize).min(t.len() - 1)].clone(),
            PsiFunction::Custom(f) => f(z),
        }
    }

    /// Checks monotonicity and `0 < ψ(z) < 2(p−1)` for `z` in `[0, z_max]`.
    pub fn validate(&self, p: usize, z_max: u64) -> Result<()> {
        if let PsiFunction::Table(t) = self {
            if t.is_empty() {
                return Err(invalid("psi", "empty table"));
            }
        }
        let upper = T::from_usize(2 * (p - 1));
        let mut prev: Option<T> = None;
        for z in 0..=z_max {
            let v = self.eval(z);
            if v >= upper {
                return Err(Error::InvalidPsi {
                    condition: "psi(z) < 2(p-1)",
                    z,
                });
            }
            let positive = if z == 0 {
                !v.is_negative()
            } else {
                v.is_positive()
            };
            if !positive {
                return Err(Error::InvalidPsi {
                    condition: "psi(z) > 0",
                    z,
                });
            }
            if let Some(prev) = prev {
                if v < prev {
                    return Err(Error::InvalidPsi {
                        condition: "nondecreasing psi",
                        z,
                    });
                }
            }
            prev = Some(v);
        }
        Ok(())
    }
}

fn check_c<T: Scalar>(c: &T) -> Result<()> {
    if c.is_negative() {
        return Err(invalid("c", format!("must be >= 0, got {c:?}")));
    }
    Ok(())
}

/// `δ_i^c = {1 − (p−1)/(p−1+(1+c)Z)}·Y_i`. At `c = 0` this is the
/// Clevenson–Zidek estimator.
pub fn delta_c<T: Scalar>(y: &CountVector, c: T) -> Result<EstimateVector<T>> {
    y.require_len(2, "delta_c")?;
    check_c(&c)?;
    let pm1 = T::from_usize(y.len() - 1);
    let z = T::from_count(y.total());
    let factor = T::one() - pm1.clone() / (pm1 + (T::one() + c) * z);
    EstimateVector::new(
        y.iter()
            .map(|v| factor.clone() * T::from_count(v))
            .collect(),
    )
}

/// Member of the dominating class: `δ = {1 − ψ(Z)/(p−1+(1+c)Z)}·Y`.
pub fn dc_family<T: Scalar>(
    y: &CountVector,
    c: T,
    psi: &PsiFunction<T>,
) -> Result<EstimateVector<T>> {
    y.require_len(2, "dc_family")?;
    check_c(&c)?;
    let z = y.total();
    psi.validate(y.len(), z + 1)?;
    let pm1 = T::from_usize(y.len() - 1);
    let factor = T::one() - psi.eval(z) / (pm1 + (T::one() + c) * T::from_count(z));
    EstimateVector::new(
        y.iter()
            .map(|v| factor.clone() * T::from_count(v))
            .collect(),
    )
}

/// `φ(z) = ψ(z)/{p−1+(1+c)z}` as a closure over `f64`.
pub fn phi_dc(p: usize, c: f64, psi: PsiFunction<f64>) -> impl Fn(u64) -> f64 + Send + Sync {
    move |z| psi.eval(z) / ((p - 1) as f64 + (1.0 + c) * z as f64)
}

/// `φ` of `δ^{c0}`: `(p−1)/{p−1+(1+c0)z}`. With `c0 = 0` this is the
/// Clevenson–Zidek shrinkage factor.
pub fn phi_delta_c(p: usize, c0: f64) -> impl Fn(u64) -> f64 + Send + Sync + Copy {
    let pm1 = (p - 1) as f64;
    move |z| pm1 / (pm1 + (1.0 + c0) * z as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{exact, Exact};

    fn cv(v: &[u64]) -> CountVector {
        CountVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn delta_c_examples() {
        let d = delta_c(&cv(&[0, 0, 0]), 2.5).unwrap();
        assert_eq!(d.as_slice(), &[0.0, 0.0, 0.0]);

        let d = delta_c(&cv(&[1, 1]), exact(0, 1)).unwrap();
        assert_eq!(d.as_slice(), &[exact(2, 3), exact(2, 3)]);

        let d = delta_c(&cv(&[1; 9]), exact(3, 1)).unwrap();
        assert!(d.as_slice().iter().all(|v| *v == exact(9, 11)));
    }

    #[test]
    fn delta_c_rejects_p1_and_negative_c() {
        assert!(delta_c(&cv(&[4]), 0.0).is_err());
        assert!(delta_c(&cv(&[4, 1]), -0.5).is_err());
    }

    #[test]
    fn dc_family_constant_half() {
        let psi = PsiFunction::constant_fraction(exact(1, 2), 3);
        let d = dc_family(&cv(&[2, 1, 0]), Exact::from_integer(0), &psi).unwrap();
        assert_eq!(d.as_slice(), &[exact(8, 5), exact(4, 5), exact(0, 1)]);
    }

    #[test]
    fn dc_family_boundary_of_psi_condition() {
        let p = 4usize;
        let y = cv(&[3, 1, 2, 5]);
        let bound = 2.0 * (p - 1) as f64;
        let ok = PsiFunction::custom(move |z| (bound - 1e-6).min(z as f64));
        assert!(dc_family(&y, 1.0, &ok).is_ok());
        let at_bound = PsiFunction::Constant(bound);
        assert!(matches!(
            dc_family(&y, 1.0, &at_bound),
            Err(Error::InvalidPsi { .. })
        ));
        let decreasing = PsiFunction::custom(|z| 3.0 - 0.1 * z as f64);
        assert!(dc_family(&y, 1.0, &decreasing).is_err());
    }

    #[test]
    fn table_psi_extends_last_value() {
        let psi = PsiFunction::Table(vec![0.5, 1.0, 1.5]);
        assert_eq!(psi.eval(1), 1.0);
        assert_eq!(psi.eval(40), 1.5);
        assert!(psi.validate(3, 100).is_ok());
    }

    #[test]
    fn phi_of_delta_c_matches_estimator() {
        let y = cv(&[4, 0, 2, 7]);
        let d = delta_c(&y, 1.5).unwrap();
        let phi = phi_delta_c(4, 1.5)(y.total());
        for (dv, yv) in d.as_slice().iter().zip(y.iter()) {
            assert!((dv - (1.0 - phi) * yv as f64).abs() < 1e-13);
        }
    }
}
