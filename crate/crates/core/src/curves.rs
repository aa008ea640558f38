//! Flat-rate zero-bond conventions and classical defaultable discounting.
//!
//! Time is a real number in years and rates are continuously compounded.
//! This is the linear baseline that the capacity-dependent kernel is
//! contrasted against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Risk-free rate together with the market-implied and objective default
/// intensities (all per year, negative values allowed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatRateSet {
    pub r: f64,
    pub lambda_implied: f64,
    pub lambda_objective: f64,
}

impl FlatRateSet {
    pub fn new(r: f64, lambda_implied: f64, lambda_objective: f64) -> Result<Self> {
        let set = Self {
            r,
            lambda_implied,
            lambda_objective,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.lambda_implied.is_finite() && self.lambda_objective.is_finite()) {
            return Err(Error::invalid("rates must be finite"));
        }
        Ok(())
    }
}

/// Rates recovered from a discount factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConversion {
    /// Continuously compounded yield `-ln(P)/T`.
    pub yield_rate: f64,
    /// Simple forward rate `(1/P - 1)/T`.
    pub simple_rate: f64,
}

/// `exp(-r T)`.
pub fn zero_bond(r: f64, maturity: f64) -> f64 {
    debug_assert!(maturity >= 0.0);
    (-r * maturity).exp()
}

pub fn rate_conversions(discount_factor: f64, maturity: f64) -> Result<RateConversion> {
    check_bond(discount_factor, maturity)?;
    Ok(RateConversion {
        yield_rate: -discount_factor.ln() / maturity,
        simple_rate: (1.0 / discount_factor - 1.0) / maturity,
    })
}

/// Intensity implied by a defaultable bond price given the risk-free rate:
/// `-ln(P^d)/T - r`.
pub fn implied_intensity(defaultable_bond: f64, maturity: f64, r: f64) -> Result<f64> {
    check_bond(defaultable_bond, maturity)?;
    Ok(-defaultable_bond.ln() / maturity - r)
}

fn check_bond(discount_factor: f64, maturity: f64) -> Result<()> {
    if !(discount_factor > 0.0) {
        return Err(Error::invalid(format!("discount factor must be positive, got {discount_factor}")));
    }
    if !(maturity > 0.0) {
        return Err(Error::invalid(format!("maturity must be positive, got {maturity}")));
    }
    Ok(())
}

/// Value of an amount paid by a counterparty that survives with the
/// market-implied probability `exp(-lambda T)`.
pub fn defaultable_value(amount: f64, rates: &FlatRateSet, maturity: f64) -> f64 {
    amount * zero_bond(rates.r, maturity) * (-rates.lambda_implied * maturity).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_bond_examples() {
        assert_eq!(zero_bond(0.05, 0.0), 1.0);
        assert!((zero_bond(0.0513, 1.0) - 0.95).abs() < 1e-4);
        assert_relative_eq!(zero_bond(0.02, 10.0), 0.818_730_753_077_981_8, max_relative = 1e-15);
    }

    #[test]
    fn conversions_examples() {
        let unit = rate_conversions(1.0, 1.0).unwrap();
        assert_eq!(unit.yield_rate, 0.0);
        assert_eq!(unit.simple_rate, 0.0);

        let c = rate_conversions(0.95, 1.0).unwrap();
        assert!((c.yield_rate - 0.051_293).abs() < 1e-6);
        assert!((c.simple_rate - 0.052_632).abs() < 1e-6);

        let lambda = implied_intensity((-0.05f64).exp(), 1.0, 0.02).unwrap();
        assert_relative_eq!(lambda, 0.03, max_relative = 1e-12);
    }

    #[test]
    fn conversions_reject_bad_inputs() {
        assert!(matches!(rate_conversions(0.0, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(rate_conversions(-0.5, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(rate_conversions(0.9, 0.0), Err(Error::InvalidArgument(_))));
        assert!(implied_intensity(0.9, -1.0, 0.0).is_err());
    }

    #[test]
    fn defaultable_examples() {
        let rf = FlatRateSet::new(0.02, 0.0, 0.0).unwrap();
        assert_eq!(defaultable_value(1.0, &rf, 10.0), zero_bond(0.02, 10.0));
        let risky = FlatRateSet::new(0.02, 0.03, 0.0).unwrap();
        assert_relative_eq!(defaultable_value(1.0, &risky, 10.0), (-0.5f64).exp(), max_relative = 1e-14);
        assert_eq!(defaultable_value(0.0, &risky, 3.0), 0.0);
    }

    #[test]
    fn rate_set_rejects_nan() {
        assert!(FlatRateSet::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(FlatRateSet::new(-0.01, -0.02, 0.0).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn reinvestment(r in -0.1f64..0.2, t in 0.0f64..30.0, s in 0.0f64..30.0) {
                let lhs = zero_bond(r, t) * zero_bond(r, s);
                let rhs = zero_bond(r, t + s);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
            }

            #[test]
            fn conversion_inverts_zero_bond(r in -0.1f64..0.2, t in 0.01f64..30.0) {
                let p = zero_bond(r, t);
                let back = rate_conversions(p, t).unwrap();
                prop_assert!((back.yield_rate - r).abs() <= 1e-12);
                prop_assert!((zero_bond(back.yield_rate, t) - p).abs() <= 1e-14 * p);
            }

            #[test]
            fn defaultable_is_linear(a in -1e3f64..1e3, b in -1e3f64..1e3, t in 0.0f64..30.0) {
                let rates = FlatRateSet::new(0.01, 0.02, 0.0).unwrap();
                let sum = defaultable_value(a + b, &rates, t);
                let parts = defaultable_value(a, &rates, t) + defaultable_value(b, &rates, t);
                prop_assert!((sum - parts).abs() <= 1e-12 * (a.abs() + b.abs()).max(1.0));
            }
        }
    }
}
