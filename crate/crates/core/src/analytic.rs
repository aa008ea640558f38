//! Closed-form prices used as reference columns in experiment reports.

use crate::capacity::StepSurvivalFunction;
use crate::error::{Error, Result};

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Undiscounted Black call on a lognormal forward with total variance
/// `variance`.
pub fn black_call(forward: f64, strike: f64, variance: f64) -> f64 {
    if strike <= 0.0 {
        return forward - strike;
    }
    if variance <= 0.0 {
        return (forward - strike).max(0.0);
    }
    let sd = variance.sqrt();
    let d1 = ((forward / strike).ln() + 0.5 * variance) / sd;
    forward * normal_cdf(d1) - strike * normal_cdf(d1 - sd)
}

pub fn black_scholes_call(spot: f64, strike: f64, r: f64, sigma: f64, maturity: f64) -> f64 {
    let df = (-r * maturity).exp();
    df * black_call(spot / df, strike, sigma * sigma * maturity)
}

/// Value of compensating the requirement `X(T) - strike` for a lognormal
/// `X` from an empty consumption level, compensating positive amounts only.
///
/// From level zero the contracted amount is piecewise linear in the
/// requirement: `R/q_0 + Σ_j (1/q_j - 1/q_{j-1}) (R - C_j)^+` with `C_j` the
/// capacity below breakpoint `j`, so its value is a strip of calls.
pub fn compensated_forward_value(
    kernel: &StepSurvivalFunction,
    spot: f64,
    strike: f64,
    r: f64,
    sigma: f64,
    maturity: f64,
) -> Result<f64> {
    let q = kernel.values();
    if q.contains(&0.0) {
        return Err(Error::invalid("closed form needs a kernel without zero steps"));
    }
    let call = |k: f64| black_scholes_call(spot, k, r, sigma, maturity);
    let mut total = spot - strike * (-r * maturity).exp() + (1.0 / q[0] - 1.0) * call(strike);
    for (j, &x) in kernel.breakpoints().iter().enumerate().skip(1) {
        let capacity = kernel.integrate(0.0, x)?;
        total += (1.0 / q[j] - 1.0 / q[j - 1]) * call(strike + capacity);
    }
    Ok(total)
}
