//! Compensation factors for guaranteeing a payment through `n` independent
//! defaultable funding providers, and the resulting adjusted discount rate.
//!
//! A payment `X` is secured by contracting `X*` split equally over the
//! providers, each surviving with probability `p`. The total received has mean
//! `X* p` and variance `X*² p (1-p) / n`. Requiring `mean - c * stdev = X`
//! for a quantile multiplier `c` gives
//!
//! ```text
//! X* = X / (p - c/sqrt(n) * sqrt(p (1-p)))
//! ```
//!
//! The shortfall probability is called `epsilon` here; `c` follows from it
//! via a normal quantile or the Cantelli bound.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::FlatRateSet;
use crate::error::{Error, Result};
use crate::stats::{pairwise_sum, path_rng};

/// How the quantile multiplier `c` is obtained from the shortfall
/// probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantileRule {
    /// Upper-tail standard normal quantile, `c = Φ⁻¹(1-ε)`.
    Normal,
    /// Cantelli's one-sided bound, `c = sqrt(1/ε - 1)`.
    Cantelli,
    /// Fund in expectation only, `c = 0`.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiversificationSpec {
    /// Number of independent providers.
    pub n: u32,
    /// Shortfall probability in `(0, 1)`.
    pub epsilon: f64,
    pub rule: QuantileRule,
}

impl DiversificationSpec {
    pub fn new(n: u32, epsilon: f64, rule: QuantileRule) -> Result<Self> {
        let spec = Self { n, epsilon, rule };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::invalid("at least one provider is required"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid(format!(
                "shortfall probability must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// `c / sqrt(n)`.
    pub fn scaled_multiplier(&self) -> Result<f64> {
        Ok(quantile_multiplier(self)? / (self.n as f64).sqrt())
    }
}

pub fn quantile_multiplier(spec: &DiversificationSpec) -> Result<f64> {
    spec.validate()?;
    Ok(match spec.rule {
        // Φ⁻¹(1-ε) = -Φ⁻¹(ε), avoiding the rounding of 1-ε for small ε.
        QuantileRule::Normal => -normal_quantile(spec.epsilon),
        QuantileRule::Cantelli => (1.0 / spec.epsilon - 1.0).sqrt(),
        QuantileRule::None => 0.0,
    })
}

/// Multiplier `X*/X` needed to receive `X` with shortfall probability at most `epsilon`
/// from providers surviving with probability `p_tilde`.
pub fn compensation_factor(p_tilde: f64, spec: &DiversificationSpec) -> Result<f64> {
    if !(p_tilde > 0.0 && p_tilde <= 1.0) {
        return Err(Error::invalid(format!("survival probability must lie in (0, 1], got {p_tilde}")));
    }
    let scaled = spec.scaled_multiplier()?;
    let denominator = p_tilde - scaled * (p_tilde * (1.0 - p_tilde)).sqrt();
    if denominator <= 0.0 {
        return Err(Error::InfeasibleDiversification(format!(
            "p = {p_tilde}, c/sqrt(n) = {scaled}: guaranteed fraction {denominator} is not positive"
        )));
    }
    Ok(1.0 / denominator)
}

/// Adjusted discount rate
/// `r* = r + (λ - λ̃) + ln(1 - c/sqrt(n) * sqrt(exp(λ̃ T) - 1)) / T`.
pub fn adjusted_discount_rate(rates: &FlatRateSet, spec: &DiversificationSpec, maturity: f64) -> Result<f64> {
    if !(maturity > 0.0) {
        return Err(Error::invalid(format!("maturity must be positive, got {maturity}")));
    }
    let scaled = spec.scaled_multiplier()?;
    let argument = 1.0 - scaled * (rates.lambda_objective * maturity).exp_m1().sqrt();
    if !(argument > 0.0) {
        return Err(Error::InfeasibleDiversification(format!(
            "log argument {argument} is not positive at T = {maturity}"
        )));
    }
    Ok(rates.r + (rates.lambda_implied - rates.lambda_objective) + argument.ln() / maturity)
}

/// First-order approximation `r - c/sqrt(n) * sqrt(λ T) / T`.
pub fn adjusted_rate_first_order(r: f64, lambda: f64, spec: &DiversificationSpec, maturity: f64) -> Result<f64> {
    if !(maturity > 0.0) {
        return Err(Error::invalid(format!("maturity must be positive, got {maturity}")));
    }
    if lambda < 0.0 {
        return Err(Error::invalid(format!("intensity must be non-negative, got {lambda}")));
    }
    Ok(r - spec.scaled_multiplier()? * (lambda * maturity).sqrt() / maturity)
}

/// Outcome of the brute-force provider simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundingSample {
    /// Fraction of trials where the total received fell below the target.
    pub shortfall_frequency: f64,
    /// Mean total received divided by the target.
    pub mean_ratio: f64,
    /// Sample variance of the total received.
    pub variance: f64,
    /// Amount contracted in total, `X * compensation_factor`.
    pub contracted: f64,
}

/// Contracts `target * compensation_factor` split equally over `n`
/// independent providers and draws their survival `trials` times.
pub fn simulate_diversified_funding(
    target: f64,
    p_tilde: f64,
    spec: &DiversificationSpec,
    trials: usize,
    seed: u64,
) -> Result<FundingSample> {
    if trials < 1 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let contracted = target * compensation_factor(p_tilde, spec)?;
    let share = contracted / spec.n as f64;
    let n = spec.n;

    let received: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = path_rng(seed, trial as u64);
            let survivors = (0..n).filter(|_| rng.random::<f64>() < p_tilde).count();
            survivors as f64 * share
        })
        .collect();

    let count = trials as f64;
    let shortfalls = received.iter().filter(|&&x| x < target).count();
    let mean = pairwise_sum(&received) / count;
    let squares: Vec<f64> = received.iter().map(|x| (x - mean) * (x - mean)).collect();
    let variance = if trials > 1 { pairwise_sum(&squares) / (count - 1.0) } else { 0.0 };

    Ok(FundingSample {
        shortfall_frequency: shortfalls as f64 / count,
        mean_ratio: mean / target,
        variance,
        contracted,
    })
}

/// Standard normal quantile by Acklam's rational approximation
/// (relative error below 1.2e-9 on (0, 1)).
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}
