//! Capacity-dependent survival kernel.
//!
//! A funding provider delivers the marginal unit of requested funding at
//! consumption level `x` with probability `q(x)`, a non-increasing step
//! function. Requesting `X` at current consumption `b` is delivered in
//! expectation as `∫_b^{b+X} q`, so the effective survival probability is
//! that integral divided by `X`. To receive `X` in expectation one has to
//! contract the larger amount `X*` solving `∫_b^{b+X*} q = X`. Past draws
//! accumulate in the consumption level, which decays exponentially in time.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{column_estimates, path_rng, Estimate};

/// Piecewise-constant marginal survival probability over capacity
/// consumption.
///
/// Step `j` covers `[breakpoints[j], breakpoints[j+1])`; the last step
/// extends to infinity. Adjacent steps with equal values are merged on
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct StepSurvivalFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepSurvivalFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::invalid(format!(
                "need matching non-empty breakpoints and values, got {} and {}",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::invalid(format!("first breakpoint must be 0, got {}", breakpoints[0])));
        }
        if breakpoints.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("breakpoints must be finite"));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("breakpoints must be strictly increasing"));
        }
        if values.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(Error::invalid("survival values must lie in [0, 1]"));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("survival values must be non-increasing"));
        }

        let mut merged_x = vec![breakpoints[0]];
        let mut merged_q = vec![values[0]];
        for (&x, &q) in breakpoints.iter().zip(&values).skip(1) {
            if q != *merged_q.last().unwrap() {
                merged_x.push(x);
                merged_q.push(q);
            }
        }
        Ok(Self {
            breakpoints: merged_x,
            values: merged_q,
        })
    }

    /// Builds from `(breakpoint, value)` pairs.
    pub fn from_steps(steps: &[(f64, f64)]) -> Result<Self> {
        let (x, q) = steps.iter().copied().unzip();
        Self::new(x, q)
    }

    /// `q ≡ value` on `[0, ∞)`.
    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![value])
    }

    /// Default-free up to `threshold`, `beyond` afterwards.
    pub fn threshold(threshold: f64, beyond: f64) -> Result<Self> {
        Self::new(vec![0.0, threshold], vec![1.0, beyond])
    }

    /// Fully survivable up to `threshold`, then a linear decline with slope
    /// `-1/scale` discretised into `steps` steps of width `width`, each
    /// carrying the line's value at its midpoint, floored at `floor`.
    pub fn threshold_ramp(threshold: f64, scale: f64, width: f64, steps: usize, floor: f64) -> Result<Self> {
        if !(scale > 0.0 && width > 0.0) {
            return Err(Error::invalid("ramp scale and width must be positive"));
        }
        let mut x = Vec::with_capacity(steps + 1);
        let mut q = Vec::with_capacity(steps + 1);
        if threshold > 0.0 {
            x.push(0.0);
            q.push(1.0);
        }
        for j in 0..steps {
            let start = threshold + j as f64 * width;
            let mid = (j as f64 + 0.5) * width;
            x.push(start);
            q.push((1.0 - mid / scale).max(floor));
        }
        Self::new(x, q)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value on the last step, which extends to infinity.
    pub fn tail_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// True when `q ≡ 1`.
    pub fn is_default_free(&self) -> bool {
        self.values.len() == 1 && self.values[0] == 1.0
    }

    fn step_of(&self, x: f64) -> usize {
        // last breakpoint <= x; x < 0 maps to the first step
        self.breakpoints.partition_point(|&b| b <= x).saturating_sub(1)
    }

    fn step_end(&self, j: usize) -> f64 {
        self.breakpoints.get(j + 1).copied().unwrap_or(f64::INFINITY)
    }

    /// `q(x)`; levels below zero take the first step's value.
    pub fn value_at(&self, x: f64) -> f64 {
        self.values[self.step_of(x)]
    }

    /// Exact `∫_x^y q`.
    pub fn integrate(&self, x: f64, y: f64) -> Result<f64> {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::invalid(format!("lower limit must be finite and non-negative, got {x}")));
        }
        if !(y >= x && y.is_finite()) {
            return Err(Error::invalid(format!("upper limit {y} must be finite and not below {x}")));
        }
        let mut j = self.step_of(x);
        let mut pos = x;
        let mut total = 0.0;
        loop {
            let end = self.step_end(j);
            if y <= end {
                return Ok(total + self.values[j] * (y - pos));
            }
            total += self.values[j] * (end - pos);
            pos = end;
            j += 1;
        }
    }

    /// `∫_b^∞ q`, infinite unless the tail is zero.
    pub fn remaining_capacity(&self, level: f64) -> f64 {
        if self.tail_value() > 0.0 {
            return f64::INFINITY;
        }
        let last = *self.breakpoints.last().unwrap();
        if level >= last {
            0.0
        } else {
            self.integrate(level.max(0.0), last).unwrap_or(0.0)
        }
    }

    /// Effective survival probability `p(b, X) = (1/X) ∫_b^{b+X} q`.
    pub fn survival_probability(&self, level: f64, amount: f64) -> Result<f64> {
        check_level(level)?;
        if !(amount > 0.0 && amount.is_finite()) {
            return Err(Error::invalid(format!("amount must be positive, got {amount}")));
        }
        let end = level + amount;
        let j = self.step_of(level);
        if end <= self.step_end(j) {
            return Ok(self.values[j]);
        }
        Ok(self.integrate(level, end)? / amount)
    }

    /// Contracted amount `X*` with `∫_b^{b+X*} q = X`.
    ///
    /// Inside a step with value `q_j`, each unit of target still to be
    /// funded costs `1/q_j` units of contracted notional, so the inversion
    /// is closed form step by step.
    pub fn compensated_amount(&self, level: f64, amount: f64) -> Result<f64> {
        check_level(level)?;
        if !(amount > 0.0 && amount.is_finite()) {
            return Err(Error::invalid(format!("amount must be positive, got {amount}")));
        }
        let mut j = self.step_of(level);
        let mut pos = level;
        let mut remaining = amount;
        let mut contracted = 0.0;
        loop {
            let q = self.values[j];
            if q == 0.0 {
                return Err(Error::CapacityExhausted {
                    requested: amount,
                    available: amount - remaining,
                });
            }
            let end = self.step_end(j);
            let capacity = q * (end - pos);
            if remaining <= capacity {
                return Ok(contracted + remaining / q);
            }
            contracted += end - pos;
            remaining -= capacity;
            pos = end;
            j += 1;
        }
    }

    /// `p*(b, X) = X / X*`; `1/p* - 1` is the extra fraction of `X` that has
    /// to be contracted.
    pub fn compensation_probability(&self, level: f64, amount: f64) -> Result<f64> {
        Ok(amount / self.compensated_amount(level, amount)?)
    }

    /// Mirror of [`compensated_amount`](Self::compensated_amount) for a gain
    /// that releases capacity: the magnitude `G*` with
    /// `∫_{b-G*}^{b} q = gain`, taking `q(0)` below zero.
    pub fn compensated_release(&self, level: f64, gain: f64) -> Result<f64> {
        check_level(level)?;
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(Error::invalid(format!("gain must be positive, got {gain}")));
        }
        let mut pos = level;
        let mut remaining = gain;
        let mut released = 0.0;
        // step whose interior lies immediately below `pos`
        let mut j = self.breakpoints.partition_point(|&b| b < pos).saturating_sub(1);
        loop {
            let q = self.values[j];
            if q == 0.0 {
                return Err(Error::CapacityExhausted {
                    requested: gain,
                    available: gain - remaining,
                });
            }
            let start = if j == 0 { f64::NEG_INFINITY } else { self.breakpoints[j] };
            let capacity = q * (pos - start);
            if remaining <= capacity {
                return Ok(released + remaining / q);
            }
            released += pos - start;
            remaining -= capacity;
            pos = start;
            j -= 1;
        }
    }
}

fn check_level(level: f64) -> Result<()> {
    if !(level >= 0.0 && level.is_finite()) {
        return Err(Error::invalid(format!("consumption level must be finite and non-negative, got {level}")));
    }
    Ok(())
}

impl TryFrom<Vec<(f64, f64)>> for StepSurvivalFunction {
    type Error = Error;

    fn try_from(steps: Vec<(f64, f64)>) -> Result<Self> {
        Self::from_steps(&steps)
    }
}

impl From<StepSurvivalFunction> for Vec<(f64, f64)> {
    fn from(q: StepSurvivalFunction) -> Self {
        q.breakpoints.into_iter().zip(q.values).collect()
    }
}

/// Which amount is added to the consumption level after a draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccumulationRule {
    /// The requested amount `X`.
    #[default]
    Requested,
    /// The contracted amount `X*`.
    Contracted,
}

/// Funding-consumption level of one provider along one path.
///
/// The level decays at rate `decay` (per year, `+∞` allowed) and grows by
/// each draw: `b' = b exp(-decay Δt) + X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityState {
    level: f64,
    decay: f64,
    time: f64,
}

impl CapacityState {
    pub fn new(decay: f64) -> Result<Self> {
        Self::with_level(0.0, decay, 0.0)
    }

    pub fn with_level(level: f64, decay: f64, time: f64) -> Result<Self> {
        check_level(level)?;
        if !(decay >= 0.0) {
            return Err(Error::invalid(format!("decay must be non-negative, got {decay}")));
        }
        if !time.is_finite() {
            return Err(Error::invalid("state time must be finite"));
        }
        Ok(Self { level, decay, time })
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Level seen at `t` before any new draw.
    pub fn level_at(&self, t: f64) -> Result<f64> {
        let dt = t - self.time;
        if !(dt >= 0.0) {
            return Err(Error::invalid(format!("time goes backwards: {} -> {t}", self.time)));
        }
        if dt == 0.0 || self.level == 0.0 {
            return Ok(self.level);
        }
        if self.decay == f64::INFINITY {
            return Ok(0.0);
        }
        Ok(self.level * (-self.decay * dt).exp())
    }

    /// Decays to `t` and adds `drawn`.
    pub fn advance(&self, t: f64, drawn: f64) -> Result<Self> {
        if !(drawn >= 0.0 && drawn.is_finite()) {
            return Err(Error::invalid(format!("drawn amount must be non-negative, got {drawn}")));
        }
        Ok(Self {
            level: self.level_at(t)? + drawn,
            decay: self.decay,
            time: t,
        })
    }

    /// Decays to `t` and removes `released`, never going below zero.
    pub fn release(&self, t: f64, released: f64) -> Result<Self> {
        if !(released >= 0.0 && released.is_finite()) {
            return Err(Error::invalid(format!("released amount must be non-negative, got {released}")));
        }
        Ok(Self {
            level: (self.level_at(t)? - released).max(0.0),
            decay: self.decay,
            time: t,
        })
    }
}

/// Monte-Carlo estimate of `E[q(a(t))]` for `q(x) = exp(-x)` and an
/// accumulated requirement `a(t) = mu t + beta W(t)`, on each time of `grid`.
///
/// In the limit of infinitesimal draws this is discounting with the
/// intensity `mu - beta²/2`.
pub fn intensity_limit_survival(mu: f64, beta: f64, grid: &[f64], paths: usize, seed: u64) -> Result<Vec<Estimate>> {
    if paths < 1 {
        return Err(Error::invalid("at least one path is required"));
    }
    if grid.first() != Some(&0.0) {
        return Err(Error::invalid("time grid must start at 0"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("time grid must be strictly increasing"));
    }
    let steps: Vec<f64> = grid.windows(2).map(|w| (w[1] - w[0]).sqrt()).collect();
    Ok(column_estimates(paths, grid.len(), |path, out| {
        let mut rng = path_rng(seed, path as u64);
        let mut w = 0.0;
        out[0] = 1.0;
        for (k, sqrt_dt) in steps.iter().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            w += sqrt_dt * z;
            out[k + 1] = (-(mu * grid[k + 1] + beta * w)).exp();
        }
    }))
}
