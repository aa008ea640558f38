//! Monte-Carlo valuation of funding requirements under default compensation.
//!
//! A product is a schedule of future funding requirements (positive amounts
//! must be paid, negative amounts are received). Each requirement is
//! replaced by the amount that has to be contracted from defaultable
//! providers so that it is met in expectation, then discounted with the
//! ensemble numeraire. Under the capacity kernel the contracted amount
//! depends on the size of the requirement and on earlier draws of the same
//! path, so values are no longer linear in the notional.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{AccumulationRule, CapacityState, StepSurvivalFunction};
use crate::error::{Error, Result};
use crate::stats::{pairwise_sum, Estimate};
use crate::stochastic::{simulate_lmm, LmmSpec, PathEnsemble};

/// Funding requirements to be valued.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Product {
    /// `notional * X(T)` at `maturity`.
    TerminalFlow { maturity: f64, notional: f64 },
    /// `X(T) - K` at `maturity`.
    ForwardMinusStrike { maturity: f64, strike: f64 },
    /// `X(T_i) - K` at each of `times`.
    Stream { times: Vec<f64>, strike: f64 },
    /// Net payments of the fixed-rate payer of a swap on consecutive
    /// forward-rate periods `[dates[i], dates[i+1]]`: at `dates[i+1]` the
    /// requirement is `notional * (dates[i+1] - dates[i]) * (K - L_i)` with
    /// `L_i` fixed at `dates[i]`. Two dates give a forward rate agreement.
    Swap { dates: Vec<f64>, fixed_rate: f64, notional: f64 },
}

impl Product {
    pub fn validate(&self) -> Result<()> {
        let increasing = |times: &[f64], first_positive: bool| {
            !times.is_empty()
                && times.iter().all(|t| t.is_finite())
                && (!first_positive || times[0] > 0.0)
                && times[0] >= 0.0
                && times.windows(2).all(|w| w[1] > w[0])
        };
        match self {
            Product::TerminalFlow { maturity, notional } => {
                if !(*maturity > 0.0 && maturity.is_finite() && notional.is_finite()) {
                    return Err(Error::invalid("terminal flow needs a positive maturity and finite notional"));
                }
            }
            Product::ForwardMinusStrike { maturity, strike } => {
                if !(*maturity > 0.0 && maturity.is_finite() && strike.is_finite()) {
                    return Err(Error::invalid("forward needs a positive maturity and finite strike"));
                }
            }
            Product::Stream { times, strike } => {
                if !increasing(times, true) || !strike.is_finite() {
                    return Err(Error::invalid("stream times must be positive and strictly increasing"));
                }
            }
            Product::Swap {
                dates,
                fixed_rate,
                notional,
            } => {
                if dates.len() < 2 || !increasing(dates, false) {
                    return Err(Error::invalid("swap needs at least two strictly increasing dates"));
                }
                if !(*notional > 0.0 && notional.is_finite()) {
                    return Err(Error::invalid(format!("swap notional must be positive, got {notional}")));
                }
                if !fixed_rate.is_finite() {
                    return Err(Error::invalid("fixed rate must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Same product with a different fixed rate or strike.
    pub fn with_rate(&self, rate: f64) -> Product {
        let mut product = self.clone();
        match &mut product {
            Product::Swap { fixed_rate, .. } => *fixed_rate = rate,
            Product::ForwardMinusStrike { strike, .. } | Product::Stream { strike, .. } => *strike = rate,
            Product::TerminalFlow { .. } => {}
        }
        product
    }
}

/// How requirements are compensated for provider defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Kernel {
    /// Classical valuation, no compensation.
    None,
    /// A requirement due at `T` is scaled by `exp(lambda T)`.
    ConstantIntensity { lambda: f64 },
    /// Capacity-dependent compensation with a per-path consumption level.
    StateDependent {
        kernel: StepSurvivalFunction,
        decay: f64,
        #[serde(default)]
        rule: AccumulationRule,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompensationMode {
    pub kernel: Kernel,
    /// Compensate positive requirements only; negative amounts pass through
    /// and leave the consumption level untouched.
    #[serde(default)]
    pub asymmetric: bool,
    /// Largest tolerated fraction of paths on which capacity runs out.
    #[serde(default)]
    pub exhausted_limit: f64,
}

impl CompensationMode {
    pub fn none() -> Self {
        Self::new(Kernel::None, false)
    }

    pub fn new(kernel: Kernel, asymmetric: bool) -> Self {
        Self {
            kernel,
            asymmetric,
            exhausted_limit: 0.0,
        }
    }

    pub fn state_dependent(kernel: StepSurvivalFunction, decay: f64, asymmetric: bool) -> Self {
        Self::new(
            Kernel::StateDependent {
                kernel,
                decay,
                rule: AccumulationRule::Requested,
            },
            asymmetric,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.exhausted_limit) {
            return Err(Error::invalid("exhausted-path limit must lie in [0, 1]"));
        }
        match &self.kernel {
            Kernel::None => Ok(()),
            Kernel::ConstantIntensity { lambda } if lambda.is_finite() => Ok(()),
            Kernel::ConstantIntensity { .. } => Err(Error::invalid("intensity must be finite")),
            Kernel::StateDependent { decay, .. } => CapacityState::new(*decay).map(|_| ()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValuationResult {
    pub value: f64,
    pub standard_error: f64,
    /// Total contracted over total required amount, over all compensated
    /// requirements (1 when nothing was compensated).
    pub mean_compensation_factor: f64,
    /// Fraction of paths dropped because capacity ran out.
    pub exhausted_fraction: f64,
}

#[derive(Debug, Clone, Copy)]
enum Source {
    Underlying { scale: f64, strike: f64 },
    Period { fixing: usize, accrual: f64, notional: f64, fixed_rate: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Payment {
    index: usize,
    time: f64,
    source: Source,
}

impl Payment {
    fn amount(&self, ensemble: &PathEnsemble, path: usize) -> f64 {
        match self.source {
            Source::Underlying { scale, strike } => scale * ensemble.value(path, self.index) - strike,
            Source::Period {
                fixing,
                accrual,
                notional,
                fixed_rate,
            } => notional * accrual * (fixed_rate - ensemble.factor(path, fixing, fixing)),
        }
    }
}

fn grid_index(ensemble: &PathEnsemble, t: f64) -> Result<usize> {
    ensemble
        .time_index(t)
        .ok_or_else(|| Error::invalid(format!("time {t} is not on the simulation grid")))
}

fn schedule(product: &Product, ensemble: &PathEnsemble) -> Result<Vec<Payment>> {
    product.validate()?;
    let underlying = |t: f64, scale: f64, strike: f64| -> Result<Payment> {
        Ok(Payment {
            index: grid_index(ensemble, t)?,
            time: t,
            source: Source::Underlying { scale, strike },
        })
    };
    match product {
        Product::TerminalFlow { maturity, notional } => Ok(vec![underlying(*maturity, *notional, 0.0)?]),
        Product::ForwardMinusStrike { maturity, strike } => Ok(vec![underlying(*maturity, 1.0, *strike)?]),
        Product::Stream { times, strike } => times.iter().map(|&t| underlying(t, 1.0, *strike)).collect(),
        Product::Swap {
            dates,
            fixed_rate,
            notional,
        } => dates
            .windows(2)
            .map(|w| {
                let fixing = grid_index(ensemble, w[0])?;
                let index = grid_index(ensemble, w[1])?;
                if index != fixing + 1 || fixing >= ensemble.factors() {
                    return Err(Error::invalid(format!(
                        "swap period [{}, {}] is not a simulated forward-rate period",
                        w[0], w[1]
                    )));
                }
                Ok(Payment {
                    index,
                    time: w[1],
                    source: Source::Period {
                        fixing,
                        accrual: w[1] - w[0],
                        notional: *notional,
                        fixed_rate: *fixed_rate,
                    },
                })
            })
            .collect(),
    }
}

/// Per-path discounted compensated requirements.
#[derive(Debug, Clone)]
pub struct PathValues {
    payments: usize,
    /// Row-major `paths x payments`.
    discounted: Vec<f64>,
    exhausted: Vec<bool>,
    required: f64,
    contracted: f64,
}

impl PathValues {
    pub fn paths(&self) -> usize {
        self.exhausted.len()
    }

    pub fn payments(&self) -> usize {
        self.payments
    }

    /// Discounted compensated requirements of one path, in payment order.
    /// Empty if capacity ran out on that path.
    pub fn path(&self, path: usize) -> &[f64] {
        if self.exhausted[path] {
            &[]
        } else {
            &self.discounted[path * self.payments..(path + 1) * self.payments]
        }
    }

    pub fn exhausted_fraction(&self) -> f64 {
        self.exhausted.iter().filter(|&&e| e).count() as f64 / self.paths() as f64
    }

    fn compensation_factor(&self) -> f64 {
        if self.required == 0.0 {
            1.0
        } else {
            self.contracted / self.required
        }
    }

    fn check(&self, limit: f64) -> Result<()> {
        let fraction = self.exhausted_fraction();
        if fraction > limit || fraction == 1.0 {
            return Err(Error::ExhaustedPaths { fraction, limit });
        }
        Ok(())
    }

    fn live_paths(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.paths()).filter(|&p| !self.exhausted[p])
    }
}

struct PathOutcome {
    exhausted: bool,
    required: f64,
    contracted: f64,
}

fn compensate_path(
    payments: &[Payment],
    ensemble: &PathEnsemble,
    mode: &CompensationMode,
    path: usize,
    out: &mut [f64],
) -> Result<PathOutcome> {
    let mut outcome = PathOutcome {
        exhausted: false,
        required: 0.0,
        contracted: 0.0,
    };
    let mut state = match &mode.kernel {
        Kernel::StateDependent { decay, .. } => Some(CapacityState::new(*decay)?),
        _ => None,
    };
    for (slot, payment) in out.iter_mut().zip(payments) {
        let flow = payment.amount(ensemble, path);
        let compensate = flow > 0.0 || (flow < 0.0 && !mode.asymmetric);
        let contracted = if !compensate {
            flow
        } else {
            match &mode.kernel {
                Kernel::None => flow,
                Kernel::ConstantIntensity { lambda } => flow * (lambda * payment.time).exp(),
                Kernel::StateDependent { kernel, rule, .. } => {
                    let current = state.take().expect("state-dependent mode carries a state");
                    let level = current.level_at(payment.time)?;
                    if flow > 0.0 {
                        let amount = match kernel.compensated_amount(level, flow) {
                            Ok(a) => a,
                            Err(Error::CapacityExhausted { .. }) => {
                                outcome.exhausted = true;
                                return Ok(outcome);
                            }
                            Err(e) => return Err(e),
                        };
                        let drawn = match rule {
                            AccumulationRule::Requested => flow,
                            AccumulationRule::Contracted => amount,
                        };
                        state = Some(current.advance(payment.time, drawn)?);
                        amount
                    } else {
                        let released = match kernel.compensated_release(level, -flow) {
                            Ok(a) => a,
                            Err(Error::CapacityExhausted { .. }) => {
                                outcome.exhausted = true;
                                return Ok(outcome);
                            }
                            Err(e) => return Err(e),
                        };
                        let freed = match rule {
                            AccumulationRule::Requested => -flow,
                            AccumulationRule::Contracted => released,
                        };
                        state = Some(current.release(payment.time, freed)?);
                        -released
                    }
                }
            }
        };
        if compensate {
            outcome.required += flow.abs();
            outcome.contracted += contracted.abs();
        }
        *slot = contracted / ensemble.numeraire(path, payment.index);
    }
    Ok(outcome)
}

/// Discounted compensated requirements for every path, in payment order.
pub fn path_values(product: &Product, ensemble: &PathEnsemble, mode: &CompensationMode) -> Result<PathValues> {
    mode.validate()?;
    let payments = schedule(product, ensemble)?;
    let n = payments.len();
    let paths = ensemble.paths();
    let mut discounted = vec![0.0; paths * n];
    let outcomes: Vec<PathOutcome> = discounted
        .par_chunks_mut(n)
        .enumerate()
        .map(|(path, row)| compensate_path(&payments, ensemble, mode, path, row))
        .collect::<Result<_>>()?;
    let required: Vec<f64> = outcomes.iter().map(|o| o.required).collect();
    let contracted: Vec<f64> = outcomes.iter().map(|o| o.contracted).collect();
    Ok(PathValues {
        payments: n,
        discounted,
        exhausted: outcomes.iter().map(|o| o.exhausted).collect(),
        required: pairwise_sum(&required),
        contracted: pairwise_sum(&contracted),
    })
}

fn result(estimate: Estimate, values: &PathValues) -> ValuationResult {
    ValuationResult {
        value: estimate.mean,
        standard_error: estimate.standard_error,
        mean_compensation_factor: values.compensation_factor(),
        exhausted_fraction: values.exhausted_fraction(),
    }
}

/// Present value of all compensated requirements of `product`.
///
/// Paths on which capacity runs out are excluded from the estimate; the
/// valuation fails if their fraction exceeds `mode.exhausted_limit`.
pub fn value(product: &Product, ensemble: &PathEnsemble, mode: &CompensationMode) -> Result<ValuationResult> {
    let values = path_values(product, ensemble, mode)?;
    values.check(mode.exhausted_limit)?;
    let totals: Vec<f64> = values.live_paths().map(|p| values.path(p).iter().sum()).collect();
    Ok(result(Estimate::from_samples(&totals), &values))
}

/// Present value of each requirement of `product` separately, with the
/// consumption level threaded through the earlier requirements of the same
/// path.
pub fn maturity_profile(
    product: &Product,
    ensemble: &PathEnsemble,
    mode: &CompensationMode,
) -> Result<Vec<ValuationResult>> {
    let values = path_values(product, ensemble, mode)?;
    values.check(mode.exhausted_limit)?;
    let live: Vec<usize> = values.live_paths().collect();
    Ok((0..values.payments())
        .map(|k| {
            let column: Vec<f64> = live.iter().map(|&p| values.path(p)[k]).collect();
            result(Estimate::from_samples(&column), &values)
        })
        .collect())
}

/// Root-finding bracket and tolerance for par rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
    pub tolerance: f64,
}

impl Default for Bracket {
    fn default() -> Self {
        Self {
            lower: -0.20,
            upper: 0.40,
            tolerance: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParRate {
    pub rate: f64,
    /// Par rate of the same product without compensation, on the same paths.
    pub classical_rate: f64,
    pub spread: f64,
    /// Standard error of `rate`: the value's standard error at the root over
    /// the slope of the value in the rate.
    pub standard_error: f64,
}

fn bisect(product: &Product, ensemble: &PathEnsemble, mode: &CompensationMode, bracket: &Bracket) -> Result<f64> {
    let f = |k: f64| value(&product.with_rate(k), ensemble, mode).map(|v| v.value);
    let (mut lo, mut hi) = (bracket.lower, bracket.upper);
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::BracketFailure {
            lower: lo,
            upper: hi,
            value_lower: f_lo,
            value_upper: f_hi,
        });
    }
    let lo_sign = f_lo.signum();
    while hi - lo > bracket.tolerance {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fixed rate (or strike) at which the compensated requirements of
/// `product` are worth zero, found by bisection with the same paths for
/// every trial rate.
pub fn par_rate(
    product: &Product,
    ensemble: &PathEnsemble,
    mode: &CompensationMode,
    bracket: &Bracket,
) -> Result<ParRate> {
    if matches!(product, Product::TerminalFlow { .. }) {
        return Err(Error::invalid("a terminal flow has no rate to solve for"));
    }
    if !(bracket.lower < bracket.upper && bracket.tolerance > 0.0) {
        return Err(Error::invalid("bracket must satisfy lower < upper and tolerance > 0"));
    }
    let rate = bisect(product, ensemble, mode, bracket)?;
    let classical_rate = bisect(product, ensemble, &CompensationMode::none(), bracket)?;
    let at = |k: f64| value(&product.with_rate(k), ensemble, mode);
    let h = 1e-4;
    let slope = (at(rate + h)?.value - at(rate - h)?.value) / (2.0 * h);
    Ok(ParRate {
        rate,
        classical_rate,
        spread: rate - classical_rate,
        standard_error: at(rate)?.standard_error / slope.abs(),
    })
}

/// Simulates forward-rate paths and solves for the par rate on them.
pub fn par_rate_lmm(
    product: &Product,
    model: &LmmSpec,
    mode: &CompensationMode,
    paths: usize,
    seed: u64,
    bracket: &Bracket,
) -> Result<ParRate> {
    let ensemble = simulate_lmm(model, paths, seed)?;
    par_rate(product, &ensemble, mode, bracket)
}

/// First-order par-rate spread `E[(X°)²] / P * d log p / dx |_0`.
pub fn spread_approximation(variance: f64, bond: f64, slope: f64) -> Result<f64> {
    if !(bond > 0.0) {
        return Err(Error::invalid(format!("bond price must be positive, got {bond}")));
    }
    Ok(variance * slope / bond)
}
