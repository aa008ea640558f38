use crate::analytic::compensated_forward_value;
use crate::capacity::intensity_limit_survival;
use crate::curves::FlatRateSet;
use crate::diversify::{adjusted_discount_rate, adjusted_rate_first_order, quantile_multiplier};
use crate::error::Result;
use crate::stochastic::{simulate_gbm, simulate_lmm};
use crate::valuation::{maturity_profile, par_rate, value, CompensationMode, Kernel, Product};

use super::config::*;
use super::report::ExperimentReport;

pub fn intensity_analogy(c: &IntensityAnalogyConfig) -> Result<ExperimentReport> {
    let grid = c.grid();
    let estimates = intensity_limit_survival(c.mu, c.beta, &grid, c.paths, c.seed)?;
    let lambda = c.mu - 0.5 * c.beta * c.beta;
    let mut report = ExperimentReport::new(["t", "mc_survival", "mc_stderr", "analytic"]);
    for (t, e) in grid.iter().zip(estimates) {
        report.push(vec![*t, e.mean, e.standard_error, (-lambda * t).exp()])?;
    }
    Ok(report)
}

fn constant_intensity(lambda: f64) -> CompensationMode {
    CompensationMode::new(Kernel::ConstantIntensity { lambda }, false)
}

pub fn forward_compensation(c: &ForwardCompensationConfig) -> Result<ExperimentReport> {
    let kernel = c.kernel.build()?;
    let product = Product::TerminalFlow {
        maturity: c.maturity,
        notional: 1.0,
    };
    let state = CompensationMode::state_dependent(kernel.clone(), 0.0, false);
    let constant = constant_intensity(c.lambda_objective);
    // a zero step bounds capacity and has no closed form
    let with_analytic = kernel.values().iter().all(|&q| q > 0.0);
    let mut columns = vec![
        "sigma",
        "uncompensated",
        "uncompensated_stderr",
        "state_dependent",
        "state_dependent_stderr",
        "constant_intensity",
        "constant_intensity_stderr",
    ];
    if with_analytic {
        columns.push("analytic_state_dependent");
    }
    let mut report = ExperimentReport::new(columns);
    for &sigma in &c.sigmas {
        let point = |e: crate::Error| e.at(format!("sigma={sigma}"));
        let ensemble = simulate_gbm(&c.gbm(sigma), &[0.0, c.maturity], c.paths, c.seed).map_err(point)?;
        let none = value(&product, &ensemble, &CompensationMode::none()).map_err(point)?;
        let comp = value(&product, &ensemble, &state).map_err(point)?;
        let flat = value(&product, &ensemble, &constant).map_err(point)?;
        let mut row = vec![
            sigma,
            none.value,
            none.standard_error,
            comp.value,
            comp.standard_error,
            flat.value,
            flat.standard_error,
        ];
        if with_analytic {
            row.push(compensated_forward_value(&kernel, c.x0, 0.0, c.r, sigma, c.maturity).map_err(point)?);
        }
        report.push(row)?;
    }
    Ok(report)
}

pub fn forward_asymmetry(c: &ForwardAsymmetryConfig) -> Result<ExperimentReport> {
    let kernel = c.kernel.build()?;
    let product = Product::ForwardMinusStrike {
        maturity: c.maturity,
        strike: c.strike,
    };
    let state = CompensationMode::state_dependent(kernel.clone(), 0.0, c.asymmetric);
    let constant = constant_intensity(c.lambda_objective);
    // the closed form compensates positive requirements only; from an empty
    // level that is also the symmetric value when q(0) = 1
    let with_analytic =
        kernel.values().iter().all(|&q| q > 0.0) && (c.asymmetric || kernel.values()[0] == 1.0);
    let mut columns = vec![
        "sigma",
        "uncompensated",
        "uncompensated_stderr",
        "state_dependent",
        "state_dependent_stderr",
        "constant_intensity",
        "constant_intensity_stderr",
    ];
    if with_analytic {
        columns.push("analytic_state_dependent");
    }
    let mut report = ExperimentReport::new(columns);
    for &sigma in &c.sigmas {
        let point = |e: crate::Error| e.at(format!("sigma={sigma}"));
        let ensemble = simulate_gbm(&c.gbm(sigma), &[0.0, c.maturity], c.paths, c.seed).map_err(point)?;
        let none = value(&product, &ensemble, &CompensationMode::none()).map_err(point)?;
        let comp = value(&product, &ensemble, &state).map_err(point)?;
        let flat = value(&product, &ensemble, &constant).map_err(point)?;
        let mut row = vec![
            sigma,
            none.value,
            none.standard_error,
            comp.value,
            comp.standard_error,
            flat.value,
            flat.standard_error,
        ];
        if with_analytic {
            row.push(compensated_forward_value(&kernel, c.x0, c.strike, c.r, sigma, c.maturity).map_err(point)?);
        }
        report.push(row)?;
    }
    Ok(report)
}

pub fn stream_temporal(c: &StreamTemporalConfig) -> Result<ExperimentReport> {
    let mut grid = vec![0.0];
    grid.extend_from_slice(&c.maturities);
    let ensemble = simulate_gbm(&c.gbm, &grid, c.paths, c.seed)?;
    let state = c.mode()?;
    let constant = constant_intensity(c.lambda_objective);
    let mut report = ExperimentReport::new([
        "strike",
        "maturity",
        "uncompensated",
        "uncompensated_stderr",
        "state_dependent",
        "state_dependent_stderr",
        "constant_intensity",
        "constant_intensity_stderr",
    ]);
    for &strike in &c.strikes {
        let point = |e: crate::Error| e.at(format!("strike={strike}"));
        let stream = Product::Stream {
            times: c.maturities.clone(),
            strike,
        };
        let none = maturity_profile(&stream, &ensemble, &CompensationMode::none()).map_err(point)?;
        let comp = maturity_profile(&stream, &ensemble, &state).map_err(point)?;
        let flat = maturity_profile(&stream, &ensemble, &constant).map_err(point)?;
        for (i, &t) in c.maturities.iter().enumerate() {
            report.push(vec![
                strike,
                t,
                none[i].value,
                none[i].standard_error,
                comp[i].value,
                comp[i].standard_error,
                flat[i].value,
                flat[i].standard_error,
            ])?;
        }
    }
    Ok(report)
}

pub fn par_swap_notional(c: &ParRateConfig) -> Result<ExperimentReport> {
    let ensemble = simulate_lmm(&c.lmm, c.paths, c.seed)?;
    let mode = c.mode()?;
    let mut report = ExperimentReport::new(["notional", "par_rate", "par_rate_stderr", "classical_par_rate", "spread"]);
    for &notional in &c.notionals {
        let swap = Product::Swap {
            dates: c.lmm.dates(),
            fixed_rate: 0.0,
            notional,
        };
        let rate = par_rate(&swap, &ensemble, &mode, &c.bracket).map_err(|e| e.at(format!("notional={notional}")))?;
        report.push(vec![notional, rate.rate, rate.standard_error, rate.classical_rate, rate.spread])?;
    }
    Ok(report)
}

/// Forward-rate agreements on every simulated period whose fixing lies in
/// the future.
pub fn forward_curve_notional(c: &ParRateConfig) -> Result<ExperimentReport> {
    let ensemble = simulate_lmm(&c.lmm, c.paths, c.seed)?;
    let mode = c.mode()?;
    let dates = c.lmm.dates();
    let mut report = ExperimentReport::new([
        "notional",
        "fixing",
        "par_rate",
        "par_rate_stderr",
        "classical_par_rate",
        "spread",
    ]);
    for &notional in &c.notionals {
        for period in dates.windows(2).skip(1) {
            let fra = Product::Swap {
                dates: period.to_vec(),
                fixed_rate: 0.0,
                notional,
            };
            let rate = par_rate(&fra, &ensemble, &mode, &c.bracket)
                .map_err(|e| e.at(format!("notional={notional}, fixing={}", period[0])))?;
            report.push(vec![
                notional,
                period[0],
                rate.rate,
                rate.standard_error,
                rate.classical_rate,
                rate.spread,
            ])?;
        }
    }
    Ok(report)
}

pub fn iam_rate(c: &IamRateConfig) -> Result<ExperimentReport> {
    let spec = &c.diversification;
    let rates = FlatRateSet::new(c.r, c.lambda, c.lambda_objective)?;
    let mut report = ExperimentReport::new([
        "r",
        "lambda",
        "lambda_objective",
        "maturity",
        "n",
        "epsilon",
        "quantile_multiplier",
        "first_order_rate",
        "exact_rate",
    ]);
    report.push(vec![
        c.r,
        c.lambda,
        c.lambda_objective,
        c.maturity,
        f64::from(spec.n),
        spec.epsilon,
        quantile_multiplier(spec)?,
        adjusted_rate_first_order(c.r, c.lambda, spec, c.maturity)?,
        adjusted_discount_rate(&rates, spec, c.maturity)?,
    ])?;
    Ok(report)
}
