//! Seeded path generation: geometric Brownian motion and a one-factor
//! lognormal forward-rate (LIBOR market) model under the spot measure.
//!
//! Every path draws from its own random stream (see [`crate::stats::path_rng`]),
//! so an ensemble is bit-identical for a given seed whatever the number of
//! worker threads.

use ndarray::{Array2, Array3};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::path_rng;

/// Simulated paths on a time grid.
///
/// `values[[path, time, factor]]` holds the model state. For the GBM there
/// is one factor, the underlying. For the forward-rate model factor `k` is
/// the forward rate for the accrual period `[times[k], times[k+1]]`, frozen
/// at its fixing once `times[k]` has passed. `numeraire[[path, time]]` is the
/// value of the numeraire asset, `1` at time zero.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    times: Vec<f64>,
    values: Array3<f64>,
    numeraire: Array2<f64>,
    seed: u64,
}

impl PathEnsemble {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn paths(&self) -> usize {
        self.values.shape()[0]
    }

    pub fn factors(&self) -> usize {
        self.values.shape()[2]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// First factor at grid index `time`.
    pub fn value(&self, path: usize, time: usize) -> f64 {
        self.values[[path, time, 0]]
    }

    pub fn factor(&self, path: usize, time: usize, factor: usize) -> f64 {
        self.values[[path, time, factor]]
    }

    pub fn numeraire(&self, path: usize, time: usize) -> f64 {
        self.numeraire[[path, time]]
    }

    /// Grid index of `t`, if `t` is on the grid (to 1e-10).
    pub fn time_index(&self, t: f64) -> Option<usize> {
        let i = self.times.partition_point(|&s| s < t - 1e-10);
        (i < self.times.len() && (self.times[i] - t).abs() <= 1e-10).then_some(i)
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.values
    }

    pub fn numeraires(&self) -> &Array2<f64> {
        &self.numeraire
    }
}

/// Lognormal underlying `dX = r X dt + sigma X dW`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbmSpec {
    pub x0: f64,
    pub r: f64,
    pub sigma: f64,
}

impl GbmSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.x0 > 0.0 && self.x0.is_finite()) {
            return Err(Error::invalid(format!("x0 must be positive, got {}", self.x0)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be non-negative, got {}", self.sigma)));
        }
        if !self.r.is_finite() {
            return Err(Error::invalid("r must be finite"));
        }
        Ok(())
    }
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return Err(Error::invalid("time grid must start at 0"));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("time grid must be finite and strictly increasing"));
    }
    Ok(())
}

/// Exact lognormal stepping on `times`, numeraire `exp(r t)`.
pub fn simulate_gbm(spec: &GbmSpec, times: &[f64], paths: usize, seed: u64) -> Result<PathEnsemble> {
    spec.validate()?;
    check_grid(times)?;
    if paths < 1 {
        return Err(Error::invalid("at least one path is required"));
    }
    let n_times = times.len();
    let steps: Vec<(f64, f64)> = times
        .windows(2)
        .map(|w| {
            let dt = w[1] - w[0];
            ((spec.r - 0.5 * spec.sigma * spec.sigma) * dt, spec.sigma * dt.sqrt())
        })
        .collect();

    let mut values = vec![0.0; paths * n_times];
    values.par_chunks_mut(n_times).enumerate().for_each(|(path, row)| {
        let mut rng = path_rng(seed, path as u64);
        let mut x = spec.x0;
        row[0] = x;
        for (k, &(drift, diffusion)) in steps.iter().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            x *= (drift + diffusion * z).exp();
            row[k + 1] = x;
        }
    });

    let bank: Vec<f64> = times.iter().map(|t| (spec.r * t).exp()).collect();
    let numeraire = Array2::from_shape_fn((paths, n_times), |(_, t)| bank[t]);
    Ok(PathEnsemble {
        times: times.to_vec(),
        values: Array3::from_shape_vec((paths, n_times, 1), values).expect("shape matches buffer"),
        numeraire,
        seed,
    })
}

/// One-factor lognormal forward-rate model with instantaneous volatility
/// `vol_scale * exp(-vol_decay * (T_k - t))` for the forward fixing at `T_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmmSpec {
    /// Accrual period length in years.
    pub tenor: f64,
    /// Last payment date; a multiple of the tenor.
    pub horizon: f64,
    /// Flat initial forward rate.
    pub initial_rate: f64,
    pub vol_scale: f64,
    pub vol_decay: f64,
}

impl LmmSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tenor > 0.0 && self.tenor.is_finite()) {
            return Err(Error::invalid(format!("tenor must be positive, got {}", self.tenor)));
        }
        let periods = self.horizon / self.tenor;
        if !(periods >= 1.0) || (periods - periods.round()).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "horizon {} must be a positive multiple of the tenor {}",
                self.horizon, self.tenor
            )));
        }
        if !(self.initial_rate > -1.0 / self.tenor && self.initial_rate.is_finite()) {
            return Err(Error::invalid(format!("initial rate must exceed -1/tenor, got {}", self.initial_rate)));
        }
        if !(self.vol_scale >= 0.0 && self.vol_scale.is_finite()) {
            return Err(Error::invalid("volatility scale must be non-negative"));
        }
        if !(self.vol_decay >= 0.0 && self.vol_decay.is_finite()) {
            return Err(Error::invalid("volatility decay must be non-negative"));
        }
        Ok(())
    }

    pub fn periods(&self) -> usize {
        (self.horizon / self.tenor).round() as usize
    }

    /// Tenor dates `0, tenor, ..., horizon`.
    pub fn dates(&self) -> Vec<f64> {
        (0..=self.periods()).map(|k| k as f64 * self.tenor).collect()
    }

    /// Integrated variance `∫_0^{fixing} σ(s)² ds` of a forward fixing at
    /// `fixing`.
    pub fn integrated_variance(&self, fixing: f64) -> f64 {
        let s2 = self.vol_scale * self.vol_scale;
        if self.vol_decay == 0.0 {
            s2 * fixing
        } else {
            s2 * -(-2.0 * self.vol_decay * fixing).exp_m1() / (2.0 * self.vol_decay)
        }
    }

    /// Time-zero zero-coupon bond for the flat initial curve.
    pub fn initial_bond(&self, period_end: usize) -> f64 {
        (1.0 + self.tenor * self.initial_rate).powi(-(period_end as i32))
    }
}

/// Log-Euler simulation of all forwards on the tenor grid under the spot
/// (rolling bank account) measure.
///
/// On `[T_j, T_{j+1})` each live forward `L_k` (k > j) moves by
///
/// ```text
/// d ln L_k = σ_k Σ_{i=j+1..k} δ σ_i L_i / (1 + δ L_i) dt - σ_k²/2 dt + σ_k dW
/// ```
///
/// with the covariances integrated exactly over the step and the drift
/// frozen at the start of the step. The numeraire rolls over the fixings:
/// `N(T_{j+1}) = N(T_j) (1 + δ L_j(T_j))`.
pub fn simulate_lmm(spec: &LmmSpec, paths: usize, seed: u64) -> Result<PathEnsemble> {
    spec.validate()?;
    if paths < 1 {
        return Err(Error::invalid("at least one path is required"));
    }
    let n = spec.periods();
    let dates = spec.dates();
    let delta = spec.tenor;
    let n_times = n + 1;

    // Single factor: the covariance of forwards i and k over a step is the
    // product of their integrated volatilities.
    let step_factor = if spec.vol_decay == 0.0 {
        delta.sqrt()
    } else {
        (-(-2.0 * spec.vol_decay * delta).exp_m1() / (2.0 * spec.vol_decay)).sqrt()
    };
    // vol[j][k]: integrated volatility of forward k over step j
    let vol: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    if k > j {
                        spec.vol_scale * (-spec.vol_decay * (dates[k] - dates[j + 1])).exp() * step_factor
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();

    let mut values = vec![0.0; paths * n_times * n];
    let mut numeraire = vec![0.0; paths * n_times];
    values
        .par_chunks_mut(n_times * n)
        .zip(numeraire.par_chunks_mut(n_times))
        .enumerate()
        .for_each(|(path, (curve, bank))| {
            let mut rng = path_rng(seed, path as u64);
            let mut forwards = vec![spec.initial_rate; n];
            curve[..n].copy_from_slice(&forwards);
            bank[0] = 1.0;
            for j in 0..n {
                bank[j + 1] = bank[j] * (1.0 + delta * forwards[j]);
                let z: f64 = StandardNormal.sample(&mut rng);
                let v = &vol[j];
                let mut drift_sum = 0.0;
                for k in j + 1..n {
                    let l = forwards[k];
                    drift_sum += v[k] * delta * l / (1.0 + delta * l);
                    forwards[k] = l * (v[k] * drift_sum - 0.5 * v[k] * v[k] + v[k] * z).exp();
                }
                curve[(j + 1) * n..(j + 2) * n].copy_from_slice(&forwards);
            }
        });

    Ok(PathEnsemble {
        times: dates,
        values: Array3::from_shape_vec((paths, n_times, n), values).expect("shape matches buffer"),
        numeraire: Array2::from_shape_vec((paths, n_times), numeraire).expect("shape matches buffer"),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Estimate;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn gbm(sigma: f64) -> GbmSpec {
        GbmSpec { x0: 1.0, r: 0.05, sigma }
    }

    fn lmm(vol: f64) -> LmmSpec {
        LmmSpec {
            tenor: 0.5,
            horizon: 5.0,
            initial_rate: 0.05,
            vol_scale: vol,
            vol_decay: 0.25,
        }
    }

    #[test]
    fn deterministic_gbm() {
        let e = simulate_gbm(&gbm(0.0), &[0.0, 1.0, 2.0], 50, 1).unwrap();
        for p in 0..50 {
            assert!((e.value(p, 2) - 0.1f64.exp()).abs() < 1e-15);
        }
        assert_eq!(e.numeraire(3, 0), 1.0);
        assert_eq!(e.time_index(2.0), Some(2));
        assert_eq!(e.time_index(1.5), None);
    }

    #[test]
    fn gbm_moments() {
        let t = 5.0;
        let e = simulate_gbm(&gbm(0.3), &[0.0, t], 100_000, 17).unwrap();
        let discounted: Vec<f64> = (0..e.paths()).map(|p| e.value(p, 1) / e.numeraire(p, 1)).collect();
        let est = Estimate::from_samples(&discounted);
        assert!(est.z_score(1.0).abs() < 3.0, "{est:?}");

        let squares: Vec<f64> = (0..e.paths()).map(|p| e.value(p, 1).powi(2)).collect();
        let est = Estimate::from_samples(&squares);
        let exact = (2.0 * 0.05 * t + 0.09 * t).exp();
        assert!(est.z_score(exact).abs() < 3.0, "{est:?} vs {exact}");
    }

    #[test]
    fn gbm_rejects_bad_inputs() {
        assert!(simulate_gbm(&GbmSpec { x0: 0.0, r: 0.0, sigma: 0.1 }, &[0.0, 1.0], 1, 0).is_err());
        assert!(simulate_gbm(&gbm(-0.1), &[0.0, 1.0], 1, 0).is_err());
        assert!(simulate_gbm(&gbm(0.1), &[0.5, 1.0], 1, 0).is_err());
        assert!(simulate_gbm(&gbm(0.1), &[0.0, 1.0], 0, 0).is_err());
    }

    #[test]
    fn increments_are_uncorrelated() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.25).collect();
        let e = simulate_gbm(&gbm(0.2), &times, 50_000, 3).unwrap();
        let first: Vec<f64> = (0..e.paths()).map(|p| (e.value(p, 1) / e.value(p, 0)).ln()).collect();
        let second: Vec<f64> = (0..e.paths()).map(|p| (e.value(p, 2) / e.value(p, 1)).ln()).collect();
        let m1 = first.iter().sum::<f64>() / first.len() as f64;
        let m2 = second.iter().sum::<f64>() / second.len() as f64;
        let products: Vec<f64> = first.iter().zip(&second).map(|(a, b)| (a - m1) * (b - m2)).collect();
        let var = 0.04 * 0.25;
        let corr = Estimate::from_samples(&products.iter().map(|c| c / var).collect::<Vec<_>>());
        assert!(corr.z_score(0.0).abs() < 3.0, "{corr:?}");
    }

    #[test]
    fn seed_determinism_across_thread_counts() {
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_lmm(&lmm(0.5), 2_000, 9).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.values(), b.values());
        assert_eq!(a.numeraires(), b.numeraires());
        let g1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate_gbm(&gbm(0.3), &[0.0, 1.0, 3.0], 3_000, 4).unwrap());
        let g4 = simulate_gbm(&gbm(0.3), &[0.0, 1.0, 3.0], 3_000, 4).unwrap();
        assert_eq!(g1.values(), g4.values());
    }

    #[test]
    fn lmm_initial_curve_is_flat() {
        let e = simulate_lmm(&lmm(0.5), 100, 1).unwrap();
        assert_eq!(e.factors(), 10);
        assert_eq!(e.times().len(), 11);
        for p in 0..100 {
            for k in 0..10 {
                assert_eq!(e.factor(p, 0, k), 0.05);
            }
        }
    }

    #[test]
    fn lmm_zero_vol_is_deterministic() {
        let spec = lmm(0.0);
        let e = simulate_lmm(&spec, 20, 1).unwrap();
        for p in 0..20 {
            for t in 0..11 {
                for k in 0..10 {
                    assert!((e.factor(p, t, k) - 0.05).abs() < 1e-15);
                }
                let bond = spec.initial_bond(t);
                assert!((1.0 / e.numeraire(p, t) - bond).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lmm_validation() {
        let mut s = lmm(0.5);
        s.horizon = 5.25;
        assert!(s.validate().is_err());
        let mut s = lmm(0.5);
        s.initial_rate = -2.5;
        assert!(s.validate().is_err());
        let mut s = lmm(0.5);
        s.tenor = 0.0;
        assert!(s.validate().is_err());
        assert!(simulate_lmm(&lmm(0.5), 0, 1).is_err());
    }

    #[test]
    fn discounted_bonds_are_martingales() {
        let spec = lmm(0.5);
        let e = simulate_lmm(&spec, 50_000, 21).unwrap();
        let n = spec.periods();
        // bond maturing at T_m observed at T_j, discounted to zero
        for (j, m) in [(2usize, 6usize), (4, 10), (0, 10)] {
            let samples: Vec<f64> = (0..e.paths())
                .map(|p| {
                    let bond: f64 = (j..m).map(|i| 1.0 / (1.0 + spec.tenor * e.factor(p, j, i))).product();
                    bond / e.numeraire(p, j)
                })
                .collect();
            let est = Estimate::from_samples(&samples);
            let exact = spec.initial_bond(m);
            assert!(est.z_score(exact).abs() < 3.0 || (est.mean - exact).abs() < 1e-12, "{j}->{m}: {est:?} vs {exact}");
        }
        assert_eq!(n, 10);
    }

    #[test]
    fn caplet_matches_black() {
        let spec = lmm(0.5);
        let e = simulate_lmm(&spec, 100_000, 5).unwrap();
        let normal = Normal::standard();
        for fixing_index in [2usize, 5, 8] {
            let fixing = spec.dates()[fixing_index];
            let strike = 0.05;
            let samples: Vec<f64> = (0..e.paths())
                .map(|p| {
                    let l = e.factor(p, fixing_index, fixing_index);
                    spec.tenor * (l - strike).max(0.0) / e.numeraire(p, fixing_index + 1)
                })
                .collect();
            let est = Estimate::from_samples(&samples);
            let v = spec.integrated_variance(fixing);
            let sd = v.sqrt();
            let d1 = ((0.05f64 / strike).ln() + 0.5 * v) / sd;
            let black = 0.05 * normal.cdf(d1) - strike * normal.cdf(d1 - sd);
            let price = spec.tenor * spec.initial_bond(fixing_index + 1) * black;
            assert!(est.z_score(price).abs() < 3.0, "T={fixing}: {est:?} vs {price}");
        }
    }
}
