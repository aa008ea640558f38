//! Reproducible random streams and reductions shared by the Monte-Carlo
//! routines.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Independent generator for one path (or trial) of a simulation.
///
/// Every path owns stream `index` of the master seed, so the samples of a
/// path never depend on how paths are scheduled across threads.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Pairwise summation with a fixed split, so the result depends only on the
/// order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub standard_error: f64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                standard_error: f64::NAN,
            };
        }
        // shifted by the first sample so that constant samples are exact
        let shift = samples[0];
        let shifted: Vec<f64> = samples.iter().map(|x| x - shift).collect();
        let mean_shifted = pairwise_sum(&shifted) / n as f64;
        let mean = shift + mean_shifted;
        if n == 1 {
            return Self {
                mean,
                standard_error: 0.0,
            };
        }
        let deviations: Vec<f64> = shifted
            .iter()
            .map(|d| (d - mean_shifted) * (d - mean_shifted))
            .collect();
        let variance = pairwise_sum(&deviations) / (n - 1) as f64;
        Self {
            mean,
            standard_error: (variance / n as f64).sqrt(),
        }
    }

    /// Number of standard errors separating the estimate from `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.standard_error == 0.0 {
            return if self.mean == target { 0.0 } else { f64::INFINITY };
        }
        (self.mean - target) / self.standard_error
    }
}

/// Per-column mean and standard error over `paths` rows produced by
/// `row(path, out)`, without materialising the whole matrix.
///
/// Rows are generated in parallel in fixed-size blocks; block partial sums
/// are combined in block order, so results are identical for any thread
/// count. Sums are taken relative to the first row, which keeps constant
/// columns exact.
pub fn column_estimates<F>(paths: usize, columns: usize, row: F) -> Vec<Estimate>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    const BLOCK: usize = 512;
    if paths == 0 {
        return vec![Estimate::from_samples(&[]); columns];
    }
    let mut shift = vec![0.0; columns];
    row(0, &mut shift);

    let blocks = paths.div_ceil(BLOCK);
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut sum = vec![0.0; columns];
            let mut sum_sq = vec![0.0; columns];
            let mut buffer = vec![0.0; columns];
            let end = ((block + 1) * BLOCK).min(paths);
            for path in block * BLOCK..end {
                row(path, &mut buffer);
                for (c, x) in buffer.iter().enumerate() {
                    let d = x - shift[c];
                    sum[c] += d;
                    sum_sq[c] += d * d;
                }
            }
            (sum, sum_sq)
        })
        .collect();

    let n = paths as f64;
    (0..columns)
        .map(|c| {
            let sums: Vec<f64> = partials.iter().map(|p| p.0[c]).collect();
            let squares: Vec<f64> = partials.iter().map(|p| p.1[c]).collect();
            let mean_shifted = pairwise_sum(&sums) / n;
            let variance = if paths > 1 {
                ((pairwise_sum(&squares) - n * mean_shifted * mean_shifted) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            Estimate {
                mean: shift[c] + mean_shifted,
                standard_error: (variance / n).sqrt(),
            }
        })
        .collect()
}
