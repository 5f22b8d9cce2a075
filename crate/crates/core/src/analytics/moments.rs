//! Monte Carlo moments of the shell counts `X_T` and box triple counts `Y_T`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::ShellIndex;
use crate::sampling::{expected_shell_count, sample_window, shell_counts, SamplerConfig};
use crate::triples::triples_within_box;

/// `X_T` and `Y_T` of one seeded realization, for each `T` of a range.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeedSample {
    pub seed: u64,
    pub x: Vec<u64>,
    pub y: Vec<u64>,
}

/// Samples `Q` on a window just large enough for `t_values` and measures
/// `X_T` and `Y_T`.
pub fn sample_seed(t_values: &[u32], c: f64, seed: u64) -> Result<SeedSample> {
    let t_max = t_values.iter().copied().max().unwrap_or(0);
    let cfg = SamplerConfig::new(seed, c, t_max + 1)?;
    let q = sample_window(&cfg)?;
    let counts = shell_counts(q.points(), cfg.window_exponent);
    let x = t_values.iter().map(|&t| counts[t as usize]).collect();
    let y = t_values
        .iter()
        .map(|&t| triples_within_box(q.points(), ShellIndex(t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeedSample { seed, x, y })
}

/// Mean, unbiased variance and their standard errors.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    /// `sqrt(variance / N)`.
    pub se_mean: f64,
    /// Delta-method standard error of the sample variance,
    /// `sqrt((m4 - s^4 (N - 3) / (N - 1)) / N)`.
    pub se_variance: f64,
}

impl Moments {
    pub fn of(values: &[u64]) -> Moments {
        let n = values.len() as f64;
        if values.is_empty() {
            return Moments::default();
        }
        let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
        let (mut m2, mut m4) = (0.0, 0.0);
        for &v in values {
            let d = v as f64 - mean;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        let variance = if values.len() > 1 {
            m2 / (n - 1.0)
        } else {
            0.0
        };
        let m4 = m4 / n;
        let var_of_var = if values.len() > 1 {
            ((m4 - variance * variance * (n - 3.0) / (n - 1.0)) / n).max(0.0)
        } else {
            0.0
        };
        Moments {
            mean,
            variance,
            se_mean: libm::sqrt(variance / n),
            se_variance: libm::sqrt(var_of_var),
        }
    }
}

/// Aggregates for one `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShellStatistics {
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub t: u32,
    pub x: Moments,
    pub y: Moments,
    /// `|R_T| p_T`.
    pub expected_x: f64,
    /// `c 2^(T-1) / sqrt(T)`.
    pub x_threshold: f64,
    /// Frequency of `X_T <= x_threshold`.
    pub x_tail_freq: f64,
    /// Chebyshev bound `4 sqrt(T) / (c 2^T)`.
    pub x_tail_bound: f64,
    /// `2 K1_hat c^3 2^T / sqrt(T)`.
    pub y_threshold: f64,
    /// Frequency of `Y_T >= y_threshold`.
    pub y_tail_freq: f64,
    /// `K2_hat / (K1_hat^2 c^6) * T^(9/2) / 2^T` with the fitted constants.
    pub y_tail_bound: f64,
    /// `mean(Y_T) sqrt(T) / (c^3 2^T)`.
    pub k1_ratio: f64,
    /// `var(Y_T) / (2^T T^(7/2))`.
    pub k2_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialStatistics {
    pub c: f64,
    pub t_values: Vec<u32>,
    pub sample_size: usize,
    pub samples: Vec<SeedSample>,
    pub shells: Vec<ShellStatistics>,
    /// Largest `k1_ratio` over the range.
    pub k1_hat: f64,
    /// Largest `k2_ratio` over the range.
    pub k2_hat: f64,
}

/// Threshold of the shell-count event, `c 2^(T-1) / sqrt(T)`.
pub fn x_event_threshold(t: u32, c: f64) -> f64 {
    c * libm::ldexp(1.0, t as i32 - 1) / libm::sqrt(t as f64)
}

/// Threshold of the triple-count event, `2 K1 c^3 2^T / sqrt(T)`.
pub fn y_event_threshold(t: u32, c: f64, k1: f64) -> f64 {
    2.0 * k1 * c * c * c * libm::ldexp(1.0, t as i32) / libm::sqrt(t as f64)
}

fn frequency(values: &[u64], pred: impl Fn(f64) -> bool) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| pred(v as f64)).count() as f64 / values.len() as f64
}

impl TrialStatistics {
    /// Aggregates per-seed samples (in the given order). Every `T` must be
    /// at least 1, where the normalizations are defined.
    pub fn from_samples(t_values: &[u32], c: f64, samples: Vec<SeedSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySeeds);
        }
        if t_values.contains(&0) {
            return Err(Error::Guard {
                what: "Monte Carlo shell exponent (minimum 1)",
                value: 0,
                max: 0,
            });
        }
        let column = |i: usize, pick: fn(&SeedSample) -> &Vec<u64>| -> Vec<u64> {
            samples.iter().map(|s| pick(s)[i]).collect()
        };
        let mut shells = Vec::with_capacity(t_values.len());
        for (i, &t) in t_values.iter().enumerate() {
            let xs = column(i, |s| &s.x);
            let ys = column(i, |s| &s.y);
            let x = Moments::of(&xs);
            let y = Moments::of(&ys);
            let pow = libm::ldexp(1.0, t as i32);
            let root = libm::sqrt(t as f64);
            let c3 = c * c * c;
            let x_threshold = x_event_threshold(t, c);
            shells.push(ShellStatistics {
                t,
                x,
                y,
                expected_x: expected_shell_count(ShellIndex(t), c)?,
                x_threshold,
                x_tail_freq: frequency(&xs, |v| v <= x_threshold),
                x_tail_bound: if c > 0.0 {
                    4.0 * root / (c * pow)
                } else {
                    f64::INFINITY
                },
                y_threshold: 0.0,
                y_tail_freq: 0.0,
                y_tail_bound: 0.0,
                k1_ratio: if c > 0.0 {
                    y.mean * root / (c3 * pow)
                } else {
                    0.0
                },
                k2_ratio: y.variance / (pow * libm::pow(t as f64, 3.5)),
            });
        }
        let k1_hat = shells.iter().map(|s| s.k1_ratio).fold(0.0, f64::max);
        let k2_hat = shells.iter().map(|s| s.k2_ratio).fold(0.0, f64::max);
        for (i, s) in shells.iter_mut().enumerate() {
            let ys = column(i, |s| &s.y);
            s.y_threshold = y_event_threshold(s.t, c, k1_hat);
            let thr = s.y_threshold;
            s.y_tail_freq = frequency(&ys, |v| v >= thr);
            let c6 = libm::pow(c, 6.0);
            s.y_tail_bound = if k1_hat > 0.0 && c > 0.0 {
                k2_hat / (k1_hat * k1_hat * c6) * libm::pow(s.t as f64, 4.5)
                    / libm::ldexp(1.0, s.t as i32)
            } else {
                f64::INFINITY
            };
        }
        Ok(TrialStatistics {
            c,
            t_values: t_values.to_vec(),
            sample_size: samples.len(),
            samples,
            shells,
            k1_hat,
            k2_hat,
        })
    }

    pub fn shell(&self, t: u32) -> Option<&ShellStatistics> {
        self.shells.iter().find(|s| s.t == t)
    }
}

/// Sequential Monte Carlo over `seeds`.
pub fn monte_carlo_moments(t_values: &[u32], c: f64, seeds: &[u64]) -> Result<TrialStatistics> {
    if seeds.is_empty() {
        return Err(Error::EmptySeeds);
    }
    let samples = seeds
        .iter()
        .map(|&s| sample_seed(t_values, c, s))
        .collect::<Result<Vec<_>>>()?;
    TrialStatistics::from_samples(t_values, c, samples)
}
