//! Seeded realization of the random set `Q` on dyadic shells.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::geom::{shell_index, shell_size, Point, ShellIndex};
use crate::rng;

/// Largest supported window exponent.
pub const MAX_WINDOW_EXPONENT: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SamplerConfig {
    pub seed: u64,
    pub c: f64,
    /// `Q` is realized on shells `0..W`, i.e. inside `[1, 2^W - 1]^2`.
    pub window_exponent: u32,
}

impl SamplerConfig {
    /// Validates `c >= 0` (finite) and `1 <= W <= 20`. `c = 0` is accepted and
    /// yields the empty set.
    pub fn new(seed: u64, c: f64, window_exponent: u32) -> Result<Self> {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::InvalidConstant(c));
        }
        if !(1..=MAX_WINDOW_EXPONENT).contains(&window_exponent) {
            return Err(Error::Guard {
                what: "window exponent",
                value: window_exponent as u64,
                max: MAX_WINDOW_EXPONENT as u64,
            });
        }
        Ok(SamplerConfig {
            seed,
            c,
            window_exponent,
        })
    }

    /// Largest coordinate inside the window, `2^W - 1`.
    pub fn window_max(&self) -> i64 {
        (1i64 << self.window_exponent) - 1
    }

    /// The inclusion decision for one point, independent of any other point.
    pub fn includes(&self, p: Point) -> bool {
        if self.c == 0.0 || !p.in_square(self.window_max() as u64) {
            return false;
        }
        let t = ShellIndex(63 - p.inf_norm().leading_zeros());
        rng::uniform(self.seed, p.x, p.y) < shell_probability(t, self.c)
    }
}

/// `min(1, c / (2^T sqrt(T)))` for `T >= 1` and `min(1, c)` on `R_0`.
pub fn shell_probability(t: ShellIndex, c: f64) -> f64 {
    let p = if t.0 == 0 {
        c
    } else {
        c / ((t.side() as f64) * libm::sqrt(t.0 as f64))
    };
    p.min(1.0)
}

pub fn inclusion_probability(p: Point, c: f64) -> Result<f64> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::InvalidConstant(c));
    }
    Ok(shell_probability(shell_index(p)?, c))
}

/// `E[X_T] = |R_T| * p_T`.
pub fn expected_shell_count(t: ShellIndex, c: f64) -> Result<f64> {
    Ok(shell_size(t)? as f64 * shell_probability(t, c))
}

/// `Var(X_T) = |R_T| * p_T * (1 - p_T)`.
pub fn shell_count_variance(t: ShellIndex, c: f64) -> Result<f64> {
    let p = shell_probability(t, c);
    Ok(shell_size(t)? as f64 * p * (1.0 - p))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SetKind {
    Sampled,
    Constructed,
    Baseline,
}

impl SetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SetKind::Sampled => "sampled",
            SetKind::Constructed => "constructed",
            SetKind::Baseline => "baseline",
        }
    }
}

/// Where a point set came from. Serialized as the `#meta` line of the
/// point-set file format.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Provenance {
    pub kind: SetKind,
    pub seed: Option<u64>,
    pub c: Option<f64>,
    /// Points lie in `[1, 2^W - 1]^2`.
    pub window_exponent: u32,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub method: Option<String>,
}

impl Provenance {
    pub fn sampled(cfg: &SamplerConfig) -> Self {
        Provenance {
            kind: SetKind::Sampled,
            seed: Some(cfg.seed),
            c: Some(cfg.c),
            window_exponent: cfg.window_exponent,
            method: None,
        }
    }

    pub fn window_max(&self) -> i64 {
        if self.window_exponent >= 63 {
            i64::MAX
        } else {
            (1i64 << self.window_exponent) - 1
        }
    }
}

/// A finite point set, strictly increasing in the norm-lexicographic order.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PointSet {
    points: Vec<Point>,
    provenance: Provenance,
}

impl PointSet {
    /// Validates strict ordering and window membership.
    pub fn new(points: Vec<Point>, provenance: Provenance) -> Result<Self> {
        let max = provenance.window_max();
        for pair in points.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicatePoint(pair[0]));
            }
            if pair[0] > pair[1] {
                return Err(Error::Unsorted {
                    before: pair[0],
                    after: pair[1],
                });
            }
        }
        if let Some(&p) = points.iter().find(|p| !(p.in_square(max as u64))) {
            return Err(Error::OutsideWindow {
                point: p,
                window_exponent: provenance.window_exponent,
            });
        }
        Ok(PointSet { points, provenance })
    }

    /// Sorts `points` first; duplicates are still rejected.
    pub fn from_unsorted(mut points: Vec<Point>, provenance: Provenance) -> Result<Self> {
        points.sort_unstable();
        Self::new(points, provenance)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.points.binary_search(&p).is_ok()
    }

    /// Points in `[1, n]^2`, still in order.
    pub fn restricted_to_square(&self, n: u64) -> Vec<Point> {
        self.points
            .iter()
            .copied()
            .filter(|p| p.in_square(n))
            .collect()
    }

    pub fn with_provenance(self, provenance: Provenance) -> Result<Self> {
        Self::new(self.points, provenance)
    }
}

/// Included points with `x` in `columns`, in column-major order. Disjoint
/// column ranges can be sampled independently and concatenated.
pub fn sample_columns(cfg: &SamplerConfig, columns: Range<i64>) -> Vec<Point> {
    let mut out = Vec::new();
    if cfg.c == 0.0 {
        return out;
    }
    let max = cfg.window_max();
    let probs: Vec<f64> = (0..cfg.window_exponent)
        .map(|t| shell_probability(ShellIndex(t), cfg.c))
        .collect();
    for x in columns.start.max(1)..columns.end.min(max + 1) {
        for y in 1..=max {
            let norm = x.max(y) as u64;
            let t = 63 - norm.leading_zeros();
            if rng::uniform(cfg.seed, x, y) < probs[t as usize] {
                out.push(Point::new(x, y));
            }
        }
    }
    out
}

/// Realizes `Q` on shells `0..W`.
pub fn sample_window(cfg: &SamplerConfig) -> Result<PointSet> {
    let cfg = SamplerConfig::new(cfg.seed, cfg.c, cfg.window_exponent)?;
    let points = sample_columns(&cfg, 1..cfg.window_max() + 1);
    PointSet::from_unsorted(points, Provenance::sampled(&cfg))
}

/// Only the points of `Q` in shell `t` (requires `t < W`), sorted.
pub fn sample_shell(cfg: &SamplerConfig, t: ShellIndex) -> Vec<Point> {
    let mut out = Vec::new();
    if cfg.c == 0.0 || t.0 >= cfg.window_exponent {
        return out;
    }
    let lo = t.side() as i64;
    let hi = 2 * lo - 1;
    let prob = shell_probability(t, cfg.c);
    let mut test = |x: i64, y: i64| {
        if rng::uniform(cfg.seed, x, y) < prob {
            out.push(Point::new(x, y));
        }
    };
    for x in 1..=hi {
        let y_start = if x >= lo { 1 } else { lo };
        for y in y_start..=hi {
            test(x, y);
        }
    }
    out.sort_unstable();
    out
}

/// `X_0 .. X_{W-1}`: points of the set in each shell.
pub fn shell_counts(points: &[Point], window_exponent: u32) -> Vec<u64> {
    let mut counts = alloc::vec![0u64; window_exponent as usize];
    for p in points {
        if let Ok(t) = shell_index(*p) {
            if let Some(c) = counts.get_mut(t.0 as usize) {
                *c += 1;
            }
        }
    }
    counts
}
