//! Multi-threaded drivers for the core computations.
//!
//! Each function returns exactly what its sequential counterpart in
//! `no3l_core` returns: work is split into independent pieces and partial
//! results are merged in a fixed order.

use rayon::prelude::*;

use no3l_core::analytics::{
    self, beta_moments, box_directions, line_sums_for_directions, variance_report, LineSums,
    LineWeightReport, SeedSample, TrialStatistics, VarianceBoundReport,
};
use no3l_core::construct::{assemble_survivors, is_deleted};
use no3l_core::sampling::{sample_columns, Provenance, SamplerConfig};
use no3l_core::sum::CompensatedSum;
use no3l_core::triples::{anchor_pair_count, triples_from_anchor_sum};
use no3l_core::{Error as CoreError, Point, PointSet, ShellIndex};

use crate::error::Result;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "NO3L_THREADS";

/// Configures the global pool from `NO3L_THREADS` (ignored when unset,
/// empty or zero). Later calls have no effect.
pub fn init_thread_pool() {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

const COLUMN_CHUNK: i64 = 64;

pub fn sample_window(cfg: &SamplerConfig) -> Result<PointSet> {
    let cfg = SamplerConfig::new(cfg.seed, cfg.c, cfg.window_exponent)?;
    let max = cfg.window_max();
    let starts: Vec<i64> = (1..=max).step_by(COLUMN_CHUNK as usize).collect();
    let chunks: Vec<Vec<Point>> = starts
        .par_iter()
        .map(|&x| sample_columns(&cfg, x..(x + COLUMN_CHUNK).min(max + 1)))
        .collect();
    let points = chunks.concat();
    Ok(PointSet::from_unsorted(points, Provenance::sampled(&cfg))?)
}

pub fn count_collinear_triples(points: &[Point]) -> Result<u64> {
    let sum = (0..points.len())
        .into_par_iter()
        .map(|i| anchor_pair_count(points, i))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(triples_from_anchor_sum(sum)?)
}

pub fn triples_within_box(points: &[Point], t: ShellIndex) -> Result<u64> {
    let inside: Vec<Point> = points.iter().copied().filter(|p| p.in_box(t)).collect();
    count_collinear_triples(&inside)
}

pub fn delete_max_of_triples(q: &PointSet) -> Result<PointSet> {
    let points = q.points();
    let deleted: Vec<bool> = (0..points.len())
        .into_par_iter()
        .map(|i| is_deleted(points, i))
        .collect();
    Ok(assemble_survivors(q, &deleted)?)
}

fn check_cap(t: ShellIndex, cap: u32, what: &'static str) -> Result<()> {
    if t.0 > cap {
        return Err(CoreError::Guard {
            what,
            value: t.0 as u64,
            max: cap as u64,
        }
        .into());
    }
    Ok(())
}

pub fn weight_sums(t: ShellIndex, c: f64) -> Result<LineWeightReport> {
    check_cap(
        t,
        analytics::LINE_ENUMERATION_CAP,
        "line enumeration exponent",
    )?;
    let dirs = box_directions(t);
    let chunk = (dirs.len() / 256).max(1);
    let partials: Vec<LineSums> = dirs
        .par_chunks(chunk)
        .map(|d| line_sums_for_directions(t, c, d))
        .collect();
    let mut total = LineSums::default();
    for p in &partials {
        total.merge(p);
    }
    Ok(total.into_report(t, c))
}

/// `(sum_x p(x) beta(x), sum_x p(x) beta(x)^2)` over `B_T`.
fn beta_sums(t: ShellIndex, c: f64) -> (f64, f64) {
    let side = t.side() as i64;
    let partials: Vec<(CompensatedSum, CompensatedSum)> = (1..=side)
        .into_par_iter()
        .map(|x| beta_moments(t, c, x..=x))
        .collect();
    let (mut first, mut second) = (CompensatedSum::new(), CompensatedSum::new());
    for (a, b) in partials {
        first.merge(a);
        second.merge(b);
    }
    (first.value(), second.value())
}

pub fn beta_first_moment(t: ShellIndex, c: f64) -> Result<f64> {
    check_cap(t, analytics::VARIANCE_CAP, "variance bound exponent")?;
    Ok(beta_sums(t, c).0)
}

pub fn variance_bounds(t: ShellIndex, c: f64) -> Result<VarianceBoundReport> {
    check_cap(t, analytics::VARIANCE_CAP, "variance bound exponent")?;
    let lines = weight_sums(t, c)?;
    let (_, v1) = beta_sums(t, c);
    Ok(variance_report(t, c, &lines, v1))
}

pub fn monte_carlo_moments(t_values: &[u32], c: f64, seeds: &[u64]) -> Result<TrialStatistics> {
    if seeds.is_empty() {
        return Err(CoreError::EmptySeeds.into());
    }
    let samples = seeds
        .par_iter()
        .map(|&s| analytics::sample_seed(t_values, c, s))
        .collect::<std::result::Result<Vec<SeedSample>, _>>()?;
    Ok(TrialStatistics::from_samples(t_values, c, samples)?)
}
