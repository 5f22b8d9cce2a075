//! Reproducible experiment orchestration.
//!
//! A [`TrialManifest`] fixes everything a run depends on. Trial `i` uses seed
//! `base_seed + i`; trials run in parallel and are merged in seed order, so
//! identical manifests give byte-identical outputs.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use no3l_core::analytics::{
    self, refined_weight_ratio, x_event_threshold, y_event_threshold, LineWeightReport,
    RefinedWeightDiagnostic, SeedSample, ShellStatistics, TrialStatistics, VarianceBoundReport,
};
use no3l_core::construct::{density_profile, DensityPoint};
use no3l_core::sampling::{shell_counts, SamplerConfig};
use no3l_core::{Error as CoreError, PointSet, ShellIndex};

use crate::error::{Error, Result};
use crate::{format, parallel};

/// Largest window accepted for trial runs. Sampling costs `4^W` uniform
/// evaluations per trial.
pub const MAX_TRIAL_WINDOW: u32 = 16;

pub const LOG_BASE: &str = "e";

pub const WINDOW_NOTE: &str =
    "Q is realized on shells 0..W-1 only and the deletion rule sees only \
triples inside that window; claims are made for boxes [1,n]^2 with n <= 2^(W-1), where every \
relevant triple is windowed. The windowed S contains the unwindowed construction restricted to \
the window, so measured densities are upper estimates.";

fn default_cap() -> u32 {
    analytics::LINE_ENUMERATION_CAP
}

fn default_log_base() -> String {
    LOG_BASE.to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialManifest {
    pub base_seed: u64,
    pub trial_count: u32,
    pub c: f64,
    pub window_exponent: u32,
    /// Largest `T` for exact line enumeration in companion analytics.
    #[serde(default = "default_cap")]
    pub t_exact_cap: u32,
    /// Directory for per-trial point sets and aggregate files.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Base of the logarithm in density ratios; only `"e"` is supported.
    #[serde(default = "default_log_base")]
    pub log_base: String,
}

impl TrialManifest {
    pub fn new(base_seed: u64, trial_count: u32, c: f64, window_exponent: u32) -> Self {
        TrialManifest {
            base_seed,
            trial_count,
            c,
            window_exponent,
            t_exact_cap: default_cap(),
            output_dir: None,
            log_base: default_log_base(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        SamplerConfig::new(self.base_seed, self.c, self.window_exponent)?;
        if self.window_exponent > MAX_TRIAL_WINDOW {
            return Err(CoreError::Guard {
                what: "trial window exponent",
                value: self.window_exponent as u64,
                max: MAX_TRIAL_WINDOW as u64,
            }
            .into());
        }
        if self.t_exact_cap > analytics::LINE_ENUMERATION_CAP {
            return Err(CoreError::Guard {
                what: "t_exact_cap",
                value: self.t_exact_cap as u64,
                max: analytics::LINE_ENUMERATION_CAP as u64,
            }
            .into());
        }
        if self.log_base != LOG_BASE {
            return Err(Error::Invalid(format!(
                "unsupported log_base `{}`; only \"e\" is supported",
                self.log_base
            )));
        }
        if self.trial_count == 0 {
            return Err(CoreError::EmptySeeds.into());
        }
        self.base_seed
            .checked_add(self.trial_count as u64 - 1)
            .ok_or_else(|| Error::Invalid("base_seed + trial_count overflows u64".into()))?;
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.trial_count as u64)
            .map(|i| self.base_seed + i)
            .collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: TrialManifest = serde_json::from_str(&text)?;
        m.validate()?;
        Ok(m)
    }
}

/// Box sizes `2^4, ..., 2^(W-1)` at which densities are recorded.
pub fn profile_grid(window_exponent: u32) -> Vec<u64> {
    (4..window_exponent).map(|j| 1u64 << j).collect()
}

/// Event bookkeeping for one trial and one `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    #[serde(rename = "T")]
    pub t: u32,
    /// `X_T >= c 2^(T-1) / sqrt(T)`.
    pub x_ok: bool,
    /// `Y_T <= 2 K1_hat c^3 2^T / sqrt(T)`.
    pub y_ok: bool,
    pub e_ok: bool,
}

impl EventRecord {
    pub fn evaluate(t: u32, x: u64, y: u64, c: f64, k1: f64) -> Self {
        let x_ok = x as f64 >= x_event_threshold(t, c);
        let y_ok = y as f64 <= y_event_threshold(t, c, k1);
        EventRecord {
            t,
            x_ok,
            y_ok,
            e_ok: x_ok && y_ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    /// `X_T` for `T = 0..W`.
    pub x: Vec<u64>,
    /// `Y_T` (triples of `Q` in `B_T`) for `T = 0..W`.
    pub y: Vec<u64>,
    /// `|S ∩ R_T|` for `T = 0..W`.
    pub s_shell: Vec<u64>,
    pub q_size: u64,
    pub s_size: u64,
    pub density: Vec<DensityPoint>,
    /// One record per `T = 1..W`.
    pub events: Vec<EventRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellSummary {
    #[serde(rename = "T")]
    pub t: u32,
    pub mean_x: f64,
    pub expected_x: f64,
    pub mean_y: f64,
    pub var_y: f64,
    /// Fraction of trials in which `E_T` holds.
    pub event_freq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub manifest: TrialManifest,
    pub log_base: String,
    pub window_note: String,
    pub trials: Vec<TrialRecord>,
    pub shells: Vec<ShellSummary>,
    pub k1_hat: f64,
    pub k2_hat: f64,
}

/// Everything a run produces, before persistence.
pub struct TrialOutcome {
    pub record: TrialRecord,
    pub q: PointSet,
    pub s: PointSet,
}

fn run_one(m: &TrialManifest, seed: u64) -> Result<TrialOutcome> {
    let w = m.window_exponent;
    let cfg = SamplerConfig::new(seed, m.c, w)?;
    let q = parallel::sample_window(&cfg)?;
    let x = shell_counts(q.points(), w);
    let y = (0..w)
        .map(|t| parallel::triples_within_box(q.points(), ShellIndex(t)))
        .collect::<Result<Vec<_>>>()?;
    let s = parallel::delete_max_of_triples(&q)?;
    let valid = 1u64 << (w - 1);
    let inside = s.restricted_to_square(valid);
    let left = parallel::count_collinear_triples(&inside)?;
    if left != 0 {
        return Err(Error::TrialInvariant {
            seed,
            t: None,
            message: format!("{left} collinear triples survive in [1, {valid}]^2"),
        });
    }
    let s_shell = shell_counts(s.points(), w);
    for t in 0..w.saturating_sub(1) as usize {
        if (s_shell[t] as i64) < x[t] as i64 - y[t + 1] as i64 {
            return Err(Error::TrialInvariant {
                seed,
                t: Some(t as u32),
                message: format!(
                    "|S ∩ R_T| = {} < X_T - Y_(T+1) = {} - {}",
                    s_shell[t],
                    x[t],
                    y[t + 1]
                ),
            });
        }
    }
    let density = density_profile(&s, &profile_grid(w))?;
    let record = TrialRecord {
        seed,
        q_size: q.len() as u64,
        s_size: s.len() as u64,
        x,
        y,
        s_shell,
        density,
        events: Vec::new(),
    };
    Ok(TrialOutcome { record, q, s })
}

/// Runs every trial of the manifest in memory and aggregates; nothing is
/// written to disk.
pub fn execute(m: &TrialManifest) -> Result<(Aggregate, Vec<TrialOutcome>)> {
    m.validate()?;
    let mut outcomes = m
        .seeds()
        .par_iter()
        .map(|&seed| run_one(m, seed))
        .collect::<Result<Vec<_>>>()?;
    let w = m.window_exponent;
    let t_values: Vec<u32> = (1..w).collect();
    let (k1_hat, k2_hat, stats) = if t_values.is_empty() {
        (0.0, 0.0, None)
    } else {
        let samples = outcomes
            .iter()
            .map(|o| SeedSample {
                seed: o.record.seed,
                x: t_values.iter().map(|&t| o.record.x[t as usize]).collect(),
                y: t_values.iter().map(|&t| o.record.y[t as usize]).collect(),
            })
            .collect();
        let st = TrialStatistics::from_samples(&t_values, m.c, samples)?;
        (st.k1_hat, st.k2_hat, Some(st))
    };
    for o in &mut outcomes {
        let r = &mut o.record;
        r.events = t_values
            .iter()
            .map(|&t| EventRecord::evaluate(t, r.x[t as usize], r.y[t as usize], m.c, k1_hat))
            .collect();
    }
    let n = outcomes.len() as f64;
    let shells = stats
        .map(|st| {
            st.shells
                .iter()
                .enumerate()
                .map(|(i, sh)| ShellSummary {
                    t: sh.t,
                    mean_x: sh.x.mean,
                    expected_x: sh.expected_x,
                    mean_y: sh.y.mean,
                    var_y: sh.y.variance,
                    event_freq: outcomes.iter().filter(|o| o.record.events[i].e_ok).count() as f64
                        / n,
                })
                .collect()
        })
        .unwrap_or_default();
    let aggregate = Aggregate {
        manifest: m.clone(),
        log_base: LOG_BASE.to_string(),
        window_note: WINDOW_NOTE.to_string(),
        trials: outcomes.iter().map(|o| o.record.clone()).collect(),
        shells,
        k1_hat,
        k2_hat,
    };
    Ok((aggregate, outcomes))
}

pub fn q_file(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("q_{seed}.tsv"))
}

pub fn s_file(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("s_{seed}.tsv"))
}

pub const AGGREGATE_JSON: &str = "aggregate.json";
pub const AGGREGATE_CSV: &str = "aggregate.csv";
pub const DENSITY_CSV: &str = "density.csv";

/// Runs the manifest and, when it names an output directory, writes
/// `q_<seed>.tsv`, `s_<seed>.tsv`, `aggregate.json`, `aggregate.csv` and
/// `density.csv` there.
pub fn run_trials(m: &TrialManifest) -> Result<Aggregate> {
    let (aggregate, outcomes) = execute(m)?;
    if let Some(dir) = &m.output_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for o in &outcomes {
            format::write(&o.q, &q_file(dir, o.record.seed))?;
            format::write(&o.s, &s_file(dir, o.record.seed))?;
        }
        write_file(&dir.join(AGGREGATE_JSON), &aggregate_json(&aggregate)?)?;
        write_file(&dir.join(AGGREGATE_CSV), &aggregate_csv(&aggregate)?)?;
        write_file(&dir.join(DENSITY_CSV), &density_csv(&aggregate)?)?;
    }
    Ok(aggregate)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn aggregate_json(a: &Aggregate) -> Result<String> {
    let mut s = serde_json::to_string_pretty(a)?;
    s.push('\n');
    Ok(s)
}

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w)?;
    let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// One row per trial and `T`: `seed,T,x,y,s_shell,x_ok,y_ok,e_ok`. The event
/// columns are empty at `T = 0`.
pub fn aggregate_csv(a: &Aggregate) -> Result<String> {
    csv_string(|w| {
        w.write_record(["seed", "T", "x", "y", "s_shell", "x_ok", "y_ok", "e_ok"])?;
        for r in &a.trials {
            for t in 0..r.x.len() {
                let ev = t.checked_sub(1).and_then(|i| r.events.get(i));
                let flag =
                    |f: fn(&EventRecord) -> bool| ev.map(|e| f(e).to_string()).unwrap_or_default();
                w.write_record([
                    r.seed.to_string(),
                    t.to_string(),
                    r.x[t].to_string(),
                    r.y[t].to_string(),
                    r.s_shell[t].to_string(),
                    flag(|e| e.x_ok),
                    flag(|e| e.y_ok),
                    flag(|e| e.e_ok),
                ])?;
            }
        }
        Ok(())
    })
}

/// One row per `T`: `T,mean_x,expected_x,mean_y,var_y,event_freq`.
pub fn shells_csv(a: &Aggregate) -> Result<String> {
    csv_string(|w| {
        w.write_record(["T", "mean_x", "expected_x", "mean_y", "var_y", "event_freq"])?;
        for s in &a.shells {
            w.write_record([
                s.t.to_string(),
                s.mean_x.to_string(),
                s.expected_x.to_string(),
                s.mean_y.to_string(),
                s.var_y.to_string(),
                s.event_freq.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// One row per trial and box size: `seed,n,count,ratio`.
pub fn density_csv(a: &Aggregate) -> Result<String> {
    csv_string(|w| {
        w.write_record(["seed", "n", "count", "ratio"])?;
        for r in &a.trials {
            for d in &r.density {
                w.write_record([
                    r.seed.to_string(),
                    d.n.to_string(),
                    d.count.to_string(),
                    d.ratio.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMedian {
    pub n: u64,
    pub median_count: f64,
    pub median_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    /// Always a finite-range regression check, never a proof of the
    /// asymptotic statement.
    pub check: String,
    pub manifest: TrialManifest,
    pub log_base: String,
    pub n_min: u64,
    pub alpha: f64,
    pub per_n: Vec<DensityMedian>,
    /// `min_{n >= n_min}` of the median ratio.
    pub min_median_ratio: f64,
    /// Box sizes `n >= n_min` whose median ratio is below `alpha`.
    pub failing_n: Vec<u64>,
    pub passed: bool,
}

/// Medians across trials of `|S ∩ [n]^2|` and `r(n) = |S ∩ [n]^2| sqrt(ln n) / n`,
/// and whether every median with `n >= n_min` reaches `alpha`.
pub fn verify_theorem(results: &Aggregate, n_min: u64, alpha: f64) -> Result<TheoremReport> {
    if results.trials.is_empty() {
        return Err(CoreError::EmptySeeds.into());
    }
    let grid: Vec<u64> = results.trials[0].density.iter().map(|d| d.n).collect();
    let mut per_n = Vec::with_capacity(grid.len());
    for (i, &n) in grid.iter().enumerate() {
        let mut counts: Vec<f64> = results
            .trials
            .iter()
            .map(|r| r.density[i].count as f64)
            .collect();
        let mut ratios: Vec<f64> = results.trials.iter().map(|r| r.density[i].ratio).collect();
        per_n.push(DensityMedian {
            n,
            median_count: median(&mut counts),
            median_ratio: median(&mut ratios),
        });
    }
    let checked: Vec<&DensityMedian> = per_n.iter().filter(|d| d.n >= n_min).collect();
    if checked.is_empty() {
        return Err(Error::Invalid(format!(
            "no profile point with n >= {n_min}; the largest is {:?}",
            grid.last()
        )));
    }
    let min_median_ratio = checked
        .iter()
        .map(|d| d.median_ratio)
        .fold(f64::INFINITY, f64::min);
    let failing_n: Vec<u64> = checked
        .iter()
        .filter(|d| d.median_ratio < alpha)
        .map(|d| d.n)
        .collect();
    Ok(TheoremReport {
        check: "finite-range regression: median density ratio bounded below by alpha".into(),
        manifest: results.manifest.clone(),
        log_base: results.log_base.clone(),
        n_min,
        alpha,
        passed: failing_n.is_empty(),
        per_n,
        min_median_ratio,
        failing_n,
    })
}

/// `n,median_count,median_ratio,pass` rows.
pub fn theorem_csv(r: &TheoremReport) -> Result<String> {
    csv_string(|w| {
        w.write_record(["n", "median_count", "median_ratio", "pass"])?;
        for d in &r.per_n {
            let pass = if d.n >= r.n_min {
                (d.median_ratio >= r.alpha).to_string()
            } else {
                String::new()
            };
            w.write_record([
                d.n.to_string(),
                d.median_count.to_string(),
                d.median_ratio.to_string(),
                pass,
            ])?;
        }
        Ok(())
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    #[serde(rename = "T")]
    pub t: u32,
    pub exact_ey: Option<f64>,
    pub sum_w3: Option<f64>,
    pub mean_y: f64,
    pub se_y: f64,
    /// `|mean_y - exact_ey| <= 4 se_y`, when the exact value is available.
    pub ey_within_4se: Option<bool>,
    pub var_y: f64,
    pub se_var_y: f64,
    pub var_bound_total: Option<f64>,
    /// `var_y <= var_bound_total + 4 se_var_y`.
    pub var_within_bound: Option<bool>,
    /// `mean(Y_T) sqrt(T) / (c^3 2^T)`.
    pub k1_ratio: f64,
    /// `var(Y_T) / (2^T T^(7/2))`.
    pub k2_ratio: f64,
    pub mean_x: f64,
    pub expected_x: f64,
    /// Frequency of `X_T <= c 2^(T-1) / sqrt(T)`.
    pub x_tail_freq: f64,
    pub x_tail_bound: f64,
    /// Frequency of `Y_T > 2 K1_hat c^3 2^T / sqrt(T)`.
    pub y_event_complement_freq: f64,
    /// Frequency of the union of the two failure events above.
    pub e_complement_freq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summability {
    /// Sum over the tested `T` of the empirical failure frequency.
    pub sum_complement_freq: f64,
    /// Whether each consecutive failure frequency in the top half of the
    /// range shrinks by at least a factor 1.5.
    pub decays_by_1_5: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub t_min: u32,
    pub t_max: u32,
    pub c: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub line_enumeration_cap: u32,
    pub variance_cap: u32,
    pub line_family: String,
    pub weight_sums: Vec<LineWeightReport>,
    pub variance_bounds: Vec<VarianceBoundReport>,
    pub refined_weight: Vec<RefinedWeightDiagnostic>,
    pub rows: Vec<LemmaRow>,
    pub k1_hat: f64,
    pub k2_hat: f64,
    pub summability: Summability,
    pub cube_trend: CubeTrend,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedSum {
    #[serde(rename = "T")]
    pub t: u32,
    pub value: f64,
}

/// Trend of `sum_w3 sqrt(T) / (c^3 2^T)` over the exactly enumerated range.
///
/// Lines through low-shell points carry weight close to `c` however steep
/// they are, and about `4^T` box lines pass through each such point, so this
/// normalized sum keeps growing at desk scale. The trend is reported, not
/// enforced.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CubeTrend {
    pub normalized: Vec<NormalizedSum>,
    /// Value at the largest enumerated `T` over the value at `T = 4`.
    pub growth_from_t4: Option<f64>,
    /// `growth_from_t4 <= 1.25`.
    pub within_25_percent: Option<bool>,
}

impl CubeTrend {
    fn of(sums: &[LineWeightReport], c: f64) -> Self {
        if c <= 0.0 {
            return CubeTrend::default();
        }
        let normalized: Vec<NormalizedSum> = sums
            .iter()
            .map(|w| NormalizedSum {
                t: w.t,
                value: w.sum_w3 * (w.t as f64).sqrt() / (c * c * c * 2f64.powi(w.t as i32)),
            })
            .collect();
        let at4 = normalized.iter().find(|n| n.t == 4).map(|n| n.value);
        let last = normalized.last().filter(|n| n.t > 4).map(|n| n.value);
        let growth_from_t4 = at4.zip(last).map(|(a, b)| b / a);
        CubeTrend {
            normalized,
            growth_from_t4,
            within_25_percent: growth_from_t4.map(|g| g <= 1.25),
        }
    }
}

/// Failure frequencies must shrink by a factor `1.5` per unit `T` over the
/// top half of the range.
fn decays(freqs: &[f64]) -> bool {
    let top = &freqs[freqs.len() / 2..];
    top.windows(2).all(|w| w[1] * 1.5 <= w[0])
}

/// Exact analytics (within caps) side by side with Monte Carlo moments for
/// `T` in `t_min..=t_max`, seeds `base_seed..base_seed + trials`.
pub fn lemma_report(
    t_min: u32,
    t_max: u32,
    c: f64,
    base_seed: u64,
    trials: u32,
) -> Result<LemmaReport> {
    if t_min == 0 || t_min > t_max {
        return Err(Error::Invalid(format!(
            "need 1 <= tmin <= tmax, got tmin = {t_min}, tmax = {t_max}"
        )));
    }
    if t_max + 1 > MAX_TRIAL_WINDOW {
        return Err(CoreError::Guard {
            what: "tmax",
            value: t_max as u64,
            max: MAX_TRIAL_WINDOW as u64 - 1,
        }
        .into());
    }
    if !c.is_finite() || c < 0.0 {
        return Err(CoreError::InvalidConstant(c).into());
    }
    let t_values: Vec<u32> = (t_min..=t_max).collect();
    let seeds: Vec<u64> = (0..trials as u64)
        .map(|i| base_seed.wrapping_add(i))
        .collect();
    let mc = parallel::monte_carlo_moments(&t_values, c, &seeds)?;

    let mut weight_sums = Vec::new();
    let mut variance_bounds = Vec::new();
    let mut refined_weight = Vec::new();
    for &t in &t_values {
        if t <= analytics::LINE_ENUMERATION_CAP {
            weight_sums.push(parallel::weight_sums(ShellIndex(t), c)?);
            if c > 0.0 {
                refined_weight.push(refined_weight_ratio(ShellIndex(t), c)?);
            }
        }
        if t <= analytics::VARIANCE_CAP {
            variance_bounds.push(parallel::variance_bounds(ShellIndex(t), c)?);
        }
    }

    let mut rows = Vec::new();
    for (i, sh) in mc.shells.iter().enumerate() {
        let ws = weight_sums.iter().find(|w| w.t == sh.t);
        let vb = variance_bounds.iter().find(|v| v.t == sh.t);
        let x_thr = x_event_threshold(sh.t, c);
        let fails = |pred: &dyn Fn(&SeedSample) -> bool| {
            mc.samples.iter().filter(|s| pred(s)).count() as f64 / mc.sample_size as f64
        };
        let x_fail = |s: &SeedSample| s.x[i] as f64 <= x_thr;
        let y_fail = |s: &SeedSample| s.y[i] as f64 > sh.y_threshold;
        rows.push(lemma_row(
            sh,
            ws,
            vb,
            fails(&y_fail),
            fails(&|s| x_fail(s) || y_fail(s)),
        ));
    }
    let freqs: Vec<f64> = rows.iter().map(|r| r.e_complement_freq).collect();
    Ok(LemmaReport {
        t_min,
        t_max,
        c,
        trials: mc.sample_size,
        base_seed,
        line_enumeration_cap: analytics::LINE_ENUMERATION_CAP,
        variance_cap: analytics::VARIANCE_CAP,
        line_family: "lines with at least two points in B_T".into(),
        cube_trend: CubeTrend::of(&weight_sums, c),
        weight_sums,
        variance_bounds,
        refined_weight,
        k1_hat: mc.k1_hat,
        k2_hat: mc.k2_hat,
        summability: Summability {
            sum_complement_freq: freqs.iter().sum(),
            decays_by_1_5: decays(&freqs),
        },
        rows,
    })
}

fn lemma_row(
    sh: &ShellStatistics,
    ws: Option<&LineWeightReport>,
    vb: Option<&VarianceBoundReport>,
    y_complement: f64,
    e_complement: f64,
) -> LemmaRow {
    LemmaRow {
        t: sh.t,
        exact_ey: ws.map(|w| w.exact_ey),
        sum_w3: ws.map(|w| w.sum_w3),
        mean_y: sh.y.mean,
        se_y: sh.y.se_mean,
        ey_within_4se: ws.map(|w| (sh.y.mean - w.exact_ey).abs() <= 4.0 * sh.y.se_mean),
        var_y: sh.y.variance,
        se_var_y: sh.y.se_variance,
        var_bound_total: vb.map(|v| v.var_bound_total),
        var_within_bound: vb.map(|v| sh.y.variance <= v.var_bound_total + 4.0 * sh.y.se_variance),
        k1_ratio: sh.k1_ratio,
        k2_ratio: sh.k2_ratio,
        mean_x: sh.x.mean,
        expected_x: sh.expected_x,
        x_tail_freq: sh.x_tail_freq,
        x_tail_bound: sh.x_tail_bound,
        y_event_complement_freq: y_complement,
        e_complement_freq: e_complement,
    }
}

/// One row per `T`.
pub fn lemma_csv(r: &LemmaReport) -> Result<String> {
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let optb = |v: Option<bool>| v.map(|v| v.to_string()).unwrap_or_default();
    csv_string(|w| {
        w.write_record([
            "T",
            "exact_ey",
            "sum_w3",
            "mean_y",
            "se_y",
            "ey_within_4se",
            "var_y",
            "se_var_y",
            "var_bound_total",
            "var_within_bound",
            "k1_ratio",
            "k2_ratio",
            "mean_x",
            "expected_x",
            "x_tail_freq",
            "x_tail_bound",
            "y_event_complement_freq",
            "e_complement_freq",
        ])?;
        for row in &r.rows {
            w.write_record([
                row.t.to_string(),
                opt(row.exact_ey),
                opt(row.sum_w3),
                row.mean_y.to_string(),
                row.se_y.to_string(),
                optb(row.ey_within_4se),
                row.var_y.to_string(),
                row.se_var_y.to_string(),
                opt(row.var_bound_total),
                optb(row.var_within_bound),
                row.k1_ratio.to_string(),
                row.k2_ratio.to_string(),
                row.mean_x.to_string(),
                row.expected_x.to_string(),
                row.x_tail_freq.to_string(),
                row.x_tail_bound.to_string(),
                row.y_event_complement_freq.to_string(),
                row.e_complement_freq.to_string(),
            ])?;
        }
        Ok(())
    })
}
