//! Line-weight functionals over the box `B_T`.
//!
//! A line is enumerated from its first point in `B_T`: for direction `v`, a
//! point `p` starts a line with at least two box points iff `p + v` is in
//! the box and `p - v` is not. Each such line is visited exactly once, with
//! its points walked in order, so no pair deduplication is needed.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::{directions_up_to, LatticeLine, Point, PrimitiveDirection, ShellIndex};
use crate::sampling::shell_probability;
use crate::sum::CompensatedSum;

/// Largest `T` for [`enumerate_box_lines`] and [`weight_sums`].
pub const LINE_ENUMERATION_CAP: u32 = 7;
/// Largest `T` for [`variance_bounds`], which evaluates `beta` at every box
/// point.
pub const VARIANCE_CAP: u32 = 6;

fn check_cap(t: ShellIndex, cap: u32, what: &'static str) -> Result<()> {
    if t.0 > cap {
        return Err(Error::Guard {
            what,
            value: t.0 as u64,
            max: cap as u64,
        });
    }
    Ok(())
}

/// A lattice line with at least two points in `B_T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoxLine {
    pub line: LatticeLine,
    /// First box point along the direction.
    pub start: Point,
    /// Number of box points.
    pub len: u64,
}

impl BoxLine {
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        let (a, b) = (self.line.dir.a(), self.line.dir.b());
        (0..self.len as i64).map(move |j| Point::new(self.start.x + a * j, self.start.y + b * j))
    }
}

/// Canonical directions that can join two points of `B_T`.
pub fn box_directions(t: ShellIndex) -> Vec<PrimitiveDirection> {
    directions_up_to(t.side() as i64 - 1)
}

/// Calls `f` for every line of direction `dir` with at least two points in
/// `[1, side]^2`.
pub fn for_each_line_with_direction(
    side: i64,
    dir: PrimitiveDirection,
    mut f: impl FnMut(BoxLine),
) {
    let (a, b) = (dir.a(), dir.b());
    let inside = |v: i64| (1..=side).contains(&v);
    let x_lo = 1.max(1 - a);
    let x_hi = side.min(side - a);
    for y in 1..=side - b {
        for x in x_lo..=x_hi {
            // p - v must leave the box.
            if y > b && inside(x - a) {
                continue;
            }
            let start = Point::new(x, y);
            let mut len = 1u64;
            let (mut cx, mut cy) = (x + a, y + b);
            while inside(cx) && inside(cy) {
                len += 1;
                cx += a;
                cy += b;
            }
            f(BoxLine {
                line: LatticeLine::through(dir, start),
                start,
                len,
            });
        }
    }
}

/// Every lattice line with at least two points in `B_T`, exactly once.
pub struct BoxLines {
    side: i64,
    dirs: Vec<PrimitiveDirection>,
    next_dir: usize,
    buffer: Vec<BoxLine>,
    pos: usize,
}

impl Iterator for BoxLines {
    type Item = BoxLine;

    fn next(&mut self) -> Option<BoxLine> {
        while self.pos == self.buffer.len() {
            let dir = *self.dirs.get(self.next_dir)?;
            self.next_dir += 1;
            self.buffer.clear();
            self.pos = 0;
            let buf = &mut self.buffer;
            for_each_line_with_direction(self.side, dir, |l| buf.push(l));
        }
        self.pos += 1;
        Some(self.buffer[self.pos - 1])
    }
}

pub fn enumerate_box_lines(t: ShellIndex) -> Result<BoxLines> {
    check_cap(t, LINE_ENUMERATION_CAP, "line enumeration exponent")?;
    Ok(BoxLines {
        side: t.side() as i64,
        dirs: box_directions(t),
        next_dir: 0,
        buffer: Vec::new(),
        pos: 0,
    })
}

/// Per-shell inclusion probabilities `p_0 ..= p_{T}`.
fn shell_probabilities(t: ShellIndex, c: f64) -> Vec<f64> {
    (0..=t.0)
        .map(|s| shell_probability(ShellIndex(s), c))
        .collect()
}

#[inline]
fn prob_at(probs: &[f64], p: Point) -> f64 {
    probs[(63 - p.inf_norm().leading_zeros()) as usize]
}

/// `W_T(L)`: the sum of inclusion probabilities over `L ∩ B_T`.
pub fn line_weight(line: &LatticeLine, t: ShellIndex, c: f64) -> f64 {
    let probs = shell_probabilities(t, c);
    line.points_in_box(t)
        .into_iter()
        .map(|p| prob_at(&probs, p))
        .collect::<CompensatedSum>()
        .value()
}

/// `W_{T,x}(L)`: the weight of `L` without the point `x`.
pub fn line_weight_excluding(line: &LatticeLine, t: ShellIndex, c: f64, x: Point) -> Result<f64> {
    if !line.contains(x) {
        return Err(Error::PointNotOnLine(x));
    }
    let probs = shell_probabilities(t, c);
    Ok(line
        .points_in_box(t)
        .into_iter()
        .filter(|&p| p != x)
        .map(|p| prob_at(&probs, p))
        .collect::<CompensatedSum>()
        .value())
}

/// Sums over the lines with at least two points in `B_T`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LineWeightReport {
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub t: u32,
    pub c: f64,
    /// `sum_L W_T(L)^3`.
    pub sum_w3: f64,
    /// `sum_L W_T(L)^4`.
    pub sum_w4: f64,
    /// `sum_L e_3(L)`, the exact expected number of collinear triples.
    pub exact_ey: f64,
    pub line_count: u64,
}

/// Partial accumulator for [`LineWeightReport`]; partials over disjoint
/// direction sets merge into the full report.
#[derive(Clone, Copy, Debug, Default)]
pub struct LineSums {
    w3: CompensatedSum,
    w4: CompensatedSum,
    e3: CompensatedSum,
    lines: u64,
}

impl LineSums {
    pub fn merge(&mut self, other: &LineSums) {
        self.w3.merge(other.w3);
        self.w4.merge(other.w4);
        self.e3.merge(other.e3);
        self.lines += other.lines;
    }

    pub fn into_report(self, t: ShellIndex, c: f64) -> LineWeightReport {
        LineWeightReport {
            t: t.0,
            c,
            sum_w3: self.w3.value(),
            sum_w4: self.w4.value(),
            exact_ey: self.e3.value(),
            line_count: self.lines,
        }
    }
}

/// Accumulates the lines of the given directions.
pub fn line_sums_for_directions(t: ShellIndex, c: f64, dirs: &[PrimitiveDirection]) -> LineSums {
    let probs = shell_probabilities(t, c);
    let side = t.side() as i64;
    let mut acc = LineSums::default();
    for &dir in dirs {
        for_each_line_with_direction(side, dir, |l| {
            // Elementary symmetric polynomials of the line's probabilities.
            let (mut e1, mut e2, mut e3) = (0.0f64, 0.0f64, 0.0f64);
            for p in l.points() {
                let q = prob_at(&probs, p);
                e3 += e2 * q;
                e2 += e1 * q;
                e1 += q;
            }
            let w2 = e1 * e1;
            acc.w3.add(w2 * e1);
            acc.w4.add(w2 * w2);
            acc.e3.add(e3);
            acc.lines += 1;
        });
    }
    acc
}

pub fn weight_sums(t: ShellIndex, c: f64) -> Result<LineWeightReport> {
    check_cap(t, LINE_ENUMERATION_CAP, "line enumeration exponent")?;
    Ok(line_sums_for_directions(t, c, &box_directions(t)).into_report(t, c))
}

/// `s(L)`: the smallest shell index met by the line (within `N^2`).
///
/// Every point of `N^2` with norm at most `2^T` lies in `B_T`, so for a
/// line meeting `B_T` the minimum over its box points is the global one.
pub fn first_shell(line: &BoxLine) -> ShellIndex {
    let min_norm = line.points().map(|p| p.inf_norm()).min().unwrap_or(1);
    ShellIndex(63 - min_norm.leading_zeros())
}

/// Largest value over box lines of
/// `W_T(L) * m / (c * (sqrt(T) - sqrt(max(s(L), 1) - 1)))`, where `m` is the
/// norm of the line's direction. Requires `T >= 1` and `c > 0`.
///
/// A line steeper than its first shell (`m > 2^s(L)`) can still pick up one
/// point per shell, so on those lines the ratio grows like `m / sqrt(T)`.
/// `max_ratio_regular` restricts to `m <= 2^s(L)`, where `|L ∩ R_t| <= 2^t/m`
/// up to a constant.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RefinedWeightDiagnostic {
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub t: u32,
    pub c: f64,
    pub max_ratio: f64,
    pub argmax: Option<LatticeLine>,
    pub max_ratio_regular: f64,
    pub argmax_regular: Option<LatticeLine>,
}

pub fn refined_weight_ratio(t: ShellIndex, c: f64) -> Result<RefinedWeightDiagnostic> {
    check_cap(t, LINE_ENUMERATION_CAP, "line enumeration exponent")?;
    if c.is_nan() || c <= 0.0 {
        return Err(Error::InvalidConstant(c));
    }
    let probs = shell_probabilities(t, c);
    let root_t = libm::sqrt(t.0 as f64);
    let mut best = RefinedWeightDiagnostic {
        t: t.0,
        c,
        max_ratio: 0.0,
        argmax: None,
        max_ratio_regular: 0.0,
        argmax_regular: None,
    };
    for l in enumerate_box_lines(t)? {
        let w: f64 = l.points().map(|p| prob_at(&probs, p)).sum();
        let first = first_shell(&l).0;
        let s = first.max(1);
        let m = l.line.dir.norm();
        let denom = c * (root_t - libm::sqrt((s - 1) as f64));
        let ratio = w * m as f64 / denom;
        if ratio > best.max_ratio {
            best.max_ratio = ratio;
            best.argmax = Some(l.line);
        }
        if m <= 1u64 << first && ratio > best.max_ratio_regular {
            best.max_ratio_regular = ratio;
            best.argmax_regular = Some(l.line);
        }
    }
    Ok(best)
}

/// `beta_T(x)` and its upper bound `sum_{L ∋ x} W_{T,x}(L)^2`, walking every
/// box direction from `x`.
fn beta_parts(x: Point, side: i64, probs: &[f64], dirs: &[PrimitiveDirection]) -> (f64, f64) {
    let inside = |p: Point| p.in_square(side as u64);
    let mut beta = CompensatedSum::new();
    let mut bound = CompensatedSum::new();
    for d in dirs {
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for sign in [1i64, -1] {
            let mut q = Point::new(x.x + sign * d.a(), x.y + sign * d.b());
            while inside(q) {
                let v = prob_at(probs, q);
                s1 += v;
                s2 += v * v;
                q = Point::new(q.x + sign * d.a(), q.y + sign * d.b());
            }
        }
        if s1 > 0.0 {
            beta.add((s1 * s1 - s2) / 2.0);
            bound.add(s1 * s1);
        }
    }
    (beta.value(), bound.value())
}

/// `beta_T(x) = sum p(y) p(z)` over unordered pairs `{y, z}` of distinct box
/// points other than `x` that are collinear with `x`.
pub fn beta(x: Point, t: ShellIndex, c: f64) -> Result<f64> {
    beta_with_bound(x, t, c).map(|(b, _)| b)
}

/// `(beta_T(x), sum_{L ∋ x} W_{T,x}(L)^2)`.
pub fn beta_with_bound(x: Point, t: ShellIndex, c: f64) -> Result<(f64, f64)> {
    if !x.in_box(t) {
        return Err(Error::PointOutsideBox {
            point: x,
            exponent: t.0,
        });
    }
    let probs = shell_probabilities(t, c);
    Ok(beta_parts(x, t.side() as i64, &probs, &box_directions(t)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VarianceBoundReport {
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub t: u32,
    pub c: f64,
    /// Pairs of triples sharing all three points: `E[Y_T]`.
    pub v3_bound: f64,
    /// Pairs sharing two points: `sum_L W_T(L)^4`.
    pub v2_bound: f64,
    /// Pairs sharing one point: `sum_x p(x) beta_T(x)^2`.
    pub v1_bound: f64,
    pub var_bound_total: f64,
}

/// `sum_x p(x) beta_T(x)` and `sum_x p(x) beta_T(x)^2` over the box points
/// with `x` in `xs`.
pub fn beta_moments(
    t: ShellIndex,
    c: f64,
    xs: impl Iterator<Item = i64>,
) -> (CompensatedSum, CompensatedSum) {
    let probs = shell_probabilities(t, c);
    let dirs = box_directions(t);
    let side = t.side() as i64;
    let (mut first, mut second) = (CompensatedSum::new(), CompensatedSum::new());
    for x in xs {
        for y in 1..=side {
            let pt = Point::new(x, y);
            let (b, _) = beta_parts(pt, side, &probs, &dirs);
            let px = prob_at(&probs, pt);
            first.add(px * b);
            second.add(px * b * b);
        }
    }
    (first, second)
}

/// `sum_{x in B_T} p(x) beta_T(x)`; equals `3 E[Y_T]`.
pub fn beta_first_moment(t: ShellIndex, c: f64) -> Result<f64> {
    check_cap(t, VARIANCE_CAP, "variance bound exponent")?;
    Ok(beta_moments(t, c, 1..=t.side() as i64).0.value())
}

/// Assembles a report from the line sums and the `beta` second moment.
pub fn variance_report(
    t: ShellIndex,
    c: f64,
    lines: &LineWeightReport,
    v1: f64,
) -> VarianceBoundReport {
    VarianceBoundReport {
        t: t.0,
        c,
        v3_bound: lines.exact_ey,
        v2_bound: lines.sum_w4,
        v1_bound: v1,
        var_bound_total: v1 + lines.sum_w4 + lines.exact_ey,
    }
}

pub fn variance_bounds(t: ShellIndex, c: f64) -> Result<VarianceBoundReport> {
    check_cap(t, VARIANCE_CAP, "variance bound exponent")?;
    let lines = weight_sums(t, c)?;
    let (_, v1) = beta_moments(t, c, 1..=t.side() as i64);
    Ok(variance_report(t, c, &lines, v1.value()))
}
