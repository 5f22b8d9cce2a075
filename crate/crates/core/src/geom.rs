//! Exact integer lattice geometry.
//!
//! Everything here is decided with integer arithmetic. Cross products and
//! line offsets are computed in `i128`, so no predicate ever depends on
//! floating point.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// A lattice point.
///
/// `Ord` is the norm-lexicographic order `(|p|_inf, x, y)` used throughout
/// the crate for sorting point sets and for breaking ties when deleting the
/// largest point of a collinear triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }

    /// `max(|x|, |y|)`.
    pub const fn inf_norm(self) -> u64 {
        let ax = self.x.unsigned_abs();
        let ay = self.y.unsigned_abs();
        if ax > ay {
            ax
        } else {
            ay
        }
    }

    /// Whether the point lies in `[1, side]^2`.
    pub fn in_square(self, side: u64) -> bool {
        self.x >= 1 && self.y >= 1 && (self.x as u64) <= side && (self.y as u64) <= side
    }

    /// Whether the point lies in the box `B_T = [1, 2^T]^2`.
    pub fn in_box(self, t: ShellIndex) -> bool {
        self.in_square(t.side())
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        self.inf_norm()
            .cmp(&other.inf_norm())
            .then(self.x.cmp(&other.x))
            .then(self.y.cmp(&other.y))
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Free-function form of [`Point::inf_norm`].
pub fn inf_norm(p: Point) -> u64 {
    p.inf_norm()
}

/// Exponent `T` of a dyadic shell `R_T = {x in N^2 : 2^T <= |x|_inf < 2^(T+1)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct ShellIndex(pub u32);

impl ShellIndex {
    pub const fn get(self) -> u32 {
        self.0
    }

    /// `2^T`, the side of the box `B_T` and the smallest norm in `R_T`.
    pub const fn side(self) -> u64 {
        1u64 << self.0
    }

    pub fn contains(self, p: Point) -> bool {
        p.x >= 1 && p.y >= 1 && shell_index(p) == Ok(self)
    }

    pub fn size(self) -> Result<u64> {
        shell_size(self)
    }
}

/// The shell containing `p`, i.e. `floor(log2 |p|_inf)`, by bit counting.
pub fn shell_index(p: Point) -> Result<ShellIndex> {
    let n = p.inf_norm();
    if n == 0 {
        return Err(Error::ZeroNorm);
    }
    Ok(ShellIndex(63 - n.leading_zeros()))
}

/// `|R_T| = 3 * 4^T - 2 * 2^T` (points of `[1, 2^(T+1) - 1]^2` minus those of
/// `[1, 2^T - 1]^2`).
pub fn shell_size(t: ShellIndex) -> Result<u64> {
    let e = t.0;
    if e >= 32 {
        return Err(Error::Overflow("shell size"));
    }
    let pow2 = 1u64 << e;
    pow2.checked_mul(pow2)
        .and_then(|p4| p4.checked_mul(3))
        .and_then(|v| v.checked_sub(2 * pow2))
        .ok_or(Error::Overflow("shell size"))
}

pub fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Extended Euclid: returns `(g, s, t)` with `a*s + b*t = g = gcd(a, b) >= 0`.
pub(crate) fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

pub(crate) fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

pub(crate) fn div_ceil(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) == (b < 0)) {
        q + 1
    } else {
        q
    }
}

/// Canonical representative of an unoriented primitive direction.
///
/// Invariants: `gcd(|a|, |b|) = 1`, and `b > 0` or (`b = 0` and `a > 0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrimitiveDirection {
    a: i64,
    b: i64,
}

impl PrimitiveDirection {
    pub fn a(self) -> i64 {
        self.a
    }

    pub fn b(self) -> i64 {
        self.b
    }

    pub fn norm(self) -> u64 {
        Point::new(self.a, self.b).inf_norm()
    }

    /// Builds a direction from components already known to be canonical.
    pub(crate) const fn from_canonical(a: i64, b: i64) -> Self {
        PrimitiveDirection { a, b }
    }

    /// Reduces `(a, b)` by its gcd and flips it into canonical orientation.
    pub fn canonical(a: i128, b: i128) -> Result<Self> {
        if a == 0 && b == 0 {
            return Err(Error::ZeroVector);
        }
        let g = gcd(a.unsigned_abs(), b.unsigned_abs()) as i128;
        let (mut a, mut b) = (a / g, b / g);
        if b < 0 || (b == 0 && a < 0) {
            a = -a;
            b = -b;
        }
        let a = i64::try_from(a).map_err(|_| Error::Overflow("direction component"))?;
        let b = i64::try_from(b).map_err(|_| Error::Overflow("direction component"))?;
        Ok(PrimitiveDirection { a, b })
    }
}

/// See [`PrimitiveDirection::canonical`].
pub fn canonical_direction(a: i64, b: i64) -> Result<PrimitiveDirection> {
    PrimitiveDirection::canonical(a as i128, b as i128)
}

/// Exact collinearity: `(q - p) x (r - p) == 0`. Repeated points count as
/// collinear.
pub fn collinear(p: Point, q: Point, r: Point) -> bool {
    cross(p, q, r) == 0
}

pub(crate) fn cross(p: Point, q: Point, r: Point) -> i128 {
    let (ux, uy) = (q.x as i128 - p.x as i128, q.y as i128 - p.y as i128);
    let (vx, vy) = (r.x as i128 - p.x as i128, r.y as i128 - p.y as i128);
    ux * vy - uy * vx
}

/// A lattice line `{(x, y) : b*x - a*y = k}` with canonical direction `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatticeLine {
    pub dir: PrimitiveDirection,
    pub k: i128,
}

impl LatticeLine {
    pub fn new(dir: PrimitiveDirection, k: i128) -> Self {
        LatticeLine { dir, k }
    }

    /// The line with direction `dir` passing through `p`.
    pub fn through(dir: PrimitiveDirection, p: Point) -> Self {
        let k = dir.b as i128 * p.x as i128 - dir.a as i128 * p.y as i128;
        LatticeLine { dir, k }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.dir.b as i128 * p.x as i128 - self.dir.a as i128 * p.y as i128 == self.k
    }

    /// Range of the step parameter `j` for which `base + j*dir` lies in
    /// `[lo, hi]^2`, together with `base`. `None` when the intersection is
    /// empty.
    fn square_range(&self, lo: i128, hi: i128) -> Option<((i128, i128), i128, i128)> {
        let (a, b) = (self.dir.a as i128, self.dir.b as i128);
        let base = self.base_point();
        let (mut jlo, mut jhi) = (i128::MIN, i128::MAX);
        for (start, step) in [(base.0, a), (base.1, b)] {
            if step == 0 {
                if start < lo || start > hi {
                    return None;
                }
            } else if step > 0 {
                jlo = jlo.max(div_ceil(lo - start, step));
                jhi = jhi.min(div_floor(hi - start, step));
            } else {
                jlo = jlo.max(div_ceil(hi - start, step));
                jhi = jhi.min(div_floor(lo - start, step));
            }
        }
        (jlo <= jhi).then_some((base, jlo, jhi))
    }

    /// One lattice point on the line, with the coordinate along the larger
    /// direction component reduced into `[0, |step|)`.
    fn base_point(&self) -> (i128, i128) {
        let (a, b, k) = (self.dir.a as i128, self.dir.b as i128, self.k);
        if a == 0 {
            // b = 1: vertical line x = k.
            return (k, 0);
        }
        if b == 0 {
            // a = 1: horizontal line y = -k.
            return (0, -k);
        }
        // b*u - a*w = 1.
        let (g, u, _) = ext_gcd(b, -a);
        debug_assert_eq!(g, 1);
        // x0 = k*u mod |a|, then y0 from the line equation.
        let m = a.abs();
        let x0 = (k.rem_euclid(m) * u.rem_euclid(m)).rem_euclid(m);
        let y0 = (b * x0 - k) / a;
        debug_assert_eq!(b * x0 - a * y0, k);
        (x0, y0)
    }

    /// Points of the line in `[lo, hi]^2`, increasing along the direction.
    pub fn points_in_square(&self, lo: i64, hi: i64) -> Vec<Point> {
        let Some((base, jlo, jhi)) = self.square_range(lo as i128, hi as i128) else {
            return Vec::new();
        };
        let (a, b) = (self.dir.a as i128, self.dir.b as i128);
        (jlo..=jhi)
            .map(|j| Point::new((base.0 + a * j) as i64, (base.1 + b * j) as i64))
            .collect()
    }

    /// Number of points of the line in `[lo, hi]^2`.
    pub fn count_in_square(&self, lo: i64, hi: i64) -> u64 {
        self.square_range(lo as i128, hi as i128)
            .map_or(0, |(_, jlo, jhi)| (jhi - jlo + 1) as u64)
    }

    /// `L ∩ B_T`, ordered along the direction.
    pub fn points_in_box(&self, t: ShellIndex) -> Vec<Point> {
        self.points_in_square(1, t.side() as i64)
    }

    /// Whether the line meets the shell `R_t`.
    pub fn meets_shell(&self, t: ShellIndex) -> bool {
        let lo_norm = t.side() as i128;
        let hi = (2 * t.side() - 1) as i128;
        let Some((base, jlo, jhi)) = self.square_range(1, hi) else {
            return false;
        };
        let (a, b) = (self.dir.a as i128, self.dir.b as i128);
        // Some point of the outer square must have a coordinate >= 2^t.
        [(base.0, a), (base.1, b)].iter().any(|&(start, step)| {
            let (mut lo, mut up) = (jlo, jhi);
            if step == 0 {
                return start >= lo_norm;
            } else if step > 0 {
                lo = lo.max(div_ceil(lo_norm - start, step));
            } else {
                up = up.min(div_floor(lo_norm - start, step));
            }
            lo <= up
        })
    }
}

/// The lattice line through two distinct points.
pub fn line_through(p: Point, q: Point) -> Result<LatticeLine> {
    if p == q {
        return Err(Error::CoincidentPoints(p));
    }
    let dir = PrimitiveDirection::canonical(q.x as i128 - p.x as i128, q.y as i128 - p.y as i128)?;
    Ok(LatticeLine::through(dir, p))
}

/// Free-function form of [`LatticeLine::points_in_box`].
pub fn line_points_in_box(line: &LatticeLine, t: ShellIndex) -> Vec<Point> {
    line.points_in_box(t)
}

/// All canonical primitive directions with `|v|_inf = m`, ordered by `(b, a)`.
pub fn primitive_directions_with_norm(m: u64) -> Vec<PrimitiveDirection> {
    let mut out = Vec::new();
    if m == 0 {
        return out;
    }
    let mi = m as i64;
    let coprime = |u: i64| gcd(u.unsigned_abs() as u128, m as u128) == 1;
    // b < m: the a-component carries the norm.
    for b in 0..mi {
        if coprime(b) {
            if b > 0 {
                out.push(PrimitiveDirection::from_canonical(-mi, b));
            }
            out.push(PrimitiveDirection::from_canonical(mi, b));
        }
    }
    // b = m.
    for a in -mi..=mi {
        if coprime(a) {
            out.push(PrimitiveDirection::from_canonical(a, mi));
        }
    }
    out.sort_unstable_by_key(|d| (d.b, d.a));
    out
}

/// Lines with direction `v` meeting `R_t`, by scanning the offsets
/// `|k| <= 4 m 2^t` and testing each exactly. Ordered by increasing `k`.
pub fn lines_meeting_shell(v: PrimitiveDirection, t: ShellIndex) -> Vec<LatticeLine> {
    let bound = 4 * v.norm() as i128 * t.side() as i128;
    (-bound..=bound)
        .map(|k| LatticeLine::new(v, k))
        .filter(|l| l.meets_shell(t))
        .collect()
}

/// All canonical primitive directions `(a, b)` with `|a|, |b| <= max`.
pub(crate) fn directions_up_to(max: i64) -> Vec<PrimitiveDirection> {
    let mut out = Vec::new();
    for b in 0..=max {
        for a in -max..=max {
            if (b == 0 && a <= 0) || gcd(a.unsigned_abs() as u128, b as u128) != 1 {
                continue;
            }
            out.push(PrimitiveDirection::from_canonical(a, b));
        }
    }
    out
}
