//! Exact counting and enumeration of collinear triples.
//!
//! The fast counter buckets, for every anchor `x`, the remaining points by
//! the canonical direction of `y - x`. Points on opposite sides of `x` share
//! a bucket because directions are unoriented. A bucket of size `n`
//! contributes `C(n, 2)` triples through `x`; every triple is seen once from
//! each of its three members, so the grand total is divisible by 3.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::{collinear, Point, PrimitiveDirection, ShellIndex};

/// Largest input accepted by [`count_collinear_triples_bruteforce`].
pub const BRUTEFORCE_LIMIT: usize = 2000;

fn direction(from: Point, to: Point) -> Result<PrimitiveDirection> {
    PrimitiveDirection::canonical(to.x as i128 - from.x as i128, to.y as i128 - from.y as i128)
        .map_err(|e| match e {
            Error::ZeroVector => Error::DuplicatePoint(from),
            e => e,
        })
}

/// Sorted canonical directions from `anchor` to every point of `others`.
fn sorted_directions<'a>(
    anchor: Point,
    others: impl Iterator<Item = &'a Point>,
) -> Result<Vec<PrimitiveDirection>> {
    let mut dirs = others
        .map(|&q| direction(anchor, q))
        .collect::<Result<Vec<_>>>()?;
    dirs.sort_unstable();
    Ok(dirs)
}

/// Calls `f` with the length of every run of equal values in a sorted slice.
fn for_each_run<T: PartialEq>(sorted: &[T], mut f: impl FnMut(usize)) {
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        f(j - i);
        i = j;
    }
}

/// `sum_d C(n_{x,d}, 2)` for the anchor `points[anchor]`: the number of
/// collinear triples containing it.
pub fn anchor_pair_count(points: &[Point], anchor: usize) -> Result<u64> {
    let x = points[anchor];
    let others = points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != anchor)
        .map(|(_, q)| q);
    let dirs = sorted_directions(x, others)?;
    let mut total = 0u64;
    for_each_run(&dirs, |n| {
        let n = n as u64;
        total += n * (n - 1) / 2;
    });
    Ok(total)
}

/// Converts the anchor sum into a triple count, checking divisibility by 3.
pub fn triples_from_anchor_sum(anchor_sum: u64) -> Result<u64> {
    if !anchor_sum.is_multiple_of(3) {
        return Err(Error::Invariant("anchor sum not divisible by 3"));
    }
    Ok(anchor_sum / 3)
}

/// Number of unordered collinear triples, in `O(m^2 log m)`.
pub fn count_collinear_triples(points: &[Point]) -> Result<u64> {
    let mut sum = 0u64;
    for i in 0..points.len() {
        sum += anchor_pair_count(points, i)?;
    }
    triples_from_anchor_sum(sum)
}

/// Cubic reference counter, limited to [`BRUTEFORCE_LIMIT`] points.
pub fn count_collinear_triples_bruteforce(points: &[Point]) -> Result<u64> {
    if points.len() > BRUTEFORCE_LIMIT {
        return Err(Error::Guard {
            what: "brute-force input size",
            value: points.len() as u64,
            max: BRUTEFORCE_LIMIT as u64,
        });
    }
    let n = points.len();
    let mut count = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            if points[i] == points[j] {
                return Err(Error::DuplicatePoint(points[i]));
            }
            for k in j + 1..n {
                count += collinear(points[i], points[j], points[k]) as u64;
            }
        }
    }
    Ok(count)
}

/// Every unordered collinear triple exactly once, members in increasing
/// norm-lexicographic order; triples are listed by their smallest member.
pub fn enumerate_collinear_triples(points: &[Point]) -> Result<Vec<[Point; 3]>> {
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::new();
    for i in 0..sorted.len() {
        let x = sorted[i];
        let mut keyed = sorted[i + 1..]
            .iter()
            .map(|&q| direction(x, q).map(|d| (d, q)))
            .collect::<Result<Vec<_>>>()?;
        // Stable sort keeps the members of each bucket in increasing order.
        keyed.sort_by_key(|&(d, _)| d);
        let mut start = 0;
        while start < keyed.len() {
            let mut end = start + 1;
            while end < keyed.len() && keyed[end].0 == keyed[start].0 {
                end += 1;
            }
            for j in start..end {
                for k in j + 1..end {
                    out.push([x, keyed[j].1, keyed[k].1]);
                }
            }
            start = end;
        }
    }
    Ok(out)
}

/// `Y_T`: collinear triples of the set inside `B_T = [1, 2^T]^2`.
pub fn triples_within_box(points: &[Point], t: ShellIndex) -> Result<u64> {
    let inside: Vec<Point> = points.iter().copied().filter(|p| p.in_box(t)).collect();
    count_collinear_triples(&inside)
}
