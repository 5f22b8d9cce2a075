//! The deletion construction and the classical baselines.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::{Point, PrimitiveDirection};
use crate::sampling::{PointSet, Provenance, SetKind};

/// Largest window accepted by [`greedy_construct`].
pub const GREEDY_MAX_WINDOW: u32 = 13;

/// Two points `y, z` with `y, z < x` (norm-lexicographic) collinear with
/// `points[index] = x`, if any. `points` must be sorted.
pub fn deletion_witness(points: &[Point], index: usize) -> Option<(Point, Point)> {
    let x = points[index];
    let mut keyed: Vec<(PrimitiveDirection, Point)> = points[..index]
        .iter()
        .map(|&q| {
            let d =
                PrimitiveDirection::canonical(q.x as i128 - x.x as i128, q.y as i128 - x.y as i128)
                    .expect("sorted point set has no duplicates");
            (d, q)
        })
        .collect();
    keyed.sort_unstable_by_key(|&(d, _)| d);
    keyed
        .windows(2)
        .find(|w| w[0].0 == w[1].0)
        .map(|w| (w[0].1, w[1].1))
}

/// Whether `points[index]` is the largest member of some collinear triple.
pub fn is_deleted(points: &[Point], index: usize) -> bool {
    deletion_witness(points, index).is_some()
}

/// Assembles `S` from per-point deletion flags (one per point of `q`).
pub fn assemble_survivors(q: &PointSet, deleted: &[bool]) -> Result<PointSet> {
    if deleted.len() != q.len() {
        return Err(Error::Invariant(
            "deletion flags do not match the point set",
        ));
    }
    let kept: Vec<Point> = q
        .points()
        .iter()
        .zip(deleted)
        .filter(|(_, &d)| !d)
        .map(|(&p, _)| p)
        .collect();
    let src = q.provenance();
    let provenance = Provenance {
        kind: SetKind::Constructed,
        seed: src.seed,
        c: src.c,
        window_exponent: src.window_exponent,
        method: Some("delete-max".to_string()),
    };
    PointSet::new(kept, provenance)
}

/// Removes from `q` every point that is the norm-lexicographic maximum of at
/// least one collinear triple of `q`. The result has no three collinear
/// points, and every deletion inside `R_T` is charged to a distinct triple
/// inside `B_{T+1}`.
pub fn delete_max_of_triples(q: &PointSet) -> Result<PointSet> {
    let points = q.points();
    let deleted: Vec<bool> = (0..points.len()).map(|i| is_deleted(points, i)).collect();
    assemble_survivors(q, &deleted)
}

/// Deterministic Miller-Rabin, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &BASES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Smallest `W` with `n <= 2^W - 1`.
pub fn window_exponent_for(n: u64) -> u32 {
    64 - n.leading_zeros()
}

/// `{(t, t^2 mod p) : t in [p]}` with residues represented in `1..=p`.
pub fn modular_parabola(p: u64) -> Result<PointSet> {
    if p >= 1 << 32 {
        return Err(Error::Guard {
            what: "parabola modulus",
            value: p,
            max: (1 << 32) - 1,
        });
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let points = (1..=p)
        .map(|t| {
            let r = ((t * t - 1) % p) + 1;
            Point::new(t as i64, r as i64)
        })
        .collect();
    let provenance = Provenance {
        kind: SetKind::Baseline,
        seed: None,
        c: None,
        window_exponent: window_exponent_for(p),
        method: Some(alloc::format!("parabola:p={p}")),
    };
    PointSet::from_unsorted(points, provenance)
}

/// Scans `[1, 2^W - 1]^2` in norm-lexicographic order and keeps each point
/// that is not collinear with two points kept before it.
///
/// Every point on a line through two kept points is marked in a bitmap as
/// soon as the second of them is kept, so each candidate is tested in
/// constant time.
pub fn greedy_construct(window_exponent: u32) -> Result<PointSet> {
    if !(1..=GREEDY_MAX_WINDOW).contains(&window_exponent) {
        return Err(Error::Guard {
            what: "greedy window exponent",
            value: window_exponent as u64,
            max: GREEDY_MAX_WINDOW as u64,
        });
    }
    let n = (1i64 << window_exponent) - 1;
    let idx = |p: Point| ((p.x - 1) * n + (p.y - 1)) as usize;
    let mut blocked = vec![0u64; ((n * n) as usize).div_ceil(64)];
    let mut accepted: Vec<Point> = Vec::new();
    let block = |blocked: &mut [u64], a: Point, z: Point| {
        let d = PrimitiveDirection::canonical((z.x - a.x) as i128, (z.y - a.y) as i128)
            .expect("distinct points");
        let (dx, dy) = (d.a(), d.b());
        for sign in [1i64, -1] {
            let mut q = a;
            loop {
                let i = idx(q);
                blocked[i / 64] |= 1 << (i % 64);
                let next = Point::new(q.x + sign * dx, q.y + sign * dy);
                if !next.in_square(n as u64) {
                    break;
                }
                q = next;
            }
        }
    };
    for r in 1..=n {
        let shell = (1..r)
            .map(|x| Point::new(x, r))
            .chain((1..=r).map(|y| Point::new(r, y)));
        for z in shell {
            let i = idx(z);
            if blocked[i / 64] >> (i % 64) & 1 == 1 {
                continue;
            }
            for &a in &accepted {
                block(&mut blocked, a, z);
            }
            accepted.push(z);
        }
    }
    let provenance = Provenance {
        kind: SetKind::Baseline,
        seed: None,
        c: None,
        window_exponent,
        method: Some("greedy".to_string()),
    };
    PointSet::new(accepted, provenance)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensityPoint {
    pub n: u64,
    pub count: u64,
    /// `count * sqrt(ln n) / n`.
    pub ratio: f64,
}

/// Largest box side for which density claims about `s` are meaningful.
///
/// A windowed random construction only sees triples inside its window, so
/// claims are restricted to `[1, 2^(W-1)]^2`; baselines are exact on their
/// whole window.
pub fn validity_limit(s: &PointSet) -> u64 {
    let prov = s.provenance();
    match prov.kind {
        SetKind::Baseline => prov.window_max() as u64,
        SetKind::Sampled | SetKind::Constructed => 1u64 << prov.window_exponent.saturating_sub(1),
    }
}

/// `|S ∩ [1, n]^2|` and the normalized ratio for each requested `n >= 2`.
pub fn density_profile(s: &PointSet, ns: &[u64]) -> Result<Vec<DensityPoint>> {
    let max = validity_limit(s);
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        if n < 2 || n > max {
            return Err(Error::OutsideValidity { n, max });
        }
        let count = s.points().iter().filter(|p| p.in_square(n)).count() as u64;
        let ratio = count as f64 * libm::sqrt(libm::log(n as f64)) / n as f64;
        out.push(DensityPoint { n, count, ratio });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::collinear;
    use crate::triples::{count_collinear_triples, count_collinear_triples_bruteforce};

    fn p(x: i64, y: i64) -> Point {
        Point::new(x, y)
    }

    fn set(points: Vec<Point>, w: u32) -> PointSet {
        let prov = Provenance {
            kind: SetKind::Sampled,
            seed: Some(0),
            c: Some(0.1),
            window_exponent: w,
            method: None,
        };
        PointSet::from_unsorted(points, prov).unwrap()
    }

    #[test]
    fn deletes_largest_member() {
        let q = set(vec![p(1, 1), p(2, 2), p(3, 3)], 3);
        assert_eq!(
            delete_max_of_triples(&q).unwrap().points(),
            &[p(1, 1), p(2, 2)]
        );
        let q = set(vec![p(1, 1), p(1, 2), p(2, 1)], 3);
        assert_eq!(delete_max_of_triples(&q).unwrap().points(), q.points());
        let q = set(vec![p(1, 3), p(2, 2), p(3, 1), p(3, 3)], 3);
        let s = delete_max_of_triples(&q).unwrap();
        assert_eq!(s.points(), &[p(2, 2), p(1, 3), p(3, 3)]);
        assert_eq!(s.provenance().kind, SetKind::Constructed);
    }

    #[test]
    fn witnesses_are_smaller_and_collinear() {
        let q = set(
            vec![
                p(1, 1),
                p(2, 2),
                p(3, 3),
                p(1, 2),
                p(1, 3),
                p(5, 5),
                p(3, 1),
            ],
            3,
        );
        let pts = q.points();
        for i in 0..pts.len() {
            if let Some((y, z)) = deletion_witness(pts, i) {
                assert!(y < pts[i] && z < pts[i] && y != z);
                assert!(collinear(pts[i], y, z));
            }
        }
    }

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime(1009));
        assert!(!is_prime(100));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
        assert!(is_prime(4_294_967_291));
    }

    #[test]
    fn parabolas() {
        assert_eq!(modular_parabola(2).unwrap().points(), &[p(1, 1), p(2, 2)]);
        let mut five = modular_parabola(5).unwrap().into_points();
        five.sort_by_key(|q| q.x);
        assert_eq!(five, vec![p(1, 1), p(2, 4), p(3, 4), p(4, 1), p(5, 5)]);
        assert_eq!(modular_parabola(100), Err(Error::NotPrime(100)));
        assert_eq!(modular_parabola(1), Err(Error::NotPrime(1)));
        let seven = modular_parabola(7).unwrap();
        assert_eq!(count_collinear_triples_bruteforce(seven.points()), Ok(0));
        let big = modular_parabola(101).unwrap();
        assert_eq!(big.len(), 101);
        assert_eq!(count_collinear_triples_bruteforce(big.points()), Ok(0));
    }

    #[test]
    fn greedy_small_windows() {
        assert_eq!(greedy_construct(1).unwrap().points(), &[p(1, 1)]);
        // Hand scan of the 3x3 grid: (1,1), (1,2), (2,1), (2,2) are kept and
        // every norm-3 point completes a row, column or diagonal.
        assert_eq!(
            greedy_construct(2).unwrap().points(),
            &[p(1, 1), p(1, 2), p(2, 1), p(2, 2)]
        );
        for w in 1..=6 {
            let g = greedy_construct(w).unwrap();
            assert_eq!(count_collinear_triples(g.points()), Ok(0));
        }
        assert!(greedy_construct(14).is_err());
        assert!(greedy_construct(0).is_err());
    }

    #[test]
    fn greedy_matches_definition() {
        // Direct quadratic rescan: each kept point is not collinear with any
        // two earlier kept points; each rejected one is.
        let w = 4;
        let g = greedy_construct(w).unwrap();
        let n = (1 << w) - 1;
        let mut order: Vec<Point> = (1..=n)
            .flat_map(|x| (1..=n).map(move |y| p(x, y)))
            .collect();
        order.sort();
        let mut kept: Vec<Point> = Vec::new();
        for z in order {
            let bad = (0..kept.len())
                .any(|i| (i + 1..kept.len()).any(|j| collinear(kept[i], kept[j], z)));
            if !bad {
                kept.push(z);
            }
        }
        assert_eq!(g.points(), &kept[..]);
    }

    #[test]
    fn densities() {
        let empty = set(vec![], 8);
        let d = density_profile(&empty, &[16, 64, 128]).unwrap();
        assert!(d.iter().all(|e| e.count == 0 && e.ratio == 0.0));
        assert!(density_profile(&empty, &[129]).is_err());
        assert!(density_profile(&empty, &[1]).is_err());
        let par = modular_parabola(101).unwrap();
        let d = density_profile(&par, &[101]).unwrap();
        assert_eq!(d[0].count, 101);
        assert!((d[0].ratio - 101f64.ln().sqrt()).abs() < 1e-12);
        assert!((d[0].ratio - 2.148).abs() < 1e-3);
        let d = density_profile(&par, &[2, 10, 50, 101]).unwrap();
        assert!(d.windows(2).all(|w| w[0].count <= w[1].count));
    }
}
