use core::fmt;

use crate::geom::Point;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A point with infinity norm 0 has no dyadic shell.
    ZeroNorm,
    /// The zero vector has no direction.
    ZeroVector,
    /// Two equal points do not determine a line.
    CoincidentPoints(Point),
    PointNotOnLine(Point),
    PointOutsideBox {
        point: Point,
        exponent: u32,
    },
    /// The constant `c` must be finite and positive (or zero where allowed).
    InvalidConstant(f64),
    /// A size or exponent exceeded a computational guard.
    Guard {
        what: &'static str,
        value: u64,
        max: u64,
    },
    DuplicatePoint(Point),
    Unsorted {
        before: Point,
        after: Point,
    },
    OutsideWindow {
        point: Point,
        window_exponent: u32,
    },
    NotPrime(u64),
    /// A box size outside the region where the windowed construction is exact.
    OutsideValidity {
        n: u64,
        max: u64,
    },
    EmptySeeds,
    /// A shell index or count whose value does not fit in 64 bits.
    Overflow(&'static str),
    /// Internal consistency check failed.
    Invariant(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroNorm => write!(f, "point has infinity norm 0 and lies in no shell"),
            Error::ZeroVector => write!(f, "zero vector has no direction"),
            Error::CoincidentPoints(p) => {
                write!(f, "points coincide at ({}, {}); no unique line", p.x, p.y)
            }
            Error::PointNotOnLine(p) => write!(f, "point ({}, {}) is not on the line", p.x, p.y),
            Error::PointOutsideBox { point, exponent } => write!(
                f,
                "point ({}, {}) lies outside the box [1, 2^{}]^2",
                point.x, point.y, exponent
            ),
            Error::InvalidConstant(c) => write!(f, "invalid constant c = {c}; must be positive"),
            Error::Guard { what, value, max } => {
                write!(f, "{what} = {value} exceeds the limit {max}")
            }
            Error::DuplicatePoint(p) => write!(f, "duplicate point ({}, {})", p.x, p.y),
            Error::Unsorted { before, after } => write!(
                f,
                "points out of order: ({}, {}) listed before ({}, {})",
                before.x, before.y, after.x, after.y
            ),
            Error::OutsideWindow {
                point,
                window_exponent,
            } => write!(
                f,
                "point ({}, {}) lies outside the window [1, 2^{} - 1]^2",
                point.x, point.y, window_exponent
            ),
            Error::NotPrime(p) => write!(f, "{p} is not prime"),
            Error::OutsideValidity { n, max } => write!(
                f,
                "box size {n} is outside the validity region [2, {max}] of the window"
            ),
            Error::EmptySeeds => write!(f, "seed list is empty"),
            Error::Overflow(what) => write!(f, "{what} overflows 64 bits"),
            Error::Invariant(what) => write!(f, "internal invariant violated: {what}"),
        }
    }
}

impl core::error::Error for Error {}
