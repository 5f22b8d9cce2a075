//! The point-set text format.
//!
//! ```text
//! #no3l v1
//! #meta {"kind":"sampled","seed":42,"c":0.1,"window_exponent":10}
//! 1    1
//! 2    3
//! ```
//!
//! Points follow one per line as `x<TAB>y`, strictly increasing in the
//! norm-lexicographic order `(|p|_inf, x, y)`. Parsers reject unsorted or
//! duplicate entries and points outside the declared window.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use no3l_core::{Point, PointSet, Provenance};

use crate::error::{Error, Result};

pub const MAGIC: &str = "#no3l v1";
const META_PREFIX: &str = "#meta ";

pub fn to_string(set: &PointSet) -> Result<String> {
    let mut out = String::with_capacity(16 * set.len() + 128);
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(META_PREFIX);
    out.push_str(&serde_json::to_string(set.provenance())?);
    out.push('\n');
    for p in set.points() {
        writeln!(out, "{}\t{}", p.x, p.y).expect("writing to a String");
    }
    Ok(out)
}

/// Parses a point set; `origin` names the source in error messages.
pub fn parse(text: &str, origin: &str) -> Result<PointSet> {
    let err = |line: usize, message: String| Error::Format {
        origin: origin.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((n, other)) => return Err(err(n, format!("expected `{MAGIC}`, found `{other}`"))),
        None => return Err(err(1, "empty file".into())),
    }
    let provenance: Provenance = match lines.next() {
        Some((n, l)) => {
            let json = l
                .strip_prefix(META_PREFIX)
                .ok_or_else(|| err(n, "expected `#meta {...}` line".into()))?;
            serde_json::from_str(json).map_err(|e| err(n, format!("bad metadata: {e}")))?
        }
        None => return Err(err(2, "missing `#meta` line".into())),
    };
    let mut points = Vec::new();
    for (n, l) in lines {
        if l.is_empty() {
            continue;
        }
        let mut fields = l.split('\t');
        let (Some(x), Some(y), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err(n, format!("expected `x<TAB>y`, found `{l}`")));
        };
        let coord = |s: &str| {
            s.parse::<i64>()
                .map_err(|e| err(n, format!("bad coordinate `{s}`: {e}")))
        };
        let p = Point::new(coord(x)?, coord(y)?);
        if let Some(&prev) = points.last() {
            if p <= prev {
                let what = if p == prev { "duplicate" } else { "unsorted" };
                return Err(err(n, format!("{what} point ({}, {})", p.x, p.y)));
            }
        }
        points.push(p);
    }
    PointSet::new(points, provenance).map_err(|e| err(0, e.to_string()))
}

pub fn write(set: &PointSet, path: &Path) -> Result<()> {
    fs::write(path, to_string(set)?).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<PointSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, &path.display().to_string())
}
