//! Dataset ingestion and index persistence.
//!
//! Point files are comma-separated text with one point per record, either
//! `id,x,y` or `x,y`. Lines starting with `#` are comments and a leading
//! header line such as `id,x,y` is skipped. Records of the `x,y` form get
//! ids assigned in file order. Non-finite coordinates, repeated
//! coordinates, repeated ids and malformed records are rejected with the
//! offending line number.

mod snapshot;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::geometry::{Point, PointId};

pub use self::snapshot::{load_snapshot, save_snapshot, Snapshot, SNAPSHOT_FORMAT, SNAPSHOT_VERSION};

/// One parsed point record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointRecord {
    /// 1-based line number in the source.
    pub line: usize,
    pub id: Option<PointId>,
    pub point: Point,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(source: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        message: message.into(),
    }
}

/// Non-empty, non-comment lines of `input` as `(line number, fields)`.
fn records(input: impl Read, source: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line.map_err(|e| parse_error(source, i + 1, e.to_string()))?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        out.push((i + 1, text.split(',').map(|f| f.trim().to_string()).collect()));
    }
    Ok(out)
}

fn looks_like_header(fields: &[String]) -> bool {
    fields
        .iter()
        .all(|f| !f.is_empty() && !f.chars().any(|c| c.is_ascii_digit()))
}

fn parse_coord(source: &str, line: usize, field: &str, name: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_error(source, line, format!("invalid {name} coordinate {field:?}")))?;
    if !v.is_finite() {
        return Err(parse_error(
            source,
            line,
            format!("non-finite {name} coordinate {field:?}"),
        ));
    }
    Ok(v)
}

/// Parses point records from `input`; `source` names the input in errors.
pub fn parse_point_records<R: Read>(input: R, source: &str) -> Result<Vec<PointRecord>> {
    let mut out: Vec<PointRecord> = Vec::new();
    let mut by_coord: FxHashMap<(u64, u64), usize> = FxHashMap::default();
    let mut by_id: FxHashMap<PointId, usize> = FxHashMap::default();
    let mut width = None;
    for (i, (line, fields)) in records(input, source)?.into_iter().enumerate() {
        if i == 0 && looks_like_header(&fields) {
            continue;
        }
        if fields.len() != 2 && fields.len() != 3 {
            return Err(parse_error(
                source,
                line,
                format!("expected `id,x,y` or `x,y`, found {} fields", fields.len()),
            ));
        }
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(parse_error(source, line, "records mix `id,x,y` and `x,y` forms"));
            }
            Some(_) => {}
        }
        let (id, xs, ys) = if fields.len() == 3 {
            let id: u64 = fields[0]
                .parse()
                .map_err(|_| parse_error(source, line, format!("invalid id {:?}", fields[0])))?;
            (Some(PointId(id)), &fields[1], &fields[2])
        } else {
            (None, &fields[0], &fields[1])
        };
        let point = Point::try_new(parse_coord(source, line, xs, "x")?, parse_coord(source, line, ys, "y")?)
            .expect("coordinates checked finite");
        if let Some(prev) = by_coord.insert(point.key(), line) {
            return Err(parse_error(
                source,
                line,
                format!("duplicate coordinates ({xs}, {ys}), first seen on line {prev}"),
            ));
        }
        if let Some(id) = id {
            if let Some(prev) = by_id.insert(id, line) {
                return Err(parse_error(
                    source,
                    line,
                    format!("duplicate id {id}, first seen on line {prev}"),
                ));
            }
        }
        out.push(PointRecord { line, id, point });
    }
    Ok(out)
}

pub fn read_point_records(path: &Path) -> Result<Vec<PointRecord>> {
    parse_point_records(open(path)?, &path.display().to_string())
}

/// Gives every record an id: its own, or `first_id`, `first_id + 1`, ... in
/// file order for records without one.
pub fn assign_ids(records: &[PointRecord], first_id: u64) -> Vec<(PointId, Point)> {
    let mut next = first_id;
    records
        .iter()
        .map(|r| {
            let id = r.id.unwrap_or_else(|| {
                next += 1;
                PointId(next - 1)
            });
            (id, r.point)
        })
        .collect()
}

/// Reads a point file, numbering `x,y` records from 0.
pub fn read_points(path: &Path) -> Result<Vec<(PointId, Point)>> {
    Ok(assign_ids(&read_point_records(path)?, 0))
}

/// Writes `id,x,y` records under a header line. Coordinates use the
/// shortest decimal form that reads back to the same value.
pub fn write_points_to<W: Write>(mut out: W, points: &[(PointId, Point)]) -> std::io::Result<()> {
    writeln!(out, "id,x,y")?;
    for &(id, p) in points {
        writeln!(out, "{id},{},{}", p.x, p.y)?;
    }
    out.flush()
}

pub fn write_points(path: &Path, points: &[(PointId, Point)]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_points_to(BufWriter::new(file), points).map_err(io_err)
}

/// Parses a list of ids, one per line, with `#` comments.
pub fn parse_ids<R: Read>(input: R, source: &str) -> Result<Vec<PointId>> {
    let mut out = Vec::new();
    for (line, rec) in records(input, source)? {
        if rec.len() != 1 {
            return Err(parse_error(
                source,
                line,
                format!("expected one id, found {} fields", rec.len()),
            ));
        }
        let id: u64 = rec[0]
            .parse()
            .map_err(|_| parse_error(source, line, format!("invalid id {:?}", rec[0])))?;
        out.push(PointId(id));
    }
    Ok(out)
}

pub fn read_ids(path: &Path) -> Result<Vec<PointId>> {
    parse_ids(open(path)?, &path.display().to_string())
}

/// Parses a query location written as `x,y`.
pub fn parse_query(text: &str) -> Result<Point> {
    let bad = |m: String| Error::InvalidParameter(format!("query {text:?}: {m}"));
    let (xs, ys) = text.split_once(',').ok_or_else(|| bad("expected `x,y`".into()))?;
    let coord = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| bad(format!("invalid coordinate {:?}", s.trim())))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad(format!("non-finite coordinate {:?}", s.trim())))
        }
    };
    Point::try_new(coord(xs)?, coord(ys)?)
}
