//! Planar primitives: points, the `(dist2, id)` total order, and exact
//! orientation / in-circle predicates.
//!
//! The predicates are decided with adaptive-precision arithmetic, so their
//! answers are exact for every pair of finite `f64` inputs.

use std::cmp::Ordering;
use std::fmt;

use robust::Coord;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Stable identity of an indexed point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub u64);

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for PointId {
    fn from(v: u64) -> Self {
        PointId(v)
    }
}

/// A point in the plane. Coordinates are finite; use [`Point::try_new`] at
/// ingestion boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    /// Builds a point without validation.
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Validating constructor. `-0.0` is folded to `0.0` so that bitwise
    /// coordinate keys agree with `==`.
    pub fn try_new(x: f64, y: f64) -> Result<Self, Error> {
        if x.is_finite() && y.is_finite() {
            Ok(Point { x: x + 0.0, y: y + 0.0 })
        } else {
            Err(Error::NonFinite { x, y })
        }
    }

    /// Bit pattern used for exact duplicate detection.
    pub(crate) fn key(&self) -> (u64, u64) {
        ((self.x + 0.0).to_bits(), (self.y + 0.0).to_bits())
    }

    #[inline]
    fn coord(self) -> Coord<f64> {
        Coord { x: self.x, y: self.y }
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// Squared Euclidean distance.
#[inline]
pub fn dist2(a: Point, b: Point) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    dx * dx + dy * dy
}

/// Sort key for "nearest" comparisons: squared distance, then id.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistOrder {
    pub dist2: f64,
    pub id: PointId,
}

impl DistOrder {
    #[inline]
    pub fn new(dist2: f64, id: PointId) -> Self {
        DistOrder { dist2, id }
    }

    #[inline]
    pub fn between(q: Point, p: Point, id: PointId) -> Self {
        DistOrder { dist2: dist2(q, p), id }
    }
}

impl Eq for DistOrder {}

impl PartialOrd for DistOrder {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DistOrder {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2.total_cmp(&other.dist2).then_with(|| self.id.cmp(&other.id))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
    Collinear,
}

impl Orientation {
    pub fn reversed(self) -> Self {
        match self {
            Orientation::CounterClockwise => Orientation::Clockwise,
            Orientation::Clockwise => Orientation::CounterClockwise,
            Orientation::Collinear => Orientation::Collinear,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CirclePosition {
    Inside,
    On,
    Outside,
}

/// Exact sign of the determinant of `(b - a, c - a)`.
#[inline]
pub fn orient(a: Point, b: Point, c: Point) -> Orientation {
    let det = orient_det(a, b, c);
    if det > 0.0 {
        Orientation::CounterClockwise
    } else if det < 0.0 {
        Orientation::Clockwise
    } else {
        Orientation::Collinear
    }
}

/// Adaptive orientation determinant; only its sign is exact.
#[inline]
pub(crate) fn orient_det(a: Point, b: Point, c: Point) -> f64 {
    robust::orient2d(a.coord(), b.coord(), c.coord())
}

/// Adaptive in-circle determinant for a counter-clockwise `(a, b, c)`;
/// positive when `d` is strictly inside. Only the sign is exact.
#[inline]
pub(crate) fn in_circle_det(a: Point, b: Point, c: Point, d: Point) -> f64 {
    robust::incircle(a.coord(), b.coord(), c.coord(), d.coord())
}

/// Position of `d` relative to the circumcircle of `a`, `b`, `c`.
///
/// The triangle may be given in either orientation. A collinear triangle has
/// no circumcircle and yields [`Error::DegenerateTriangle`].
pub fn in_circle(a: Point, b: Point, c: Point, d: Point) -> Result<CirclePosition, Error> {
    let (a, b, c) = match orient(a, b, c) {
        Orientation::CounterClockwise => (a, b, c),
        Orientation::Clockwise => (a, c, b),
        Orientation::Collinear => return Err(Error::DegenerateTriangle),
    };
    let det = in_circle_det(a, b, c, d);
    Ok(if det > 0.0 {
        CirclePosition::Inside
    } else if det < 0.0 {
        CirclePosition::Outside
    } else {
        CirclePosition::On
    })
}

/// In-circle test with the cocircular tie rule applied, so it never answers
/// `On`. `(a, b, c)` must be counter-clockwise.
///
/// When `d` lies exactly on the circle, the four points are triangulated
/// with the diagonal incident to the smallest id among them. This is the
/// same as lowering the paraboloid lift of that point by an infinitesimal,
/// which keeps every local decision consistent with one global
/// triangulation.
pub(crate) fn in_circle_tiebroken(
    a: (Point, PointId),
    b: (Point, PointId),
    c: (Point, PointId),
    d: (Point, PointId),
) -> bool {
    let det = in_circle_det(a.0, b.0, c.0, d.0);
    if det != 0.0 {
        return det > 0.0;
    }
    let min = a.1.min(b.1).min(c.1).min(d.1);
    // Derivative of the determinant with respect to each lift is an
    // orientation of the other three points; lowering the lift flips it.
    let s = if min == d.1 {
        return true;
    } else if min == a.1 {
        orient_det(b.0, c.0, d.0)
    } else if min == b.1 {
        orient_det(c.0, a.0, d.0)
    } else {
        orient_det(a.0, b.0, d.0)
    };
    s < 0.0
}
