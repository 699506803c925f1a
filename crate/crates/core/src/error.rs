use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::{Point, PointId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite coordinate ({x}, {y})")]
    NonFinite { x: f64, y: f64 },

    #[error("duplicate coordinates: point {second} coincides with point {first}")]
    DuplicatePoint { first: PointId, second: PointId },

    #[error("point id {0} is already in use")]
    IdCollision(PointId),

    #[error("unknown point id {0}")]
    UnknownId(PointId),

    #[error("the index is empty")]
    Empty,

    #[error("collinear triangle has no circumcircle")]
    DegenerateTriangle,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(
        "oracle mismatch for {index} at n={n}, k_query={k_query}, query ({}, {}): expected {expected:?}, got {got:?}",
        query.x, query.y
    )]
    OracleMismatch {
        index: String,
        n: usize,
        k_query: usize,
        query: Point,
        expected: Vec<PointId>,
        got: Vec<PointId>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
