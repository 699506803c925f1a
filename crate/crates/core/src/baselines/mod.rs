//! Reference searchers: the exhaustive linear scan used as the correctness
//! oracle, and a bulk-built kd-tree used as the performance baseline.

mod kdtree;
mod linear;

pub use self::kdtree::{KdTree, DEFAULT_LEAF_CAPACITY};
pub use self::linear::LinearScan;

use crate::error::Result;
use crate::geometry::{Point, PointId};
use crate::mvd::{MvdIndex, Neighbor};
use crate::stats::QueryStats;

/// Common query surface of every index the benchmark compares.
pub trait SpatialIndex: Send + Sync {
    fn name(&self) -> &'static str;

    fn nn(&self, q: Point) -> Result<(PointId, QueryStats)>;

    fn knn(&self, q: Point, k_query: usize) -> Result<(Vec<Neighbor>, QueryStats)>;
}

impl SpatialIndex for MvdIndex {
    fn name(&self) -> &'static str {
        "mvd"
    }

    fn nn(&self, q: Point) -> Result<(PointId, QueryStats)> {
        MvdIndex::nn(self, q)
    }

    fn knn(&self, q: Point, k_query: usize) -> Result<(Vec<Neighbor>, QueryStats)> {
        let r = MvdIndex::knn(self, q, k_query)?;
        Ok((r.neighbors, r.stats))
    }
}
