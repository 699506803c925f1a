use crate::error::{Error, Result};
use crate::geometry::{dist2, DistOrder, Point, PointId};
use crate::mvd::Neighbor;
use crate::stats::QueryStats;

use super::SpatialIndex;

/// Full scan over every point. Answers depend only on the `(dist2, id)`
/// order, never on storage order.
#[derive(Clone, Debug, Default)]
pub struct LinearScan {
    points: Vec<(PointId, Point)>,
}

impl LinearScan {
    pub fn new(points: Vec<(PointId, Point)>) -> Self {
        LinearScan { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn scan_nn(&self, q: Point) -> Result<PointId> {
        self.points
            .iter()
            .map(|&(id, p)| DistOrder::new(dist2(q, p), id))
            .min()
            .map(|d| d.id)
            .ok_or(Error::Empty)
    }

    /// The `k_query` nearest points ascending by `(dist2, id)`, or every
    /// point when fewer exist.
    pub fn scan_knn(&self, q: Point, k_query: usize) -> Result<Vec<Neighbor>> {
        if k_query < 1 {
            return Err(Error::InvalidParameter("k_query must be at least 1".into()));
        }
        if self.points.is_empty() {
            return Err(Error::Empty);
        }
        let mut all: Vec<DistOrder> = self
            .points
            .iter()
            .map(|&(id, p)| DistOrder::new(dist2(q, p), id))
            .collect();
        if k_query < all.len() {
            all.select_nth_unstable(k_query - 1);
            all.truncate(k_query);
        }
        all.sort_unstable();
        Ok(all
            .into_iter()
            .map(|d| Neighbor {
                id: d.id,
                dist2: d.dist2,
            })
            .collect())
    }

    fn stats(&self) -> QueryStats {
        let n = self.points.len() as u64;
        QueryStats {
            distance_evaluations: n,
            points_visited: n,
            layers_traversed: 0,
        }
    }
}

impl SpatialIndex for LinearScan {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn nn(&self, q: Point) -> Result<(PointId, QueryStats)> {
        Ok((self.scan_nn(q)?, self.stats()))
    }

    fn knn(&self, q: Point, k_query: usize) -> Result<(Vec<Neighbor>, QueryStats)> {
        Ok((self.scan_knn(q, k_query)?, self.stats()))
    }
}
