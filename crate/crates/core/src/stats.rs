use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

/// Cost counters for one query.
///
/// `distance_evaluations` counts unique point-to-query distance computations,
/// `points_visited` counts vertices whose neighborhood was expanded (or tree
/// nodes entered, for the kd-tree), and `layers_traversed` counts the layers
/// a layered descent walked through.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryStats {
    pub distance_evaluations: u64,
    pub points_visited: u64,
    pub layers_traversed: u64,
}

impl AddAssign for QueryStats {
    fn add_assign(&mut self, rhs: Self) {
        self.distance_evaluations += rhs.distance_evaluations;
        self.points_visited += rhs.points_visited;
        self.layers_traversed += rhs.layers_traversed;
    }
}
