//! Exact nearest-neighbor and k-nearest-neighbor search over dynamic planar
//! point sets with a multi-layer Voronoi diagram index.
//!
//! The index keeps a stack of Delaunay triangulations (the duals of Voronoi
//! diagrams). Layer 0 holds every point and each layer above holds a random
//! `1/k` sample of the one below. A query descends from the top layer,
//! greedily walking each layer toward the query and seeding the next layer's
//! walk with the result, much like a skip list.
//!
//! ```
//! use mvd::{MvdIndex, Point, PointId};
//!
//! let pts: Vec<(PointId, Point)> = (0..100u64)
//!     .map(|i| (PointId(i), Point::new((i % 10) as f64, (i / 10) as f64 + 0.01 * i as f64)))
//!     .collect();
//! let index = MvdIndex::build(&pts, 4, 7).unwrap();
//! let (nearest, _stats) = index.nn(Point::new(3.1, 4.2)).unwrap();
//! assert_eq!(nearest, PointId(43));
//! ```

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod delaunay;
pub mod error;
pub mod geometry;
pub mod io;
pub mod mvd;
pub mod stats;

pub use crate::delaunay::{NeighborSet, Triangulation};
pub use crate::error::{Error, Result};
pub use crate::geometry::{dist2, in_circle, orient, CirclePosition, DistOrder, Orientation, Point, PointId};
pub use crate::mvd::{vd_nn, CandidateList, KnnResult, MvdConfig, MvdIndex, Neighbor};
pub use crate::stats::QueryStats;
