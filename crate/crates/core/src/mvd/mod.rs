//! The multi-layer Voronoi diagram index.
//!
//! Layer 0 triangulates every point. Each higher layer triangulates a
//! uniform random sample of roughly `1/k` of the layer below, and every
//! layer's id set is a subset of the one beneath it. A nearest-neighbor
//! query greedily walks the top layer, then uses the result as the starting
//! vertex for the walk one layer down, all the way to layer 0. Since the
//! Delaunay graph has no false local minima for greedy descent, the walk on
//! layer 0 ends at the exact nearest neighbor.

mod candidates;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

pub use self::candidates::CandidateList;
use crate::delaunay::Triangulation;
use crate::error::{Error, Result};
use crate::geometry::{dist2, DistOrder, Point, PointId};
use crate::stats::QueryStats;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_201_231;
/// Construction parameter used in the reference experiments.
pub const DEFAULT_K: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MvdConfig {
    /// Expected size ratio between consecutive layers; at least 2.
    pub k: usize,
    pub seed: u64,
    /// Enables the random demotion step of deletion, which removes a point
    /// from a layer that did not contain the deleted one to keep layer
    /// ratios near `k`.
    pub demotion: bool,
}

impl Default for MvdConfig {
    fn default() -> Self {
        MvdConfig {
            k: DEFAULT_K,
            seed: DEFAULT_SEED,
            demotion: true,
        }
    }
}

impl MvdConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        MvdConfig {
            k,
            seed,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidParameter(format!(
                "construction parameter k must be at least 2, got {}",
                self.k
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Neighbor {
    pub id: PointId,
    pub dist2: f64,
}

impl Neighbor {
    pub fn distance(&self) -> f64 {
        self.dist2.sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KnnResult {
    /// Ascending by `(dist2, id)`.
    pub neighbors: Vec<Neighbor>,
    pub stats: QueryStats,
    /// Fewer points are indexed than were requested; every point is
    /// returned.
    pub exhausted: bool,
}

impl KnnResult {
    pub fn ids(&self) -> Vec<PointId> {
        self.neighbors.iter().map(|n| n.id).collect()
    }
}

#[derive(Clone, Debug)]
pub struct MvdIndex {
    layers: Vec<Triangulation>,
    config: MvdConfig,
    rng: ChaCha8Rng,
    next_id: u64,
    /// Smallest id of the top layer; every query starts there.
    top_start: Option<PointId>,
}

impl MvdIndex {
    /// An empty index.
    pub fn new(config: MvdConfig) -> Result<Self> {
        config.validate()?;
        Ok(MvdIndex {
            layers: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            next_id: 0,
            top_start: None,
        })
    }

    pub fn build(points: &[(PointId, Point)], k: usize, seed: u64) -> Result<Self> {
        Self::build_with(points, MvdConfig::new(k, seed))
    }

    /// Builds every layer: layer 0 over all points, then repeatedly samples
    /// `ceil(len / k)` ids without replacement from the previous layer until
    /// a layer holds at most `k` points.
    pub fn build_with(points: &[(PointId, Point)], config: MvdConfig) -> Result<Self> {
        let mut idx = Self::new(config)?;
        if points.is_empty() {
            return Ok(idx);
        }
        for &(_, p) in points {
            Point::try_new(p.x, p.y)?;
        }
        let base = Triangulation::bulk_build(points)?;
        let coords: FxHashMap<PointId, Point> = points.iter().copied().collect();
        let mut ids: Vec<PointId> = points.iter().map(|e| e.0).collect();
        ids.sort_unstable();
        idx.next_id = ids.last().map_or(0, |m| m.0 + 1);
        idx.layers.push(base);
        let k = config.k;
        while ids.len() > k {
            let m = ids.len().div_ceil(k);
            let mut sample: Vec<PointId> = index::sample(&mut idx.rng, ids.len(), m)
                .into_iter()
                .map(|i| ids[i])
                .collect();
            sample.sort_unstable();
            let pts: Vec<(PointId, Point)> = sample.iter().map(|&id| (id, coords[&id])).collect();
            idx.layers.push(Triangulation::bulk_build(&pts)?);
            ids = sample;
        }
        idx.refresh_top_start();
        Ok(idx)
    }

    /// Reassembles an index from stored per-layer id lists. Triangulations
    /// are rebuilt, which is deterministic thanks to the cocircular tie rule.
    pub(crate) fn from_parts(
        config: MvdConfig,
        points: &[(PointId, Point)],
        layer_ids: &[Vec<PointId>],
        next_id: u64,
        rng_stream: u64,
    ) -> Result<Self> {
        let mut idx = Self::new(config)?;
        idx.rng.set_stream(rng_stream);
        idx.next_id = next_id;
        if points.is_empty() {
            return Ok(idx);
        }
        let coords: FxHashMap<PointId, Point> = points.iter().copied().collect();
        for (i, ids) in layer_ids.iter().enumerate() {
            if ids.is_empty() {
                return Err(Error::Snapshot(format!("layer {i} is empty")));
            }
            let pts = ids
                .iter()
                .map(|id| {
                    coords
                        .get(id)
                        .map(|&p| (*id, p))
                        .ok_or_else(|| Error::Snapshot(format!("layer {i} names unknown point {id}")))
                })
                .collect::<Result<Vec<_>>>()?;
            idx.layers.push(Triangulation::bulk_build(&pts)?);
        }
        if idx.layers.first().map(Triangulation::len) != Some(points.len()) {
            return Err(Error::Snapshot("layer 0 must contain every point".into()));
        }
        idx.check_nesting().map_err(Error::Snapshot)?;
        idx.refresh_top_start();
        Ok(idx)
    }

    /// Selects the random stream used by later inserts and deletes.
    pub fn set_rng_stream(&mut self, stream: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        self.rng.set_stream(stream);
    }

    pub fn config(&self) -> MvdConfig {
        self.config
    }

    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn len(&self) -> usize {
        self.layers.first().map_or(0, Triangulation::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Smallest id never handed out; ids are not reused.
    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn layers(&self) -> &[Triangulation] {
        &self.layers
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Triangulation::len).collect()
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.layers.first().is_some_and(|l| l.contains(id))
    }

    pub fn point(&self, id: PointId) -> Option<Point> {
        self.layers.first().and_then(|l| l.point(id))
    }

    /// All points sorted by id.
    pub fn points(&self) -> Vec<(PointId, Point)> {
        self.layers.first().map_or_else(Vec::new, Triangulation::points)
    }

    /// Verifies that each layer's ids are a subset of the layer below.
    pub fn check_nesting(&self) -> std::result::Result<(), String> {
        for (i, pair) in self.layers.windows(2).enumerate() {
            if let Some(id) = pair[1].ids().find(|&id| !pair[0].contains(id)) {
                return Err(format!("point {id} is in layer {} but not in layer {i}", i + 1));
            }
        }
        Ok(())
    }

    /// Exact nearest neighbor of `q`.
    pub fn nn(&self, q: Point) -> Result<(PointId, QueryStats)> {
        let mut stats = QueryStats::default();
        let path = self.descend(q, &mut stats)?;
        Ok((self.layers[0].id_of(path[0]), stats))
    }

    /// The `k_query` nearest points, ascending by `(dist2, id)`.
    ///
    /// Starts from the nearest neighbor and, for each rank that becomes
    /// final, merges that point's layer-0 Delaunay neighbors into a sorted
    /// candidate list of length `k_query`. The next-nearest point is always
    /// a neighbor of one of the points already ranked, so once ranks
    /// `0..r` have been expanded, rank `r` is final.
    pub fn knn(&self, q: Point, k_query: usize) -> Result<KnnResult> {
        if k_query < 1 {
            return Err(Error::InvalidParameter("k_query must be at least 1".into()));
        }
        let mut stats = QueryStats::default();
        let path = self.descend(q, &mut stats)?;
        let base = &self.layers[0];
        let first = path[0];
        let mut cand = CandidateList::new(k_query);
        cand.insert(DistOrder::new(dist2(q, base.point_of(first)), base.id_of(first)));
        let mut slots: FxHashMap<PointId, u32> = FxHashMap::default();
        slots.insert(base.id_of(first), first);
        let mut visited: FxHashSet<u32> = FxHashSet::default();
        visited.insert(first);

        let mut rank = 0;
        while rank + 1 < k_query && rank < cand.len() {
            let center = slots[&cand.as_slice()[rank].id];
            stats.points_visited += 1;
            base.for_each_neighbor_slot(center, |n| {
                if visited.insert(n) {
                    stats.distance_evaluations += 1;
                    let d = DistOrder::new(dist2(q, base.point_of(n)), base.id_of(n));
                    if cand.insert(d) {
                        slots.insert(d.id, n);
                    }
                }
            });
            rank += 1;
        }
        let neighbors: Vec<Neighbor> = cand
            .into_vec()
            .into_iter()
            .map(|d| Neighbor {
                id: d.id,
                dist2: d.dist2,
            })
            .collect();
        Ok(KnnResult {
            exhausted: neighbors.len() < k_query,
            neighbors,
            stats,
        })
    }

    /// Inserts `p` into layer 0, then keeps promoting it one layer up with
    /// probability `1/k` per layer. Promotion past the top layer appends a
    /// new layer holding just `p`.
    pub fn insert(&mut self, id: PointId, p: Point) -> Result<()> {
        let p = Point::try_new(p.x, p.y)?;
        if self.layers.is_empty() {
            let mut layer = Triangulation::new();
            layer.insert(id, p, None)?;
            self.layers.push(layer);
            self.next_id = self.next_id.max(id.0 + 1);
            self.top_start = Some(id);
            // a second layer would duplicate this one
            return Ok(());
        }
        if self.layers[0].contains(id) {
            return Err(Error::IdCollision(id));
        }
        let mut stats = QueryStats::default();
        let path: Vec<PointId> = self
            .descend(p, &mut stats)?
            .into_iter()
            .enumerate()
            .map(|(i, s)| self.layers[i].id_of(s))
            .collect();
        if self.layers[0].point(path[0]) == Some(p) {
            return Err(Error::DuplicatePoint {
                first: path[0],
                second: id,
            });
        }
        self.layers[0].insert(id, p, Some(path[0]))?;
        let promote = 1.0 / self.config.k as f64;
        let height = self.layers.len();
        for i in 1..=height {
            if !self.rng.random_bool(promote) {
                break;
            }
            if let Some(&hint) = path.get(i) {
                self.layers[i].insert(id, p, Some(hint))?;
            } else {
                let mut layer = Triangulation::new();
                layer.insert(id, p, None)?;
                self.layers.push(layer);
                break;
            }
        }
        self.next_id = self.next_id.max(id.0 + 1);
        self.refresh_top_start();
        Ok(())
    }

    /// Inserts `p` under a fresh id and returns it.
    pub fn insert_point(&mut self, p: Point) -> Result<PointId> {
        let id = PointId(self.next_id);
        self.insert(id, p)?;
        Ok(id)
    }

    /// Removes `id` from every layer holding it, repairing layer sizes.
    ///
    /// Walking up from layer 1: where the layer held the point, it is
    /// removed and, with probability `1 - 1/k`, the nearest remaining point
    /// of the layer below that is not yet in this layer is promoted in its
    /// place. Where the layer did not hold it, with probability `1/k` the
    /// layer's nearest point to the deleted one is dropped, unless the layer
    /// above still holds that point. Layers left empty are removed.
    pub fn delete(&mut self, id: PointId) -> Result<()> {
        let p = self.point(id).ok_or(Error::UnknownId(id))?;
        let mut stats = QueryStats::default();
        let path: Vec<PointId> = self
            .descend(p, &mut stats)?
            .into_iter()
            .enumerate()
            .map(|(i, s)| self.layers[i].id_of(s))
            .collect();
        // a surviving neighbor of the deleted point in each layer holding it,
        // used as a walk start once the point is gone
        let near: Vec<Option<PointId>> = self
            .layers
            .iter()
            .take_while(|l| l.contains(id))
            .map(|l| l.neighbors(id).map(|n| n.iter().next()))
            .collect::<Result<_>>()?;
        self.layers[0].remove(id)?;
        let k = self.config.k as f64;
        let mut i = 1;
        while i < self.layers.len() {
            if self.layers[i].contains(id) {
                self.layers[i].remove(id)?;
                if self.rng.random_bool(1.0 - 1.0 / k) {
                    let (lower, upper) = self.layers.split_at_mut(i);
                    let below = &lower[i - 1];
                    if let Some(c) = nearest_absent(below, p, near[i - 1], &upper[0]) {
                        let cp = below.point(c).expect("candidate is in the lower layer");
                        let hint = near[i].filter(|&h| upper[0].contains(h));
                        upper[0].insert(c, cp, hint)?;
                    }
                }
            } else if self.config.demotion && self.rng.random_bool(1.0 / k) {
                let victim = path[i];
                let guarded = self.layers.get(i + 1).is_some_and(|up| up.contains(victim));
                if !guarded {
                    self.layers[i].remove(victim)?;
                }
            }
            if self.layers[i].is_empty() {
                self.layers.truncate(i);
                break;
            }
            i += 1;
        }
        if self.layers[0].is_empty() {
            self.layers.clear();
        }
        self.refresh_top_start();
        Ok(())
    }

    fn refresh_top_start(&mut self) {
        self.top_start = self.layers.last().and_then(|top| top.ids().min());
    }

    /// Layered descent. Returns, for every layer, the slot of the nearest
    /// vertex of `q` in that layer (index 0 is the full set).
    fn descend(&self, q: Point, stats: &mut QueryStats) -> Result<Vec<u32>> {
        let top = self.top_start.ok_or(Error::Empty)?;
        let mut path = vec![0u32; self.layers.len()];
        let mut current = top;
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let start = layer.slot(current).expect("layers are nested");
            let s = layer.greedy_nearest(q, start, stats);
            stats.layers_traversed += 1;
            path[i] = s;
            current = layer.id_of(s);
        }
        Ok(path)
    }
}

/// Greedy nearest-neighbor walk within a single layer.
///
/// Moves from `start` (or an arbitrary vertex) to the closest strictly
/// improving Delaunay neighbor until none improves.
pub fn vd_nn(layer: &Triangulation, q: Point, start: Option<PointId>, stats: &mut QueryStats) -> Result<PointId> {
    if layer.is_empty() {
        return Err(Error::Empty);
    }
    let start = match start {
        Some(id) => layer.slot(id).ok_or(Error::UnknownId(id))?,
        None => layer.any_slot(),
    };
    Ok(layer.id_of(layer.greedy_nearest(q, start, stats)))
}

/// Nearest point of `layer` to `q` that `exclude` does not hold.
///
/// Enumerates `layer` in increasing distance by best-first expansion over
/// the Delaunay graph, which visits points in exact distance order.
fn nearest_absent(layer: &Triangulation, q: Point, start: Option<PointId>, exclude: &Triangulation) -> Option<PointId> {
    if layer.is_empty() {
        return None;
    }
    let start = start.and_then(|id| layer.slot(id)).unwrap_or_else(|| layer.any_slot());
    let mut stats = QueryStats::default();
    let first = layer.greedy_nearest(q, start, &mut stats);
    let mut heap = BinaryHeap::new();
    let mut seen: FxHashSet<u32> = FxHashSet::default();
    seen.insert(first);
    heap.push(Reverse((
        DistOrder::new(dist2(q, layer.point_of(first)), layer.id_of(first)),
        first,
    )));
    while let Some(Reverse((d, s))) = heap.pop() {
        if !exclude.contains(d.id) {
            return Some(d.id);
        }
        layer.for_each_neighbor_slot(s, |n| {
            if seen.insert(n) {
                let dn = DistOrder::new(dist2(q, layer.point_of(n)), layer.id_of(n));
                heap.push(Reverse((dn, n)));
            }
        });
    }
    None
}
