use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::{dist2, DistOrder, Point, PointId};
use crate::mvd::{CandidateList, Neighbor};
use crate::stats::QueryStats;

use super::SpatialIndex;

pub const DEFAULT_LEAF_CAPACITY: usize = 100;

#[derive(Clone, Copy, Debug)]
struct BBox {
    lo: Point,
    hi: Point,
}

impl BBox {
    fn of(points: &[(PointId, Point)]) -> Self {
        let mut b = BBox {
            lo: Point::new(f64::INFINITY, f64::INFINITY),
            hi: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        };
        for &(_, p) in points {
            b.lo.x = b.lo.x.min(p.x);
            b.lo.y = b.lo.y.min(p.y);
            b.hi.x = b.hi.x.max(p.x);
            b.hi.y = b.hi.y.max(p.y);
        }
        b
    }

    /// Squared distance from `q` to the box; zero inside.
    fn dist2(&self, q: Point) -> f64 {
        let dx = (self.lo.x - q.x).max(q.x - self.hi.x).max(0.0);
        let dy = (self.lo.y - q.y).max(q.y - self.hi.y).max(0.0);
        dx * dx + dy * dy
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf { start: usize, end: usize, bbox: BBox },
    Inner { left: usize, right: usize, bbox: BBox },
}

impl Node {
    fn bbox(&self) -> &BBox {
        match self {
            Node::Leaf { bbox, .. } | Node::Inner { bbox, .. } => bbox,
        }
    }
}

/// Median-split kd-tree with alternating axes and bucketed leaves.
///
/// Queries are best-first branch-and-bound: nodes are expanded in order of
/// their bounding-box distance and the search stops once the nearest
/// unexpanded box is farther than the current k-th best.
#[derive(Clone, Debug)]
pub struct KdTree {
    points: Vec<(PointId, Point)>,
    nodes: Vec<Node>,
    leaf_capacity: usize,
}

impl KdTree {
    pub fn build(points: &[(PointId, Point)], leaf_capacity: usize) -> Result<Self> {
        if leaf_capacity == 0 {
            return Err(Error::InvalidParameter("leaf capacity must be positive".into()));
        }
        let mut tree = KdTree {
            points: points.to_vec(),
            nodes: Vec::new(),
            leaf_capacity,
        };
        if !tree.points.is_empty() {
            tree.split(0, tree.points.len(), 0);
        }
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    fn split(&mut self, start: usize, end: usize, depth: usize) -> usize {
        let bbox = BBox::of(&self.points[start..end]);
        let id = self.nodes.len();
        if end - start <= self.leaf_capacity {
            self.nodes.push(Node::Leaf { start, end, bbox });
            return id;
        }
        self.nodes.push(Node::Leaf { start, end, bbox });
        let mid = start + (end - start) / 2;
        let axis = depth % 2;
        self.points[start..end].select_nth_unstable_by(mid - start, |a, b| {
            let (u, v) = if axis == 0 { (a.1.x, b.1.x) } else { (a.1.y, b.1.y) };
            u.total_cmp(&v)
        });
        let left = self.split(start, mid, depth + 1);
        let right = self.split(mid, end, depth + 1);
        self.nodes[id] = Node::Inner { left, right, bbox };
        id
    }

    pub fn kd_nn(&self, q: Point) -> Result<(PointId, QueryStats)> {
        let (mut v, stats) = self.kd_knn(q, 1)?;
        Ok((v.swap_remove(0).id, stats))
    }

    pub fn kd_knn(&self, q: Point, k_query: usize) -> Result<(Vec<Neighbor>, QueryStats)> {
        if k_query < 1 {
            return Err(Error::InvalidParameter("k_query must be at least 1".into()));
        }
        if self.points.is_empty() {
            return Err(Error::Empty);
        }
        let mut stats = QueryStats::default();
        let mut best = CandidateList::new(k_query);
        // non-negative f64 bit patterns order like the values
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((self.nodes[0].bbox().dist2(q).to_bits(), 0usize)));
        while let Some(Reverse((bits, node))) = heap.pop() {
            let box_d2 = f64::from_bits(bits);
            // equal distance may still hide a smaller id, so only a strictly
            // farther box is pruned
            if best.is_full() && box_d2 > best.last().expect("full").dist2 {
                break;
            }
            stats.points_visited += 1;
            match &self.nodes[node] {
                Node::Leaf { start, end, .. } => {
                    for &(id, p) in &self.points[*start..*end] {
                        stats.distance_evaluations += 1;
                        best.insert(DistOrder::new(dist2(q, p), id));
                    }
                }
                Node::Inner { left, right, .. } => {
                    for &child in [left, right] {
                        let d = self.nodes[child].bbox().dist2(q);
                        if !best.is_full() || d <= best.last().expect("full").dist2 {
                            heap.push(Reverse((d.to_bits(), child)));
                        }
                    }
                }
            }
        }
        let out = best
            .into_vec()
            .into_iter()
            .map(|d| Neighbor {
                id: d.id,
                dist2: d.dist2,
            })
            .collect();
        Ok((out, stats))
    }

    /// Checks the structural invariants: leaves within capacity and every
    /// point inside the bounding box of each node above it.
    pub fn validate(&self) -> std::result::Result<(), String> {
        fn walk(t: &KdTree, node: usize, out: &mut Vec<(usize, usize)>) -> std::result::Result<(), String> {
            match &t.nodes[node] {
                Node::Leaf { start, end, bbox } => {
                    if end - start > t.leaf_capacity {
                        return Err(format!("leaf {node} over capacity"));
                    }
                    for &(id, p) in &t.points[*start..*end] {
                        if bbox.dist2(p) != 0.0 {
                            return Err(format!("point {id} outside leaf {node}"));
                        }
                    }
                    out.push((*start, *end));
                }
                Node::Inner { left, right, bbox } => {
                    let mut sub = Vec::new();
                    walk(t, *left, &mut sub)?;
                    walk(t, *right, &mut sub)?;
                    for &(s, e) in &sub {
                        if t.points[s..e].iter().any(|&(_, p)| bbox.dist2(p) != 0.0) {
                            return Err(format!("node {node} box does not cover its subtree"));
                        }
                    }
                    out.extend(sub);
                }
            }
            Ok(())
        }
        if self.nodes.is_empty() {
            return Ok(());
        }
        let mut ranges = Vec::new();
        walk(self, 0, &mut ranges)?;
        let covered: usize = ranges.iter().map(|(s, e)| e - s).sum();
        if covered != self.points.len() {
            return Err("leaves do not partition the points".into());
        }
        Ok(())
    }
}

impl SpatialIndex for KdTree {
    fn name(&self) -> &'static str {
        "kdtree"
    }

    fn nn(&self, q: Point) -> Result<(PointId, QueryStats)> {
        self.kd_nn(q)
    }

    fn knn(&self, q: Point, k_query: usize) -> Result<(Vec<Neighbor>, QueryStats)> {
        self.kd_knn(q, k_query)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::LinearScan;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, seed: u64) -> Vec<(PointId, Point)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n as u64)
            .map(|i| (PointId(i), Point::new(rng.random(), rng.random())))
            .collect()
    }

    #[test]
    fn agrees_with_linear_scan() {
        let pts = random_points(3000, 11);
        let tree = KdTree::build(&pts, 16).unwrap();
        tree.validate().unwrap();
        let scan = LinearScan::new(pts);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..300 {
            let q = Point::new(rng.random_range(-0.2..1.2), rng.random_range(-0.2..1.2));
            assert_eq!(tree.kd_nn(q).unwrap().0, scan.scan_nn(q).unwrap());
            let k = rng.random_range(1..40);
            let ids = |v: Vec<Neighbor>| v.into_iter().map(|n| n.id).collect::<Vec<_>>();
            assert_eq!(ids(tree.kd_knn(q, k).unwrap().0), ids(scan.scan_knn(q, k).unwrap()));
        }
    }

    #[test]
    fn vertical_line_is_still_exact() {
        let pts: Vec<_> = (0..500u64)
            .map(|i| (PointId(i), Point::new(2.0, i as f64 * 0.37)))
            .collect();
        let tree = KdTree::build(&pts, 4).unwrap();
        tree.validate().unwrap();
        let scan = LinearScan::new(pts);
        for i in 0..100 {
            let q = Point::new(1.5 + i as f64 * 0.01, i as f64 * 1.9);
            assert_eq!(tree.kd_nn(q).unwrap().0, scan.scan_nn(q).unwrap());
        }
    }

    #[test]
    fn ties_follow_id_order() {
        // four corners at equal distance from the center
        let pts = vec![
            (PointId(9), Point::new(1.0, 1.0)),
            (PointId(4), Point::new(-1.0, 1.0)),
            (PointId(6), Point::new(1.0, -1.0)),
            (PointId(2), Point::new(-1.0, -1.0)),
        ];
        let tree = KdTree::build(&pts, 1).unwrap();
        let (v, _) = tree.kd_knn(Point::new(0.0, 0.0), 4).unwrap();
        let ids: Vec<_> = v.iter().map(|n| n.id.0).collect();
        assert_eq!(ids, vec![2, 4, 6, 9]);
    }

    #[test]
    fn box_distance_lower_bounds_every_point() {
        let pts = random_points(800, 5);
        let tree = KdTree::build(&pts, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let q = Point::new(rng.random(), rng.random());
            for node in &tree.nodes {
                if let Node::Leaf { start, end, bbox } = node {
                    let lb = bbox.dist2(q);
                    assert!(tree.points[*start..*end].iter().all(|&(_, p)| dist2(q, p) >= lb));
                }
            }
        }
    }

    #[test]
    fn far_fewer_evaluations_than_points() {
        let pts = random_points(10_000, 8);
        let tree = KdTree::build(&pts, DEFAULT_LEAF_CAPACITY).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut total = 0;
        for _ in 0..200 {
            total += tree
                .kd_nn(Point::new(rng.random(), rng.random()))
                .unwrap()
                .1
                .distance_evaluations;
        }
        assert!((total as f64 / 200.0) < 1000.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(KdTree::build(&[], 0).is_err());
        let t = KdTree::build(&[], 4).unwrap();
        assert!(matches!(t.kd_nn(Point::new(0.0, 0.0)), Err(Error::Empty)));
    }
}
