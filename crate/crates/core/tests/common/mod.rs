//! Oracles and point-set generators shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use mvd::{Point, PointId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ids sorted by `(squared distance, id)` to `q`, computed by full scan.
pub fn brute_order(points: &[(PointId, Point)], q: Point) -> Vec<PointId> {
    let mut keyed: Vec<(f64, PointId)> = points
        .iter()
        .map(|&(id, p)| {
            let (dx, dy) = (p.x - q.x, p.y - q.y);
            (dx * dx + dy * dy, id)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|e| e.1).collect()
}

pub fn brute_nn(points: &[(PointId, Point)], q: Point) -> PointId {
    points
        .iter()
        .map(|&(id, p)| {
            let (dx, dy) = (p.x - q.x, p.y - q.y);
            (dx * dx + dy * dy, id)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("non-empty point set")
        .1
}

// ----- exact Delaunay oracle on integer coordinates -----
//
// Each point is lifted to M * (x^2 + y^2); in every 4-tuple the lift of the
// smallest-id point is lowered by one unit. M exceeds every orientation
// determinant of the coordinate range, so the unit shift only decides
// exact ties. Coordinates must satisfy |x|, |y| <= 2^15.

pub const COORD_LIMIT: i64 = 1 << 15;
const LIFT_SCALE: i128 = 1 << 40;

#[derive(Clone, Copy, Debug)]
pub struct IntPoint {
    pub id: u64,
    pub x: i128,
    pub y: i128,
    lift: i128,
    fx: f64,
    fy: f64,
}

impl IntPoint {
    pub fn new(id: u64, x: i64, y: i64) -> Self {
        assert!(
            x.abs() <= COORD_LIMIT && y.abs() <= COORD_LIMIT,
            "coordinate out of oracle range"
        );
        let (x, y) = (i128::from(x), i128::from(y));
        IntPoint {
            id,
            x,
            y,
            lift: LIFT_SCALE * (x * x + y * y),
            fx: x as f64,
            fy: y as f64,
        }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x as f64, self.y as f64)
    }
}

pub fn orient_i(a: &IntPoint, b: &IntPoint, c: &IntPoint) -> i128 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// `a, b, c` counter-clockwise; true when `d` lies strictly inside their
/// perturbed circumcircle.
pub fn perturbed_inside(a: &IntPoint, b: &IntPoint, c: &IntPoint, d: &IntPoint) -> bool {
    let min_id = a.id.min(b.id).min(c.id).min(d.id);
    let lift = |p: &IntPoint| p.lift - i128::from(p.id == min_id);
    let dz = lift(d);
    let r = [a, b, c].map(|p| [p.x - d.x, p.y - d.y, lift(p) - dz]);
    let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
        + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
    assert_ne!(det, 0, "perturbation leaves a tie");
    det > 0
}

fn sorted3(mut t: [PointId; 3]) -> [PointId; 3] {
    t.sort();
    t
}

/// Sign of the unperturbed in-circle determinant when floating point
/// settles it. Translated coordinates and their squares are exact in f64,
/// so only the final products and sums round.
fn inside_filtered(a: &IntPoint, b: &IntPoint, c: &IntPoint, d: &IntPoint) -> Option<bool> {
    let t = |p: &IntPoint| {
        let (x, y) = (p.fx - d.fx, p.fy - d.fy);
        (x, y, x * x + y * y)
    };
    let (a, b, c) = (t(a), t(b), t(c));
    let (m_a, m_b, m_c) = (b.0 * c.1 - b.1 * c.0, c.0 * a.1 - c.1 * a.0, a.0 * b.1 - a.1 * b.0);
    let det = a.2 * m_a + b.2 * m_b + c.2 * m_c;
    let permanent = a.2 * (b.0 * c.1).abs().max((b.1 * c.0).abs()) * 2.0
        + b.2 * (c.0 * a.1).abs().max((c.1 * a.0).abs()) * 2.0
        + c.2 * (a.0 * b.1).abs().max((a.1 * b.0).abs()) * 2.0;
    let bound = 1e-12 * permanent;
    (det.abs() > bound).then_some(det > 0.0)
}

pub fn inside_fast(a: &IntPoint, b: &IntPoint, c: &IntPoint, d: &IntPoint) -> bool {
    inside_filtered(a, b, c, d).unwrap_or_else(|| perturbed_inside(a, b, c, d))
}

/// Indices of the `count` nearest other points of each point.
fn near_lists(pts: &[IntPoint], count: usize) -> Vec<Vec<usize>> {
    (0..pts.len())
        .map(|i| {
            let mut others: Vec<usize> = (0..pts.len()).filter(|&m| m != i).collect();
            others.sort_by_key(|&m| (pts[m].x - pts[i].x).pow(2) + (pts[m].y - pts[i].y).pow(2));
            others.truncate(count);
            others
        })
        .collect()
}

/// Every triple with an empty perturbed circumcircle, as sorted id triples.
pub fn oracle_triangles(pts: &[IntPoint]) -> BTreeSet<[PointId; 3]> {
    let n = pts.len();
    let near = near_lists(pts, 8);
    let mut out = BTreeSet::new();
    // Points that disqualify a triple are tried first: the previous
    // witness, then the nearest points of each corner. Every other point is
    // still checked before a triple is accepted.
    let mut witness = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            for l in j + 1..n {
                let (a, mut b, mut c) = (&pts[i], &pts[j], &pts[l]);
                // Exact: coordinate differences and their products fit in
                // the f64 mantissa.
                let o = (b.fx - a.fx) * (c.fy - a.fy) - (b.fy - a.fy) * (c.fx - a.fx);
                if o == 0.0 {
                    continue;
                }
                if o < 0.0 {
                    std::mem::swap(&mut b, &mut c);
                }
                let blocks = |m: usize| m != i && m != j && m != l && inside_fast(a, b, c, &pts[m]);
                if blocks(witness) {
                    continue;
                }
                let first = near[i].iter().chain(&near[j]).chain(&near[l]).copied();
                if let Some(m) = first.chain(0..n).find(|&m| blocks(m)) {
                    witness = m;
                } else {
                    out.insert(sorted3([PointId(a.id), PointId(b.id), PointId(c.id)]));
                }
            }
        }
    }
    out
}

/// Edges of the oracle triangulation; for a fully collinear set, the path
/// through the points in lexicographic order.
pub fn oracle_edges(pts: &[IntPoint]) -> BTreeSet<(PointId, PointId)> {
    let tris = oracle_triangles(pts);
    let pair = |a: u64, b: u64| (PointId(a.min(b)), PointId(a.max(b)));
    if tris.is_empty() {
        let mut sorted = pts.to_vec();
        sorted.sort_by_key(|p| (p.x, p.y));
        return sorted.windows(2).map(|w| pair(w[0].id, w[1].id)).collect();
    }
    tris.iter()
        .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])])
        .map(|(a, b)| pair(a.0, b.0))
        .collect()
}

/// Ids of the triangles (given counter-clockwise) whose perturbed
/// circumcircle contains another point.
pub fn nonempty_circles(pts: &[IntPoint], tris: &[[PointId; 3]]) -> Vec<[PointId; 3]> {
    let by_id: std::collections::HashMap<u64, &IntPoint> = pts.iter().map(|p| (p.id, p)).collect();
    tris.iter()
        .copied()
        .filter(|t| {
            let [a, b, c] = t.map(|id| by_id[&id.0]);
            assert!(orient_i(a, b, c) > 0, "triangle {t:?} is not counter-clockwise");
            pts.iter()
                .any(|d| d.id != a.id && d.id != b.id && d.id != c.id && perturbed_inside(a, b, c, d))
        })
        .collect()
}

// ----- adversarial integer point sets -----

/// Shuffled, gapped ids for `n` points.
fn scattered_ids(n: usize, r: &mut ChaCha8Rng) -> Vec<u64> {
    let mut ids: Vec<u64> = (0..n as u64).map(|i| 3 * i + 7).collect();
    ids.shuffle(r);
    ids
}

fn finish(coords: Vec<(i64, i64)>, n: usize, r: &mut ChaCha8Rng) -> Vec<IntPoint> {
    let mut seen = BTreeSet::new();
    let mut uniq: Vec<(i64, i64)> = coords.into_iter().filter(|c| seen.insert(*c)).collect();
    uniq.shuffle(r);
    uniq.truncate(n);
    let ids = scattered_ids(uniq.len(), r);
    uniq.iter()
        .zip(ids)
        .map(|(&(x, y), id)| IntPoint::new(id, x, y))
        .collect()
}

pub fn random_set(n: usize, seed: u64) -> Vec<IntPoint> {
    let mut r = rng(seed);
    let coords = (0..2 * n)
        .map(|_| (r.random_range(0..30_000), r.random_range(0..30_000)))
        .collect();
    finish(coords, n, &mut r)
}

/// Most points on a handful of axis-parallel and diagonal lines.
pub fn collinear_heavy_set(n: usize, seed: u64) -> Vec<IntPoint> {
    let mut r = rng(seed);
    let mut coords = Vec::new();
    for i in 0..3 * n {
        let t = r.random_range(-300..=300) * 50;
        coords.push(match i % 5 {
            0 => (t, 1000),
            1 => (-2000, t),
            2 => (t, t),
            3 => (t, 500 - t),
            _ => (r.random_range(-15_000..15_000), r.random_range(-15_000..15_000)),
        });
    }
    finish(coords, n, &mut r)
}

/// Integer points on r^2 = x^2 + y^2, by brute search.
fn lattice_circle(radius: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for x in -radius..=radius {
        let y2 = radius * radius - x * x;
        let y = (y2 as f64).sqrt().round() as i64;
        if y * y == y2 {
            out.push((x, y));
            if y != 0 {
                out.push((x, -y));
            }
        }
    }
    out
}

/// Concentric lattice circles with many cocircular points, neighbours one
/// unit off those circles, and a cocircular square grid.
pub fn near_cocircular_set(n: usize, seed: u64) -> Vec<IntPoint> {
    let mut r = rng(seed);
    let mut coords = Vec::new();
    for radius in [32_045, 5525, 1105, 65, 25] {
        for (x, y) in lattice_circle(radius) {
            coords.push((x, y));
            if r.random_bool(0.3) {
                coords.push((x + r.random_range(-1..=1), y + r.random_range(-1..=1)));
            }
        }
    }
    for i in -5..=5 {
        for j in -5..=5 {
            coords.push((i * 2000, j * 2000));
        }
    }
    finish(coords, n, &mut r)
}

/// A shuffled square grid: every cell is a cocircular quadruple.
pub fn grid_set(side: i64, seed: u64) -> Vec<IntPoint> {
    let mut r = rng(seed);
    let coords = (0..side)
        .flat_map(|i| (0..side).map(move |j| (i * 100, j * 100)))
        .collect();
    finish(coords, (side * side) as usize, &mut r)
}
