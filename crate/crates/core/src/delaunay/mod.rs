//! Incremental Delaunay triangulation of a dynamic planar point set.
//!
//! A triangulation is the dual of one Voronoi layer: two points are Voronoi
//! neighbors exactly when they share an edge here.
//!
//! The hull is closed by a symbolic vertex at infinity. Every hull edge
//! carries a "ghost" triangle whose third vertex is that infinite vertex, so
//! point location, insertion and deletion never special-case the boundary.
//! Fewer than three points, or a fully collinear set, has no triangles at
//! all; such a layer is kept as a plain list ordered along its line.
//!
//! Cocircular configurations are resolved by the tie rule in
//! [`crate::geometry`], which makes the triangulation of a point set unique
//! regardless of insertion order.

mod hilbert;

use std::cmp::Ordering;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::geometry::{dist2, in_circle_tiebroken, orient_det, DistOrder, Point, PointId};
use crate::stats::QueryStats;

const NIL: u32 = u32::MAX;
/// Slot of the symbolic infinite vertex.
const INF: u32 = u32::MAX - 1;

#[derive(Clone, Copy, Debug)]
struct Tri {
    /// Counter-clockwise vertex slots; `v[0] == NIL` marks a free entry.
    v: [u32; 3],
    /// `n[i]` is the triangle across the edge opposite `v[i]`.
    n: [u32; 3],
    mark: u32,
}

impl Tri {
    #[inline]
    fn is_live(&self) -> bool {
        self.v[0] != NIL
    }

    #[inline]
    fn is_ghost(&self) -> bool {
        self.v.contains(&INF)
    }

    #[inline]
    fn index_of(&self, s: u32) -> usize {
        if self.v[0] == s {
            0
        } else if self.v[1] == s {
            1
        } else {
            debug_assert_eq!(self.v[2], s);
            2
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Vert {
    id: PointId,
    p: Point,
    /// Some incident triangle while in mesh mode.
    tri: u32,
    live: bool,
}

#[derive(Clone, Debug)]
enum Mode {
    /// Collinear or fewer than three points: slots sorted along the line.
    Line(Vec<u32>),
    Mesh,
}

/// Set of Delaunay neighbors (equivalently Voronoi neighbors) of a vertex,
/// sorted by id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NeighborSet(Vec<PointId>);

impl NeighborSet {
    pub fn contains(&self, id: PointId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = PointId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[PointId] {
        &self.0
    }
}

/// Vertex, edge and face counts of a triangulation. `faces` includes the
/// unbounded outer face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EulerCounts {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
}

impl EulerCounts {
    /// `V - E + F == 2` for a non-empty connected planar graph.
    pub fn euler_holds(&self) -> bool {
        self.vertices == 0 || self.vertices as i64 - self.edges as i64 + self.faces as i64 == 2
    }

    /// `E <= 3V - 6`, meaningful for three or more vertices.
    pub fn edge_bound_holds(&self) -> bool {
        self.vertices < 3 || self.edges + 6 <= 3 * self.vertices
    }
}

#[derive(Clone, Debug)]
pub struct Triangulation {
    verts: Vec<Vert>,
    free_verts: Vec<u32>,
    slot_of: FxHashMap<PointId, u32>,
    tris: Vec<Tri>,
    free_tris: Vec<u32>,
    finite_tris: usize,
    mode: Mode,
    last_tri: u32,
    epoch: u32,
}

impl Default for Triangulation {
    fn default() -> Self {
        Self::new()
    }
}

impl Triangulation {
    pub fn new() -> Self {
        Triangulation {
            verts: Vec::new(),
            free_verts: Vec::new(),
            slot_of: FxHashMap::default(),
            tris: Vec::new(),
            free_tris: Vec::new(),
            finite_tris: 0,
            mode: Mode::Line(Vec::new()),
            last_tri: NIL,
            epoch: 0,
        }
    }

    /// Triangulates a whole point set at once. Ids and coordinates must be
    /// pairwise distinct.
    pub fn bulk_build(points: &[(PointId, Point)]) -> Result<Self> {
        check_distinct(points)?;
        let mut t = Triangulation::new();
        t.verts.reserve(points.len());
        t.tris.reserve(2 * points.len() + 4);
        let slots: Vec<u32> = points.iter().map(|&(id, p)| t.alloc_vert(id, p)).collect();
        t.build_from_slots(slots);
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.slot_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slot_of.is_empty()
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.slot_of.contains_key(&id)
    }

    pub fn point(&self, id: PointId) -> Option<Point> {
        self.slot_of.get(&id).map(|&s| self.verts[s as usize].p)
    }

    /// Ids of all vertices, in no particular order.
    pub fn ids(&self) -> impl Iterator<Item = PointId> + '_ {
        self.slot_of.keys().copied()
    }

    /// All `(id, point)` pairs sorted by id.
    pub fn points(&self) -> Vec<(PointId, Point)> {
        let mut v: Vec<_> = self
            .slot_of
            .iter()
            .map(|(&id, &s)| (id, self.verts[s as usize].p))
            .collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }

    /// True when the vertex set spans the plane (at least one triangle).
    pub fn is_mesh(&self) -> bool {
        matches!(self.mode, Mode::Mesh)
    }

    /// Adds a vertex and restores the Delaunay property around it.
    ///
    /// `hint` names an existing vertex close to `p`; point location walks
    /// from there.
    pub fn insert(&mut self, id: PointId, p: Point, hint: Option<PointId>) -> Result<()> {
        if self.slot_of.contains_key(&id) {
            return Err(Error::IdCollision(id));
        }
        match &self.mode {
            Mode::Line(line) => {
                let line_len = line.len();
                if line_len >= 2 {
                    let a = self.verts[line[0] as usize].p;
                    let b = self.verts[line[line_len - 1] as usize].p;
                    if orient_det(a, b, p) != 0.0 {
                        let mut slots = line.clone();
                        let s = self.alloc_vert(id, p);
                        slots.push(s);
                        self.build_from_slots(slots);
                        return Ok(());
                    }
                }
                let pos = self.line_search(p);
                match pos {
                    Ok(i) => {
                        let Mode::Line(line) = &self.mode else { unreachable!() };
                        let first = self.verts[line[i] as usize].id;
                        Err(Error::DuplicatePoint { first, second: id })
                    }
                    Err(i) => {
                        let s = self.alloc_vert(id, p);
                        let Mode::Line(line) = &mut self.mode else {
                            unreachable!()
                        };
                        line.insert(i, s);
                        Ok(())
                    }
                }
            }
            Mode::Mesh => {
                let start = self.start_tri(hint);
                let t = self.walk(p, start);
                let tri = self.tris[t as usize];
                if !tri.is_ghost() {
                    for &v in &tri.v {
                        let vert = &self.verts[v as usize];
                        if vert.p == p {
                            return Err(Error::DuplicatePoint {
                                first: vert.id,
                                second: id,
                            });
                        }
                    }
                }
                let s = self.alloc_vert(id, p);
                self.insert_into_cavity(s, t);
                Ok(())
            }
        }
    }

    /// Removes a vertex and re-triangulates the hole it leaves.
    pub fn remove(&mut self, id: PointId) -> Result<()> {
        let s = *self.slot_of.get(&id).ok_or(Error::UnknownId(id))?;
        match &mut self.mode {
            Mode::Line(line) => {
                line.retain(|&x| x != s);
                self.free_vert(s);
            }
            Mode::Mesh => self.remove_from_mesh(s),
        }
        Ok(())
    }

    /// Delaunay neighbors of `id`, never including the vertex itself or the
    /// infinite vertex.
    pub fn neighbors(&self, id: PointId) -> Result<NeighborSet> {
        let s = *self.slot_of.get(&id).ok_or(Error::UnknownId(id))?;
        let mut out = Vec::with_capacity(8);
        self.for_each_neighbor_slot(s, |n| out.push(self.verts[n as usize].id));
        out.sort_unstable();
        Ok(NeighborSet(out))
    }

    /// Id of the vertex whose Voronoi cell contains `q`, i.e. the nearest
    /// vertex under the `(dist2, id)` order.
    pub fn locate(&self, q: Point, hint: Option<PointId>) -> Result<PointId> {
        if self.is_empty() {
            return Err(Error::Empty);
        }
        match &self.mode {
            Mode::Line(line) => Ok(line.iter().map(|&s| self.dist_order(q, s)).min().expect("non-empty").id),
            Mode::Mesh => {
                let start = match hint.and_then(|h| self.slot_of.get(&h)) {
                    Some(&s) => s,
                    None => self.any_slot(),
                };
                let mut stats = QueryStats::default();
                Ok(self.id_of(self.greedy_nearest(q, start, &mut stats)))
            }
        }
    }

    /// Undirected edges as `(smaller id, larger id)`, sorted.
    pub fn edges(&self) -> Vec<(PointId, PointId)> {
        let mut out = Vec::new();
        match &self.mode {
            Mode::Line(line) => {
                for w in line.windows(2) {
                    let (a, b) = (self.id_of(w[0]), self.id_of(w[1]));
                    out.push((a.min(b), a.max(b)));
                }
            }
            Mode::Mesh => {
                for t in self.tris.iter().filter(|t| t.is_live()) {
                    for i in 0..3 {
                        let (u, w) = (t.v[(i + 1) % 3], t.v[(i + 2) % 3]);
                        if u == INF || w == INF {
                            continue;
                        }
                        let (a, b) = (self.id_of(u), self.id_of(w));
                        if a < b {
                            out.push((a, b));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Finite triangles as counter-clockwise id triples.
    pub fn triangles(&self) -> Vec<[PointId; 3]> {
        self.tris
            .iter()
            .filter(|t| t.is_live() && !t.is_ghost())
            .map(|t| t.v.map(|s| self.id_of(s)))
            .collect()
    }

    pub fn triangle_count(&self) -> usize {
        self.finite_tris
    }

    pub fn euler_counts(&self) -> EulerCounts {
        let vertices = self.len();
        let edges = match &self.mode {
            Mode::Line(line) => line.len().saturating_sub(1),
            // each finite triangle has 3 edges; interior edges are shared,
            // hull edges (one per ghost) are not
            Mode::Mesh => (3 * self.finite_tris + self.hull_len()) / 2,
        };
        EulerCounts {
            vertices,
            edges,
            faces: self.finite_tris + 1,
        }
    }

    /// Mean number of Delaunay neighbors per vertex.
    pub fn mean_degree(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        2.0 * self.euler_counts().edges as f64 / self.len() as f64
    }

    fn hull_len(&self) -> usize {
        let live = self.tris.len() - self.free_tris.len();
        live - self.finite_tris
    }

    /// Structural self-check: neighbor links, orientation, vertex back
    /// pointers, and the local Delaunay condition on every edge.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let Mode::Mesh = self.mode else {
            let Mode::Line(line) = &self.mode else { unreachable!() };
            if line.len() != self.len() {
                return Err("line length does not match vertex count".into());
            }
            for w in line.windows(2) {
                let (a, b) = (self.verts[w[0] as usize].p, self.verts[w[1] as usize].p);
                if cmp_lex(a, b) != Ordering::Less {
                    return Err("line not sorted".into());
                }
            }
            if line.len() >= 3 {
                let a = self.verts[line[0] as usize].p;
                let b = self.verts[line[line.len() - 1] as usize].p;
                if line.iter().any(|&s| orient_det(a, b, self.verts[s as usize].p) != 0.0) {
                    return Err("line mode holds non-collinear points".into());
                }
            }
            return Ok(());
        };
        let mut finite = 0;
        for (ti, t) in self.tris.iter().enumerate() {
            if !t.is_live() {
                continue;
            }
            let ti = ti as u32;
            if t.v.iter().filter(|&&v| v == INF).count() > 1 {
                return Err(format!("triangle {ti} has two infinite vertices"));
            }
            if !t.is_ghost() {
                finite += 1;
                let [a, b, c] = t.v.map(|s| self.verts[s as usize].p);
                if orient_det(a, b, c) <= 0.0 {
                    return Err(format!("triangle {ti} is not counter-clockwise"));
                }
            }
            for i in 0..3 {
                let o = t.n[i];
                if o == NIL || !self.tris[o as usize].is_live() {
                    return Err(format!("triangle {ti} has a dangling neighbor"));
                }
                let ot = &self.tris[o as usize];
                let (u, w) = (t.v[(i + 1) % 3], t.v[(i + 2) % 3]);
                let Some(j) = (0..3).find(|&j| ot.n[j] == ti) else {
                    return Err(format!("triangle {o} does not link back to {ti}"));
                };
                if ot.v[(j + 1) % 3] != w || ot.v[(j + 2) % 3] != u {
                    return Err(format!("triangles {ti} and {o} disagree on their shared edge"));
                }
                if t.v[i] != INF && self.conflicts(o, t.v[i]) {
                    return Err(format!(
                        "edge ({}, {}) is not locally Delaunay",
                        self.id_of_any(u),
                        self.id_of_any(w)
                    ));
                }
            }
        }
        if finite != self.finite_tris {
            return Err("finite triangle count is stale".into());
        }
        for (&id, &s) in &self.slot_of {
            let v = &self.verts[s as usize];
            if !v.live || v.id != id {
                return Err(format!("vertex {id} has a stale slot"));
            }
            let t = &self.tris[v.tri as usize];
            if !t.is_live() || !t.v.contains(&s) {
                return Err(format!("vertex {id} points at a triangle that does not contain it"));
            }
        }
        if !self.euler_counts().euler_holds() {
            return Err("Euler relation violated".into());
        }
        Ok(())
    }

    // ----- crate-internal access used by the layered index -----

    pub(crate) fn slot(&self, id: PointId) -> Option<u32> {
        self.slot_of.get(&id).copied()
    }

    #[inline]
    pub(crate) fn id_of(&self, s: u32) -> PointId {
        self.verts[s as usize].id
    }

    #[inline]
    pub(crate) fn point_of(&self, s: u32) -> Point {
        self.verts[s as usize].p
    }

    #[inline]
    fn dist_order(&self, q: Point, s: u32) -> DistOrder {
        let v = &self.verts[s as usize];
        DistOrder::new(dist2(q, v.p), v.id)
    }

    /// An arbitrary live vertex slot. Panics on an empty triangulation.
    pub(crate) fn any_slot(&self) -> u32 {
        match &self.mode {
            Mode::Line(line) => line[0],
            Mode::Mesh => {
                let t = &self.tris[self.last_tri as usize];
                *t.v.iter().find(|&&v| v != INF).expect("triangle with a finite vertex")
            }
        }
    }

    /// Calls `f` with the slot of every Delaunay neighbor of `s`.
    pub(crate) fn for_each_neighbor_slot(&self, s: u32, mut f: impl FnMut(u32)) {
        match &self.mode {
            Mode::Line(line) => {
                let p = self.verts[s as usize].p;
                let i = self.line_search(p).expect("vertex is on the line");
                if i > 0 {
                    f(line[i - 1]);
                }
                if i + 1 < line.len() {
                    f(line[i + 1]);
                }
            }
            Mode::Mesh => {
                let start = self.verts[s as usize].tri;
                let mut t = start;
                loop {
                    let tri = &self.tris[t as usize];
                    let i = tri.index_of(s);
                    let nb = tri.v[(i + 1) % 3];
                    if nb != INF {
                        f(nb);
                    }
                    t = tri.n[(i + 1) % 3];
                    if t == start {
                        break;
                    }
                }
            }
        }
    }

    /// Greedy best-improvement walk from `start` toward the nearest vertex
    /// of `q`. Each vertex's distance is evaluated at most once per walk.
    pub(crate) fn greedy_nearest(&self, q: Point, start: u32, stats: &mut QueryStats) -> u32 {
        let mut cur = start;
        let mut best = self.dist_order(q, cur);
        stats.distance_evaluations += 1;
        stats.points_visited += 1;
        let mut visited: FxHashSet<u32> = FxHashSet::default();
        visited.insert(cur);
        loop {
            let center = cur;
            self.for_each_neighbor_slot(center, |n| {
                if visited.insert(n) {
                    stats.distance_evaluations += 1;
                    let d = self.dist_order(q, n);
                    if d < best {
                        best = d;
                        cur = n;
                    }
                }
            });
            if cur == center {
                return cur;
            }
            stats.points_visited += 1;
        }
    }

    // ----- construction -----

    fn alloc_vert(&mut self, id: PointId, p: Point) -> u32 {
        let v = Vert {
            id,
            p,
            tri: NIL,
            live: true,
        };
        let s = match self.free_verts.pop() {
            Some(s) => {
                self.verts[s as usize] = v;
                s
            }
            None => {
                self.verts.push(v);
                (self.verts.len() - 1) as u32
            }
        };
        self.slot_of.insert(id, s);
        s
    }

    fn free_vert(&mut self, s: u32) {
        let v = &mut self.verts[s as usize];
        v.live = false;
        v.tri = NIL;
        let id = v.id;
        self.slot_of.remove(&id);
        self.free_verts.push(s);
    }

    fn alloc_tri(&mut self, v: [u32; 3]) -> u32 {
        let t = Tri {
            v,
            n: [NIL; 3],
            mark: 0,
        };
        if !t.is_ghost() {
            self.finite_tris += 1;
        }
        match self.free_tris.pop() {
            Some(i) => {
                self.tris[i as usize] = t;
                i
            }
            None => {
                self.tris.push(t);
                (self.tris.len() - 1) as u32
            }
        }
    }

    fn free_tri(&mut self, i: u32) {
        let t = &mut self.tris[i as usize];
        if !t.is_ghost() {
            self.finite_tris -= 1;
        }
        t.v = [NIL; 3];
        t.n = [NIL; 3];
        self.free_tris.push(i);
    }

    /// Rebuilds the whole structure over already-allocated vertex slots.
    fn build_from_slots(&mut self, mut slots: Vec<u32>) {
        self.tris.clear();
        self.free_tris.clear();
        self.finite_tris = 0;
        self.last_tri = NIL;
        for &s in &slots {
            self.verts[s as usize].tri = NIL;
        }
        hilbert::sort_slots(&mut slots, |s| self.verts[s as usize].p);

        let third = if slots.len() >= 3 {
            let a = self.verts[slots[0] as usize].p;
            let b = self.verts[slots[1] as usize].p;
            slots[2..]
                .iter()
                .position(|&s| orient_det(a, b, self.verts[s as usize].p) != 0.0)
                .map(|i| i + 2)
        } else {
            None
        };
        let Some(ci) = third else {
            slots.sort_by(|&a, &b| cmp_lex(self.verts[a as usize].p, self.verts[b as usize].p));
            self.mode = Mode::Line(slots);
            return;
        };

        self.mode = Mode::Mesh;
        let (a, b, c) = (slots[0], slots[1], slots[ci]);
        let (b, c) = if orient_det(self.point_of(a), self.point_of(b), self.point_of(c)) > 0.0 {
            (b, c)
        } else {
            (c, b)
        };
        let created = [
            self.alloc_tri([a, b, c]),
            self.alloc_tri([b, a, INF]),
            self.alloc_tri([c, b, INF]),
            self.alloc_tri([a, c, INF]),
        ];
        self.link_among(&created);
        for &t in &created {
            for &v in &self.tris[t as usize].v {
                if v != INF {
                    self.verts[v as usize].tri = t;
                }
            }
        }
        self.last_tri = created[0];

        for (i, &s) in slots.iter().enumerate() {
            if i == 0 || i == 1 || i == ci {
                continue;
            }
            let p = self.verts[s as usize].p;
            let t = self.walk(p, self.last_tri);
            self.insert_into_cavity(s, t);
        }
    }

    /// Links neighbor pointers among a set of triangles that tile a closed
    /// region together.
    fn link_among(&mut self, tris: &[u32]) {
        let mut by_edge: FxHashMap<(u32, u32), (u32, usize)> = FxHashMap::default();
        for &t in tris {
            let v = self.tris[t as usize].v;
            for i in 0..3 {
                by_edge.insert((v[(i + 1) % 3], v[(i + 2) % 3]), (t, i));
            }
        }
        for &t in tris {
            let v = self.tris[t as usize].v;
            for i in 0..3 {
                if let Some(&(o, _)) = by_edge.get(&(v[(i + 2) % 3], v[(i + 1) % 3])) {
                    self.tris[t as usize].n[i] = o;
                }
            }
        }
    }

    fn start_tri(&self, hint: Option<PointId>) -> u32 {
        hint.and_then(|h| self.slot_of.get(&h))
            .map(|&s| self.verts[s as usize].tri)
            .unwrap_or(self.last_tri)
    }

    /// Visibility walk from `start` to a triangle whose closure contains
    /// `p`, or to a ghost triangle whose outer half-plane contains it.
    fn walk(&self, p: Point, start: u32) -> u32 {
        let mut t = start;
        if self.tris[t as usize].is_ghost() {
            let tri = &self.tris[t as usize];
            t = tri.n[tri.index_of(INF)];
        }
        let mut rot = 0usize;
        loop {
            let tri = &self.tris[t as usize];
            if tri.is_ghost() {
                return t;
            }
            rot = (rot + 1) % 3;
            let mut next = NIL;
            for k in 0..3 {
                let i = (k + rot) % 3;
                let a = self.verts[tri.v[(i + 1) % 3] as usize].p;
                let b = self.verts[tri.v[(i + 2) % 3] as usize].p;
                if orient_det(a, b, p) < 0.0 {
                    next = tri.n[i];
                    break;
                }
            }
            if next == NIL {
                return t;
            }
            t = next;
        }
    }

    /// Whether vertex `s` lies inside the (tie-broken) circumcircle of
    /// triangle `t`. For a ghost triangle the "circle" is the open outer
    /// half-plane of its hull edge plus the open edge itself.
    fn conflicts(&self, t: u32, s: u32) -> bool {
        let tri = &self.tris[t as usize];
        let q = self.verts[s as usize];
        if tri.is_ghost() {
            let i = tri.index_of(INF);
            let x = self.verts[tri.v[(i + 1) % 3] as usize].p;
            let y = self.verts[tri.v[(i + 2) % 3] as usize].p;
            ghost_contains(x, y, q.p)
        } else {
            let [a, b, c] = tri.v.map(|s| {
                let v = &self.verts[s as usize];
                (v.p, v.id)
            });
            in_circle_tiebroken(a, b, c, (q.p, q.id))
        }
    }

    /// Bowyer-Watson step: removes every triangle in conflict with `s`
    /// (starting from `seed`, which must conflict) and fans the cavity
    /// boundary to `s`.
    fn insert_into_cavity(&mut self, s: u32, seed: u32) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            for t in &mut self.tris {
                t.mark = 0;
            }
            self.epoch = 1;
        }
        let epoch = self.epoch;
        self.tris[seed as usize].mark = epoch;
        let mut cavity = vec![seed];
        let mut stack = vec![seed];
        let mut boundary: Vec<(u32, usize)> = Vec::new();
        while let Some(t) = stack.pop() {
            for i in 0..3 {
                let o = self.tris[t as usize].n[i];
                if self.tris[o as usize].mark == epoch {
                    continue;
                }
                if self.conflicts(o, s) {
                    self.tris[o as usize].mark = epoch;
                    cavity.push(o);
                    stack.push(o);
                } else {
                    boundary.push((t, i));
                }
            }
        }

        let mut created: Vec<(u32, u32, u32)> = Vec::with_capacity(boundary.len());
        for &(t, i) in &boundary {
            let old = self.tris[t as usize];
            let (a, b, outer) = (old.v[(i + 1) % 3], old.v[(i + 2) % 3], old.n[i]);
            debug_assert!(
                a == INF || b == INF || orient_det(self.point_of(a), self.point_of(b), self.point_of(s)) > 0.0,
                "cavity is not star-shaped"
            );
            let nt = self.alloc_tri([a, b, s]);
            self.tris[nt as usize].n[2] = outer;
            let ot = &mut self.tris[outer as usize];
            let j = (0..3).find(|&j| ot.n[j] == t).expect("outer triangle links back");
            ot.n[j] = nt;
            created.push((a, b, nt));
        }
        let mut by_first: Vec<(u32, u32)> = created.iter().map(|&(a, _, t)| (a, t)).collect();
        let mut by_second: Vec<(u32, u32)> = created.iter().map(|&(_, b, t)| (b, t)).collect();
        by_first.sort_unstable();
        by_second.sort_unstable();
        let find = |v: &[(u32, u32)], key: u32| {
            v[v.binary_search_by_key(&key, |e| e.0)
                .expect("cavity boundary is a cycle")]
            .1
        };
        for &(a, b, nt) in &created {
            // edge (b, s) is shared with the triangle starting at b,
            // edge (s, a) with the triangle ending at a
            self.tris[nt as usize].n[0] = find(&by_first, b);
            self.tris[nt as usize].n[1] = find(&by_second, a);
            if a != INF {
                self.verts[a as usize].tri = nt;
            }
            if b != INF {
                self.verts[b as usize].tri = nt;
            }
        }
        for t in cavity {
            self.free_tri(t);
        }
        let last = created.last().expect("non-empty cavity").2;
        self.verts[s as usize].tri = last;
        self.last_tri = last;
    }

    // ----- deletion -----

    fn remove_from_mesh(&mut self, s: u32) {
        // triangles around s in counter-clockwise order, with the link
        // polygon they leave behind
        let mut ring_tris = Vec::with_capacity(8);
        let mut poly = Vec::with_capacity(8);
        let mut outer = Vec::with_capacity(8);
        let start = self.verts[s as usize].tri;
        let mut t = start;
        loop {
            let tri = &self.tris[t as usize];
            let i = tri.index_of(s);
            ring_tris.push(t);
            poly.push(tri.v[(i + 1) % 3]);
            outer.push(tri.n[i]);
            t = tri.n[(i + 1) % 3];
            if t == start {
                break;
            }
        }
        let ring_finite = ring_tris.iter().filter(|&&t| !self.tris[t as usize].is_ghost()).count();
        if ring_finite == self.finite_tris {
            // every triangle touches s: the rest may be collinear
            self.free_vert(s);
            let slots: Vec<u32> = self.slot_of.values().copied().collect();
            self.build_from_slots(slots);
            return;
        }
        for &t in &ring_tris {
            self.free_tri(t);
        }
        self.free_vert(s);

        // Ear clipping: an ear is cut only if its circumcircle holds no other
        // polygon vertex, so every cut triangle is Delaunay.
        let mut j = 0usize;
        let mut failures = 0usize;
        while poly.len() > 3 {
            let m = poly.len();
            let (ia, ic) = ((j + m - 1) % m, (j + 1) % m);
            let (a, b, c) = (poly[ia], poly[j], poly[ic]);
            if self.is_delaunay_ear(a, b, c, &poly) {
                let nt = self.alloc_tri([a, b, c]);
                self.tris[nt as usize].n = [outer[j], NIL, outer[ia]];
                self.relink(outer[j], b, c, nt);
                self.relink(outer[ia], a, b, nt);
                self.touch(nt);
                outer[ia] = nt;
                poly.remove(j);
                outer.remove(j);
                if j >= poly.len() {
                    j = 0;
                }
                failures = 0;
            } else {
                j = (j + 1) % m;
                failures += 1;
                assert!(failures <= m, "no Delaunay ear in deletion polygon");
            }
        }
        let nt = self.alloc_tri([poly[0], poly[1], poly[2]]);
        self.tris[nt as usize].n = [outer[1], outer[2], outer[0]];
        self.relink(outer[0], poly[0], poly[1], nt);
        self.relink(outer[1], poly[1], poly[2], nt);
        self.relink(outer[2], poly[2], poly[0], nt);
        self.touch(nt);
        self.last_tri = nt;
    }

    /// Points the neighbor link of triangle `o` across edge `(b, a)` at `nt`.
    /// `o` holds the edge as `(b, a)`; the new triangle holds it as `(a, b)`.
    fn relink(&mut self, o: u32, a: u32, b: u32, nt: u32) {
        let ot = &mut self.tris[o as usize];
        let k = (0..3).find(|&k| ot.v[k] != a && ot.v[k] != b).expect("shared edge");
        ot.n[k] = nt;
    }

    fn touch(&mut self, t: u32) {
        for v in self.tris[t as usize].v {
            if v != INF {
                self.verts[v as usize].tri = t;
            }
        }
    }

    fn is_delaunay_ear(&self, a: u32, b: u32, c: u32, poly: &[u32]) -> bool {
        let others = poly.iter().copied().filter(|&d| d != a && d != b && d != c && d != INF);
        if a == INF || b == INF || c == INF {
            // rotate so the infinite vertex comes last: (x, y, INF)
            let (x, y) = if a == INF {
                (b, c)
            } else if b == INF {
                (c, a)
            } else {
                (a, b)
            };
            let (px, py) = (self.point_of(x), self.point_of(y));
            return others.into_iter().all(|d| !ghost_contains(px, py, self.point_of(d)));
        }
        let v = |s: u32| (self.point_of(s), self.id_of(s));
        if orient_det(self.point_of(a), self.point_of(b), self.point_of(c)) <= 0.0 {
            return false;
        }
        let (va, vb, vc) = (v(a), v(b), v(c));
        others.into_iter().all(|d| !in_circle_tiebroken(va, vb, vc, v(d)))
    }

    fn id_of_any(&self, s: u32) -> String {
        if s == INF {
            "inf".to_string()
        } else {
            self.id_of(s).to_string()
        }
    }

    // ----- line mode -----

    fn line_search(&self, p: Point) -> std::result::Result<usize, usize> {
        let Mode::Line(line) = &self.mode else {
            unreachable!("line mode")
        };
        line.binary_search_by(|&s| cmp_lex(self.verts[s as usize].p, p))
    }
}

/// Ghost-triangle membership: strictly left of `x -> y`, or on the open
/// segment between them.
fn ghost_contains(x: Point, y: Point, q: Point) -> bool {
    let o = orient_det(x, y, q);
    if o != 0.0 {
        return o > 0.0;
    }
    // collinear: compare along the dominant axis, which is exact
    let (dx, dy) = (y.x - x.x, y.y - x.y);
    let (t, lo, hi) = if dx.abs() >= dy.abs() {
        (q.x, x.x.min(y.x), x.x.max(y.x))
    } else {
        (q.y, x.y.min(y.y), x.y.max(y.y))
    };
    t > lo && t < hi
}

fn cmp_lex(a: Point, b: Point) -> Ordering {
    // coordinates are finite; partial_cmp also equates 0.0 and -0.0
    let by = |u: f64, v: f64| u.partial_cmp(&v).unwrap_or(Ordering::Equal);
    by(a.x, b.x).then(by(a.y, b.y))
}

/// Rejects repeated ids and repeated coordinates, naming both ids.
pub(crate) fn check_distinct(points: &[(PointId, Point)]) -> Result<()> {
    let mut by_coord: Vec<(Point, PointId)> = points.iter().map(|&(id, p)| (p, id)).collect();
    by_coord.sort_unstable_by(|a, b| cmp_lex(a.0, b.0).then(a.1.cmp(&b.1)));
    for w in by_coord.windows(2) {
        if w[0].0.key() == w[1].0.key() {
            return Err(Error::DuplicatePoint {
                first: w[0].1,
                second: w[1].1,
            });
        }
    }
    let mut ids: Vec<PointId> = points.iter().map(|e| e.0).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::IdCollision(w[0]));
    }
    Ok(())
}
