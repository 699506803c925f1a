//! Workload generation and the query benchmark grid.
//!
//! Every answer is checked against the linear-scan oracle as it is timed; a
//! single wrong answer aborts the run with [`Error::OracleMismatch`].
//! Distance-evaluation and visited-point counts are reproducible for a
//! given seed; wall times are not.

mod report;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp};
use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::baselines::{KdTree, LinearScan, SpatialIndex, DEFAULT_LEAF_CAPACITY};
use crate::error::{Error, Result};
use crate::geometry::{Point, PointId};
use crate::mvd::{MvdIndex, DEFAULT_K, DEFAULT_SEED};
use crate::stats::QueryStats;

pub use self::report::{BenchReport, BenchRow, Metadata, TrialRecord, CSV_HEADER};

/// Rate of the per-coordinate exponential distribution before rescaling.
pub const EXPONENTIAL_RATE: f64 = 1.0;
pub const DEFAULT_TRIALS: usize = 5;
pub const DEFAULT_QUERIES_PER_TRIAL: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// i.i.d. uniform on the unit square.
    Uniform,
    /// i.i.d. exponential per coordinate, min-max rescaled into the unit
    /// square.
    Exponential,
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distribution::Uniform => "uniform",
            Distribution::Exponential => "exp",
        })
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Distribution::Uniform),
            "exp" | "exponential" => Ok(Distribution::Exponential),
            _ => Err(Error::InvalidParameter(format!("unknown distribution {s:?}"))),
        }
    }
}

/// A synthetic point set plus its query stream, fully determined by its
/// fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Workload {
    pub distribution: Distribution,
    pub n: usize,
    pub seed: u64,
    pub query_count: usize,
    /// `None` asks for nearest-neighbor queries.
    pub k_query: Option<usize>,
}

impl Workload {
    pub fn new(distribution: Distribution, n: usize, seed: u64) -> Self {
        Workload {
            distribution,
            n,
            seed,
            query_count: DEFAULT_QUERIES_PER_TRIAL,
            k_query: None,
        }
    }

    /// The data points, ids `0..n`.
    pub fn points(&self) -> Vec<(PointId, Point)> {
        gen_points(self.distribution, self.n, self.seed)
    }

    /// `query_count` queries for trial `trial`, drawn from the same
    /// distribution as the data and never coinciding with a data point.
    pub fn queries(&self, data: &[(PointId, Point)], trial: u64) -> Vec<Point> {
        let mut rng = stream(self.seed, 1 + trial);
        let taken: FxHashSet<(u64, u64)> = data.iter().map(|e| e.1.key()).collect();
        let mut draw: Box<dyn FnMut(&mut ChaCha8Rng) -> Point> = match self.distribution {
            Distribution::Uniform => Box::new(|r: &mut ChaCha8Rng| Point::new(r.random(), r.random())),
            Distribution::Exponential => {
                let fit = Rescale::fit(&exponential_raw(&mut stream(self.seed, 0), self.n));
                Box::new(move |r: &mut ChaCha8Rng| fit.apply(exponential_draw(r)))
            }
        };
        draws_avoiding(&mut rng, self.query_count, &taken, &mut *draw)
    }
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn draws_avoiding(
    rng: &mut ChaCha8Rng,
    count: usize,
    taken: &FxHashSet<(u64, u64)>,
    draw: &mut dyn FnMut(&mut ChaCha8Rng) -> Point,
) -> Vec<Point> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = draw(rng);
        if !taken.contains(&p.key()) {
            out.push(p);
        }
    }
    out
}

fn exponential_draw(rng: &mut ChaCha8Rng) -> Point {
    let exp = Exp::new(EXPONENTIAL_RATE).expect("positive rate");
    Point::new(exp.sample(rng), exp.sample(rng))
}

/// `n` distinct raw exponential points.
fn exponential_raw(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
    let mut seen = FxHashSet::default();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = exponential_draw(rng);
        if seen.insert(p.key()) {
            out.push(p);
        }
    }
    out
}

/// Affine map of a point set's bounding box onto the unit square.
#[derive(Clone, Copy, Debug)]
struct Rescale {
    min: Point,
    span: Point,
}

impl Rescale {
    fn fit(points: &[Point]) -> Self {
        let (mut lo, mut hi) = (
            Point::new(f64::INFINITY, f64::INFINITY),
            Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for p in points {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let span = |d: f64| if d > 0.0 { d } else { 1.0 };
        Rescale {
            min: lo,
            span: Point::new(span(hi.x - lo.x), span(hi.y - lo.y)),
        }
    }

    fn apply(&self, p: Point) -> Point {
        Point::new((p.x - self.min.x) / self.span.x, (p.y - self.min.y) / self.span.y)
    }
}

/// `n` pairwise-distinct points with ids `0..n`. The same arguments always
/// give the same points.
pub fn gen_points(distribution: Distribution, n: usize, seed: u64) -> Vec<(PointId, Point)> {
    let mut rng = stream(seed, 0);
    let pts: Vec<Point> = match distribution {
        Distribution::Uniform => {
            let mut seen = FxHashSet::default();
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let p = Point::new(rng.random(), rng.random());
                if seen.insert(p.key()) {
                    out.push(p);
                }
            }
            out
        }
        Distribution::Exponential => {
            let raw = exponential_raw(&mut rng, n);
            let fit = Rescale::fit(&raw);
            let out: Vec<Point> = raw.iter().map(|&p| fit.apply(p)).collect();
            let distinct: FxHashSet<_> = out.iter().map(|&p| p.key()).collect();
            assert_eq!(distinct.len(), n, "rescaling merged two points");
            out
        }
    };
    pts.into_iter()
        .enumerate()
        .map(|(i, p)| (PointId(i as u64), p))
        .collect()
}

/// Uniform queries over the bounding box of `data`, avoiding data points.
/// Used for real datasets whose distribution is unknown.
pub fn bbox_queries(data: &[(PointId, Point)], count: usize, seed: u64) -> Vec<Point> {
    let pts: Vec<Point> = data.iter().map(|e| e.1).collect();
    let fit = Rescale::fit(&pts);
    let taken: FxHashSet<(u64, u64)> = pts.iter().map(|&p| p.key()).collect();
    let mut rng = stream(seed, 1);
    let mut draw = |r: &mut ChaCha8Rng| {
        let (u, v): (f64, f64) = (r.random(), r.random());
        Point::new(fit.min.x + u * fit.span.x, fit.min.y + v * fit.span.y)
    };
    draws_avoiding(&mut rng, count, &taken, &mut draw)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    Mvd,
    Kdtree,
    Linear,
}

impl IndexKind {
    pub fn name(self) -> &'static str {
        match self {
            IndexKind::Mvd => "mvd",
            IndexKind::Kdtree => "kdtree",
            IndexKind::Linear => "linear",
        }
    }
}

impl FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mvd" => Ok(IndexKind::Mvd),
            "kdtree" => Ok(IndexKind::Kdtree),
            "linear" => Ok(IndexKind::Linear),
            _ => Err(Error::InvalidParameter(format!("unknown index {s:?}"))),
        }
    }
}

/// Where the data of a grid comes from.
#[derive(Clone, Debug)]
pub enum PointSource {
    Synthetic(Distribution),
    /// A fixed dataset. Each grid size takes its first `n` points; queries
    /// are uniform over the dataset's bounding box.
    Dataset {
        name: String,
        points: Vec<(PointId, Point)>,
    },
}

#[derive(Clone, Debug)]
pub struct GridConfig {
    pub indices: Vec<IndexKind>,
    pub sizes: Vec<usize>,
    /// Query sizes; 1 runs nearest-neighbor queries.
    pub k_list: Vec<usize>,
    pub source: PointSource,
    pub seed: u64,
    pub trials: usize,
    pub queries_per_trial: usize,
    pub mvd_k: usize,
    pub leaf_capacity: usize,
}

impl GridConfig {
    pub fn new(source: PointSource, sizes: Vec<usize>) -> Self {
        GridConfig {
            indices: vec![IndexKind::Mvd, IndexKind::Kdtree],
            sizes,
            k_list: vec![1],
            source,
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            queries_per_trial: DEFAULT_QUERIES_PER_TRIAL,
            mvd_k: DEFAULT_K,
            leaf_capacity: DEFAULT_LEAF_CAPACITY,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.indices.is_empty() {
            return bad("no index selected");
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return bad("sizes must be positive");
        }
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return bad("k_query values must be positive");
        }
        if self.trials == 0 || self.queries_per_trial == 0 {
            return bad("trials and queries per trial must be positive");
        }
        if let PointSource::Dataset { points, .. } = &self.source {
            if let Some(&n) = self.sizes.iter().find(|&&n| n > points.len()) {
                return Err(Error::InvalidParameter(format!(
                    "size {n} exceeds the dataset's {} points",
                    points.len()
                )));
            }
        }
        Ok(())
    }

    fn cell_data(&self, n: usize) -> (Vec<(PointId, Point)>, Vec<Vec<Point>>) {
        match &self.source {
            PointSource::Synthetic(d) => {
                let w = Workload {
                    distribution: *d,
                    n,
                    seed: self.seed,
                    query_count: self.queries_per_trial,
                    k_query: None,
                };
                let pts = w.points();
                let queries = (0..self.trials as u64).map(|t| w.queries(&pts, t)).collect();
                (pts, queries)
            }
            PointSource::Dataset { points, .. } => {
                let pts = points[..n].to_vec();
                let queries = (0..self.trials as u64)
                    .map(|t| bbox_queries(&pts, self.queries_per_trial, self.seed.wrapping_add(t)))
                    .collect();
                (pts, queries)
            }
        }
    }
}

fn build_index(kind: IndexKind, pts: &[(PointId, Point)], cfg: &GridConfig) -> Result<Box<dyn SpatialIndex>> {
    Ok(match kind {
        IndexKind::Mvd => Box::new(MvdIndex::build(pts, cfg.mvd_k, cfg.seed)?),
        IndexKind::Kdtree => Box::new(KdTree::build(pts, cfg.leaf_capacity)?),
        IndexKind::Linear => Box::new(LinearScan::new(pts.to_vec())),
    })
}

/// Runs every `(index, size, k_query)` cell. One index is built per
/// `(index, size)`; each trial draws a fresh query batch.
pub fn run_grid(cfg: &GridConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let mut report = BenchReport::new(Metadata::describe(cfg));
    for &n in &cfg.sizes {
        let (pts, trial_queries) = cfg.cell_data(n);
        let oracle = LinearScan::new(pts.clone());
        let max_k = *cfg.k_list.iter().max().expect("non-empty");
        let expected: Vec<Vec<Vec<PointId>>> = trial_queries
            .iter()
            .map(|qs| {
                qs.iter()
                    .map(|&q| Ok(oracle.scan_knn(q, max_k)?.into_iter().map(|nb| nb.id).collect()))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        for &kind in &cfg.indices {
            let started = Instant::now();
            let index = build_index(kind, &pts, cfg)?;
            let build_ms = started.elapsed().as_secs_f64() * 1e3;
            for &k_query in &cfg.k_list {
                let mut trials = Vec::with_capacity(cfg.trials);
                for (t, qs) in trial_queries.iter().enumerate() {
                    let mut times = Vec::with_capacity(qs.len());
                    let mut total = QueryStats::default();
                    for (qi, &q) in qs.iter().enumerate() {
                        let started = Instant::now();
                        let (got, stats) = if k_query == 1 {
                            let (id, stats) = index.nn(q)?;
                            (vec![id], stats)
                        } else {
                            let (nbs, stats) = index.knn(q, k_query)?;
                            (nbs.into_iter().map(|nb| nb.id).collect(), stats)
                        };
                        times.push(started.elapsed().as_nanos() as u64);
                        let want = &expected[t][qi][..k_query.min(n)];
                        if got != want {
                            return Err(Error::OracleMismatch {
                                index: kind.name().to_string(),
                                n,
                                k_query,
                                query: q,
                                expected: want.to_vec(),
                                got,
                            });
                        }
                        total += stats;
                    }
                    trials.push(TrialRecord::new(kind.name(), n, k_query, t, times, total));
                }
                report.push_cell(kind.name(), n, k_query, build_ms, trials);
            }
        }
    }
    Ok(report)
}
