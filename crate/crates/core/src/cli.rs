//! Command-line interface.
//!
//! Output formats are stable:
//!
//! * `build` prints `n=<n> k=<k> seed=<seed> layer_sizes=<a,b,..> build_ms=<ms>`
//!   followed by a human-readable summary line.
//! * `query` prints one `id=<id> x=<x> y=<y> dist=<d>` line per result,
//!   nearest first, then
//!   `stats distance_evaluations=<n> points_visited=<n> layers_traversed=<n>`.
//! * `update` prints `revision=<r> deleted=<n> inserted=<n> n=<n> layer_sizes=<a,b,..>`.
//! * `bench` writes the CSV report (see [`crate::bench::CSV_HEADER`]) and
//!   Markdown tables; `gen` writes an `id,x,y` point file.
//!
//! Runtime errors exit with status 1, usage errors with status 2.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, Distribution, GridConfig, IndexKind, PointSource};
use crate::error::{Error, Result};
use crate::geometry::PointId;
use crate::io;
use crate::mvd::{MvdConfig, MvdIndex, DEFAULT_K, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(
    name = "mvd",
    version,
    about = "Exact nearest-neighbor search with a multi-layer Voronoi diagram index"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an index from a point file and write a snapshot.
    Build(BuildArgs),
    /// Query a snapshot for the nearest point(s) to a location.
    Query(QueryArgs),
    /// Apply deletes, then inserts, to a snapshot.
    Update(UpdateArgs),
    /// Run the query benchmark grid.
    Bench(BenchArgs),
    /// Generate a synthetic point file.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Point file (`id,x,y` or `x,y` records).
    #[arg(long)]
    pub input: PathBuf,
    /// Snapshot to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Construction parameter: expected size ratio between layers.
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Disable the random demotion step of deletions.
    #[arg(long)]
    pub no_demotion: bool,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Snapshot to query.
    #[arg(long)]
    pub input: PathBuf,
    /// Query location as `x,y`.
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    /// Number of neighbors to return; omit for the single nearest.
    #[arg(long)]
    pub k_query: Option<usize>,
}

#[derive(Debug, Args)]
pub struct UpdateArgs {
    /// Snapshot to update.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the result; defaults to rewriting the input.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Point file of points to insert. `x,y` records get fresh ids.
    #[arg(long)]
    pub insert: Option<PathBuf>,
    /// File of ids to delete, one per line.
    #[arg(long)]
    pub delete: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DistArg {
    Uniform,
    Exp,
    File,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = DistArg::Uniform)]
    pub dist: DistArg,
    /// Point file, with `--dist file`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Data sizes; defaults to 10,100,1000,10000 (or the whole file).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Query sizes; 1 runs nearest-neighbor queries.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub k_list: Vec<usize>,
    #[arg(long, default_value_t = bench::DEFAULT_TRIALS)]
    pub trials: usize,
    /// Queries per trial.
    #[arg(long, default_value_t = bench::DEFAULT_QUERIES_PER_TRIAL)]
    pub queries: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Construction parameter of the index.
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    /// Kd-tree leaf capacity.
    #[arg(long, default_value_t = crate::baselines::DEFAULT_LEAF_CAPACITY)]
    pub leaf_capacity: usize,
    /// Indices to compare (mvd, kdtree, linear).
    #[arg(long, value_delimiter = ',', default_value = "mvd,kdtree")]
    pub indices: Vec<String>,
    /// Report path; the CSV goes here and Markdown and JSON next to it
    /// with `.md` and `.json` extensions. Without it the CSV and Markdown
    /// are printed.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value_t = GenDist::Uniform)]
    pub dist: GenDist,
    /// Number of points.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenDist {
    Uniform,
    Exp,
}

impl Cli {
    /// Flag combinations clap cannot express on its own.
    pub fn usage_error(&self) -> Option<String> {
        match &self.command {
            Command::Bench(b) => match (b.dist, &b.input) {
                (DistArg::File, None) => Some("--dist file requires --input".into()),
                (DistArg::Uniform | DistArg::Exp, Some(_)) => Some("--input can only be used with --dist file".into()),
                _ => None,
            },
            _ => None,
        }
    }
}

fn sizes_str(sizes: &[usize]) -> String {
    sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Build(a) => build(a, out),
        Command::Query(a) => query(a, out),
        Command::Update(a) => update(a, out),
        Command::Bench(a) => run_bench(a, out),
        Command::Gen(a) => gen(a, out),
    }
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn build(a: &BuildArgs, out: &mut dyn Write) -> Result<()> {
    let points = io::read_points(&a.input)?;
    let config = MvdConfig {
        k: a.k,
        seed: a.seed,
        demotion: !a.no_demotion,
    };
    let started = Instant::now();
    let index = MvdIndex::build_with(&points, config)?;
    let build_ms = started.elapsed().as_secs_f64() * 1e3;
    io::save_snapshot(&a.output, &index, 0)?;
    let sizes = index.layer_sizes();
    writeln!(
        out,
        "n={} k={} seed={} layer_sizes={} build_ms={build_ms:.3}",
        index.len(),
        a.k,
        a.seed,
        sizes_str(&sizes)
    )
    .map_err(stdout_err)?;
    writeln!(
        out,
        "built {} points into {} layer{} in {build_ms:.3} ms; snapshot written to {}",
        index.len(),
        sizes.len(),
        if sizes.len() == 1 { "" } else { "s" },
        a.output.display()
    )
    .map_err(stdout_err)
}

fn query(a: &QueryArgs, out: &mut dyn Write) -> Result<()> {
    let q = io::parse_query(&a.point)?;
    let (index, _) = io::load_snapshot(&a.input)?;
    let result = index.knn(q, a.k_query.unwrap_or(1))?;
    for nb in &result.neighbors {
        let p = index.point(nb.id).expect("result ids are indexed");
        writeln!(out, "id={} x={} y={} dist={}", nb.id, p.x, p.y, nb.distance()).map_err(stdout_err)?;
    }
    let s = result.stats;
    writeln!(
        out,
        "stats distance_evaluations={} points_visited={} layers_traversed={}",
        s.distance_evaluations, s.points_visited, s.layers_traversed
    )
    .map_err(stdout_err)
}

fn update(a: &UpdateArgs, out: &mut dyn Write) -> Result<()> {
    let (mut index, revision) = io::load_snapshot(&a.input)?;
    let deletes = match &a.delete {
        Some(p) => io::read_ids(p)?,
        None => Vec::new(),
    };
    let inserts = match &a.insert {
        Some(p) => io::read_point_records(p)?,
        None => Vec::new(),
    };
    let source = |p: &Option<PathBuf>| {
        p.as_deref()
            .map_or_else(String::new, |p: &Path| p.display().to_string())
    };
    for &id in &deletes {
        index.delete(id).map_err(|e| match e {
            Error::UnknownId(id) => {
                Error::InvalidParameter(format!("{}: cannot delete unknown id {id}", source(&a.delete)))
            }
            other => other,
        })?;
    }
    let first_fresh = index.next_id();
    let assigned = io::assign_ids(&inserts, first_fresh);
    for (rec, &(id, p)) in inserts.iter().zip(&assigned) {
        let at = |m: String| Error::Parse {
            path: source(&a.insert),
            line: rec.line,
            message: m,
        };
        if rec.id.is_some() && id.0 < first_fresh {
            return Err(at(format!(
                "id {id} was already issued; new points need ids of at least {first_fresh}"
            )));
        }
        index.insert(id, p).map_err(|e| at(e.to_string()))?;
    }
    let target = a.output.as_deref().unwrap_or(&a.input);
    io::save_snapshot(target, &index, revision + 1)?;
    writeln!(
        out,
        "revision={} deleted={} inserted={} n={} layer_sizes={}",
        revision + 1,
        deletes.len(),
        inserts.len(),
        index.len(),
        sizes_str(&index.layer_sizes())
    )
    .map_err(stdout_err)
}

fn run_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let (source, default_sizes) = match a.dist {
        DistArg::Uniform => (
            PointSource::Synthetic(Distribution::Uniform),
            vec![10, 100, 1000, 10_000],
        ),
        DistArg::Exp => (
            PointSource::Synthetic(Distribution::Exponential),
            vec![10, 100, 1000, 10_000],
        ),
        DistArg::File => {
            let path = a
                .input
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("--dist file requires --input".into()))?;
            let points = io::read_points(path)?;
            let n = points.len();
            let name = path
                .file_name()
                .map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned());
            (PointSource::Dataset { name, points }, vec![n])
        }
    };
    let mut cfg = GridConfig::new(
        source,
        if a.sizes.is_empty() {
            default_sizes
        } else {
            a.sizes.clone()
        },
    );
    cfg.indices = a
        .indices
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<IndexKind>>>()?;
    cfg.k_list = a.k_list.clone();
    cfg.trials = a.trials;
    cfg.queries_per_trial = a.queries;
    cfg.seed = a.seed;
    cfg.mvd_k = a.k;
    cfg.leaf_capacity = a.leaf_capacity;
    let report = bench::run_grid(&cfg)?;
    match &a.output {
        Some(path) => {
            let write = |p: &Path, text: String| {
                std::fs::write(p, text).map_err(|source| Error::Io {
                    path: p.to_path_buf(),
                    source,
                })
            };
            write(path, report.to_csv())?;
            write(&path.with_extension("md"), report.to_markdown())?;
            write(&path.with_extension("json"), report.to_json())?;
            writeln!(out, "wrote {} rows to {}", report.rows.len(), path.display()).map_err(stdout_err)
        }
        None => write!(out, "{}\n{}", report.to_csv(), report.to_markdown()).map_err(stdout_err),
    }
}

fn gen(a: &GenArgs, out: &mut dyn Write) -> Result<()> {
    if a.n == 0 {
        return Err(Error::InvalidParameter("--n must be positive".into()));
    }
    let dist = match a.dist {
        GenDist::Uniform => Distribution::Uniform,
        GenDist::Exp => Distribution::Exponential,
    };
    let points: Vec<(PointId, _)> = bench::gen_points(dist, a.n, a.seed);
    match &a.output {
        Some(path) => io::write_points(path, &points),
        None => io::write_points_to(out, &points).map_err(stdout_err),
    }
}
