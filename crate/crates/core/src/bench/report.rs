use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use super::{GridConfig, PointSource, EXPONENTIAL_RATE};
use crate::stats::QueryStats;

/// Column header of [`BenchReport::to_csv`].
pub const CSV_HEADER: &str = "index,n,k_query,trials,mean_ns,median_ns,p95_ns,mean_dist_evals,mean_visited,build_ms";

/// How the data of a report was produced and aggregated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub dataset: String,
    /// Rate of the exponential distribution, when used.
    pub exponential_rate: Option<f64>,
    pub rescale: Option<String>,
    pub queries: String,
    pub seed: u64,
    pub trials: usize,
    pub queries_per_trial: usize,
    pub mvd_k: usize,
    pub leaf_capacity: usize,
    pub aggregation: String,
}

impl Metadata {
    pub(crate) fn describe(cfg: &GridConfig) -> Self {
        let (dataset, exp, rescale, queries) = match &cfg.source {
            PointSource::Synthetic(d) => {
                let exp = matches!(d, super::Distribution::Exponential);
                (
                    d.to_string(),
                    exp.then_some(EXPONENTIAL_RATE),
                    exp.then(|| "min-max into the unit square".to_string()),
                    "same distribution as the data, disjoint from it".to_string(),
                )
            }
            PointSource::Dataset { name, .. } => (
                name.clone(),
                None,
                None,
                "uniform over the dataset bounding box, disjoint from the data".to_string(),
            ),
        };
        Metadata {
            dataset,
            exponential_rate: exp,
            rescale,
            queries,
            seed: cfg.seed,
            trials: cfg.trials,
            queries_per_trial: cfg.queries_per_trial,
            mvd_k: cfg.mvd_k,
            leaf_capacity: cfg.leaf_capacity,
            aggregation: "one index build per (index, n); times and counts pooled over all queries of all trials; \
                          p95 by nearest rank"
                .to_string(),
        }
    }
}

/// One trial: a batch of queries against one index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: String,
    pub n: usize,
    pub k_query: usize,
    pub trial: usize,
    pub queries: usize,
    pub mean_ns: f64,
    pub total_dist_evals: u64,
    pub total_visited: u64,
    /// Wall time of every query, in query order.
    pub query_ns: Vec<u64>,
}

impl TrialRecord {
    pub(crate) fn new(
        index: &str,
        n: usize,
        k_query: usize,
        trial: usize,
        query_ns: Vec<u64>,
        total: QueryStats,
    ) -> Self {
        TrialRecord {
            index: index.to_string(),
            n,
            k_query,
            trial,
            queries: query_ns.len(),
            mean_ns: mean(&query_ns),
            total_dist_evals: total.distance_evaluations,
            total_visited: total.points_visited,
            query_ns,
        }
    }
}

/// Aggregate of one `(index, n, k_query)` cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub index: String,
    pub n: usize,
    pub k_query: usize,
    pub trials: usize,
    pub mean_ns: f64,
    pub median_ns: f64,
    pub p95_ns: f64,
    pub mean_dist_evals: f64,
    pub mean_visited: f64,
    pub build_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub metadata: Metadata,
    pub rows: Vec<BenchRow>,
    pub trials: Vec<TrialRecord>,
}

fn mean(xs: &[u64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().map(|&x| x as f64).sum::<f64>() / xs.len() as f64
}

fn median(sorted: &[u64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2] as f64
    } else {
        (sorted[m / 2 - 1] as f64 + sorted[m / 2] as f64) / 2.0
    }
}

fn nearest_rank(sorted: &[u64], pct: f64) -> f64 {
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank - 1] as f64
}

impl BenchReport {
    pub fn new(metadata: Metadata) -> Self {
        BenchReport {
            metadata,
            rows: Vec::new(),
            trials: Vec::new(),
        }
    }

    pub(crate) fn push_cell(&mut self, index: &str, n: usize, k_query: usize, build_ms: f64, trials: Vec<TrialRecord>) {
        let mut all: Vec<u64> = trials.iter().flat_map(|t| t.query_ns.iter().copied()).collect();
        all.sort_unstable();
        let queries = all.len() as f64;
        self.rows.push(BenchRow {
            index: index.to_string(),
            n,
            k_query,
            trials: trials.len(),
            mean_ns: mean(&all),
            median_ns: median(&all),
            p95_ns: nearest_rank(&all, 95.0),
            mean_dist_evals: trials.iter().map(|t| t.total_dist_evals).sum::<u64>() as f64 / queries,
            mean_visited: trials.iter().map(|t| t.total_visited).sum::<u64>() as f64 / queries,
            build_ms,
        });
        self.trials.extend(trials);
    }

    pub fn row(&self, index: &str, n: usize, k_query: usize) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.index == index && r.n == n && r.k_query == k_query)
    }

    /// One line per cell under [`CSV_HEADER`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{:.1},{:.1},{:.1},{:.3},{:.3},{:.3}",
                r.index,
                r.n,
                r.k_query,
                r.trials,
                r.mean_ns,
                r.median_ns,
                r.p95_ns,
                r.mean_dist_evals,
                r.mean_visited,
                r.build_ms
            )
            .expect("writing to a string");
        }
        out
    }

    /// Aligned Markdown tables of mean query time and mean distance
    /// evaluations. With several query sizes, rows are query sizes (one
    /// table per data size); otherwise rows are data sizes.
    pub fn to_markdown(&self) -> String {
        let indices: Vec<&str> = {
            let mut seen = Vec::new();
            for r in &self.rows {
                if !seen.contains(&r.index.as_str()) {
                    seen.push(r.index.as_str());
                }
            }
            seen
        };
        let sizes: BTreeSet<usize> = self.rows.iter().map(|r| r.n).collect();
        let ks: BTreeSet<usize> = self.rows.iter().map(|r| r.k_query).collect();
        let m = &self.metadata;
        let mut out = String::new();
        writeln!(out, "# Query benchmark: {}\n", m.dataset).unwrap();
        writeln!(
            out,
            "seed {}, {} trials x {} queries, mvd k = {}, kd-tree leaf capacity = {}\n",
            m.seed, m.trials, m.queries_per_trial, m.mvd_k, m.leaf_capacity
        )
        .unwrap();
        for (title, pick) in [
            (
                "mean query time (ns)",
                (|r: &BenchRow| format!("{:.0}", r.mean_ns)) as fn(&BenchRow) -> String,
            ),
            ("mean distance evaluations", |r: &BenchRow| {
                format!("{:.2}", r.mean_dist_evals)
            }),
        ] {
            if ks.len() > 1 {
                for &n in &sizes {
                    let rows: Vec<(String, Vec<String>)> = ks
                        .iter()
                        .map(|&k| {
                            (
                                k.to_string(),
                                self.cells(&indices, |r| r.n == n && r.k_query == k, pick),
                            )
                        })
                        .collect();
                    writeln!(out, "## {title}, n = {n}\n").unwrap();
                    out.push_str(&table("k", &indices, &rows));
                }
            } else {
                for &k in &ks {
                    let rows: Vec<(String, Vec<String>)> = sizes
                        .iter()
                        .map(|&n| {
                            (
                                n.to_string(),
                                self.cells(&indices, |r| r.n == n && r.k_query == k, pick),
                            )
                        })
                        .collect();
                    let label = if k == 1 { "NN".to_string() } else { format!("{k}NN") };
                    writeln!(out, "## {title}, {label}\n").unwrap();
                    out.push_str(&table("n", &indices, &rows));
                }
            }
        }
        out
    }

    fn cells(&self, indices: &[&str], sel: impl Fn(&BenchRow) -> bool, pick: fn(&BenchRow) -> String) -> Vec<String> {
        indices
            .iter()
            .map(|ix| {
                self.rows
                    .iter()
                    .find(|r| r.index == *ix && sel(r))
                    .map_or_else(|| "-".to_string(), pick)
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn table(first: &str, columns: &[&str], rows: &[(String, Vec<String>)]) -> String {
    let mut widths: Vec<usize> = std::iter::once(first.len())
        .chain(columns.iter().map(|c| c.len()))
        .collect();
    for (label, cells) in rows {
        widths[0] = widths[0].max(label.len());
        for (i, c) in cells.iter().enumerate() {
            widths[i + 1] = widths[i + 1].max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::from("|");
        for (i, c) in cells.iter().enumerate() {
            if i == 0 {
                write!(s, " {c:<w$} |", w = widths[i]).unwrap();
            } else {
                write!(s, " {c:>w$} |", w = widths[i]).unwrap();
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(std::iter::once(first).chain(columns.iter().copied()).collect());
    let mut sep = String::from("|");
    for (i, w) in widths.iter().enumerate() {
        sep.push_str(&if i == 0 {
            format!(":{}|", "-".repeat(w + 1))
        } else {
            format!("{}:|", "-".repeat(w + 1))
        });
    }
    out.push_str(&sep);
    out.push('\n');
    for (label, cells) in rows {
        out.push_str(&line(
            std::iter::once(label.as_str())
                .chain(cells.iter().map(String::as_str))
                .collect(),
        ));
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metadata() -> Metadata {
        Metadata {
            dataset: "uniform".into(),
            exponential_rate: None,
            rescale: None,
            queries: "q".into(),
            seed: 1,
            trials: 2,
            queries_per_trial: 3,
            mvd_k: 100,
            leaf_capacity: 100,
            aggregation: "a".into(),
        }
    }

    fn stats(evals: u64, visited: u64) -> QueryStats {
        QueryStats {
            distance_evaluations: evals,
            points_visited: visited,
            layers_traversed: 0,
        }
    }

    #[test]
    fn aggregates_pool_all_queries() {
        let mut r = BenchReport::new(metadata());
        let trials = vec![
            TrialRecord::new("mvd", 10, 1, 0, vec![10, 40, 20], stats(30, 6)),
            TrialRecord::new("mvd", 10, 1, 1, vec![30, 50, 60], stats(36, 9)),
        ];
        r.push_cell("mvd", 10, 1, 1.5, trials);
        let row = r.row("mvd", 10, 1).unwrap();
        assert_eq!(row.mean_ns, 35.0);
        assert_eq!(row.median_ns, 35.0);
        assert_eq!(row.p95_ns, 60.0);
        assert_eq!(row.mean_dist_evals, 11.0);
        assert_eq!(row.mean_visited, 2.5);
        assert_eq!(r.trials.len(), 2);
        assert_eq!(
            r.to_csv(),
            format!("{CSV_HEADER}\nmvd,10,1,2,35.0,35.0,60.0,11.000,2.500,1.500\n")
        );
    }

    #[test]
    fn markdown_layouts() {
        let mut r = BenchReport::new(metadata());
        for (ix, n) in [("mvd", 10), ("kdtree", 10), ("mvd", 100), ("kdtree", 100)] {
            r.push_cell(
                ix,
                n,
                1,
                0.0,
                vec![TrialRecord::new(ix, n, 1, 0, vec![5], stats(n as u64, 1))],
            );
        }
        let md = r.to_markdown();
        let evals = "## mean distance evaluations, NN\n\n\
                     | n   |    mvd | kdtree |\n\
                     |:----|-------:|-------:|\n\
                     | 10  |  10.00 |  10.00 |\n\
                     | 100 | 100.00 | 100.00 |\n";
        assert!(md.contains(evals), "{md}");

        let mut r = BenchReport::new(metadata());
        for k in [2, 4] {
            r.push_cell(
                "mvd",
                50,
                k,
                0.0,
                vec![TrialRecord::new("mvd", 50, k, 0, vec![5], stats(k as u64, 1))],
            );
        }
        let md = r.to_markdown();
        assert!(md.contains("n = 50"));
        assert!(md.contains("| k |"));
    }
}
