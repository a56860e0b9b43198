use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::seeding::{derive_substream, Purpose};
use super::table::{write_atomic, Cell, Column, ColumnKind, StatTable};
use crate::error::{invalid, Result};
use crate::graphgen::{coarse_grain, sample_graph, sample_graph_fast, GraphSample, ModelParams};
use crate::heavytail::{sample_weights, WeightVector};
use crate::motifs::{
    degree_sequence, isolated_count, triangle_counts, wedge_counts, WedgeConvention,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    Degree,
    Wedges,
    Triangles,
    Dust,
    JointDegree,
    CoarseGrain,
}

impl Statistic {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "degree" => Self::Degree,
            "wedges" => Self::Wedges,
            "triangles" => Self::Triangles,
            "dust" => Self::Dust,
            "joint-degree" => Self::JointDegree,
            "coarse-grain" => Self::CoarseGrain,
            other => return Err(invalid(format!("unknown statistic {other:?}"))),
        })
    }
}

/// Fresh weights per replica average over the weights; pinned weights keep one
/// draw (replica 0's) for every replica.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightPolicy {
    #[default]
    Fresh,
    Pinned,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    Naive,
    #[default]
    Fast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub params: ModelParams,
    pub replicas: usize,
    pub master_seed: u64,
    pub statistics: BTreeSet<Statistic>,
    /// Zero-based labels of the two nodes whose degrees are recorded jointly.
    pub joint_nodes: (usize, usize),
    pub pgf_grid: Vec<(f64, f64)>,
    /// Where to save the table. Not part of the echoed spec, so the file
    /// contents do not depend on where they are written.
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
    pub weight_policy: WeightPolicy,
    pub sampler: Sampler,
    /// Block size for the coarse-grain statistic.
    pub block_size: usize,
    /// Worker threads; `None` uses the rayon default. Results do not depend
    /// on it, so it is left out of the echoed spec.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl EnsembleSpec {
    pub fn new(params: ModelParams, replicas: usize, master_seed: u64) -> Self {
        Self {
            params,
            replicas,
            master_seed,
            statistics: [Statistic::Degree].into_iter().collect(),
            joint_nodes: (0, 1),
            pgf_grid: vec![(0.5, 0.5)],
            output_path: None,
            weight_policy: WeightPolicy::Fresh,
            sampler: Sampler::Fast,
            block_size: 2,
            threads: None,
        }
    }

    pub fn with_statistics(mut self, stats: &[Statistic]) -> Self {
        self.statistics = stats.iter().copied().collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.replicas == 0 {
            return Err(invalid("replicas must be at least 1"));
        }
        let (a, b) = self.joint_nodes;
        if a == b || a >= self.params.n || b >= self.params.n {
            return Err(invalid(format!(
                "joint nodes must be distinct and below n = {}, got ({a}, {b})",
                self.params.n
            )));
        }
        for &(t, s) in &self.pgf_grid {
            if !(t > 0.0 && t <= 1.0 && s > 0.0 && s <= 1.0) {
                return Err(invalid(format!(
                    "PGF grid point ({t}, {s}) outside (0, 1]^2"
                )));
            }
        }
        if self.statistics.contains(&Statistic::CoarseGrain)
            && (self.block_size == 0 || !self.params.n.is_multiple_of(self.block_size))
        {
            return Err(invalid(format!(
                "block size {} does not divide n = {}",
                self.block_size, self.params.n
            )));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads must be at least 1"));
        }
        Ok(())
    }

    pub fn weight_seed(&self, replica: u64) -> u64 {
        let r = match self.weight_policy {
            WeightPolicy::Fresh => replica,
            WeightPolicy::Pinned => 0,
        };
        derive_substream(self.master_seed, r, Purpose::Weights)
    }

    pub fn graph_seed(&self, replica: u64) -> u64 {
        derive_substream(self.master_seed, replica, Purpose::Graph)
    }

    /// Draws the weights and graph of one replica.
    pub fn realize(&self, replica: u64) -> Result<(WeightVector, GraphSample)> {
        let weights = sample_weights(self.params.n, self.params.alpha, self.weight_seed(replica))?;
        let graph = match self.sampler {
            Sampler::Naive => sample_graph(&self.params, &weights, self.graph_seed(replica))?,
            Sampler::Fast => sample_graph_fast(&self.params, &weights, self.graph_seed(replica))?,
        };
        Ok((weights, graph.with_replica_id(replica)))
    }

    fn columns(&self) -> Vec<Column> {
        use ColumnKind::*;
        let mut cols = vec![
            Column::new("replica", "", Int),
            Column::new("weight_seed", "", Uint),
            Column::new("graph_seed", "", Uint),
            Column::new("n", "nodes", Int),
            Column::new("edges", "edges", Int),
        ];
        let has = |s| self.statistics.contains(&s);
        if has(Statistic::Degree) {
            cols.push(Column::new("mean_degree", "edges/node", Float));
            cols.push(Column::new("max_degree", "edges", Int));
        }
        if has(Statistic::Degree) || has(Statistic::Dust) {
            cols.push(Column::new("isolated", "nodes", Int));
        }
        if has(Statistic::Dust) {
            cols.push(Column::new("has_dust", "", Bool));
        }
        if has(Statistic::Wedges) {
            cols.push(Column::new("wedges", "unordered neighbour pairs", Int));
        }
        if has(Statistic::Triangles) {
            cols.push(Column::new("triangles", "triangles", Int));
        }
        if has(Statistic::JointDegree) {
            cols.push(Column::new("degree_a", "edges", Int));
            cols.push(Column::new("degree_b", "edges", Int));
        }
        if has(Statistic::CoarseGrain) {
            cols.push(Column::new("coarse_n", "blocks", Int));
            cols.push(Column::new("coarse_edges", "edges", Int));
            cols.push(Column::new("coarse_isolated", "blocks", Int));
        }
        cols
    }

    fn row(&self, replica: u64) -> Result<Vec<Cell>> {
        let (weights, graph) = self.realize(replica)?;
        let has = |s| self.statistics.contains(&s);
        let mut row: Vec<Cell> = vec![
            (replica as i64).into(),
            graph.weight_seed().into(),
            graph.graph_seed().into(),
            graph.n().into(),
            graph.edge_count().into(),
        ];
        if has(Statistic::Degree) {
            let rec = degree_sequence(&graph);
            row.push(rec.mean().into());
            row.push(rec.max().into());
        }
        let isolated = isolated_count(&graph);
        if has(Statistic::Degree) || has(Statistic::Dust) {
            row.push(isolated.into());
        }
        if has(Statistic::Dust) {
            row.push((isolated > 0).into());
        }
        if has(Statistic::Wedges) {
            let total: u64 = wedge_counts(&graph, WedgeConvention::Definition)
                .iter()
                .sum();
            row.push((total as i64).into());
        }
        if has(Statistic::Triangles) {
            row.push((triangle_counts(&graph).total as i64).into());
        }
        if has(Statistic::JointDegree) {
            row.push(graph.degree(self.joint_nodes.0).into());
            row.push(graph.degree(self.joint_nodes.1).into());
        }
        if has(Statistic::CoarseGrain) {
            let (coarse, _) = coarse_grain(&graph, &weights, self.block_size)?;
            row.push(coarse.n().into());
            row.push(coarse.edge_count().into());
            row.push(isolated_count(&coarse).into());
        }
        Ok(row)
    }
}

/// Runs `f` on a pool with the requested number of threads.
pub(crate) fn with_pool<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Metadata shared by every table: version and the full spec echo.
pub(crate) fn spec_metadata<S: Serialize>(
    table: &mut StatTable,
    kind: &str,
    spec: &S,
) -> Result<()> {
    table
        .metadata
        .insert("version".into(), crate::VERSION.into());
    table.metadata.insert("experiment".into(), kind.into());
    table
        .metadata
        .insert("spec".into(), serde_json::to_string(spec)?);
    Ok(())
}

/// Writes `<out>.run.json` next to a result file: the wall-clock time and the
/// command that produced it. Kept apart so the result itself stays
/// byte-identical between reruns.
pub fn write_run_record(out: &Path, wall_clock_s: f64, command: &str) -> Result<()> {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".run.json");
    let record = serde_json::json!({
        "version": crate::VERSION,
        "command": command,
        "wall_clock_s": wall_clock_s,
    });
    write_atomic(&out.with_file_name(name), |w| {
        serde_json::to_writer_pretty(&mut *w, &record)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

/// One row per replica, in replica order whatever the execution order.
/// A panic in any replica aborts the whole run.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<StatTable> {
    spec.validate()?;
    let rows: Vec<Result<Vec<Cell>>> = with_pool(spec.threads, || {
        (0..spec.replicas as u64)
            .into_par_iter()
            .map(|r| spec.row(r))
            .collect()
    })?;
    let mut table = StatTable::new(spec.columns());
    spec_metadata(&mut table, "ensemble", spec)?;
    for row in rows {
        table.push(row?)?;
    }
    if let Some(path) = &spec.output_path {
        table.save(path)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, replicas: usize) -> EnsembleSpec {
        EnsembleSpec::new(ModelParams::critical(n, 0.5, 1.0).unwrap(), replicas, 77)
    }

    #[test]
    fn single_replica_degree_row() {
        let t = run_ensemble(&spec(100, 1)).unwrap();
        assert_eq!(t.rows.len(), 1);
        for col in ["replica", "n", "mean_degree", "isolated"] {
            assert!(t.column_index(col).is_some(), "{col}");
        }
        assert_eq!(t.column_f64("n").unwrap(), vec![100.0]);
    }

    #[test]
    fn all_statistics_are_consistent() {
        let s = spec(120, 6).with_statistics(&[
            Statistic::Degree,
            Statistic::Wedges,
            Statistic::Triangles,
            Statistic::Dust,
            Statistic::JointDegree,
            Statistic::CoarseGrain,
        ]);
        let t = run_ensemble(&s).unwrap();
        let replicas = t.column_f64("replica").unwrap();
        assert_eq!(replicas, (0..6).map(|r| r as f64).collect::<Vec<_>>());
        let edges = t.column_f64("edges").unwrap();
        let mean = t.column_f64("mean_degree").unwrap();
        for (e, m) in edges.iter().zip(&mean) {
            assert!((2.0 * e / 120.0 - m).abs() < 1e-12);
        }
        let coarse = t.column_f64("coarse_edges").unwrap();
        assert!(coarse.iter().zip(&edges).all(|(c, e)| c <= e));
        // Re-derive one row independently.
        let (_, g) = s.realize(3).unwrap();
        assert_eq!(t.column_f64("degree_a").unwrap()[3], g.degree(0) as f64);
        assert_eq!(
            t.column_f64("triangles").unwrap()[3],
            triangle_counts(&g).total as f64
        );
    }

    #[test]
    fn serial_and_parallel_agree() {
        let mut s = spec(300, 12).with_statistics(&[Statistic::Degree, Statistic::Triangles]);
        s.threads = Some(1);
        let serial = run_ensemble(&s).unwrap();
        s.threads = Some(4);
        let parallel = run_ensemble(&s).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn weight_policies() {
        let mut s = spec(50, 3);
        assert_ne!(s.weight_seed(1), s.weight_seed(2));
        s.weight_policy = WeightPolicy::Pinned;
        assert_eq!(s.weight_seed(1), s.weight_seed(2));
        assert_ne!(s.graph_seed(1), s.graph_seed(2));
        let (w1, _) = s.realize(1).unwrap();
        let (w2, _) = s.realize(2).unwrap();
        assert_eq!(w1, w2);
    }

    #[test]
    fn validation() {
        let mut s = spec(10, 1);
        s.replicas = 0;
        assert!(run_ensemble(&s).is_err());
        let mut s = spec(10, 1);
        s.joint_nodes = (3, 3);
        assert!(s.validate().is_err());
        s.joint_nodes = (3, 10);
        assert!(s.validate().is_err());
        let mut s = spec(10, 1).with_statistics(&[Statistic::CoarseGrain]);
        s.block_size = 3;
        assert!(s.validate().is_err());
        let mut s = spec(10, 1);
        s.pgf_grid = vec![(0.0, 0.5)];
        assert!(s.validate().is_err());
        assert!(Statistic::parse("nope").is_err());
        assert_eq!(
            Statistic::parse("joint-degree").unwrap(),
            Statistic::JointDegree
        );
    }

    #[test]
    fn output_file_is_written_and_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = spec(200, 4).with_statistics(&[Statistic::Degree, Statistic::Dust]);
        s.output_path = Some(dir.path().join("a.csv"));
        run_ensemble(&s).unwrap();
        s.output_path = Some(dir.path().join("b.csv"));
        run_ensemble(&s).unwrap();
        let a = std::fs::read(dir.path().join("a.csv")).unwrap();
        let b = std::fs::read(dir.path().join("b.csv")).unwrap();
        assert_eq!(a, b);
        let back = StatTable::load(&dir.path().join("a.csv")).unwrap();
        s.output_path = None;
        assert_eq!(back, run_ensemble(&s).unwrap());
    }
}
