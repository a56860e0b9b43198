use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use paretonet::graphgen::{sample_graph, sample_graph_fast, EpsilonRule, ModelParams};
use paretonet::harness::{
    experiment_dust_scan, experiment_joint, run_ensemble, verify, write_atomic, write_run_record,
    DustScanSpec, EnsembleSpec, RunConfig, Sampler, StatTable, Statistic, VerifyLevel,
    VerifyOptions, WeightPolicy,
};
use paretonet::heavytail::{sample_weights, TailIndex};
use paretonet::{Error, Result};

const EXIT_INVALID: u8 = 1;
const EXIT_VERIFY_FAILED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "paretonet",
    version,
    about = "Simulate and verify random graphs with infinite-mean Pareto weights"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one graph and write its edge list.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Replica whose seeds are used.
        #[arg(long, default_value_t = 0)]
        replica: u64,
        /// Also write the weights as CSV.
        #[arg(long)]
        weights_out: Option<PathBuf>,
    },
    /// Per-replica edge count, mean and max degree, isolated nodes.
    Degree(Common),
    /// Per-replica wedge and triangle totals alongside the degree columns.
    Motifs(Common),
    /// Isolated-node scan over a grid of critical-scale constants and sizes.
    DustScan(Common),
    /// Degrees of two fixed nodes per replica and the joint PGF summary.
    Joint(Common),
    /// Per-replica statistics of the block-contracted graph.
    CoarseGrain(Common),
    /// Run the acceptance suite and write a JSON report.
    Verify {
        #[arg(long, value_enum, default_value_t = Level::Full)]
        level: Level,
        /// Comma-separated criterion ids; all when omitted.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Fast,
    Full,
}

/// Flags shared by the simulation subcommands. Each may also be given as a
/// key of the `--config` file; the flag wins.
#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Connection scale.
    #[arg(long, conflicts_with = "k_critical")]
    eps: Option<f64>,
    /// Critical-scale constant k in eps = k n^(-1/alpha).
    #[arg(long)]
    k_critical: Option<f64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Extra statistics, comma-separated (degree, wedges, triangles, dust, joint-degree, coarse-grain).
    #[arg(long)]
    statistics: Option<String>,
    /// Zero-based node pair, e.g. `0,1`.
    #[arg(long)]
    joint_nodes: Option<String>,
    /// PGF points `t:s`, comma-separated.
    #[arg(long)]
    pgf_grid: Option<String>,
    #[arg(long)]
    weight_policy: Option<String>,
    #[arg(long)]
    sampler: Option<String>,
    #[arg(long)]
    block_size: Option<usize>,
    /// Dust scan: comma-separated critical-scale constants.
    #[arg(long)]
    k_grid: Option<String>,
    /// Dust scan: comma-separated increasing sizes.
    #[arg(long)]
    n_grid: Option<String>,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let mut set = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                cfg.set(key, v);
            }
        };
        set("n", self.n.map(|v| v.to_string()));
        set("alpha", self.alpha.map(|v| v.to_string()));
        set("replicas", self.replicas.map(|v| v.to_string()));
        set("seed", self.seed.map(|v| v.to_string()));
        set("out", self.out.as_ref().map(|p| p.display().to_string()));
        set("threads", self.threads.map(|v| v.to_string()));
        set("statistics", self.statistics.clone());
        set("joint-nodes", self.joint_nodes.clone());
        set("pgf-grid", self.pgf_grid.clone());
        set("weight-policy", self.weight_policy.clone());
        set("sampler", self.sampler.clone());
        set("block-size", self.block_size.map(|v| v.to_string()));
        set("k-grid", self.k_grid.clone());
        set("n-grid", self.n_grid.clone());
        // A scale flag replaces either scale key from the file.
        if let Some(eps) = self.eps {
            cfg.remove("k-critical");
            cfg.set("eps", eps.to_string());
        }
        if let Some(k) = self.k_critical {
            cfg.remove("eps");
            cfg.set("k-critical", k.to_string());
        }
        Ok(cfg)
    }
}

fn required<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidParameter(format!("missing --{key} (flag or config key)")))
}

fn alpha_of(cfg: &RunConfig) -> Result<TailIndex> {
    TailIndex::new(required(cfg.parsed::<f64>("alpha")?, "alpha")?)
}

fn params_of(cfg: &RunConfig) -> Result<ModelParams> {
    let n = required(cfg.parsed::<usize>("n")?, "n")?;
    let alpha = alpha_of(cfg)?;
    let rule = match (cfg.parsed::<f64>("eps")?, cfg.parsed::<f64>("k-critical")?) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidParameter(
                "give either eps or k-critical, not both".into(),
            ))
        }
        (Some(epsilon), None) => EpsilonRule::Explicit { epsilon },
        (None, Some(k)) => EpsilonRule::Critical { k },
        (None, None) => EpsilonRule::Critical { k: 1.0 },
    };
    ModelParams::new(n, alpha, rule)
}

fn spec_of(cfg: &RunConfig, base: &[Statistic]) -> Result<EnsembleSpec> {
    let mut spec = EnsembleSpec::new(
        params_of(cfg)?,
        cfg.parsed("replicas")?.unwrap_or(1),
        cfg.parsed("seed")?.unwrap_or(0),
    );
    let mut stats: Vec<Statistic> = base.to_vec();
    if let Some(extra) = cfg.list::<String>("statistics")? {
        for s in extra {
            stats.push(Statistic::parse(&s)?);
        }
    }
    spec = spec.with_statistics(&stats);
    if let Some(nodes) = cfg.list::<usize>("joint-nodes")? {
        let [a, b] = nodes[..] else {
            return Err(Error::InvalidParameter(
                "joint-nodes needs exactly two labels".into(),
            ));
        };
        spec.joint_nodes = (a, b);
    }
    if let Some(grid) = cfg.pairs::<f64>("pgf-grid")? {
        spec.pgf_grid = grid;
    }
    if let Some(p) = cfg.get("weight-policy") {
        spec.weight_policy = match p {
            "fresh" => WeightPolicy::Fresh,
            "pinned" => WeightPolicy::Pinned,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown weight policy {other:?}"
                )))
            }
        };
    }
    if let Some(s) = cfg.get("sampler") {
        spec.sampler = parse_sampler(s)?;
    }
    if let Some(b) = cfg.parsed("block-size")? {
        spec.block_size = b;
    }
    spec.threads = cfg.parsed("threads")?;
    spec.output_path = cfg.get("out").map(PathBuf::from);
    spec.validate()?;
    Ok(spec)
}

fn parse_sampler(s: &str) -> Result<Sampler> {
    match s {
        "naive" => Ok(Sampler::Naive),
        "fast" => Ok(Sampler::Fast),
        other => Err(Error::InvalidParameter(format!(
            "unknown sampler {other:?}"
        ))),
    }
}

fn emit(table: &StatTable, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => table.save(path),
        None => table.write_csv(std::io::stdout().lock()),
    }
}

fn run_table_command(common: &Common, base: &[Statistic], name: &str) -> Result<()> {
    let started = Instant::now();
    let cfg = common.config()?;
    let mut spec = spec_of(&cfg, base)?;
    let out = spec.output_path.take();
    let table = run_ensemble(&spec)?;
    emit(&table, out.as_deref())?;
    if let Some(path) = out {
        write_run_record(&path, started.elapsed().as_secs_f64(), name)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate {
            common,
            replica,
            weights_out,
        } => {
            let started = Instant::now();
            let cfg = common.config()?;
            let spec = spec_of(&cfg, &[])?;
            let weights =
                sample_weights(spec.params.n, spec.params.alpha, spec.weight_seed(replica))?;
            let graph = match spec.sampler {
                Sampler::Naive => sample_graph(&spec.params, &weights, spec.graph_seed(replica))?,
                Sampler::Fast => {
                    sample_graph_fast(&spec.params, &weights, spec.graph_seed(replica))?
                }
            }
            .with_replica_id(replica);
            match &spec.output_path {
                Some(path) => {
                    write_atomic(path, |w| graph.write_edge_list(w))?;
                    write_run_record(path, started.elapsed().as_secs_f64(), "generate")?;
                }
                None => graph.write_edge_list(std::io::stdout().lock())?,
            }
            if let Some(path) = weights_out {
                write_atomic(&path, |w| weights.write_csv(w))?;
            }
        }
        Command::Degree(common) => run_table_command(&common, &[Statistic::Degree], "degree")?,
        Command::Motifs(common) => run_table_command(
            &common,
            &[Statistic::Degree, Statistic::Wedges, Statistic::Triangles],
            "motifs",
        )?,
        Command::CoarseGrain(common) => {
            run_table_command(&common, &[Statistic::CoarseGrain], "coarse-grain")?
        }
        Command::Joint(common) => {
            let started = Instant::now();
            let cfg = common.config()?;
            let spec = spec_of(&cfg, &[Statistic::JointDegree])?;
            let ex = experiment_joint(&spec)?;
            match &spec.output_path {
                Some(path) => write_run_record(path, started.elapsed().as_secs_f64(), "joint")?,
                None => {
                    let mut out = std::io::stdout().lock();
                    ex.pairs.write_csv(&mut out)?;
                    writeln!(out)?;
                    ex.summary.write_csv(&mut out)?;
                }
            }
        }
        Command::DustScan(common) => {
            let started = Instant::now();
            let cfg = common.config()?;
            let spec = DustScanSpec {
                alpha: alpha_of(&cfg)?,
                k_grid: required(cfg.list("k-grid")?, "k-grid")?,
                n_grid: required(cfg.list("n-grid")?, "n-grid")?,
                replicas: cfg.parsed("replicas")?.unwrap_or(1),
                master_seed: cfg.parsed("seed")?.unwrap_or(0),
                threads: cfg.parsed("threads")?,
            };
            let table = experiment_dust_scan(&spec)?;
            let out = cfg.get("out").map(PathBuf::from);
            emit(&table, out.as_deref())?;
            if let Some(path) = out {
                write_run_record(&path, started.elapsed().as_secs_f64(), "dust-scan")?;
            }
        }
        Command::Verify {
            level,
            only,
            out,
            threads,
        } => {
            let opts = VerifyOptions {
                level: match level {
                    Level::Fast => VerifyLevel::Fast,
                    Level::Full => VerifyLevel::Full,
                },
                threads,
                only,
            };
            let report = verify(&opts)?;
            for c in &report.criteria {
                eprintln!(
                    "{} criterion {:>2} ({:.1} s): {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.id,
                    c.runtime_s,
                    c.name
                );
            }
            let json = report.to_json()?;
            match out {
                Some(path) => write_atomic(&path, |w| Ok(writeln!(w, "{json}")?))?,
                None => println!("{json}"),
            }
            if !report.passed {
                return Ok(ExitCode::from(EXIT_VERIFY_FAILED));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
