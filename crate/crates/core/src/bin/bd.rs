use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bdindex::index::format;
use bdindex::oracle::{PseudoinverseOracle, DECOMPOSITION_LIMIT, DENSE_LIMIT};
use bdindex::workload::{removal_report, sample_distinct_pairs, DEFAULT_SEED};
use bdindex::{
    batch_query, build_hierarchy, build_index, cut_decomposition_check, direct_label_oracle,
    edge_centrality, load_edge_list, BDIndex, EdgeListFormat, Graph, QueryEngine, Strategy,
};

#[derive(Parser)]
#[command(name = "bd", version, about = "Exact biharmonic distance index")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Plain,
    Dimacs,
}

impl From<GraphFormat> for EdgeListFormat {
    fn from(f: GraphFormat) -> Self {
        match f {
            GraphFormat::Plain => EdgeListFormat::Plain,
            GraphFormat::Dimacs => EdgeListFormat::DimacsGr,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Separator,
    MinDegree,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Separator => Strategy::Separator,
            StrategyArg::MinDegree => Strategy::MinDegree,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Jsonl,
    Csv,
}

#[derive(clap::Args)]
struct GraphArgs {
    /// Edge list file.
    #[arg(short = 'g', long = "graph")]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "plain")]
    format: GraphFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index file from a graph.
    Build {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value = "separator")]
        strategy: StrategyArg,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Also write the hierarchy as `vertex parent dfs_start dfs_size` lines.
        #[arg(long)]
        tree_out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Answer pair queries.
    Query {
        #[arg(short = 'i', long = "index")]
        index: PathBuf,
        #[arg(short = 'p', long = "pair", num_args = 2, value_names = ["S", "T"], conflicts_with = "pairs")]
        pair: Option<Vec<String>>,
        /// File of `<s> <t>` lines.
        #[arg(long, required_unless_present = "pair")]
        pairs: Option<PathBuf>,
        #[arg(long = "out", value_enum, default_value = "jsonl")]
        out: OutputFormat,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Time random pair queries and compare them with a dense solve.
    Bench {
        #[arg(short = 'i', long = "index")]
        index: PathBuf,
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(short = 'k', long = "samples", value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check an index against dense ground truth.
    Validate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value = "separator")]
        strategy: StrategyArg,
        /// Compare every vertex pair instead of a seeded sample.
        #[arg(long)]
        all_pairs: bool,
        /// Validate this index file instead of building one.
        #[arg(short = 'i', long = "index")]
        index: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Rank edges by the distance between their endpoints.
    Centrality {
        #[arg(short = 'i', long = "index")]
        index: PathBuf,
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Remove this fraction of all edges, best-ranked first, and report
        /// connectivity.
        #[arg(long)]
        removal_report: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Print index statistics.
    Stats {
        #[arg(short = 'i', long = "index")]
        index: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Input(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Build {
            graph,
            strategy,
            output,
            tree_out,
            workers,
        } => {
            set_workers(workers)?;
            cmd_build(&graph, strategy.into(), &output, tree_out.as_deref())
        }
        Command::Query {
            index,
            pair,
            pairs,
            out,
            workers,
        } => {
            set_workers(workers)?;
            cmd_query(&index, pair, pairs.as_deref(), out)
        }
        Command::Bench {
            index,
            graph,
            samples,
            seed,
            workers,
        } => {
            set_workers(workers)?;
            cmd_bench(&index, &graph, samples, seed)
        }
        Command::Validate {
            graph,
            strategy,
            all_pairs,
            index,
            seed,
        } => cmd_validate(&graph, strategy.into(), all_pairs, index.as_deref(), seed),
        Command::Centrality {
            index,
            graph,
            top,
            removal_report,
            seed,
        } => cmd_centrality(&index, &graph, top, removal_report, seed),
        Command::Stats { index } => cmd_stats(&index),
    }
}

fn set_workers(workers: Option<usize>) -> Outcome {
    if let Some(w) = workers {
        if w == 0 {
            return Err(Failure::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global()?;
    }
    Ok(())
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_graph(args: &GraphArgs) -> Result<Graph, Failure> {
    let file = open(&args.graph)?;
    load_edge_list(BufReader::new(file), args.format.into())
        .map_err(|e| Failure::Input(format!("{}: {e}", args.graph.display())))
}

fn load_index(path: &Path) -> Result<BDIndex, Failure> {
    format::deserialize(BufReader::new(open(path)?))
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn cmd_build(graph: &GraphArgs, strategy: Strategy, output: &Path, tree_out: Option<&Path>) -> Outcome {
    let g = load_graph(graph)?;
    let started = Instant::now();
    let tree = build_hierarchy(&g, strategy)?;
    let idx = build_index(&g, tree)?;
    let seconds = started.elapsed().as_secs_f64();
    let bytes = format::serialize(&idx, BufWriter::new(File::create(output)?))?;
    if let Some(path) = tree_out {
        let mut out = BufWriter::new(File::create(path)?);
        idx.tree().write_dump(g.labels(), &mut out)?;
        out.flush()?;
    }
    let stats = idx.stats();
    let mut out = io::stdout().lock();
    writeln!(out, "strategy={strategy}")?;
    writeln!(out, "n={}", g.n())?;
    writeln!(out, "m={}", g.m())?;
    writeln!(out, "h={}", stats.height)?;
    writeln!(out, "s_avg={:.6}", stats.avg_label_size)?;
    writeln!(out, "entries={}", stats.total_label_entries)?;
    writeln!(out, "bytes={bytes}")?;
    writeln!(out, "seconds={seconds:.6}")?;
    Ok(())
}

fn resolve(idx: &BDIndex, label: &str) -> Result<usize, Failure> {
    idx.id_of(label)
        .ok_or_else(|| Failure::Usage(format!("unknown vertex label {label:?}")))
}

fn read_pairs(idx: &BDIndex, path: &Path) -> Result<Vec<(usize, usize)>, Failure> {
    let mut pairs = Vec::new();
    for (i, line) in BufReader::new(open(path)?).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Failure::Input(format!(
                "{}:{}: expected two labels, found {}",
                path.display(),
                i + 1,
                fields.len()
            )));
        }
        pairs.push((resolve(idx, fields[0])?, resolve(idx, fields[1])?));
    }
    Ok(pairs)
}

#[derive(Serialize)]
struct Row<'a> {
    s: &'a str,
    t: &'a str,
    bd: f64,
    micros: f64,
}

fn cmd_query(index: &Path, pair: Option<Vec<String>>, pairs: Option<&Path>, out: OutputFormat) -> Outcome {
    let idx = load_index(index)?;
    let pairs = match (pair, pairs) {
        (Some(p), _) => vec![(resolve(&idx, &p[0])?, resolve(&idx, &p[1])?)],
        (None, Some(path)) => read_pairs(&idx, path)?,
        (None, None) => return Err(Failure::Usage("give -p <s> <t> or --pairs <file>".into())),
    };
    let results = batch_query(&idx, &pairs)?;
    let mut w = BufWriter::new(io::stdout().lock());
    if let OutputFormat::Csv = out {
        writeln!(w, "s,t,bd,micros")?;
    }
    for r in &results {
        let row = Row {
            s: idx.vertex_label(r.s),
            t: idx.vertex_label(r.t),
            bd: r.bd,
            micros: r.elapsed.as_secs_f64() * 1e6,
        };
        match out {
            OutputFormat::Jsonl => writeln!(w, "{}", serde_json::to_string(&row)?)?,
            OutputFormat::Csv => writeln!(w, "{},{},{:?},{:.3}", row.s, row.t, row.bd, row.micros)?,
        }
    }
    w.flush()?;
    Ok(())
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn relative_error(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(1.0)
}

fn cmd_bench(index: &Path, graph: &GraphArgs, samples: u64, seed: u64) -> Outcome {
    let idx = load_index(index)?;
    let g = load_graph(graph)?;
    idx.check_graph(&g)?;
    let n = idx.n();
    let k = usize::try_from(samples).map_err(|_| Failure::Input("sample count too large".into()))?;
    let pairs = sample_distinct_pairs(n, k, seed).ok_or_else(|| {
        Failure::Input(format!(
            "cannot draw {samples} distinct pairs from {n} vertices ({} available)",
            n as u128 * (n as u128).saturating_sub(1) / 2
        ))
    })?;
    let results = batch_query(&idx, &pairs)?;
    let mut micros: Vec<f64> = results.iter().map(|r| r.elapsed.as_secs_f64() * 1e6).collect();
    micros.sort_by(f64::total_cmp);
    let mean = micros.iter().sum::<f64>() / micros.len() as f64;

    let mut out = io::stdout().lock();
    writeln!(out, "seed={seed}")?;
    writeln!(out, "samples={}", pairs.len())?;
    writeln!(out, "mean_micros={mean:.3}")?;
    writeln!(out, "median_micros={:.3}", percentile(&micros, 0.5))?;
    writeln!(out, "p99_micros={:.3}", percentile(&micros, 0.99))?;
    if n <= DENSE_LIMIT {
        let oracle = PseudoinverseOracle::new(&g)?;
        let mut worst = 0.0f64;
        for r in &results {
            worst = worst.max(relative_error(r.bd, oracle.bd(r.s, r.t)?));
        }
        writeln!(out, "max_relative_error={worst:.3e}")?;
    } else {
        writeln!(out, "max_relative_error=skipped (n > {DENSE_LIMIT})")?;
    }
    Ok(())
}

const EXACTNESS_TOLERANCE: f64 = 1e-9;
const LABEL_TOLERANCE: f64 = 1e-9;
const DECOMPOSITION_TOLERANCE: f64 = 1e-10;
const VALIDATE_SAMPLES: usize = 1000;

fn cmd_validate(graph: &GraphArgs, strategy: Strategy, all_pairs: bool, index: Option<&Path>, seed: u64) -> Outcome {
    let g = load_graph(graph)?;
    let n = g.n();
    if n > DENSE_LIMIT {
        return Err(Failure::Input(format!(
            "graph has {n} vertices; validation is limited to {DENSE_LIMIT}"
        )));
    }
    let idx = match index {
        Some(path) => {
            let idx = load_index(path)?;
            if let Err(e) = idx.check_graph(&g) {
                println!("consistency FAIL {e}");
                return Err(Failure::Input("validation failed".into()));
            }
            idx
        }
        None => build_index(&g, build_hierarchy(&g, strategy)?)?,
    };
    let tree = idx.tree();
    let mut failed = false;
    let mut out = io::stdout().lock();

    let mut worst_label = (0.0f64, 0usize);
    for v in 0..n {
        let direct = direct_label_oracle(&g, tree, v)?;
        let stored = idx.label(v);
        let scale = 1.0 + direct.m.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let mut dev = direct
            .m
            .iter()
            .zip(stored.m)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        if v != tree.root() {
            dev = dev.max((direct.f - stored.f).abs());
        }
        let dev = dev / scale;
        if dev > worst_label.0 {
            worst_label = (dev, v);
        }
    }
    let label_ok = worst_label.0 <= LABEL_TOLERANCE;
    failed |= !label_ok;
    writeln!(
        out,
        "labels {} worst={:.3e} at vertex {}",
        verdict(label_ok),
        worst_label.0,
        g.label(worst_label.1)
    )?;

    let pairs: Vec<(usize, usize)> = if all_pairs || n * (n - 1) / 2 <= VALIDATE_SAMPLES {
        (0..n).flat_map(|s| (s + 1..n).map(move |t| (s, t))).collect()
    } else {
        sample_distinct_pairs(n, VALIDATE_SAMPLES, seed).unwrap_or_default()
    };
    let oracle = PseudoinverseOracle::new(&g)?.all_pairs();
    let mut engine = QueryEngine::new(&idx);
    let mut worst_pair = (0.0f64, 0usize, 0usize);
    for &(s, t) in &pairs {
        let err = relative_error(engine.query(s, t)?.bd, oracle.bd(s, t));
        if err > worst_pair.0 {
            worst_pair = (err, s, t);
        }
    }
    let pair_ok = worst_pair.0 <= EXACTNESS_TOLERANCE;
    failed |= !pair_ok;
    writeln!(
        out,
        "distances {} pairs={} worst={:.3e} at ({}, {})",
        verdict(pair_ok),
        pairs.len(),
        worst_pair.0,
        g.label(worst_pair.1),
        g.label(worst_pair.2)
    )?;

    if n <= DECOMPOSITION_LIMIT {
        // Eliminate in reverse DFS order, which finishes every subtree before
        // its parent.
        let order: Vec<usize> = tree.order().iter().rev().copied().filter(|&v| v != tree.root()).collect();
        let report = cut_decomposition_check(&g, tree.root(), &order)?;
        let ok = report.max_deviation <= DECOMPOSITION_TOLERANCE && report.max_cross_block <= DECOMPOSITION_TOLERANCE;
        failed |= !ok;
        writeln!(
            out,
            "decomposition {} worst={:.3e} cross_block={:.3e} block_checks={}",
            verdict(ok),
            report.max_deviation,
            report.max_cross_block,
            report.block_checks
        )?;
    } else {
        writeln!(out, "decomposition skipped (n > {DECOMPOSITION_LIMIT})")?;
    }
    if failed {
        return Err(Failure::Input("validation failed".into()));
    }
    Ok(())
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_centrality(index: &Path, graph: &GraphArgs, top: usize, fraction: Option<f64>, seed: u64) -> Outcome {
    let idx = load_index(index)?;
    let g = load_graph(graph)?;
    idx.check_graph(&g)?;
    let ranked = edge_centrality(&idx, &g, usize::MAX)?;
    let mut out = BufWriter::new(io::stdout().lock());
    writeln!(out, "u,w,bd")?;
    for e in ranked.iter().take(top) {
        writeln!(out, "{},{},{:?}", g.label(e.u), g.label(e.w), e.bd)?;
    }
    if let Some(fraction) = fraction {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Failure::Usage("--removal-report must be within [0, 1]".into()));
        }
        let count = (fraction * g.m() as f64).round() as usize;
        let removed: Vec<(usize, usize)> = ranked.iter().take(count).map(|e| (e.u, e.w)).collect();
        let report = removal_report(&g, &removed, seed);
        writeln!(out, "seed={seed}")?;
        writeln!(out, "removed_edges={}", report.removed_edges)?;
        writeln!(out, "lcc_fraction={:.6}", report.lcc_fraction)?;
        writeln!(out, "components={}", report.components)?;
        writeln!(out, "reachability={:.6} over {} pairs", report.reachability, report.sampled_pairs)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_stats(index: &Path) -> Outcome {
    let bytes = std::fs::metadata(index)
        .map_err(|e| Failure::Input(format!("{}: {e}", index.display())))?
        .len();
    let idx = load_index(index)?;
    let stats = idx.stats();
    let mut out = io::stdout().lock();
    writeln!(out, "n={}", idx.n())?;
    writeln!(out, "h={}", stats.height)?;
    writeln!(out, "s_avg={:.6}", stats.avg_label_size)?;
    writeln!(out, "entries={}", stats.total_label_entries)?;
    writeln!(out, "bytes={bytes}")?;
    Ok(())
}
