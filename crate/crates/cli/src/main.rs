use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use crossgraph::config::{parse_config, to_toml};
use crossgraph::graph::{build_graph, read_adjacency};
use crossgraph::harness::{run_replicates, sweep, AggregateReport, AlgoSpec, SweepAxis};
use crossgraph::verify::{run_level, Level};
use crossgraph::GraphSpec;

#[derive(Parser)]
#[command(name = "crossgraph", version, about = "Cross-learning contextual bandits with graph feedback")]
struct Cli {
    /// Worker threads for replicate parallelism (defaults to all cores).
    #[arg(long, global = true, env = "CROSSGRAPH_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every replicate of a configuration and write reports and traces.
    Run {
        #[arg(short, long)]
        config: PathBuf,
        /// Output directory (overrides `output` in the config).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sweep T, M or alpha and fit the regret trend.
    Sweep {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        axis: SweepAxis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
        /// Algorithms to compare; the config's own algorithm when omitted.
        #[arg(long, value_delimiter = ',')]
        algos: Vec<String>,
        /// Directory for `sweep.csv` and `sweep.json`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the verification checks; exits nonzero if any fails.
    Verify {
        #[arg(long, default_value = "quick")]
        level: Level,
        #[arg(long, default_value_t = 20261018)]
        seed: u64,
        /// Also write the outcomes as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Print arm count, independence number and observability of a graph.
    GraphInfo {
        /// Shorthand such as `cliques:4x4`, `er:16:0.2`, `loops:8`.
        #[arg(long, conflicts_with = "file", required_unless_present = "file")]
        spec: Option<GraphSpec>,
        /// Adjacency file, one line of out-neighbors per arm.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Seed for random graph families.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn cmd_run(config: &Path, output: Option<PathBuf>) -> Result<()> {
    let cfg = parse_config(config).with_context(|| format!("reading {}", config.display()))?;
    let dir = output
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.toml"), to_toml(&cfg)?)?;

    let outputs = run_replicates(&cfg)?;
    for out in &outputs {
        if let Some(trace) = &out.trace {
            let path = dir.join(format!("trace_r{}.ndjson", out.report.replicate));
            let mut w = create(&path)?;
            trace.write_ndjson(&mut w)?;
            w.flush()?;
        }
    }
    let agg = AggregateReport::from_reports(outputs.into_iter().map(|o| o.report).collect());
    serde_json::to_writer_pretty(create(&dir.join("report.json"))?, &agg)?;
    agg.write_curves_csv(create(&dir.join("curves.csv"))?)?;

    println!(
        "{}: T = {}, {} replicates, expected regret {:.2} ± {:.2}, realized {:.2} ± {:.2}",
        agg.algo,
        cfg.horizon,
        agg.expected.n,
        agg.expected.mean,
        agg.expected.stderr,
        agg.realized.mean,
        agg.realized.stderr
    );
    println!("wrote {}", dir.display());
    Ok(())
}

fn cmd_sweep(
    config: &Path,
    axis: SweepAxis,
    values: &[usize],
    algos: &[String],
    output: Option<PathBuf>,
) -> Result<()> {
    let cfg = parse_config(config).with_context(|| format!("reading {}", config.display()))?;
    let algos = algos
        .iter()
        .map(|name| AlgoSpec::by_name(name))
        .collect::<crossgraph::Result<Vec<_>>>()?;
    let report = sweep(&cfg, axis, values, &algos)?;

    let mut stdout = std::io::stdout().lock();
    report.write_csv(&mut stdout)?;
    for t in &report.trends {
        match (&t.fit, t.ratio) {
            (Some(fit), _) => println!(
                "{}: slope {:.3} ± {:.3} (log regret vs log {})",
                t.algo, fit.slope, fit.stderr, axis
            ),
            (None, Some(r)) => println!(
                "{}: regret ratio {} = {} / {} = {}: {:.3}",
                t.algo,
                axis,
                values[values.len() - 1],
                axis,
                values[0],
                r
            ),
            _ => println!("{}: not enough points for a trend", t.algo),
        }
    }
    if let Some(dir) = output {
        fs::create_dir_all(&dir)?;
        report.write_csv(create(&dir.join("sweep.csv"))?)?;
        serde_json::to_writer_pretty(create(&dir.join("sweep.json"))?, &report)?;
    }
    Ok(())
}

fn cmd_verify(level: Level, seed: u64, json: Option<PathBuf>) -> Result<bool> {
    let outcomes = run_level(level, seed);
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} checks, {} failed", outcomes.len(), failed);
    if let Some(path) = json {
        serde_json::to_writer_pretty(create(&path)?, &outcomes)?;
    }
    Ok(failed == 0)
}

fn cmd_graph_info(spec: Option<GraphSpec>, file: Option<PathBuf>, seed: u64) -> Result<()> {
    let graph = match (spec, file) {
        (Some(spec), None) => build_graph(&spec, seed)?,
        (None, Some(path)) => read_adjacency(&path)?,
        _ => bail!("pass exactly one of --spec or --file"),
    };
    println!("K = {}", graph.num_arms());
    println!("alpha = {}", graph.alpha());
    println!("strongly_observable = {}", graph.is_strongly_observable());
    println!("edges = {}", graph.edge_count());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Run { config, output } => cmd_run(&config, output).map(|_| true),
        Command::Sweep {
            config,
            axis,
            values,
            algos,
            output,
        } => cmd_sweep(&config, axis, &values, &algos, output).map(|_| true),
        Command::Verify { level, seed, json } => cmd_verify(level, seed, json),
        Command::GraphInfo { spec, file, seed } => cmd_graph_info(spec, file, seed).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
