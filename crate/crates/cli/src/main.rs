use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use geobst::arboreal::{geometry_to_tree_offline, tree_to_geometry, Execution};
use geobst::greedy::greedy_execute;
use geobst::harness::{run_deque_bound, run_lowerbound, run_roundtrip, Experiment, ExperimentConfig, ExperimentReport};
use geobst::model::{check_satisfied, PointSet, UpdateSequence};
use geobst::patterns::{bound_report, contains_pattern, BinaryMatrix, BoundKind, Pattern};
use geobst::sequences::{concentrate, gen_deque, random_mixed, random_permutation_access, sequential_as_deletions};

/// GREEDY in the geometric BST model with insertions and deletions.
#[derive(Parser)]
#[command(name = "geobst", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run GREEDY on a sequence file or a generated workload and print the
    /// point set.
    GreedyRun(GreedyArgs),
    /// Turn a tree execution into its point set.
    ToGeometry(IoArgs),
    /// Turn a satisfied point set into a tree execution.
    ToTree(IoArgs),
    /// Check that a point set is arborally satisfied.
    CheckSatisfied(InputArg),
    /// Search a point set or matrix for a forbidden pattern.
    PatternCheck(PatternArgs),
    /// Deque cost bounds on concentrated random deque sequences.
    BenchDeque(BenchArgs),
    /// Random permutations through the access, insertion and sorting chain.
    BenchLowerbound(BenchArgs),
    /// Both converters on small random inputs.
    Roundtrip(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Workload {
    Deque,
    Mixed,
    Permutation,
    Sequential,
}

#[derive(Args)]
struct GreedyArgs {
    /// Sequence file; when absent a workload is generated.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "deque")]
    workload: Workload,
    #[arg(long, default_value_t = 100)]
    n: u32,
    #[arg(long, default_value_t = 1000)]
    m: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output-restricted deque (deletions at the minimum only).
    #[arg(long)]
    restricted: bool,
    /// Concentrate the sequence before running.
    #[arg(long)]
    concentrate: bool,
    /// Write the point set here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InputArg {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct IoArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PatternArgs {
    /// p4, p5, p4-up or p5-up
    #[arg(long)]
    pattern: String,
    #[arg(long)]
    input: PathBuf,
    /// The input is a sparse matrix (`rows cols`, then `r c` lines) rather
    /// than a point set.
    #[arg(long)]
    matrix: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 100)]
    n: u32,
    #[arg(long, default_value_t = 1000)]
    m: u32,
    /// A single seed; overrides --seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Seeds as `a..b` (end exclusive) or a comma list.
    #[arg(long, default_value = "0..10")]
    seeds: String,
    #[arg(long)]
    restricted: bool,
    /// Skip the P5 search on general runs with more rows than this.
    #[arg(long, default_value_t = 4000)]
    pattern_max_rows: u32,
    /// Write `<out>.csv` and `<out>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// What to print on standard output.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse::<u64>().with_context(|| format!("bad seed `{x}`")))
        .collect()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn greedy_run(a: &GreedyArgs) -> Result<bool> {
    let seq = match &a.input {
        Some(p) => UpdateSequence::parse(&read(p)?)?,
        None => match a.workload {
            Workload::Deque => gen_deque(a.n, a.m as usize, a.seed, a.restricted),
            Workload::Mixed => random_mixed(a.n, a.m as usize, a.seed),
            Workload::Permutation => random_permutation_access(a.n, a.seed),
            Workload::Sequential => sequential_as_deletions(a.n),
        },
    };
    let seq = if a.concentrate { concentrate(&seq)? } else { seq };
    let run = greedy_execute(Arc::new(seq));
    let violation = check_satisfied(&run.points)?;
    emit(a.out.as_deref(), &run.points.to_text())?;
    eprintln!("cost {} over {} operations", run.cost, run.points.horizon());
    if let Some(v) = &violation {
        eprintln!("output is not satisfied: {v:?}");
    }
    Ok(violation.is_none())
}

fn to_geometry(a: &IoArgs) -> Result<bool> {
    let e = Execution::parse(&read(&a.input)?)?;
    let ps = tree_to_geometry(&e)?;
    emit(a.out.as_deref(), &ps.to_text())?;
    Ok(true)
}

fn to_tree(a: &IoArgs) -> Result<bool> {
    let ps = PointSet::parse(&read(&a.input)?)?;
    let e = geometry_to_tree_offline(&ps)?;
    emit(a.out.as_deref(), &e.to_text())?;
    let r = e.replay()?;
    eprintln!("cost {} (touched {})", r.cost, r.touched);
    Ok(true)
}

fn check(a: &InputArg) -> Result<bool> {
    let ps = PointSet::parse(&read(&a.input)?)?;
    match check_satisfied(&ps)? {
        None => {
            println!("satisfied ({} points)", ps.len());
            Ok(true)
        }
        Some(v) => {
            println!("not satisfied: {v:?}");
            Ok(false)
        }
    }
}

fn pattern_check(a: &PatternArgs) -> Result<bool> {
    let Some(p) = Pattern::by_name(&a.pattern) else {
        bail!("unknown pattern `{}`; use p4, p5, p4-up or p5-up", a.pattern);
    };
    let text = read(&a.input)?;
    let m = if a.matrix {
        BinaryMatrix::parse(&text)?
    } else {
        BinaryMatrix::from_pointset(&PointSet::parse(&text)?)
    };
    let kind = if a.pattern.starts_with("p4") {
        BoundKind::P4Linear
    } else {
        BoundKind::P5Quasilinear
    };
    let b = bound_report(&m, kind);
    println!(
        "{}x{} matrix, {} ones, bound {:.0}, ratio {:.4}",
        b.rows, b.cols, b.ones, b.bound, b.ratio
    );
    match contains_pattern(&m, &p) {
        None => {
            println!("{} avoided", p.name);
            Ok(true)
        }
        Some(w) => {
            println!("{} contained: rows {:?}, columns {:?}", p.name, w.rows, w.cols);
            Ok(false)
        }
    }
}

fn bench(a: &BenchArgs, experiment: Experiment) -> Result<bool> {
    let seeds = match a.seed {
        Some(s) => vec![s],
        None => parse_seeds(&a.seeds)?,
    };
    let mut cfg = ExperimentConfig::new(experiment, a.n, a.m, seeds);
    cfg.output = a.out.clone();
    cfg.pattern_check_max_rows = a.pattern_max_rows;
    let report: ExperimentReport = match experiment {
        Experiment::RestrictedLinear | Experiment::GeneralQuasilinear => run_deque_bound(&cfg)?,
        Experiment::Lowerbound => run_lowerbound(&cfg)?,
        Experiment::Roundtrip => run_roundtrip(&cfg)?,
    };
    match a.format {
        Format::Csv => print!("{}", report.to_csv()?),
        Format::Json => print!("{}", report.to_json()?),
    }
    for f in &report.failures {
        eprintln!("seed {} failed: {}\n  replay: {}", f.seed, f.message, f.replay);
    }
    Ok(report.aggregate.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GreedyRun(a) => greedy_run(a),
        Command::ToGeometry(a) => to_geometry(a),
        Command::ToTree(a) => to_tree(a),
        Command::CheckSatisfied(a) => check(a),
        Command::PatternCheck(a) => pattern_check(a),
        Command::BenchDeque(a) => {
            let e = if a.restricted {
                Experiment::RestrictedLinear
            } else {
                Experiment::GeneralQuasilinear
            };
            bench(a, e)
        }
        Command::BenchLowerbound(a) => bench(a, Experiment::Lowerbound),
        Command::Roundtrip(a) => bench(a, Experiment::Roundtrip),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
