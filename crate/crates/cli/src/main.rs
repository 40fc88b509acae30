//! `multinorm`: evaluate multi-norms, audit axioms and run the reproduction
//! suite from JSON job files.
//!
//! Exit codes: 0 success, 1 acceptance failure, 2 invalid input.

mod commands;

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multinorm::OptimConfig;

use commands::{Command, Failure, Report};

#[derive(Parser, Debug)]
#[command(name = "multinorm", version, about = "Multi-norms on finite-dimensional weighted l^p spaces")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Base seed for all random substreams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Random restarts per search.
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Convergence and comparison tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Largest exhaustive enumeration before falling back to search.
    #[arg(long = "max-enum", global = true)]
    max_enum: Option<u64>,
    /// Emit JSON (default).
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Emit human-readable text.
    #[arg(long, global = true)]
    text: bool,
    /// Write the report to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate a multi-norm on a tuple.
    Eval(InputArg),
    /// Audit the axioms (and optionally a matrix law) of a multi-norm.
    Axioms(InputArg),
    /// Rate of growth for n = 1..=n_max.
    Growth(InputArg),
    /// Numerical dual of a multi-norm, optionally against a closed form.
    Dual(InputArg),
    /// Multi-bounded norm of a matrix between two multi-normed spaces.
    Mbnorm(InputArg),
    /// Hermitian, small and orthogonal tests for a decomposition.
    Decomp(InputArg),
    /// Run the acceptance suite.
    Verify(SuiteArgs),
    /// Print the reproduction tables.
    Table(SuiteArgs),
}

#[derive(Args, Debug)]
struct InputArg {
    /// Job file (JSON); `-` reads stdin. A previous report is accepted for replay.
    input: PathBuf,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    /// Run a single criterion (e.g. ac07).
    #[arg(long)]
    only: Option<String>,
}

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    let mut s = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Schema(format!("stdin: {e}")))?;
    } else {
        s = std::fs::read_to_string(path).map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))?;
    }
    Ok(s)
}

fn apply_flags(mut cfg: OptimConfig, o: &Opts) -> Result<OptimConfig, Failure> {
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(r) = o.restarts {
        cfg.restarts = r;
    }
    if let Some(t) = o.tol {
        cfg.tol = t;
    }
    if let Some(m) = o.max_enum {
        cfg.max_enum = m;
    }
    cfg.validate().map_err(|e| Failure::Schema(e.to_string()))?;
    Ok(cfg)
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("MULTINORM_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Schema(format!("MULTINORM_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Schema(e.to_string()))
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    init_threads()?;
    let (command, input) = match &cli.command {
        Cmd::Eval(a) => (Command::Eval, Some(read_input(&a.input)?)),
        Cmd::Axioms(a) => (Command::Axioms, Some(read_input(&a.input)?)),
        Cmd::Growth(a) => (Command::Growth, Some(read_input(&a.input)?)),
        Cmd::Dual(a) => (Command::Dual, Some(read_input(&a.input)?)),
        Cmd::Mbnorm(a) => (Command::Mbnorm, Some(read_input(&a.input)?)),
        Cmd::Decomp(a) => (Command::Decomp, Some(read_input(&a.input)?)),
        Cmd::Verify(s) => (Command::Verify { only: s.only.clone() }, None),
        Cmd::Table(s) => (Command::Table { only: s.only.clone() }, None),
    };
    let job = commands::parse_job(command, input.as_deref())?;
    let cfg = apply_flags(job.cfg.clone(), &cli.opts)?;
    commands::execute(job, cfg)
}

fn emit(text: &str, output: Option<&PathBuf>) -> std::io::Result<()> {
    match output {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let body = if cli.opts.text { report.text() } else { report.json() };
            if let Err(e) = emit(&body, cli.opts.output.as_ref()) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if report.failed { 1 } else { 0 })
        }
        Err(f) => {
            let msg = serde_json::json!({ "error": f.to_string() });
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
