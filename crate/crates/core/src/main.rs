use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cbnorm::cli::{self, ExperimentConfig, EXIT_INPUT, EXIT_OK};

#[derive(Parser)]
#[command(name = "cbnorm-lab", version, about = "Bounds and property checks for cb-norms of holomorphic maps")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Where to write the result record; overrides the config's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lower bound with level table and witnesses.
    Estimate(RunArgs),
    /// Lower and certified upper bound.
    Sandwich(RunArgs),
    /// Random checks of the Schwarz-type inequality.
    Schwarz(RunArgs),
    /// Product bound check.
    Algebra(RunArgs),
    /// Level growth table (heuristic).
    Probe(RunArgs),
    /// Hull norm invariance check.
    Hull(RunArgs),
    /// Separation certificate search.
    Separate(RunArgs),
    /// Predual norm sandwich.
    Gcb(RunArgs),
    /// Evaluation map isometry check.
    DeltaIsometry(RunArgs),
    /// CSV summary of result records.
    Report {
        records: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    code
}

fn run(name: &str, args: RunArgs) -> i32 {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INPUT, format!("{}: {e}", args.config.display())),
    };
    let mut cfg = match ExperimentConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    if cfg.command.name() != name {
        return fail(EXIT_INPUT, format!("config is for `{}`, not `{name}`", cfg.command.name()));
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let out = args.out.or_else(|| cfg.out.clone().map(PathBuf::from));
    let record = match cli::run(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(cli::error_exit_code(&e), e),
    };
    let json = record.to_json();
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, json) {
                return fail(EXIT_INPUT, format!("{}: {e}", p.display()));
            }
        }
        None => print!("{json}"),
    }
    if !record.passed {
        eprintln!("property check failed");
    }
    record.exit_code()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Cmd::Estimate(a) => run("estimate", a),
        Cmd::Sandwich(a) => run("sandwich", a),
        Cmd::Schwarz(a) => run("schwarz", a),
        Cmd::Algebra(a) => run("algebra", a),
        Cmd::Probe(a) => run("probe", a),
        Cmd::Hull(a) => run("hull", a),
        Cmd::Separate(a) => run("separate", a),
        Cmd::Gcb(a) => run("gcb", a),
        Cmd::DeltaIsometry(a) => run("delta-isometry", a),
        Cmd::Report { records, out } => {
            let r = cli::report(&records);
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            match out {
                Some(p) => match std::fs::write(&p, &r.csv) {
                    Ok(()) => EXIT_OK,
                    Err(e) => fail(EXIT_INPUT, format!("{}: {e}", p.display())),
                },
                None => {
                    print!("{}", r.csv);
                    EXIT_OK
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
