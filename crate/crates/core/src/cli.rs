//! Command-line front end: `run` and `mms` subcommands.
//!
//! Exit codes: 0 on success (pinch or time limit), 1 on usage or
//! configuration errors, 2 on numerical failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::amr::Strategy;
use crate::config::{self, Config};
use crate::mms::{convergence_study, format_table, Manufactured};
use crate::output::OutputDir;
use crate::timeloop::{run_with, Outcome};

/// Environment variable selecting the log level (error, info, debug).
pub const LOG_ENV: &str = "DROPLETFEM_LOG";

#[derive(Debug, Parser)]
#[command(name = "dropletfem", version, about = "Droplet pinch-off simulator with flux-based adaptive refinement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a droplet until pinch-off or t_max.
    Run(RunArgs),
    /// Manufactured-solution convergence study.
    Mms(MmsArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Configuration file (`key = value` lines). May be omitted with --seed-preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for snapshots, run.log, report.txt and effective.cfg.
    #[arg(long)]
    pub out: PathBuf,
    /// Refinement strategy: none, max or doerfler.
    #[arg(long)]
    pub strategy: Option<Strategy>,
    /// Marking parameter of the active strategy (λ for max, θ for doerfler).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Named preset applied before the config file.
    #[arg(long)]
    pub seed_preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct MmsArgs {
    /// Number of mesh levels; each doubles the element count.
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    /// Elements on the coarsest level.
    #[arg(long, default_value_t = 16)]
    pub n0: usize,
}

/// Initializes `env_logger` from [`LOG_ENV`], defaulting to `error`.
pub fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "error");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses `args` (including the program name) and executes; returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Mms(a) => cmd_mms(&a),
    }
}

/// Resolves the effective configuration: preset, then file, then flags.
pub fn effective_config(args: &RunArgs) -> crate::Result<Config> {
    let mut cfg = match (&args.config, &args.seed_preset) {
        (Some(path), seed) => config::load(path, seed.as_deref())?,
        (None, Some(name)) => config::preset(name)?,
        (None, None) => config::parse("", None)?,
    };
    if let Some(s) = args.strategy {
        cfg.run.amr_strategy = s;
    }
    if let Some(x) = args.lambda {
        match cfg.run.amr_strategy {
            Strategy::Doerfler => cfg.run.theta = x,
            _ => cfg.run.lambda = x,
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: &RunArgs) -> i32 {
    let cfg = match effective_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let mut out = match OutputDir::create(&args.out, cfg.fluid.h_in) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Err(e) = out.write_text("effective.cfg", &cfg.to_text()) {
        eprintln!("error: {e}");
        return 1;
    }
    let report = match run_with(&cfg.run, &cfg.fluid, |snap| out.write_snapshot(snap)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = out.finish(&report) {
        eprintln!("error: {e}");
        return 2;
    }
    print!("{}", crate::output::report_text(&report));
    match report.outcome {
        Outcome::HardFailure(msg) => {
            eprintln!("hard failure: {msg}");
            2
        }
        _ => 0,
    }
}

fn cmd_mms(args: &MmsArgs) -> i32 {
    if args.levels == 0 || args.n0 < crate::mesh::MIN_ELEMENTS {
        eprintln!("error: need --levels >= 1 and --n0 >= {}", crate::mesh::MIN_ELEMENTS);
        return 1;
    }
    match convergence_study(&Manufactured::standard(), args.levels, args.n0) {
        Ok(rows) => {
            print!("{}", format_table(&rows));
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
