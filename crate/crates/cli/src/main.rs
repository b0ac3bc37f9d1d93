//! Command-line front end for the planning toolkit.
//!
//! Exit codes: 0 on success (for `monitor`: satisfied), 2 when `monitor`
//! finds the formula violated or exactly marginal, 1 on any error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tlplan_core::stl::Semantics;

use tlplan_cli::commands;
use tlplan_cli::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "tlplan",
    about = "Trajectory planning from demonstrations under signal temporal logic constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Run configuration file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override a config value, e.g. `--set optimizer.budget=100`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the motion model from demonstrations.
    Fit(ConfigArgs),
    /// Optimize and execute a single full-horizon plan.
    Plan(ConfigArgs),
    /// Run the continuous multi-cycle planner.
    Run(ConfigArgs),
    /// Evaluate a formula against a recorded trace.
    Monitor {
        /// Trace CSV (`t` column plus channel columns).
        #[arg(long)]
        trace: PathBuf,
        /// Formula text file.
        #[arg(long)]
        spec: PathBuf,
        /// Smoothing sharpness for the smooth semantics.
        #[arg(long, default_value_t = 5.0)]
        nu: f64,
        /// Which robustness decides the verdict.
        #[arg(long, value_parser = parse_semantics, default_value = "classical")]
        semantics: Semantics,
    },
}

fn parse_semantics(s: &str) -> Result<Semantics, String> {
    match s {
        "classical" => Ok(Semantics::Classical),
        "smooth" => Ok(Semantics::Smooth),
        other => Err(format!("unknown semantics `{other}` (classical|smooth)")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => load_and(&args, commands::cmd_fit),
        Command::Plan(args) => load_and(&args, commands::cmd_plan),
        Command::Run(args) => load_and(&args, commands::cmd_run),
        Command::Monitor {
            trace,
            spec,
            nu,
            semantics,
        } => {
            return match commands::cmd_monitor(&trace, &spec, nu, semantics) {
                Ok(report) if report.satisfied => ExitCode::SUCCESS,
                Ok(_) => ExitCode::from(2),
                Err(err) => {
                    eprintln!("error: {err:#}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn load_and(
    args: &ConfigArgs,
    run: impl Fn(&RunConfig) -> anyhow::Result<()>,
) -> anyhow::Result<()> {
    let config = RunConfig::load(&args.config, &args.set)?;
    run(&config)
}
