use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use can_coord_cli::commands::{self, BargainOptions};
use can_coord_cli::{CliError, Format, Method};
use clap::{Parser, Subcommand, ValueEnum};

/// Conflict detection, game analysis and Nash-bargaining coordination for
/// cognitive network functions.
#[derive(Debug, Parser)]
#[command(name = "can-coord", version)]
struct Cli {
    /// Scenario JSON file.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output file (directory for reproduce-paper).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Reserved; every algorithm is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Sequential,
    Ascent,
    Brute,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List structural conflicts between functions.
    Detect,
    /// Analyze a 2x2 T/G conflict game.
    Game {
        /// Explicit payoffs r1,r2,r3,r4.
        #[arg(long)]
        payoffs: Option<String>,
        /// Index into the detected conflicts (must be A1).
        #[arg(long)]
        conflict_index: Option<usize>,
    },
    /// Compute the Nash-bargaining configuration.
    Bargain {
        #[arg(long, value_enum, default_value_t = MethodArg::Sequential)]
        method: MethodArg,
        /// Parameter order for the sequential method.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<String>>,
        /// Disagreement payoff, objective=value; repeatable.
        #[arg(long)]
        disagreement: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
        /// Minimum relative improvement for an ascent step.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Evaluate objectives and product over one parameter's grid.
    Sweep {
        #[arg(long)]
        param: String,
        /// Override a base parameter value, name=value; repeatable.
        #[arg(long = "set")]
        overrides: Vec<String>,
        /// Also write an SVG plot.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Rerun the reference scenario end to end and check the known optima.
    ReproducePaper,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut w = stdout.lock();
    let format = match cli.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    let scenario = cli.scenario.as_deref();
    let out = cli.out.as_deref();
    match cli.command {
        Command::Detect => commands::cmd_detect(scenario, format, out, &mut w).map(drop),
        Command::Game {
            payoffs,
            conflict_index,
        } => commands::cmd_game(scenario, payoffs.as_deref(), conflict_index, out, &mut w).map(drop),
        Command::Bargain {
            method,
            order,
            disagreement,
            max_iters,
            tol,
        } => {
            let method = match method {
                MethodArg::Sequential => Method::Sequential,
                MethodArg::Ascent => Method::Ascent,
                MethodArg::Brute => Method::Brute,
            };
            let opts = BargainOptions {
                method,
                order,
                disagreement: &disagreement,
                max_iters,
                tol,
            };
            commands::cmd_bargain(scenario, &opts, out, &mut w).map(drop)
        }
        Command::Sweep {
            param,
            overrides,
            svg,
        } => commands::cmd_sweep(scenario, &param, &overrides, out, svg.as_deref(), format, &mut w).map(drop),
        Command::ReproducePaper => {
            let dir = cli.out.clone().unwrap_or_else(commands::default_reproduction_dir);
            commands::cmd_reproduce_paper(&dir, &mut w).map(drop)
        }
    }?;
    w.flush().map_err(|e| CliError::io("<stdout>", e))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
