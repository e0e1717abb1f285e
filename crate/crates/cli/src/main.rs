//! `isodeform` command-line driver.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use output::{Failure, OutDir, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};

#[derive(Parser, Debug)]
#[command(name = "isodeform", version, about = "Unfolded connections: validation, horizontal lifts, flows and monodromy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config file, or inline JSON starting with `{`.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory for report.json and the other artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Primary tolerance of the command (curvature bound, flow convergence
    /// radius or transport tolerance).
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Frobenius / gauge truncation order, at most 256.
    #[arg(long, global = true, value_name = "K")]
    order: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Check exponent data and the connection built from it.
    Validate,
    /// Xi family, adjusting data, B-matrices and curvature residuals.
    Unfold,
    /// Batch of region-sampled flows; writes trajectories.csv.
    Flow,
    /// Big-loop, local and deformed monodromy; writes monodromy.json.
    Monodromy,
    /// Rank-two confluence demo at several values of eps.
    HypergeomDemo,
}

fn resolve(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(src) => config::load(src).map_err(Failure::Usage)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.tol.is_some() {
        cfg.tol = cli.tol;
    }
    if cli.order.is_some() {
        cfg.order = cli.order;
    }
    cfg.check().map_err(Failure::Usage)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let cfg = resolve(cli)?;
    let out = OutDir::create(&cfg.out_dir())?;
    let pass = match cli.command {
        Command::Validate => commands::validate(&cfg, &out)?,
        Command::Unfold => commands::unfold(&cfg, &out)?,
        Command::Flow => commands::flow(&cfg, &out)?,
        Command::Monodromy => commands::monodromy(&cfg, &out)?,
        Command::HypergeomDemo => {
            let (pass, text) = commands::hypergeom_demo(&cfg, &out)?;
            print!("{text}");
            pass
        }
    };
    println!("{}: {} ({})", command_name(cli.command), if pass { "PASS" } else { "FAIL" }, out.path("report.json").display());
    Ok(pass)
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Validate => "validate",
        Command::Unfold => "unfold",
        Command::Flow => "flow",
        Command::Monodromy => "monodromy",
        Command::HypergeomDemo => "hypergeom-demo",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::from(EXIT_OK),
        Ok(false) => ExitCode::from(EXIT_VALIDATION),
        Err(f) => {
            eprintln!("isodeform: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
