mod commands;
mod config;
mod error;
mod report;
mod series;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use reservoir_core::econometrics::CycleTransform;
use serde_json::json;

use config::RunConfig;
use error::CliResult;
use report::Reporter;

#[derive(Parser)]
#[command(name = "reservoir", version, about = "Monetary-reservoir DSGE model driver")]
struct Cli {
    /// Flat `key = value` config; keys not given keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Print the summary as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the deterministic steady state.
    Steady,
    /// Simulate a stochastic path and write it.
    Simulate,
    /// Model, VAR and local-projection impulse responses.
    Irf,
    /// Conditional and unconditional variance decompositions.
    Fevd,
    /// Premium weights and growth-rate decompositions along a simulated path.
    Premium,
    /// R&D share, discounted wage stream and technology path.
    Growth,
    /// Amplitude-rank correlation of two dated series.
    Cycles {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Transform::Growth)]
        transform: Transform,
    },
    /// Posterior of the refinancing and premium parameters.
    Estimate,
    /// Print the default configuration.
    DefaultConfig,
}

#[derive(Clone, Copy, ValueEnum)]
enum Transform {
    Growth,
    Level,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Steady => "steady",
            Self::Simulate => "simulate",
            Self::Irf => "irf",
            Self::Fevd => "fevd",
            Self::Premium => "premium",
            Self::Growth => "growth",
            Self::Cycles { .. } => "cycles",
            Self::Estimate => "estimate",
            Self::DefaultConfig => "default-config",
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if matches!(cli.command, Command::DefaultConfig) {
        print!("{}", config::DEFAULT_CONFIG);
        return Ok(());
    }
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    log::debug!("config sha256 {}", cfg.hash());
    let mut rep = Reporter::new(&cli.out, cli.command.name(), cfg.hash(), cfg.seed)?;
    let summary = match &cli.command {
        Command::Steady => commands::steady(&cfg, &mut rep)?,
        Command::Simulate => commands::simulate_cmd(&cfg, &mut rep)?,
        Command::Irf => commands::irf(&cfg, &mut rep)?,
        Command::Fevd => commands::fevd(&cfg, &mut rep)?,
        Command::Premium => commands::premium(&cfg, &mut rep)?,
        Command::Growth => commands::growth(&cfg, &mut rep)?,
        Command::Cycles { a, b, transform } => {
            let t = match transform {
                Transform::Growth => CycleTransform::Growth,
                Transform::Level => CycleTransform::Level,
            };
            commands::cycles(a, b, t, &mut rep)?
        }
        Command::Estimate => commands::estimate(&cfg, &mut rep)?,
        Command::DefaultConfig => unreachable!(),
    };
    let files: Vec<String> = rep.written().iter().map(|p| p.display().to_string()).collect();
    if cli.json {
        let mut doc = summary.json;
        doc["config_sha256"] = json!(cfg.hash());
        doc["seed"] = json!(cfg.seed);
        doc["files"] = json!(files);
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!("{}", summary.text);
        for f in files {
            println!("wrote {f}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RESERVOIR_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            ExitCode::from(code as u8)
        }
    }
}
