//! `fracflux` command-line front end.
//!
//! Every command reads one configuration file, writes its CSV tables and a
//! `meta.txt` sidecar into the output directory, and exits with
//! 0 (ok), 2 (config error), 3 (blow-up), 4 (horizon exceeded) or
//! 5 (numerical failure). I/O errors exit with 1.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, LevelFilter};
use sha2::{Digest, Sha256};

use commands::Failure;
use config::{Ini, RunConfig};
use output::Output;

#[derive(Parser)]
#[command(name = "fracflux", version, about = "Nonlocal flux equation solvers and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the spectral solver and write the trajectory and diagnostics.
    Simulate(Args),
    /// Solve the α = 1 problem by complex characteristics at a list of times.
    Exact(Args),
    /// Fit power-law decay rates of norms along a run.
    Decay(Args),
    /// Picard iteration of the Duhamel formula.
    Mild(Args),
    /// Simulate the interacting particle system.
    Particles(Args),
    /// Tabulate the gap between two solution methods at matched times.
    Compare(Args),
}

impl Command {
    fn parts(&self) -> (&'static str, &Args) {
        match self {
            Command::Simulate(a) => ("simulate", a),
            Command::Exact(a) => ("exact", a),
            Command::Decay(a) => ("decay", a),
            Command::Mild(a) => ("mild", a),
            Command::Particles(a) => ("particles", a),
            Command::Compare(a) => ("compare", a),
        }
    }
}

#[derive(clap::Args)]
struct Args {
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Only report errors.
    #[arg(long)]
    quiet: bool,
}

fn load(path: &Path) -> Result<(Vec<u8>, Ini, RunConfig), Failure> {
    let bytes = std::fs::read(path).map_err(|e| {
        Failure::Config(config::ConfigError {
            line: None,
            field: "--config".into(),
            message: format!("{}: {e}", path.display()),
        })
    })?;
    let text = std::str::from_utf8(&bytes).map_err(|_| {
        Failure::Config(config::ConfigError {
            line: None,
            field: "--config".into(),
            message: format!("{} is not UTF-8", path.display()),
        })
    })?;
    let ini = Ini::parse(text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let cfg = RunConfig::from_ini(&ini, base)?;
    Ok((bytes, ini, cfg))
}

fn execute(name: &'static str, args: &Args) -> Result<(), Failure> {
    let (bytes, ini, cfg) = load(&args.config)?;
    let seed = args.seed.unwrap_or(cfg.seed);
    let dir = args.out.clone().or_else(|| cfg.output.dir.clone()).ok_or_else(|| {
        Failure::Config(config::ConfigError {
            line: None,
            field: "output.dir".into(),
            message: "no output directory: set [output] dir or pass --out".into(),
        })
    })?;
    let mut out = Output::create(&dir)?;

    let mut header = vec![
        ("command".to_string(), name.to_string()),
        ("version".to_string(), format!("fracflux {}", env!("CARGO_PKG_VERSION"))),
        ("config".to_string(), args.config.display().to_string()),
        ("config_sha256".to_string(), format!("{:x}", Sha256::digest(&bytes))),
        ("seed".to_string(), seed.to_string()),
        ("rng".to_string(), fracflux::particles::RNG_ALGORITHM.to_string()),
    ];
    header.extend(ini.flatten().into_iter().map(|(k, v)| (format!("config.{k}"), v)));

    let result = match name {
        "simulate" => commands::simulate(&cfg, &mut out),
        "exact" => commands::exact(&cfg, &mut out),
        "decay" => commands::decay(&cfg, &mut out),
        "mild" => commands::mild(&cfg, &mut out),
        "particles" => commands::particles(&cfg, seed, &mut out),
        "compare" => commands::compare(&cfg, &mut out),
        _ => unreachable!("clap only yields known commands"),
    };
    let status = match &result {
        Ok(()) => "ok".to_string(),
        Err(e) => format!("failed (exit {}): {e}", e.exit_code()),
    };
    if !args.quiet {
        for (k, v) in out.results() {
            println!("{k} = {v}");
        }
    }
    header.push(("status".to_string(), status));
    let dir = out.dir().to_path_buf();
    out.finish(header)?;
    if !args.quiet {
        println!("wrote {}", dir.display());
    }
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = cli.command.parts();
    env_logger::Builder::new()
        .filter_level(if args.quiet { LevelFilter::Error } else { LevelFilter::Info })
        .format_timestamp(None)
        .init();
    match execute(name, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
