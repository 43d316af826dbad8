use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use secmimo_cli::config::{diagnose, ConfigError};
use secmimo_cli::{execute, load};

/// Exit status for unreadable or invalid configs.
const EXIT_CONFIG: u8 = 2;
/// Exit status for numerical failures.
const EXIT_NUMERIC: u8 = 3;
/// Worker threads for Monte-Carlo trials; defaults to all cores.
const THREADS_ENV: &str = "SECMIMO_THREADS";

#[derive(Parser)]
#[command(name = "secmimo", version = secmimo_cli::run::VERSION, about = "Secure robust MIMO multicast experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSV tables plus a manifest.
    Run {
        config: String,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Dotted key=value override, e.g. sweep.trials_per_point=2.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output directory (default: the config's `output`, else out/<experiment>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed, set, out } => run(&config, seed, set, out),
        Command::Validate { config } => validate(&config),
    }
}

fn run(path: &str, seed: Option<u64>, mut set: Vec<String>, out: Option<PathBuf>) -> ExitCode {
    if let Some(s) = seed {
        set.push(format!("seed={s}"));
    }
    let cfg = match load(path, &set) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: {THREADS_ENV}={v} is not a positive integer");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    }
    let dir = out
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.experiment.name()));

    let artifacts = match execute(&cfg, &mut |line| println!("{line}")) {
        Ok(a) => a,
        Err(secmimo::Error::InvalidInput(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("error: numerical failure: {e}");
            return ExitCode::from(EXIT_NUMERIC);
        }
    };
    let write = || -> std::io::Result<()> {
        std::fs::create_dir_all(&dir)?;
        for (name, body) in &artifacts.tables {
            std::fs::write(dir.join(name), body)?;
        }
        std::fs::write(dir.join("manifest.toml"), &artifacts.manifest)
    };
    if let Err(e) = write() {
        eprintln!("error: cannot write {}: {e}", dir.display());
        return ExitCode::FAILURE;
    }
    println!("event=written dir={}", dir.display());
    if !artifacts.failures.is_empty() {
        eprintln!("error: no successful design for: {}", artifacts.failures.join("; "));
        return ExitCode::from(EXIT_NUMERIC);
    }
    ExitCode::SUCCESS
}

fn validate(path: &str) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}", ConfigError::Read { path: path.to_string(), message: e.to_string() });
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let issues = diagnose(&text);
    for i in &issues {
        println!("{i}");
    }
    let n = issues.len();
    println!("{n} issue{}", if n == 1 { "" } else { "s" });
    if n == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CONFIG)
    }
}
