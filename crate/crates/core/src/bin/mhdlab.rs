use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mhdlab::config::parse_config;
use mhdlab::orchestrate::{orchestrate, Status};

/// Run an MHD decay experiment described by a configuration file.
#[derive(Parser, Debug)]
#[command(name = "mhdlab", version)]
struct Cli {
    /// Configuration file (key = value lines with [section] headers).
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random data; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel sweeps.
    #[arg(long, env = "MHDLAB_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();

    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(errs) => {
            eprintln!("{}: invalid configuration", cli.config.display());
            for issue in &errs.0 {
                eprintln!("  {issue}");
            }
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.data.seed = seed;
    }
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("--threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            log::warn!("could not configure the thread pool: {e}");
        }
    }
    let out = cli
        .out
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("mhdlab-out"));

    match orchestrate(&cfg, &out) {
        Ok(o) => {
            println!("{}: {} ({})", cfg.kind.name(), status_word(o.status), o.message);
            println!("artifacts in {}", o.out_dir.display());
            ExitCode::from(o.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("cannot write outputs to {}: {e}", out.display());
            ExitCode::from(1)
        }
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::ConfigError => "configuration error",
        Status::Error => "error",
    }
}
