//! `heislab <suite> --config <path> [--seed N] [--out DIR]`
//!
//! Exit status: 0 on success, 1 on a numeric failure, 2 on a usage or config error.

mod config;
mod suites;

use clap::Parser;
use config::{ExperimentConfig, Suite};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "heislab", version, about = "Batch experiment runner for the heislab numerical suites")]
struct Cli {
    suite: Suite,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_all(dir: &Path, files: &[(String, String)], manifest: &serde_json::Value) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, body) in files {
        std::fs::write(dir.join(name), body)?;
    }
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(dir.join("manifest.json"), text + "\n")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let raw = match config::load(&cli.config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("heislab: {e}");
            return ExitCode::from(2);
        }
    };
    let cfg = match ExperimentConfig::resolve(cli.suite, raw, cli.seed, cli.out) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("heislab: invalid config: {e}");
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let outcome = match suites::run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("heislab: {} failed: {e}", cfg.suite.name());
            return ExitCode::from(1);
        }
    };
    let manifest = json!({
        "suite": cfg.suite.name(),
        "seed": cfg.seed,
        "versions": {
            "heislab": env!("CARGO_PKG_VERSION"),
            "heislab-core": heislab_core::VERSION,
        },
        "wall_time": start.elapsed().as_secs_f64(),
        "config": cfg,
        "outputs": outcome.files.iter().map(|f| f.0.clone()).collect::<Vec<_>>(),
        "timings": outcome.timings.iter().map(|(k, v)| json!({"step": k, "seconds": v})).collect::<Vec<_>>(),
        "failures": outcome.failures,
    });
    if let Err(e) = write_all(&cfg.out, &outcome.files, &manifest) {
        eprintln!("heislab: cannot write to {}: {e}", cfg.out.display());
        return ExitCode::from(1);
    }
    if !outcome.failures.is_empty() {
        for f in &outcome.failures {
            eprintln!("heislab: check failed: {f}");
        }
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
