use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use degenbeam::scenario::{parse_config, run_scenario};

/// Runs one degenerate-beam scenario described by a key=value file.
#[derive(Parser, Debug)]
#[command(name = "degenbeam", version)]
struct Args {
    /// Scenario file.
    config: PathBuf,
    /// Output directory (overrides `output_dir` in the file).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();

    if let Some(n) = std::env::var("DEGENBEAM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("could not size thread pool: {e}");
        }
    }

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    match run_scenario(&cfg, args.out.as_deref()) {
        Ok(report) => {
            for line in report.summary.iter().chain(&report.violations) {
                println!("{line}");
            }
            ExitCode::from(report.status as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
