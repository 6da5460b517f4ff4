use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rh_doublematch::{run, with_thread_cap, Mode, RunConfig};

/// Double-matching verification sweeps.
///
/// Exit status: 0 when every check passes, 2 when a check fails, 1 on error.
#[derive(Parser, Debug)]
#[command(name = "rh-doublematch", version)]
struct Cli {
    /// What to run.
    #[arg(value_enum)]
    mode: Option<Mode>,
    /// JSON run configuration; every field is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the positional mode and the config.
    #[arg(long = "mode", value_enum, id = "mode_flag")]
    mode_flag: Option<Mode>,
    #[arg(long)]
    n_min: Option<i32>,
    #[arg(long)]
    n_max: Option<i32>,
    #[arg(long)]
    grid_m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(mode) = cli.mode_flag.or(cli.mode) {
        config.mode = Some(mode);
    }
    if let Some(v) = cli.n_min {
        config.n_min_exp = v;
    }
    if let Some(v) = cli.n_max {
        config.n_max_exp = v;
    }
    if let Some(v) = cli.grid_m {
        config.grid_m = v;
    }
    if let Some(v) = cli.seed {
        config.seed = v;
    }
    if let Some(v) = &cli.out {
        config.output_dir = v.clone();
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = build_config(&cli).and_then(|config| with_thread_cap(|| run(&config)));
    match result {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
