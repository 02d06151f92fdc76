use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dampwave::cli::{load_config, run, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "dampwave", version, about = "Damped wave experiments with Robin and acoustic boundaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for random initial data (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write assembled matrices as (row, col, value) triplets.
    #[arg(long, global = true)]
    dump_matrices: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run { config: PathBuf },
    /// Run the invariant suite on the default configuration.
    Check,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let cfg = match &cli.command {
        Command::Run { config } => load_config(config, cli.seed),
        Command::Check => {
            let mut c = ExperimentConfig::default_check();
            if let Some(s) = cli.seed {
                c.seed = s;
            }
            Ok(c)
        }
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let opts = RunOptions {
        out: cli.out,
        dump_matrices: cli.dump_matrices,
    };
    match run(&cfg, &opts) {
        Ok(summary) => {
            println!(
                "{} {} (config {})",
                summary.experiment,
                if summary.pass { "passed" } else { "failed thresholds" },
                &summary.config_hash[..12]
            );
            for (k, v) in &summary.flags {
                if !v {
                    println!("  failed: {k}");
                }
            }
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
