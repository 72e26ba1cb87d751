use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sslr_cli::{resolve_out_dir, run, Experiment, RunOptions, ScenarioConfig, OUT_DIR_ENV};

/// Run a resonator design experiment and write CSV tables and SVG plots.
#[derive(Debug, Parser)]
#[command(name = "sslr", version)]
struct Args {
    experiment: Experiment,

    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,

    /// Overrides `optimizer.seed`.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory. Falls back to the config's `output_dir`, then `out`.
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,

    /// Use the full Monte Carlo budget of 1e6 samples per iteration.
    #[arg(long)]
    full_budget: bool,

    /// Assert reference values; exit 3 if any fails.
    #[arg(long)]
    check: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = ScenarioConfig::load(&args.config).and_then(|cfg| {
        let out = resolve_out_dir(args.out.clone(), &cfg);
        let opts = RunOptions {
            seed: args.seed,
            full_budget: args.full_budget,
            check: args.check,
        };
        run(args.experiment, &cfg, &opts, &out).map(|s| (out, s))
    });
    match result {
        Ok((out, summary)) => {
            for p in summary.tables.iter().chain(&summary.plots) {
                println!("{}", p.display());
            }
            if args.check {
                println!(
                    "{}: reference checks passed ({})",
                    args.experiment.name(),
                    out.display()
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sslr {}: {e}", args.experiment.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
