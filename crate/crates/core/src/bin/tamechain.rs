use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tamechain::lab::{self, exit, LabError, RunOptions, Suite, VerifyOptions};

#[derive(Parser)]
#[command(version, about = "Tame Markov chains on trees: property suites and limit-theorem experiments")]
struct Cli {
    /// Master seed (overrides the config's [run] seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for experiment runs.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Trials per check (verify) or trajectories per experiment (experiment).
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Multiply tolerance widths and upper limits.
    #[arg(long, global = true)]
    tolerance_scale: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a property suite: geometry, projections, kernels or all.
    Verify {
        suite: String,
        /// Behrstock constant for the projection suite (calibrated when absent).
        #[arg(long, allow_negative_numbers = true)]
        behrstock: Option<i64>,
        /// Projection threshold T.
        #[arg(long, allow_negative_numbers = true)]
        threshold: Option<i64>,
    },
    /// Run the experiments of a TOML config (or a previous manifest.json).
    Experiment { config: PathBuf },
    /// Summarise a run directory and check its integrity.
    Report { dir: PathBuf },
}

fn run(cli: Cli) -> Result<i32, LabError> {
    let threads = cli.threads;
    match cli.command {
        Command::Verify { suite, behrstock, threshold } => {
            let suite: Suite = suite.parse()?;
            let mut opts = VerifyOptions { behrstock, threshold, ..Default::default() };
            opts.seed = cli.seed.unwrap_or(opts.seed);
            opts.samples = cli.samples.unwrap_or(opts.samples);
            let out = lab::with_threads(threads, || lab::cmd_verify(suite, &opts))??;
            for line in &out.lines {
                println!("{line}");
            }
            Ok(out.exit_code())
        }
        Command::Experiment { config } => {
            let opts = RunOptions { seed: cli.seed, out: cli.out, samples: cli.samples, tolerance_scale: cli.tolerance_scale };
            let summary = lab::with_threads(threads, || lab::cmd_experiment(&config, &opts))??;
            for line in summary.lines() {
                println!("{line}");
            }
            println!("run directory: {}", summary.dir.display());
            Ok(summary.exit_code())
        }
        Command::Report { dir } => {
            let audit = lab::cmd_report(&dir)?;
            print!("{}", audit.table);
            Ok(audit.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { exit::SUCCESS as u8 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
