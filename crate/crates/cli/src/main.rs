use std::path::PathBuf;
use std::process::ExitCode;

use autobraid_cli::{run_path, selftest, THREADS_ENV};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "autobraid", version, about = "Braid invariants of area-preserving disc flows")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the exact braid algebra.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let threads = rayon::current_num_threads();
    match cli.command {
        Command::Run { config, seed, samples, out } => match run_path(&config, seed, samples, out, threads) {
            Ok(o) if o.passed => ExitCode::SUCCESS,
            Ok(_) => ExitCode::from(2),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
        Command::Selftest => {
            let report = selftest::run_all();
            for c in &report {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if report.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
    }
}
