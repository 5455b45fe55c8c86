use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use feti_bench::{report, run_grid, verify, RunArgs, RunConfig};

#[derive(Parser)]
#[command(name = "feti-bench", version, about = "Compare T-FETI and FETI-DP solver variants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the selected variant grid and write traces plus summary.csv.
    Run(RunArgs),
    /// Run the invariant suite on small instances of every preset.
    Verify(RunArgs),
    /// Merge trace files (or directories of them) into a long-format CSV.
    Report {
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Run(args) => {
            let cfg = RunConfig::load(args)?;
            let summary = run_grid(&cfg)?;
            println!("{:<10} {:<20} {:>6} {:>10} {:>10} {:>8} {:>10}", "problem", "variant", "iters", "eps_r", "status", "dual", "oracle");
            for r in &summary.rows {
                println!(
                    "{:<10} {:<20} {:>6} {:>10.3e} {:>10} {:>8} {:>10.3e}",
                    r.problem, r.variant, r.iterations, r.final_eps, r.status, r.dual_size, r.oracle_error
                );
            }
            for (problem, variant, msg) in &summary.failures {
                eprintln!("{problem} {variant}: {msg}");
            }
            Ok(if summary.all_terminated() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Verify(args) => {
            let cfg = RunConfig::load(args)?;
            let rep = verify(&cfg)?;
            for c in rep.failures() {
                eprintln!("FAIL {} {}: {:e} > {:e}", c.problem, c.check, c.value, c.tolerance);
            }
            println!("{} checks, {} failed", rep.checks.len(), rep.failures().count());
            Ok(if rep.all_passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Report { inputs, out } => {
            let flags = report(&inputs, &out)?;
            for f in &flags {
                println!("{} monotone={}", f.variant, f.monotone);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
