use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dyadic_cli::config;
use dyadic_cli::{compare_runs, run_batch, run_envelope, Outcome, RunSummary, RunTables};

/// Run dyadic shell-model scenarios and their checks.
#[derive(Parser)]
#[command(name = "dyadic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate each scenario, run its checks and write artifacts.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Sup differences between two runs, given their report.json files.
    Compare { report_a: PathBuf, report_b: PathBuf },
    /// Bounding-sequence checks only, without integrating.
    Envelope { config: PathBuf },
    /// Print the special subsequence used by the decay ladder.
    Subseq { config: PathBuf },
}

const CONFIG_ERROR: u8 = 1;

fn print_summary(s: &RunSummary) {
    println!("{} -> {} [{:?}]", s.name, s.dir.display(), s.outcome);
    for v in &s.verdicts {
        println!(
            "  {:<18} {}  measured {:.6e}  bound {:.6e}  slack {:.1e}  {}",
            v.name,
            if v.pass { "PASS" } else { "FAIL" },
            v.measured,
            v.bound,
            v.slack,
            v.detail
        );
    }
    if let Some(m) = &s.message {
        println!("  {m}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { configs } => {
            let mut loaded = Vec::new();
            for path in &configs {
                match config::load(path) {
                    Ok(c) => loaded.push(c),
                    Err(e) => {
                        eprintln!("error: {e:#}");
                        return ExitCode::from(CONFIG_ERROR);
                    }
                }
            }
            let mut worst = Outcome::Pass;
            let mut failed = false;
            for result in run_batch(&loaded) {
                match result {
                    Ok(s) => {
                        print_summary(&s);
                        worst = match (worst, s.outcome) {
                            (Outcome::BlowUp, _) | (_, Outcome::BlowUp) => Outcome::BlowUp,
                            (Outcome::ChecksFailed, _) | (_, Outcome::ChecksFailed) => Outcome::ChecksFailed,
                            _ => Outcome::Pass,
                        };
                    }
                    Err(e) => {
                        eprintln!("error: {e:#}");
                        failed = true;
                    }
                }
            }
            if failed {
                ExitCode::from(CONFIG_ERROR)
            } else {
                ExitCode::from(worst.exit_code() as u8)
            }
        }
        Command::Compare { report_a, report_b } => {
            let result = RunTables::load(&report_a)
                .and_then(|a| Ok((a, RunTables::load(&report_b)?)))
                .and_then(|(a, b)| compare_runs(&a, &b));
            match result {
                Ok(d) => {
                    print!("{}", d.render());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(CONFIG_ERROR)
                }
            }
        }
        Command::Envelope { config: path } => match config::load(&path).and_then(|c| run_envelope(&c)) {
            Ok(s) => {
                print_summary(&s);
                ExitCode::from(s.outcome.exit_code() as u8)
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(CONFIG_ERROR)
            }
        },
        Command::Subseq { config: path } => {
            match config::load(&path).and_then(|c| dyadic_cli::scenario::subsequence_table(&c)) {
                Ok(table) => {
                    print!("{table}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(CONFIG_ERROR)
                }
            }
        }
    }
}
