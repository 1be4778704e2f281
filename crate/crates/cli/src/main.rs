use std::path::PathBuf;
use std::process::ExitCode;

use acmcf::{report_path, summarize, verify, RunOptions, Runner, ScenarioConfig, Status};
use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};

/// Allen–Cahn phase-field laboratory for mean curvature flow.
#[derive(Parser)]
#[command(name = "acmcf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario JSON file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the scenario's `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for runs and checks.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write an ACF1 dump of every snapshot.
    #[arg(long, global = true)]
    dump_fields: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the first ε level; writes its energy log and dumps.
    Simulate,
    /// Evolve every ε level; one directory per level.
    Sweep,
    /// Run every configured check; writes report.csv, report.json and timings.json.
    Verify,
    /// Summarize an existing report CSV.
    Report {
        /// The CSV to read; defaults to report.csv in --out.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<Status> {
    let opts = RunOptions {
        out: cli.out.clone(),
        threads: cli.threads,
        dump_fields: cli.dump_fields,
    };
    let config = || cli.config.clone().ok_or_else(|| anyhow!("--config <path> is required"));
    match cli.command {
        Command::Simulate | Command::Sweep => {
            let runner = Runner::new(ScenarioConfig::load(&config()?)?, &opts)?;
            let written = match cli.command {
                Command::Simulate => runner.simulate()?,
                _ => runner.sweep()?,
            };
            for p in written.iter().filter(|p| p.extension().is_some_and(|e| e == "csv")) {
                println!("wrote {}", p.display());
            }
            if written.len() > 1 {
                println!("{} files in {}", written.len(), runner.out.display());
            }
            Ok(Status::Pass)
        }
        Command::Verify => {
            let (status, report) = verify(&config()?, &opts)?;
            print!("{}", acmcf::report::summary(&report.rows));
            Ok(status)
        }
        Command::Report { csv } => {
            let path = match (csv, &cli.out) {
                (Some(p), _) => p,
                (None, Some(out)) => report_path(out),
                (None, None) => return Err(anyhow!("report needs --csv <path> or --out <dir>")),
            };
            let (text, ok) = summarize(&path)?;
            print!("{text}");
            Ok(if ok { Status::Pass } else { Status::CheckFailure })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::ConfigOrIo as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(s) => ExitCode::from(s as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Status::ConfigOrIo as u8)
        }
    }
}
