// Copyright 2026 ring-purity Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ring_purity::cli::{self, WidthsFile};
use ring_purity::error::Result;
use ring_purity::experiment::{parse_subsets, parse_windows};

/// Purity of one oscillator in a ring of coupled oscillators under different
/// bath preparations. Thread count follows RAYON_NUM_THREADS.
#[derive(Parser)]
#[command(name = "ring-purity", version, about)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a key=value config file.
    Run { config: PathBuf },
    /// Repeat a run from its manifest.json.
    Rerun {
        manifest: PathBuf,
        /// Write into this directory instead of the recorded one.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Recompute dispersion widths from a raw_trace.csv.
    Widths {
        raw_trace: PathBuf,
        /// Semicolon-separated windows, e.g. "0:20;20:40".
        #[arg(long)]
        windows: String,
        /// Explicit subsets, e.g. "w2:bp1,bp2;pair:bp3,bp4".
        #[arg(long)]
        subsets: Option<String>,
    },
    /// Compare the fast reduction against brute-force quadrature.
    #[command(hide = true)]
    OracleCheck {
        #[arg(long, default_value_t = 64)]
        points: usize,
    },
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Run { config } => {
            let run = cli::parse_config(&config)?;
            cli::run(&run)?;
            println!("wrote {}", run.out_dir.display());
        }
        Command::Rerun { manifest, out_dir } => {
            let m = cli::rerun(&manifest, out_dir.as_deref())?;
            let dir = out_dir.unwrap_or(m.config.out_dir);
            println!("wrote {}", dir.display());
        }
        Command::Widths {
            raw_trace,
            windows,
            subsets,
        } => {
            let windows = parse_windows(&windows).map_err(ring_purity::error::Error::Validation)?;
            let subsets = subsets
                .map(|s| parse_subsets(&s).map_err(ring_purity::error::Error::Validation))
                .transpose()?;
            let table = cli::widths_from_csv(&raw_trace, &windows, subsets.as_deref())?;
            println!(
                "{}",
                serde_json::to_string_pretty(&WidthsFile::from(&table))?
            );
        }
        Command::OracleCheck { points } => {
            let lines = cli::oracle_report(points)?;
            for line in &lines {
                println!("{} {line}", if line.agrees() { "ok  " } else { "FAIL" });
            }
            return Ok(lines.iter().all(|l| l.agrees()));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
