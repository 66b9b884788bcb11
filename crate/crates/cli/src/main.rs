//! `vvcode`: command-line front end.
//!
//! Exit status: 0 success or pass, 1 property check failed, 2 usage or
//! input error, 3 inconclusive.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use vvcode::Word;

pub const DEFAULT_DEPTH: usize = 64;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_WIDTH: u32 = 64;

#[derive(Parser, Debug)]
#[command(name = "vvcode", about = "Variable-to-variable length coding toolkit", disable_version_flag = true)]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Print version information as JSON.
    #[arg(long)]
    version: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// H(D) = H(P) l̄(D).
    Conservation,
    /// H(D_m) = H(P) l̄(D_m) for m = 1..=m_max.
    Truncation,
    /// Changes in l̄ and H under one extension.
    Extension,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Load a dictionary and report properness, completeness and ASC status.
    Check {
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        source: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_WIDTH)]
        width: u32,
    },
    /// T_n, D_n⊥ and D_n.
    Truncate {
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_WIDTH)]
        width: u32,
        /// Also write D_n as a dictionary file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// D[α] = (D \ {α}) ∪ αA.
    Extend {
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        alpha: Word,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dictionary words with a given prefix.
    Cone {
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        beta: Word,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_WIDTH)]
        width: u32,
        /// Add the cone mass under this source.
        #[arg(long)]
        source: Option<PathBuf>,
    },
    /// Intervals for H(D) and l̄(D).
    Measure {
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        source: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
    /// Check an identity between H(D), H(P) and l̄(D).
    Verify {
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        source: PathBuf,
        #[arg(long, value_enum, default_value_t = Identity::Conservation)]
        identity: Identity,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Deepest truncation for `--identity truncation`.
        #[arg(long, default_value_t = 12)]
        m_max: usize,
        /// Word to extend for `--identity extension`.
        #[arg(long)]
        alpha: Option<Word>,
        #[arg(long, default_value_t = vvcode::measures::DIVERGENCE_CEILING)]
        ceiling: f64,
        #[arg(long, default_value_t = DEFAULT_WIDTH)]
        width: u32,
    },
    /// (m, H(D_m), l̄(D_m)) for m = 1..=m_max.
    Scan {
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        source: PathBuf,
        #[arg(long, default_value_t = 20)]
        m_max: usize,
        #[arg(long, default_value_t = DEFAULT_WIDTH)]
        width: u32,
    },
    /// Build a Tunstall dictionary.
    Tunstall {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a phrase codebook for a finite dictionary.
    Codebook {
        #[arg(long)]
        dict: PathBuf,
        /// Required unless `--fixed`.
        #[arg(long)]
        source: Option<PathBuf>,
        /// Fixed-length indexing instead of Huffman.
        #[arg(long)]
        fixed: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a symbol stream.
    Encode {
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Input is a raw bit file, one binary symbol per bit.
        #[arg(long)]
        bits: bool,
    },
    /// Decode a bitstream written by `encode`.
    Decode {
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write a raw bit file instead of text.
        #[arg(long)]
        bits: bool,
    },
    /// Coding rate on a sampled stream.
    Rate {
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long)]
        source: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        symbols: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Monte Carlo phrase statistics.
    Simulate {
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        source: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        phrases: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Report phrase counts and a goodness-of-fit test.
        #[arg(long)]
        histogram: bool,
        #[arg(long, default_value_t = vvcode::simulation::DEFAULT_STEP_CAP)]
        step_cap: usize,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
    /// Re-run the configuration stored in a report.
    Replay {
        stored: PathBuf,
        /// Exit 1 unless the new report equals the stored one.
        #[arg(long)]
        check: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.version {
        println!(
            "{}",
            serde_json::json!({
                "name": "vvcode",
                "version": env!("CARGO_PKG_VERSION"),
                "format_version": output::FORMAT_VERSION,
            })
        );
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: no command given; see `vvcode --help`");
        return ExitCode::from(2);
    };
    vvcode::simulation::init_threads_from_env();
    match commands::execute(command, cli.format, cli.report.as_deref()) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(output::error_code(&e))
        }
    }
}
