//! `phigamma`: validate module definitions, compute cohomology profiles,
//! pairings, norms and finite-level descent, and generate the fixture corpus.
//!
//! Exit status: 0 success, 1 validation failure, 2 inconclusive or
//! unstabilized result, 3 schema, parse or usage error.

mod commands;
mod input;

use clap::{Parser, Subcommand, ValueEnum};
use phigamma::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "phigamma", version, about = "Exact computations with multivariable (φ, Γ)-modules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "text")]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check that a module (or finite-level object) is étale and its actions commute.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Cohomology profile of a complex attached to a module.
    Cohomology {
        #[arg(long)]
        input: PathBuf,
        /// Exponent window "lo:hi" or "l1,l2:h1,h2"; must contain the default −16:16.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        /// Report a single degree.
        #[arg(long)]
        degree: Option<usize>,
        /// Allow degrees ≥ 1 for series-level modules (reported as experimental).
        #[arg(long)]
        experimental: bool,
        /// Complex: herr, phi, gamma or psi.
        #[arg(long, default_value = "herr")]
        complex: String,
    },
    /// Residue pairing {x, y} of x ∈ M and y ∈ M*(1), with the φ/ψ adjointness check.
    Pairing {
        #[arg(long)]
        input: PathBuf,
        /// Coordinates of x, separated by ';'.
        #[arg(long)]
        x: String,
        /// Coordinates of y, separated by ';'.
        #[arg(long)]
        y: String,
    },
    /// Finite-level descent: D(V) for a representation, V(D) for a φ-module.
    Descend {
        #[arg(long)]
        input: PathBuf,
        /// Also build the representing algebra (mod p only).
        #[arg(long)]
        algebra: bool,
    },
    /// Gauss norms (and perfectoid norms in perfect mode) of a series.
    Norms {
        /// The series, e.g. "3*pi_a^-1 + pi_b".
        #[arg(long)]
        series: String,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Variable labels, comma separated.
        #[arg(long, default_value = "a")]
        delta: String,
        /// Radius r as a rational number.
        #[arg(long, default_value = "1")]
        r: String,
        /// Perfect mode with exponent denominators p^k.
        #[arg(long)]
        perfect: Option<u32>,
    },
    /// Quick internal consistency battery.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate the fixture corpus.
    Corpus {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory; without it only the file list is reported.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Schema(_) | Error::Parse(_) => 3,
        Error::Inconclusive(_) | Error::NotStabilized(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors count as parse errors; help and version succeed.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(report) => {
            print!("{}", report.render(cli.format));
            ExitCode::from(report.status)
        }
        Err(e) => {
            let code = exit_code(&e);
            match cli.format {
                Format::Json => println!("{}", serde_json::json!({"error": e.to_string(), "status": code})),
                Format::Text => eprintln!("error: {e}"),
            }
            ExitCode::from(code)
        }
    }
}
