//! `pdmho`: spectra, derived profiles, residual checks, eigenfunctions,
//! classical trajectories and operator matrices for position-dependent-mass
//! oscillators.

mod commands;
mod setup;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use commands::{ClassicalArgs, DeriveSource, Hamiltonian, OperatorKind, Outcome};
use setup::{Common, Source};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "pdmho", version, about = "Position-dependent-mass oscillator toolkit")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write the table here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lowest levels of a grid Hamiltonian against ω(n + 1/2)
    Spectrum {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Hamiltonian::H1)]
        hamiltonian: Hamiltonian,
        #[arg(long, default_value_t = 6)]
        levels: usize,
    },
    /// Tabulate m, Q, q and V from a mass or a deformation
    Derive {
        #[command(flatten)]
        source: DeriveSource,
        #[command(flatten)]
        common: Common,
    },
    /// Residual checks with grid refinement
    Verify {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "all")]
        suite: String,
        /// Interior node counts, coarse to fine
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        sizes: Vec<usize>,
    },
    /// Analytic eigenfunction against the grid eigenvector
    Eigenfunction {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
    },
    /// Integrate the classical equation of motion
    Classical {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: ClassicalArgs,
    },
    /// Export a grid operator as (row, col, value) triplets
    Operator {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        op: OperatorKind,
    },
}

fn with_setup(
    source: &Source,
    common: &Common,
    f: impl FnOnce(&setup::Setup) -> Result<Outcome, CliError>,
) -> Result<Outcome, CliError> {
    let s = setup::build(source, common)?;
    let mut out = f(&s)?;
    out.messages.splice(0..0, s.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(out)
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let f = cli.format;
    match &cli.command {
        Command::Spectrum { source, common, hamiltonian, levels } => {
            with_setup(source, common, |s| commands::spectrum(s, *hamiltonian, *levels, f))
        }
        Command::Derive { source, common } => commands::derive(source, common, f),
        Command::Verify { source, common, suite, sizes } => {
            with_setup(source, common, |s| commands::verify(s, suite, sizes, f))
        }
        Command::Eigenfunction { source, common, n } => with_setup(source, common, |s| commands::eigenfunction(s, *n, f)),
        Command::Classical { source, common, args } => with_setup(source, common, |s| commands::classical(s, args, f)),
        Command::Operator { source, common, op } => with_setup(source, common, |s| commands::operator(s, *op, f)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let out = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("pdmho: {e}");
            return ExitCode::from(e.code());
        }
    };
    for m in &out.messages {
        eprintln!("{m}");
    }
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &out.body).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            use std::io::Write;
            match std::io::stdout().write_all(out.body.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.to_string()),
                _ => Ok(()),
            }
        }
    };
    if let Err(e) = written {
        eprintln!("pdmho: cannot write output: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(out.exit)
}
