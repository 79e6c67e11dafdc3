//! `entcert`: certify perfect error correction for a channel and input state.

mod commands;
mod files;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, unknown family (exit 2).
    Parse(String),
    /// Inputs parse but violate an invariant (exit 3).
    Invalid(String),
    /// Writing an output file failed (exit 3).
    Io(String),
    /// The instance is not correctable (exit 1).
    NotCorrectable(String),
}

impl From<entcert::Error> for CliError {
    fn from(e: entcert::Error) -> Self {
        match e {
            entcert::Error::NotCorrectable(msg) => Self::NotCorrectable(msg),
            other => Self::Invalid(other.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::NotCorrectable(_) => 1,
            Self::Parse(_) => 2,
            Self::Invalid(_) | Self::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Parse(m) => write!(f, "parse error: {m}"),
            Self::Invalid(m) => write!(f, "invalid input: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
            Self::NotCorrectable(m) => write!(f, "not correctable: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "entcert",
    version,
    about = "Entanglement certificates for noisy quantum channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropies, coherent information and entanglement of formation.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Decide perfect correctability; exits 1 when not correctable.
    Certify {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Synthesize and verify a recovery map.
    Recover {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Write the recovery channel here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate I, E, the fidelity bound and the achieved fidelity over a noise grid.
    Sweep {
        /// dephasing, bitflip, depolarizing or amplitude-damping.
        #[arg(long)]
        family: String,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Product-measurement tomography round trip and correlation test.
    Tomo {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Write the built-in channels and states as fixture files.
    Examples {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct StateArgs {
    /// State file (JSON).
    #[arg(long, conflicts_with = "state_example")]
    state: Option<PathBuf>,
    /// Built-in state: bell or repetition.
    #[arg(long)]
    state_example: Option<String>,
}

#[derive(Args)]
struct InputArgs {
    /// Channel file (JSON).
    #[arg(long, conflicts_with = "example", required_unless_present = "example")]
    channel: Option<PathBuf>,
    /// Built-in channel `name[:p]`.
    #[arg(long)]
    example: Option<String>,
    #[command(flatten)]
    state: StateArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Args)]
struct CommonArgs {
    /// Correctability tolerance on S^Q - I, in bits.
    #[arg(long, default_value_t = entcert::correct::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the entanglement-of-formation optimization.
    #[arg(long)]
    skip_eof: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Include wall-clock timing in the report.
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = std::time::Instant::now();
    let (result, format, timing) = match cli.command {
        Command::Analyze { input, common } => (
            commands::analyze(&input.into(), &(&common).into()),
            common.format,
            common.timing,
        ),
        Command::Certify { input, common } => (
            commands::certify(&input.into(), &(&common).into()),
            common.format,
            common.timing,
        ),
        Command::Recover { input, common, out } => (
            commands::recover(&input.into(), &(&common).into(), out.as_deref()),
            common.format,
            common.timing,
        ),
        Command::Sweep {
            family,
            grid,
            state,
            common,
        } => (
            commands::sweep(&family, &grid, &state.into(), &(&common).into()),
            common.format,
            common.timing,
        ),
        Command::Tomo { state, common } => (
            commands::tomo(&state.into(), &(&common).into()),
            common.format,
            common.timing,
        ),
        Command::Examples { dir } => {
            return match commands::write_examples(&dir) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(&e),
            }
        }
    };
    match result {
        Ok((mut report, code)) => {
            if timing {
                report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            let text = match format {
                Format::Json => report.to_json(),
                Format::Tsv => report.to_tsv(),
            };
            print!("{text}");
            ExitCode::from(code)
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("entcert: {e}");
    ExitCode::from(e.exit_code())
}

impl From<InputArgs> for commands::InputSource {
    fn from(a: InputArgs) -> Self {
        Self {
            channel: a.channel,
            example: a.example,
            state: a.state.into(),
        }
    }
}

impl From<StateArgs> for commands::StateSource {
    fn from(a: StateArgs) -> Self {
        Self {
            path: a.state,
            example: a.state_example,
        }
    }
}

impl From<&CommonArgs> for commands::Settings {
    fn from(a: &CommonArgs) -> Self {
        Self {
            tol: a.tol,
            restarts: a.restarts,
            max_iter: a.max_iter,
            seed: a.seed,
            skip_eof: a.skip_eof,
        }
    }
}
