//! `crn`: parse, validate, simulate, and export reaction networks.

mod commands;
mod pipeline;

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use crn_core::kinetics::PropensityMode;

#[derive(Parser)]
#[command(
    name = "crn",
    version,
    about = "Reaction-network toolkit: deterministic parsing, stochastic and ODE simulation, SBML export",
    propagate_version = true
)]
pub struct Cli {
    /// Suppress informational messages on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Extra progress detail on stderr.
    #[arg(long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

/// `auto` or an explicit value.
#[derive(Debug, Clone, Copy)]
pub enum AutoOr<T> {
    Auto,
    Value(T),
}

impl<T: FromStr> FromStr for AutoOr<T>
where
    T::Err: std::fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            Ok(AutoOr::Auto)
        } else {
            s.parse().map(AutoOr::Value).map_err(|e| format!("{e}"))
        }
    }
}

impl<T> AutoOr<T> {
    pub fn value(self) -> Option<T> {
        match self {
            AutoOr::Auto => None,
            AutoOr::Value(v) => Some(v),
        }
    }
}

fn parse_mode(s: &str) -> Result<PropensityMode, String> {
    match s {
        "paper" | "power-law" => Ok(PropensityMode::PowerLaw),
        "combinatorial" => Ok(PropensityMode::Combinatorial),
        other => Err(format!(
            "unknown mode `{other}` (expected `paper` or `combinatorial`)"
        )),
    }
}

#[derive(Subcommand)]
pub enum Command {
    /// Parse a reaction file (.json kinetic table, anything else DSL)
    /// and print the canonical kinetic-table JSON.
    Parse { file: PathBuf },

    /// Check a network and print the validation report.
    Validate {
        file: PathBuf,
        /// Machine-readable report instead of the human listing.
        #[arg(long)]
        json: bool,
    },

    /// Print the stoichiometry matrix (species rows, reaction columns).
    Matrix {
        file: PathBuf,
        /// CSV instead of the aligned table.
        #[arg(long)]
        csv: bool,
    },

    /// Sample one stochastic trajectory (Gillespie direct method).
    SimulateSsa {
        file: PathBuf,
        #[arg(long = "t-end")]
        t_end: f64,
        #[arg(long)]
        seed: u64,
        /// Propensity form: `paper` (power law with availability guard)
        /// or `combinatorial` (falling-factorial counting).
        #[arg(long, default_value = "paper", value_parser = parse_mode)]
        mode: PropensityMode,
        #[arg(long = "max-steps", default_value_t = 100_000_000)]
        max_steps: u64,
        /// Record on a uniform grid of this many points instead of
        /// every event.
        #[arg(long)]
        grid: Option<usize>,
        /// Write the trajectory CSV here (plus a .meta.json sidecar);
        /// default is stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Integrate the deterministic mass-action ODE system.
    SimulateOde {
        file: PathBuf,
        #[arg(long = "t-end")]
        t_end: f64,
        /// Fixed step size; default picks one from the network scale.
        #[arg(long)]
        dt: Option<f64>,
        /// Embedded 4(5) pair with step control instead of fixed step.
        #[arg(long)]
        adaptive: bool,
        #[arg(long = "rel-tol", default_value_t = 1e-6)]
        rel_tol: f64,
        #[arg(long = "abs-tol", default_value_t = 1e-9)]
        abs_tol: f64,
        /// Recording grid size (default 201 points).
        #[arg(long, default_value_t = 201)]
        grid: usize,
        /// Record every accepted step instead of the grid.
        #[arg(long = "record-all")]
        record_all: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Run a Monte Carlo ensemble of stochastic replicates.
    Ensemble {
        file: PathBuf,
        /// Replicate count, or `auto` (100).
        #[arg(long, default_value = "auto")]
        runs: AutoOr<u32>,
        /// End time, or `auto` (5 / slowest initial rate).
        #[arg(long = "t-end", default_value = "auto")]
        t_end: AutoOr<f64>,
        /// Number of uniform grid points.
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "paper", value_parser = parse_mode)]
        mode: PropensityMode,
        #[arg(long = "max-steps", default_value_t = 100_000_000)]
        max_steps: u64,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
        /// Also write SVG plots (overview plus one per species).
        #[arg(long)]
        svg: bool,
    },

    /// Write the network as COPASI-importable SBML (Level 3 Version 1).
    ExportSbml {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },

    /// Extract a kinetic table from a free-text description through an
    /// OpenAI-compatible endpoint (honors CRN_LLM_BASE_URL,
    /// CRN_LLM_MODEL, CRN_LLM_API_KEY).
    FromText {
        file: PathBuf,
        /// Write the full extraction transcript JSON here.
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[arg(long = "base-url")]
        base_url: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        temperature: Option<f64>,
        #[arg(long = "max-repair-rounds")]
        max_repair_rounds: Option<u32>,
        #[arg(long = "timeout-secs")]
        timeout_secs: Option<u64>,
    },

    /// Full run: extract (or load) a network, validate, and write
    /// matrix, ensemble, SBML, plots, and a manifest into one
    /// self-describing directory.
    Pipeline {
        /// Free-text description file (omit when using --from-table).
        prose: Option<PathBuf>,
        /// Skip the LLM and start from a reaction file instead.
        #[arg(long = "from-table")]
        from_table: Option<PathBuf>,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "auto")]
        runs: AutoOr<u32>,
        #[arg(long = "t-end", default_value = "auto")]
        t_end: AutoOr<f64>,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value = "paper", value_parser = parse_mode)]
        mode: PropensityMode,
        #[arg(long = "max-steps", default_value_t = 100_000_000)]
        max_steps: u64,
        #[arg(long = "base-url")]
        base_url: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long = "max-repair-rounds")]
        max_repair_rounds: Option<u32>,
        #[arg(long = "timeout-secs")]
        timeout_secs: Option<u64>,
    },
}

/// Exit categories: 2 usage, 3 parse/validate, 4 engine, 5 endpoint.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse(String),
    Engine(String),
    Endpoint(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Engine(_) => 4,
            CliError::Endpoint(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Parse(m) | CliError::Engine(m) | CliError::Endpoint(m) => m,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Stderr reporter honoring --quiet/--verbose.
#[derive(Clone, Copy)]
pub struct Reporter {
    quiet: bool,
    verbose: bool,
}

impl Reporter {
    pub fn info(&self, message: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", message.as_ref());
        }
    }

    pub fn debug(&self, message: impl AsRef<str>) {
        if self.verbose && !self.quiet {
            eprintln!("{}", message.as_ref());
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let reporter = Reporter {
        quiet: cli.quiet,
        verbose: cli.verbose,
    };
    match commands::run(cli.command, reporter) {
        Ok(()) => {}
        Err(error) => {
            eprintln!("error: {}", error.message());
            std::process::exit(error.exit_code());
        }
    }
}
