//! Command-line front end: argument definitions, command implementations and
//! the bundled example suite.

pub mod commands;
pub mod error;
pub mod input;
pub mod output;
pub mod suite;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rccs_core::plts::ExploreConfig;

use crate::error::{CliError, Result};
use crate::output::{Format, Report};

#[derive(Debug, Parser)]
#[command(name = "rccs", version, about = "Testing characteristics and equivalences for randomized CCS")]
pub struct Cli {
    /// Cap on explored states per graph.
    #[arg(long, global = true, env = "RCCS_MAX_STATES", default_value_t = 10_000)]
    pub max_states: usize,

    /// Fixpoint unfoldings allowed while deriving one step.
    #[arg(long, global = true, default_value_t = 64)]
    pub max_depth: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Seed for pseudo-random corpus terms.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and pretty-print a term or distribution.
    Parse(ParseArgs),
    /// Explore the reachable transition graph.
    Graph(ParseArgs),
    /// May/fair characteristics and outcome bounds.
    Chi(ChiArgs),
    /// Compare two processes.
    Compare(CompareArgs),
    /// Brute-force table over degenerate sequences next to the exact value.
    Oracle(OracleArgs),
    /// Run the bundled example suite.
    #[command(name = "paper")]
    Examples(SuiteArgs),
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Term text, a file, or `-` for stdin. A file may hold `{"dist": [...]}`.
    #[arg(long)]
    pub term: String,

    /// Allow `omega` prefixes.
    #[arg(long)]
    pub allow_omega: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ChiMode {
    May,
    Fair,
    /// Infimum of the outcomes.
    Inf,
    /// Both end points of the outcome interval.
    Bounds,
}

#[derive(Debug, Args)]
pub struct ChiArgs {
    #[arg(long)]
    pub term: String,

    /// `psiL`, `psi:a`, `psi:~a` or `psiOmega`; defaults to `psiOmega` with
    /// `--observer` and to `psiL` otherwise.
    #[arg(long)]
    pub predicate: Option<String>,

    #[arg(long, value_enum, default_value_t = ChiMode::May)]
    pub mode: ChiMode,

    /// Compose with this observer before evaluating.
    #[arg(long)]
    pub observer: Option<String>,

    /// Also run the brute-force oracle up to this depth and report the sandwich.
    #[arg(long)]
    pub oracle_depth: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CompareKind {
    Strong,
    WeakVerify,
    Diamond,
    Box,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ContextArg {
    Classical,
    Probabilistic,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub left: String,

    #[arg(long)]
    pub right: String,

    #[arg(long, value_enum)]
    pub kind: CompareKind,

    #[arg(long, value_enum, default_value_t = ContextArg::Probabilistic)]
    pub context: ContextArg,

    /// Prefix depth of generated observers.
    #[arg(long, default_value_t = 4)]
    pub budget: usize,

    /// Cap on generated observers.
    #[arg(long, default_value_t = 2000)]
    pub max_observers: usize,

    /// Candidate weak bisimulation, `{"blocks": [["P", "Q"], ...]}`.
    #[arg(long)]
    pub partition: Option<String>,

    /// Exit with status 1 unless the two sides are found equivalent
    /// (or, for testing kinds, not distinguished).
    #[arg(long)]
    pub expect_equal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    May,
    Fair,
    Inf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Required unless `--random` is given.
    #[arg(long, required_unless_present = "random")]
    pub term: Option<String>,

    /// Draw the term from the seeded corpus instead.
    #[arg(long, conflicts_with = "term")]
    pub random: bool,

    #[arg(long, default_value = "psiL")]
    pub predicate: String,

    #[arg(long)]
    pub depth: usize,

    #[arg(long, value_enum, default_value_t = OracleMode::May)]
    pub mode: OracleMode,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Comma-separated substrings; only cases whose id contains one of them run.
    #[arg(long)]
    pub filter: Option<String>,
}

impl Cli {
    pub fn explore_config(&self) -> ExploreConfig {
        ExploreConfig {
            max_states: self.max_states,
            max_unfold_depth: self.max_depth,
            ..ExploreConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_states == 0 {
            return Err(CliError::Usage("--max-states must be positive".into()));
        }
        if self.max_depth == 0 {
            return Err(CliError::Usage("--max-depth must be positive".into()));
        }
        if self.format == Format::Dot && !matches!(self.command, Command::Graph(_)) {
            return Err(CliError::Usage("--format dot is only available for `graph`".into()));
        }
        Ok(())
    }
}

/// Validates the flags, then runs the command.
pub fn run(cli: &Cli) -> Result<Report> {
    cli.validate()?;
    let cfg = cli.explore_config();
    match &cli.command {
        Command::Parse(args) => commands::parse(args),
        Command::Graph(args) => commands::graph(args, &cfg),
        Command::Chi(args) => commands::chi(args, &cfg),
        Command::Compare(args) => commands::compare(args, &cfg),
        Command::Oracle(args) => commands::oracle(args, cli.seed, &cfg),
        Command::Examples(args) => Ok(suite::run_example_suite(args.filter.as_deref(), &cfg)),
    }
}
