mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{FileConfig, RunConfig};
use error::CliError;

/// Sequential martingale tests for price series on a multiplicative grid.
///
/// Settings come from command-line flags, then from the file given by
/// --config (flat TOML with the same key names, lists as arrays), then from
/// built-in defaults.
#[derive(Debug, Parser)]
#[command(name = "gridbet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the grid hits of the input for each eta.
    Embed(RunArgs),
    /// Run the capital-threshold test for each eta and strategy.
    Test(RunArgs),
    /// Test across several etas and combine with a Bonferroni correction.
    Sweep(RunArgs),
    /// Markov strategy under proportional costs, with critical costs.
    Costs(RunArgs),
    /// Write the generated (or loaded) price path as CSV.
    Simulate(RunArgs),
    /// Merge record files of several runs into table-shaped summaries.
    Report {
        /// Output directories of earlier runs.
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(short, long, default_value = "gridbet-report")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Flat TOML file with default settings.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// CSV path, or generator spec `gbm:sigma=..,dt=..,horizon=..[,mu=..,s0=..]`
    /// or `fbm:hurst=..,sigma=..,n=..[,dt=..,s0=..]`.
    #[arg(short, long)]
    input: Option<String>,
    /// Grid spacings, e.g. `2^-8,2^-9`, `k=8` or decimals [default: 2^-8].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    eta: Option<Vec<String>>,
    /// Strategies: bb, markov [default: both].
    #[arg(long, value_delimiter = ',')]
    strategy: Option<Vec<String>>,
    /// Beta prior parameters; both default to 0.01/eta.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Significance level; the capital threshold is 1/alpha [default: 0.001].
    #[arg(long)]
    alpha: Option<f64>,
    /// Ignore grid hits at or after this time.
    #[arg(long)]
    horizon: Option<f64>,
    /// Unit costs in multiples of delta [default: 0,0.01,0.03,0.05].
    #[arg(long, value_delimiter = ',')]
    costs: Option<Vec<f64>>,
    /// Seed for generated inputs [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: gridbet-out].
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Timestamp column (name or index), or `none` for row numbers [default: 0].
    #[arg(long)]
    time_column: Option<String>,
    /// Price column (name or index) [default: 1].
    #[arg(long)]
    price_column: Option<String>,
    /// Series name used in outputs [default: file stem or generator name].
    #[arg(long)]
    label: Option<String>,
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let flags = FileConfig {
            input: self.input,
            eta: self.eta,
            strategy: self.strategy,
            a: self.a,
            b: self.b,
            alpha: self.alpha,
            horizon: self.horizon,
            costs: self.costs,
            seed: self.seed,
            out: self.out,
            time_column: self.time_column,
            price_column: self.price_column,
            label: self.label,
        };
        RunConfig::resolve(flags.or(file))
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Embed(args) => commands::cmd_embed(args.resolve()?),
        Command::Test(args) => commands::cmd_test(args.resolve()?),
        Command::Sweep(args) => commands::cmd_sweep(args.resolve()?),
        Command::Costs(args) => commands::cmd_costs(args.resolve()?),
        Command::Simulate(args) => commands::cmd_simulate(args.resolve()?),
        Command::Report { runs, out } => commands::cmd_report(&runs, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gridbet: {e}");
            e.exit_code()
        }
    }
}
