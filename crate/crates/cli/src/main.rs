//! `chshq`: command-line front end for the CHSH_q toolkit.
//!
//! Every subcommand writes a versioned JSON or CSV document (see
//! [`output`]). Exit codes: 0 success, 1 I/O failure, 2 invalid input,
//! 3 invariant violation, 4 size cap exceeded. The worker thread count can
//! be set with the `CHSHQ_THREADS` environment variable.

mod commands;
mod error;
mod input;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use chshq::boxes::GameKind;
use chshq::field::Field;
use chshq::rational::parse_ratio;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use commands::ConstructionKind;
use error::{exit, CliError, CliResult};
use output::Format;

pub const THREADS_ENV: &str = "CHSHQ_THREADS";

#[derive(Parser, Debug)]
#[command(name = "chshq", version, about = "Exact and numerical experiments on the CHSH_q game family")]
struct Cli {
    /// Output file (a directory for `report`); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; `report` defaults to CSV, every other command to JSON.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct FieldArgs {
    /// Characteristic.
    #[arg(long, required_unless_present = "q", conflicts_with = "q")]
    p: Option<u32>,
    /// Extension degree.
    #[arg(long, default_value_t = 1)]
    s: u32,
    /// Field order, in place of `--p` and `--s`.
    #[arg(long)]
    q: Option<u64>,
}

impl FieldArgs {
    fn field(self) -> CliResult<Field> {
        match (self.q, self.p) {
            (Some(q), _) => Ok(Field::with_order(q)?),
            (None, Some(p)) => Ok(Field::new(p, self.s)?),
            (None, None) => Err(CliError::Usage("give --p (and --s) or --q".into())),
        }
    }
}

fn ratio_arg(text: &str) -> Result<BigRational, String> {
    parse_ratio(text).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GameArg {
    Base,
    Dist,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classical winning probability: exhaustive for q <= 8, local search above.
    ClassicalValue {
        #[command(flatten)]
        field: FieldArgs,
        /// Require the exhaustive search (fails above q = 8).
        #[arg(long, conflicts_with = "search")]
        exact: bool,
        /// Use seeded local search even where exhaustive search is possible.
        #[arg(long)]
        search: bool,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = commands::DEFAULT_SEARCH_ROUNDS)]
        rounds: usize,
    },
    /// Quantum upper bound 1/q + (q-1)/(q sqrt q) for each listed q.
    Tsirelson {
        #[arg(long = "q", required = true, value_delimiter = ',')]
        qs: Vec<u32>,
    },
    /// Build an explicit point-line configuration.
    Construct {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum)]
        kind: ConstructionKind,
        /// Subspace construction: emit the randomly thinned line set.
        #[arg(long)]
        thinned: bool,
    },
    /// Count incidences of a configuration file.
    Incidences {
        #[arg(long = "in", alias = "input")]
        input: PathBuf,
    },
    /// Make a configuration legal by a random projective transformation.
    Regularize {
        #[arg(long = "in", alias = "input")]
        input: PathBuf,
        /// Skip the subsampling to floor(q/2) points and lines.
        #[arg(long)]
        no_downsample: bool,
    },
    /// Regular noisy boxes.
    #[command(subcommand)]
    Box(BoxCommand),
    /// Information-causality sums over the Hadamard index task.
    IcSweep {
        #[command(flatten)]
        field: FieldArgs,
        /// Box bias as num/den.
        #[arg(long = "E", value_parser = ratio_arg)]
        bias: BigRational,
        #[arg(long, default_value_t = 1)]
        m_min: u32,
        #[arg(long)]
        m_max: u32,
    },
    /// Bilinear character-sum bound.
    #[command(subcommand)]
    Fourier(FourierCommand),
    /// One-bit message reduction of a copy protocol over an alphabet of size `sigma`.
    Cstar {
        #[arg(long)]
        sigma: usize,
        #[arg(long, default_value_t = 100_000)]
        runs: u64,
    },
    /// Regenerate every golden table into the `--out` directory.
    Report {
        #[arg(long)]
        all: bool,
    },
}

#[derive(Subcommand, Debug)]
enum BoxCommand {
    /// Error law after m uses with summed outputs.
    Compose {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long = "E", value_parser = ratio_arg)]
        bias: BigRational,
        #[arg(long)]
        m: u32,
    },
    /// Box induced on the distributed game.
    Distribute {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long = "E", value_parser = ratio_arg)]
        bias: BigRational,
    },
    /// Monte Carlo estimate of the win probability.
    Simulate {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long = "E", value_parser = ratio_arg)]
        bias: BigRational,
        #[arg(long, value_enum, default_value_t = GameArg::Base)]
        game: GameArg,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
}

#[derive(Subcommand, Debug)]
enum FourierCommand {
    /// Check the q^(3/2) bound on random unit-vector families.
    Verify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Alternating maximization of the sum.
    Maximize {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        rounds: usize,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
    },
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("could not start {n} threads: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let seed = cli.seed;
    let out = match cli.command {
        Command::ClassicalValue { field, exact, search, restarts, rounds } => {
            commands::classical_value(&field.field()?, exact, search, restarts, rounds, seed)?
        }
        Command::Tsirelson { qs } => commands::tsirelson(&qs)?,
        Command::Construct { field, kind, thinned } => commands::construct(&field.field()?, kind, seed, thinned)?,
        Command::Incidences { input } => commands::incidences(input::read_config(&input)?)?,
        Command::Regularize { input, no_downsample } => {
            commands::regularize(input::read_config(&input)?, seed, !no_downsample)?
        }
        Command::Box(BoxCommand::Compose { field, bias, m }) => commands::box_compose(&field.field()?, bias, m)?,
        Command::Box(BoxCommand::Distribute { field, bias }) => commands::box_distribute(&field.field()?, bias)?,
        Command::Box(BoxCommand::Simulate { field, bias, game, samples }) => {
            let game = match game {
                GameArg::Base => GameKind::Base,
                GameArg::Dist => GameKind::Dist,
            };
            commands::box_simulate(&field.field()?, bias, game, samples, seed)?
        }
        Command::IcSweep { field, bias, m_min, m_max } => commands::ic_sweep(&field.field()?, bias, m_min, m_max)?,
        Command::Fourier(FourierCommand::Verify { field, n, trials }) => {
            commands::fourier_verify(&field.field()?, n, trials, seed)?
        }
        Command::Fourier(FourierCommand::Maximize { field, n, rounds, restarts }) => {
            commands::fourier_maximize(&field.field()?, n, rounds, restarts, seed)?
        }
        Command::Cstar { sigma, runs } => commands::cstar(sigma, runs, seed)?,
        Command::Report { all } => {
            if !all {
                return Err(CliError::Usage("report needs --all".into()));
            }
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("report"));
            let format = cli.format.unwrap_or(Format::Csv);
            let written = report::write_all(&dir, format, seed)?;
            return report::summary(&dir, &written, seed).emit(format, None);
        }
    };
    out.emit(cli.format.unwrap_or(Format::Json), cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("chshq: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
