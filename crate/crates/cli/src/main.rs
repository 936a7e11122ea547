//! `across`: reduce, classify and build envelopes of A-crosses, and check
//! the closed-form identities against the grid oracle.

mod commands;
mod report;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use across_core::oracle::Profile;
use report::Format;

#[derive(Debug, Parser)]
#[command(
    name = "across",
    version,
    about = "Envelopes of A-crosses: matrices, descriptions and grid checks"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    /// Seed for every sampled comparison.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Grid sizes for `verify` and `verify-all`: 33 per axis, defaults, or doubled.
    #[arg(long, value_enum, global = true, default_value_t = ProfileArg::Desk)]
    profile: ProfileArg,
    /// Write the result here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileArg {
    Smoke,
    Desk,
    Deep,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Smoke => Profile::Smoke,
            ProfileArg::Desk => Profile::Desk,
            ProfileArg::Deep => Profile::Deep,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RulesArg {
    /// Named identities and single-branch lifting.
    Named,
    /// Named identities, then the polyhedral fallback.
    Full,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Drop rows dominated by other rows.
    Reduce { matrix: PathBuf },
    /// Classification tag, full columns and the `X_{N,1}` gate.
    Classify { matrix: PathBuf },
    /// Whether the envelope is defined; exit 1 when it is not.
    Check { matrix: PathBuf },
    /// Envelope description of a reduced matrix.
    Envelope(EnvelopeArgs),
    /// Canonical matrices over `{0,1}^n` passing the filters.
    Enumerate {
        #[arg(short, long, default_value_t = 4)]
        n: usize,
        /// Comma-separated filters; default antichain,column-covered,not-nk,no-full-column.
        #[arg(long, value_delimiter = ',')]
        filter: Option<Vec<String>>,
    },
    /// Evaluate an expression at `h` values or at radii of a ball model.
    Eval(EvalArgs),
    /// The nine certified four-factor matrices against the recursion.
    Nine,
    /// Search for a cross whose envelope is the max-of-sums domain; exit 1 on a match.
    Qtilde {
        /// Candidate matrices; default is every closed envelope of the four-factor enumeration.
        matrices: Vec<PathBuf>,
        /// Add the target itself to the candidates.
        #[arg(long)]
        with_target: bool,
    },
    /// Check one identity against the grid oracle; exit 1 when it fails.
    Verify(VerifyArgs),
    /// Check the whole identity catalog; exit 1 when any case fails.
    VerifyAll {
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    pub matrix: PathBuf,
    /// Reduce the matrix first instead of rejecting it.
    #[arg(long)]
    pub reduce: bool,
    /// Print the structural description instead of the flattened one.
    #[arg(long)]
    pub explain: bool,
    #[arg(long, value_enum, default_value_t = RulesArg::Full)]
    pub rules: RulesArg,
    /// Ignore the certified four-factor table.
    #[arg(long)]
    pub no_certified: bool,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("target").required(true).args(["expr", "matrix"]))]
#[command(group = clap::ArgGroup::new("at").required(true).args(["h", "radii", "radii_csv"]))]
pub struct EvalArgs {
    /// Prefix expression such as `max(sum(h1,h3),sum(h2,h4))`.
    pub expr: Option<String>,
    /// Use the envelope of this matrix as the expression.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Comma-separated values in [0,1], as fractions or decimals.
    #[arg(long, value_delimiter = ',')]
    pub h: Option<Vec<String>>,
    /// Comma-separated radii; needs a model or uses unit balls with inner radius 1/2.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// CSV file of radii rows.
    #[arg(long)]
    pub radii_csv: Option<PathBuf>,
    /// Model file `{"factors": [{"r": .., "R": .., "dim": ..}]}`.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Case name, e.g. `PROP_CENTER(2,1)` or `CLAIM_Q7`.
    pub case: String,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Points per axis, overriding the profile.
    #[arg(long)]
    pub points: Option<usize>,
    /// Convergence tolerance of the solver.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_sweeps: Option<usize>,
    /// Grid cells below `log r` on each axis.
    #[arg(long)]
    pub margin: Option<usize>,
    /// Write the solved grid as CSV `t_1..t_N,value,mask`.
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
}

/// Input or usage problem; exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn run(cli: Cli) -> Result<report::Report, InputError> {
    let profile = Profile::from(cli.profile);
    match cli.command {
        Command::Reduce { matrix } => commands::reduce(&matrix),
        Command::Classify { matrix } => commands::classify(&matrix),
        Command::Check { matrix } => commands::check(&matrix),
        Command::Envelope(a) => commands::envelope(&a),
        Command::Enumerate { n, filter } => commands::enumerate(n, filter.as_deref()),
        Command::Eval(a) => commands::eval(&a),
        Command::Nine => Ok(commands::nine(cli.seed)),
        Command::Qtilde {
            matrices,
            with_target,
        } => commands::qtilde(&matrices, with_target, cli.seed),
        Command::Verify(a) => commands::verify(&a, profile, cli.seed),
        Command::VerifyAll { model } => commands::verify_all(model.as_deref(), profile, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (format, output) = (cli.format, cli.output.clone());
    let report = match run(cli) {
        Ok(r) => r,
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    for n in &report.notes {
        eprintln!("{n}");
    }
    let body = report.render(format);
    let written = match output {
        Some(path) => fs::write(&path, body).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(report.code)
}
