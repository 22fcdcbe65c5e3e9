mod commands;
mod config;
mod fixtures;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nilequi::Error;

#[derive(Parser)]
#[command(name = "nilequi", version, about = "Equidistribution of dilated measures on nilmanifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct Common {
    /// Config file, or the name of a bundled fixture such as `torus_parabola`.
    #[arg(long)]
    config: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    panels: Option<usize>,
    #[arg(long)]
    height: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the configured family and print the verdict as JSON.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate Weyl sums over the configured parameter grid.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run the identity checks for a Cantor counterexample.
    Counterexample {
        /// `cantor-measure`, `cantor-curve` or `product-cantor:D`.
        name: String,
        /// Largest exponent `m` in the dilation `t = 3^m`.
        #[arg(long, default_value_t = 3)]
        m: u32,
        /// Only the exact self-similarity identities.
        #[arg(long)]
        self_similarity: bool,
        /// Only the classifier verdict.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the series product against matrix multiplication.
    BchSelftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } => 3,
        Error::Config { .. } | Error::Parse(_) => 2,
        _ => 1,
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Config {
            path: "--out".into(),
            message: format!("{}: {e}", path.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Check { common } => {
            let exp = commands::load(&common.config, common.seed, common.panels, common.height)?;
            let text = commands::check(&exp)?;
            emit(common.out.as_ref(), &text)?;
            Ok(true)
        }
        Command::Simulate { common, format } => {
            let exp = commands::load(&common.config, common.seed, common.panels, common.height)?;
            let text = commands::simulate(&exp, format)?;
            emit(common.out.as_ref(), &text)?;
            Ok(true)
        }
        Command::Counterexample {
            name,
            m,
            self_similarity,
            check,
            out,
        } => {
            let (text, passed) = commands::counterexample(&name, m, self_similarity, check)?;
            emit(out.as_ref(), &text)?;
            Ok(passed)
        }
        Command::BchSelftest { seed, pairs, out } => {
            let (text, passed) = commands::bch_selftest(seed, pairs)?;
            emit(out.as_ref(), &text)?;
            Ok(passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
