//! Single command-line entry point for the toolkit.
//!
//! Exit codes: 0 success, 1 runtime or numeric failure, 2 usage error.

mod args;
mod compare;
mod csvio;
mod evaluate;
mod fit;
mod provenance;
mod sample;

use clap::Parser;

use args::{Cli, Command, EvalKind, FitKind, SampleKind, ScoreKind};

/// Runtime failures bubble up as strings; usage failures never get here
/// (clap exits with code 2 on its own).
#[derive(Debug)]
pub struct CliError(String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<String> for CliError {
    fn from(s: String) -> Self {
        CliError(s)
    }
}

impl From<npproc_core::Error> for CliError {
    fn from(e: npproc_core::Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError(e.to_string())
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Sample { kind } => match kind {
            SampleKind::Crp(a) => sample::cmd_sample_crp(a),
            SampleKind::Ibp(a) => sample::cmd_sample_ibp(a),
            SampleKind::GpPrior(a) => sample::cmd_sample_gp_prior(a),
        },
        Command::Fit { kind } => match kind {
            FitKind::Lda(a) => fit::cmd_fit_lda(a),
            FitKind::Ftm(a) => fit::cmd_fit_ftm(a),
            FitKind::Gp(a) => fit::cmd_fit_gp(a),
        },
        Command::Score { kind } => match kind {
            ScoreKind::Ibp(a) => evaluate::cmd_score_ibp(a),
        },
        Command::Eval { kind } => match kind {
            EvalKind::Perplexity(a) => evaluate::cmd_eval_perplexity(a),
        },
        Command::Compare(a) => compare::cmd_compare(a),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
