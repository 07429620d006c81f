//! `pshrink`: experiments with Poisson mean estimators.
//!
//! Exit codes: 0 success or all checks pass, 1 a check failed, 2 usage or
//! input error.

mod commands;
mod config;
mod output;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{dominance, eb_demo, estimate, risk_curve, sample_model, Status};

#[derive(Debug, Parser)]
#[command(
    name = "pshrink",
    version,
    about = "Shrinkage estimation of Poisson means"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact-series or Monte Carlo risk curve against gamma = sum of theta.
    RiskCurve(risk_curve::RiskCurveArgs),
    /// Numerical dominance checks; exit code 1 if any check fails.
    DominanceScan(dominance::DominanceArgs),
    /// Apply an estimator to rows of counts read from CSV.
    Estimate(estimate::EstimateArgs),
    /// Simulated regression study of the empirical Bayes rule.
    EbDemo(eb_demo::EbDemoArgs),
    /// Draw (theta, y) from a sum-and-proportions prior.
    SampleModel(sample_model::SampleModelArgs),
}

fn main() -> ExitCode {
    // clap exits with code 2 on usage errors.
    let cli = Cli::parse();
    let result = match cli.command {
        Command::RiskCurve(a) => risk_curve::run(a),
        Command::DominanceScan(a) => dominance::run(a),
        Command::Estimate(a) => estimate::run(a),
        Command::EbDemo(a) => eb_demo::run(a),
        Command::SampleModel(a) => sample_model::run(a),
    };
    match result {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
