//! `zipfirm`: firm-growth simulation, power-law fitting, and leverage-ratio
//! risk statistics behind one binary. Every artifact-writing subcommand
//! leaves a manifest.json that `report` can sweep up later.

mod analyze;
mod bayes;
mod errors;
mod io;
mod manifest;
mod report;
mod simulate;
mod utest;

use clap::{Parser, Subcommand};

use errors::CliError;

#[derive(Parser)]
#[command(
    name = "zipfirm",
    version,
    about = "Simulate firm growth, fit power laws, and test leverage-ratio statistics",
    after_help = "Exit codes: 0 success, 1 I/O error, 2 usage error, 3 estimator or data error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the growth model; writes snapshot, rank TSVs, events, manifest
    Simulate(simulate::SimulateArgs),
    /// Fit a ranked field from a CSV or snapshot; writes fit.json, plot.tsv
    Analyze(analyze::AnalyzeArgs),
    /// Compose two tail fits into a bankruptcy probability curve
    Bayes(bayes::BayesArgs),
    /// Mann-Whitney U test of small-firm vs large-firm leverage ratios
    Utest(utest::UtestArgs),
    /// Aggregate every manifest under a directory into one JSON report
    Report(report::ReportArgs),
}

fn main() {
    let cli = Cli::parse();
    let result: Result<(), CliError> = match cli.command {
        Command::Simulate(args) => simulate::run(args),
        Command::Analyze(args) => analyze::run(args),
        Command::Bayes(args) => bayes::run(args),
        Command::Utest(args) => utest::run(args),
        Command::Report(args) => report::run(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
