//! Command-line front end: single analyses, method comparisons, the
//! volume-reduction check and the two-link arm demo.

pub mod analyze;
pub mod arm_demo;
pub mod compare;
pub mod error;
pub mod output;
pub mod report;
pub mod svg;
pub mod theory;

use clap::{Parser, Subcommand};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "reach",
    version,
    about = "Sound output-set estimates for small feedforward networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze one network over one input box.
    Analyze(analyze::AnalyzeArgs),
    /// Sweep method pairs over seeds and budgets.
    Compare(compare::CompareArgs),
    /// Check the closed-form split volume reduction against enumeration.
    Theory(theory::TheoryArgs),
    /// Fit the two-link arm network and compare nine methods on it.
    ArmDemo(arm_demo::ArmDemoArgs),
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Analyze(a) => analyze::cmd_analyze(a),
        Command::Compare(a) => compare::cmd_compare(a),
        Command::Theory(a) => theory::cmd_theory(a),
        Command::ArmDemo(a) => arm_demo::cmd_arm_demo(a),
    }
}
