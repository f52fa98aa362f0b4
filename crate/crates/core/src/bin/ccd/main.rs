//! Command-line front end: build CCDs, query trees, compute credible sets
//! and run calibration sweeps.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ccd", version, about = "Conditional clade distributions and credible sets of tree topologies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a CCD from a tree sample (or re-serialise a CCD file) and write it.
    Build(SourceArgs),
    /// Probability, credible level and containment of probe trees.
    Query(QueryArgs),
    /// Maximum-probability tree of a CCD.
    Map(SourceArgs),
    /// Draw trees from a CCD, optionally restricted to a credible set.
    Sample(SampleArgs),
    /// Compare two runs: RF distance of their MAP trees and cross credible levels.
    Rf(RfArgs),
    /// Coverage, rank histogram and ECDF of true-tree credible levels.
    Calibrate(CalibrateArgs),
    /// Build a credible-set index (and optionally a credible CCD) and write it.
    CredibleSet(CredibleSetArgs),
    /// Sensitivity and specificity of a method against a reference run.
    SensSpec(SensSpecArgs),
}

/// Where the CCD comes from: a tree sample or a CCD file.
#[derive(Args, Clone)]
struct SourceArgs {
    /// Tree sample (Newick, one tree per line, or Nexus).
    #[arg(long, required_unless_present = "ccd")]
    input: Option<PathBuf>,
    /// Previously built CCD file, instead of --input.
    #[arg(long, conflicts_with = "input")]
    ccd: Option<PathBuf>,
    /// Fraction of leading trees discarded as burn-in.
    #[arg(long, default_value_t = 0.1)]
    burnin: f64,
    #[arg(long, default_value = "ccd1")]
    model: String,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct MethodArgs {
    /// Credible-set method: freq, prob or ccd. Repeat or separate by commas.
    #[arg(long, value_delimiter = ',', default_value = "prob")]
    method: Vec<String>,
    /// Trees drawn for the probability method.
    #[arg(long, default_value_t = 10_000)]
    k: usize,
    #[arg(long, default_value_t = 0.001)]
    grid_step: f64,
    #[arg(long, default_value_t = 0.95)]
    alpha: f64,
    /// Seed of all random streams; required whenever trees are drawn.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Probe trees.
    #[arg(long)]
    probes: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Number of trees.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Restrict draws to the --alpha credible set of --method.
    #[arg(long)]
    conditional: bool,
}

#[derive(Args)]
struct RfArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Second tree sample.
    #[arg(long)]
    other: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Lines of `true-tree-file sample-file`, relative to the manifest.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    burnin: f64,
    #[arg(long, default_value = "ccd1")]
    model: String,
    #[command(flatten)]
    method: MethodArgs,
    /// Output directory for levels.csv, coverage.csv, ecdf.csv and histogram.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CredibleSetArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Also write the credible CCD at --alpha to this file (ccd method).
    #[arg(long)]
    materialize: Option<PathBuf>,
}

#[derive(Args)]
struct SensSpecArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Reference (long) run whose frequency levels are taken as truth.
    #[arg(long)]
    reference: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(a) => commands::build(a),
        Command::Query(a) => commands::query(a),
        Command::Map(a) => commands::map(a),
        Command::Sample(a) => commands::sample(a),
        Command::Rf(a) => commands::rf(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::CredibleSet(a) => commands::credible_set(a),
        Command::SensSpec(a) => commands::sens_spec(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code())
        }
    }
}
