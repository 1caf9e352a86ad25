//! Thin CLI over the library pipeline. All behavior lives in
//! `reid_engine::pipeline`; this binary only parses arguments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use reid_engine::pipeline;

#[derive(Parser)]
#[command(
    name = "reid",
    about = "Unsupervised re-identification training engine",
    after_help = "Outputs land in the run directory (data.dir): manifest, \
checkpoint, report.json, log.jsonl. Set REID_LOG=quiet to silence progress."
)]
struct Cli {
    /// Config file (sectioned key = value); defaults apply when omitted.
    #[arg(short = 'c', long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. --set train.gamma=0.5 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic identity dataset.
    Synth,
    /// Build the pose-transformed dataset (K variants per original).
    GenPt,
    /// Stage one: train on the PT dataset with cls + triplet losses.
    TrainInit,
    /// Stage two: discriminative clustering with the radial distance loss.
    TrainCluster,
    /// CMC/mAP evaluation plus the 2D projection export.
    Eval,
    /// Cluster size/radius/centroid diagnostics at the configured C.
    ClusterStats,
    /// Sweep gamma or K, running the full chain per value.
    Ablate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let sub = match cli.command {
        Command::Synth => pipeline::Subcommand::Synth,
        Command::GenPt => pipeline::Subcommand::GenPt,
        Command::TrainInit => pipeline::Subcommand::TrainInit,
        Command::TrainCluster => pipeline::Subcommand::TrainCluster,
        Command::Eval => pipeline::Subcommand::Eval,
        Command::ClusterStats => pipeline::Subcommand::ClusterStats,
        Command::Ablate => pipeline::Subcommand::Ablate,
    };
    let code = pipeline::run(sub, cli.config.as_deref(), &cli.set);
    ExitCode::from(code as u8)
}
