// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nla_cli::Pipeline;

#[derive(Parser)]
#[command(name = "nla", version, about = "Noiseless linear amplification simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic gain, fidelity and noise curves over an amplitude grid.
    Curves(RunArgs),
    /// Heralded amplifier, homodyne sampling, reconstruction and report.
    Simulate(RunArgs),
    /// Maximum-likelihood reconstruction of a stored quadrature dataset.
    Reconstruct(RunArgs),
    /// Wigner functions of |α⟩/|iα⟩ mixtures before and after amplification.
    WignerDemo(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON configuration (or a manifest.json from an earlier run).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (pipeline, args) = match Cli::parse().command {
        Command::Curves(a) => (Pipeline::Curves, a),
        Command::Simulate(a) => (Pipeline::Simulate, a),
        Command::Reconstruct(a) => (Pipeline::Reconstruct, a),
        Command::WignerDemo(a) => (Pipeline::WignerDemo, a),
    };
    match nla_cli::run(pipeline, &args.config, args.seed, args.out) {
        Ok(summary) => {
            for line in &summary.lines {
                println!("{line}");
            }
            println!(
                "wrote {} files to {}",
                summary.files.len() + 1,
                summary.output_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
