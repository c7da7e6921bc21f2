//! `atoll` — phase retrieval stability pipelines on the command line.
//!
//! Subcommands wrap the library end to end: transform signals to
//! time-frequency grids, segment magnitudes into atoll components, emit
//! per-component stability certificates, align reconstructions
//! component-wise, run the baseline retrieval solver, construct
//! perceptually equivalent audio, and drive the scripted demo scenarios.
//!
//! Every run is deterministic given its inputs and `--seed`; repeated
//! runs produce byte-identical JSON. Errors leave exit code 1 and a
//! single JSON line on stderr.

mod commands;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "atoll", version, about = "Stable phase retrieval up to component-wise phase")]
struct Cli {
    /// RNG seed for anything randomized (retrieval initialization).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (default: all cores; 1 forces sequential).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Transform(commands::transform::Args),
    Segment(commands::segment::Args),
    Certify(commands::certify::Args),
    Align(commands::align::Args),
    Scramble(commands::scramble::Args),
    Retrieve(commands::retrieve::Args),
    AudioShift(commands::audio_shift::Args),
    Demo(commands::demo::Args),
}

fn main() {
    let cli = Cli::parse();

    #[cfg(feature = "parallel")]
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("{}", serde_json::json!({"kind": "structural", "error": e.to_string()}));
            std::process::exit(1);
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = cli.threads;

    let result = match &cli.command {
        Command::Transform(args) => commands::transform::run(args, &cli.out_dir),
        Command::Segment(args) => commands::segment::run(args, &cli.out_dir),
        Command::Certify(args) => commands::certify::run(args, &cli.out_dir),
        Command::Align(args) => commands::align::run(args, &cli.out_dir),
        Command::Scramble(args) => commands::scramble::run(args, &cli.out_dir),
        Command::Retrieve(args) => commands::retrieve::run(args, &cli.out_dir, cli.seed),
        Command::AudioShift(args) => commands::audio_shift::run(args, &cli.out_dir),
        Command::Demo(args) => commands::demo::run(args, &cli.out_dir, cli.seed),
    };

    if let Err(e) = result {
        eprintln!(
            "{}",
            serde_json::json!({"kind": e.kind(), "error": e.to_string()})
        );
        std::process::exit(1);
    }
}
