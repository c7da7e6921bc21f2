//! `atoll scramble`: rotate each component by its own phase.

use atoll_core::alignment::scramble_phases;
use atoll_core::atoll::read_decomposition;
use atoll_core::error::Result;
use atoll_core::tfg;
use std::path::{Path, PathBuf};

#[derive(clap::Args)]
pub struct Args {
    /// Complex grid to scramble.
    #[arg(long)]
    pub input: PathBuf,

    /// Decomposition directory (from `atoll segment`).
    #[arg(long)]
    pub dec: PathBuf,

    /// Comma-separated phases, one per component (radians).
    #[arg(long)]
    pub alphas: String,

    /// Output TFG file name inside --out-dir.
    #[arg(long, default_value = "scrambled.tfg")]
    pub output: String,
}

pub fn run(args: &Args, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let f = tfg::load_complex(&args.input)?;
    let dec = read_decomposition(&args.dec)?;
    let alphas = super::parse_alphas(&args.alphas)?;
    let g = scramble_phases(&f, &dec, &alphas)?;
    tfg::save_complex(out_dir.join(&args.output), &g)?;
    Ok(())
}
