//! `atoll segment`: threshold a magnitude grid into atoll components.

use atoll_core::atoll::{segment, write_decomposition};
use atoll_core::error::Result;
use atoll_core::tfg;
use std::path::{Path, PathBuf};

#[derive(clap::Args)]
pub struct Args {
    /// Magnitude grid (real TFG).
    #[arg(long)]
    pub input: PathBuf,

    /// Superlevel threshold; with --relative it is a fraction of the peak.
    #[arg(long)]
    pub delta: f64,

    /// Interpret --delta as a fraction of the grid maximum.
    #[arg(long)]
    pub relative: bool,

    /// Minimum component area (plane units); defaults to 9 cells.
    #[arg(long)]
    pub min_area: Option<f64>,

    /// Subdirectory (inside --out-dir) for the decomposition.
    #[arg(long, default_value = "decomposition")]
    pub name: String,
}

pub fn run(args: &Args, out_dir: &Path) -> Result<()> {
    let mag = tfg::load_real(&args.input)?;
    let delta = if args.relative {
        args.delta * mag.max_value()
    } else {
        args.delta
    };
    let min_area = args
        .min_area
        .unwrap_or(9.0 * mag.lattice().cell_area());
    let dec = segment(&mag, delta, min_area)?;
    write_decomposition(&out_dir.join(&args.name), &dec)?;
    Ok(())
}
