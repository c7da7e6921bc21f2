//! `atoll align`: component-wise phase alignment report for two grids.

use atoll_core::alignment::{align_decomposition, report_csv};
use atoll_core::atoll::read_decomposition;
use atoll_core::error::Result;
use atoll_core::tfg;
use std::path::{Path, PathBuf};

#[derive(clap::Args)]
pub struct Args {
    /// Reference complex grid F.
    #[arg(long)]
    pub f: PathBuf,

    /// Reconstruction complex grid G.
    #[arg(long)]
    pub g: PathBuf,

    /// Decomposition directory (from `atoll segment`).
    #[arg(long)]
    pub dec: PathBuf,

    /// Report file name inside --out-dir.
    #[arg(long, default_value = "alignment.json")]
    pub report: String,

    /// Optional CSV of per-component rows.
    #[arg(long)]
    pub csv: Option<String>,
}

pub fn run(args: &Args, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let f = tfg::load_complex(&args.f)?;
    let g = tfg::load_complex(&args.g)?;
    let dec = read_decomposition(&args.dec)?;
    let report = align_decomposition(&f, &g, &dec)?;
    super::write_json(&out_dir.join(&args.report), &report)?;
    if let Some(csv) = &args.csv {
        std::fs::write(out_dir.join(csv), report_csv(&report))?;
    }
    Ok(())
}
