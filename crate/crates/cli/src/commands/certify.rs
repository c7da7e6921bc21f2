//! `atoll certify`: segment a magnitude grid and emit one stability
//! certificate per component.

use atoll_core::analytic::Normalizer;
use atoll_core::atoll::{segment, write_decomposition};
use atoll_core::constants::assemble_certificate;
use atoll_core::error::{Error, Result};
use atoll_core::grid::{ParamDomain, RealGrid};
use atoll_core::tfg;
use num_complex::Complex64;
use std::path::{Path, PathBuf};

#[derive(clap::Args)]
pub struct Args {
    /// Magnitude grid (real TFG).
    #[arg(long)]
    pub input: PathBuf,

    /// Optional magnitude-difference grid | |F1|-|F2| | for the sampling
    /// point; omitted means an a-priori certificate (zero difference).
    #[arg(long)]
    pub diff: Option<PathBuf>,

    /// Superlevel threshold; with --relative a fraction of the peak.
    #[arg(long)]
    pub delta: f64,

    #[arg(long)]
    pub relative: bool,

    #[arg(long)]
    pub min_area: Option<f64>,

    /// Normalizer family the measurements came from.
    #[arg(long, value_parser = ["gabor", "cauchy", "none"], default_value = "gabor")]
    pub eta: String,

    /// Vanishing moments for --eta cauchy.
    #[arg(long, default_value_t = 1)]
    pub order: u32,

    /// Norm exponent.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,

    /// Depth-quantile level for the sampling point.
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,

    /// Uniform multiplier carried through the certificate.
    #[arg(long, default_value_t = 1.0)]
    pub uniform_c: f64,
}

pub fn run(args: &Args, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mag = tfg::load_real(&args.input)?;
    let delta = if args.relative {
        args.delta * mag.max_value()
    } else {
        args.delta
    };
    let min_area = args.min_area.unwrap_or(9.0 * mag.lattice().cell_area());
    let dec = segment(&mag, delta, min_area)?;
    write_decomposition(&out_dir.join("decomposition"), &dec)?;

    if dec.components.is_empty() {
        eprintln!("warning: no components above the threshold; empty bundle");
        super::write_json(&out_dir.join("certificates.json"), &Vec::<u8>::new())?;
        return Ok(());
    }

    let diff = match &args.diff {
        Some(path) => {
            let g = tfg::load_real(path)?;
            g.lattice().check_same(mag.lattice())?;
            g
        }
        None => RealGrid::zeros(*mag.lattice()),
    };

    let mut certificates = Vec::new();
    for (id, component) in dec.components.iter().enumerate() {
        let eta = match args.eta.as_str() {
            "none" => Normalizer::None,
            "cauchy" => Normalizer::Cauchy { order: args.order },
            // anchor the Gabor normalizer at the component's fitted center
            _ => {
                let center = match &component.fit {
                    ParamDomain::Disc { center, .. } => *center,
                    ParamDomain::Annulus { center, .. } => *center,
                    ParamDomain::Raster(_) => {
                        let cells = component.domain.true_cells();
                        let l = component.domain.lattice();
                        let n = cells.len().max(1) as f64;
                        let (mut sx, mut sy) = (0.0, 0.0);
                        for &k in &cells {
                            let (i, j) = l.ij(k);
                            sx += l.x(i);
                            sy += l.y(j);
                        }
                        (sx / n, sy / n)
                    }
                };
                Normalizer::Gabor {
                    base: Complex64::new(center.0, center.1),
                }
            }
        };
        let mut cert = assemble_certificate(component, &eta, &diff, args.p, args.t, args.uniform_c)
            .map_err(|e| Error::numerical(format!("component {id}: {e}"), f64::NAN))?;
        cert.component_id = id;
        certificates.push(cert);
    }
    super::write_json(&out_dir.join("certificates.json"), &certificates)?;
    Ok(())
}
