//! `atoll transform`: WAV or TFG signal in, complex + magnitude TFG out.

use atoll_core::error::{Error, Result};
use atoll_core::transforms::{analytic_part, cauchy_forward, gabor_forward, CauchySpec, GaborSpec, Signal};
use atoll_core::{audio, tfg};
use std::path::{Path, PathBuf};

#[derive(clap::Args)]
pub struct Args {
    /// Input signal: .wav (mono PCM16/float32) or a real/complex TFG file
    /// holding one row per sample.
    #[arg(long)]
    pub input: PathBuf,

    /// Output file prefix; writes <prefix>.complex.tfg and <prefix>.mag.tfg.
    #[arg(long, default_value = "transform")]
    pub prefix: String,

    #[arg(long)]
    pub x0: f64,
    #[arg(long)]
    pub x1: f64,
    #[arg(long, default_value_t = 0.25)]
    pub dx: f64,
    #[arg(long)]
    pub y0: f64,
    #[arg(long)]
    pub y1: f64,
    #[arg(long, default_value_t = 0.25)]
    pub dy: f64,

    /// Use the Cauchy wavelet transform instead of the Gabor transform.
    #[arg(long)]
    pub cauchy: bool,

    /// Vanishing moments for --cauchy.
    #[arg(long, default_value_t = 1)]
    pub order: u32,

    /// Take the analytic part of the signal before transforming.
    #[arg(long)]
    pub analytic: bool,

    /// Transform-time units per audio second for WAV inputs.
    #[arg(long, default_value_t = 1.0)]
    pub time_scale: f64,
}

pub fn load_signal(path: &Path, time_scale: f64) -> Result<Signal> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("wav") => audio::read_wav(path)?.to_signal(time_scale),
        _ => match tfg::peek_kind(path)?.as_str() {
            // a 1 x n grid doubles as a sampled signal: dx is the sample
            // spacing, origin_x the start time
            "complex" => {
                let g = tfg::load_complex(path)?;
                signal_from_grid_row(g.lattice().origin_x, g.lattice().dx, g.values().to_vec())
            }
            "real" => {
                let g = tfg::load_real(path)?;
                signal_from_grid_row(
                    g.lattice().origin_x,
                    g.lattice().dx,
                    g.values()
                        .iter()
                        .map(|&v| num_complex::Complex64::new(v, 0.0))
                        .collect(),
                )
            }
            k => Err(Error::format(format!("cannot read a signal from a {k} grid"))),
        },
    }
}

fn signal_from_grid_row(
    t0: f64,
    dt: f64,
    samples: Vec<num_complex::Complex64>,
) -> Result<Signal> {
    Signal::new(samples, 1.0 / dt, t0)
}

pub fn run(args: &Args, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut signal = load_signal(&args.input, args.time_scale)?;
    if args.analytic || args.cauchy {
        signal = analytic_part(&signal);
    }
    let grid = if args.cauchy {
        let spec = CauchySpec {
            order: args.order,
            x0: args.x0,
            x1: args.x1,
            dx: args.dx,
            y0: args.y0,
            y1: args.y1,
            dy: args.dy,
        };
        cauchy_forward(&signal, &spec)?
    } else {
        let spec = GaborSpec {
            x0: args.x0,
            x1: args.x1,
            dx: args.dx,
            y0: args.y0,
            y1: args.y1,
            dy: args.dy,
        };
        gabor_forward(&signal, &spec)?
    };
    tfg::save_complex(out_dir.join(format!("{}.complex.tfg", args.prefix)), &grid)?;
    tfg::save_real(out_dir.join(format!("{}.mag.tfg", args.prefix)), &grid.magnitude())?;
    Ok(())
}
