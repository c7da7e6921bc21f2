//! `atoll audio-shift`: perceptually equivalent phase shifts of audio.

use atoll_core::atoll::{read_decomposition, segment, write_decomposition};
use atoll_core::audio::{phase_shift_components, phase_shift_global, read_wav, write_wav};
use atoll_core::error::{Error, Result};
use atoll_core::transforms::{analytic_part, gabor_forward_on};
use atoll_core::grid::Lattice;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(clap::Args)]
pub struct Args {
    /// Input WAV (mono PCM16/float32).
    #[arg(long)]
    pub input: PathBuf,

    /// Single global phase (radians); mutually exclusive with --alphas.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Comma-separated per-component phases; needs a decomposition (see
    /// --dec) or segmentation parameters (--delta).
    #[arg(long)]
    pub alphas: Option<String>,

    /// Existing decomposition directory; if absent one is computed.
    #[arg(long)]
    pub dec: Option<PathBuf>,

    /// Segmentation threshold as a fraction of the spectrogram peak.
    #[arg(long, default_value_t = 0.005)]
    pub delta: f64,

    /// Transform-time units per audio second.
    #[arg(long, default_value_t = 48.0)]
    pub time_scale: f64,

    /// Lattice for the component analysis (transform-time units):
    /// x0,x1,dx,y0,y1,dy. Defaults to a lattice covering the clip with
    /// margins for the window tails.
    #[arg(long)]
    pub lattice: Option<String>,

    #[arg(long, default_value = "shifted.wav")]
    pub output: String,
}

#[derive(Serialize)]
struct GlobalReport {
    alpha: f64,
    energy_ratio: f64,
}

fn default_lattice(duration_tau: f64, nyquist_tau: f64) -> Result<Lattice> {
    let margin = atoll_core::transforms::WINDOW_TAIL_RADIUS + 0.3;
    let x0 = margin;
    let x1 = duration_tau - margin;
    if x1 <= x0 {
        return Err(Error::domain(
            "clip too short for the window margins; lower --time-scale",
        ));
    }
    let y1 = (nyquist_tau - 0.25).min(24.0);
    Lattice::from_ranges(x0, x1, 0.25, 0.25, y1, 0.25)
}

fn parse_lattice(s: &str) -> Result<Lattice> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::domain(format!("bad lattice entry {p:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    if parts.len() != 6 {
        return Err(Error::domain("lattice needs x0,x1,dx,y0,y1,dy"));
    }
    Lattice::from_ranges(parts[0], parts[1], parts[2], parts[3], parts[4], parts[5])
}

pub fn run(args: &Args, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let clip = read_wav(&args.input)?;
    match (&args.alpha, &args.alphas) {
        (Some(alpha), None) => {
            let out = phase_shift_global(&clip, *alpha)?;
            write_wav(out_dir.join(&args.output), &out)?;
            super::write_json(
                &out_dir.join("shift_report.json"),
                &GlobalReport {
                    alpha: *alpha,
                    energy_ratio: out.norm_l2() / clip.norm_l2(),
                },
            )?;
            Ok(())
        }
        (None, Some(alphas)) => {
            let alphas = super::parse_alphas(alphas)?;
            let dec = match &args.dec {
                Some(dir) => read_decomposition(dir)?,
                None => {
                    let fa = analytic_part(&clip.to_signal(args.time_scale)?);
                    let lattice = match &args.lattice {
                        Some(s) => parse_lattice(s)?,
                        None => {
                            let duration =
                                clip.samples.len() as f64 / clip.sample_rate_hz as f64
                                    * args.time_scale;
                            let nyquist = clip.sample_rate_hz as f64 / 2.0 / args.time_scale;
                            default_lattice(duration, nyquist)?
                        }
                    };
                    let v = gabor_forward_on(&fa, &lattice)?;
                    let mag = v.magnitude();
                    let dec = segment(&mag, args.delta * mag.max_value(), 0.05)?;
                    write_decomposition(&out_dir.join("decomposition"), &dec)?;
                    dec
                }
            };
            let (out, report) = phase_shift_components(&clip, &dec, &alphas, args.time_scale)?;
            write_wav(out_dir.join(&args.output), &out)?;
            super::write_json(&out_dir.join("shift_report.json"), &report)?;
            Ok(())
        }
        _ => Err(Error::domain(
            "pass exactly one of --alpha (global) or --alphas (per component)",
        )),
    }
}
