//! `atoll retrieve`: alternating-projection phase retrieval from a
//! magnitude grid.

use atoll_core::error::Result;
use atoll_core::retrieval::{residual_log_csv, retrieve};
use atoll_core::{audio, tfg};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(clap::Args)]
pub struct Args {
    /// Measured magnitude grid (real TFG).
    #[arg(long)]
    pub input: PathBuf,

    /// Iteration cap.
    #[arg(long, default_value_t = 500)]
    pub iters: usize,

    /// Optional ground-truth signal (wav) for time-domain error reporting.
    #[arg(long)]
    pub truth: Option<PathBuf>,

    /// Transform-time units per audio second for --truth.
    #[arg(long, default_value_t = 1.0)]
    pub time_scale: f64,

    /// Sample rate of the emitted reconstruction WAV.
    #[arg(long, default_value_t = 8000)]
    pub wav_rate: u32,
}

#[derive(Serialize)]
struct Summary {
    iterations: usize,
    measurement_residual_rel: f64,
    time_residual_rel: Option<f64>,
    signal_samples: usize,
    signal_rate: f64,
}

pub fn run(args: &Args, out_dir: &Path, seed: u64) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mag = tfg::load_real(&args.input)?;
    let truth = match &args.truth {
        Some(p) => Some(super::transform::load_signal(p, args.time_scale)?),
        None => None,
    };
    let result = retrieve(&mag, args.iters, seed, truth.as_ref())?;

    tfg::save_complex(out_dir.join("f_rec.tfg"), &result.f_grid)?;
    std::fs::write(out_dir.join("residuals.csv"), residual_log_csv(&result))?;
    if let Some(pm) = &result.phase_map {
        tfg::save_real(out_dir.join("phase_map.tfg"), pm)?;
    }
    // real part of the reconstruction, resampled to an audio rate by
    // treating one transform-time unit as one wav_rate-th of the length
    let samples: Vec<f64> = result.f_rec.samples().iter().map(|c| c.re).collect();
    let wav = audio::AudioBuffer::new(samples, args.wav_rate)?.normalized();
    audio::write_wav(out_dir.join("f_rec.wav"), &wav)?;

    super::write_json(
        &out_dir.join("retrieval.json"),
        &Summary {
            iterations: result.iterations,
            measurement_residual_rel: result.measurement_residual_rel,
            time_residual_rel: result.time_residual_rel,
            signal_samples: result.f_rec.len(),
            signal_rate: result.f_rec.sample_rate(),
        },
    )?;
    Ok(())
}
