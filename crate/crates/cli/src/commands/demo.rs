//! `atoll demo`: scripted end-to-end scenarios.
//!
//! * `instability` — builds a two-component field, scrambles component
//!   phases, and shows that the measurements coincide while the
//!   common-phase distance is large.
//! * `figure2` — runs the retrieval solver over many seeds on a two-burst
//!   signal and tabulates the per-component phase statistics: each
//!   component comes back with a nearly constant phase, but the constants
//!   differ between components.
//! * `audio` — writes a synthetic two-burst clip and a component-shifted
//!   version with identical spectrogram magnitudes.

use atoll_core::alignment::{align_decomposition, scramble_phases};
use atoll_core::atoll::{segment, write_decomposition};
use atoll_core::error::{Error, Result};
use atoll_core::grid::lp_norm;
use atoll_core::retrieval::{diagnose_phases, retrieve, two_burst_lattice, two_burst_signal};
use atoll_core::transforms::gabor_forward_on;
use atoll_core::{audio, tfg};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

#[derive(clap::Args)]
pub struct Args {
    /// Scenario: instability | figure2 | audio.
    #[arg(value_parser = ["instability", "figure2", "audio"])]
    pub scenario: String,

    /// Retrieval seeds for figure2.
    #[arg(long, default_value_t = 20)]
    pub runs: u64,

    /// Retrieval iteration cap for figure2.
    #[arg(long, default_value_t = 600)]
    pub iters: usize,
}

pub fn run(args: &Args, out_dir: &Path, seed: u64) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    match args.scenario.as_str() {
        "instability" => instability(out_dir),
        "figure2" => figure2(out_dir, seed, args.runs, args.iters),
        "audio" => audio_demo(out_dir),
        other => Err(Error::domain(format!("unknown scenario {other}"))),
    }
}

#[derive(Serialize)]
struct InstabilityNumbers {
    components: usize,
    scramble_alphas: Vec<f64>,
    measurement_residual: f64,
    component_residual_sum: f64,
    global_residual: f64,
    min_component_norm: f64,
    ratio: f64,
}

fn instability(out_dir: &Path) -> Result<()> {
    let f = two_burst_signal();
    let lattice = two_burst_lattice();
    let v = gabor_forward_on(&f, &lattice)?;
    let mag = v.magnitude();
    let dec = segment(&mag, 0.05 * mag.max_value(), 0.05)?;
    if dec.components.len() != 2 {
        return Err(Error::numerical(
            "expected two components in the demo field",
            dec.components.len() as f64,
        ));
    }
    let alphas = vec![0.0, std::f64::consts::PI];
    let g = scramble_phases(&v, &dec, &alphas)?;
    let report = align_decomposition(&v, &g, &dec)?;
    let min_norm = dec
        .components
        .iter()
        .map(|c| lp_norm(&v, &c.domain, 2.0).unwrap_or(0.0))
        .fold(f64::INFINITY, f64::min);

    tfg::save_complex(out_dir.join("F.tfg"), &v)?;
    tfg::save_complex(out_dir.join("G.tfg"), &g)?;
    write_decomposition(&out_dir.join("decomposition"), &dec)?;
    super::write_json(&out_dir.join("alignment.json"), &report)?;
    let numbers = InstabilityNumbers {
        components: dec.components.len(),
        scramble_alphas: alphas,
        measurement_residual: report.measurement_residual,
        component_residual_sum: report.component_residual_sum,
        global_residual: report.global_residual,
        min_component_norm: min_norm,
        ratio: report.ratio,
    };
    super::write_json(&out_dir.join("numbers.json"), &numbers)?;

    let mut md = String::new();
    writeln!(md, "# Instability pair\n").ok();
    writeln!(
        md,
        "G multiplies the two components of F by phases {:?}; the measured \
         magnitudes agree exactly while no single phase aligns the pair.\n",
        numbers.scramble_alphas
    )
    .ok();
    writeln!(md, "| quantity | value |").ok();
    writeln!(md, "|---|---|").ok();
    writeln!(md, "| measurement residual (W^{{1,2}} on cores) | {:.3e} |", numbers.measurement_residual).ok();
    writeln!(md, "| component-wise residual sum | {:.3e} |", numbers.component_residual_sum).ok();
    writeln!(md, "| best common-phase residual | {:.3e} |", numbers.global_residual).ok();
    writeln!(md, "| smallest component norm | {:.3e} |", numbers.min_component_norm).ok();
    writeln!(md, "| common-phase / component-wise ratio | {:.3e} |", numbers.ratio).ok();
    std::fs::write(out_dir.join("README.md"), md)?;
    Ok(())
}

#[derive(Serialize)]
struct Figure2Row {
    seed: u64,
    converged: bool,
    measurement_residual_rel: f64,
    mean_phase_a: f64,
    circular_std_a: f64,
    mean_phase_b: f64,
    circular_std_b: f64,
    phase_gap: f64,
    time_residual_rel: f64,
    global_residual_rel: f64,
    component_residual_sum_rel: f64,
}

fn figure2(out_dir: &Path, seed0: u64, runs: u64, iters: usize) -> Result<()> {
    let f = two_burst_signal();
    let lattice = two_burst_lattice();
    let v = gabor_forward_on(&f, &lattice)?;
    let dec = atoll_core::retrieval::two_burst_decomposition(&v)?;
    let mag = v.magnitude();
    let norm = lp_norm(&v, &atoll_core::grid::DomainMask::full(lattice), 2.0)?;

    let mut rows = Vec::new();
    let mut csv = String::from(
        "seed,converged,measurement_residual_rel,mean_phase_a,circular_std_a,mean_phase_b,circular_std_b,phase_gap,time_residual_rel,global_residual_rel,component_residual_sum_rel\n",
    );
    for k in 0..runs {
        let seed = seed0 + k;
        let result = retrieve(&mag, iters, seed, Some(&f))?;
        let stats = diagnose_phases(&v, &result.f_grid, &dec, 1e-2)?;
        let report = align_decomposition(&v, &result.f_grid, &dec)?;
        let gap = {
            let mut d = (stats[0].mean_phase - stats[1].mean_phase).abs();
            if d > std::f64::consts::PI {
                d = 2.0 * std::f64::consts::PI - d;
            }
            d
        };
        let row = Figure2Row {
            seed,
            converged: result.measurement_residual_rel < 1e-3,
            measurement_residual_rel: result.measurement_residual_rel,
            mean_phase_a: stats[0].mean_phase,
            circular_std_a: stats[0].circular_std,
            mean_phase_b: stats[1].mean_phase,
            circular_std_b: stats[1].circular_std,
            phase_gap: gap,
            time_residual_rel: result.time_residual_rel.unwrap_or(f64::NAN),
            global_residual_rel: report.global_residual / norm,
            component_residual_sum_rel: report.component_residual_sum / norm,
        };
        writeln!(
            csv,
            "{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
            row.seed,
            row.converged,
            row.measurement_residual_rel,
            row.mean_phase_a,
            row.circular_std_a,
            row.mean_phase_b,
            row.circular_std_b,
            row.phase_gap,
            row.time_residual_rel,
            row.global_residual_rel,
            row.component_residual_sum_rel
        )
        .ok();
        rows.push(row);
    }
    std::fs::write(out_dir.join("phases.csv"), &csv)?;
    super::write_json(&out_dir.join("runs.json"), &rows)?;

    let converged = rows.iter().filter(|r| r.converged).count();
    let coherent = rows
        .iter()
        .filter(|r| r.converged && r.circular_std_a < 0.1 && r.circular_std_b < 0.1)
        .count();
    let mut md = String::new();
    writeln!(md, "# Retrieval phase diagnosis\n").ok();
    writeln!(
        md,
        "{} runs, {} converged (measurement residual < 1e-3), {} with \
         per-component circular std < 0.1 rad.\n",
        rows.len(),
        converged,
        coherent
    )
    .ok();
    writeln!(
        md,
        "Each converged run recovers both components up to constant phases \
         that differ between the components (column `phase_gap`), so the \
         time-domain error stays large while the component-wise error is \
         tiny. Full table in `phases.csv`.",
    )
    .ok();
    std::fs::write(out_dir.join("README.md"), md)?;
    Ok(())
}

fn audio_demo(out_dir: &Path) -> Result<()> {
    // one transform-time unit = 1/48 s: 0.5 s clip, carriers 144 / 216 Hz
    let time_scale = 48.0;
    let clip = audio::two_burst_clip(8000, time_scale);
    audio::write_wav(out_dir.join("input.wav"), &clip)?;

    let fa = atoll_core::transforms::analytic_part(&clip.to_signal(time_scale)?);
    let lattice = audio::two_burst_clip_lattice()?;
    let v = gabor_forward_on(&fa, &lattice)?;
    let mag = v.magnitude();
    let dec = segment(&mag, 0.005 * mag.max_value(), 0.05)?;
    write_decomposition(&out_dir.join("decomposition"), &dec)?;
    if dec.components.len() != 2 {
        return Err(Error::numerical(
            "expected two components in the demo clip",
            dec.components.len() as f64,
        ));
    }
    let alphas = vec![0.0, std::f64::consts::FRAC_PI_2];
    let (shifted, report) = audio::phase_shift_components(&clip, &dec, &alphas, time_scale)?;
    audio::write_wav(out_dir.join("shifted.wav"), &shifted)?;
    super::write_json(&out_dir.join("shift_report.json"), &report)?;

    let mut md = String::new();
    writeln!(md, "# Component phase shift\n").ok();
    writeln!(
        md,
        "`shifted.wav` rotates the second burst of `input.wav` by pi/2 in \
         the time-frequency plane. The two files sound the same; their \
         waveforms do not match.\n"
    )
    .ok();
    writeln!(md, "| quantity | value |").ok();
    writeln!(md, "|---|---|").ok();
    writeln!(md, "| spectrogram magnitude residual | {:.3e} |", report.magnitude_residual_rel).ok();
    writeln!(md, "| waveform distance (relative L2) | {:.3e} |", report.waveform_distance_rel).ok();
    writeln!(md, "| energy ratio | {:.6} |", report.energy_ratio).ok();
    std::fs::write(out_dir.join("README.md"), md)?;
    Ok(())
}
