//! Calibration of the reference-annulus table.
//!
//! The trace and Poincaré reference constants on `B_{tau,1}` are not
//! available in closed form; they are computed once by eigensolves on
//! rasterized reference annuli and shipped as the versioned table in
//! [`super::table`]. The ignored test at the bottom is the calibration
//! script: it prints a Rust block ready to paste into `table.rs`.

use super::eigen::{neumann_lambda2, steklov_mu_max};
use crate::error::Result;
use crate::grid::{Lattice, ParamDomain};
use num_complex::Complex64;

fn reference_mask(tau: f64, h: f64) -> Result<crate::grid::DomainMask> {
    let ext = 1.0 + 6.0 * h;
    let l = Lattice::from_ranges(-ext, ext, h, -ext, ext, h)?;
    let dom = if tau <= 0.0 {
        ParamDomain::disc(Complex64::new(0.0, 0.0), 1.0)?
    } else {
        ParamDomain::annulus(Complex64::new(0.0, 0.0), tau, 1.0)?
    };
    Ok(dom.rasterize(&l))
}

/// Trace constant of the reference annulus `B_{tau,1}` (additive Sobolev
/// norm) estimated at raster resolution `h`.
pub fn trace_reference(tau: f64, h: f64) -> Result<f64> {
    Ok(steklov_mu_max(&reference_mask(tau, h)?)?.sqrt())
}

/// Poincaré constant of the reference annulus `B_{tau,1}` at resolution `h`.
pub fn poincare_reference(tau: f64, h: f64) -> Result<f64> {
    Ok(1.0 / neumann_lambda2(&reference_mask(tau, h)?)?.sqrt())
}

/// Recompute the full table at resolution `h` with a safety factor.
pub fn calibrate(h: f64, safety: f64) -> Result<(Vec<f64>, f64)> {
    let mut rho = Vec::new();
    let mut poinc_max: f64 = 0.0;
    let mut tau = 0.0;
    while tau <= super::table::RHO_TAU_MAX + 1e-9 {
        rho.push(trace_reference(tau, h)? * safety);
        poinc_max = poinc_max.max(poincare_reference(tau, h)?);
        tau += super::table::RHO_TAU_STEP;
    }
    Ok((rho, poinc_max * safety))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Calibration script. Run with
    /// `cargo test -p atoll-core --release -- --ignored regenerate_calibration_table --nocapture`
    /// and paste the output into `table.rs`.
    #[test]
    #[ignore]
    fn regenerate_calibration_table() {
        let h = 0.01;
        let safety = 1.03;
        let (rho, c) = calibrate(h, safety).unwrap();
        println!("pub const CALIBRATION_VERSION: &str = \"steklov-h{h}-s{safety}\";");
        println!("pub const RHO_TABLE: [f64; {}] = [", rho.len());
        for chunk in rho.chunks(5) {
            let row: Vec<String> = chunk.iter().map(|v| format!("{v:.6}")).collect();
            println!("    {},", row.join(", "));
        }
        println!("];");
        println!("pub const ANNULUS_POINCARE_C: f64 = {c:.6};");
    }

    #[test]
    fn reference_values_are_sane_at_coarse_resolution() {
        // disc reference: Poincaré about 0.543, trace above the constant
        // witness sqrt(2)
        let p = poincare_reference(0.0, 0.05).unwrap();
        assert!((p - 0.5431).abs() < 0.02, "poincare {p}");
        let t = trace_reference(0.0, 0.05).unwrap();
        assert!(t >= 2f64.sqrt() * 0.97 && t < 2.5, "trace {t}");
    }
}
