//! Calibrated reference constants on the unit-outer-radius annulus.
//!
//! `RHO_TABLE[k]` is a numerically calibrated upper estimate of the trace
//! constant of the reference annulus with inner radius `tau = k * 0.05`
//! and outer radius 1, in additive Sobolev norm; a general annulus is
//! bounded by `rho(r/s) * (s^{1/2} + s^{-1/2})` through exact scaling.
//! `ANNULUS_POINCARE_C` dominates the Poincaré constant of every
//! reference annulus, so `C_poinc(2, B_{r,s}) <= c * s`.
//!
//! The table is produced by the calibration routines in
//! [`super::calibrate`]; run
//! `cargo test -p atoll-core --release -- --ignored regenerate_calibration_table --nocapture`
//! and paste the printed block here. Values carry a 3% safety factor on
//! top of the raster eigensolves (resolution h = 0.01).
//!
pub const CALIBRATION_VERSION: &str = "steklov-h0.01-s1.03";

pub const RHO_TAU_STEP: f64 = 0.05;
pub const RHO_TAU_MAX: f64 = 0.95;

/// Trace reference values at `tau = 0.00, 0.05, ..., 0.95`.
pub const RHO_TABLE: [f64; 20] = [
    1.544062, 1.568536, 1.602065, 1.639662, 1.681690,
    1.729210, 1.782331, 1.843950, 1.913125, 1.993093,
    2.084409, 2.191472, 2.321326, 2.478204, 2.672913,
    2.926823, 3.265961, 3.774790, 4.620657, 6.530699,
];

/// Uniform constant in `C_poinc(2, B_{r,s}) <= c * s`.
pub const ANNULUS_POINCARE_C: f64 = 1.065571;

/// Linear interpolation of the trace reference at `tau in [0, RHO_TAU_MAX]`.
pub fn rho(tau: f64) -> Option<f64> {
    if !(0.0..=RHO_TAU_MAX).contains(&tau) {
        return None;
    }
    let pos = tau / RHO_TAU_STEP;
    let k = pos.floor() as usize;
    if k + 1 >= RHO_TABLE.len() {
        return Some(RHO_TABLE[RHO_TABLE.len() - 1]);
    }
    let frac = pos - k as f64;
    Some(RHO_TABLE[k] * (1.0 - frac) + RHO_TABLE[k + 1] * frac)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_rejects_thin_annuli() {
        assert!(rho(0.96).is_none());
        assert!(rho(-0.1).is_none());
        assert!(rho(0.0).is_some());
        assert!(rho(0.95).is_some());
    }

    #[test]
    fn rho_is_monotone_enough() {
        // the reference constant must not decrease toward thin annuli
        let mut prev = 0.0;
        let mut tau = 0.0;
        while tau <= 0.95 {
            let v = rho(tau).unwrap();
            assert!(v >= prev - 1e-9, "rho({tau}) = {v} < {prev}");
            prev = v;
            tau += 0.05;
        }
    }
}
