//! Evaluation of every constant entering a stability certificate, and the
//! certificate assembly itself.
//!
//! A certificate for one atoll component bounds the phase-alignment error
//! by the measured magnitude error:
//!
//! ```text
//! inf_a ||F1 - e^{ia} F2||_{L^p(D)}
//!     <= c * (Ca + Cs + sum_i Cb_i * var_i * Ct * (Ca + Cs))
//!        * (Delta/delta)^2 * || |F1|-|F2| ||_{W^{1,p}(D+)}
//! ```
//!
//! with `Ca` the analytic Poincaré constant at the sampling point, `Cs`
//! the realized sampling constant, and per lagoon the boundary constant
//! `Cb`, normalizer variation `var`, and trace constant `Ct`. Every
//! constant is evaluated numerically (eigensolve), by a closed-form bound,
//! or exactly, and tagged with its provenance.

pub(crate) mod calibrate;
pub(crate) mod eigen;
pub mod table;

pub use calibrate::{calibrate, poincare_reference, trace_reference};
pub use eigen::{neumann_lambda2, steklov_mu_max};

use crate::analytic::Normalizer;
use crate::atoll::{fit_lagoon_disc, AtollComponent};
use crate::error::{Error, Result};
use crate::grid::{distance_transform, lp_norm, DomainMask, Lattice, ParamDomain, RealGrid};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// How a constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Exact evaluation of a closed-form expression.
    ClosedForm,
    /// Iterative eigensolve on the raster mask.
    Eigensolve,
    /// Closed-form upper bound (not sharp).
    Bound,
}

#[derive(Debug, Clone, Copy)]
pub enum PoincareMethod {
    ClosedForm,
    Eigensolve,
}

fn rasterize_for_eigensolve(domain: &ParamDomain) -> Result<DomainMask> {
    match domain {
        ParamDomain::Raster(mask) => Ok(mask.clone()),
        ParamDomain::Disc { center, radius } => {
            let h = radius / 60.0;
            let (cx, cy) = *center;
            let l = Lattice::from_ranges(
                cx - radius - 4.0 * h,
                cx + radius + 4.0 * h,
                h,
                cy - radius - 4.0 * h,
                cy + radius + 4.0 * h,
                h,
            )?;
            Ok(domain.rasterize(&l))
        }
        ParamDomain::Annulus { center, outer, .. } => {
            let h = outer / 60.0;
            let (cx, cy) = *center;
            let l = Lattice::from_ranges(
                cx - outer - 4.0 * h,
                cx + outer + 4.0 * h,
                h,
                cy - outer - 4.0 * h,
                cy + outer + 4.0 * h,
                h,
            )?;
            Ok(domain.rasterize(&l))
        }
    }
}

/// Classical Poincaré constant of the domain (p = 2).
///
/// Closed form: `diam/pi` for discs (convex), the calibrated `c * s` for
/// annuli. Eigensolve: `1/sqrt(lambda_2)` of the Neumann Laplacian on the
/// raster. Raster domains always eigensolve.
pub fn poincare_constant(domain: &ParamDomain, method: PoincareMethod) -> Result<(f64, Provenance)> {
    match (method, domain) {
        (PoincareMethod::ClosedForm, ParamDomain::Disc { radius, .. }) => {
            Ok((2.0 * radius / PI, Provenance::Bound))
        }
        (PoincareMethod::ClosedForm, ParamDomain::Annulus { outer, .. }) => {
            Ok((table::ANNULUS_POINCARE_C * outer, Provenance::Bound))
        }
        _ => {
            let mask = rasterize_for_eigensolve(domain)?;
            let lambda = neumann_lambda2(&mask)?;
            Ok((1.0 / lambda.sqrt(), Provenance::Eigensolve))
        }
    }
}

/// Analytic Poincaré bound at a base point:
/// `C_poinc * (1 + (|D| / (pi dist(z0, bd D)^2))^{1/p})`.
pub fn analytic_poincare_bound(c_poinc: f64, area: f64, dist_z0: f64, p: f64) -> Result<f64> {
    if !(c_poinc > 0.0 && area > 0.0 && dist_z0 > 0.0 && p >= 1.0) {
        return Err(Error::domain("analytic Poincaré bound needs positive inputs"));
    }
    Ok(c_poinc * (1.0 + (area / (PI * dist_z0 * dist_z0)).powf(1.0 / p)))
}

/// Trace constant bound of the domain (p = 2):
/// `rho(r/s) * (s^{1/2} + s^{-1/2})` from the calibrated reference table,
/// or a direct eigensolve on raster domains. Annuli with `r/s > 0.95` are
/// outside the calibrated range (the reference constant blows up as the
/// annulus degenerates).
pub fn trace_constant(domain: &ParamDomain) -> Result<(f64, Provenance)> {
    match domain {
        ParamDomain::Disc { radius, .. } => {
            let rho = table::rho(0.0).expect("tau = 0 is tabulated");
            Ok((
                rho * (radius.sqrt() + 1.0 / radius.sqrt()),
                Provenance::Bound,
            ))
        }
        ParamDomain::Annulus { inner, outer, .. } => {
            let tau = inner / outer;
            let rho = table::rho(tau).ok_or_else(|| {
                Error::domain(format!(
                    "thin-annulus regime out of calibrated range: r/s = {tau:.3} > {}",
                    table::RHO_TAU_MAX
                ))
            })?;
            Ok((
                rho * (outer.sqrt() + 1.0 / outer.sqrt()),
                Provenance::Bound,
            ))
        }
        ParamDomain::Raster(mask) => {
            Ok((steklov_mu_max(mask)?.sqrt(), Provenance::Eigensolve))
        }
    }
}

/// Boundary-domination constant of a lagoon: `r^{1/p}` for a disc of
/// radius `r`; raster lagoons use their minimal enclosing disc, annuli
/// their outer radius (both conservative).
pub fn boundary_constant(domain: &ParamDomain, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::domain("p must be >= 1"));
    }
    let r = match domain {
        ParamDomain::Disc { radius, .. } => *radius,
        ParamDomain::Annulus { outer, .. } => *outer,
        ParamDomain::Raster(mask) => crate::atoll::enclosing_circle(mask).1,
    };
    Ok(r.powf(1.0 / p))
}

/// Variation of a normalizer over a lagoon:
/// `max_{boundary} |eta| / min_{lagoon} |eta|`.
///
/// Closed forms on disc lagoons; raster lagoons are scanned directly.
pub fn normalizer_variation(eta: &Normalizer, lagoon: &ParamDomain) -> Result<f64> {
    match (eta, lagoon) {
        (Normalizer::None, _) => Ok(1.0),
        (Normalizer::Gabor { base }, ParamDomain::Disc { center, radius }) => {
            let d = (Complex64::new(center.0, center.1) - base).norm();
            let r = *radius;
            let far = d + r;
            let near = (d - r).max(0.0);
            Ok((PI * (far * far - near * near) / 2.0).exp())
        }
        (Normalizer::Cauchy { order }, ParamDomain::Disc { center, radius }) => {
            let y = center.1;
            let r = *radius;
            if y - r <= 0.0 {
                return Err(Error::domain("Cauchy lagoon touches y = 0"));
            }
            Ok(((y + r) / (y - r)).powf(*order as f64 + 0.5))
        }
        (_, ParamDomain::Raster(mask)) => {
            if mask.is_empty() {
                return Err(Error::domain("empty lagoon"));
            }
            let l = mask.lattice();
            let mut max_b = f64::NEG_INFINITY;
            let mut min_d = f64::INFINITY;
            for k in mask.true_cells() {
                let (i, j) = l.ij(k);
                let z = l.z(i, j);
                if matches!(eta, Normalizer::Cauchy { .. }) && z.im <= 0.0 {
                    return Err(Error::domain("Cauchy lagoon touches y = 0"));
                }
                let m = eta.magnitude(z);
                min_d = min_d.min(m);
                if mask.is_boundary(i, j) {
                    max_b = max_b.max(m);
                }
            }
            if min_d <= 0.0 || max_b == f64::NEG_INFINITY {
                return Err(Error::domain("degenerate lagoon for normalizer variation"));
            }
            Ok(max_b / min_d)
        }
        (_, ParamDomain::Annulus { .. }) => Err(Error::domain(
            "lagoons are simply connected; annulus is not a valid lagoon shape",
        )),
    }
}

/// Sampling point and realized sampling constant.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BasePoint {
    pub z0: (f64, f64),
    pub c_samp: f64,
    /// Distance from `z0` to the domain boundary.
    pub depth: f64,
}

/// Pick the sampling point: among cells where
/// `|G(z)| |D|^{1/p} <= (1-t)^{-1/p} ||G||_p`, take the one deepest inside
/// the domain. The realized constant `|G(z0)| |D|^{1/p} / ||G||_p` never
/// exceeds `(1-t)^{-1/p}` and the depth is at least the `t`-quantile of
/// the domain's boundary distance. A zero difference field selects the
/// deepest cell with constant 0.
pub fn select_base_point(g: &RealGrid, mask: &DomainMask, t: f64, p: f64) -> Result<BasePoint> {
    g.lattice().check_same(mask.lattice())?;
    if mask.is_empty() {
        return Err(Error::domain("base point selection on an empty mask"));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::domain("t must lie in (0,1)"));
    }
    if !(p >= 1.0) {
        return Err(Error::domain("p must be >= 1"));
    }
    let l = g.lattice();
    let depth = distance_transform(mask)?;
    let norm = lp_norm(g, mask, p)?;
    let cells = mask.true_cells();
    let pick_deepest = |candidates: &[usize]| -> usize {
        let mut best = candidates[0];
        for &k in candidates {
            if depth.values()[k] > depth.values()[best] {
                best = k;
            }
        }
        best
    };
    let (k0, c_samp) = if norm == 0.0 {
        (pick_deepest(&cells), 0.0)
    } else {
        let area_pow = mask.area().powf(1.0 / p);
        let cap = (1.0 - t).powf(-1.0 / p) * norm;
        let candidates: Vec<usize> = cells
            .iter()
            .copied()
            .filter(|&k| g.values()[k].abs() * area_pow <= cap)
            .collect();
        let k0 = if candidates.is_empty() {
            // cannot happen for exact arithmetic; fall back to the
            // smallest |G| over the mask
            let mut best = cells[0];
            for &k in &cells {
                if g.values()[k].abs() < g.values()[best].abs() {
                    best = k;
                }
            }
            best
        } else {
            pick_deepest(&candidates)
        };
        (k0, g.values()[k0].abs() * mask.area().powf(1.0 / p) / norm)
    };
    let (i, j) = l.ij(k0);
    Ok(BasePoint {
        z0: (l.x(i), l.y(j)),
        c_samp,
        depth: depth.values()[k0],
    })
}

/// Provenance tags for each certificate constant.
#[derive(Debug, Clone, Serialize)]
pub struct ProvenanceTags {
    pub c_samp: Provenance,
    pub c_poinc_classical: Provenance,
    pub c_poinc_analytic: Provenance,
    pub c_trace: Provenance,
    pub c_bound: Provenance,
    pub var_eta: Provenance,
}

/// Fully evaluated stability certificate for one component.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityCertificate {
    pub component_id: usize,
    pub p: f64,
    pub t: f64,
    pub z0: (f64, f64),
    pub c_samp: f64,
    pub c_poinc_classical: f64,
    pub c_poinc_analytic: f64,
    pub c_trace: f64,
    /// Boundary constant per lagoon.
    pub c_bound: Vec<f64>,
    /// Normalizer variation per lagoon.
    pub var_eta: Vec<f64>,
    /// The uniform multiplier carried symbolically (default 1).
    pub c_uniform: f64,
    /// `c_uniform * (Ca + Cs + sum_i Cb_i var_i Ct (Ca + Cs))`.
    pub c_total: f64,
    pub delta: f64,
    #[serde(rename = "Delta")]
    pub delta_cap: f64,
    /// `c_total * (Delta/delta)^2`: multiplies the measured magnitude
    /// error in `W^{1,p}` on the core to bound the alignment error.
    pub bound_value: f64,
    pub provenance: ProvenanceTags,
    pub calibration_version: String,
}

/// Shape used for the core (`D_+`) constants.
fn core_shape(component: &AtollComponent) -> ParamDomain {
    match (&component.fit, component.lagoons.len()) {
        (ParamDomain::Disc { center, radius }, 0) => ParamDomain::Disc {
            center: *center,
            radius: *radius,
        },
        (ParamDomain::Annulus { center, inner, outer }, 1) => ParamDomain::Annulus {
            center: *center,
            inner: *inner,
            outer: *outer,
        },
        _ => ParamDomain::Raster(component.core.clone()),
    }
}

/// Evaluate every constant for a component and combine them into the
/// certificate. `g` is the magnitude-difference field used for the
/// sampling point (pass a zero grid for an a-priori certificate); the
/// normalizer must match the measurement family the component came from.
pub fn assemble_certificate(
    component: &AtollComponent,
    eta: &Normalizer,
    g: &RealGrid,
    p: f64,
    t: f64,
    c_uniform: f64,
) -> Result<StabilityCertificate> {
    component.validate()?;
    if !(c_uniform > 0.0) {
        return Err(Error::domain("c_uniform must be positive"));
    }
    let base = select_base_point(g, &component.core, t, p)?;
    if base.depth <= 0.0 {
        return Err(Error::numerical(
            "sampling point landed on the boundary; core too thin for a certificate",
            base.depth,
        ));
    }
    let shape = core_shape(component);
    let (c_poinc, prov_poinc) = poincare_constant(&shape, PoincareMethod::ClosedForm)?;
    let c_poinc_analytic =
        analytic_poincare_bound(c_poinc, component.core.area(), base.depth, p)?;
    let (c_trace, prov_trace) = trace_constant(&shape)?;

    let mut c_bound = Vec::with_capacity(component.lagoons.len());
    let mut var_eta = Vec::with_capacity(component.lagoons.len());
    for lagoon in &component.lagoons {
        let fit = fit_lagoon_disc(lagoon);
        c_bound.push(boundary_constant(&fit, p)?);
        var_eta.push(normalizer_variation(eta, &fit)?);
    }

    let a = c_poinc_analytic + base.c_samp;
    let lagoon_sum: f64 = c_bound
        .iter()
        .zip(&var_eta)
        .map(|(&cb, &v)| cb * v * c_trace * a)
        .sum();
    let c_total = c_uniform * (a + lagoon_sum);
    let ratio = component.upper / component.lower;
    Ok(StabilityCertificate {
        component_id: 0,
        p,
        t,
        z0: base.z0,
        c_samp: base.c_samp,
        c_poinc_classical: c_poinc,
        c_poinc_analytic,
        c_trace,
        c_bound,
        var_eta,
        c_uniform,
        c_total,
        delta: component.lower,
        delta_cap: component.upper,
        bound_value: c_total * ratio * ratio,
        provenance: ProvenanceTags {
            c_samp: Provenance::ClosedForm,
            c_poinc_classical: prov_poinc,
            c_poinc_analytic: Provenance::Bound,
            c_trace: prov_trace,
            c_bound: Provenance::Bound,
            var_eta: Provenance::ClosedForm,
        },
        calibration_version: table::CALIBRATION_VERSION.to_string(),
    })
}

/// Hyperbolic area of a disc `B_r(x + iy)` in the upper half-plane,
/// `int_B dx dy / y^2 = 2 pi (1/sqrt(1 - r^2/y^2) - 1)`.
pub fn hyperbolic_area(disc: &ParamDomain) -> Result<f64> {
    let ParamDomain::Disc { center, radius } = disc else {
        return Err(Error::domain("hyperbolic area defined for discs"));
    };
    let y = center.1;
    let r = *radius;
    if y <= *radius {
        return Err(Error::domain("disc must lie strictly inside the upper half-plane"));
    }
    Ok(2.0 * PI * (1.0 / (1.0 - r * r / (y * y)).sqrt() - 1.0))
}

/// Midpoint polar quadrature of the same integral, for validation.
/// `n` is the total number of sample points.
pub fn hyperbolic_area_quadrature(disc: &ParamDomain, n: usize) -> Result<f64> {
    let ParamDomain::Disc { center, radius } = disc else {
        return Err(Error::domain("hyperbolic area defined for discs"));
    };
    let y0 = center.1;
    let r = *radius;
    if y0 <= r {
        return Err(Error::domain("disc must lie strictly inside the upper half-plane"));
    }
    let m = (n as f64).sqrt().ceil() as usize;
    let dr = r / m as f64;
    let dphi = 2.0 * PI / m as f64;
    let total = crate::exec::sum_f64(m, |ki| {
        let rho = (ki as f64 + 0.5) * dr;
        let mut acc = 0.0;
        for kj in 0..m {
            let phi = (kj as f64 + 0.5) * dphi;
            let y = y0 + rho * phi.sin();
            acc += rho / (y * y);
        }
        acc
    });
    Ok(total * dr * dphi)
}
