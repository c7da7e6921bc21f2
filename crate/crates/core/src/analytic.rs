//! Holomorphic normalizers and holomorphy diagnostics.
//!
//! A Gabor magnitude field becomes holomorphic after the y-axis flip
//! `F(z) = V f(x,-y)` and multiplication by the Bargmann-type weight
//! `eta_{z0}(z) = exp(pi(|z-z0|^2/2 - i (x+x0)(y-y0)))`; a Cauchy wavelet
//! field on the upper half-plane becomes holomorphic after multiplication
//! by `|1/y|^{s+1/2}`. This module applies those weights and measures how
//! holomorphic a grid actually is: the Cauchy-Riemann residual, and the
//! defect in the identity `|G'| = |grad |G||` that underpins the stability
//! certificates.

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{gradient, gradient_real, RealGrid, TFGrid};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Pointwise weight making a measurement grid holomorphic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalizer {
    /// Identity (already-holomorphic fields).
    None,
    /// Bargmann-type weight for y-flipped Gabor grids, anchored at `base`.
    Gabor { base: Complex64 },
    /// `|1/y|^{s+1/2}` for Cauchy wavelet grids on `y > 0`.
    Cauchy { order: u32 },
}

impl Normalizer {
    /// Weight value at `z`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match *self {
            Normalizer::None => Complex64::new(1.0, 0.0),
            Normalizer::Gabor { base } => {
                let d = z - base;
                let re = PI * d.norm_sqr() / 2.0;
                let im = -PI * (z.re + base.re) * (z.im - base.im);
                Complex64::from_polar(re.exp(), im)
            }
            Normalizer::Cauchy { order } => {
                Complex64::new((1.0 / z.im).abs().powf(order as f64 + 0.5), 0.0)
            }
        }
    }

    /// `|eval(z)|`, cheaper and total where the modulus is all that matters.
    pub fn magnitude(&self, z: Complex64) -> f64 {
        match *self {
            Normalizer::None => 1.0,
            Normalizer::Gabor { base } => (PI * (z - base).norm_sqr() / 2.0).exp(),
            Normalizer::Cauchy { order } => (1.0 / z.im).abs().powf(order as f64 + 0.5),
        }
    }
}

/// Reflect a grid across the x-axis: output cell `(x, y)` holds the input
/// value at `(x, -y)`. The output lattice spans the negated y-range.
/// Applying this to a Gabor transform yields the field the Gabor
/// normalizer expects.
pub fn flip_y(g: &TFGrid) -> TFGrid {
    let l = g.lattice();
    let flipped = crate::grid::Lattice::new(
        l.origin_x,
        -l.y_max(),
        l.dx,
        l.dy,
        l.nx,
        l.ny,
    )
    .expect("flipped lattice is valid when the input lattice is");
    let nx = l.nx;
    let ny = l.ny;
    let values = exec::map_vec(l.len(), |k| {
        let (i, j) = flipped.ij(k);
        g.values()[(ny - 1 - j) * nx + i]
    });
    TFGrid::new(flipped, values).expect("finite values stay finite")
}

/// Pointwise product `eta(z) * F(z)`.
///
/// For the Gabor variant the input must already be y-flipped; for the
/// Cauchy variant the lattice must stay strictly above `y = 0`.
pub fn normalize(f: &TFGrid, eta: &Normalizer) -> Result<TFGrid> {
    if let Normalizer::Cauchy { .. } = eta {
        if f.lattice().origin_y <= 0.0 {
            return Err(Error::domain(
                "Cauchy normalizer undefined on grids touching y <= 0",
            ));
        }
    }
    let l = *f.lattice();
    f.map(|k, v| {
        let (i, j) = l.ij(k);
        eta.eval(l.z(i, j)) * v
    })
}

/// Dimensionless holomorphy defect: the maximum over interior cells of
/// `sqrt((u_x - v_y)^2 + (u_y + v_x)^2)` (twice the Wirtinger derivative
/// with respect to `conj(z)`, via central differences), normalized by the
/// maximum gradient magnitude. The Euclidean combination makes the
/// residual invariant under a global phase on `G`. Zero for holomorphic
/// fields up to discretization; order one for anti-holomorphic ones.
pub fn cr_residual(g: &TFGrid) -> Result<f64> {
    let (gx, gy) = gradient(g)?;
    let l = g.lattice();
    let n = l.len();
    let interior = |k: usize| {
        let (i, j) = l.ij(k);
        i > 0 && j > 0 && i + 1 < l.nx && j + 1 < l.ny
    };
    let defect = exec::max_f64(n, |k| {
        if !interior(k) {
            return f64::NEG_INFINITY;
        }
        let ux = gx.values()[k].re;
        let vx = gx.values()[k].im;
        let uy = gy.values()[k].re;
        let vy = gy.values()[k].im;
        (ux - vy).hypot(uy + vx)
    });
    let scale = exec::max_f64(n, |k| {
        if !interior(k) {
            return f64::NEG_INFINITY;
        }
        (gx.values()[k].norm_sqr() + gy.values()[k].norm_sqr()).sqrt()
    });
    if scale <= 0.0 || scale == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok(defect / scale)
}

/// Defect in the identity `|G'| = |grad |G||` for holomorphic `G`:
/// the maximum over interior cells with `|G| >= floor * max|G|` of
/// `||G'| - |grad |G|||`, normalized by `max |G'|`. `G'` is computed as
/// `u_x + i v_x`. The floor excludes neighborhoods of zeros of `G`, where
/// the modulus has a cone singularity and the finite differences of `|G|`
/// are meaningless.
pub fn holomorphic_modulus_defect(g: &TFGrid, floor: f64) -> Result<f64> {
    if !(floor >= 0.0) {
        return Err(Error::domain("floor must be nonnegative"));
    }
    let (gx, _gy) = gradient(g)?;
    let mag = g.magnitude();
    let (mx, my) = gradient_real(&mag)?;
    let l = g.lattice();
    let n = l.len();
    let gmax = mag.max_value();
    let cut = floor * gmax;
    let interior = |k: usize| {
        let (i, j) = l.ij(k);
        i > 0 && j > 0 && i + 1 < l.nx && j + 1 < l.ny
    };
    let sel = |k: usize| interior(k) && mag.values()[k] >= cut;
    let any = (0..n).any(sel);
    if !any {
        return Err(Error::domain("no cells above the floor"));
    }
    let defect = exec::max_f64(n, |k| {
        if !sel(k) {
            return f64::NEG_INFINITY;
        }
        let deriv = gx.values()[k].norm();
        let grad = mx.values()[k].hypot(my.values()[k]);
        (deriv - grad).abs()
    });
    let scale = exec::max_f64(n, |k| {
        if !sel(k) {
            return f64::NEG_INFINITY;
        }
        gx.values()[k].norm()
    });
    if scale <= 0.0 {
        return Ok(0.0);
    }
    Ok(defect / scale)
}

/// `arg(a/b)` per cell where both magnitudes are above a floor; used for
/// phase-difference maps.
pub fn phase_difference(a: &TFGrid, b: &TFGrid, floor: f64) -> Result<RealGrid> {
    a.lattice().check_same(b.lattice())?;
    let amax = exec::max_f64(a.values().len(), |k| a.values()[k].norm());
    let cut = floor * amax;
    let vals = exec::map_vec(a.values().len(), |k| {
        let va = a.values()[k];
        let vb = b.values()[k];
        if va.norm() >= cut && vb.norm() > 0.0 {
            (va * vb.conj()).arg()
        } else {
            0.0
        }
    });
    RealGrid::new(*a.lattice(), vals)
}
