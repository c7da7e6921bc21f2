//! Discrete norms and derivatives: Riemann-sum `L^p` norms over masks,
//! second-order gradients, Sobolev `W^{1,p}` norms and boundary integrals.

use super::{DomainMask, Lattice, RealGrid, TFGrid};
use crate::error::{Error, Result};
use crate::exec;
use num_complex::Complex64;

/// Anything with a pointwise magnitude on a lattice.
pub trait Field: Sync {
    fn lattice(&self) -> &Lattice;
    fn abs_at(&self, k: usize) -> f64;
}

impl Field for TFGrid {
    fn lattice(&self) -> &Lattice {
        TFGrid::lattice(self)
    }
    fn abs_at(&self, k: usize) -> f64 {
        self.values()[k].norm()
    }
}

impl Field for RealGrid {
    fn lattice(&self) -> &Lattice {
        RealGrid::lattice(self)
    }
    fn abs_at(&self, k: usize) -> f64 {
        self.values()[k].abs()
    }
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 || p == f64::INFINITY {
        Ok(())
    } else {
        Err(Error::domain(format!("p must be >= 1 or infinite, got {p}")))
    }
}

/// Riemann-sum `L^p` norm of `g` over the masked cells:
/// `(sum |g|^p dx dy)^{1/p}`, or the masked max for `p = inf`.
/// An empty mask gives 0.
pub fn lp_norm<F: Field>(g: &F, mask: &DomainMask, p: f64) -> Result<f64> {
    g.lattice().check_same(mask.lattice())?;
    check_p(p)?;
    let n = g.lattice().len();
    let cells = mask.cells();
    if p == f64::INFINITY {
        let m = exec::max_f64(n, |k| if cells[k] { g.abs_at(k) } else { f64::NEG_INFINITY });
        return Ok(if m == f64::NEG_INFINITY { 0.0 } else { m });
    }
    let area = g.lattice().cell_area();
    let total = if p == 2.0 {
        exec::sum_f64(n, |k| {
            if cells[k] {
                let a = g.abs_at(k);
                a * a
            } else {
                0.0
            }
        })
    } else {
        exec::sum_f64(n, |k| if cells[k] { g.abs_at(k).powf(p) } else { 0.0 })
    };
    Ok((total * area).powf(1.0 / p))
}

fn check_diff_size(l: &Lattice) -> Result<()> {
    if l.nx < 3 || l.ny < 3 {
        Err(Error::structural("gradient needs at least a 3x3 lattice"))
    } else {
        Ok(())
    }
}

/// One row of second-order differences along x: central in the interior,
/// one-sided (three-point) at the two edges.
#[inline]
fn diff_row<T>(row: &[T], h: f64, out: &mut [T])
where
    T: Copy
        + std::ops::Sub<Output = T>
        + std::ops::Add<Output = T>
        + std::ops::Mul<f64, Output = T>,
{
    let n = row.len();
    let inv2h = 1.0 / (2.0 * h);
    out[0] = (row[1] * 4.0 - row[2] - row[0] * 3.0) * inv2h;
    for i in 1..n - 1 {
        out[i] = (row[i + 1] - row[i - 1]) * inv2h;
    }
    out[n - 1] = (row[n - 1] * 3.0 - row[n - 2] * 4.0 + row[n - 3]) * inv2h;
}

fn gradient_impl<T>(lattice: &Lattice, values: &[T]) -> (Vec<T>, Vec<T>)
where
    T: Copy
        + Send
        + Sync
        + Default
        + std::ops::Sub<Output = T>
        + std::ops::Add<Output = T>
        + std::ops::Mul<f64, Output = T>,
{
    let (nx, ny) = (lattice.nx, lattice.ny);
    let mut gx = vec![T::default(); values.len()];
    exec::for_each_chunk(&mut gx, nx, |j, out| {
        diff_row(&values[j * nx..(j + 1) * nx], lattice.dx, out);
    });
    // y derivative: run the same stencil over transposed columns
    let gy_t = exec::map_vec(nx, |i| {
        let col: Vec<T> = (0..ny).map(|j| values[j * nx + i]).collect();
        let mut out = vec![T::default(); ny];
        diff_row(&col, lattice.dy, &mut out);
        out
    });
    let mut gy = vec![T::default(); values.len()];
    for (i, col) in gy_t.iter().enumerate() {
        for (j, &v) in col.iter().enumerate() {
            gy[j * nx + i] = v;
        }
    }
    (gx, gy)
}

/// Gradient `(d/dx, d/dy)` by central differences in the interior and
/// one-sided second-order differences at the lattice edges.
pub fn gradient(g: &TFGrid) -> Result<(TFGrid, TFGrid)> {
    check_diff_size(g.lattice())?;
    let (gx, gy) = gradient_impl(g.lattice(), g.values());
    Ok((TFGrid::new(*g.lattice(), gx)?, TFGrid::new(*g.lattice(), gy)?))
}

/// Same stencils for a real field.
pub fn gradient_real(g: &RealGrid) -> Result<(RealGrid, RealGrid)> {
    check_diff_size(g.lattice())?;
    let (gx, gy) = gradient_impl(g.lattice(), g.values());
    Ok((RealGrid::new(*g.lattice(), gx)?, RealGrid::new(*g.lattice(), gy)?))
}

/// Spectral differentiation for fields that are periodic on the lattice
/// (the last sample is taken as the one before the period wraps).
pub fn gradient_spectral(g: &TFGrid) -> Result<(TFGrid, TFGrid)> {
    check_diff_size(g.lattice())?;
    let l = *g.lattice();
    let (nx, ny) = (l.nx, l.ny);
    let mut planner = rustfft::FftPlanner::new();
    let fft_x = planner.plan_fft_forward(nx);
    let ifft_x = planner.plan_fft_inverse(nx);
    let fft_y = planner.plan_fft_forward(ny);
    let ifft_y = planner.plan_fft_inverse(ny);

    let spectral_diff = |data: &mut [Complex64], n: usize, period: f64,
                         fft: &std::sync::Arc<dyn rustfft::Fft<f64>>,
                         ifft: &std::sync::Arc<dyn rustfft::Fft<f64>>| {
        fft.process(data);
        for (k, v) in data.iter_mut().enumerate() {
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            // Nyquist bin of an even-length transform has no well-defined
            // first derivative; zero it.
            let f = if n % 2 == 0 && k == n / 2 { 0.0 } else { kk };
            *v *= Complex64::new(0.0, 2.0 * std::f64::consts::PI * f / period);
        }
        ifft.process(data);
        let scale = 1.0 / n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    };

    let mut gx = g.values().to_vec();
    exec::for_each_chunk(&mut gx, nx, |_, row| {
        spectral_diff(row, nx, nx as f64 * l.dx, &fft_x, &ifft_x);
    });

    let cols = exec::map_vec(nx, |i| {
        let mut col: Vec<Complex64> = (0..ny).map(|j| g.values()[j * nx + i]).collect();
        spectral_diff(&mut col, ny, ny as f64 * l.dy, &fft_y, &ifft_y);
        col
    });
    let mut gy = vec![Complex64::default(); g.values().len()];
    for (i, col) in cols.iter().enumerate() {
        for (j, &v) in col.iter().enumerate() {
            gy[j * nx + i] = v;
        }
    }
    Ok((TFGrid::new(l, gx)?, TFGrid::new(l, gy)?))
}

/// Pointwise Euclidean norm of a gradient pair,
/// `sqrt(|gx|^2 + |gy|^2)`.
pub fn grad_magnitude(gx: &TFGrid, gy: &TFGrid) -> Result<RealGrid> {
    gx.lattice().check_same(gy.lattice())?;
    let vals = exec::map_vec(gx.values().len(), |k| {
        (gx.values()[k].norm_sqr() + gy.values()[k].norm_sqr()).sqrt()
    });
    RealGrid::new(*gx.lattice(), vals)
}

pub(crate) fn grad_magnitude_real(gx: &RealGrid, gy: &RealGrid) -> Result<RealGrid> {
    gx.lattice().check_same(gy.lattice())?;
    let vals = exec::map_vec(gx.values().len(), |k| {
        gx.values()[k].hypot(gy.values()[k])
    });
    RealGrid::new(*gx.lattice(), vals)
}

/// Sobolev norm `||g||_{L^p(mask)} + || |grad g| ||_{L^p(mask)}`.
pub fn w1p_norm(g: &TFGrid, mask: &DomainMask, p: f64) -> Result<f64> {
    let (gx, gy) = gradient(g)?;
    let gm = grad_magnitude(&gx, &gy)?;
    Ok(lp_norm(g, mask, p)? + lp_norm(&gm, mask, p)?)
}

/// `w1p_norm` for a real field.
pub fn w1p_norm_real(g: &RealGrid, mask: &DomainMask, p: f64) -> Result<f64> {
    let (gx, gy) = gradient_real(g)?;
    let gm = grad_magnitude_real(&gx, &gy)?;
    Ok(lp_norm(g, mask, p)? + lp_norm(&gm, mask, p)?)
}

/// Discrete boundary integral `(sum_bdry |g|^p w)^{1/p}` where `w` is the
/// contour length attributed to each boundary cell (see
/// [`boundary_weights`](super::boundary_weights)).
pub fn boundary_norm<F: Field>(g: &F, mask: &DomainMask, p: f64) -> Result<f64> {
    g.lattice().check_same(mask.lattice())?;
    check_p(p)?;
    if mask.is_empty() {
        return Err(Error::domain("boundary norm of an empty mask"));
    }
    let w = super::boundary_weights(mask);
    if p == f64::INFINITY {
        let m = exec::max_f64(w.len(), |k| if w[k] > 0.0 { g.abs_at(k) } else { f64::NEG_INFINITY });
        return Ok(if m == f64::NEG_INFINITY { 0.0 } else { m });
    }
    let total = exec::sum_f64(w.len(), |k| {
        if w[k] > 0.0 {
            g.abs_at(k).powf(p) * w[k]
        } else {
            0.0
        }
    });
    Ok(total.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ParamDomain;
    use approx::assert_relative_eq;

    fn unit_square(h: f64) -> Lattice {
        // cell centers at h/2, 3h/2, ... so the Riemann sum is the midpoint rule on [0,1]^2
        let n = (1.0 / h).round() as usize;
        Lattice::new(h / 2.0, h / 2.0, h, h, n, n).unwrap()
    }

    #[test]
    fn lp_norm_of_constant_is_sqrt_area() {
        // integral of 1 over area 4 at p=2 gives 2
        let l = Lattice::new(0.0, 0.0, 0.1, 0.1, 20, 20).unwrap();
        let g = TFGrid::from_fn(l, |_| Complex64::new(1.0, 0.0)).unwrap();
        let m = DomainMask::full(l);
        assert_relative_eq!(lp_norm(&g, &m, 2.0).unwrap(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn lp_norm_empty_mask_is_zero() {
        let l = Lattice::new(0.0, 0.0, 0.1, 0.1, 8, 8).unwrap();
        let g = TFGrid::from_fn(l, |z| z).unwrap();
        let m = DomainMask::empty(l);
        for p in [1.0, 2.0, f64::INFINITY] {
            assert_eq!(lp_norm(&g, &m, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn lp_norm_of_x_on_unit_square() {
        // ||x||_{L^2([0,1]^2)} = 1/sqrt(3)
        let h = 0.005;
        let l = unit_square(h);
        let g = TFGrid::from_fn(l, |z| Complex64::new(z.re, 0.0)).unwrap();
        let m = DomainMask::full(l);
        let v = lp_norm(&g, &m, 2.0).unwrap();
        assert!((v - 1.0 / 3f64.sqrt()).abs() < 2.0 * h * h, "v={v}");
    }

    #[test]
    fn lp_norm_rejects_mismatched_lattice() {
        let l1 = Lattice::new(0.0, 0.0, 0.1, 0.1, 8, 8).unwrap();
        let l2 = Lattice::new(0.0, 0.0, 0.2, 0.1, 8, 8).unwrap();
        let g = TFGrid::zeros(l1);
        let m = DomainMask::full(l2);
        assert!(lp_norm(&g, &m, 2.0).is_err());
    }

    #[test]
    fn gradient_constant_is_zero() {
        let l = Lattice::new(-1.0, -1.0, 0.05, 0.05, 41, 41).unwrap();
        let g = TFGrid::from_fn(l, |_| Complex64::new(3.5, -1.0)).unwrap();
        let (gx, gy) = gradient(&g).unwrap();
        assert!(gx.values().iter().all(|v| v.norm() < 1e-12));
        assert!(gy.values().iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn gradient_exact_on_affine_fields() {
        let l = Lattice::new(-1.0, -1.0, 0.05, 0.05, 41, 41).unwrap();
        let g = TFGrid::from_fn(l, |z| Complex64::new(z.re, 0.0)).unwrap();
        let (gx, gy) = gradient(&g).unwrap();
        assert!(gx.values().iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-10));
        assert!(gy.values().iter().all(|v| v.norm() < 1e-10));
    }

    #[test]
    fn gradient_too_small_grid_errors() {
        let l = Lattice::new(0.0, 0.0, 1.0, 1.0, 2, 2).unwrap();
        let g = TFGrid::zeros(l);
        assert!(gradient(&g).is_err());
    }

    #[test]
    fn spectral_gradient_of_sine() {
        // d/dx sin(2 pi x) = 2 pi cos(2 pi x), periodic on [0,1)
        let n = 64;
        let h = 1.0 / n as f64;
        let l = Lattice::new(0.0, 0.0, h, h, n, n).unwrap();
        let g = TFGrid::from_fn(l, |z| {
            Complex64::new((2.0 * std::f64::consts::PI * z.re).sin(), 0.0)
        })
        .unwrap();
        let (gx, _) = gradient_spectral(&g).unwrap();
        let mut max_err: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let expect = 2.0 * std::f64::consts::PI
                    * (2.0 * std::f64::consts::PI * l.x(i)).cos();
                max_err = max_err.max((gx.at(i, j).re - expect).abs());
            }
        }
        assert!(max_err < 1e-10, "max_err={max_err:.3e}");
    }

    #[test]
    fn w1p_norm_of_constant_equals_lp() {
        let l = Lattice::new(0.0, 0.0, 0.1, 0.1, 20, 20).unwrap();
        let g = TFGrid::from_fn(l, |_| Complex64::new(1.0, 0.0)).unwrap();
        let m = DomainMask::full(l);
        assert_relative_eq!(w1p_norm(&g, &m, 2.0).unwrap(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn w1p_norm_of_x_on_unit_square() {
        // ||x||_2 + ||(1,0)||_2 = 1/sqrt(3) + 1
        let h = 0.005;
        let l = unit_square(h);
        let g = TFGrid::from_fn(l, |z| Complex64::new(z.re, 0.0)).unwrap();
        let m = DomainMask::full(l);
        let v = w1p_norm(&g, &m, 2.0).unwrap();
        assert!((v - (1.0 / 3f64.sqrt() + 1.0)).abs() < 3.0 * h, "v={v}");
    }

    #[test]
    fn w1p_norm_of_zero_is_zero() {
        let l = Lattice::new(0.0, 0.0, 0.1, 0.1, 8, 8).unwrap();
        let g = TFGrid::zeros(l);
        let m = DomainMask::full(l);
        assert_eq!(w1p_norm(&g, &m, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn boundary_norm_unit_circle_perimeter() {
        // constant 1 on a rasterized unit disc, p=1: the boundary integral
        // is the perimeter 2 pi, within 2% at h=0.01
        let h = 0.01;
        let l = Lattice::from_ranges(-1.3, 1.3, h, -1.3, 1.3, h).unwrap();
        let d = ParamDomain::disc(Complex64::new(0.0, 0.0), 1.0).unwrap();
        let m = d.rasterize(&l);
        let g = RealGrid::from_fn(l, |_| 1.0).unwrap();
        let v = boundary_norm(&g, &m, 1.0).unwrap();
        let exact = 2.0 * std::f64::consts::PI;
        assert!((v - exact).abs() / exact < 0.02, "v={v} exact={exact}");
    }

    #[test]
    fn boundary_norm_annulus_perimeter() {
        let h = 0.01;
        let l = Lattice::from_ranges(-2.3, 2.3, h, -2.3, 2.3, h).unwrap();
        let a = ParamDomain::annulus(Complex64::new(0.0, 0.0), 1.0, 2.0).unwrap();
        let m = a.rasterize(&l);
        let g = RealGrid::from_fn(l, |_| 1.0).unwrap();
        let v = boundary_norm(&g, &m, 1.0).unwrap();
        let exact = 6.0 * std::f64::consts::PI;
        assert!((v - exact).abs() / exact < 0.02, "v={v} exact={exact}");
    }

    #[test]
    fn boundary_norm_zero_field() {
        let l = Lattice::new(0.0, 0.0, 0.1, 0.1, 12, 12).unwrap();
        let m = DomainMask::full(l);
        let g = RealGrid::zeros(l);
        assert_eq!(boundary_norm(&g, &m, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn boundary_norm_empty_mask_errors() {
        let l = Lattice::new(0.0, 0.0, 0.1, 0.1, 12, 12).unwrap();
        let m = DomainMask::empty(l);
        let g = RealGrid::zeros(l);
        assert!(boundary_norm(&g, &m, 1.0).is_err());
    }

    #[test]
    fn refinement_consistency_of_lp_norm() {
        // halving h changes the norm of a fixed smooth field by O(h^2)
        let f = |z: Complex64| Complex64::new((z.re * 1.7).sin() * (z.im * 0.9).cos(), 0.0);
        let mut prev_err = f64::INFINITY;
        let exact = {
            let h = 0.002;
            let l = unit_square(h);
            let g = TFGrid::from_fn(l, f).unwrap();
            lp_norm(&g, &DomainMask::full(l), 2.0).unwrap()
        };
        for h in [0.04, 0.02, 0.01] {
            let l = unit_square(h);
            let g = TFGrid::from_fn(l, f).unwrap();
            let v = lp_norm(&g, &DomainMask::full(l), 2.0).unwrap();
            let err = (v - exact).abs();
            assert!(err < prev_err || err < 1e-10);
            prev_err = err;
        }
        assert!(prev_err < 5e-5);
    }
}
