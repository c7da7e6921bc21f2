//! Discrete Gabor transform (Gaussian-window STFT), Cauchy wavelet
//! transform, adjoint-based Gabor inversion, and analytic-signal
//! construction.
//!
//! The Gabor window is fixed to `phi(t) = exp(-pi t^2)`: the holomorphic
//! normalizer used by the certificate machinery is specific to this
//! window, and a configurable window would silently invalidate it. The
//! transform is the plain quadrature
//! `V f(x,y) = sum_t f(t) phi(t-x) e^{-2 pi i t y} dt`
//! evaluated per lattice column, with the window truncated where
//! `|phi| < 1e-12` (radius 3.2).

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{Lattice, TFGrid};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Radius beyond which the Gaussian window is treated as zero.
pub const WINDOW_TAIL_RADIUS: f64 = 3.2;

/// Gaussian window `exp(-pi t^2)`.
#[inline]
pub fn window(t: f64) -> f64 {
    (-PI * t * t).exp()
}

/// Squared L2 norm of the window, `1/sqrt(2)`.
pub const WINDOW_NORM_SQ: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Complex-valued signal sampled uniformly in time.
#[derive(Debug, Clone)]
pub struct Signal {
    samples: Vec<Complex64>,
    sample_rate: f64,
    t0: f64,
}

impl Signal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, t0: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::structural("signal needs at least 2 samples"));
        }
        if !(sample_rate > 0.0) || !sample_rate.is_finite() || !t0.is_finite() {
            return Err(Error::structural("bad sample rate or start time"));
        }
        if samples.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::structural("non-finite sample rejected"));
        }
        Ok(Signal { samples, sample_rate, t0 })
    }

    pub fn from_real(samples: &[f64], sample_rate: f64, t0: f64) -> Result<Self> {
        Signal::new(
            samples.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            sample_rate,
            t0,
        )
    }

    /// Sample `f` on a uniform grid covering `[t_start, t_end]`.
    pub fn from_fn(
        t_start: f64,
        t_end: f64,
        sample_rate: f64,
        f: impl Fn(f64) -> Complex64 + Sync,
    ) -> Result<Self> {
        let n = ((t_end - t_start) * sample_rate).ceil() as usize + 1;
        let dt = 1.0 / sample_rate;
        let samples = exec::map_vec(n, |k| f(t_start + k as f64 * dt));
        Signal::new(samples, sample_rate, t_start)
    }

    #[inline]
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }
    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
    #[inline]
    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }
    #[inline]
    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }
    #[inline]
    pub fn t0(&self) -> f64 {
        self.t0
    }
    #[inline]
    pub fn t(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt()
    }
    pub fn t_end(&self) -> f64 {
        self.t(self.samples.len() - 1)
    }

    /// Continuous-time L2 norm, `sqrt(sum |f|^2 dt)`.
    pub fn norm_l2(&self) -> f64 {
        let s = exec::sum_f64(self.samples.len(), |k| self.samples[k].norm_sqr());
        (s * self.dt()).sqrt()
    }

    /// `sqrt(sum |f-g|^2 dt)`; lattices must agree exactly.
    pub fn distance_l2(&self, other: &Signal) -> Result<f64> {
        if self.samples.len() != other.samples.len()
            || self.sample_rate != other.sample_rate
            || self.t0 != other.t0
        {
            return Err(Error::structural("signal grids differ"));
        }
        let s = exec::sum_f64(self.samples.len(), |k| {
            (self.samples[k] - other.samples[k]).norm_sqr()
        });
        Ok((s * self.dt()).sqrt())
    }
}

/// Output lattice for the Gabor transform; the window is not configurable.
#[derive(Debug, Clone, Copy)]
pub struct GaborSpec {
    pub x0: f64,
    pub x1: f64,
    pub dx: f64,
    pub y0: f64,
    pub y1: f64,
    pub dy: f64,
}

impl GaborSpec {
    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::from_ranges(self.x0, self.x1, self.dx, self.y0, self.y1, self.dy)
    }
}

/// Cauchy wavelet transform lattice; `order` is the number of vanishing
/// moments `s` in `psihat(w) = w^s e^{-2 pi w}` for `w > 0`.
#[derive(Debug, Clone, Copy)]
pub struct CauchySpec {
    pub order: u32,
    pub x0: f64,
    pub x1: f64,
    pub dx: f64,
    pub y0: f64,
    pub y1: f64,
    pub dy: f64,
}

impl CauchySpec {
    pub fn lattice(&self) -> Result<Lattice> {
        if !(self.y0 > 0.0) {
            return Err(Error::domain("Cauchy lattice must have y > 0"));
        }
        if self.order < 1 {
            return Err(Error::domain("Cauchy order must be >= 1"));
        }
        Lattice::from_ranges(self.x0, self.x1, self.dx, self.y0, self.y1, self.dy)
    }
}

/// `V f(x,y) = sum_t f(t) phi(t-x) e^{-2 pi i t y} dt` on the spec lattice.
pub fn gabor_forward(f: &Signal, spec: &GaborSpec) -> Result<TFGrid> {
    gabor_forward_on(f, &spec.lattice()?)
}

/// Same transform with the lattice given directly (used by the retrieval
/// loop, which re-applies the transform on the measurement lattice).
pub fn gabor_forward_on(f: &Signal, lattice: &Lattice) -> Result<TFGrid> {
    let r = WINDOW_TAIL_RADIUS;
    if f.t0() > lattice.origin_x - r + 1e-12 || f.t_end() < lattice.x_max() + r - 1e-12 {
        return Err(Error::domain(format!(
            "signal support [{:.3}, {:.3}] does not cover lattice x-range plus window tails [{:.3}, {:.3}]",
            f.t0(),
            f.t_end(),
            lattice.origin_x - r,
            lattice.x_max() + r
        )));
    }
    let nyq = f.sample_rate() / 2.0;
    if lattice.origin_y.abs() > nyq + 1e-9 || lattice.y_max().abs() > nyq + 1e-9 {
        return Err(Error::domain(format!(
            "lattice y-range exceeds the signal Nyquist frequency {nyq}"
        )));
    }

    let dt = f.dt();
    let (nx, ny) = (lattice.nx, lattice.ny);
    // per column: windowed samples, then one rotation recurrence per row
    let columns: Vec<Vec<Complex64>> = exec::map_vec(nx, |i| {
        let x = lattice.x(i);
        let lo = (((x - r) - f.t0()) * f.sample_rate()).ceil().max(0.0) as usize;
        let hi = ((((x + r) - f.t0()) * f.sample_rate()).floor() as usize).min(f.len() - 1);
        let w: Vec<Complex64> = (lo..=hi)
            .map(|n| f.samples()[n] * window(f.t(n) - x))
            .collect();
        let t_lo = f.t(lo);
        let mut col = vec![Complex64::default(); ny];
        for (j, cj) in col.iter_mut().enumerate() {
            let y = lattice.y(j);
            let step = Complex64::from_polar(1.0, -2.0 * PI * dt * y);
            let mut rot = Complex64::from_polar(1.0, -2.0 * PI * t_lo * y);
            let mut acc = Complex64::default();
            for wn in &w {
                acc += wn * rot;
                rot *= step;
            }
            *cj = acc * dt;
        }
        col
    });
    let mut values = vec![Complex64::default(); nx * ny];
    for (i, col) in columns.iter().enumerate() {
        for (j, &v) in col.iter().enumerate() {
            values[j * nx + i] = v;
        }
    }
    TFGrid::new(*lattice, values)
}

/// Adjoint-based inversion `f = V* F / ||phi||^2`, normalized so that
/// `gabor_inverse(gabor_forward(f))` recovers `f` for signals whose
/// time-frequency content lies inside the lattice.
///
/// The output time grid covers the lattice x-range plus window tails at a
/// sample rate resolving the lattice y-range.
pub fn gabor_inverse(grid: &TFGrid) -> Result<Signal> {
    let l = grid.lattice();
    let ymax = l.origin_y.abs().max(l.y_max().abs());
    let sr = (2.0 * ymax + 2.0).ceil().max(8.0);
    let t_start = l.origin_x - WINDOW_TAIL_RADIUS;
    let t_end = l.x_max() + WINDOW_TAIL_RADIUS;
    let n = ((t_end - t_start) * sr).ceil() as usize + 1;
    gabor_inverse_onto(grid, t_start, n, sr)
}

/// Adjoint inversion evaluated on a caller-supplied time grid.
pub fn gabor_inverse_onto(grid: &TFGrid, t0: f64, n: usize, sample_rate: f64) -> Result<Signal> {
    let l = *grid.lattice();
    if l.dx * l.dy > 1.0 + 1e-12 {
        return Err(Error::domain(format!(
            "lattice density dx*dy = {} exceeds 1; adjoint inversion undefined",
            l.dx * l.dy
        )));
    }
    if n < 2 {
        return Err(Error::structural("time grid needs at least 2 samples"));
    }
    let dt = 1.0 / sample_rate;
    let scale = l.cell_area() / WINDOW_NORM_SQ;
    let values = grid.values();
    let samples = exec::map_vec(n, |k| {
        let t = t0 + k as f64 * dt;
        // columns whose window reaches t
        let i_lo = ((t - WINDOW_TAIL_RADIUS - l.origin_x) / l.dx).ceil().max(0.0) as usize;
        let i_hi_f = (t + WINDOW_TAIL_RADIUS - l.origin_x) / l.dx;
        if i_hi_f < 0.0 || i_lo >= l.nx {
            return Complex64::default();
        }
        let i_hi = (i_hi_f.floor() as usize).min(l.nx - 1);
        let phis: Vec<f64> = (i_lo..=i_hi).map(|i| window(t - l.x(i))).collect();
        let step = Complex64::from_polar(1.0, 2.0 * PI * t * l.dy);
        let mut rot = Complex64::from_polar(1.0, 2.0 * PI * t * l.origin_y);
        let mut acc = Complex64::default();
        for j in 0..l.ny {
            let row = &values[j * l.nx..(j + 1) * l.nx];
            let mut inner = Complex64::default();
            for (off, &p) in phis.iter().enumerate() {
                inner += row[i_lo + off] * p;
            }
            acc += inner * rot;
            rot *= step;
        }
        acc * scale
    });
    Signal::new(samples, sample_rate, t0)
}

/// Cauchy wavelet transform for positive-frequency signals,
/// `W f(x,y) = int_{w>0} fhat(w) y^{s+1/2} w^s e^{-2 pi y w} e^{2 pi i x w} dw`,
/// evaluated per y-row from the FFT of `f`.
pub fn cauchy_forward(f: &Signal, spec: &CauchySpec) -> Result<TFGrid> {
    let lattice = spec.lattice()?;
    let n = f.len();
    let dt = f.dt();
    let dw = 1.0 / (n as f64 * dt);
    let spec_f = dft_forward(f.samples());
    // continuous-time spectrum at w_k = k * dw, with the start-time phase
    let mut fhat = vec![Complex64::default(); n];
    for (k, v) in spec_f.iter().enumerate() {
        let w = k as f64 * dw;
        fhat[k] = v * dt * Complex64::from_polar(1.0, -2.0 * PI * f.t0() * w);
    }
    // negative-frequency energy check (bins above Nyquist alias to w < 0)
    let half = n / 2;
    let total: f64 = spec_f.iter().map(|v| v.norm_sqr()).sum();
    let neg: f64 = spec_f[half + 1..].iter().map(|v| v.norm_sqr()).sum();
    if total > 0.0 && neg / total > 1e-10 {
        return Err(Error::precondition(format!(
            "signal is not analytic: negative-frequency energy fraction {:.3e} exceeds 1e-10",
            neg / total
        )));
    }

    let s = spec.order as f64;
    let (nx, ny) = (lattice.nx, lattice.ny);
    let rows: Vec<Vec<Complex64>> = exec::map_vec(ny, |j| {
        let y = lattice.y(j);
        let amp = y.powf(s + 0.5) * dw;
        // coefficients psihat(y w_k) fhat_k over positive bins
        let coef: Vec<Complex64> = (1..=half)
            .map(|k| {
                let w = k as f64 * dw;
                fhat[k] * (w.powf(s) * (-2.0 * PI * y * w).exp())
            })
            .collect();
        let mut row = vec![Complex64::default(); nx];
        for (i, ri) in row.iter_mut().enumerate() {
            let x = lattice.x(i);
            let step = Complex64::from_polar(1.0, 2.0 * PI * x * dw);
            let mut rot = step; // e^{2 pi i x w_1}
            let mut acc = Complex64::default();
            for c in &coef {
                acc += c * rot;
                rot *= step;
            }
            *ri = acc * amp;
        }
        row
    });
    let mut values = vec![Complex64::default(); nx * ny];
    for (j, row) in rows.iter().enumerate() {
        values[j * nx..(j + 1) * nx].copy_from_slice(row);
    }
    TFGrid::new(lattice, values)
}

/// Positive-frequency part: zero the negative-frequency bins and halve the
/// DC and Nyquist bins, so that `2 Re(analytic_part(f)) = f` for real `f`.
pub fn analytic_part(f: &Signal) -> Signal {
    let n = f.len();
    let mut spec = dft_forward(f.samples());
    spec[0] *= 0.5;
    if n % 2 == 0 {
        spec[n / 2] *= 0.5;
        for v in spec.iter_mut().skip(n / 2 + 1) {
            *v = Complex64::default();
        }
    } else {
        for v in spec.iter_mut().skip(n / 2 + 1) {
            *v = Complex64::default();
        }
    }
    let samples = dft_inverse(&spec);
    Signal {
        samples,
        sample_rate: f.sample_rate,
        t0: f.t0,
    }
}

pub(crate) fn dft_forward(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    FftPlanner::new().plan_fft_forward(x.len()).process(&mut buf);
    buf
}

pub(crate) fn dft_inverse(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    FftPlanner::new().plan_fft_inverse(x.len()).process(&mut buf);
    let s = 1.0 / x.len() as f64;
    for v in &mut buf {
        *v *= s;
    }
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Closed form of the transform of the window itself:
    /// `V phi(x,y) = 2^{-1/2} e^{-i pi x y} e^{-pi (x^2+y^2)/2}`.
    fn atom_exact(x: f64, y: f64) -> Complex64 {
        Complex64::from_polar(
            std::f64::consts::FRAC_1_SQRT_2 * (-PI * (x * x + y * y) / 2.0).exp(),
            -PI * x * y,
        )
    }

    fn window_signal(sr: f64) -> Signal {
        Signal::from_fn(-6.0, 6.0, sr, |t| Complex64::new(window(t), 0.0)).unwrap()
    }

    /// Gaussian mixture with time/frequency centers inside the unit square.
    pub(crate) fn mixture(rng: &mut ChaCha8Rng, k: usize) -> Signal {
        let atoms: Vec<(f64, f64, Complex64)> = (0..k)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
            })
            .collect();
        Signal::from_fn(-8.0, 8.0, 32.0, |t| {
            atoms
                .iter()
                .map(|&(a, b, c)| {
                    c * window(t - a) * Complex64::from_polar(1.0, 2.0 * PI * b * t)
                })
                .sum()
        })
        .unwrap()
    }

    #[test]
    fn transform_of_window_matches_closed_form() {
        let f = window_signal(32.0);
        let spec = GaborSpec { x0: -2.0, x1: 2.0, dx: 0.05, y0: -2.0, y1: 2.0, dy: 0.05 };
        let v = gabor_forward(&f, &spec).unwrap();
        let l = v.lattice();
        let mut max_rel: f64 = 0.0;
        for j in 0..l.ny {
            for i in 0..l.nx {
                let exact = atom_exact(l.x(i), l.y(j));
                let rel = (v.at(i, j) - exact).norm() / exact.norm();
                max_rel = max_rel.max(rel);
            }
        }
        assert!(max_rel < 1e-6, "max relative error {max_rel:.3e}");
    }

    #[test]
    fn closed_form_agrees_with_direct_quadrature() {
        // independent oracle: brute-force Riemann sum of the defining
        // integral at a handful of points
        let sr = 64.0;
        let dt = 1.0 / sr;
        let nt = (12.0 * sr) as usize;
        for &(x, y) in &[(0.0, 0.0), (0.7, -0.3), (-1.1, 0.9), (1.5, 1.5), (-0.2, -1.7)] {
            let mut acc = Complex64::default();
            for n in 0..=nt {
                let t = -6.0 + n as f64 * dt;
                acc += window(t) * window(t - x) * Complex64::from_polar(1.0, -2.0 * PI * t * y);
            }
            acc *= dt;
            let exact = atom_exact(x, y);
            assert!((acc - exact).norm() < 1e-8, "quadrature mismatch at ({x},{y})");
        }
    }

    #[test]
    fn zero_signal_transforms_to_zero() {
        let f = Signal::from_fn(-6.0, 6.0, 16.0, |_| Complex64::default()).unwrap();
        let spec = GaborSpec { x0: -1.0, x1: 1.0, dx: 0.25, y0: -1.0, y1: 1.0, dy: 0.25 };
        let v = gabor_forward(&f, &spec).unwrap();
        assert!(v.values().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn time_shift_covariance() {
        // V[f(.-a)](x,y) = e^{-2 pi i a y} V[f](x-a, y)
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = mixture(&mut rng, 3);
        let a = 0.5; // multiple of dx so shifted lattices line up
        let fa = Signal::from_fn(-6.0, 6.0, 32.0, |t| {
            // re-evaluate the same mixture shifted: sample f at t-a via interpolation-free
            // construction is messy; instead shift by resampling the closed form
            let _ = t;
            Complex64::default()
        });
        drop(fa);
        // build both signals from one closed form
        let atoms: Vec<(f64, f64, Complex64)> = (0..3)
            .map(|_| {
                (
                    rng.gen_range(-0.8..0.8),
                    rng.gen_range(-0.8..0.8),
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
            })
            .collect();
        let eval = |t: f64| -> Complex64 {
            atoms
                .iter()
                .map(|&(c, b, w)| w * window(t - c) * Complex64::from_polar(1.0, 2.0 * PI * b * t))
                .sum()
        };
        let f0 = Signal::from_fn(-6.0, 6.0, 32.0, eval).unwrap();
        let fs = Signal::from_fn(-6.0, 6.0, 32.0, |t| eval(t - a)).unwrap();
        let spec0 = GaborSpec { x0: -2.0, x1: 2.0, dx: 0.25, y0: -2.0, y1: 2.0, dy: 0.25 };
        let v0 = gabor_forward(&f0, &spec0).unwrap();
        let vs = gabor_forward(&fs, &spec0).unwrap();
        let l = v0.lattice();
        let shift_cols = (a / l.dx).round() as usize;
        let mut max_err: f64 = 0.0;
        for j in 0..l.ny {
            for i in shift_cols..l.nx {
                let y = l.y(j);
                let expect = v0.at(i - shift_cols, j) * Complex64::from_polar(1.0, -2.0 * PI * a * y);
                max_err = max_err.max((vs.at(i, j) - expect).norm());
            }
        }
        assert!(max_err < 1e-8, "covariance error {max_err:.3e}");
        let _ = f;
    }

    #[test]
    fn modulation_covariance() {
        // V[e^{2 pi i b t} f](x,y) = V[f](x, y-b)
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = mixture(&mut rng, 3);
        let b = 0.5;
        let fm = Signal::new(
            f.samples()
                .iter()
                .enumerate()
                .map(|(n, &v)| v * Complex64::from_polar(1.0, 2.0 * PI * b * f.t(n)))
                .collect(),
            f.sample_rate(),
            f.t0(),
        )
        .unwrap();
        let spec = GaborSpec { x0: -2.0, x1: 2.0, dx: 0.25, y0: -2.0, y1: 2.0, dy: 0.25 };
        let v = gabor_forward(&f, &spec).unwrap();
        let vm = gabor_forward(&fm, &spec).unwrap();
        let l = v.lattice();
        let shift_rows = (b / l.dy).round() as usize;
        let mut max_err: f64 = 0.0;
        for j in shift_rows..l.ny {
            for i in 0..l.nx {
                max_err = max_err.max((vm.at(i, j) - v.at(i, j - shift_rows)).norm());
            }
        }
        assert!(max_err < 1e-8, "covariance error {max_err:.3e}");
    }

    #[test]
    fn linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let f = mixture(&mut rng, 2);
        let g = mixture(&mut rng, 2);
        let a = Complex64::new(0.3, -1.2);
        let b = Complex64::new(-0.7, 0.4);
        let combo = Signal::new(
            f.samples()
                .iter()
                .zip(g.samples())
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
            f.sample_rate(),
            f.t0(),
        )
        .unwrap();
        let spec = GaborSpec { x0: -1.0, x1: 1.0, dx: 0.25, y0: -1.0, y1: 1.0, dy: 0.25 };
        let vf = gabor_forward(&f, &spec).unwrap();
        let vg = gabor_forward(&g, &spec).unwrap();
        let vc = gabor_forward(&combo, &spec).unwrap();
        let max_err = vc
            .values()
            .iter()
            .zip(vf.values().iter().zip(vg.values()))
            .map(|(&c, (&x, &y))| (c - (a * x + b * y)).norm())
            .fold(0.0f64, f64::max);
        assert!(max_err < 1e-12, "linearity error {max_err:.3e}");
    }

    #[test]
    fn roundtrip_and_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let f = mixture(&mut rng, 4);
            let spec = GaborSpec { x0: -4.0, x1: 4.0, dx: 0.25, y0: -4.0, y1: 4.0, dy: 0.25 };
            let v = gabor_forward(&f, &spec).unwrap();
            let fr = gabor_inverse_onto(&v, f.t0(), f.len(), f.sample_rate()).unwrap();
            let rel = fr.distance_l2(&f).unwrap() / f.norm_l2();
            assert!(rel < 1e-6, "roundtrip error {rel:.3e}");
            // scaled isometry: ||V f|| = ||phi|| ||f|| for in-lattice signals
            let norm_v = {
                let m = crate::grid::DomainMask::full(*v.lattice());
                crate::grid::lp_norm(&v, &m, 2.0).unwrap()
            };
            let ratio = norm_v / (WINDOW_NORM_SQ.sqrt() * f.norm_l2());
            assert!((ratio - 1.0).abs() < 1e-4, "isometry ratio {ratio}");
        }
    }

    #[test]
    fn inverse_of_zero_grid_is_zero() {
        let l = Lattice::from_ranges(-1.0, 1.0, 0.25, -1.0, 1.0, 0.25).unwrap();
        let v = TFGrid::zeros(l);
        let f = gabor_inverse(&v).unwrap();
        assert!(f.samples().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn undersampled_lattice_is_rejected() {
        let l = Lattice::from_ranges(-2.0, 2.0, 1.5, -2.0, 2.0, 1.5).unwrap();
        let v = TFGrid::zeros(l);
        assert!(gabor_inverse(&v).is_err());
    }

    #[test]
    fn insufficient_support_is_rejected() {
        let f = Signal::from_fn(-1.0, 1.0, 32.0, |t| Complex64::new(window(t), 0.0)).unwrap();
        let spec = GaborSpec { x0: -2.0, x1: 2.0, dx: 0.25, y0: -2.0, y1: 2.0, dy: 0.25 };
        assert!(gabor_forward(&f, &spec).is_err());
    }

    #[test]
    fn beyond_nyquist_is_rejected() {
        let f = window_signal(4.0);
        let spec = GaborSpec { x0: -1.0, x1: 1.0, dx: 0.25, y0: -3.0, y1: 3.0, dy: 0.25 };
        assert!(gabor_forward(&f, &spec).is_err());
    }

    #[test]
    fn cauchy_matches_closed_form() {
        // fhat(w) = e^{-2 pi w} for w > 0 gives
        // W f(x,y) = y^{s+1/2} s! / (2 pi (1 + y - i x))^{s+1}
        for (s, duration, tol) in [(1u32, 16384.0, 1e-6), (2u32, 256.0, 1e-6)] {
            let sr = 16.0;
            let n = (duration * sr) as usize;
            let dt = 1.0 / sr;
            let dw = 1.0 / (n as f64 * dt);
            // construct the signal from its spectrum so the FFT recovers it exactly
            let mut spec_bins = vec![Complex64::default(); n];
            for (k, v) in spec_bins.iter_mut().enumerate().take(n / 2 + 1).skip(1) {
                let w = k as f64 * dw;
                *v = Complex64::new((-2.0 * PI * w).exp() / dt, 0.0);
            }
            let samples = dft_inverse(&spec_bins);
            let f = Signal::new(samples, sr, 0.0).unwrap();
            let cspec = CauchySpec { order: s, x0: -2.0, x1: 2.0, dx: 0.5, y0: 0.5, y1: 2.0, dy: 0.25 };
            let w = cauchy_forward(&f, &cspec).unwrap();
            let l = w.lattice();
            let fact: f64 = (1..=s).map(|k| k as f64).product();
            let mut max_rel: f64 = 0.0;
            for j in 0..l.ny {
                for i in 0..l.nx {
                    let (x, y) = (l.x(i), l.y(j));
                    let denom = (Complex64::new(1.0 + y, -x) * 2.0 * PI).powu(s + 1);
                    let exact = y.powf(s as f64 + 0.5) * fact / denom;
                    max_rel = max_rel.max((w.at(i, j) - exact).norm() / exact.norm());
                }
            }
            assert!(max_rel < tol, "s={s}: max relative error {max_rel:.3e}");
        }
    }

    #[test]
    fn cauchy_zero_signal() {
        let f = Signal::from_fn(0.0, 4.0, 16.0, |_| Complex64::default()).unwrap();
        let spec = CauchySpec { order: 1, x0: 0.0, x1: 1.0, dx: 0.25, y0: 0.5, y1: 1.0, dy: 0.25 };
        let w = cauchy_forward(&f, &spec).unwrap();
        assert!(w.values().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn cauchy_rejects_non_analytic_input() {
        let f = Signal::from_fn(0.0, 4.0, 16.0, |t| Complex64::new((2.0 * PI * t).cos(), 0.0))
            .unwrap();
        let spec = CauchySpec { order: 1, x0: 0.0, x1: 1.0, dx: 0.25, y0: 0.5, y1: 1.0, dy: 0.25 };
        let err = cauchy_forward(&f, &spec).unwrap_err();
        assert_eq!(err.kind(), "precondition");
    }

    #[test]
    fn cauchy_scaling_covariance() {
        // W[f(./lam)](x,y) = lam^{1/2} W[f](x/lam, y/lam)
        // analytic test signal with closed-form samples:
        // fhat(w) = w e^{-a w}  =>  f(t) = 1/(a - 2 pi i t)^2
        let a = 2.0;
        let lam = 2.0;
        let eval = |t: f64| {
            let d = Complex64::new(a, -2.0 * PI * t);
            1.0 / (d * d)
        };
        let sr = 16.0;
        let f = Signal::from_fn(-512.0, 512.0, sr, eval).unwrap();
        let fs = Signal::from_fn(-512.0, 512.0, sr, |t| eval(t / lam)).unwrap();
        let spec = CauchySpec { order: 1, x0: -1.0, x1: 1.0, dx: 0.5, y0: 0.5, y1: 1.0, dy: 0.25 };
        let spec_scaled = CauchySpec {
            order: 1,
            x0: -1.0 * lam,
            x1: 1.0 * lam,
            dx: 0.5 * lam,
            y0: 0.5 * lam,
            y1: 1.0 * lam,
            dy: 0.25 * lam,
        };
        let w = cauchy_forward(&f, &spec).unwrap();
        let ws = cauchy_forward(&fs, &spec_scaled).unwrap();
        let l = w.lattice();
        let mut max_err: f64 = 0.0;
        for j in 0..l.ny {
            for i in 0..l.nx {
                let expect = lam.sqrt() * w.at(i, j);
                max_err = max_err.max((ws.at(i, j) - expect).norm());
            }
        }
        assert!(max_err < 1e-7, "scaling covariance error {max_err:.3e}");
    }

    #[test]
    fn analytic_part_of_cosine() {
        // cos(2 pi t) -> (1/2) e^{2 pi i t}
        let n = 256;
        let sr = 16.0;
        let f = Signal::from_fn(0.0, (n - 1) as f64 / sr, sr, |t| {
            Complex64::new((2.0 * PI * t).cos(), 0.0)
        })
        .unwrap();
        let fa = analytic_part(&f);
        let mut max_err: f64 = 0.0;
        for k in 0..fa.len() {
            let expect = Complex64::from_polar(0.5, 2.0 * PI * fa.t(k));
            max_err = max_err.max((fa.samples()[k] - expect).norm());
        }
        assert!(max_err < 1e-10, "cosine analytic part error {max_err:.3e}");
    }

    #[test]
    fn analytic_part_double_real_recovers_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 128;
        let mut samples: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        for v in &mut samples {
            *v -= mean; // zero-mean so the DC convention is immaterial
        }
        let f = Signal::from_real(&samples, 8.0, 0.0).unwrap();
        let fa = analytic_part(&f);
        let max_err = (0..n)
            .map(|k| (2.0 * fa.samples()[k].re - samples[k]).abs())
            .fold(0.0f64, f64::max);
        assert!(max_err < 1e-10);
    }

    #[test]
    fn analytic_part_is_idempotent_on_analytic_signals() {
        let n = 128;
        let sr = 8.0;
        let f = Signal::from_fn(0.0, (n - 1) as f64 / sr, sr, |t| {
            Complex64::from_polar(1.0, 2.0 * PI * t) + Complex64::from_polar(0.3, 4.0 * PI * t)
        })
        .unwrap();
        let fa = analytic_part(&f);
        let faa = analytic_part(&fa);
        let max_err = fa
            .samples()
            .iter()
            .zip(faa.samples())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(max_err < 1e-12);
    }
}
