//! Lattice representation of complex fields over the plane, domain masks,
//! and the geometry primitives (norms, gradients, boundary integrals,
//! distance transforms) every other module computes on.
//!
//! A grid samples a field at cell centers `z = x + iy` with
//! `x = origin_x + i*dx`, `y = origin_y + j*dy`, stored row-major
//! (`index = j*nx + i`). All types are immutable after construction and
//! all operations are pure functions.

mod contour;
mod distance;
mod norms;

pub use contour::boundary_weights;
pub use distance::distance_transform;
pub use norms::{
    boundary_norm, grad_magnitude, gradient, gradient_real, gradient_spectral, lp_norm, w1p_norm,
    w1p_norm_real, Field,
};

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Uniform rectangular lattice in the `z = x + iy` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub origin_x: f64,
    pub origin_y: f64,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Lattice {
    pub fn new(origin_x: f64, origin_y: f64, dx: f64, dy: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::structural("lattice spacings must be positive and finite"));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::structural("lattice must have nx >= 2 and ny >= 2"));
        }
        if !origin_x.is_finite() || !origin_y.is_finite() {
            return Err(Error::structural("lattice origin must be finite"));
        }
        Ok(Lattice { origin_x, origin_y, dx, dy, nx, ny })
    }

    /// Lattice covering `[x0, x1] x [y0, y1]` with spacings `dx, dy`.
    /// The number of points is chosen so the last sample lands on the
    /// range end up to rounding.
    pub fn from_ranges(x0: f64, x1: f64, dx: f64, y0: f64, y1: f64, dy: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::structural("empty lattice range"));
        }
        let nx = ((x1 - x0) / dx + 0.5).floor() as usize + 1;
        let ny = ((y1 - y0) / dy + 0.5).floor() as usize + 1;
        Lattice::new(x0, y0, dx, dy, nx, ny)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.origin_x + i as f64 * self.dx
    }
    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.origin_y + j as f64 * self.dy
    }
    #[inline]
    pub fn z(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.x(i), self.y(j))
    }
    /// Split a flat index into `(i, j)`.
    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }
    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }
    pub fn x_max(&self) -> f64 {
        self.x(self.nx - 1)
    }
    pub fn y_max(&self) -> f64 {
        self.y(self.ny - 1)
    }

    /// Exact metadata equality; masks and fields may only be combined
    /// when their lattices agree bit for bit.
    pub fn same_as(&self, other: &Lattice) -> bool {
        self == other
    }

    pub fn check_same(&self, other: &Lattice) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::structural("lattice mismatch"))
        }
    }
}

/// Complex-valued field sampled on a lattice.
#[derive(Debug, Clone)]
pub struct TFGrid {
    lattice: Lattice,
    values: Vec<Complex64>,
}

impl TFGrid {
    pub fn new(lattice: Lattice, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::structural(format!(
                "value buffer has {} entries, lattice needs {}",
                values.len(),
                lattice.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::structural("non-finite sample rejected"));
        }
        Ok(TFGrid { lattice, values })
    }

    pub fn zeros(lattice: Lattice) -> Self {
        let n = lattice.len();
        TFGrid { lattice, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// Build by evaluating `f` at every cell center.
    pub fn from_fn(lattice: Lattice, f: impl Fn(Complex64) -> Complex64 + Sync) -> Result<Self> {
        let values = crate::exec::map_vec(lattice.len(), |k| {
            let (i, j) = lattice.ij(k);
            f(lattice.z(i, j))
        });
        TFGrid::new(lattice, values)
    }

    #[inline]
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[self.lattice.idx(i, j)]
    }

    /// Pointwise magnitude as a real grid.
    pub fn magnitude(&self) -> RealGrid {
        let values = crate::exec::map_vec(self.values.len(), |k| self.values[k].norm());
        RealGrid { lattice: self.lattice, values }
    }

    /// Pointwise map; the closure must return finite values.
    pub fn map(&self, f: impl Fn(usize, Complex64) -> Complex64 + Sync) -> Result<TFGrid> {
        let values = crate::exec::map_vec(self.values.len(), |k| f(k, self.values[k]));
        TFGrid::new(self.lattice, values)
    }
}

/// Real-valued field sampled on a lattice (magnitudes, distances, phases).
#[derive(Debug, Clone)]
pub struct RealGrid {
    lattice: Lattice,
    values: Vec<f64>,
}

impl RealGrid {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::structural("value buffer length mismatch"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::structural("non-finite sample rejected"));
        }
        Ok(RealGrid { lattice, values })
    }

    pub fn zeros(lattice: Lattice) -> Self {
        let n = lattice.len();
        RealGrid { lattice, values: vec![0.0; n] }
    }

    pub fn from_fn(lattice: Lattice, f: impl Fn(Complex64) -> f64 + Sync) -> Result<Self> {
        let values = crate::exec::map_vec(lattice.len(), |k| {
            let (i, j) = lattice.ij(k);
            f(lattice.z(i, j))
        });
        RealGrid::new(lattice, values)
    }

    #[inline]
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.lattice.idx(i, j)]
    }

    pub fn max_value(&self) -> f64 {
        crate::exec::max_f64(self.values.len(), |k| self.values[k])
    }
}

/// Boolean raster subset of a lattice, 4-connected.
#[derive(Debug, Clone)]
pub struct DomainMask {
    lattice: Lattice,
    cells: Vec<bool>,
}

impl DomainMask {
    pub fn new(lattice: Lattice, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != lattice.len() {
            return Err(Error::structural("mask buffer length mismatch"));
        }
        Ok(DomainMask { lattice, cells })
    }

    pub fn full(lattice: Lattice) -> Self {
        let n = lattice.len();
        DomainMask { lattice, cells: vec![true; n] }
    }

    pub fn empty(lattice: Lattice) -> Self {
        let n = lattice.len();
        DomainMask { lattice, cells: vec![false; n] }
    }

    pub fn from_fn(lattice: Lattice, f: impl Fn(Complex64) -> bool + Sync) -> Self {
        let cells = crate::exec::map_vec(lattice.len(), |k| {
            let (i, j) = lattice.ij(k);
            f(lattice.z(i, j))
        });
        DomainMask { lattice, cells }
    }

    #[inline]
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
    #[inline]
    pub fn cells(&self) -> &[bool] {
        &self.cells
    }
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[self.lattice.idx(i, j)]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    /// Raster area: number of true cells times the cell area.
    pub fn area(&self) -> f64 {
        self.count() as f64 * self.lattice.cell_area()
    }

    /// A cell is a boundary cell when it is true and has a false
    /// 4-neighbor or lies on the lattice edge.
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        if !self.get(i, j) {
            return false;
        }
        if i == 0 || j == 0 || i + 1 == self.lattice.nx || j + 1 == self.lattice.ny {
            return true;
        }
        !self.get(i - 1, j) || !self.get(i + 1, j) || !self.get(i, j - 1) || !self.get(i, j + 1)
    }

    /// Flat indices of all boundary cells.
    pub fn boundary_cells(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for j in 0..self.lattice.ny {
            for i in 0..self.lattice.nx {
                if self.is_boundary(i, j) {
                    out.push(self.lattice.idx(i, j));
                }
            }
        }
        out
    }

    pub fn union(&self, other: &DomainMask) -> Result<DomainMask> {
        self.lattice.check_same(&other.lattice)?;
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(&a, &b)| a || b)
            .collect();
        Ok(DomainMask { lattice: self.lattice, cells })
    }

    pub fn minus(&self, other: &DomainMask) -> Result<DomainMask> {
        self.lattice.check_same(&other.lattice)?;
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(&a, &b)| a && !b)
            .collect();
        Ok(DomainMask { lattice: self.lattice, cells })
    }

    /// Flat indices of true cells in row-major order.
    pub fn true_cells(&self) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(k, &c)| c.then_some(k))
            .collect()
    }
}

/// Parametric domain: disc, annulus, or a raw raster mask.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ParamDomain {
    Disc {
        center: (f64, f64),
        radius: f64,
    },
    Annulus {
        center: (f64, f64),
        inner: f64,
        outer: f64,
    },
    #[serde(skip)]
    Raster(DomainMask),
}

impl ParamDomain {
    pub fn disc(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain("disc radius must be positive"));
        }
        Ok(ParamDomain::Disc { center: (center.re, center.im), radius })
    }

    pub fn annulus(center: Complex64, inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 0.0 && outer > inner) {
            return Err(Error::domain("annulus needs 0 <= inner < outer"));
        }
        Ok(ParamDomain::Annulus { center: (center.re, center.im), inner, outer })
    }

    /// Cell centers inside the domain.
    pub fn rasterize(&self, lattice: &Lattice) -> DomainMask {
        match self {
            ParamDomain::Disc { center, radius } => {
                let (cx, cy) = *center;
                let r2 = radius * radius;
                DomainMask::from_fn(*lattice, |z| {
                    let dx = z.re - cx;
                    let dy = z.im - cy;
                    dx * dx + dy * dy <= r2
                })
            }
            ParamDomain::Annulus { center, inner, outer } => {
                let (cx, cy) = *center;
                let r2 = inner * inner;
                let s2 = outer * outer;
                DomainMask::from_fn(*lattice, |z| {
                    let dx = z.re - cx;
                    let dy = z.im - cy;
                    let d2 = dx * dx + dy * dy;
                    d2 <= s2 && d2 > r2
                })
            }
            ParamDomain::Raster(mask) => mask.clone(),
        }
    }

    pub fn diameter(&self) -> Result<f64> {
        match self {
            ParamDomain::Disc { radius, .. } => Ok(2.0 * radius),
            ParamDomain::Annulus { outer, .. } => Ok(2.0 * outer),
            ParamDomain::Raster(mask) => {
                // diameter of the bounding box; adequate for fallbacks
                let cells = mask.true_cells();
                if cells.is_empty() {
                    return Err(Error::domain("empty raster domain"));
                }
                let l = mask.lattice();
                let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
                let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
                for k in cells {
                    let (i, j) = l.ij(k);
                    xmin = xmin.min(l.x(i));
                    xmax = xmax.max(l.x(i));
                    ymin = ymin.min(l.y(j));
                    ymax = ymax.max(l.y(j));
                }
                Ok(((xmax - xmin).powi(2) + (ymax - ymin).powi(2)).sqrt())
            }
        }
    }
}
