//! Exact Euclidean distance transform (two-pass lower-envelope scheme).

use super::{DomainMask, RealGrid};
use crate::error::{Error, Result};

/// 1-D squared-distance transform of sampled values `f` at positions
/// `k*h`: `d(i) = min_k f(k) + ((i-k)h)^2`, computed in O(n) with the
/// parabola lower envelope. Entries with `f = inf` carry no parabola.
fn edt_1d(f: &[f64], h: f64, out: &mut [f64]) {
    let n = f.len();
    let sq = |x: f64| x * x;
    let sites: Vec<usize> = (0..n).filter(|&i| f[i].is_finite()).collect();
    if sites.is_empty() {
        out.fill(f64::INFINITY);
        return;
    }
    // v: envelope parabola sites; z: breakpoints, z.len() == v.len() + 1
    let mut v: Vec<usize> = vec![sites[0]];
    let mut z: Vec<f64> = vec![f64::NEG_INFINITY, f64::INFINITY];
    for &q in &sites[1..] {
        loop {
            let p = v[v.len() - 1];
            // intersection abscissa of the parabolas rooted at p*h and q*h
            let s = (f[q] + sq(q as f64 * h) - f[p] - sq(p as f64 * h))
                / (2.0 * h * (q as f64 - p as f64));
            if s <= z[v.len() - 1] {
                v.pop();
                z.pop();
                z.pop();
                z.push(f64::INFINITY);
                if v.is_empty() {
                    v.push(q);
                    z.clear();
                    z.push(f64::NEG_INFINITY);
                    z.push(f64::INFINITY);
                    break;
                }
            } else {
                let last = z.len() - 1;
                z[last] = s;
                z.push(f64::INFINITY);
                v.push(q);
                break;
            }
        }
    }
    let mut k = 0usize;
    for i in 0..n {
        let x = i as f64 * h;
        while z[k + 1] < x {
            k += 1;
        }
        let p = v[k];
        out[i] = sq(x - p as f64 * h) + f[p];
    }
}

/// Per-cell Euclidean distance (in plane units) to the nearest boundary
/// cell center of the mask. Boundary cells get 0; cells outside the mask
/// also carry their distance to the boundary set.
pub fn distance_transform(mask: &DomainMask) -> Result<RealGrid> {
    if mask.is_empty() {
        return Err(Error::domain("distance transform of an empty mask"));
    }
    let l = *mask.lattice();
    let (nx, ny) = (l.nx, l.ny);
    // pass 1: per row, squared distance to the nearest source in that row
    let mut g = vec![f64::INFINITY; nx * ny];
    for j in 0..ny {
        let mut f = vec![f64::INFINITY; nx];
        for i in 0..nx {
            if mask.is_boundary(i, j) {
                f[i] = 0.0;
            }
        }
        if f.iter().all(|&v| v == f64::INFINITY) {
            continue;
        }
        edt_1d(&f, l.dx, &mut g[j * nx..(j + 1) * nx]);
    }
    // pass 2: per column over the row results
    let cols = crate::exec::map_vec(nx, |i| {
        let f: Vec<f64> = (0..ny).map(|j| g[j * nx + i]).collect();
        let mut out = vec![0.0f64; ny];
        edt_1d(&f, l.dy, &mut out);
        out
    });
    let mut d = vec![0.0f64; nx * ny];
    for (i, col) in cols.iter().enumerate() {
        for (j, &v) in col.iter().enumerate() {
            d[j * nx + i] = v.sqrt();
        }
    }
    RealGrid::new(l, d)
}
