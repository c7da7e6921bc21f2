//! Matrix-free eigensolvers on raster masks.
//!
//! Two quantities are needed: the smallest nonzero eigenvalue of the
//! 5-point Neumann Laplacian (whose inverse square root is the Poincaré
//! constant) and the largest eigenvalue of the boundary-mass versus
//! `H^1`-mass pencil (whose square root bounds the trace constant).
//! Both run matrix-free: inverse/power iteration with conjugate-gradient
//! inner solves on the mask graph.

use crate::error::{Error, Result};
use crate::grid::{boundary_weights, DomainMask};

/// Mask graph with 4-neighbor edges weighted `1/dx^2` and `1/dy^2`.
pub(crate) struct MaskGraph {
    /// flat lattice index of each graph vertex
    pub cells: Vec<usize>,
    /// neighbor ordinals, padded with `u32::MAX`
    neighbors: Vec<[u32; 4]>,
    /// weight per neighbor slot (0 where missing)
    weights: Vec<[f64; 4]>,
    pub cell_area: f64,
}

impl MaskGraph {
    pub fn build(mask: &DomainMask) -> Result<Self> {
        let l = mask.lattice();
        let cells = mask.true_cells();
        if cells.is_empty() {
            return Err(Error::domain("empty mask"));
        }
        let mut ordinal = vec![u32::MAX; l.len()];
        for (c, &k) in cells.iter().enumerate() {
            ordinal[k] = c as u32;
        }
        let wx = 1.0 / (l.dx * l.dx);
        let wy = 1.0 / (l.dy * l.dy);
        let mut neighbors = vec![[u32::MAX; 4]; cells.len()];
        let mut weights = vec![[0.0; 4]; cells.len()];
        for (c, &k) in cells.iter().enumerate() {
            let (i, j) = l.ij(k);
            let mut slot = 0;
            let mut push = |kk: usize, w: f64| {
                if ordinal[kk] != u32::MAX {
                    neighbors[c][slot] = ordinal[kk];
                    weights[c][slot] = w;
                    slot += 1;
                }
            };
            if i > 0 {
                push(l.idx(i - 1, j), wx);
            }
            if i + 1 < l.nx {
                push(l.idx(i + 1, j), wx);
            }
            if j > 0 {
                push(l.idx(i, j - 1), wy);
            }
            if j + 1 < l.ny {
                push(l.idx(i, j + 1), wy);
            }
        }
        // connectivity check: BFS from vertex 0
        let n = cells.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1usize;
        while let Some(c) = stack.pop() {
            for s in 0..4 {
                let nb = neighbors[c][s];
                if nb != u32::MAX && !seen[nb as usize] {
                    seen[nb as usize] = true;
                    count += 1;
                    stack.push(nb as usize);
                }
            }
        }
        if count != n {
            return Err(Error::domain("mask is not 4-connected"));
        }
        Ok(MaskGraph {
            cells,
            neighbors,
            weights,
            cell_area: l.cell_area(),
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    /// `out = L u` with `(L u)_c = sum_n w_cn (u_c - u_n)`.
    pub fn laplacian(&self, u: &[f64], out: &mut [f64]) {
        crate::exec::for_each_chunk(out, 1024, |chunk_idx, chunk| {
            let base = chunk_idx * 1024;
            for (off, o) in chunk.iter_mut().enumerate() {
                let c = base + off;
                let mut acc = 0.0;
                for s in 0..4 {
                    let nb = self.neighbors[c][s];
                    if nb != u32::MAX {
                        acc += self.weights[c][s] * (u[c] - u[nb as usize]);
                    }
                }
                *o = acc;
            }
        });
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    crate::exec::sum_f64(a.len(), |i| a[i] * b[i])
}

fn remove_mean(u: &mut [f64]) {
    let mean = crate::exec::sum_f64(u.len(), |i| u[i]) / u.len() as f64;
    for v in u.iter_mut() {
        *v -= mean;
    }
}

/// Conjugate gradients for `apply(x) = b`, SPD on the subspace containing
/// `b`. Returns the relative residual reached.
fn cg<A: Fn(&[f64], &mut [f64])>(
    apply: A,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> f64 {
    let n = b.len();
    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut p = r.clone();
    let mut rs = dot(&r, &r);
    let b_norm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    for _ in 0..max_iter {
        if rs.sqrt() <= tol * b_norm {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rs / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new = dot(&r, &r);
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    rs.sqrt() / b_norm
}

/// Smallest nonzero eigenvalue of the Neumann Laplacian on the mask, by
/// inverse iteration with the constant vector deflated. Relative
/// eigenvalue tolerance `1e-8`, at most `10^4` outer iterations.
pub fn neumann_lambda2(mask: &DomainMask) -> Result<f64> {
    let g = MaskGraph::build(mask)?;
    let n = g.len();
    if n < 2 {
        return Err(Error::domain("mask too small for an eigensolve"));
    }
    // deterministic, non-symmetric start: coordinates plus a hash ripple
    let l = mask.lattice();
    let mut v: Vec<f64> = g
        .cells
        .iter()
        .map(|&k| {
            let (i, j) = l.ij(k);
            let h = (k as u64).wrapping_mul(0x9e3779b97f4a7c15);
            l.x(i) + 0.37 * l.y(j) + 1e-3 * ((h >> 40) as f64 / (1u64 << 24) as f64)
        })
        .collect();
    remove_mean(&mut v);
    let nv = dot(&v, &v).sqrt();
    for x in v.iter_mut() {
        *x /= nv;
    }
    let mut lambda_prev = f64::INFINITY;
    let mut x = v.clone();
    let mut tmp = vec![0.0; n];
    for it in 0..10_000 {
        let rel_res = cg(|u, out| g.laplacian(u, out), &v, &mut x, 1e-11, 40 * (n as f64).sqrt() as usize + 200);
        remove_mean(&mut x);
        let nx = dot(&x, &x).sqrt();
        if nx == 0.0 || !nx.is_finite() {
            return Err(Error::numerical("inverse iteration collapsed", rel_res));
        }
        for u in x.iter_mut() {
            *u /= nx;
        }
        g.laplacian(&x, &mut tmp);
        let lambda = dot(&x, &tmp);
        if (lambda - lambda_prev).abs() <= 1e-8 * lambda.abs() && it >= 2 {
            return Ok(lambda);
        }
        lambda_prev = lambda;
        v.copy_from_slice(&x);
    }
    Err(Error::numerical(
        "Neumann eigensolve did not converge in 10^4 iterations",
        lambda_prev,
    ))
}

/// Largest eigenvalue `mu` of the pencil `B u = mu (K + M) u` on the mask,
/// where `B` is the boundary mass (contour-length weights), `K` the
/// stiffness and `M` the cell mass. `sqrt(mu)` bounds the ratio
/// `||u||_{L^2(boundary)} / (||u||_{L^2}^2 + ||grad u||_{L^2}^2)^{1/2}`,
/// and hence the trace constant with the additive Sobolev norm.
pub fn steklov_mu_max(mask: &DomainMask) -> Result<f64> {
    let g = MaskGraph::build(mask)?;
    let n = g.len();
    let weights_flat = boundary_weights(mask);
    let b_diag: Vec<f64> = g.cells.iter().map(|&k| weights_flat[k]).collect();
    if b_diag.iter().all(|&w| w == 0.0) {
        return Err(Error::domain("mask has no boundary weight"));
    }
    let area = g.cell_area;
    let apply_km = |u: &[f64], out: &mut [f64]| {
        g.laplacian(u, out);
        for i in 0..u.len() {
            out[i] = area * (out[i] + u[i]);
        }
    };
    let mut u = vec![1.0f64; n];
    let mut x = vec![0.0f64; n];
    let mut tmp = vec![0.0f64; n];
    let mut mu_prev = 0.0f64;
    for it in 0..2_000 {
        // y = B u
        for i in 0..n {
            tmp[i] = b_diag[i] * u[i];
        }
        let _ = cg(apply_km, &tmp, &mut x, 1e-10, 40 * (n as f64).sqrt() as usize + 200);
        // Rayleigh quotient mu = (x, B x) / (x, (K+M) x)
        let num = crate::exec::sum_f64(n, |i| x[i] * b_diag[i] * x[i]);
        apply_km(&x, &mut tmp);
        let den = dot(&x, &tmp);
        if den <= 0.0 {
            return Err(Error::numerical("indefinite pencil", den));
        }
        let mu = num / den;
        let nx = dot(&x, &x).sqrt();
        for (ui, xi) in u.iter_mut().zip(&x) {
            *ui = xi / nx;
        }
        if (mu - mu_prev).abs() <= 1e-8 * mu.abs() && it >= 2 {
            return Ok(mu);
        }
        mu_prev = mu;
    }
    Err(Error::numerical(
        "trace eigensolve did not converge",
        mu_prev,
    ))
}
