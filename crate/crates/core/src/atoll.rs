//! Segmentation of magnitude grids into atoll components.
//!
//! Thresholding a magnitude field at `delta` yields a superlevel set whose
//! 4-connected components are candidate atolls; bounded holes of a
//! component become its lagoons (regions where the field may dip below the
//! threshold), and the full component domain is the atoll plus its
//! lagoons. Per component the module measures the realized lower bound
//! `delta` on the core, the upper bound `Delta` on magnitude and
//! magnitude-gradient over the domain, a disc/annulus shape fit, and the
//! geometric quantities (depth quantiles, concentration) the certificate
//! machinery consumes.

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{
    distance_transform, gradient_real, lp_norm, DomainMask, Lattice, ParamDomain, RealGrid, TFGrid,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// One atoll: full domain `D`, core `D_+` (domain minus lagoon closures),
/// lagoons, measured bounds, and a shape fit.
#[derive(Debug, Clone)]
pub struct AtollComponent {
    /// Full component domain `D` (core plus lagoons).
    pub domain: DomainMask,
    /// Core `D_+` on which the magnitude stays at or above `lower`.
    pub core: DomainMask,
    /// Lagoons: pairwise disjoint, simply connected holes strictly inside `D`.
    pub lagoons: Vec<DomainMask>,
    /// Measured minimum of the magnitude over the core (the realized delta).
    pub lower: f64,
    /// Measured maximum of magnitude and magnitude-gradient over the domain.
    pub upper: f64,
    /// Disc/annulus fit of the domain, falling back to the raster itself.
    pub fit: ParamDomain,
    /// Relative RMS radial deviation of the fit (0 when Raster).
    pub fit_residual: f64,
    /// Set when this component sits inside another component's hole.
    pub nested: bool,
}

impl AtollComponent {
    /// Assemble a component from explicit masks, measuring `lower` and
    /// `upper` from a magnitude grid. Validates every structural
    /// invariant.
    pub fn from_masks(
        core: DomainMask,
        lagoons: Vec<DomainMask>,
        magnitude: &RealGrid,
    ) -> Result<Self> {
        let mut domain = core.clone();
        for lagoon in &lagoons {
            domain = domain.union(lagoon)?;
        }
        let mut c = AtollComponent {
            domain,
            core,
            lagoons,
            lower: 0.0,
            upper: 0.0,
            fit: ParamDomain::Raster(DomainMask::empty(*magnitude.lattice())),
            fit_residual: 0.0,
            nested: false,
        };
        c.measure_bounds(magnitude)?;
        let (fit, residual) = fit_param_domain_masks(&c.domain, &c.lagoons);
        c.fit = fit;
        c.fit_residual = residual;
        c.validate()?;
        Ok(c)
    }

    fn measure_bounds(&mut self, magnitude: &RealGrid) -> Result<()> {
        magnitude.lattice().check_same(self.core.lattice())?;
        if self.core.is_empty() {
            return Err(Error::domain("atoll core is empty"));
        }
        let vals = magnitude.values();
        let core = self.core.cells();
        let n = vals.len();
        let lower = -exec::max_f64(n, |k| if core[k] { -vals[k] } else { f64::NEG_INFINITY });
        let (gx, gy) = gradient_real(magnitude)?;
        let dom = self.domain.cells();
        let upper = exec::max_f64(n, |k| {
            if dom[k] {
                vals[k].max(gx.values()[k].hypot(gy.values()[k]))
            } else {
                f64::NEG_INFINITY
            }
        });
        self.lower = lower;
        self.upper = upper;
        Ok(())
    }

    /// Check the structural invariants: disjoint lagoons strictly inside
    /// the domain, nonempty core equal to domain minus lagoons, and
    /// `upper >= lower > 0`.
    pub fn validate(&self) -> Result<()> {
        let l = self.core.lattice();
        let mut seen = vec![false; l.len()];
        for lagoon in &self.lagoons {
            l.check_same(lagoon.lattice())?;
            for k in lagoon.true_cells() {
                if seen[k] {
                    return Err(Error::structural("lagoons overlap"));
                }
                seen[k] = true;
                if self.core.cells()[k] {
                    return Err(Error::structural("lagoon overlaps the core"));
                }
                // strict interiority: every neighbor stays inside the domain
                let (i, j) = l.ij(k);
                let mut neighbors = Vec::with_capacity(4);
                if i > 0 { neighbors.push((i - 1, j)); }
                if i + 1 < l.nx { neighbors.push((i + 1, j)); }
                if j > 0 { neighbors.push((i, j - 1)); }
                if j + 1 < l.ny { neighbors.push((i, j + 1)); }
                if neighbors.len() < 4 {
                    return Err(Error::structural("lagoon touches the lattice edge"));
                }
                for (ii, jj) in neighbors {
                    if !self.domain.get(ii, jj) {
                        return Err(Error::structural("lagoon closure leaves the domain"));
                    }
                }
            }
        }
        for k in 0..l.len() {
            let in_domain = self.domain.cells()[k];
            let in_core = self.core.cells()[k];
            let in_lagoon = seen[k];
            if in_core != (in_domain && !in_lagoon) {
                return Err(Error::structural("core is not domain minus lagoons"));
            }
        }
        if self.core.is_empty() {
            return Err(Error::domain("atoll core is empty"));
        }
        if !(self.upper >= self.lower && self.lower > 0.0) {
            return Err(Error::domain(format!(
                "need upper >= lower > 0, got lower={} upper={}",
                self.lower, self.upper
            )));
        }
        Ok(())
    }
}

/// A segmentation of one magnitude grid into atoll components.
#[derive(Debug, Clone)]
pub struct AtollDecomposition {
    pub components: Vec<AtollComponent>,
    pub lattice: Lattice,
    /// Threshold the superlevel set was cut at.
    pub threshold: f64,
}

impl AtollDecomposition {
    /// Union of all component domains.
    pub fn union_domains(&self) -> DomainMask {
        let mut m = DomainMask::empty(self.lattice);
        for c in &self.components {
            m = m.union(&c.domain).expect("same lattice");
        }
        m
    }

    /// Union of all component cores.
    pub fn union_cores(&self) -> DomainMask {
        let mut m = DomainMask::empty(self.lattice);
        for c in &self.components {
            m = m.union(&c.core).expect("same lattice");
        }
        m
    }
}

/// 4-connected component labeling. Returns (labels, count); label 0 means
/// "not selected".
fn label_components(lattice: &Lattice, select: &[bool]) -> (Vec<u32>, u32) {
    let mut labels = vec![0u32; select.len()];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..select.len() {
        if !select[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        stack.push(start);
        while let Some(k) = stack.pop() {
            let (i, j) = lattice.ij(k);
            let mut push = |ii: usize, jj: usize, stack: &mut Vec<usize>| {
                let kk = lattice.idx(ii, jj);
                if select[kk] && labels[kk] == 0 {
                    labels[kk] = next;
                    stack.push(kk);
                }
            };
            if i > 0 {
                push(i - 1, j, &mut stack);
            }
            if i + 1 < lattice.nx {
                push(i + 1, j, &mut stack);
            }
            if j > 0 {
                push(i, j - 1, &mut stack);
            }
            if j + 1 < lattice.ny {
                push(i, j + 1, &mut stack);
            }
        }
    }
    (labels, next)
}

/// Threshold `magnitude` at `delta` and decompose the superlevel set into
/// atoll components. Holes enclosed by a component become its lagoons;
/// below-threshold islands smaller than `min_area` that sit inside a hole
/// are absorbed into the lagoon, larger ones become their own (nested)
/// components and the enclosing hole is dropped. Components with domain
/// area below `min_area` are discarded. Finding nothing is not an error.
pub fn segment(magnitude: &RealGrid, delta: f64, min_area: f64) -> Result<AtollDecomposition> {
    if !(delta > 0.0) {
        return Err(Error::domain("threshold delta must be positive"));
    }
    if magnitude.values().iter().any(|&v| v < 0.0) {
        return Err(Error::precondition("magnitude grid has negative entries"));
    }
    let l = *magnitude.lattice();
    let above: Vec<bool> = magnitude.values().iter().map(|&v| v >= delta).collect();
    let below: Vec<bool> = above.iter().map(|&b| !b).collect();

    let (comp_labels, n_comps) = label_components(&l, &above);
    let (hole_labels, n_holes) = label_components(&l, &below);

    // complement regions touching the lattice edge are outside, not holes
    let mut is_outside = vec![false; n_holes as usize + 1];
    for j in 0..l.ny {
        for i in 0..l.nx {
            if i == 0 || j == 0 || i + 1 == l.nx || j + 1 == l.ny {
                let h = hole_labels[l.idx(i, j)];
                if h != 0 {
                    is_outside[h as usize] = true;
                }
            }
        }
    }

    // adjacency hole -> enclosing superlevel component (None until seen,
    // ambiguous when a hole borders two different components)
    let mut hole_adj: Vec<Option<u32>> = vec![None; n_holes as usize + 1];
    let mut hole_ambiguous = vec![false; n_holes as usize + 1];
    // components reaching the lattice edge or an outside region are top-level
    let mut comp_toplevel = vec![false; n_comps as usize + 1];

    fn record_pair(
        comp: u32,
        hole: u32,
        is_outside: &[bool],
        comp_toplevel: &mut [bool],
        hole_adj: &mut [Option<u32>],
        hole_ambiguous: &mut [bool],
    ) {
        if comp == 0 || hole == 0 {
            return;
        }
        if is_outside[hole as usize] {
            comp_toplevel[comp as usize] = true;
        } else {
            match hole_adj[hole as usize] {
                None => hole_adj[hole as usize] = Some(comp),
                Some(prev) if prev != comp => hole_ambiguous[hole as usize] = true,
                _ => {}
            }
        }
    }

    for j in 0..l.ny {
        for i in 0..l.nx {
            let k = l.idx(i, j);
            let c = comp_labels[k];
            if c != 0 && (i == 0 || j == 0 || i + 1 == l.nx || j + 1 == l.ny) {
                comp_toplevel[c as usize] = true;
            }
            for k2 in [
                (i + 1 < l.nx).then(|| l.idx(i + 1, j)),
                (j + 1 < l.ny).then(|| l.idx(i, j + 1)),
            ]
            .into_iter()
            .flatten()
            {
                record_pair(
                    comp_labels[k],
                    hole_labels[k2],
                    &is_outside,
                    &mut comp_toplevel,
                    &mut hole_adj,
                    &mut hole_ambiguous,
                );
                record_pair(
                    comp_labels[k2],
                    hole_labels[k],
                    &is_outside,
                    &mut comp_toplevel,
                    &mut hole_adj,
                    &mut hole_ambiguous,
                );
            }
        }
    }

    // nested components: superlevel components that never reach the outside
    let min_cells = (min_area / l.cell_area()).round().max(1.0) as usize;
    let mut comp_cells: Vec<Vec<usize>> = vec![Vec::new(); n_comps as usize + 1];
    for (k, &c) in comp_labels.iter().enumerate() {
        if c != 0 {
            comp_cells[c as usize].push(k);
        }
    }
    let mut hole_cells: Vec<Vec<usize>> = vec![Vec::new(); n_holes as usize + 1];
    for (k, &h) in hole_labels.iter().enumerate() {
        if h != 0 && !is_outside[h as usize] {
            hole_cells[h as usize].push(k);
        }
    }

    // a hole is poisoned (cannot be a simply connected lagoon) when a
    // large nested component is adjacent to it
    let mut hole_poisoned = vec![false; n_holes as usize + 1];
    let mut comp_absorbed = vec![false; n_comps as usize + 1];
    for c in 1..=n_comps as usize {
        if comp_toplevel[c] {
            continue;
        }
        // hole this nested component sits in: any adjacent hole region
        let mut host: Option<u32> = None;
        for &k in &comp_cells[c] {
            let (i, j) = l.ij(k);
            for (ii, jj) in [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)] {
                if ii < l.nx && jj < l.ny {
                    let h = hole_labels[l.idx(ii, jj)];
                    if h != 0 && !is_outside[h as usize] {
                        host = Some(h);
                    }
                }
            }
        }
        if comp_cells[c].len() < min_cells {
            comp_absorbed[c] = true; // tiny island: melt it into the lagoon
        } else if let Some(h) = host {
            hole_poisoned[h as usize] = true;
        }
    }

    let mut any_nested = false;
    let mut components = Vec::new();
    for c in 1..=n_comps as usize {
        if comp_absorbed[c] {
            continue;
        }
        let cells = &comp_cells[c];
        if cells.is_empty() {
            continue;
        }
        let mut core = vec![false; l.len()];
        for &k in cells {
            core[k] = true;
        }
        // collect this component's lagoons
        let mut lagoons = Vec::new();
        for h in 1..=n_holes as usize {
            if hole_adj[h] == Some(c as u32)
                && !hole_ambiguous[h]
                && !hole_poisoned[h]
                && !hole_cells[h].is_empty()
            {
                let mut lag = vec![false; l.len()];
                for &k in &hole_cells[h] {
                    lag[k] = true;
                }
                // absorb tiny islands melted inside this hole
                for c2 in 1..=n_comps as usize {
                    if comp_absorbed[c2] {
                        let inside = comp_cells[c2].iter().any(|&k| {
                            let (i, j) = l.ij(k);
                            [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)]
                                .into_iter()
                                .any(|(ii, jj)| {
                                    ii < l.nx && jj < l.ny && hole_labels[l.idx(ii, jj)] == h as u32
                                })
                        });
                        if inside {
                            for &k in &comp_cells[c2] {
                                lag[k] = true;
                            }
                        }
                    }
                }
                lagoons.push(DomainMask::new(l, lag)?);
            }
        }
        let core_mask = DomainMask::new(l, core)?;
        let nested = !comp_toplevel[c];
        any_nested |= nested;

        let mut domain = core_mask.clone();
        for lagoon in &lagoons {
            domain = domain.union(lagoon)?;
        }
        if domain.area() < min_area {
            continue;
        }
        let mut comp = AtollComponent::from_masks(core_mask, lagoons, magnitude)?;
        comp.nested = nested;
        components.push(comp);
    }
    let _ = any_nested;

    // deterministic order: by first cell index of the domain
    components.sort_by_key(|c| c.domain.true_cells().first().copied().unwrap_or(usize::MAX));

    Ok(AtollDecomposition {
        components,
        lattice: l,
        threshold: delta,
    })
}

/// `t`-quantile of the distance-to-boundary over the masked cells: the
/// smallest depth `d` such that at least `t` of the domain's area lies at
/// depth `<= d`. This is the inf-sup of boundary distance over subsets of
/// measure `t|D|` collecting the shallowest cells.
pub fn depth_quantile(mask: &DomainMask, t: f64) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::domain("depth quantile of an empty mask"));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::domain("t must lie in (0, 1]"));
    }
    let dt = distance_transform(mask)?;
    let mut depths: Vec<f64> = mask.true_cells().iter().map(|&k| dt.values()[k]).collect();
    depths.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = depths.len();
    let k = ((t * n as f64).ceil() as usize).clamp(1, n);
    Ok(depths[k - 1])
}

/// Energy of `f` outside the mask: `(int_{lattice \ mask} |f|^2)^{1/2}`.
/// The lattice is the proxy for the whole plane; energy beyond it is the
/// caller's responsibility.
pub fn concentration(f: &TFGrid, mask: &DomainMask) -> Result<f64> {
    f.lattice().check_same(mask.lattice())?;
    let outside = DomainMask::new(
        *mask.lattice(),
        mask.cells().iter().map(|&c| !c).collect(),
    )?;
    lp_norm(f, &outside, 2.0)
}

/// Least-squares disc/annulus fit of a component (public operation form).
pub fn fit_param_domain(component: &AtollComponent) -> (ParamDomain, f64) {
    fit_param_domain_masks(&component.domain, &component.lagoons)
}

fn centroid(mask: &DomainMask) -> Option<Complex64> {
    let cells = mask.true_cells();
    if cells.is_empty() {
        return None;
    }
    let l = mask.lattice();
    let mut sx = 0.0;
    let mut sy = 0.0;
    for &k in &cells {
        let (i, j) = l.ij(k);
        sx += l.x(i);
        sy += l.y(j);
    }
    let n = cells.len() as f64;
    Some(Complex64::new(sx / n, sy / n))
}

/// Relative RMS deviation of boundary-cell radii from their mean.
fn radial_residual(mask: &DomainMask, center: Complex64) -> (f64, f64) {
    let l = mask.lattice();
    let radii: Vec<f64> = mask
        .boundary_cells()
        .iter()
        .map(|&k| {
            let (i, j) = l.ij(k);
            (l.z(i, j) - center).norm()
        })
        .collect();
    if radii.is_empty() {
        return (0.0, f64::INFINITY);
    }
    let mean = radii.iter().sum::<f64>() / radii.len() as f64;
    let var = radii.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / radii.len() as f64;
    (mean, var.sqrt())
}

/// Fit a disc (no lagoons) or a concentric annulus (exactly one lagoon),
/// falling back to the raster mask when the radial residual exceeds 10%
/// of the outer radius. Radii come from cell areas, which converge faster
/// than boundary-cell radii.
fn fit_param_domain_masks(domain: &DomainMask, lagoons: &[DomainMask]) -> (ParamDomain, f64) {
    let raster = || ParamDomain::Raster(domain.clone());
    let Some(center) = centroid(domain) else {
        return (raster(), 0.0);
    };
    match lagoons.len() {
        0 => {
            let radius = (domain.area() / std::f64::consts::PI).sqrt();
            let (_, rms) = radial_residual(domain, center);
            if radius > 0.0 && rms <= 0.10 * radius {
                (
                    ParamDomain::Disc { center: (center.re, center.im), radius },
                    rms / radius,
                )
            } else {
                (raster(), if radius > 0.0 { rms / radius } else { 0.0 })
            }
        }
        1 => {
            let outer = (domain.area() / std::f64::consts::PI).sqrt();
            let inner = (lagoons[0].area() / std::f64::consts::PI).sqrt();
            // outer rim residual: domain boundary cells
            let (_, rms_outer) = radial_residual(domain, center);
            let (_, rms_inner) = radial_residual(&lagoons[0], center);
            let rms = rms_outer.max(rms_inner);
            if outer > inner && inner >= 0.0 && rms <= 0.10 * outer {
                (
                    ParamDomain::Annulus { center: (center.re, center.im), inner, outer },
                    rms / outer,
                )
            } else {
                (raster(), if outer > 0.0 { rms / outer } else { 0.0 })
            }
        }
        _ => (raster(), 0.0),
    }
}

/// Fit one lagoon mask by a disc: area-based radius when round enough,
/// otherwise the minimal enclosing circle of its cell centers (a
/// conservative over-estimate suitable for upper bounds).
pub fn fit_lagoon_disc(lagoon: &DomainMask) -> ParamDomain {
    if let Some(center) = centroid(lagoon) {
        let radius = (lagoon.area() / std::f64::consts::PI).sqrt();
        let (_, rms) = radial_residual(lagoon, center);
        if radius > 0.0 && rms <= 0.10 * radius {
            return ParamDomain::Disc { center: (center.re, center.im), radius };
        }
        let (c, r) = enclosing_circle(lagoon);
        return ParamDomain::Disc { center: (c.re, c.im), radius: r };
    }
    ParamDomain::Raster(lagoon.clone())
}

/// Minimal enclosing circle of the mask's cell centers (Welzl).
pub fn enclosing_circle(mask: &DomainMask) -> (Complex64, f64) {
    let l = mask.lattice();
    let mut pts: Vec<Complex64> = mask
        .true_cells()
        .iter()
        .map(|&k| {
            let (i, j) = l.ij(k);
            l.z(i, j)
        })
        .collect();
    // deterministic shuffle for expected-linear behavior
    let mut state = 0x9e3779b97f4a7c15u64;
    for i in (1..pts.len()).rev() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let j = (state % (i as u64 + 1)) as usize;
        pts.swap(i, j);
    }
    welzl(&pts)
}

fn circle_from2(a: Complex64, b: Complex64) -> (Complex64, f64) {
    let c = (a + b) / 2.0;
    (c, (a - c).norm())
}

fn circle_from3(a: Complex64, b: Complex64, c: Complex64) -> Option<(Complex64, f64)> {
    let d = 2.0 * (a.re * (b.im - c.im) + b.re * (c.im - a.im) + c.re * (a.im - b.im));
    if d.abs() < 1e-18 {
        return None;
    }
    let ux = (a.norm_sqr() * (b.im - c.im) + b.norm_sqr() * (c.im - a.im)
        + c.norm_sqr() * (a.im - b.im))
        / d;
    let uy = (a.norm_sqr() * (c.re - b.re) + b.norm_sqr() * (a.re - c.re)
        + c.norm_sqr() * (b.re - a.re))
        / d;
    let center = Complex64::new(ux, uy);
    Some((center, (a - center).norm()))
}

fn in_circle(p: Complex64, c: &(Complex64, f64)) -> bool {
    (p - c.0).norm() <= c.1 + 1e-10
}

fn welzl(pts: &[Complex64]) -> (Complex64, f64) {
    let mut c = (Complex64::new(0.0, 0.0), 0.0);
    let mut have = false;
    for (i, &p) in pts.iter().enumerate() {
        if have && in_circle(p, &c) {
            continue;
        }
        c = (p, 0.0);
        have = true;
        for (j, &q) in pts.iter().enumerate().take(i) {
            if in_circle(q, &c) {
                continue;
            }
            c = circle_from2(p, q);
            for &r in pts.iter().take(j) {
                if in_circle(r, &c) {
                    continue;
                }
                c = circle_from3(p, q, r).unwrap_or_else(|| {
                    // collinear: widest pair wins
                    let cands = [circle_from2(p, q), circle_from2(p, r), circle_from2(q, r)];
                    cands
                        .into_iter()
                        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                        .unwrap()
                });
            }
        }
    }
    c
}

// --- decomposition manifest -------------------------------------------------

/// Serialized form of one component inside a decomposition directory.
#[derive(Debug, Serialize, Deserialize)]
pub struct ComponentManifest {
    pub id: usize,
    pub domain_mask: String,
    pub core_mask: String,
    pub lagoon_masks: Vec<String>,
    pub delta: f64,
    #[serde(rename = "Delta")]
    pub delta_cap: f64,
    pub fit: Option<FitManifest>,
    pub fit_residual: f64,
    pub nested: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FitManifest {
    pub kind: String,
    pub center: (f64, f64),
    pub inner: f64,
    pub outer: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DecompositionManifest {
    pub threshold: f64,
    pub lattice: Lattice,
    pub components: Vec<ComponentManifest>,
}

/// Write `decomposition.json` plus one TFG bool file per mask into `dir`.
pub fn write_decomposition(dir: &std::path::Path, dec: &AtollDecomposition) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = DecompositionManifest {
        threshold: dec.threshold,
        lattice: dec.lattice,
        components: Vec::new(),
    };
    for (id, c) in dec.components.iter().enumerate() {
        let dname = format!("component_{id:02}_domain.tfg");
        let cname = format!("component_{id:02}_core.tfg");
        crate::tfg::save_mask(dir.join(&dname), &c.domain)?;
        crate::tfg::save_mask(dir.join(&cname), &c.core)?;
        let mut lagoon_masks = Vec::new();
        for (li, lagoon) in c.lagoons.iter().enumerate() {
            let lname = format!("component_{id:02}_lagoon_{li}.tfg");
            crate::tfg::save_mask(dir.join(&lname), lagoon)?;
            lagoon_masks.push(lname);
        }
        let fit = match &c.fit {
            ParamDomain::Disc { center, radius } => Some(FitManifest {
                kind: "disc".into(),
                center: *center,
                inner: 0.0,
                outer: *radius,
            }),
            ParamDomain::Annulus { center, inner, outer } => Some(FitManifest {
                kind: "annulus".into(),
                center: *center,
                inner: *inner,
                outer: *outer,
            }),
            ParamDomain::Raster(_) => None,
        };
        manifest.components.push(ComponentManifest {
            id,
            domain_mask: dname,
            core_mask: cname,
            lagoon_masks,
            delta: c.lower,
            delta_cap: c.upper,
            fit,
            fit_residual: c.fit_residual,
            nested: c.nested,
        });
    }
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::format(e.to_string()))?;
    std::fs::write(dir.join("decomposition.json"), json)?;
    Ok(())
}

/// Load a decomposition written by [`write_decomposition`]. Bounds are
/// taken from the manifest; masks from the referenced TFG files.
pub fn read_decomposition(dir: &std::path::Path) -> Result<AtollDecomposition> {
    let json = std::fs::read_to_string(dir.join("decomposition.json"))?;
    let manifest: DecompositionManifest =
        serde_json::from_str(&json).map_err(|e| Error::format(e.to_string()))?;
    let mut components = Vec::new();
    for cm in &manifest.components {
        let domain = crate::tfg::load_mask(dir.join(&cm.domain_mask))?;
        let core = crate::tfg::load_mask(dir.join(&cm.core_mask))?;
        let mut lagoons = Vec::new();
        for lm in &cm.lagoon_masks {
            lagoons.push(crate::tfg::load_mask(dir.join(lm))?);
        }
        let fit = match &cm.fit {
            Some(f) if f.kind == "disc" => ParamDomain::Disc {
                center: f.center,
                radius: f.outer,
            },
            Some(f) if f.kind == "annulus" => ParamDomain::Annulus {
                center: f.center,
                inner: f.inner,
                outer: f.outer,
            },
            _ => ParamDomain::Raster(domain.clone()),
        };
        components.push(AtollComponent {
            domain,
            core,
            lagoons,
            lower: cm.delta,
            upper: cm.delta_cap,
            fit,
            fit_residual: cm.fit_residual,
            nested: cm.nested,
        });
    }
    Ok(AtollDecomposition {
        components,
        lattice: manifest.lattice,
        threshold: manifest.threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid_from(f: impl Fn(Complex64) -> f64 + Sync, h: f64, ext: f64) -> RealGrid {
        let l = Lattice::from_ranges(-ext, ext, h, -ext, ext, h).unwrap();
        RealGrid::from_fn(l, f).unwrap()
    }

    #[test]
    fn single_gaussian_bump_is_one_component_no_lagoons() {
        let mag = grid_from(|z| (-PI * z.norm_sqr()).exp(), 0.02, 2.0);
        let dec = segment(&mag, 0.5, 0.01).unwrap();
        assert_eq!(dec.components.len(), 1);
        let c = &dec.components[0];
        assert!(c.lagoons.is_empty());
        assert!((c.lower - 0.5).abs() < 0.02, "delta {}", c.lower);
        assert!(c.upper >= 1.0 - 1e-6);
        assert!(matches!(c.fit, ParamDomain::Disc { .. }));
        c.validate().unwrap();
    }

    #[test]
    fn vanishing_center_gives_one_lagoon() {
        // radial profile |z|^2 e^{-pi |z|^2} vanishes at the origin, so the
        // superlevel set is an annulus and the hole becomes a lagoon
        let mag = grid_from(|z| z.norm_sqr() * (-PI * z.norm_sqr()).exp(), 0.02, 2.0);
        let peak = mag.max_value();
        let dec = segment(&mag, peak / 2.0, 0.01).unwrap();
        assert_eq!(dec.components.len(), 1);
        let c = &dec.components[0];
        assert_eq!(c.lagoons.len(), 1);
        assert!(matches!(c.fit, ParamDomain::Annulus { .. }));
        // the lagoon contains the origin
        let l = c.lagoons[0].lattice();
        let (i0, j0) = (l.nx / 2, l.ny / 2);
        assert!(c.lagoons[0].get(i0, j0) || {
            // origin may fall between cells; accept any of the 4 neighbors
            c.lagoons[0].get(i0 + 1, j0) || c.lagoons[0].get(i0, j0 + 1)
        });
        c.validate().unwrap();
    }

    #[test]
    fn two_separated_bumps_give_two_components() {
        let mag = grid_from(
            |z| {
                (-PI * (z - Complex64::new(-1.2, 0.0)).norm_sqr()).exp()
                    + (-PI * (z + Complex64::new(-1.2, 0.0)).norm_sqr()).exp()
            },
            0.02,
            2.5,
        );
        let dec = segment(&mag, 0.4, 0.01).unwrap();
        assert_eq!(dec.components.len(), 2);
        for c in &dec.components {
            c.validate().unwrap();
        }
    }

    #[test]
    fn empty_decomposition_is_not_an_error() {
        let mag = grid_from(|_| 0.1, 0.1, 1.0);
        let dec = segment(&mag, 0.5, 0.01).unwrap();
        assert!(dec.components.is_empty());
    }

    #[test]
    fn segmentation_invariants_on_random_smooth_fields() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..8 {
            let bumps: Vec<(Complex64, f64)> = (0..rng.gen_range(1..5))
                .map(|_| {
                    (
                        Complex64::new(rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2)),
                        rng.gen_range(0.4..1.4),
                    )
                })
                .collect();
            let mag = grid_from(
                |z| {
                    bumps
                        .iter()
                        .map(|&(c, a)| a * (-PI * (z - c).norm_sqr()).exp())
                        .sum()
                },
                0.04,
                2.5,
            );
            let delta = 0.35 * mag.max_value();
            let dec = segment(&mag, delta, 0.02).unwrap();
            for c in &dec.components {
                c.validate().unwrap();
                assert!(c.lower >= delta);
                // domains pairwise disjoint
            }
            let mut seen = vec![false; dec.lattice.len()];
            for c in &dec.components {
                for k in c.domain.true_cells() {
                    assert!(!seen[k], "component domains overlap");
                    seen[k] = true;
                }
            }
        }
    }

    #[test]
    fn depth_quantile_disc_bound() {
        // t = 1/2 depth of a disc is at least (1 - 1/sqrt(2)) r, up to a cell
        let h = 0.02;
        let l = Lattice::from_ranges(-1.3, 1.3, h, -1.3, 1.3, h).unwrap();
        let m = ParamDomain::disc(Complex64::new(0.0, 0.0), 1.0)
            .unwrap()
            .rasterize(&l);
        let s = depth_quantile(&m, 0.5).unwrap();
        let c = 1.0 - 1.0 / 2f64.sqrt();
        assert!(s >= c - h, "s={s}, bound={c}");
    }

    #[test]
    fn depth_quantile_annulus_exact_value() {
        // exact half-measure depth of an annulus: the region within depth d
        // of either rim has area 2 pi d (r+s), so the half-area depth is
        // (s-r)/4 (not (1-1/sqrt(2))(s-r): that constant accounts for the
        // outer rim only)
        let h = 0.02;
        let l = Lattice::from_ranges(-2.3, 2.3, h, -2.3, 2.3, h).unwrap();
        let m = ParamDomain::annulus(Complex64::new(0.0, 0.0), 1.0, 2.0)
            .unwrap()
            .rasterize(&l);
        let s = depth_quantile(&m, 0.5).unwrap();
        assert!((s - 0.25).abs() <= 2.0 * h, "s={s}, exact=0.25");
    }

    #[test]
    fn depth_quantile_full_rectangle_t1_is_max_depth() {
        let l = Lattice::new(0.0, 0.0, 0.1, 0.1, 21, 21).unwrap();
        let m = DomainMask::full(l);
        let s = depth_quantile(&m, 1.0).unwrap();
        let dt = distance_transform(&m).unwrap();
        let max = dt.values().iter().copied().fold(0.0f64, f64::max);
        assert_eq!(s, max);
    }

    #[test]
    fn depth_quantile_monotone_and_scales() {
        let h = 0.02;
        let l = Lattice::from_ranges(-1.3, 1.3, h, -1.3, 1.3, h).unwrap();
        let m = ParamDomain::disc(Complex64::new(0.0, 0.0), 1.0)
            .unwrap()
            .rasterize(&l);
        let mut prev = 0.0;
        for t in [0.2, 0.4, 0.6, 0.8, 1.0] {
            let s = depth_quantile(&m, t).unwrap();
            assert!(s >= prev);
            prev = s;
        }
        // scaling: double the disc on a doubled lattice
        let l2 = Lattice::from_ranges(-2.6, 2.6, 2.0 * h, -2.6, 2.6, 2.0 * h).unwrap();
        let m2 = ParamDomain::disc(Complex64::new(0.0, 0.0), 2.0)
            .unwrap()
            .rasterize(&l2);
        let s1 = depth_quantile(&m, 0.5).unwrap();
        let s2 = depth_quantile(&m2, 0.5).unwrap();
        assert!((s2 - 2.0 * s1).abs() <= 2.0 * (2.0 * h), "s1={s1} s2={s2}");
    }

    #[test]
    fn concentration_whole_lattice_zero_and_empty_gives_norm() {
        let l = Lattice::from_ranges(-1.0, 1.0, 0.1, -1.0, 1.0, 0.1).unwrap();
        let g = TFGrid::from_fn(l, |z| Complex64::new(z.re, z.im)).unwrap();
        assert_eq!(concentration(&g, &DomainMask::full(l)).unwrap(), 0.0);
        let full_norm = lp_norm(&g, &DomainMask::full(l), 2.0).unwrap();
        let eps = concentration(&g, &DomainMask::empty(l)).unwrap();
        assert!((eps - full_norm).abs() < 1e-12);
    }

    #[test]
    fn concentration_antimonotone_in_mask() {
        let l = Lattice::from_ranges(-2.0, 2.0, 0.05, -2.0, 2.0, 0.05).unwrap();
        let g = TFGrid::from_fn(l, |z| Complex64::new((-z.norm_sqr()).exp(), 0.0)).unwrap();
        let small = ParamDomain::disc(Complex64::new(0.0, 0.0), 0.5)
            .unwrap()
            .rasterize(&l);
        let big = ParamDomain::disc(Complex64::new(0.0, 0.0), 1.5)
            .unwrap()
            .rasterize(&l);
        assert!(concentration(&g, &big).unwrap() <= concentration(&g, &small).unwrap());
    }

    #[test]
    fn gaussian_bump_is_concentrated_in_radius_three() {
        // time-frequency energy outside B_3 around the atom center is tiny
        let l = Lattice::from_ranges(-4.0, 4.0, 0.1, -4.0, 4.0, 0.1).unwrap();
        let g = TFGrid::from_fn(l, |z| {
            Complex64::new(
                std::f64::consts::FRAC_1_SQRT_2 * (-PI * z.norm_sqr() / 2.0).exp(),
                0.0,
            )
        })
        .unwrap();
        let b3 = ParamDomain::disc(Complex64::new(0.0, 0.0), 3.0)
            .unwrap()
            .rasterize(&l);
        let eps = concentration(&g, &b3).unwrap();
        let total = lp_norm(&g, &DomainMask::full(l), 2.0).unwrap();
        assert!(eps / total < 1e-4, "eps/total = {:.3e}", eps / total);
    }

    #[test]
    fn fit_recovers_disc_and_annulus() {
        let h = 0.02;
        let l = Lattice::from_ranges(-2.5, 3.5, h, -2.5, 3.5, h).unwrap();
        let mag = RealGrid::from_fn(l, |z| {
            let d = (z - Complex64::new(1.0, 1.0)).norm();
            if d <= 2.0 { 1.0 } else { 0.05 }
        })
        .unwrap();
        let dec = segment(&mag, 0.5, 0.1).unwrap();
        assert_eq!(dec.components.len(), 1);
        match dec.components[0].fit {
            ParamDomain::Disc { center, radius } => {
                assert!((center.0 - 1.0).abs() < h && (center.1 - 1.0).abs() < h);
                assert!((radius - 2.0).abs() < h, "radius {radius}");
            }
            _ => panic!("expected a disc fit"),
        }

        let l2 = Lattice::from_ranges(-2.5, 2.5, h, -2.5, 2.5, h).unwrap();
        let mag2 = RealGrid::from_fn(l2, |z| {
            let d = z.norm();
            if d > 1.0 && d <= 2.0 { 1.0 } else { 0.05 }
        })
        .unwrap();
        let dec2 = segment(&mag2, 0.5, 0.1).unwrap();
        assert_eq!(dec2.components.len(), 1);
        match dec2.components[0].fit {
            ParamDomain::Annulus { center, inner, outer } => {
                assert!(center.0.abs() < h && center.1.abs() < h);
                assert!((inner - 1.0).abs() < 2.0 * h, "inner {inner}");
                assert!((outer - 2.0).abs() < 2.0 * h, "outer {outer}");
            }
            _ => panic!("expected an annulus fit"),
        }
    }

    #[test]
    fn l_shape_falls_back_to_raster() {
        let h = 0.05;
        let l = Lattice::from_ranges(-2.0, 2.0, h, -2.0, 2.0, h).unwrap();
        let mag = RealGrid::from_fn(l, |z| {
            let inside = (z.re.abs() <= 1.5 && z.im.abs() <= 0.3)
                || (z.re.abs() <= 0.3 && z.im.abs() <= 1.5);
            if inside { 1.0 } else { 0.05 }
        })
        .unwrap();
        let dec = segment(&mag, 0.5, 0.1).unwrap();
        assert_eq!(dec.components.len(), 1);
        assert!(matches!(dec.components[0].fit, ParamDomain::Raster(_)));
    }

    #[test]
    fn measure_bound_on_superlevel_areas() {
        // the measure of {|G| |D|^{1/p} <= C ||G||_p} is at least |D| (1 - C^{-p})
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let l = Lattice::from_ranges(-1.0, 1.0, 0.05, -1.0, 1.0, 0.05).unwrap();
        let mask = ParamDomain::disc(Complex64::new(0.0, 0.0), 1.0)
            .unwrap()
            .rasterize(&l);
        let p = 2.0;
        for _ in 0..20 {
            let vals: Vec<f64> = (0..l.len()).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
            let g = RealGrid::new(l, vals).unwrap();
            let norm = lp_norm(&g, &mask, p).unwrap();
            let area = mask.area();
            for c in [1.2, 2.0, 5.0] {
                let good = mask
                    .true_cells()
                    .iter()
                    .filter(|&&k| g.values()[k].abs() * area.powf(1.0 / p) <= c * norm)
                    .count() as f64
                    * l.cell_area();
                let bound = area * (1.0 - c.powf(-p));
                let slack = l.dx * l.dy * (2.0 / l.dx); // one cell row
                assert!(good >= bound - slack, "good={good} bound={bound}");
            }
        }
    }

    #[test]
    fn manifest_roundtrip() {
        let mag = grid_from(|z| z.norm_sqr() * (-PI * z.norm_sqr()).exp(), 0.04, 2.0);
        let peak = mag.max_value();
        let dec = segment(&mag, peak / 2.0, 0.01).unwrap();
        let dir = std::env::temp_dir().join(format!("atoll_manifest_test_{}", std::process::id()));
        write_decomposition(&dir, &dec).unwrap();
        let dec2 = read_decomposition(&dir).unwrap();
        assert_eq!(dec.components.len(), dec2.components.len());
        assert_eq!(
            dec.components[0].domain.cells(),
            dec2.components[0].domain.cells()
        );
        assert_eq!(dec.components[0].lower, dec2.components[0].lower);
        std::fs::remove_dir_all(&dir).ok();
    }
}
