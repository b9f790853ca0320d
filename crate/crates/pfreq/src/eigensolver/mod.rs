//! Discrete principal frequencies on polygons: minimize the conforming P1
//! Rayleigh quotient with exact per-triangle gradients and centroid-value
//! denominator quadrature. By Jensen the one-point rule underestimates the
//! denominator, so every discrete quotient (minimized or not) dominates its
//! continuum counterpart; lower-bound certificates lean on this direction.

pub mod mesh;
mod sparse;

pub use mesh::{triangulate, triangulate_mixed, MeshError, NodeMark, TriangleMesh};

use crate::geometry::{dot2, ConvexPolygon, Point};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("denominator quadrature sum vanished")]
    ZeroDenominator,
    #[error("inadmissible exponent pair: {0}")]
    InadmissibleExponent(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid field: {0}")]
    BadField(String),
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
}

/// Exponents, smoothing schedule, iteration budget, and restart seeding.
/// `q = None` means q equals p. `h = None` means diameter/64.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub p: f64,
    pub q: Option<f64>,
    pub h: Option<f64>,
    /// Smoothing levels relative to the domain diameter, largest first.
    pub eps_schedule: Vec<f64>,
    /// Outer iteration budget per restart, across all stages.
    pub max_iters: usize,
    /// Relative quotient-change stopping tolerance at the final stage.
    pub tol: f64,
    pub seed: u64,
    pub restarts: usize,
}

impl SolverConfig {
    pub fn new(p: f64) -> SolverConfig {
        SolverConfig {
            p,
            q: None,
            h: None,
            eps_schedule: vec![1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8],
            max_iters: 2000,
            tol: 1e-9,
            seed: 0,
            restarts: 3,
        }
    }

    pub fn with_h(mut self, h: f64) -> SolverConfig {
        self.h = Some(h);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> SolverConfig {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<(), SolverError> {
        if !self.p.is_finite() {
            return Err(SolverError::BadConfig(format!("p = {}", self.p)));
        }
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(SolverError::BadConfig("empty iteration budget".into()));
        }
        if !(self.tol > 0.0) {
            return Err(SolverError::BadConfig(format!("tol = {}", self.tol)));
        }
        if self.eps_schedule.is_empty()
            || self.eps_schedule.iter().any(|&e| !(e.is_finite() && e > 0.0))
            || self.eps_schedule.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(SolverError::BadConfig(
                "eps schedule must be positive and strictly decreasing".into(),
            ));
        }
        Ok(())
    }

    fn clamped_p(&self) -> f64 {
        self.p.clamp(1.05, 50.0)
    }
}

/// Nodal values with Dirichlet entries pinned to zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteField {
    values: Vec<f64>,
}

impl DiscreteField {
    pub fn new(mesh: &TriangleMesh, values: Vec<f64>) -> Result<DiscreteField, SolverError> {
        if values.len() != mesh.nodes().len() {
            return Err(SolverError::BadField(format!(
                "{} values for {} nodes",
                values.len(),
                mesh.nodes().len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::BadField("non-finite value".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if mesh.marks()[i] == NodeMark::Dirichlet && v != 0.0 {
                return Err(SolverError::BadField(format!(
                    "Dirichlet node {i} carries nonzero value {v}"
                )));
            }
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(SolverError::BadField("identically zero".into()));
        }
        Ok(DiscreteField { values })
    }

    /// Seeded random field on the free nodes, mixed sign.
    pub fn random<R: Rng + ?Sized>(mesh: &TriangleMesh, rng: &mut R) -> DiscreteField {
        let values = mesh
            .marks()
            .iter()
            .map(|&m| {
                if m == NodeMark::Free {
                    rng.random_range(-1.0..1.0)
                } else {
                    0.0
                }
            })
            .collect();
        DiscreteField { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    /// Raw quotient recomputed at the minimizer, no smoothing.
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub minimizer: DiscreteField,
}

// ---------------------------------------------------------------------------
// P1 space: per-triangle areas, basis gradients, free-node numbering,
// and a reusable CSR assembly pattern for the weighted stiffness.

const NO_SLOT: usize = usize::MAX;

struct FemSpace {
    areas: Vec<f64>,
    grads: Vec<[[f64; 2]; 3]>,
    free: Vec<usize>,
    node2free: Vec<usize>,
    pattern: sparse::Csr,
    tri_slots: Vec<[[usize; 3]; 3]>,
    diameter: f64,
}

impl FemSpace {
    fn new(mesh: &TriangleMesh) -> FemSpace {
        let nodes = mesh.nodes();
        let tris = mesh.triangles();
        let mut areas = Vec::with_capacity(tris.len());
        let mut grads = Vec::with_capacity(tris.len());
        for t in tris {
            let (a, b, c) = (nodes[t[0]], nodes[t[1]], nodes[t[2]]);
            let area = mesh::tri_area(a, b, c);
            areas.push(area);
            let g = |p: Point, q: Point| [(p[1] - q[1]) / (2.0 * area), (q[0] - p[0]) / (2.0 * area)];
            grads.push([g(b, c), g(c, a), g(a, b)]);
        }
        let free = mesh.free_nodes();
        let mut node2free = vec![NO_SLOT; nodes.len()];
        for (fi, &n) in free.iter().enumerate() {
            node2free[n] = fi;
        }
        // sparsity pattern over free nodes
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
        for t in tris {
            for a in 0..3 {
                for b in 0..3 {
                    let (fa, fb) = (node2free[t[a]], node2free[t[b]]);
                    if fa != NO_SLOT && fb != NO_SLOT {
                        triplets.push((fa, fb, 0.0));
                    }
                }
            }
        }
        let pattern = sparse::Csr::from_triplets(free.len(), &mut triplets);
        let slot = |fa: usize, fb: usize| -> usize {
            let row = &pattern.indices[pattern.indptr[fa]..pattern.indptr[fa + 1]];
            pattern.indptr[fa] + row.binary_search(&fb).expect("pattern slot")
        };
        let mut tri_slots = Vec::with_capacity(tris.len());
        for t in tris {
            let mut s = [[NO_SLOT; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    let (fa, fb) = (node2free[t[a]], node2free[t[b]]);
                    if fa != NO_SLOT && fb != NO_SLOT {
                        s[a][b] = slot(fa, fb);
                    }
                }
            }
            tri_slots.push(s);
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in nodes {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let diameter = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
        FemSpace { areas, grads, free, node2free, pattern, tri_slots, diameter }
    }

    #[inline]
    fn grad_u(&self, tris: &[[usize; 3]], u: &[f64], t: usize) -> [f64; 2] {
        let tri = tris[t];
        let g = &self.grads[t];
        let mut out = [0.0, 0.0];
        for k in 0..3 {
            out[0] += u[tri[k]] * g[k][0];
            out[1] += u[tri[k]] * g[k][1];
        }
        out
    }

    /// Raw quotient N / S^(p/q) with N = sum A |grad u|^p and
    /// S = sum A |centroid avg|^q. Returns (quotient, N, S).
    fn raw(&self, tris: &[[usize; 3]], u: &[f64], p: f64, q: f64) -> (f64, f64, f64) {
        let (mut n, mut s) = (0.0, 0.0);
        for t in 0..tris.len() {
            let g = self.grad_u(tris, u, t);
            let gn = g[0].hypot(g[1]);
            let m = (u[tris[t][0]] + u[tris[t][1]] + u[tris[t][2]]) / 3.0;
            n += self.areas[t] * gn.powf(p);
            s += self.areas[t] * m.abs().powf(q);
        }
        (n / s.powf(p / q), n, s)
    }

    fn smoothed(&self, tris: &[[usize; 3]], u: &[f64], p: f64, q: f64, eps: f64) -> (f64, f64, f64) {
        let (mut n, mut s) = (0.0, 0.0);
        for t in 0..tris.len() {
            let g = self.grad_u(tris, u, t);
            let g2 = g[0] * g[0] + g[1] * g[1];
            let m = (u[tris[t][0]] + u[tris[t][1]] + u[tris[t][2]]) / 3.0;
            n += self.areas[t] * (g2 + eps * eps).powf(0.5 * p);
            s += self.areas[t] * m.abs().powf(q);
        }
        (n / s.powf(p / q), n, s)
    }

    /// Gradient of the smoothed quotient with respect to free values, and
    /// the per-triangle weights (|grad u|^2 + eps^2)^((p-2)/2) for the
    /// preconditioner. grad R = (grad N - (p/q)(N/S) grad S) / S^(p/q).
    fn grad_smoothed(
        &self,
        tris: &[[usize; 3]],
        u: &[f64],
        p: f64,
        q: f64,
        eps: f64,
        weights: &mut [f64],
        out: &mut [f64],
    ) -> (f64, f64, f64) {
        let nfree = self.free.len();
        let mut gn = vec![0.0; nfree];
        let mut gs = vec![0.0; nfree];
        let (mut nsum, mut ssum) = (0.0, 0.0);
        for t in 0..tris.len() {
            let g = self.grad_u(tris, u, t);
            let g2 = g[0] * g[0] + g[1] * g[1];
            let w = (g2 + eps * eps).powf(0.5 * p - 1.0);
            weights[t] = w;
            let m = (u[tris[t][0]] + u[tris[t][1]] + u[tris[t][2]]) / 3.0;
            nsum += self.areas[t] * (g2 + eps * eps).powf(0.5 * p);
            ssum += self.areas[t] * m.abs().powf(q);
            let mq = q * m.abs().powf(q - 1.0) * m.signum() / 3.0;
            for k in 0..3 {
                let f = self.node2free[tris[t][k]];
                if f == NO_SLOT {
                    continue;
                }
                gn[f] += p * self.areas[t] * w * dot2(g, self.grads[t][k]);
                gs[f] += self.areas[t] * mq;
            }
        }
        let r = nsum / ssum.powf(p / q);
        let c = (p / q) * (nsum / ssum);
        let denom = ssum.powf(p / q);
        for i in 0..nfree {
            out[i] = (gn[i] - c * gs[i]) / denom;
        }
        (r, nsum, ssum)
    }

    /// Weighted stiffness over free nodes into the reusable pattern.
    fn assemble(&self, weights: &[f64], data: &mut [f64]) {
        data.iter_mut().for_each(|v| *v = 0.0);
        for t in 0..self.tri_slots.len() {
            let w = weights[t].max(1e-300);
            let a = self.areas[t];
            for i in 0..3 {
                for j in 0..3 {
                    let s = self.tri_slots[t][i][j];
                    if s != NO_SLOT {
                        data[s] += w * a * dot2(self.grads[t][i], self.grads[t][j]);
                    }
                }
            }
        }
    }
}

/// Per-triangle quadrature view of a field: area, P1 gradient norm,
/// centroid average, centroid position. Integral checks downstream
/// (pointwise Hardy sums, custom functionals) build on this.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleSample {
    pub area: f64,
    pub grad_norm: f64,
    pub mean: f64,
    pub centroid: Point,
}

pub fn per_triangle(
    mesh: &TriangleMesh,
    field: &DiscreteField,
) -> Result<Vec<TriangleSample>, SolverError> {
    if field.values.len() != mesh.nodes().len() {
        return Err(SolverError::BadField("field/mesh size mismatch".into()));
    }
    let space = FemSpace::new(mesh);
    let tris = mesh.triangles();
    let nodes = mesh.nodes();
    let u = &field.values;
    let mut out = Vec::with_capacity(tris.len());
    for t in 0..tris.len() {
        let g = space.grad_u(tris, u, t);
        let [a, b, c] = tris[t];
        out.push(TriangleSample {
            area: space.areas[t],
            grad_norm: g[0].hypot(g[1]),
            mean: (u[a] + u[b] + u[c]) / 3.0,
            centroid: [
                (nodes[a][0] + nodes[b][0] + nodes[c][0]) / 3.0,
                (nodes[a][1] + nodes[b][1] + nodes[c][1]) / 3.0,
            ],
        });
    }
    Ok(out)
}

/// Conforming Rayleigh quotient of a stored field. For q = p this is the
/// plain p-Dirichlet quotient.
pub fn rayleigh_pq(
    mesh: &TriangleMesh,
    field: &DiscreteField,
    p: f64,
    q: f64,
) -> Result<f64, SolverError> {
    if field.values.len() != mesh.nodes().len() {
        return Err(SolverError::BadField("field/mesh size mismatch".into()));
    }
    let space = FemSpace::new(mesh);
    let (r, _n, s) = space.raw(mesh.triangles(), &field.values, p, q);
    if !(s > 0.0) {
        return Err(SolverError::ZeroDenominator);
    }
    Ok(r)
}

fn stage_plan(p_target: f64, eps_abs: &[f64], final_tol: f64) -> Vec<(f64, f64, f64)> {
    let mut plan = Vec::new();
    let mut p = 2.0_f64;
    if (p_target - 2.0).abs() > 1e-12 {
        plan.push((2.0, eps_abs[0], 1e-7));
        while (p - p_target).abs() > 1e-12 {
            p = if p_target > p {
                (p * 2.0).min(p_target)
            } else {
                (1.0 + (p - 1.0) / 1.7).max(p_target)
            };
            if (p - p_target).abs() > 1e-12 {
                plan.push((p, eps_abs[0], 1e-7));
            }
        }
        for (k, &e) in eps_abs.iter().enumerate() {
            let tol = if k + 1 == eps_abs.len() { final_tol } else { 1e-8 };
            plan.push((p_target, e, tol));
        }
    } else {
        // smooth case: the schedule is inert, one tight stage suffices
        plan.push((2.0, *eps_abs.last().unwrap(), final_tol));
    }
    plan
}

/// Descent on the smoothed quotient from one starting field. Returns the
/// final full nodal vector, outer iterations used, last relative change,
/// and whether all stages reached their tolerance.
fn descend(
    space: &FemSpace,
    tris: &[[usize; 3]],
    mut u: Vec<f64>,
    p: f64,
    q: f64,
    config: &SolverConfig,
) -> (Vec<f64>, usize, f64, bool) {
    let nfree = space.free.len();
    let mut weights = vec![0.0; space.areas.len()];
    let mut grad = vec![0.0; nfree];
    let mut sdir = vec![0.0; nfree];
    let mut data = vec![0.0; space.pattern.data.len()];
    let mut trial = u.clone();

    let eps_abs: Vec<f64> = config
        .eps_schedule
        .iter()
        .map(|e| e * space.diameter)
        .collect();
    let plan = stage_plan(p, &eps_abs, config.tol);

    let mut iters = 0usize;
    let mut converged = true;
    let mut last_rel = f64::INFINITY;

    normalize_field(space, tris, &mut u, q);

    'stages: for &(ps, eps, stop) in &plan {
        let mut step = 1.0_f64;
        loop {
            if iters >= config.max_iters {
                converged = false;
                break 'stages;
            }
            iters += 1;
            let (qv, _, _) = space.grad_smoothed(tris, &u, ps, q, eps, &mut weights, &mut grad);
            // floor flat-cell weights so the preconditioner stays SPD
            let wmax = weights.iter().cloned().fold(0.0, f64::max);
            let floor = 1e-12 * wmax + f64::MIN_POSITIVE;
            for w in weights.iter_mut() {
                *w = w.max(floor);
            }
            space.assemble(&weights, &mut data);
            let a = sparse::Csr {
                n: nfree,
                indptr: space.pattern.indptr.clone(),
                indices: space.pattern.indices.clone(),
                data: std::mem::take(&mut data),
            };
            sparse::cg_jacobi(&a, &grad, 1e-6, 200 + nfree / 4, &mut sdir);
            data = a.data;
            let snorm = sdir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if snorm == 0.0 {
                break;
            }
            let slope: f64 = grad.iter().zip(&sdir).map(|(g, s)| g * s).sum::<f64>() / snorm;
            if !(slope > 0.0) {
                // CG returned a non-descent direction; fall back to the
                // raw gradient for this step
                sdir.copy_from_slice(&grad);
            }
            let snorm = sdir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let slope: f64 = grad.iter().zip(&sdir).map(|(g, s)| g * s).sum::<f64>() / snorm;

            let mut t = step;
            let mut accepted = false;
            while t > 1e-18 {
                trial.copy_from_slice(&u);
                for (i, &f) in space.free.iter().enumerate() {
                    trial[f] -= t * sdir[i] / snorm;
                }
                let (qt, _, st) = space.smoothed(tris, &trial, ps, q, eps);
                if qt.is_finite() && st > 0.0 && qt <= qv - 1e-4 * t * slope {
                    let rel = (qv - qt).abs() / qt.abs().max(1e-300);
                    u.copy_from_slice(&trial);
                    normalize_field(space, tris, &mut u, q);
                    step = (t * 2.0).min(1e6);
                    last_rel = rel;
                    accepted = true;
                    if rel < stop {
                        continue 'stages;
                    }
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
    }
    (u, iters, last_rel, converged)
}

/// Scale so the denominator sum is one and the peak is positive.
fn normalize_field(space: &FemSpace, tris: &[[usize; 3]], u: &mut [f64], q: f64) {
    let mut s = 0.0;
    for t in 0..tris.len() {
        let m = (u[tris[t][0]] + u[tris[t][1]] + u[tris[t][2]]) / 3.0;
        s += space.areas[t] * m.abs().powf(q);
    }
    if s > 0.0 {
        let mut peak = 0.0_f64;
        for &v in u.iter() {
            if v.abs() > peak.abs() {
                peak = v;
            }
        }
        let sign = if peak < 0.0 { -1.0 } else { 1.0 };
        let scale = sign / s.powf(1.0 / q);
        for v in u.iter_mut() {
            *v *= scale;
        }
    }
}

/// Minimize the (p, q) quotient on a prebuilt mesh with seeded restarts.
/// Restart disagreement beyond 1e-6 relative clears the converged flag.
pub fn minimize_on_mesh(
    mesh: &TriangleMesh,
    p: f64,
    q: f64,
    config: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    config.validate()?;
    let space = FemSpace::new(mesh);
    if space.free.is_empty() {
        return Err(SolverError::BadField("mesh has no free nodes".into()));
    }
    let tris = mesh.triangles();

    let mut best: Option<(f64, Vec<f64>, usize, f64)> = None;
    let mut all_converged = true;
    let mut values = Vec::with_capacity(config.restarts);
    let mut total_iters = 0usize;

    for r in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(r as u64));
        let mut u = vec![0.0; mesh.nodes().len()];
        for &f in &space.free {
            u[f] = rng.random_range(0.1..1.0);
        }
        let (uf, iters, rel, conv) = descend(&space, tris, u, p, q, config);
        total_iters += iters;
        all_converged &= conv;
        let (val, _, s) = space.raw(tris, &uf, p, q);
        if !(s > 0.0) {
            return Err(SolverError::ZeroDenominator);
        }
        values.push(val);
        if best.as_ref().map_or(true, |b| val < b.0) {
            best = Some((val, uf, iters, rel));
        }
    }

    let spread = {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / lo.abs().max(1e-300)
    };
    if spread > 1e-6 {
        all_converged = false;
    }

    let (value, u, _, residual) = best.expect("at least one restart");
    let minimizer = DiscreteField::new(mesh, u)?;
    Ok(SolveResult {
        value,
        iterations: total_iters,
        residual,
        converged: all_converged,
        minimizer,
    })
}

/// Explicit h is taken verbatim (mesher validates it); the default is
/// diameter/64 capped below the shortest edge so that short-edged but
/// otherwise healthy polygons still mesh.
fn default_h(pg: &ConvexPolygon, config: &SolverConfig) -> f64 {
    config.h.unwrap_or_else(|| {
        let shortest = pg
            .vertices()
            .iter()
            .zip(pg.vertices().iter().cycle().skip(1))
            .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
            .fold(f64::INFINITY, f64::min);
        (pg.diameter() / 64.0).min(0.9 * shortest)
    })
}

/// First Dirichlet p-Laplacian eigenvalue estimate; an upper bound for the
/// continuum value by the conforming construction.
pub fn minimize_lambda_p(
    pg: &ConvexPolygon,
    p: f64,
    config: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    let mut cfg = config.clone();
    cfg.p = p;
    let p = cfg.clamped_p();
    let mesh = triangulate(pg, default_h(pg, &cfg))?;
    minimize_on_mesh(&mesh, p, p, &cfg)
}

/// Admissibility window in two dimensions: q >= 1 finite, and for p < 2
/// additionally q < 2p/(2-p). Infinite q is recognized but unsupported.
pub fn check_admissible(p: f64, q: f64) -> Result<(), SolverError> {
    if q.is_infinite() {
        return Err(SolverError::Unsupported(
            "q = infinity is outside solver scope".into(),
        ));
    }
    if !(q.is_finite() && q >= 1.0) {
        return Err(SolverError::InadmissibleExponent(format!("q = {q}")));
    }
    if p < 2.0 {
        let qstar = 2.0 * p / (2.0 - p);
        if q >= qstar {
            return Err(SolverError::InadmissibleExponent(format!(
                "q = {q} >= critical 2p/(2-p) = {qstar} for p = {p}"
            )));
        }
    }
    Ok(())
}

pub fn minimize_lambda_pq(
    pg: &ConvexPolygon,
    p: f64,
    q: f64,
    config: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    let mut cfg = config.clone();
    cfg.p = p;
    cfg.q = Some(q);
    let p = cfg.clamped_p();
    check_admissible(p, q)?;
    let mesh = triangulate(pg, default_h(pg, &cfg))?;
    minimize_on_mesh(&mesh, p, q, &cfg)
}

/// Mixed boundary conditions: zero trace only on the listed polygon edges.
pub fn minimize_mixed(
    pg: &ConvexPolygon,
    dirichlet_edges: &[usize],
    p: f64,
    config: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    if dirichlet_edges.is_empty() {
        return Err(SolverError::BadConfig("no Dirichlet edges".into()));
    }
    let mut cfg = config.clone();
    cfg.p = p;
    let p = cfg.clamped_p();
    let mesh = triangulate_mixed(pg, default_h(pg, &cfg), dirichlet_edges)?;
    minimize_on_mesh(&mesh, p, p, &cfg)
}

/// Max relative discrepancy between the analytic gradient of the smoothed
/// quotient and central finite differences on 20 seeded free coordinates.
pub fn gradient_check(
    mesh: &TriangleMesh,
    field: &DiscreteField,
    p: f64,
    q: f64,
    delta: f64,
    eps: f64,
) -> Result<f64, SolverError> {
    if !(delta >= 1e-7 && delta <= 1e-4) {
        return Err(SolverError::BadConfig(format!(
            "delta = {delta} outside [1e-7, 1e-4]"
        )));
    }
    let space = FemSpace::new(mesh);
    let tris = mesh.triangles();
    let u = field.values.clone();
    let mut weights = vec![0.0; space.areas.len()];
    let mut grad = vec![0.0; space.free.len()];
    space.grad_smoothed(tris, &u, p, q, eps, &mut weights, &mut grad);

    let mut rng = ChaCha8Rng::seed_from_u64(0x9d05_eed0);
    let mut worst = 0.0_f64;
    let gscale = grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
    for _ in 0..20 {
        let i = rng.random_range(0..space.free.len());
        let n = space.free[i];
        let mut up = u.clone();
        let mut um = u.clone();
        up[n] += delta;
        um[n] -= delta;
        let (qp, _, _) = space.smoothed(tris, &up, p, q, eps);
        let (qm, _, _) = space.smoothed(tris, &um, p, q, eps);
        let fd = (qp - qm) / (2.0 * delta);
        let err = (fd - grad[i]).abs() / grad[i].abs().max(fd.abs()).max(1e-3 * gscale);
        worst = worst.max(err);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{chebyshev_center, rectangle, regular_polygon, sample, ConvexPolygon};
    use crate::poincare1d::pi_p_reference;

    const PI: f64 = std::f64::consts::PI;

    /// Diamond fan: one free node at the origin, four Dirichlet neighbors.
    fn diamond() -> TriangleMesh {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        let marks = vec![
            NodeMark::Free,
            NodeMark::Dirichlet,
            NodeMark::Dirichlet,
            NodeMark::Dirichlet,
            NodeMark::Dirichlet,
        ];
        let tris = vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1]];
        TriangleMesh::new(nodes, tris, marks, 1.0, vec![]).unwrap()
    }

    #[test]
    fn rayleigh_hand_oracle_on_hat_function() {
        // hat u: 1 at the center. Each triangle: area 1/2, grad (-1,-1)
        // up to symmetry, centroid average 1/3. So
        //   N = 4 * (1/2) * 2^(p/2), S = 4 * (1/2) * 3^-q = 2 * 3^-q.
        let mesh = diamond();
        let hat = DiscreteField::new(&mesh, vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        for &(p, q) in &[(2.0, 2.0), (3.0, 3.0), (2.0, 1.0), (1.5, 2.0)] {
            let n = 2.0 * 2f64.powf(0.5 * p);
            let s = 2.0 * 3f64.powf(-q);
            let expect = n / s.powf(p / q);
            let got = rayleigh_pq(&mesh, &hat, p, q).unwrap();
            assert!(
                (got - expect).abs() < 1e-12 * expect,
                "p={p} q={q}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn rayleigh_is_zero_homogeneous_for_q_eq_p() {
        let mesh = diamond();
        let u1 = DiscreteField::new(&mesh, vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let u2 = DiscreteField::new(&mesh, vec![2.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        for &p in &[1.5, 2.0, 3.7] {
            let a = rayleigh_pq(&mesh, &u1, p, p).unwrap();
            let b = rayleigh_pq(&mesh, &u2, p, p).unwrap();
            assert!((a - b).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn rayleigh_zero_denominator() {
        // two free nodes whose values cancel in every centroid average
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let marks = vec![NodeMark::Free, NodeMark::Dirichlet, NodeMark::Free, NodeMark::Dirichlet];
        let tris = vec![[0, 1, 2], [0, 2, 3]];
        let mesh = TriangleMesh::new(nodes, tris, marks, 1.0, vec![]).unwrap();
        let f = DiscreteField::new(&mesh, vec![1.0, 0.0, -1.0, 0.0]).unwrap();
        assert_eq!(
            rayleigh_pq(&mesh, &f, 2.0, 2.0).unwrap_err(),
            SolverError::ZeroDenominator
        );
    }

    #[test]
    fn field_validation() {
        let mesh = diamond();
        assert!(DiscreteField::new(&mesh, vec![0.0; 5]).is_err());
        assert!(DiscreteField::new(&mesh, vec![1.0; 4]).is_err());
        // nonzero on a Dirichlet node
        assert!(DiscreteField::new(&mesh, vec![1.0, 0.5, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn square_p2_matches_separation_of_variables() {
        let sq = rectangle(1.0, 1.0);
        let cfg = SolverConfig::new(2.0).with_h(1.0 / 16.0);
        let res = minimize_lambda_p(&sq, 2.0, &cfg).unwrap();
        let target = 2.0 * PI * PI;
        assert!(res.converged);
        assert!(res.value >= target - 1e-12, "conforming bound violated");
        assert!((res.value - target).abs() < 0.03 * target, "got {}", res.value);
        // stored value is the recomputed quotient of the minimizer
        let again = rayleigh_pq(
            &triangulate(&sq, 1.0 / 16.0).unwrap(),
            &res.minimizer,
            2.0,
            2.0,
        )
        .unwrap();
        assert!((again - res.value).abs() <= 1e-12 * res.value);
    }

    #[test]
    fn minimizer_has_single_sign() {
        let sq = rectangle(1.0, 1.0);
        for &p in &[1.5, 3.0] {
            let cfg = SolverConfig::new(p).with_h(1.0 / 8.0);
            let res = minimize_lambda_p(&sq, p, &cfg).unwrap();
            let peak = res
                .minimizer
                .values()
                .iter()
                .cloned()
                .fold(0.0_f64, f64::max);
            assert!(peak > 0.0);
            assert!(res
                .minimizer
                .values()
                .iter()
                .all(|&v| v >= -1e-8 * peak));
        }
    }

    #[test]
    fn every_field_clears_the_inradius_lower_bound() {
        // The certification backbone: ANY admissible discrete field has
        // quotient >= (pi_p/2)^p / R^p, with zero tolerance.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let polys = vec![
            rectangle(1.0, 1.0),
            ConvexPolygon::new(vec![[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]]).unwrap(),
            sample::random_convex_polygon(&mut rng),
        ];
        for pg in &polys {
            let ball = chebyshev_center(&pg.to_halfspaces()).unwrap();
            let shortest = pg
                .vertices()
                .iter()
                .zip(pg.vertices().iter().cycle().skip(1))
                .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
                .fold(f64::INFINITY, f64::min);
            let h = (pg.diameter() / 10.0).min(0.9 * shortest);
            let mesh = triangulate(pg, h).unwrap();
            for &p in &[1.5, 2.0, 3.0] {
                let bound = (pi_p_reference(p).unwrap() / 2.0).powf(p) / ball.radius.powf(p);
                for _ in 0..100 {
                    let f = DiscreteField::random(&mesh, &mut rng);
                    let r = match rayleigh_pq(&mesh, &f, p, p) {
                        Ok(r) => r,
                        Err(SolverError::ZeroDenominator) => continue,
                        Err(e) => panic!("{e}"),
                    };
                    assert!(r >= bound, "p={p}: {r} < {bound}");
                }
            }
        }
    }

    #[test]
    fn mesh_refinement_is_monotone() {
        let sq = rectangle(1.0, 1.0);
        let mesh = triangulate(&sq, 0.25).unwrap();
        let fine = mesh.refine();
        let cfg = SolverConfig::new(2.0);
        let coarse_v = minimize_on_mesh(&mesh, 2.0, 2.0, &cfg).unwrap().value;
        let fine_v = minimize_on_mesh(&fine, 2.0, 2.0, &cfg).unwrap().value;
        assert!(fine_v <= coarse_v + 1e-10, "{fine_v} > {coarse_v}");
    }

    #[test]
    fn domain_monotonicity() {
        let small = rectangle(1.0, 1.0);
        let big = rectangle(1.3, 1.2);
        let cfg = SolverConfig::new(2.0).with_h(1.0 / 12.0);
        let vs = minimize_lambda_p(&small, 2.0, &cfg).unwrap().value;
        let vb = minimize_lambda_p(&big, 2.0, &cfg).unwrap().value;
        assert!(vs >= vb - 0.02 * vb);
    }

    #[test]
    fn scaling_law() {
        let pg = regular_polygon(5, 1.0);
        for &t in &[0.5, 2.0] {
            for &p in &[2.0, 3.0] {
                let base_h = pg.diameter() / 12.0;
                let cfg1 = SolverConfig::new(p).with_h(base_h);
                let cfg2 = SolverConfig::new(p).with_h(base_h * t);
                let v1 = minimize_lambda_p(&pg, p, &cfg1).unwrap().value;
                let v2 = minimize_lambda_p(&pg.scaled(t).unwrap(), p, &cfg2).unwrap().value;
                assert!(
                    (v2 * t.powf(p) - v1).abs() < 0.01 * v1,
                    "t={t} p={p}: {} vs {v1}",
                    v2 * t.powf(p)
                );
            }
        }
    }

    #[test]
    fn lambda_pq_consistency_and_admissibility() {
        let sq = rectangle(1.0, 1.0);
        let cfg = SolverConfig::new(2.0).with_h(1.0 / 8.0);
        let a = minimize_lambda_p(&sq, 2.0, &cfg).unwrap();
        let b = minimize_lambda_pq(&sq, 2.0, 2.0, &cfg).unwrap();
        assert!((a.value - b.value).abs() <= 1e-10 * a.value);

        assert!(matches!(
            minimize_lambda_pq(&sq, 2.0, f64::INFINITY, &cfg),
            Err(SolverError::Unsupported(_))
        ));
        assert!(matches!(
            minimize_lambda_pq(&sq, 1.5, 6.0, &cfg),
            Err(SolverError::InadmissibleExponent(_))
        ));
        assert!(matches!(
            minimize_lambda_pq(&sq, 2.0, 0.5, &cfg),
            Err(SolverError::InadmissibleExponent(_))
        ));
        // q just inside the window for p = 1.5 (critical is 6)
        assert!(check_admissible(1.5, 5.9).is_ok());
        assert!(check_admissible(3.0, 50.0).is_ok());
    }

    #[test]
    fn subhomogeneous_square_runs() {
        let sq = rectangle(1.0, 1.0);
        let cfg = SolverConfig::new(2.0).with_h(1.0 / 8.0);
        let res = minimize_lambda_pq(&sq, 2.0, 1.0, &cfg).unwrap();
        assert!(res.value > 0.0 && res.value.is_finite());
    }

    #[test]
    fn mixed_square_one_edge() {
        let sq = rectangle(1.0, 1.0);
        let cfg = SolverConfig::new(2.0).with_h(1.0 / 16.0);
        let res = minimize_mixed(&sq, &[0], 2.0, &cfg).unwrap();
        let target = (PI / 2.0) * (PI / 2.0);
        assert!(res.value >= target - 1e-12);
        assert!((res.value - target).abs() < 0.02 * target, "got {}", res.value);
    }

    #[test]
    fn mixed_pyramid_piece_clears_half_line_bound() {
        // cone over the bottom edge of the unit square, apex at the center
        let piece = ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.5, 0.5]]).unwrap();
        let cfg = SolverConfig::new(2.0).with_h(0.04);
        let res = minimize_mixed(&piece, &[0], 2.0, &cfg).unwrap();
        assert!(res.value >= PI * PI * 0.98, "got {}", res.value);
    }

    #[test]
    fn mixed_all_edges_reduces_to_dirichlet() {
        let sq = rectangle(1.0, 1.0);
        let cfg = SolverConfig::new(2.0).with_h(1.0 / 8.0);
        let a = minimize_mixed(&sq, &[0, 1, 2, 3], 2.0, &cfg).unwrap();
        let b = minimize_lambda_p(&sq, 2.0, &cfg).unwrap();
        assert!((a.value - b.value).abs() <= 1e-10 * b.value);
    }

    #[test]
    fn gradient_check_examples() {
        let sq = rectangle(1.0, 1.0);
        let mesh = triangulate(&sq, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = DiscreteField::random(&mesh, &mut rng);
        let e2 = gradient_check(&mesh, &f, 2.0, 2.0, 1e-6, 1e-8).unwrap();
        assert!(e2 < 1e-6, "p=2: {e2}");
        let e3 = gradient_check(&mesh, &f, 3.0, 3.0, 1e-5, 1e-4).unwrap();
        assert!(e3 < 1e-4, "p=3: {e3}");
        let e13 = gradient_check(&mesh, &f, 1.3, 1.3, 1e-5, 1e-3).unwrap();
        assert!(e13 < 1e-3, "p=1.3: {e13}");
        assert!(gradient_check(&mesh, &f, 2.0, 2.0, 1e-2, 1e-8).is_err());
    }

    #[test]
    fn nonconvergence_flag_on_tiny_budget() {
        let sq = rectangle(1.0, 1.0);
        let mut cfg = SolverConfig::new(2.0).with_h(0.25);
        cfg.max_iters = 1;
        let res = minimize_lambda_p(&sq, 2.0, &cfg).unwrap();
        assert!(!res.converged);
        assert!(res.value.is_finite() && res.value > 0.0);
    }

    #[test]
    fn config_validation() {
        let sq = rectangle(1.0, 1.0);
        let mut cfg = SolverConfig::new(2.0);
        cfg.eps_schedule = vec![1e-3, 1e-3];
        assert!(matches!(
            minimize_lambda_p(&sq, 2.0, &cfg),
            Err(SolverError::BadConfig(_))
        ));
        let mut cfg2 = SolverConfig::new(2.0);
        cfg2.restarts = 0;
        assert!(minimize_lambda_p(&sq, 2.0, &cfg2).is_err());
    }
}
