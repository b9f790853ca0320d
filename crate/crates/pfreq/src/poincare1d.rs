//! One-dimensional p-Poincare constants by discrete Rayleigh minimization.
//!
//! Two problems on an interval of length `a`: both endpoints pinned (the
//! constant pi_p, reported in root form) and only the left endpoint pinned
//! (the half constant (pi_p/2)^p / a^p, reported in pth-power form).
//!
//! The discretization is conforming from above: forward differences are the
//! exact derivatives of the piecewise-linear interpolant and the midpoint
//! rule underestimates the denominator by Jensen, so every discrete value,
//! minimized or not, is an upper bound for the continuum constant.

use serde::Serialize;
use thiserror::Error;

/// Clamp range for the exponent; outside it the descent landscape
/// degenerates (p -> 1 non-smooth, p -> infinity stiff).
pub const P_MIN: f64 = 1.05;
pub const P_MAX: f64 = 50.0;

const MAX_ITERS: usize = 50_000;
const REL_STOP: f64 = 1e-10;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PoincareError {
    #[error("grid needs at least 8 interior nodes, got {0}")]
    TooFewNodes(usize),
    #[error("interval length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("exponent must be finite, got {0}")]
    BadExponent(f64),
    #[error("closed form requires p > 1, got {0}")]
    DomainError(f64),
    #[error("invalid discrete function: {0}")]
    BadFunction(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1D {
    n: usize,
    a: f64,
}

impl Grid1D {
    pub fn new(n: usize, a: f64) -> Result<Self, PoincareError> {
        if n < 8 {
            return Err(PoincareError::TooFewNodes(n));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(PoincareError::BadLength(a));
        }
        Ok(Grid1D { n, a })
    }

    /// Interior node count; nodes sit at (i+1)h for i in 0..n.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.a
    }

    pub fn spacing(&self) -> f64 {
        self.a / (self.n + 1) as f64
    }
}

/// Which endpoints carry the zero boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryKind {
    BothEnds,
    LeftOnly,
}

/// Nodal values at the free nodes of a grid. `BothEnds` stores the n
/// interior values; `LeftOnly` additionally stores the right endpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteFunction1D {
    grid: Grid1D,
    kind: BoundaryKind,
    values: Vec<f64>,
}

impl DiscreteFunction1D {
    pub fn new(grid: Grid1D, kind: BoundaryKind, values: Vec<f64>) -> Result<Self, PoincareError> {
        let want = free_count(grid.n, kind);
        if values.len() != want {
            return Err(PoincareError::BadFunction(format!(
                "expected {want} free values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(PoincareError::BadFunction("non-finite value".into()));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(PoincareError::BadFunction("identically zero".into()));
        }
        Ok(DiscreteFunction1D { grid, kind, values })
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// All nodal values including the pinned boundary zeros.
    pub fn full_values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.grid.n + 2);
        out.push(0.0);
        out.extend_from_slice(&self.values);
        if self.kind == BoundaryKind::BothEnds {
            out.push(0.0);
        }
        out
    }
}

fn free_count(n: usize, kind: BoundaryKind) -> usize {
    match kind {
        BoundaryKind::BothEnds => n,
        BoundaryKind::LeftOnly => n + 1,
    }
}

/// Result of a discrete minimization. `value` is always the raw
/// (unsmoothed) quotient recomputed at the final iterate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoincareEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub minimizer: DiscreteFunction1D,
}

/// Closed form 2 pi (p-1)^(1/p) / (p sin(pi/p)); test oracle only.
pub fn pi_p_reference(p: f64) -> Result<f64, PoincareError> {
    if !p.is_finite() {
        return Err(PoincareError::BadExponent(p));
    }
    if p <= 1.0 {
        return Err(PoincareError::DomainError(p));
    }
    let pi = std::f64::consts::PI;
    Ok(2.0 * pi * (p - 1.0).powf(1.0 / p) / (p * (pi / p).sin()))
}

/// Discrete pi_p on (0,1): root-form quotient minimum with both ends pinned.
pub fn pi_p_estimate(p: f64, n: usize) -> Result<PoincareEstimate, PoincareError> {
    let p = clamp_p(p)?;
    let grid = Grid1D::new(n, 1.0)?;
    let mut est = minimize(grid, BoundaryKind::BothEnds, p);
    est.value = est.value.powf(1.0 / p);
    Ok(est)
}

/// Discrete half constant on (0,a): pth-power quotient minimum with only
/// the left end pinned. Converges to (pi_p/2)^p a^(-p).
pub fn half_poincare_estimate(p: f64, n: usize, a: f64) -> Result<PoincareEstimate, PoincareError> {
    let p = clamp_p(p)?;
    let grid = Grid1D::new(n, a)?;
    Ok(minimize(grid, BoundaryKind::LeftOnly, p))
}

fn clamp_p(p: f64) -> Result<f64, PoincareError> {
    if !p.is_finite() {
        return Err(PoincareError::BadExponent(p));
    }
    Ok(p.clamp(P_MIN, P_MAX))
}

// ---------------------------------------------------------------------------
// solver internals

struct Problem {
    h: f64,
    free: usize,
    cells: usize,
    kind: BoundaryKind,
}

impl Problem {
    fn new(grid: Grid1D, kind: BoundaryKind) -> Problem {
        let free = free_count(grid.n, kind);
        let cells = match kind {
            BoundaryKind::BothEnds => free + 1,
            BoundaryKind::LeftOnly => free,
        };
        Problem { h: grid.spacing(), free, cells, kind }
    }

    #[inline]
    fn endpoint_values(&self, phi: &[f64], c: usize) -> (f64, f64) {
        let left = if c == 0 { 0.0 } else { phi[c - 1] };
        let right = if c == self.cells - 1 && self.kind == BoundaryKind::BothEnds {
            0.0
        } else {
            phi[c]
        };
        (left, right)
    }

    /// Smoothed pth-power quotient N_eps / D and both sums.
    fn value(&self, phi: &[f64], p: f64, eps: f64) -> (f64, f64, f64) {
        let (mut num, mut den) = (0.0, 0.0);
        for c in 0..self.cells {
            let (l, r) = self.endpoint_values(phi, c);
            let d = (r - l) / self.h;
            let m = 0.5 * (l + r);
            num += self.h * (d * d + eps * eps).powf(0.5 * p);
            den += self.h * m.abs().powf(p);
        }
        (num / den, num, den)
    }

    fn raw_quotient(&self, phi: &[f64], p: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for c in 0..self.cells {
            let (l, r) = self.endpoint_values(phi, c);
            num += self.h * ((r - l) / self.h).abs().powf(p);
            den += self.h * (0.5 * (l + r)).abs().powf(p);
        }
        num / den
    }

    /// Gradient of the smoothed quotient at phi, given its value q = N/D.
    fn gradient(&self, phi: &[f64], p: f64, eps: f64, q: f64, den: f64, out: &mut [f64]) {
        // per-cell dN/d(slope)/h = g'(d) and dD/d(mid) = h q'(m)
        out.iter_mut().for_each(|g| *g = 0.0);
        for c in 0..self.cells {
            let (l, r) = self.endpoint_values(phi, c);
            let d = (r - l) / self.h;
            let m = 0.5 * (l + r);
            let gp = p * d * (d * d + eps * eps).powf(0.5 * p - 1.0);
            let qp = p * m.abs().powf(p - 1.0) * m.signum();
            let dn = 0.5 * self.h * qp;
            if c > 0 {
                out[c - 1] += -gp + (-q) * dn;
            }
            let is_right_pinned = c == self.cells - 1 && self.kind == BoundaryKind::BothEnds;
            if !is_right_pinned {
                out[c] += gp - q * dn;
            }
        }
        for g in out.iter_mut() {
            *g /= den;
        }
    }

    /// Thomas solve of the linearized-stiffness preconditioner T s = g,
    /// where T is the tridiagonal operator with cell weights
    /// (d_c^2 + eps^2)^(p/2 - 1): the second-order part of the numerator.
    /// Weights are floored so T stays SPD when cells go flat at p > 2.
    fn precondition(
        &self,
        phi: &[f64],
        p: f64,
        eps: f64,
        g: &[f64],
        w: &mut [f64],
        diag: &mut [f64],
        off: &mut [f64],
        rhs: &mut [f64],
    ) {
        let n = self.free;
        let mut wmax = 0.0_f64;
        for c in 0..self.cells {
            let (l, r) = self.endpoint_values(phi, c);
            let d = (r - l) / self.h;
            w[c] = (d * d + eps * eps).powf(0.5 * p - 1.0);
            wmax = wmax.max(w[c]);
        }
        let floor = 1e-12 * wmax + f64::MIN_POSITIVE;
        for wc in w.iter_mut() {
            *wc = wc.max(floor);
        }
        for i in 0..n {
            let right = if i + 1 < self.cells { w[i + 1] } else { 0.0 };
            diag[i] = (w[i] + right) / self.h;
            if i + 1 < n {
                off[i] = -w[i + 1] / self.h;
            }
            rhs[i] = g[i];
        }
        for i in 1..n {
            let m = off[i - 1] / diag[i - 1];
            diag[i] -= m * off[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
        rhs[n - 1] /= diag[n - 1];
        for i in (0..n - 1).rev() {
            rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
        }
    }

    fn init(&self) -> Vec<f64> {
        let pi = std::f64::consts::PI;
        let total = self.h * (self.cells as f64);
        (0..self.free)
            .map(|i| {
                let x = (i + 1) as f64 * self.h;
                match self.kind {
                    BoundaryKind::BothEnds => (pi * x / total).sin(),
                    BoundaryKind::LeftOnly => (0.5 * pi * x / total).sin(),
                }
            })
            .collect()
    }
}

/// Normalize to sup-norm one with positive peak; the quotient is
/// 0-homogeneous so this only conditions the iteration.
fn renormalize(phi: &mut [f64]) {
    let mut peak = 0.0_f64;
    for &v in phi.iter() {
        if v.abs() > peak.abs() {
            peak = v;
        }
    }
    if peak != 0.0 {
        for v in phi.iter_mut() {
            *v /= peak;
        }
    }
}

struct StagePlan {
    p: f64,
    eps: f64,
    stop: f64,
}

/// Continuation plan: walk p from 2 toward the target (halving the distance
/// in a stable ratio), then tighten the smoothing at the target exponent.
fn stages(p_target: f64) -> Vec<StagePlan> {
    let mut plan = Vec::new();
    let mut p = 2.0_f64;
    while (p - p_target).abs() > 1e-12 {
        p = if p_target > p {
            (p * 2.0).min(p_target)
        } else {
            (1.0 + (p - 1.0) / 1.7).max(p_target)
        };
        if (p - p_target).abs() > 1e-12 {
            plan.push(StagePlan { p, eps: 1e-4, stop: 1e-8 });
        }
    }
    let mut eps = 1e-3;
    while eps > 1e-8 * 1.0001 {
        plan.push(StagePlan { p: p_target, eps, stop: REL_STOP });
        eps *= 0.1;
    }
    plan.push(StagePlan { p: p_target, eps: 1e-8, stop: REL_STOP });
    plan
}

fn minimize(grid: Grid1D, kind: BoundaryKind, p: f64) -> PoincareEstimate {
    minimize_capped(grid, kind, p, MAX_ITERS)
}

fn minimize_capped(grid: Grid1D, kind: BoundaryKind, p: f64, max_iters: usize) -> PoincareEstimate {
    let prob = Problem::new(grid, kind);
    let mut phi = prob.init();
    let mut grad = vec![0.0; prob.free];
    let mut sdir = vec![0.0; prob.free];
    let mut diag = vec![0.0; prob.free];
    let mut off = vec![0.0; prob.free];
    let mut cellw = vec![0.0; prob.cells];
    let mut trial = vec![0.0; prob.free];

    let mut iters = 0usize;
    let mut converged = true;

    // Warm-started stage at p = 2 first, then the plan.
    let mut all = vec![StagePlan { p: 2.0, eps: 1e-4, stop: 1e-8 }];
    all.extend(stages(p));

    'stages: for st in &all {
        let (mut q, _, mut den) = prob.value(&phi, st.p, st.eps);
        let mut step = 1.0_f64;
        loop {
            if iters >= max_iters {
                converged = false;
                break 'stages;
            }
            iters += 1;
            prob.gradient(&phi, st.p, st.eps, q, den, &mut grad);
            prob.precondition(&phi, st.p, st.eps, &grad, &mut cellw, &mut diag, &mut off, &mut sdir);
            let snorm = sdir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if snorm == 0.0 {
                break;
            }
            let slope: f64 = grad.iter().zip(&sdir).map(|(g, s)| g * s).sum::<f64>() / snorm;

            // Armijo backtracking on the normalized direction.
            let mut t = step;
            let mut accepted = false;
            while t > 1e-16 {
                for i in 0..prob.free {
                    trial[i] = phi[i] - t * sdir[i] / snorm;
                }
                let (qt, _, _) = prob.value(&trial, st.p, st.eps);
                if qt.is_finite() && qt <= q - 1e-4 * t * slope {
                    let rel = (q - qt).abs() / qt.abs().max(1e-300);
                    phi.copy_from_slice(&trial);
                    renormalize(&mut phi);
                    let (q2, _, d2) = prob.value(&phi, st.p, st.eps);
                    q = q2;
                    den = d2;
                    step = (t * 2.0).min(1e3);
                    accepted = true;
                    if rel < st.stop {
                        continue 'stages;
                    }
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // Stuck below step resolution: treat as stage-converged.
                break;
            }
        }
    }

    let value = prob.raw_quotient(&phi, p);
    // Positive single-sign output by construction of renormalize.
    let minimizer = DiscreteFunction1D::new(grid, kind, phi)
        .expect("solver iterate is finite and nonzero");
    PoincareEstimate { value, iterations: iters, converged, minimizer }
}
