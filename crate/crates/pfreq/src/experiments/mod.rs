//! Sweep harness: the sharpness trends behind the closed-form bounds,
//! pointwise Hardy checks, and aggregated verdict reports, all emitted
//! as deterministic CSV/JSON plus static SVG plots.

pub mod table;

pub use table::{ArtifactPaths, Cell, PlotSpec, Table};

use crate::bounds::{
    self, ball_reference, geometric_check, verdict, BoundError, PiP, Verdict, LOWER_SLACK,
    UPPER_SLACK,
};
use crate::eigensolver::{
    check_admissible, minimize_lambda_p, minimize_lambda_pq, minimize_on_mesh, per_triangle,
    triangulate, DiscreteField, NodeMark, SolverConfig, SolverError,
};
use crate::geometry::{
    chebyshev_center, collapsing_pyramid, distance_to_boundary, regular_polygon, ConvexPolygon,
    GeometryError, ShapeFamily,
};
use crate::poincare1d::pi_p_reference;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid sweep spec: {0}")]
    BadSpec(String),
    #[error("solver did not converge at {0}")]
    NonConvergence(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Poincare(#[from] crate::poincare1d::PoincareError),
    #[error(transparent)]
    Mesh(#[from] crate::eigensolver::MeshError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const CITE_PYRAMID: &str = "thin pyramids attain the inradius bound in the limit";
const CITE_SLAB: &str = "long boxes approach the one-dimensional slab value";
const CITE_SUBHOM: &str = "q below p: inradius-normalized constant degenerates";
const CITE_PINFTY: &str = "p-th root of the eigenvalue approaches 1/R";
const CITE_HARDY: &str = "pointwise Hardy inequality with boundary distance";

fn solve_row(
    pg: &ConvexPolygon,
    p: f64,
    cfg: &SolverConfig,
    row: &str,
) -> Result<f64, ExperimentError> {
    let res = minimize_lambda_p(pg, p, cfg)?;
    if !res.converged {
        return Err(ExperimentError::NonConvergence(row.to_string()));
    }
    Ok(res.value)
}

/// Collapsing-pyramid sweep: R^p lambda stays above (pi_p/2)^p and
/// descends toward it as the pyramid flattens.
pub fn run_pyramid_sweep(p: f64, alphas: &[f64]) -> Result<Table, ExperimentError> {
    if alphas.is_empty() {
        return Err(ExperimentError::BadSpec("empty alpha grid".into()));
    }
    if alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ExperimentError::BadSpec("alphas must be strictly decreasing".into()));
    }
    if alphas.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
        return Err(ExperimentError::BadSpec("alphas must lie in (0, 1]".into()));
    }
    let pip = PiP::reference(p)?;
    let target = (pip.value / 2.0).powf(p);
    let mut t = Table::new(
        "pyramid",
        &["alpha", "R", "lambda", "scaled", "target", "ratio", "citation"],
        PlotSpec::Lines { x: 0, ys: vec![3, 4], logy: false },
    );
    for &alpha in alphas {
        let data = collapsing_pyramid(2, alpha)?;
        let pg = data.polygon.expect("2d pyramid is a triangle");
        // h tracks alpha so the thin direction stays resolved at a flat
        // node budget across the sweep
        let cfg = SolverConfig::new(p).with_h(alpha / 5.0);
        let lambda = solve_row(&pg, p, &cfg, &format!("alpha = {alpha}"))?;
        let scaled = data.inradius.powf(p) * lambda;
        t.push(vec![
            Cell::F(alpha),
            Cell::F(data.inradius),
            Cell::F(lambda),
            Cell::F(scaled),
            Cell::F(target),
            Cell::F(scaled / target),
            Cell::S(CITE_PYRAMID.into()),
        ]);
    }
    Ok(t)
}

/// Long-box sweep: lambda_p(L x 1) decreases to the slab value pi_p^p.
pub fn run_slab_sweep(p: f64, ls: &[f64]) -> Result<Table, ExperimentError> {
    if ls.is_empty() {
        return Err(ExperimentError::BadSpec("empty L grid".into()));
    }
    if ls.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ExperimentError::BadSpec("Ls must be strictly increasing".into()));
    }
    if ls.iter().any(|&l| !(l >= 1.0) || !l.is_finite()) {
        return Err(ExperimentError::BadSpec("Ls must be finite and at least 1".into()));
    }
    let target = pi_p_reference(p)?.powf(p);
    let mut t = Table::new(
        "slab",
        &["L", "lambda", "target", "gap", "citation"],
        PlotSpec::Lines { x: 0, ys: vec![1, 2], logy: false },
    );
    for &l in ls {
        let pg = crate::geometry::rectangle(l, 1.0);
        let cfg = SolverConfig::new(p).with_h(1.0 / 64.0);
        let lambda = solve_row(&pg, p, &cfg, &format!("L = {l}"))?;
        t.push(vec![
            Cell::F(l),
            Cell::F(lambda),
            Cell::F(target),
            Cell::F((lambda - target) / target),
            Cell::S(CITE_SLAB.into()),
        ]);
    }
    Ok(t)
}

/// Sub-homogeneous sweep (q <= p): the column lambda * R^(N p/q - N + p)
/// sinks toward zero on growing boxes when q < p, and stabilizes at the
/// slab value when q = p.
pub fn run_subhomogeneous(p: f64, q: f64, ls: &[f64]) -> Result<Table, ExperimentError> {
    if ls.is_empty() || ls.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ExperimentError::BadSpec("Ls must be nonempty and increasing".into()));
    }
    if ls.iter().any(|&l| !(l >= 1.0) || !l.is_finite()) {
        return Err(ExperimentError::BadSpec("Ls must be finite and at least 1".into()));
    }
    if !(q <= p) {
        return Err(ExperimentError::BadSpec(format!(
            "q = {q} must not exceed p = {p}; above p the constant is bounded below"
        )));
    }
    check_admissible(p, q).map_err(ExperimentError::Solver)?;
    let n = 2.0;
    let exponent = n * p / q - n + p;
    let mut t = Table::new(
        "subhomogeneous",
        &["L", "R", "lambda", "scaled", "exponent", "citation"],
        PlotSpec::Lines { x: 0, ys: vec![3], logy: true },
    );
    for &l in ls {
        let pg = crate::geometry::rectangle(l, 1.0);
        let r = 0.5;
        let cfg = SolverConfig::new(p).with_h(1.0 / 32.0);
        let res = minimize_lambda_pq(&pg, p, q, &cfg)?;
        if !res.converged {
            return Err(ExperimentError::NonConvergence(format!("L = {l}")));
        }
        t.push(vec![
            Cell::F(l),
            Cell::F(r),
            Cell::F(res.value),
            Cell::F(res.value * r.powf(exponent)),
            Cell::F(exponent),
            Cell::S(CITE_SUBHOM.into()),
        ]);
    }
    Ok(t)
}

/// Large-p trend on a fixed polygon: lambda^(1/p) drifts toward 1/R while
/// staying above the per-p floor (pi_p/2)/R.
pub fn run_pinfty_trend(pg: &ConvexPolygon, ps: &[f64]) -> Result<Table, ExperimentError> {
    if ps.is_empty() || ps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ExperimentError::BadSpec("ps must be nonempty and increasing".into()));
    }
    if ps.iter().any(|&p| !(1.05..=50.0).contains(&p)) {
        return Err(ExperimentError::BadSpec("ps must lie within [1.05, 50]".into()));
    }
    let ball = chebyshev_center(&pg.to_halfspaces())?;
    let inv_r = 1.0 / ball.radius;
    let h = pg.diameter() / 45.0;
    let mut t = Table::new(
        "pinfty",
        &["p", "root", "inv_R", "gap", "floor", "floor_ok", "citation"],
        PlotSpec::Lines { x: 0, ys: vec![1, 2], logy: false },
    );
    for &p in ps {
        let cfg = SolverConfig::new(p).with_h(h);
        let lambda = solve_row(pg, p, &cfg, &format!("p = {p}"))?;
        let root = lambda.powf(1.0 / p);
        let floor = pi_p_reference(p)?/ 2.0 * inv_r;
        t.push(vec![
            Cell::F(p),
            Cell::F(root),
            Cell::F(inv_r),
            Cell::F((root - inv_r).abs()),
            Cell::F(floor),
            Cell::B(root >= floor),
            Cell::S(CITE_PINFTY.into()),
        ]);
    }
    Ok(t)
}

/// Which fields the Hardy check samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSampling {
    pub random_count: usize,
    pub seed: u64,
    pub with_eigenfunction: bool,
    pub with_hat: bool,
}

impl Default for FieldSampling {
    fn default() -> Self {
        FieldSampling { random_count: 50, seed: 0, with_eigenfunction: true, with_hat: true }
    }
}

/// Pointwise Hardy check: ((p-1)/p)^p * sum A |mean u / d(centroid)|^p
/// against the exact P1 energy sum A |grad u|^p, one row per field.
/// A fail row is a genuine counterexample candidate, not noise: the
/// centroid quadrature on both sides keeps the comparison honest.
pub fn run_hardy_pointwise(
    pg: &ConvexPolygon,
    p: f64,
    sampling: &FieldSampling,
) -> Result<Table, ExperimentError> {
    if !(p > 1.0) {
        return Err(ExperimentError::BadSpec(format!("p = {p} must exceed 1")));
    }
    let mesh = triangulate(pg, pg.diameter() / 16.0)?;
    let constant = ((p - 1.0) / p).powf(p);
    let mut t = Table::new(
        "hardy",
        &["field", "lhs", "rhs", "margin", "pass", "citation"],
        PlotSpec::Lines { x: 1, ys: vec![2], logy: true },
    );
    let push_field = |t: &mut Table, label: String, u: &DiscreteField| -> Result<(), ExperimentError> {
        let samples = per_triangle(&mesh, u)?;
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for s in &samples {
            let d = distance_to_boundary(pg, s.centroid)?;
            lhs += s.area * (s.mean.abs() / d).powf(p);
            rhs += s.area * s.grad_norm.powf(p);
        }
        lhs *= constant;
        t.push(vec![
            Cell::S(label),
            Cell::F(lhs),
            Cell::F(rhs),
            Cell::F((rhs - lhs) / rhs.max(1e-300)),
            Cell::B(lhs <= rhs),
            Cell::S(CITE_HARDY.into()),
        ]);
        Ok(())
    };

    if sampling.with_eigenfunction {
        let res = minimize_on_mesh(&mesh, p, p, &SolverConfig::new(p))?;
        push_field(&mut t, "eigenfunction".into(), &res.minimizer)?;
    }
    if sampling.with_hat {
        // hat at the free node nearest the vertex centroid
        let c = pg.vertices().iter().fold([0.0, 0.0], |acc, v| {
            [acc[0] + v[0] / pg.len() as f64, acc[1] + v[1] / pg.len() as f64]
        });
        let pick = mesh
            .nodes()
            .iter()
            .enumerate()
            .filter(|(i, _)| mesh.marks()[*i] == NodeMark::Free)
            .min_by(|(_, a), (_, b)| {
                let da = (a[0] - c[0]).hypot(a[1] - c[1]);
                let db = (b[0] - c[0]).hypot(b[1] - c[1]);
                da.partial_cmp(&db).unwrap()
            })
            .map(|(i, _)| i)
            .ok_or_else(|| ExperimentError::BadSpec("mesh has no free nodes".into()))?;
        let mut vals = vec![0.0; mesh.nodes().len()];
        vals[pick] = 1.0;
        let hat = DiscreteField::new(&mesh, vals)?;
        push_field(&mut t, "hat".into(), &hat)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    for k in 0..sampling.random_count {
        let f = DiscreteField::random(&mesh, &mut rng);
        push_field(&mut t, format!("random-{k}"), &f)?;
    }
    Ok(t)
}

pub struct BoundsRunOutcome {
    pub verdicts: Vec<Verdict>,
    pub table: Table,
    pub converged: bool,
    pub all_pass: bool,
}

/// Evaluate every bound that speaks about lambda_p on the shape, solve
/// for the measured value, and grade each one. `r_override` is a fault
/// injection hook for negative controls: it replaces the measured
/// inradius in the bound inputs.
pub fn run_bounds_report(
    shape: &ShapeFamily,
    p: f64,
    h: Option<f64>,
    r_override: Option<f64>,
) -> Result<BoundsRunOutcome, ExperimentError> {
    shape.validate()?;
    let pg = match shape {
        ShapeFamily::Disk { radius } => regular_polygon(256, *radius),
        other => other.polygon().ok_or_else(|| {
            ExperimentError::BadSpec(format!(
                "shape {other:?} has no 2d polygon realization; bounds reports are 2d-only"
            ))
        })?,
    };
    let ball = chebyshev_center(&pg.to_halfspaces())?;
    let r = r_override.unwrap_or(ball.radius);
    let (per, v) = (pg.perimeter(), pg.measure());
    let n = 2.0;

    let mut cfg = SolverConfig::new(p);
    cfg.h = h;
    let res = minimize_lambda_p(&pg, p, &cfg)?;
    let measured = res.value;

    let pip = PiP::estimate(p)?;
    let ballref = ball_reference(p)?;

    let mut verdicts = vec![
        verdict(bounds::hardy_lower(p, r)?, measured, LOWER_SLACK),
        verdict(bounds::hersch_protter_lower(p, r, &pip)?, measured, LOWER_SLACK),
        verdict(
            bounds::faber_krahn_lower(p, n, v, ballref.lambda, ballref.volume)?,
            measured,
            LOWER_SLACK,
        ),
        verdict(bounds::isoperimetric_lower(p, n, per, v, &pip)?, measured, LOWER_SLACK),
        verdict(bounds::ball_upper(p, r, ballref.lambda)?, measured, UPPER_SLACK),
        verdict(bounds::isoperimetric_upper(p, per, v, &pip)?, measured, UPPER_SLACK),
    ];
    verdicts.push(geometric_check(r, n, per, v)?);

    let mut table = Table::new(
        "bounds_report",
        &["name", "side", "value", "measured", "margin", "pass", "citation"],
        PlotSpec::Bars { label: 0, value: 2 },
    );
    for vd in &verdicts {
        table.push(vec![
            Cell::S(vd.report.name.clone()),
            Cell::S(vd.report.side.to_string()),
            Cell::F(vd.report.value),
            Cell::F(vd.measured),
            Cell::F(vd.margin),
            Cell::B(vd.pass),
            Cell::S(vd.report.citation.clone()),
        ]);
    }
    let all_pass = verdicts.iter().all(|v| v.pass);
    Ok(BoundsRunOutcome { verdicts, table, converged: res.converged, all_pass })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// CLI-facing sweep description; `run_sweep` dispatches on the name.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub experiment: String,
    pub p: f64,
    pub q: Option<f64>,
    pub alphas: Vec<f64>,
    pub lengths: Vec<f64>,
    pub ps: Vec<f64>,
    pub polygon: Option<ConvexPolygon>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl SweepSpec {
    pub fn new(experiment: &str, p: f64) -> SweepSpec {
        SweepSpec {
            experiment: experiment.to_string(),
            p,
            q: None,
            alphas: vec![0.8, 0.4, 0.2, 0.1],
            lengths: vec![1.0, 2.0, 4.0, 8.0],
            ps: vec![2.0, 5.0, 10.0, 20.0],
            polygon: None,
            seed: 0,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Table, ExperimentError> {
    let unit_square = || crate::geometry::rectangle(1.0, 1.0);
    match spec.experiment.as_str() {
        "pyramid" => run_pyramid_sweep(spec.p, &spec.alphas),
        "slab" => run_slab_sweep(spec.p, &spec.lengths),
        "subhom" => run_subhomogeneous(
            spec.p,
            spec.q
                .ok_or_else(|| ExperimentError::BadSpec("subhom sweep needs q".into()))?,
            &spec.lengths,
        ),
        "pinfty" => {
            let pg = spec.polygon.clone().unwrap_or_else(unit_square);
            run_pinfty_trend(&pg, &spec.ps)
        }
        "hardy" => {
            let pg = spec.polygon.clone().unwrap_or_else(unit_square);
            let sampling = FieldSampling { seed: spec.seed, ..FieldSampling::default() };
            run_hardy_pointwise(&pg, spec.p, &sampling)
        }
        other => Err(ExperimentError::BadSpec(format!("unknown experiment {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rectangle;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn pyramid_sweep_trends_toward_target() {
        let t = run_pyramid_sweep(2.0, &[0.8, 0.4]).unwrap();
        let scaled = t.f64_column("scaled");
        let target = (PI / 2.0) * (PI / 2.0);
        assert!(scaled.iter().all(|&s| s > target));
        assert!(scaled[1] < scaled[0]);
        let ratios = t.f64_column("ratio");
        for (i, r) in ratios.iter().enumerate() {
            assert!((r - scaled[i] / target).abs() < 1e-12 * r);
        }
        // citation column present on every row
        assert!(t.rows.iter().all(|r| r.last().unwrap().to_string() == CITE_PYRAMID));
    }

    #[test]
    fn pyramid_alpha_one_sits_in_the_bounds_bracket() {
        let t = run_pyramid_sweep(2.0, &[1.0]).unwrap();
        let lambda = t.f64_column("lambda")[0];
        let r = t.f64_column("R")[0];
        let pip = PiP::reference(2.0).unwrap();
        let lo = bounds::hersch_protter_lower(2.0, r, &pip).unwrap().value;
        let hi = bounds::ball_upper(2.0, r, bounds::LAMBDA_2_UNIT_DISK).unwrap().value;
        assert!(lambda >= lo && lambda <= hi * (1.0 + UPPER_SLACK), "{lo} {lambda} {hi}");
    }

    #[test]
    fn pyramid_spec_validation() {
        assert!(run_pyramid_sweep(2.0, &[]).is_err());
        assert!(run_pyramid_sweep(2.0, &[0.4, 0.8]).is_err());
        assert!(run_pyramid_sweep(2.0, &[1.5, 0.4]).is_err());
    }

    #[test]
    fn slab_sweep_small_cases() {
        let t = run_slab_sweep(2.0, &[1.0, 2.0]).unwrap();
        let lambda = t.f64_column("lambda");
        // L=1 is the unit square
        assert!((lambda[0] - 2.0 * PI * PI).abs() < 0.02 * 2.0 * PI * PI);
        // separation of variables: pi^2 (1 + 1/L^2)
        assert!((lambda[1] - PI * PI * 1.25).abs() < 0.02 * PI * PI * 1.25);
        let gap = t.f64_column("gap");
        assert!(gap[1] < gap[0]);
        assert!(run_slab_sweep(2.0, &[2.0, 1.0]).is_err());
        assert!(run_slab_sweep(2.0, &[0.5, 1.0]).is_err());
    }

    #[test]
    fn subhomogeneous_scaled_column_sinks() {
        let t = run_subhomogeneous(2.0, 1.0, &[1.0, 2.0, 4.0]).unwrap();
        let scaled = t.f64_column("scaled");
        assert!(scaled[1] < scaled[0] && scaled[2] < scaled[1], "{scaled:?}");
        // exponent column: N p/q - N + p = 2*2/1 - 2 + 2 = 4
        assert!((t.f64_column("exponent")[0] - 4.0).abs() < 1e-15);
        // control q = p stabilizes at the slab value (pi_p/2)^p-ish scale:
        // relative decrements shrink instead of staying proportional
        let c = run_subhomogeneous(2.0, 2.0, &[1.0, 2.0, 4.0]).unwrap();
        let sc = c.f64_column("scaled");
        let rel_drop = |a: f64, b: f64| (a - b) / a;
        assert!(rel_drop(sc[1], sc[2]) < rel_drop(sc[0], sc[1]));
        // q = p scaled column approaches pi_p^p R^p = pi^2 / 4
        assert!((sc[2] - PI * PI / 4.0) / (PI * PI / 4.0) < 0.08);
        assert!(run_subhomogeneous(2.0, 3.0, &[1.0, 2.0]).is_err());
        assert!(run_subhomogeneous(2.0, 0.5, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn pinfty_trend_on_small_grid() {
        let sq = rectangle(1.0, 1.0);
        let t = run_pinfty_trend(&sq, &[2.0, 5.0]).unwrap();
        let gap = t.f64_column("gap");
        assert!(gap[1] < gap[0]);
        let roots = t.f64_column("root");
        assert!((roots[0] - (2.0 * PI * PI).sqrt()).abs() < 0.02 * roots[0]);
        // floor holds on every row
        let ok = t.column("floor_ok").unwrap();
        assert!(t.rows.iter().all(|r| r[ok] == Cell::B(true)));
        assert!(run_pinfty_trend(&sq, &[5.0, 2.0]).is_err());
        assert!(run_pinfty_trend(&sq, &[0.5, 2.0]).is_err());
    }

    #[test]
    fn hardy_rows_all_pass_on_square() {
        let sq = rectangle(1.0, 1.0);
        let sampling = FieldSampling { random_count: 10, seed: 7, ..Default::default() };
        let t = run_hardy_pointwise(&sq, 2.0, &sampling).unwrap();
        assert_eq!(t.rows.len(), 12); // eigenfunction + hat + 10 random
        let pass = t.column("pass").unwrap();
        for row in &t.rows {
            assert_eq!(row[pass], Cell::B(true), "row {row:?}");
        }
        // eigenfunction margin strictly positive
        let margin = t.f64_column("margin");
        assert!(margin[0] > 0.0);
    }

    #[test]
    fn bounds_report_on_square_passes_everything() {
        let shape = ShapeFamily::Box { lengths: vec![1.0, 1.0] };
        let out = run_bounds_report(&shape, 2.0, Some(1.0 / 16.0), None).unwrap();
        assert!(out.converged);
        assert!(out.all_pass, "{:#?}", out.verdicts);
        assert_eq!(out.verdicts.len(), 7);
        // negative controls: an inflated inradius caves the ball upper
        // bound and the geometric sanity check, a deflated one pushes the
        // inradius lower bounds over the measured value
        let big = run_bounds_report(&shape, 2.0, Some(1.0 / 16.0), Some(1.0)).unwrap();
        assert!(!big.all_pass);
        let find = |o: &BoundsRunOutcome, n: &str| {
            o.verdicts.iter().find(|v| v.report.name == n).unwrap().pass
        };
        assert!(!find(&big, "ball_upper"));
        assert!(!find(&big, "geometric"));
        let small = run_bounds_report(&shape, 2.0, Some(1.0 / 16.0), Some(0.05)).unwrap();
        assert!(!find(&small, "hersch_protter"));
        assert!(!find(&small, "hardy"));
    }

    #[test]
    fn sweep_dispatch_and_determinism() {
        let mut spec = SweepSpec::new("pyramid", 2.0);
        spec.alphas = vec![0.8, 0.4];
        let a = run_sweep(&spec).unwrap().to_csv();
        let b = run_sweep(&spec).unwrap().to_csv();
        assert_eq!(a, b);
        assert!(a.starts_with("alpha,"));
        let unknown = SweepSpec::new("mystery", 2.0);
        assert!(run_sweep(&unknown).is_err());
    }
}
