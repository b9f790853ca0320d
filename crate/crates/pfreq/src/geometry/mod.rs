//! Convex geometry: polygons, halfspace intersections, inballs, contact
//! sets, the tangent envelope and its pyramid decomposition.
//!
//! General polygon operations are 2D only. Higher dimensions enter solely
//! through the analytic `ShapeFamily` formulas (boxes, pyramids, disks).
//! Everything here is pure and deterministic; tolerances are explicit.

mod lp;
pub mod sample;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default geometric tolerance on unit-scale inputs (tangency, containment).
pub const DEFAULT_TOL: f64 = 1e-9;

/// Needle guard: polygons with diameter/(2 inradius) above this are rejected,
/// since meshing and the LP both degrade silently on such inputs.
pub const MAX_ASPECT: f64 = 1e6;

pub type Point = [f64; 2];

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("invalid halfspace set: {0}")]
    InvalidHalfspaces(String),
    #[error("invalid shape parameter: {0}")]
    InvalidParameter(String),
    #[error("halfspace set has empty interior")]
    Infeasible,
    #[error("inradius is unbounded")]
    UnboundedInradius,
    #[error("halfspace set is unbounded")]
    Unbounded,
    #[error("degenerate contact set: only {found} tangent edge(s) within tol")]
    DegenerateContact { found: usize },
    #[error("no tangent subset reproduces the inradius")]
    EnvelopeFailure,
    #[error("face {face} misses the inball: distance {dist}, radius {radius}")]
    TangencyViolation { face: usize, dist: f64, radius: f64 },
    #[error("point lies outside the domain")]
    OutsideDomain,
}

// Small vector helpers; a full linear algebra crate is not warranted for 2D.
#[inline]
pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}
#[inline]
pub(crate) fn dot2(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}
#[inline]
pub(crate) fn cross2(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}
#[inline]
pub(crate) fn norm2(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// Distance from `x` to the segment `[a, b]`, with the closest point.
pub(crate) fn segment_distance(x: Point, a: Point, b: Point) -> (f64, Point) {
    let ab = sub(b, a);
    let len2 = dot2(ab, ab);
    let t = if len2 > 0.0 {
        (dot2(sub(x, a), ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let foot = [a[0] + t * ab[0], a[1] + t * ab[1]];
    (norm2(sub(x, foot)), foot)
}

/// A bounded, strictly convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Validates orientation, strict convexity and the needle guard.
    /// Collinear triples and repeated vertices are rejected.
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        let k = vertices.len();
        if k < 3 {
            return Err(GeometryError::InvalidPolygon(format!(
                "need at least 3 vertices, got {k}"
            )));
        }
        for v in &vertices {
            if !v[0].is_finite() || !v[1].is_finite() {
                return Err(GeometryError::InvalidPolygon(
                    "non-finite coordinate".into(),
                ));
            }
        }
        for i in 0..k {
            let a = vertices[i];
            let b = vertices[(i + 1) % k];
            let c = vertices[(i + 2) % k];
            let e1 = sub(b, a);
            let e2 = sub(c, b);
            let (n1, n2) = (norm2(e1), norm2(e2));
            if n1 == 0.0 || n2 == 0.0 {
                return Err(GeometryError::InvalidPolygon(format!(
                    "repeated vertex at index {i}"
                )));
            }
            let turn = cross2(e1, e2);
            if turn <= 1e-12 * n1 * n2 {
                return Err(GeometryError::InvalidPolygon(format!(
                    "not strictly convex/counterclockwise at vertex {}",
                    (i + 1) % k
                )));
            }
        }
        let pg = ConvexPolygon { vertices };
        debug_assert!(pg.measure() > 0.0);
        let inball = chebyshev_center(&pg.to_halfspaces())?;
        let aspect = pg.diameter() / (2.0 * inball.radius);
        if !(aspect <= MAX_ASPECT) {
            return Err(GeometryError::InvalidPolygon(format!(
                "needle polygon rejected: aspect ratio {aspect:.3e} exceeds {MAX_ASPECT:.0e}"
            )));
        }
        Ok(pg)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Edge `i` runs from vertex `i` to vertex `i+1` (cyclic).
    pub fn edge(&self, i: usize) -> (Point, Point) {
        let k = self.vertices.len();
        (self.vertices[i % k], self.vertices[(i + 1) % k])
    }

    /// Shoelace area; positive because vertices are counterclockwise.
    pub fn measure(&self) -> f64 {
        let k = self.vertices.len();
        let mut twice = 0.0;
        for i in 0..k {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % k];
            twice += cross2(a, b);
        }
        0.5 * twice
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.vertices.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                norm2(sub(b, a))
            })
            .sum()
    }

    pub fn diameter(&self) -> f64 {
        let vs = &self.vertices;
        let mut d = 0.0_f64;
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                d = d.max(norm2(sub(vs[j], vs[i])));
            }
        }
        d
    }

    pub fn centroid(&self) -> Point {
        // Area-weighted centroid via the standard shoelace moments.
        let k = self.vertices.len();
        let (mut cx, mut cy, mut a) = (0.0, 0.0, 0.0);
        for i in 0..k {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % k];
            let w = cross2(p, q);
            cx += (p[0] + q[0]) * w;
            cy += (p[1] + q[1]) * w;
            a += w;
        }
        [cx / (3.0 * a), cy / (3.0 * a)]
    }

    /// Smallest interior angle, used to scale mesh quality thresholds.
    pub fn min_interior_angle(&self) -> f64 {
        let k = self.vertices.len();
        let mut best = f64::INFINITY;
        for i in 0..k {
            let prev = self.vertices[(i + k - 1) % k];
            let cur = self.vertices[i];
            let next = self.vertices[(i + 1) % k];
            let u = sub(cur, prev);
            let w = sub(next, cur);
            let turn = cross2(u, w).atan2(dot2(u, w));
            best = best.min(std::f64::consts::PI - turn);
        }
        best
    }

    pub fn contains(&self, x: Point, tol: f64) -> bool {
        let k = self.vertices.len();
        for i in 0..k {
            let (a, b) = self.edge(i);
            let e = sub(b, a);
            let n = [e[1], -e[0]]; // outward for CCW
            let nn = norm2(n);
            if dot2(n, sub(x, a)) > tol * nn {
                return false;
            }
        }
        true
    }

    /// One row per edge, outward unit normals, offsets `n . v`.
    pub fn to_halfspaces(&self) -> HalfspaceSet {
        let k = self.vertices.len();
        let mut rows = Vec::with_capacity(k);
        for i in 0..k {
            let (a, b) = self.edge(i);
            let e = sub(b, a);
            let len = norm2(e);
            let n = [e[1] / len, -e[0] / len];
            rows.push(Halfspace {
                a: vec![n[0], n[1]],
                b: n[0] * a[0] + n[1] * a[1],
            });
        }
        HalfspaceSet { dim: 2, rows }
    }

    pub fn scaled(&self, t: f64) -> Result<ConvexPolygon, GeometryError> {
        if !(t > 0.0) {
            return Err(GeometryError::InvalidParameter(
                "scale factor must be positive".into(),
            ));
        }
        ConvexPolygon::new(self.vertices.iter().map(|v| [t * v[0], t * v[1]]).collect())
    }

    pub fn translated(&self, dx: f64, dy: f64) -> ConvexPolygon {
        ConvexPolygon {
            vertices: self.vertices.iter().map(|v| [v[0] + dx, v[1] + dy]).collect(),
        }
    }
}

/// One closed halfspace `<a, x> <= b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub a: Vec<f64>,
    pub b: f64,
}

/// An intersection of halfspaces in `dim` dimensions. May be unbounded;
/// boundedness is checked where an operation requires it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfspaceSet {
    dim: usize,
    rows: Vec<Halfspace>,
}

impl HalfspaceSet {
    pub fn new(dim: usize, rows: Vec<Halfspace>) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::InvalidHalfspaces("dim must be >= 1".into()));
        }
        if rows.is_empty() {
            return Err(GeometryError::InvalidHalfspaces("no rows".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.a.len() != dim {
                return Err(GeometryError::InvalidHalfspaces(format!(
                    "row {i} has {} coefficients, expected {dim}",
                    r.a.len()
                )));
            }
            if !r.b.is_finite() || r.a.iter().any(|v| !v.is_finite()) {
                return Err(GeometryError::InvalidHalfspaces(format!(
                    "row {i} has non-finite entries"
                )));
            }
            let norm: f64 = r.a.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-12 {
                return Err(GeometryError::InvalidHalfspaces(format!(
                    "row {i} has a (near-)zero normal"
                )));
            }
        }
        Ok(HalfspaceSet { dim, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Halfspace] {
        &self.rows
    }

    /// True iff the sorted outward-normal angles leave no gap of pi or more;
    /// for a feasible 2D set this is exactly boundedness. 2D only.
    pub fn is_bounded_2d(&self) -> bool {
        assert_eq!(self.dim, 2, "boundedness test is 2D only");
        let mut angles: Vec<f64> = self
            .rows
            .iter()
            .map(|r| r.a[1].atan2(r.a[0]))
            .collect();
        angles.sort_by(f64::total_cmp);
        let k = angles.len();
        if k < 3 {
            return false;
        }
        let tau = std::f64::consts::TAU;
        let mut max_gap: f64 = 0.0;
        for i in 0..k {
            let next = if i + 1 == k { angles[0] + tau } else { angles[i + 1] };
            max_gap = max_gap.max(next - angles[i]);
        }
        max_gap < std::f64::consts::PI - 1e-12
    }
}

/// Largest inscribed ball: center (the Chebyshev center) and radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InballResult {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Solves `max r : <a_i, x> + r|a_i| <= b_i` by the dense simplex.
///
/// An empty interior reports `Infeasible`; a region that admits arbitrarily
/// large balls reports `UnboundedInradius`.
pub fn chebyshev_center(h: &HalfspaceSet) -> Result<InballResult, GeometryError> {
    let d = h.dim;
    let mut rows = Vec::with_capacity(h.rows.len());
    let mut rhs = Vec::with_capacity(h.rows.len());
    let mut scale = 0.0_f64;
    for r in &h.rows {
        let norm: f64 = r.a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut row: Vec<f64> = r.a.iter().map(|v| v / norm).collect();
        row.push(1.0);
        rows.push(row);
        rhs.push(r.b / norm);
        scale = scale.max((r.b / norm).abs());
    }
    let mut c = vec![0.0; d + 1];
    c[d] = 1.0;
    match lp::solve_max(&c, &rows, &rhs) {
        lp::LpOutcome::Unbounded => Err(GeometryError::UnboundedInradius),
        lp::LpOutcome::Infeasible => Err(GeometryError::Infeasible),
        lp::LpOutcome::Optimal { z, value } => {
            if value <= 1e-12 * scale.max(1.0) {
                return Err(GeometryError::Infeasible);
            }
            Ok(InballResult {
                center: z[..d].to_vec(),
                radius: value,
            })
        }
    }
}

/// A contact point: the foot of the inball on a tangent edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactPoint {
    pub edge: usize,
    pub point: Point,
}

/// All edge foot-points at distance `radius +- tol` from the center.
/// A valid maximal inball always touches at least two edges.
pub fn contact_set(
    pg: &ConvexPolygon,
    inball: &InballResult,
    tol: f64,
) -> Result<Vec<ContactPoint>, GeometryError> {
    assert_eq!(inball.center.len(), 2);
    let center = [inball.center[0], inball.center[1]];
    let mut out = Vec::new();
    for i in 0..pg.len() {
        let (a, b) = pg.edge(i);
        let (dist, foot) = segment_distance(center, a, b);
        if (dist - inball.radius).abs() <= tol {
            out.push(ContactPoint { edge: i, point: foot });
        }
    }
    if out.len() < 2 {
        return Err(GeometryError::DegenerateContact { found: out.len() });
    }
    Ok(out)
}

/// Tangent envelope: supporting halfplanes at contact points, added greedily
/// in angular order until the intersection both reproduces the inradius and
/// positively spans the plane (no normal gap of pi or more). If the contact
/// normals never span, the tangent set is slab-like and all of it is kept.
pub fn polyhedral_envelope(pg: &ConvexPolygon) -> Result<HalfspaceSet, GeometryError> {
    let hs = pg.to_halfspaces();
    let inball = chebyshev_center(&hs)?;
    let scale = pg.diameter();
    let contacts = contact_set(pg, &inball, 1e-7 * scale)?;

    let mut cands: Vec<(f64, usize)> = contacts
        .iter()
        .map(|c| {
            let row = &hs.rows[c.edge];
            (row.a[1].atan2(row.a[0]), c.edge)
        })
        .collect();
    cands.sort_by(|x, y| f64::total_cmp(&x.0, &y.0).then(x.1.cmp(&y.1)));
    cands.dedup_by(|a, b| a.1 == b.1);

    let radius_tol = 1e-9 * scale.max(1.0);
    let mut selected: Vec<Halfspace> = Vec::new();
    for (idx, &(_, edge)) in cands.iter().enumerate() {
        selected.push(hs.rows[edge].clone());
        if selected.len() < 2 {
            continue;
        }
        let t = HalfspaceSet {
            dim: 2,
            rows: selected.clone(),
        };
        let spans = t.is_bounded_2d();
        if !spans && idx + 1 < cands.len() {
            continue;
        }
        if let Ok(ball) = chebyshev_center(&t) {
            if (ball.radius - inball.radius).abs() <= radius_tol && (spans || idx + 1 == cands.len())
            {
                return Ok(t);
            }
        }
    }
    // All tangent halfplanes together must pin the inradius; anything else
    // indicates an inconsistent inball, not a valid input class.
    let t = HalfspaceSet {
        dim: 2,
        rows: selected,
    };
    match chebyshev_center(&t) {
        Ok(ball) if (ball.radius - inball.radius).abs() <= radius_tol => Ok(t),
        _ => Err(GeometryError::EnvelopeFailure),
    }
}

/// One cone of the decomposition: the convex hull of a face and the center.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PyramidPiece {
    pub face: usize,
    pub apex: Vec<f64>,
    pub measure: f64,
}

/// Splits a bounded 2D tangent set into cones over its faces with apex at
/// the inball center. Requires every row tangent to the inball.
pub fn pyramid_decomposition(
    t: &HalfspaceSet,
    inball: &InballResult,
) -> Result<Vec<PyramidPiece>, GeometryError> {
    if t.dim != 2 {
        return Err(GeometryError::InvalidHalfspaces(
            "pyramid decomposition is 2D only".into(),
        ));
    }
    let center = [inball.center[0], inball.center[1]];
    let scale = inball.radius.max(1.0);
    let tol = 1e-9 * scale;

    for (i, r) in t.rows.iter().enumerate() {
        let norm: f64 = r.a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dist = (r.b - (r.a[0] * center[0] + r.a[1] * center[1])) / norm;
        if (dist - inball.radius).abs() > tol {
            return Err(GeometryError::TangencyViolation {
                face: i,
                dist,
                radius: inball.radius,
            });
        }
    }
    if !t.is_bounded_2d() {
        return Err(GeometryError::Unbounded);
    }

    let verts = halfspace_vertices_2d(t)?;
    let mut pieces = Vec::with_capacity(t.rows.len());
    for (i, r) in t.rows.iter().enumerate() {
        let norm: f64 = r.a.iter().map(|v| v * v).sum::<f64>().sqrt();
        // Face endpoints: the extreme feasible vertices on this row's line.
        let on_line: Vec<Point> = verts
            .iter()
            .copied()
            .filter(|v| ((r.a[0] * v[0] + r.a[1] * v[1]) - r.b).abs() <= 1e-7 * norm * scale)
            .collect();
        if on_line.len() < 2 {
            return Err(GeometryError::InvalidHalfspaces(format!(
                "row {i} does not support a face"
            )));
        }
        let dir = [-r.a[1] / norm, r.a[0] / norm];
        let proj = |v: Point| dot2(dir, v);
        let lo = on_line
            .iter()
            .copied()
            .min_by(|x, y| f64::total_cmp(&proj(*x), &proj(*y)))
            .unwrap();
        let hi = on_line
            .iter()
            .copied()
            .max_by(|x, y| f64::total_cmp(&proj(*x), &proj(*y)))
            .unwrap();
        let measure = 0.5 * cross2(sub(lo, center), sub(hi, center)).abs();
        if !(measure > 0.0) {
            return Err(GeometryError::InvalidHalfspaces(format!(
                "face {i} has zero cone measure"
            )));
        }
        pieces.push(PyramidPiece {
            face: i,
            apex: inball.center.clone(),
            measure,
        });
    }
    Ok(pieces)
}

/// Vertices of a bounded 2D halfspace intersection, counterclockwise.
/// Pairwise line intersections filtered by feasibility; duplicates merged.
pub fn halfspace_vertices_2d(t: &HalfspaceSet) -> Result<Vec<Point>, GeometryError> {
    if t.dim != 2 {
        return Err(GeometryError::InvalidHalfspaces(
            "vertex extraction is 2D only".into(),
        ));
    }
    if !t.is_bounded_2d() {
        return Err(GeometryError::Unbounded);
    }
    let rows = &t.rows;
    let scale = rows
        .iter()
        .map(|r| {
            let n: f64 = r.a.iter().map(|v| v * v).sum::<f64>().sqrt();
            (r.b / n).abs()
        })
        .fold(1.0_f64, f64::max);
    let tol = 1e-9 * scale;

    let mut pts: Vec<Point> = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (ai, aj) = (&rows[i].a, &rows[j].a);
            let det = ai[0] * aj[1] - ai[1] * aj[0];
            let ni: f64 = ai.iter().map(|v| v * v).sum::<f64>().sqrt();
            let nj: f64 = aj.iter().map(|v| v * v).sum::<f64>().sqrt();
            if det.abs() <= 1e-12 * ni * nj {
                continue;
            }
            let x = (rows[i].b * aj[1] - rows[j].b * ai[1]) / det;
            let y = (ai[0] * rows[j].b - aj[0] * rows[i].b) / det;
            let feasible = rows.iter().all(|r| {
                let n: f64 = r.a.iter().map(|v| v * v).sum::<f64>().sqrt();
                r.a[0] * x + r.a[1] * y - r.b <= 1e-7 * n * scale
            });
            if feasible {
                pts.push([x, y]);
            }
        }
    }
    if pts.len() < 3 {
        return Err(GeometryError::Infeasible);
    }
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
    pts.sort_by(|p, q| {
        f64::total_cmp(
            &(p[1] - cy).atan2(p[0] - cx),
            &(q[1] - cy).atan2(q[0] - cx),
        )
    });
    pts.dedup_by(|p, q| norm2(sub(*p, *q)) <= 10.0 * tol);
    if pts.len() >= 2 && norm2(sub(pts[0], *pts.last().unwrap())) <= 10.0 * tol {
        pts.pop();
    }
    if pts.len() < 3 {
        return Err(GeometryError::Infeasible);
    }
    Ok(pts)
}

/// Interior distance to the boundary: min over edges of the point-to-segment
/// distance. Exterior points are an error, not a negative value.
pub fn distance_to_boundary(pg: &ConvexPolygon, x: Point) -> Result<f64, GeometryError> {
    let scale = pg.diameter();
    if !pg.contains(x, 1e-9 * scale) {
        return Err(GeometryError::OutsideDomain);
    }
    let mut best = f64::INFINITY;
    for i in 0..pg.len() {
        let (a, b) = pg.edge(i);
        best = best.min(segment_distance(x, a, b).0);
    }
    Ok(best)
}

/// Perimeter value with an exactness marker: lateral faces of pyramids in
/// dimension three and higher are reported asymptotically (value for alpha
/// small), everything else is exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerimeterValue {
    pub value: f64,
    pub exact: bool,
}

/// Analytic shape families. `Box` lengths are full side lengths; `SlabBox`
/// is the box (0,L)^(N-1) x (0,1) used to approximate slabs; the pyramid is
/// conv((-1,1)^(N-1) x {0} u {(0,..,0,alpha)}).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeFamily {
    Box { lengths: Vec<f64> },
    SlabBox {
        #[serde(rename = "N")]
        dim: usize,
        #[serde(rename = "L")]
        length: f64,
    },
    CollapsingPyramid {
        #[serde(rename = "N")]
        dim: usize,
        alpha: f64,
    },
    RegularPolygon {
        #[serde(rename = "k")]
        sides: usize,
        circumradius: f64,
    },
    Disk {
        #[serde(rename = "r")]
        radius: f64,
    },
}

impl ShapeFamily {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: String| Err(GeometryError::InvalidParameter(m));
        match self {
            ShapeFamily::Box { lengths } => {
                if lengths.is_empty() {
                    return bad("box needs at least one side length".into());
                }
                if !lengths.iter().all(|&l| l.is_finite() && l > 0.0) {
                    return bad("box side lengths must be positive".into());
                }
            }
            ShapeFamily::SlabBox { dim, length } => {
                if *dim < 2 {
                    return bad("slab box needs dimension >= 2".into());
                }
                if !(length.is_finite() && *length > 0.0) {
                    return bad("slab box length must be positive".into());
                }
            }
            ShapeFamily::CollapsingPyramid { dim, alpha } => {
                if *dim < 2 {
                    return bad("collapsing pyramid needs dimension >= 2".into());
                }
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return bad("pyramid apex height alpha must be positive".into());
                }
            }
            ShapeFamily::RegularPolygon { sides, circumradius } => {
                if *sides < 3 {
                    return bad("regular polygon needs at least 3 sides".into());
                }
                if !(circumradius.is_finite() && *circumradius > 0.0) {
                    return bad("circumradius must be positive".into());
                }
            }
            ShapeFamily::Disk { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad("disk radius must be positive".into());
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ShapeFamily::Box { lengths } => lengths.len(),
            ShapeFamily::SlabBox { dim, .. } | ShapeFamily::CollapsingPyramid { dim, .. } => *dim,
            ShapeFamily::RegularPolygon { .. } | ShapeFamily::Disk { .. } => 2,
        }
    }

    pub fn inradius(&self) -> f64 {
        match self {
            ShapeFamily::Box { lengths } => {
                0.5 * lengths.iter().copied().fold(f64::INFINITY, f64::min)
            }
            ShapeFamily::SlabBox { length, .. } => 0.5 * length.min(1.0),
            ShapeFamily::CollapsingPyramid { alpha, .. } => {
                alpha / (1.0 + (1.0 + alpha * alpha).sqrt())
            }
            ShapeFamily::RegularPolygon { sides, circumradius } => {
                circumradius * (std::f64::consts::PI / *sides as f64).cos()
            }
            ShapeFamily::Disk { radius } => *radius,
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            ShapeFamily::Box { lengths } => lengths.iter().product(),
            ShapeFamily::SlabBox { dim, length } => length.powi(*dim as i32 - 1),
            ShapeFamily::CollapsingPyramid { dim, alpha } => {
                alpha * 2f64.powi(*dim as i32 - 1) / *dim as f64
            }
            ShapeFamily::RegularPolygon { sides, circumradius } => {
                let k = *sides as f64;
                0.5 * k * circumradius * circumradius * (std::f64::consts::TAU / k).sin()
            }
            ShapeFamily::Disk { radius } => std::f64::consts::PI * radius * radius,
        }
    }

    pub fn perimeter(&self) -> PerimeterValue {
        let exact = |value| PerimeterValue { value, exact: true };
        match self {
            ShapeFamily::Box { lengths } => {
                let vol: f64 = lengths.iter().product();
                exact(2.0 * lengths.iter().map(|l| vol / l).sum::<f64>())
            }
            ShapeFamily::SlabBox { dim, length } => ShapeFamily::Box {
                lengths: box_lengths(*dim, *length),
            }
            .perimeter(),
            ShapeFamily::CollapsingPyramid { dim, alpha } => {
                if *dim == 2 {
                    exact(2.0 + 2.0 * (1.0 + alpha * alpha).sqrt())
                } else {
                    // Base measure dominates as alpha -> 0; lateral faces are
                    // not needed anywhere at finite alpha for N >= 3.
                    PerimeterValue {
                        value: 2f64.powi(*dim as i32),
                        exact: false,
                    }
                }
            }
            ShapeFamily::RegularPolygon { sides, circumradius } => {
                let k = *sides as f64;
                exact(2.0 * k * circumradius * (std::f64::consts::PI / k).sin())
            }
            ShapeFamily::Disk { radius } => exact(std::f64::consts::TAU * radius),
        }
    }

    /// 2D families as explicit polygons; `None` for the disk (callers pick an
    /// inscribed approximation explicitly) and for higher dimensions.
    pub fn polygon(&self) -> Option<ConvexPolygon> {
        match self {
            ShapeFamily::Box { lengths } if lengths.len() == 2 => {
                Some(rectangle(lengths[0], lengths[1]))
            }
            ShapeFamily::SlabBox { dim: 2, length } => Some(rectangle(*length, 1.0)),
            ShapeFamily::CollapsingPyramid { dim: 2, alpha } => Some(
                ConvexPolygon::new(vec![[-1.0, 0.0], [1.0, 0.0], [0.0, *alpha]])
                    .expect("pyramid triangle is valid for alpha > 0"),
            ),
            ShapeFamily::RegularPolygon { sides, circumradius } => {
                Some(regular_polygon(*sides, *circumradius))
            }
            _ => None,
        }
    }
}

fn box_lengths(dim: usize, length: f64) -> Vec<f64> {
    let mut v = vec![length; dim - 1];
    v.push(1.0);
    v
}

pub fn rectangle(lx: f64, ly: f64) -> ConvexPolygon {
    ConvexPolygon::new(vec![[0.0, 0.0], [lx, 0.0], [lx, ly], [0.0, ly]])
        .expect("rectangle with positive sides is valid")
}

pub fn regular_polygon(sides: usize, circumradius: f64) -> ConvexPolygon {
    let k = sides.max(3);
    let verts = (0..k)
        .map(|i| {
            let th = std::f64::consts::TAU * i as f64 / k as f64;
            [circumradius * th.cos(), circumradius * th.sin()]
        })
        .collect();
    ConvexPolygon::new(verts).expect("regular polygon is valid")
}

/// Closed-form data for the collapsing pyramid C_alpha.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapsingPyramidData {
    pub inradius: f64,
    pub measure: f64,
    pub perimeter: PerimeterValue,
    pub polygon: Option<ConvexPolygon>,
}

/// Inradius alpha/(1+sqrt(1+alpha^2)), measure alpha 2^(N-1)/N, perimeter
/// exact in 2D; emits the triangle itself when N = 2.
pub fn collapsing_pyramid(dim: usize, alpha: f64) -> Result<CollapsingPyramidData, GeometryError> {
    let fam = ShapeFamily::CollapsingPyramid { dim, alpha };
    fam.validate()?;
    Ok(CollapsingPyramidData {
        inradius: fam.inradius(),
        measure: fam.measure(),
        perimeter: fam.perimeter(),
        polygon: fam.polygon(),
    })
}
