//! Triangle meshes on convex polygons.
//!
//! Node layout: boundary nodes from edge subdivision at ceil(len/h), then
//! interior nodes on an axis grid (spacing 0.95 h, boundary clearance
//! 0.4 h), connected by an incremental Delaunay pass. The generator is a
//! deterministic function of (polygon, h).

use crate::geometry::{distance_to_boundary, norm2, sub, ConvexPolygon, Point};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MeshError {
    #[error("invalid mesh spacing: {0}")]
    InvalidH(String),
    #[error("mesh generation failed: {0}")]
    MeshFailure(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeMark {
    Dirichlet,
    Free,
}

/// Conforming triangulation with per-node boundary marks. The Dirichlet
/// segments are kept so refinement can re-derive marks geometrically.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    marks: Vec<NodeMark>,
    h: f64,
    dirichlet_segments: Vec<(Point, Point)>,
}

impl TriangleMesh {
    /// Manual construction with full validation: positive orientation, area
    /// above 1e-14, index bounds, edge shared by at most two triangles.
    pub fn new(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        marks: Vec<NodeMark>,
        h: f64,
        dirichlet_segments: Vec<(Point, Point)>,
    ) -> Result<Self, MeshError> {
        if marks.len() != nodes.len() {
            return Err(MeshError::InvalidMesh(format!(
                "{} marks for {} nodes",
                marks.len(),
                nodes.len()
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(MeshError::InvalidH(format!("h = {h}")));
        }
        if triangles.is_empty() {
            return Err(MeshError::InvalidMesh("no triangles".into()));
        }
        let mut edge_count: HashMap<(usize, usize), u32> = HashMap::new();
        for (ti, t) in triangles.iter().enumerate() {
            for &i in t {
                if i >= nodes.len() {
                    return Err(MeshError::InvalidMesh(format!(
                        "triangle {ti} references node {i} out of {}",
                        nodes.len()
                    )));
                }
            }
            let area = tri_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
            if area <= 1e-14 {
                return Err(MeshError::InvalidMesh(format!(
                    "triangle {ti} has nonpositive or tiny area {area:.3e}"
                )));
            }
            for k in 0..3 {
                let e = edge_key(t[k], t[(k + 1) % 3]);
                *edge_count.entry(e).or_insert(0) += 1;
            }
        }
        if edge_count.values().any(|&c| c > 2) {
            return Err(MeshError::InvalidMesh(
                "an edge is shared by more than two triangles".into(),
            ));
        }
        Ok(TriangleMesh { nodes, triangles, marks, h, dirichlet_segments })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn marks(&self) -> &[NodeMark] {
        &self.marks
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn free_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.marks[i] == NodeMark::Free)
            .collect()
    }

    /// Kahan-compensated so the cover check stays sharp on large meshes.
    pub fn area(&self) -> f64 {
        let (mut s, mut c) = (0.0_f64, 0.0_f64);
        for t in &self.triangles {
            let a = tri_area(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]);
            let y = a - c;
            let tmp = s + y;
            c = (tmp - s) - y;
            s = tmp;
        }
        s
    }

    pub fn max_edge(&self) -> f64 {
        let mut m = 0.0_f64;
        for t in &self.triangles {
            for k in 0..3 {
                m = m.max(norm2(sub(self.nodes[t[(k + 1) % 3]], self.nodes[t[k]])));
            }
        }
        m
    }

    pub fn min_angle(&self) -> f64 {
        let mut m = f64::INFINITY;
        for t in &self.triangles {
            for k in 0..3 {
                let a = self.nodes[t[k]];
                let b = self.nodes[t[(k + 1) % 3]];
                let c = self.nodes[t[(k + 2) % 3]];
                let u = sub(b, a);
                let v = sub(c, a);
                let ang = crate::geometry::cross2(u, v)
                    .atan2(crate::geometry::dot2(u, v));
                m = m.min(ang.abs());
            }
        }
        m
    }

    /// Nested quadsection: every triangle split into four via edge
    /// midpoints. Marks are re-derived from the stored Dirichlet segments,
    /// so chord midpoints between two boundary nodes stay Free.
    pub fn refine(&self) -> TriangleMesh {
        let mut nodes = self.nodes.clone();
        let mut marks = self.marks.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let tol = 1e-9 * self.h.max(1.0);
        let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<Point>, marks: &mut Vec<NodeMark>| {
            *mid.entry(edge_key(a, b)).or_insert_with(|| {
                let p = [
                    0.5 * (nodes[a][0] + nodes[b][0]),
                    0.5 * (nodes[a][1] + nodes[b][1]),
                ];
                nodes.push(p);
                let on_dirichlet = self
                    .dirichlet_segments
                    .iter()
                    .any(|&(s, e)| crate::geometry::segment_distance(p, s, e).0 <= tol);
                marks.push(if on_dirichlet { NodeMark::Dirichlet } else { NodeMark::Free });
                nodes.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(self.triangles.len() * 4);
        for t in &self.triangles {
            let m01 = midpoint(t[0], t[1], &mut nodes, &mut marks);
            let m12 = midpoint(t[1], t[2], &mut nodes, &mut marks);
            let m20 = midpoint(t[2], t[0], &mut nodes, &mut marks);
            triangles.push([t[0], m01, m20]);
            triangles.push([t[1], m12, m01]);
            triangles.push([t[2], m20, m12]);
            triangles.push([m01, m12, m20]);
        }
        TriangleMesh {
            nodes,
            triangles,
            marks,
            h: self.h * 0.5,
            dirichlet_segments: self.dirichlet_segments.clone(),
        }
    }
}

#[inline]
fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[inline]
pub(crate) fn tri_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * crate::geometry::cross2(sub(b, a), sub(c, a))
}

/// Triangulate with the whole boundary Dirichlet.
pub fn triangulate(pg: &ConvexPolygon, h: f64) -> Result<TriangleMesh, MeshError> {
    let all: Vec<usize> = (0..pg.len()).collect();
    triangulate_mixed(pg, h, &all)
}

/// Triangulate with Dirichlet marks only on the listed polygon edges;
/// remaining boundary nodes are Free (natural boundary condition).
pub fn triangulate_mixed(
    pg: &ConvexPolygon,
    h: f64,
    dirichlet_edges: &[usize],
) -> Result<TriangleMesh, MeshError> {
    let shortest = (0..pg.len())
        .map(|i| {
            let (a, b) = pg.edge(i);
            norm2(sub(b, a))
        })
        .fold(f64::INFINITY, f64::min);
    if !(h.is_finite() && h > 0.0) {
        return Err(MeshError::InvalidH(format!("h = {h}")));
    }
    if h >= shortest {
        return Err(MeshError::InvalidH(format!(
            "h = {h} must be smaller than the shortest polygon edge {shortest:.6}"
        )));
    }
    for &e in dirichlet_edges {
        if e >= pg.len() {
            return Err(MeshError::InvalidMesh(format!(
                "dirichlet edge index {e} out of range"
            )));
        }
    }

    // Boundary nodes: each edge split into ceil(len/h) equal segments.
    // A vertex is Dirichlet when either incident edge is.
    let mut nodes: Vec<Point> = Vec::new();
    let mut marks: Vec<NodeMark> = Vec::new();
    let is_d = |e: usize| dirichlet_edges.contains(&e);
    for i in 0..pg.len() {
        let (a, b) = pg.edge(i);
        let len = norm2(sub(b, a));
        let m = (len / h).ceil() as usize;
        for j in 0..m {
            let t = j as f64 / m as f64;
            nodes.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            let mark = if j == 0 {
                // vertex shared with the previous edge
                let prev = (i + pg.len() - 1) % pg.len();
                if is_d(i) || is_d(prev) { NodeMark::Dirichlet } else { NodeMark::Free }
            } else if is_d(i) {
                NodeMark::Dirichlet
            } else {
                NodeMark::Free
            };
            marks.push(mark);
        }
    }
    let n_boundary = nodes.len();

    // Interior grid, bbox-anchored for determinism.
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for v in pg.vertices() {
        for k in 0..2 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    let s = 0.95 * h;
    let clearance = 0.4 * h;
    let mut y = lo[1] + s;
    while y < hi[1] {
        let mut x = lo[0] + s;
        while x < hi[0] {
            let p = [x, y];
            if pg.contains(p, 0.0) {
                if let Ok(d) = distance_to_boundary(pg, p) {
                    if d >= clearance {
                        nodes.push(p);
                        marks.push(NodeMark::Free);
                    }
                }
            }
            x += s;
        }
        y += s;
    }

    let mut triangles = delaunay(&nodes)?;

    // One repair pass: long boundary-to-interior edges get a midpoint node
    // when it fits strictly inside, then the point set is retriangulated.
    let mut extra: Vec<Point> = Vec::new();
    let mut seen: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    for t in &triangles {
        for k in 0..3 {
            let (i, j) = (t[k], t[(k + 1) % 3]);
            let key = edge_key(i, j);
            if !seen.insert(key) {
                continue;
            }
            if norm2(sub(nodes[j], nodes[i])) > 1.5 * h {
                let p = [
                    0.5 * (nodes[i][0] + nodes[j][0]),
                    0.5 * (nodes[i][1] + nodes[j][1]),
                ];
                if let Ok(d) = distance_to_boundary(pg, p) {
                    if d >= 0.2 * h {
                        extra.push(p);
                    }
                }
            }
        }
    }
    if !extra.is_empty() {
        for p in extra {
            nodes.push(p);
            marks.push(NodeMark::Free);
        }
        triangles = delaunay(&nodes)?;
    }

    for t in triangles.iter_mut() {
        if tri_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) < 0.0 {
            t.swap(1, 2);
        }
    }

    let segments: Vec<(Point, Point)> = dirichlet_edges.iter().map(|&e| pg.edge(e)).collect();
    let mesh = TriangleMesh::new(nodes, triangles, marks, h, segments)?;
    validate_against(&mesh, pg, n_boundary)?;
    Ok(mesh)
}

fn validate_against(
    mesh: &TriangleMesh,
    pg: &ConvexPolygon,
    n_boundary: usize,
) -> Result<(), MeshError> {
    let area = pg.measure();
    let sum = mesh.area();
    if (sum - area).abs() > 1e-12 * area.max(1.0) {
        return Err(MeshError::MeshFailure(format!(
            "coverage gap: triangle area sum {sum} vs polygon area {area}"
        )));
    }
    let me = mesh.max_edge();
    if me > 1.5 * mesh.h {
        return Err(MeshError::MeshFailure(format!(
            "max edge {me:.6} exceeds 1.5 h = {:.6}",
            1.5 * mesh.h
        )));
    }
    let quality = (std::f64::consts::PI / 40.0).min(0.4 * pg.min_interior_angle());
    let ma = mesh.min_angle();
    if ma < quality {
        return Err(MeshError::MeshFailure(format!(
            "needle triangle: min angle {ma:.4} below threshold {quality:.4}"
        )));
    }
    // Hull edges must appear once and lie on the polygon boundary; interior
    // edges exactly twice (conformity).
    let mut edge_count: HashMap<(usize, usize), u32> = HashMap::new();
    for t in mesh.triangles() {
        for k in 0..3 {
            *edge_count.entry(edge_key(t[k], t[(k + 1) % 3])).or_insert(0) += 1;
        }
    }
    let scale = pg.diameter();
    for (&(i, j), &c) in &edge_count {
        if c == 1 {
            for &n in &[i, j] {
                if n >= n_boundary {
                    return Err(MeshError::MeshFailure(format!(
                        "hull edge uses interior node {n}"
                    )));
                }
                let on = (0..pg.len()).any(|e| {
                    let (a, b) = pg.edge(e);
                    crate::geometry::segment_distance(mesh.nodes[n], a, b).0 <= 1e-9 * scale
                });
                if !on {
                    return Err(MeshError::MeshFailure(format!(
                        "hull node {n} is off the polygon boundary"
                    )));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// incremental Delaunay with walk-based location

struct Triangulation {
    pts: Vec<Point>,
    tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    edges: HashMap<(usize, usize), [usize; 2]>,
    last: usize,
}

const NO_TRI: usize = usize::MAX;

impl Triangulation {
    fn link(&mut self, e: (usize, usize), t: usize) {
        let slot = self.edges.entry(e).or_insert([NO_TRI, NO_TRI]);
        if slot[0] == NO_TRI {
            slot[0] = t;
        } else {
            debug_assert_eq!(slot[1], NO_TRI);
            slot[1] = t;
        }
    }

    fn unlink(&mut self, e: (usize, usize), t: usize) {
        if let Some(slot) = self.edges.get_mut(&e) {
            if slot[0] == t {
                slot[0] = slot[1];
            }
            slot[1] = NO_TRI;
            if slot[0] == NO_TRI {
                self.edges.remove(&e);
            }
        }
    }

    fn neighbor(&self, e: (usize, usize), not: usize) -> usize {
        match self.edges.get(&e) {
            Some(&[a, b]) => {
                if a != not && a != NO_TRI {
                    a
                } else if b != not {
                    b
                } else {
                    NO_TRI
                }
            }
            None => NO_TRI,
        }
    }

    fn push_tri(&mut self, t: [usize; 3]) -> usize {
        let id = self.tris.len();
        self.tris.push(t);
        self.alive.push(true);
        for k in 0..3 {
            self.link(edge_key(t[k], t[(k + 1) % 3]), id);
        }
        self.last = id;
        id
    }

    fn kill_tri(&mut self, id: usize) {
        let t = self.tris[id];
        self.alive[id] = false;
        for k in 0..3 {
            self.unlink(edge_key(t[k], t[(k + 1) % 3]), id);
        }
    }

    /// Orientation walk from the last created triangle; falls back to a
    /// linear scan if the walk cycles on degenerate configurations.
    fn locate(&self, p: Point) -> Option<usize> {
        let mut cur = self.last;
        if !self.alive.get(cur).copied().unwrap_or(false) {
            cur = (0..self.tris.len()).rev().find(|&i| self.alive[i])?;
        }
        let mut steps = 0usize;
        'walk: while steps < 4 * self.tris.len() + 64 {
            steps += 1;
            let t = self.tris[cur];
            for k in 0..3 {
                let a = self.pts[t[k]];
                let b = self.pts[t[(k + 1) % 3]];
                let o = orient(a, b, p);
                if o < -orient_eps(a, b, p) {
                    let nb = self.neighbor(edge_key(t[k], t[(k + 1) % 3]), cur);
                    if nb == NO_TRI {
                        break 'walk;
                    }
                    cur = nb;
                    continue 'walk;
                }
            }
            return Some(cur);
        }
        (0..self.tris.len()).find(|&i| {
            self.alive[i] && {
                let t = self.tris[i];
                (0..3).all(|k| {
                    let a = self.pts[t[k]];
                    let b = self.pts[t[(k + 1) % 3]];
                    orient(a, b, p) >= -orient_eps(a, b, p)
                })
            }
        })
    }

    fn insert(&mut self, pi: usize) -> Result<(), MeshError> {
        let p = self.pts[pi];
        let seed = self
            .locate(p)
            .ok_or_else(|| MeshError::MeshFailure("point outside triangulation".into()))?;

        // Grow the cavity of circumcircle violations by BFS.
        let mut bad = vec![seed];
        let mut stack = vec![seed];
        while let Some(t) = stack.pop() {
            let tri = self.tris[t];
            for k in 0..3 {
                let e = edge_key(tri[k], tri[(k + 1) % 3]);
                let nb = self.neighbor(e, t);
                if nb == NO_TRI || bad.contains(&nb) {
                    continue;
                }
                let nt = self.tris[nb];
                if in_circle(self.pts[nt[0]], self.pts[nt[1]], self.pts[nt[2]], p) {
                    bad.push(nb);
                    stack.push(nb);
                }
            }
        }

        // Boundary of the cavity: edges not shared between two bad triangles.
        // Points inserted on or next to an existing edge (collinear boundary
        // subdivisions, cocircular grid rows) can leave a boundary edge the
        // new point does not see with positive orientation; fanning such an
        // edge would create an inverted or zero-area triangle. Absorb the far
        // triangle and re-collect until every fan triangle is proper.
        let boundary = loop {
            let mut boundary: Vec<(usize, usize)> = Vec::new();
            let mut grew = false;
            'scan: for &t in &bad {
                let tri = self.tris[t];
                for k in 0..3 {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    let nb = self.neighbor(edge_key(a, b), t);
                    if nb != NO_TRI && bad.contains(&nb) {
                        continue;
                    }
                    let (pa, pb) = (self.pts[a], self.pts[b]);
                    if orient(pa, pb, p) <= orient_eps(pa, pb, p) {
                        if nb == NO_TRI {
                            return Err(MeshError::MeshFailure(
                                "degenerate cavity at hull".into(),
                            ));
                        }
                        bad.push(nb);
                        grew = true;
                        break 'scan;
                    }
                    boundary.push((a, b));
                }
            }
            if !grew {
                break boundary;
            }
        };
        for &t in &bad {
            self.kill_tri(t);
        }
        for (a, b) in boundary {
            self.push_tri([a, b, pi]);
        }
        Ok(())
    }
}

#[inline]
fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

#[inline]
fn orient_eps(a: Point, b: Point, c: Point) -> f64 {
    let m = (b[0] - a[0])
        .abs()
        .max((b[1] - a[1]).abs())
        .max((c[0] - a[0]).abs())
        .max((c[1] - a[1]).abs());
    1e-13 * m * m
}

/// Strict incircle test for CCW (a, b, c); ties count as outside, which
/// keeps cocircular grid configurations deterministic.
fn in_circle(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (ax, ay) = (a[0] - d[0], a[1] - d[1]);
    let (bx, by) = (b[0] - d[0], b[1] - d[1]);
    let (cx, cy) = (c[0] - d[0], c[1] - d[1]);
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let det = ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
    let m = a2.max(b2).max(c2);
    det > 1e-11 * m * m
}

/// Delaunay triangulation of distinct points; indices into `pts`.
fn delaunay(pts: &[Point]) -> Result<Vec<[usize; 3]>, MeshError> {
    let n = pts.len();
    if n < 3 {
        return Err(MeshError::MeshFailure("fewer than 3 nodes".into()));
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let c = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let r = ((hi[0] - lo[0]).hypot(hi[1] - lo[1])).max(1e-12);
    let mut all = pts.to_vec();
    all.push([c[0] - 16.0 * r, c[1] - 8.0 * r]);
    all.push([c[0] + 16.0 * r, c[1] - 8.0 * r]);
    all.push([c[0], c[1] + 16.0 * r]);

    let mut tr = Triangulation {
        pts: all,
        tris: Vec::new(),
        alive: Vec::new(),
        edges: HashMap::new(),
        last: 0,
    };
    tr.push_tri([n, n + 1, n + 2]);
    for i in 0..n {
        tr.insert(i)?;
    }
    let out: Vec<[usize; 3]> = tr
        .tris
        .iter()
        .zip(&tr.alive)
        .filter(|(t, &alive)| alive && t.iter().all(|&i| i < n))
        .map(|(t, _)| *t)
        .collect();
    if out.is_empty() {
        return Err(MeshError::MeshFailure("empty triangulation".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rectangle, regular_polygon, sample};
    use rand::SeedableRng;

    #[test]
    fn unit_square_half_h_is_hand_countable() {
        let sq = rectangle(1.0, 1.0);
        let mesh = triangulate(&sq, 0.5).unwrap();
        assert_eq!(mesh.nodes().len(), 9);
        assert_eq!(mesh.triangles().len(), 8);
        assert!((mesh.area() - 1.0).abs() < 1e-12);
        assert!(mesh.max_edge() <= 0.75 + 1e-12);
        let nd = mesh.marks().iter().filter(|&&m| m == NodeMark::Dirichlet).count();
        assert_eq!(nd, 8);
        assert_eq!(mesh.free_nodes().len(), 1);
    }

    #[test]
    fn triangle_domain_boundary_all_dirichlet() {
        let tri = crate::geometry::ConvexPolygon::new(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])
            .unwrap();
        let mesh = triangulate(&tri, 0.3).unwrap();
        let scale = tri.diameter();
        for (i, n) in mesh.nodes().iter().enumerate() {
            let on_boundary = (0..tri.len()).any(|e| {
                let (a, b) = tri.edge(e);
                crate::geometry::segment_distance(*n, a, b).0 <= 1e-9 * scale
            });
            match mesh.marks()[i] {
                NodeMark::Dirichlet => assert!(on_boundary),
                NodeMark::Free => assert!(!on_boundary),
            }
        }
        assert!((mesh.area() - tri.measure()).abs() < 1e-12 * tri.measure().max(1.0));
    }

    #[test]
    fn coverage_and_quality_on_random_polygons() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..8 {
            let pg = sample::random_convex_polygon(&mut rng);
            let shortest = pg
                .vertices()
                .iter()
                .zip(pg.vertices().iter().cycle().skip(1))
                .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
                .fold(f64::INFINITY, f64::min);
            let h = (pg.diameter() / 16.0).min(0.9 * shortest);
            let mesh = triangulate(&pg, h).expect("meshing failed");
            assert!((mesh.area() - pg.measure()).abs() < 1e-12 * pg.measure().max(1.0));
            assert!(mesh.max_edge() <= 1.5 * h + 1e-12);
        }
    }

    #[test]
    fn mixed_marks_follow_edge_set() {
        let sq = rectangle(1.0, 1.0);
        // Dirichlet only on the bottom edge (index 0).
        let mesh = triangulate_mixed(&sq, 0.25, &[0]).unwrap();
        for (i, n) in mesh.nodes().iter().enumerate() {
            let on_bottom = n[1].abs() <= 1e-12 ;
            if mesh.marks()[i] == NodeMark::Dirichlet {
                assert!(on_bottom, "node {n:?} marked Dirichlet off the bottom edge");
            }
        }
        // corners of the bottom edge are Dirichlet
        let d = mesh
            .nodes()
            .iter()
            .zip(mesh.marks())
            .filter(|(_, &m)| m == NodeMark::Dirichlet)
            .count();
        assert_eq!(d, 5); // 4 interior subdivisions + shared corners
    }

    #[test]
    fn refine_quadruples_and_preserves_area() {
        let sq = rectangle(2.0, 1.0);
        let mesh = triangulate(&sq, 0.4).unwrap();
        let fine = mesh.refine();
        assert_eq!(fine.triangles().len(), 4 * mesh.triangles().len());
        assert!((fine.area() - mesh.area()).abs() < 1e-12 * mesh.area());
        assert!((fine.h() - 0.2).abs() < 1e-15);
        // original nodes are a prefix with unchanged marks
        for i in 0..mesh.nodes().len() {
            assert_eq!(mesh.nodes()[i], fine.nodes()[i]);
            assert_eq!(mesh.marks()[i], fine.marks()[i]);
        }
    }

    #[test]
    fn refine_marks_chord_midpoints_free() {
        let sq = rectangle(1.0, 1.0);
        let mesh = triangulate(&sq, 0.5).unwrap();
        let fine = mesh.refine();
        let scale = 1.0;
        for (i, n) in fine.nodes().iter().enumerate() {
            let on_boundary = n[0].abs() <= 1e-9 * scale
                || (n[0] - 1.0).abs() <= 1e-9 * scale
                || n[1].abs() <= 1e-9 * scale
                || (n[1] - 1.0).abs() <= 1e-9 * scale;
            assert_eq!(
                fine.marks()[i] == NodeMark::Dirichlet,
                on_boundary,
                "node {n:?}"
            );
        }
    }

    #[test]
    fn rejects_oversized_h() {
        let sq = rectangle(1.0, 1.0);
        assert!(matches!(triangulate(&sq, 1.0), Err(MeshError::InvalidH(_))));
        assert!(matches!(triangulate(&sq, -0.1), Err(MeshError::InvalidH(_))));
    }

    #[test]
    fn polygon_domain_256gon_meshes() {
        let disk = regular_polygon(256, 1.0);
        let h = 0.02;
        let mesh = triangulate(&disk, h).unwrap();
        assert!((mesh.area() - disk.measure()).abs() < 1e-12 * disk.measure());
        assert!(mesh.max_edge() <= 1.5 * h + 1e-12);
    }

    #[test]
    fn manual_mesh_validation() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let marks = vec![NodeMark::Dirichlet; 3];
        // clockwise triangle rejected
        assert!(TriangleMesh::new(nodes.clone(), vec![[0, 2, 1]], marks.clone(), 1.0, vec![])
            .is_err());
        assert!(TriangleMesh::new(nodes.clone(), vec![[0, 1, 2]], marks.clone(), 1.0, vec![])
            .is_ok());
        // out-of-range index
        assert!(TriangleMesh::new(nodes, vec![[0, 1, 7]], marks, 1.0, vec![]).is_err());
    }

    #[test]
    fn delaunay_empty_circumcircle_spot_check() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        use rand::Rng;
        let pts: Vec<[f64; 2]> = (0..60)
            .map(|_| [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let tris = delaunay(&pts).unwrap();
        // no input point strictly inside any triangle's circumcircle
        for t in &tris {
            let (a, b, c) = (pts[t[0]], pts[t[1]], pts[t[2]]);
            let (a, b, c) = if tri_area(a, b, c) > 0.0 { (a, b, c) } else { (a, c, b) };
            for (i, p) in pts.iter().enumerate() {
                if t.contains(&i) {
                    continue;
                }
                assert!(
                    !in_circle(a, b, c, *p),
                    "point {i} violates empty circumcircle of {t:?}"
                );
            }
        }
    }
}
