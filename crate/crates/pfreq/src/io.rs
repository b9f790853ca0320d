//! JSON import/export for the geometry and mesh types. Parsers are the
//! crate's untrusted-input surface (also exercised by the fuzz targets):
//! they must return errors, never panic, on arbitrary bytes.

use crate::eigensolver::{MeshError, NodeMark, TriangleMesh};
use crate::geometry::{ConvexPolygon, GeometryError, Halfspace, HalfspaceSet, ShapeFamily};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Deserialize)]
struct PolygonWire {
    vertices: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct PolygonWireOut<'a> {
    vertices: &'a [[f64; 2]],
}

/// {"vertices": [[x,y], ...]} counterclockwise.
pub fn polygon_from_json(text: &str) -> Result<ConvexPolygon, IoError> {
    let wire: PolygonWire = serde_json::from_str(text)?;
    Ok(ConvexPolygon::new(wire.vertices)?)
}

pub fn polygon_to_json(pg: &ConvexPolygon) -> String {
    serde_json::to_string(&PolygonWireOut { vertices: pg.vertices() }).expect("serialize")
}

#[derive(Deserialize)]
struct HalfspaceSetWire {
    dim: usize,
    rows: Vec<Halfspace>,
}

/// {"dim": N, "rows": [{"a": [...], "b": s}, ...]}. Row validation
/// (finite entries, nonzero normals, matching dimension) happens in
/// HalfspaceSet::new.
pub fn halfspaces_from_json(text: &str) -> Result<HalfspaceSet, IoError> {
    let wire: HalfspaceSetWire = serde_json::from_str(text)?;
    Ok(HalfspaceSet::new(wire.dim, wire.rows)?)
}

pub fn halfspaces_to_json(hs: &HalfspaceSet) -> String {
    #[derive(Serialize)]
    struct SetOut<'a> {
        dim: usize,
        rows: &'a [Halfspace],
    }
    serde_json::to_string(&SetOut { dim: hs.dim(), rows: hs.rows() }).expect("serialize")
}

/// {"kind": "collapsing_pyramid", "N": 2, "alpha": 0.1} and friends;
/// the tagged enum derives the wire format, validation happens after.
pub fn shape_from_json(text: &str) -> Result<ShapeFamily, IoError> {
    let shape: ShapeFamily = serde_json::from_str(text)?;
    shape.validate()?;
    Ok(shape)
}

pub fn shape_to_json(shape: &ShapeFamily) -> String {
    serde_json::to_string(shape).expect("serialize")
}

#[derive(Serialize, Deserialize)]
struct MeshWire {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    marks: Vec<NodeMark>,
}

/// {"nodes": [...], "triangles": [...], "marks": ["free"|"dirichlet", ...]}.
/// The mesh invariants (orientation, conformity, mark count) are enforced
/// on import, so a deserialized mesh is as trustworthy as a built one.
pub fn mesh_from_json(text: &str) -> Result<TriangleMesh, IoError> {
    let wire: MeshWire = serde_json::from_str(text)?;
    // h is not part of the wire format; reconstruct a consistent value
    // from the longest edge so refinement bookkeeping stays meaningful.
    let mut h = 0.0_f64;
    for t in &wire.triangles {
        for k in 0..3 {
            let (i, j) = (t[k], t[(k + 1) % 3]);
            if i < wire.nodes.len() && j < wire.nodes.len() {
                let (a, b) = (wire.nodes[i], wire.nodes[j]);
                h = h.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
    }
    if !(h > 0.0) {
        h = 1.0;
    }
    Ok(TriangleMesh::new(
        wire.nodes,
        wire.triangles,
        wire.marks,
        h,
        vec![],
    )?)
}

pub fn mesh_to_json(mesh: &TriangleMesh) -> String {
    serde_json::to_string(&MeshWire {
        nodes: mesh.nodes().to_vec(),
        triangles: mesh.triangles().to_vec(),
        marks: mesh.marks().to_vec(),
    })
    .expect("serialize")
}
