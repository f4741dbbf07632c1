//! Closed, oriented triangle meshes with half-edge connectivity and face tags.
//!
//! Positions are stored in meters. Half-edges are implicit: half-edge
//! `3 * f + i` runs from `faces[f][i]` to `faces[f][(i + 1) % 3]`, so only the
//! twin map and one outgoing half-edge per vertex are stored.

mod io;
mod projector;
mod sphere;
mod stats;
mod validate;

pub use io::{load_mesh, read_mesh, read_tags, save_mesh, save_tags, write_mesh, write_tags};
pub use projector::{Projection, SurfaceProjector};
pub use sphere::make_sphere;
pub use stats::{mesh_stats, MeshStats};
pub use validate::{validate_mesh, ValidationReport, Violation, AREA_EPS, VERTEX_EPS};

use crate::error::{Error, Result};
use crate::geometry::{area_vector, centroid, diameter, triangle_area, Vec3};

pub type TagId = u16;

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    face_tags: Vec<Option<TagId>>,
    labels: Vec<String>,
    twins: Vec<u32>,
    vertex_halfedge: Vec<u32>,
}

impl TriangleMesh {
    /// Builds and validates a mesh. Fails on the first invariant violation.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self> {
        let report = validate_mesh(&vertices, &faces);
        if let Some(v) = report.violations.into_iter().next() {
            return Err(violation_error(v));
        }
        let twins = build_twins(&faces);
        let mut vertex_halfedge = vec![u32::MAX; vertices.len()];
        for (f, face) in faces.iter().enumerate() {
            for (i, &v) in face.iter().enumerate() {
                if vertex_halfedge[v as usize] == u32::MAX {
                    vertex_halfedge[v as usize] = (3 * f + i) as u32;
                }
            }
        }
        let face_tags = vec![None; faces.len()];
        Ok(Self { vertices, faces, face_tags, labels: Vec::new(), twins, vertex_halfedge })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_edges(&self) -> usize {
        self.faces.len() * 3 / 2
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    pub fn face_vertices(&self, f: usize) -> [Vec3; 3] {
        self.faces[f].map(|v| self.vertices[v as usize])
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.face_vertices(f);
        triangle_area(&a, &b, &c)
    }

    pub fn face_normal(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.face_vertices(f);
        area_vector(&a, &b, &c).normalize()
    }

    pub fn face_centroid(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.face_vertices(f);
        centroid(&a, &b, &c)
    }

    pub fn face_diameter(&self, f: usize) -> f64 {
        let [a, b, c] = self.face_vertices(f);
        diameter(&a, &b, &c)
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.num_faces()).map(|f| self.face_area(f)).sum()
    }

    // -- half-edge queries ------------------------------------------------

    pub fn halfedge_from(&self, h: usize) -> u32 {
        self.faces[h / 3][h % 3]
    }

    pub fn halfedge_to(&self, h: usize) -> u32 {
        self.faces[h / 3][(h % 3 + 1) % 3]
    }

    pub fn next(&self, h: usize) -> usize {
        3 * (h / 3) + (h % 3 + 1) % 3
    }

    pub fn prev(&self, h: usize) -> usize {
        3 * (h / 3) + (h % 3 + 2) % 3
    }

    pub fn twin(&self, h: usize) -> usize {
        self.twins[h] as usize
    }

    /// Undirected edges as `(representative half-edge, a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, u32, u32)> + '_ {
        (0..self.twins.len()).filter_map(move |h| {
            let (a, b) = (self.halfedge_from(h), self.halfedge_to(h));
            (a < b).then_some((h, a, b))
        })
    }

    /// Outgoing half-edges of `v`, in rotational order.
    pub fn outgoing(&self, v: u32) -> impl Iterator<Item = usize> + '_ {
        let start = self.vertex_halfedge[v as usize] as usize;
        let mut cur = Some(start);
        std::iter::from_fn(move || {
            let h = cur?;
            let n = self.twin(self.prev(h));
            cur = (n != start).then_some(n);
            Some(h)
        })
    }

    pub fn valence(&self, v: u32) -> usize {
        self.outgoing(v).count()
    }

    pub fn neighbors(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        self.outgoing(v).map(move |h| self.halfedge_to(h))
    }

    // -- tags ------------------------------------------------------------------

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_id(&self, label: &str) -> Option<TagId> {
        self.labels.iter().position(|l| l == label).map(|i| i as TagId)
    }

    pub fn face_tag(&self, f: usize) -> Option<TagId> {
        self.face_tags[f]
    }

    pub fn face_tags(&self) -> &[Option<TagId>] {
        &self.face_tags
    }

    pub fn face_label(&self, f: usize) -> Option<&str> {
        self.face_tags[f].map(|t| self.labels[t as usize].as_str())
    }

    fn intern_label(&mut self, label: &str) -> TagId {
        match self.label_id(label) {
            Some(id) => id,
            None => {
                self.labels.push(label.to_string());
                (self.labels.len() - 1) as TagId
            }
        }
    }

    /// Tags the given faces with `label`, replacing any previous tag.
    pub fn tag_faces(&mut self, label: &str, faces: &[usize]) -> Result<()> {
        if let Some(&bad) = faces.iter().find(|&&f| f >= self.faces.len()) {
            return Err(Error::InvalidArgument(format!(
                "tag references face {bad} but mesh has {} faces",
                self.faces.len()
            )));
        }
        let id = self.intern_label(label);
        for &f in faces {
            self.face_tags[f] = Some(id);
        }
        Ok(())
    }

    /// Tags every face whose centroid lies within `radius` of `point`; the
    /// face nearest to `point` is always included.
    pub fn tag_faces_near(&mut self, label: &str, point: &Vec3, radius: f64) -> Vec<usize> {
        let mut nearest = (f64::INFINITY, 0);
        let mut hits = Vec::new();
        for f in 0..self.num_faces() {
            let d = (self.face_centroid(f) - point).norm();
            if d < nearest.0 {
                nearest = (d, f);
            }
            if d <= radius {
                hits.push(f);
            }
        }
        if hits.is_empty() {
            hits.push(nearest.1);
        }
        self.tag_faces(label, &hits).expect("indices in range");
        hits
    }

    pub fn faces_with_label(&self, label: &str) -> Vec<usize> {
        match self.label_id(label) {
            Some(id) => (0..self.faces.len()).filter(|&f| self.face_tags[f] == Some(id)).collect(),
            None => Vec::new(),
        }
    }

    /// Area-weighted centroid of the faces carrying `label`.
    pub fn patch_center(&self, label: &str) -> Result<Vec3> {
        let faces = self.faces_with_label(label);
        if faces.is_empty() {
            return Err(Error::MissingPatch(label.to_string()));
        }
        let mut acc = Vec3::zeros();
        let mut area = 0.0;
        for f in faces {
            let a = self.face_area(f);
            acc += self.face_centroid(f) * a;
            area += a;
        }
        Ok(acc / area)
    }

    pub(crate) fn set_tags(&mut self, labels: Vec<String>, face_tags: Vec<Option<TagId>>) {
        debug_assert_eq!(face_tags.len(), self.faces.len());
        self.labels = labels;
        self.face_tags = face_tags;
    }

    /// Re-runs the full invariant check.
    pub fn validate(&self) -> ValidationReport {
        validate_mesh(&self.vertices, &self.faces)
    }
}

fn build_twins(faces: &[[u32; 3]]) -> Vec<u32> {
    let mut keys: Vec<(u32, u32, u32)> = Vec::with_capacity(faces.len() * 3);
    for (f, face) in faces.iter().enumerate() {
        for i in 0..3 {
            let a = face[i];
            let b = face[(i + 1) % 3];
            keys.push((a.min(b), a.max(b), (3 * f + i) as u32));
        }
    }
    keys.sort_unstable();
    let mut twins = vec![u32::MAX; keys.len()];
    for pair in keys.chunks_exact(2) {
        twins[pair[0].2 as usize] = pair[1].2;
        twins[pair[1].2 as usize] = pair[0].2;
    }
    twins
}

fn violation_error(v: Violation) -> Error {
    match v {
        Violation::BadVertexIndex { face, vertex } => Error::BadVertexIndex(face, vertex),
        Violation::OpenBoundary { a, b, .. } => Error::OpenBoundary(a, b),
        Violation::NonManifoldEdge { a, b, faces } => Error::NonManifoldEdge(a, b, faces.len()),
        Violation::Orientation { a, b, faces } => {
            Error::InconsistentOrientation { face: faces[1], a, b }
        }
        Violation::Degenerate { face, area } => Error::DegenerateFace(face, area),
        other => Error::InvalidMesh(other.to_string()),
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Regular icosahedron with unit edge length.
    pub fn icosahedron_raw() -> (Vec<Vec3>, Vec<[u32; 3]>) {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let s = 0.5; // scales edge length 2 -> 1
        let v = [
            [-1.0, phi, 0.0],
            [1.0, phi, 0.0],
            [-1.0, -phi, 0.0],
            [1.0, -phi, 0.0],
            [0.0, -1.0, phi],
            [0.0, 1.0, phi],
            [0.0, -1.0, -phi],
            [0.0, 1.0, -phi],
            [phi, 0.0, -1.0],
            [phi, 0.0, 1.0],
            [-phi, 0.0, -1.0],
            [-phi, 0.0, 1.0],
        ]
        .iter()
        .map(|p| Vec3::new(p[0], p[1], p[2]) * s)
        .collect();
        let f = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        (v, f)
    }

    pub fn icosahedron() -> TriangleMesh {
        let (v, f) = icosahedron_raw();
        TriangleMesh::new(v, f).unwrap()
    }

    pub fn tetrahedron_raw() -> (Vec<Vec3>, Vec<[u32; 3]>) {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let f = vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]];
        (v, f)
    }
}
