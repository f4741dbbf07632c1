//! Mutable triangle mesh used by the remesher.
//!
//! Same implicit half-edge layout as [`TriangleMesh`]: half-edge `3f + i`
//! runs from `faces[f][i]` to `faces[f][(i + 1) % 3]`. Removed faces and
//! vertices are flagged dead and dropped by [`DynMesh::into_mesh`].

use crate::error::{Error, Result};
use crate::geometry::{area_vector, Vec3};
use crate::mesh::{TagId, TriangleMesh};

#[derive(Debug, Clone)]
pub(crate) struct DynMesh {
    pub pos: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    pub twins: Vec<u32>,
    pub vh: Vec<u32>,
    pub face_alive: Vec<bool>,
    pub vert_alive: Vec<bool>,
    pub tags: Vec<Option<TagId>>,
    /// Reference-surface face nearest to each vertex, used as projection hint.
    pub hint: Vec<u32>,
}

impl DynMesh {
    pub fn from_mesh(mesh: &TriangleMesh) -> Self {
        let faces = mesh.faces().to_vec();
        let twins = (0..3 * faces.len()).map(|h| mesh.twin(h) as u32).collect();
        let mut vh = vec![u32::MAX; mesh.num_vertices()];
        for v in 0..mesh.num_vertices() as u32 {
            vh[v as usize] = mesh.outgoing(v).next().unwrap() as u32;
        }
        let hint = vh.iter().map(|&h| h / 3).collect();
        Self {
            pos: mesh.vertices().to_vec(),
            face_alive: vec![true; faces.len()],
            vert_alive: vec![true; mesh.num_vertices()],
            tags: mesh.face_tags().to_vec(),
            faces,
            twins,
            vh,
            hint,
        }
    }

    #[inline]
    pub fn from(&self, h: usize) -> u32 {
        self.faces[h / 3][h % 3]
    }

    #[inline]
    pub fn to(&self, h: usize) -> u32 {
        self.faces[h / 3][(h % 3 + 1) % 3]
    }

    #[inline]
    pub fn next(&self, h: usize) -> usize {
        3 * (h / 3) + (h % 3 + 1) % 3
    }

    #[inline]
    pub fn prev(&self, h: usize) -> usize {
        3 * (h / 3) + (h % 3 + 2) % 3
    }

    #[inline]
    pub fn twin(&self, h: usize) -> usize {
        self.twins[h] as usize
    }

    #[inline]
    pub fn num_halfedges(&self) -> usize {
        self.twins.len()
    }

    #[inline]
    pub fn halfedge_alive(&self, h: usize) -> bool {
        self.face_alive[h / 3]
    }

    #[inline]
    pub fn length(&self, h: usize) -> f64 {
        (self.pos[self.from(h) as usize] - self.pos[self.to(h) as usize]).norm()
    }

    #[inline]
    pub fn midpoint(&self, h: usize) -> Vec3 {
        (self.pos[self.from(h) as usize] + self.pos[self.to(h) as usize]) * 0.5
    }

    pub fn face_area_vector(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.faces[f].map(|v| self.pos[v as usize]);
        area_vector(&a, &b, &c)
    }

    /// Outgoing half-edges of `v` in rotational order, written to `out`.
    pub fn outgoing_into(&self, v: u32, out: &mut Vec<usize>) {
        out.clear();
        let start = self.vh[v as usize] as usize;
        let mut h = start;
        loop {
            out.push(h);
            h = self.twin(self.prev(h));
            if h == start {
                break;
            }
            debug_assert!(out.len() < 1 << 16, "vertex fan does not close");
        }
    }

    pub fn valence(&self, v: u32) -> usize {
        let start = self.vh[v as usize] as usize;
        let mut h = start;
        let mut n = 0;
        loop {
            n += 1;
            h = self.twin(self.prev(h));
            if h == start {
                return n;
            }
        }
    }

    pub fn is_neighbor(&self, v: u32, w: u32) -> bool {
        let start = self.vh[v as usize] as usize;
        let mut h = start;
        loop {
            if self.to(h) == w {
                return true;
            }
            h = self.twin(self.prev(h));
            if h == start {
                return false;
            }
        }
    }

    /// True if the faces around `v` carry more than one distinct tag.
    pub fn on_tag_boundary(&self, v: u32) -> bool {
        let start = self.vh[v as usize] as usize;
        let t0 = self.tags[start / 3];
        let mut h = self.twin(self.prev(start));
        while h != start {
            if self.tags[h / 3] != t0 {
                return true;
            }
            h = self.twin(self.prev(h));
        }
        false
    }

    #[inline]
    fn link(&mut self, a: usize, b: usize) {
        self.twins[a] = b as u32;
        self.twins[b] = a as u32;
    }

    /// Splits the edge of `h` at `p`, turning its two faces into four.
    /// Returns the new vertex.
    pub fn split(&mut self, h: usize, p: Vec3, hint: u32) -> u32 {
        let ht = self.twin(h);
        let (f0, f1) = (h / 3, ht / 3);
        let (a, b) = (self.from(h), self.to(h));
        let c = self.to(self.next(h));
        let d = self.to(self.next(ht));
        let t_bc = self.twin(self.next(h));
        let t_ca = self.twin(self.prev(h));
        let t_ad = self.twin(self.next(ht));
        let t_db = self.twin(self.prev(ht));

        let m = self.pos.len() as u32;
        self.pos.push(p);
        self.vert_alive.push(true);
        self.vh.push(u32::MAX);
        self.hint.push(hint);

        let n0 = self.faces.len();
        let n1 = n0 + 1;
        self.faces.push([m, b, c]);
        self.faces.push([m, a, d]);
        self.face_alive.extend([true, true]);
        self.tags.push(self.tags[f0]);
        self.tags.push(self.tags[f1]);
        self.twins.extend([u32::MAX; 6]);
        self.faces[f0] = [a, m, c];
        self.faces[f1] = [b, m, d];

        self.link(3 * f0, 3 * n1);
        self.link(3 * f0 + 1, 3 * n0 + 2);
        self.link(3 * f0 + 2, t_ca);
        self.link(3 * n0, 3 * f1);
        self.link(3 * n0 + 1, t_bc);
        self.link(3 * f1 + 1, 3 * n1 + 2);
        self.link(3 * f1 + 2, t_db);
        self.link(3 * n1 + 1, t_ad);

        self.vh[a as usize] = (3 * f0) as u32;
        self.vh[b as usize] = (3 * n0 + 1) as u32;
        self.vh[c as usize] = (3 * f0 + 2) as u32;
        self.vh[d as usize] = (3 * f1 + 2) as u32;
        self.vh[m as usize] = (3 * n0) as u32;
        m
    }

    /// Collapses the edge of `h`, removing `to(h)` and moving `from(h)` to `p`.
    /// The caller must have checked the link condition.
    pub fn collapse(&mut self, h: usize, p: Vec3, hint: u32, fan_b: &[usize]) {
        let ht = self.twin(h);
        let (f0, f1) = (h / 3, ht / 3);
        let (a, b) = (self.from(h), self.to(h));
        let c = self.to(self.next(h));
        let d = self.to(self.next(ht));
        let t_bc = self.twin(self.next(h));
        let t_ca = self.twin(self.prev(h));
        let t_ad = self.twin(self.next(ht));
        let t_db = self.twin(self.prev(ht));

        for &hb in fan_b {
            self.faces[hb / 3][hb % 3] = a;
        }
        self.link(t_bc, t_ca);
        self.link(t_ad, t_db);
        self.face_alive[f0] = false;
        self.face_alive[f1] = false;
        self.vert_alive[b as usize] = false;
        self.pos[a as usize] = p;
        self.hint[a as usize] = hint;
        self.vh[a as usize] = t_db as u32;
        self.vh[c as usize] = t_bc as u32;
        self.vh[d as usize] = t_ad as u32;
    }

    /// Replaces the edge of `h` by the opposite diagonal of its quad.
    pub fn flip(&mut self, h: usize) {
        let ht = self.twin(h);
        let (f0, f1) = (h / 3, ht / 3);
        let (a, b) = (self.from(h), self.to(h));
        let c = self.to(self.next(h));
        let d = self.to(self.next(ht));
        let t_bc = self.twin(self.next(h));
        let t_ca = self.twin(self.prev(h));
        let t_ad = self.twin(self.next(ht));
        let t_db = self.twin(self.prev(ht));

        self.faces[f0] = [a, d, c];
        self.faces[f1] = [d, b, c];
        self.link(3 * f0, t_ad);
        self.link(3 * f0 + 1, 3 * f1 + 2);
        self.link(3 * f0 + 2, t_ca);
        self.link(3 * f1, t_db);
        self.link(3 * f1 + 1, t_bc);

        self.vh[a as usize] = (3 * f0) as u32;
        self.vh[b as usize] = (3 * f1 + 1) as u32;
        self.vh[c as usize] = (3 * f0 + 2) as u32;
        self.vh[d as usize] = (3 * f1) as u32;
    }

    /// Compacts live elements and rebuilds a validated [`TriangleMesh`].
    pub fn into_mesh(self, labels: Vec<String>) -> Result<TriangleMesh> {
        let mut remap = vec![u32::MAX; self.pos.len()];
        let mut vertices = Vec::new();
        for (v, p) in self.pos.iter().enumerate() {
            if self.vert_alive[v] {
                remap[v] = vertices.len() as u32;
                vertices.push(*p);
            }
        }
        let mut faces = Vec::new();
        let mut tags = Vec::new();
        for (f, face) in self.faces.iter().enumerate() {
            if self.face_alive[f] {
                faces.push(face.map(|v| remap[v as usize]));
                tags.push(self.tags[f]);
            }
        }
        let mut mesh =
            TriangleMesh::new(vertices, faces).map_err(|e| Error::Remesh(e.to_string()))?;
        mesh.set_tags(labels, tags);
        Ok(mesh)
    }

    /// Structural self-check used by tests.
    #[cfg(test)]
    pub fn check(&self) {
        for h in 0..self.num_halfedges() {
            if !self.halfedge_alive(h) {
                continue;
            }
            let t = self.twin(h);
            assert!(self.halfedge_alive(t), "twin of {h} is dead");
            assert_eq!(self.twin(t), h);
            assert_eq!(self.from(t), self.to(h));
            assert_eq!(self.to(t), self.from(h));
        }
        for v in 0..self.pos.len() {
            if self.vert_alive[v] {
                let h = self.vh[v] as usize;
                assert!(self.halfedge_alive(h));
                assert_eq!(self.from(h), v as u32);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::fixtures::icosahedron;

    #[test]
    fn split_collapse_flip_keep_connectivity() {
        let m = icosahedron();
        let mut d = DynMesh::from_mesh(&m);
        let h = 0;
        let p = d.midpoint(h);
        let v = d.split(h, p, 0);
        d.check();
        assert_eq!(d.valence(v), 4);
        let mut fan = Vec::new();
        // collapse the new vertex back into an endpoint
        let hv = d.vh[v as usize] as usize;
        let ht = d.twin(hv);
        d.outgoing_into(v, &mut fan);
        let a = d.from(ht);
        let pa = d.pos[a as usize];
        d.collapse(ht, pa, 0, &fan);
        d.check();
        let out = d.clone().into_mesh(Vec::new()).unwrap();
        assert_eq!(out.num_faces(), 20);

        let before: usize = (0..12).map(|v| d.valence(v)).sum();
        let h = (0..d.num_halfedges()).find(|&h| d.halfedge_alive(h)).unwrap();
        d.flip(h);
        d.check();
        let after: usize = (0..12).filter(|&v| d.vert_alive[v as usize]).map(|v| d.valence(v)).sum();
        assert_eq!(before, after);
        d.into_mesh(Vec::new()).unwrap();
    }
}
