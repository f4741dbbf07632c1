//! Incremental isotropic remesher driven by a graded target field.
//!
//! Each iteration runs, in order: split long edges, collapse short edges
//! (shortest first), flip edges towards valence 6, tangential smoothing with
//! reprojection.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::dynmesh::DynMesh;
use super::{GradingFamily, GradingSpec, TargetField, COLLAPSE_RATIO, SPLIT_RATIO};
use crate::error::Result;
use crate::geometry::{area_vector, Vec3};
use crate::mesh::{mesh_stats, MeshStats, SurfaceProjector, TriangleMesh, AREA_EPS};

const SMOOTHING_DAMPING: f64 = 0.5;
const MAX_SPLIT_PASSES: usize = 32;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IterationStats {
    pub splits: usize,
    pub collapses: usize,
    pub flips: usize,
    pub relocations: usize,
}

#[derive(Debug, Clone)]
pub struct GradedMeshReport {
    pub spec: GradingSpec,
    pub stats: MeshStats,
    pub trace: Vec<IterationStats>,
    /// Fraction of output edges with `4/5 ℓ̂ <= ℓ <= 4/3 ℓ̂`.
    pub within_band: f64,
    pub patch_center: Option<Vec3>,
    pub d_max: Option<f64>,
}

impl GradedMeshReport {
    pub const TRACE_CSV_HEADER: &'static str = "iteration,splits,collapses,flips,relocations";

    pub fn trace_csv(&self) -> String {
        let mut s = String::from(Self::TRACE_CSV_HEADER);
        s.push('\n');
        for (i, t) in self.trace.iter().enumerate() {
            let _ = writeln!(s, "{},{},{},{},{}", i + 1, t.splits, t.collapses, t.flips, t.relocations);
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let sp = &self.spec;
        let _ = writeln!(
            s,
            "grading = {} ({}, alpha {}, lmin {} mm, lmax {} mm)",
            sp.name(),
            sp.family,
            sp.alpha,
            sp.lmin_mm,
            sp.lmax_mm
        );
        if let (Some(c), Some(d)) = (self.patch_center, self.d_max) {
            let _ = writeln!(s, "patch_center_m = {:.6} {:.6} {:.6}", c.x, c.y, c.z);
            let _ = writeln!(s, "d_max_m = {d:.6}");
        }
        let _ = writeln!(s, "iterations = {}", self.trace.len());
        let _ = writeln!(s, "within_band = {:.4}", self.within_band);
        s.push_str(&self.stats.to_key_value());
        s
    }
}

/// Remeshes `mesh` towards the target field of `spec`. Vertices are kept on
/// the surface seen by `projector` (normally built from `mesh` itself).
pub fn remesh(
    mesh: &TriangleMesh,
    spec: &GradingSpec,
    projector: &SurfaceProjector,
) -> Result<(TriangleMesh, GradedMeshReport)> {
    let field = TargetField::new(mesh, spec)?;
    let mut r = Remesher {
        d: DynMesh::from_mesh(mesh),
        field: &field,
        projector,
        tag_counts: vec![0; mesh.labels().len()],
        fan_a: Vec::new(),
        fan_b: Vec::new(),
    };
    for t in mesh.face_tags().iter().flatten() {
        r.tag_counts[*t as usize] += 1;
    }

    let mut trace = Vec::with_capacity(spec.iterations);
    for _ in 0..spec.iterations {
        let splits = r.split_long_edges();
        let collapses = r.collapse_short_edges();
        let flips = r.equalize_valences();
        let relocations = r.smooth();
        trace.push(IterationStats { splits, collapses, flips, relocations });
    }

    let out = r.d.into_mesh(mesh.labels().to_vec())?;
    let graded = spec.family != GradingFamily::Uniform;
    let report = GradedMeshReport {
        spec: spec.clone(),
        stats: mesh_stats(&out),
        trace,
        within_band: edge_band_fraction(&out, &field),
        patch_center: graded.then(|| field.center()),
        d_max: graded.then(|| field.d_max()),
    };
    Ok((out, report))
}

/// Fraction of edges whose length lies within the remesher thresholds of
/// the local target.
pub fn edge_band_fraction(mesh: &TriangleMesh, field: &TargetField) -> f64 {
    let v = mesh.vertices();
    let mut inside = 0usize;
    let mut total = 0usize;
    for (_, a, b) in mesh.edges() {
        let (pa, pb) = (v[a as usize], v[b as usize]);
        let t = field.at(&((pa + pb) * 0.5));
        let l = (pa - pb).norm();
        total += 1;
        if l >= COLLAPSE_RATIO * t && l <= SPLIT_RATIO * t {
            inside += 1;
        }
    }
    inside as f64 / total as f64
}

struct Remesher<'a> {
    d: DynMesh,
    field: &'a TargetField,
    projector: &'a SurfaceProjector,
    tag_counts: Vec<usize>,
    fan_a: Vec<usize>,
    fan_b: Vec<usize>,
}

impl Remesher<'_> {
    fn project(&self, p: &Vec3, hint: u32) -> (Vec3, u32) {
        let pr = self.projector.project_with_hint(p, Some(hint as usize));
        (pr.point, pr.face as u32)
    }

    fn split_long_edges(&mut self) -> usize {
        let mut total = 0;
        for _ in 0..MAX_SPLIT_PASSES {
            let mut count = 0;
            let mut h = 0;
            while h < self.d.num_halfedges() {
                if self.d.halfedge_alive(h) && h < self.d.twin(h) {
                    let mid = self.d.midpoint(h);
                    if self.d.length(h) > SPLIT_RATIO * self.field.at(&mid) {
                        let hint = self.d.hint[self.d.from(h) as usize];
                        let (p, face) = self.project(&mid, hint);
                        self.d.split(h, p, face);
                        count += 1;
                    }
                }
                h += 1;
            }
            total += count;
            if count == 0 {
                break;
            }
        }
        total
    }

    fn collapse_short_edges(&mut self) -> usize {
        let mut count = 0;
        let mut order: Vec<(f64, usize)> = (0..self.d.num_halfedges())
            .filter(|&h| self.d.halfedge_alive(h) && h < self.d.twin(h))
            .filter_map(|h| {
                let r = self.d.length(h) / self.field.at(&self.d.midpoint(h));
                (r < COLLAPSE_RATIO).then_some((r, h))
            })
            .collect();
        order.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for (_, h) in order {
            if !self.d.halfedge_alive(h) {
                continue;
            }
            let mid = self.d.midpoint(h);
            if self.d.length(h) >= COLLAPSE_RATIO * self.field.at(&mid) {
                continue;
            }
            let ht = self.d.twin(h);
            let (a, b) = (self.d.from(h), self.d.to(h));
            let (fa, fb) = (self.d.on_tag_boundary(a), self.d.on_tag_boundary(b));
            // (half-edge whose origin survives, keep that origin in place)
            let (hc, keep) = match (fa, fb) {
                (false, false) => (h, false),
                (true, false) => (h, true),
                (false, true) => (ht, true),
                (true, true) => {
                    if self.d.tags[h / 3] == self.d.tags[ht / 3] {
                        continue;
                    }
                    (h, false)
                }
            };
            let a = self.d.from(hc);
            let (p, hint) = if keep {
                (self.d.pos[a as usize], self.d.hint[a as usize])
            } else {
                self.project(&mid, self.d.hint[a as usize])
            };
            if self.collapse_ok(hc, &p) {
                self.d.outgoing_into(self.d.to(hc), &mut self.fan_b);
                let fan = std::mem::take(&mut self.fan_b);
                for f in [hc / 3, self.d.twin(hc) / 3] {
                    if let Some(t) = self.d.tags[f] {
                        self.tag_counts[t as usize] -= 1;
                    }
                }
                self.d.collapse(hc, p, hint, &fan);
                self.fan_b = fan;
                count += 1;
            }
        }
        count
    }

    /// Checks for collapsing `to(h)` into `from(h)` placed at `p`.
    fn collapse_ok(&mut self, h: usize, p: &Vec3) -> bool {
        let d = &self.d;
        let ht = d.twin(h);
        let (f0, f1) = (h / 3, ht / 3);
        let (a, b) = (d.from(h), d.to(h));

        // a tag must keep at least one face
        match (d.tags[f0], d.tags[f1]) {
            (Some(t0), Some(t1)) if t0 == t1 => {
                if self.tag_counts[t0 as usize] <= 2 {
                    return false;
                }
            }
            (t0, t1) => {
                for t in [t0, t1].into_iter().flatten() {
                    if self.tag_counts[t as usize] <= 1 {
                        return false;
                    }
                }
            }
        }

        d.outgoing_into(a, &mut self.fan_a);
        d.outgoing_into(b, &mut self.fan_b);

        // link condition: exactly the two opposite vertices are shared
        let common = self
            .fan_b
            .iter()
            .filter(|&&hb| {
                let w = d.to(hb);
                self.fan_a.iter().any(|&ha| d.to(ha) == w)
            })
            .count();
        if common != 2 {
            return false;
        }

        for (fan, moved) in [(&self.fan_a, a), (&self.fan_b, b)] {
            for &hv in fan.iter() {
                let f = hv / 3;
                let w = d.to(hv);
                if w != a && w != b {
                    let pw = d.pos[w as usize];
                    if (p - pw).norm() > SPLIT_RATIO * self.field.at(&((p + pw) * 0.5)) {
                        return false;
                    }
                }
                if f == f0 || f == f1 {
                    continue;
                }
                let old = d.face_area_vector(f);
                let q = d.faces[f].map(|v| if v == moved { *p } else { d.pos[v as usize] });
                let new = area_vector(&q[0], &q[1], &q[2]);
                if new.dot(&old) <= 0.0 || new.norm() <= 2.0 * AREA_EPS {
                    return false;
                }
            }
        }
        true
    }

    fn equalize_valences(&mut self) -> usize {
        let mut count = 0;
        for h in 0..self.d.num_halfedges() {
            let d = &self.d;
            if !d.halfedge_alive(h) || h > d.twin(h) {
                continue;
            }
            let ht = d.twin(h);
            if d.tags[h / 3] != d.tags[ht / 3] {
                continue;
            }
            let (a, b) = (d.from(h), d.to(h));
            let c = d.to(d.next(h));
            let e = d.to(d.next(ht));
            if c == e || d.is_neighbor(c, e) {
                continue;
            }
            let val = [a, b, c, e].map(|v| d.valence(v) as i64);
            if val[0] <= 3 || val[1] <= 3 {
                continue;
            }
            let dev = |v: [i64; 4]| v.iter().map(|x| (x - 6) * (x - 6)).sum::<i64>();
            let after = [val[0] - 1, val[1] - 1, val[2] + 1, val[3] + 1];
            if dev(after) >= dev(val) {
                continue;
            }
            let [pa, pb, pc, pe] = [a, b, c, e].map(|v| d.pos[v as usize]);
            let old = d.face_area_vector(h / 3) + d.face_area_vector(ht / 3);
            let n0 = area_vector(&pa, &pe, &pc);
            let n1 = area_vector(&pe, &pb, &pc);
            if n0.dot(&n1) <= 0.0
                || n0.dot(&old) <= 0.0
                || n1.dot(&old) <= 0.0
                || n0.norm() <= 2.0 * AREA_EPS
                || n1.norm() <= 2.0 * AREA_EPS
            {
                continue;
            }
            self.d.flip(h);
            count += 1;
        }
        count
    }

    /// One damped tangential Laplacian step (Jacobi update), then projection
    /// back onto the reference surface. Tag-boundary vertices stay fixed.
    fn smooth(&mut self) -> usize {
        let d = &self.d;
        let projector = self.projector;
        let updates: Vec<Option<(Vec3, u32)>> = (0..d.pos.len())
            .into_par_iter()
            .map(|v| {
                let v32 = v as u32;
                if !d.vert_alive[v] || d.on_tag_boundary(v32) {
                    return None;
                }
                let p = d.pos[v];
                let mut normal = Vec3::zeros();
                let mut weighted = Vec3::zeros();
                let mut area = 0.0;
                let start = d.vh[v] as usize;
                let mut h = start;
                loop {
                    let f = h / 3;
                    let av = d.face_area_vector(f);
                    let [x, y, z] = d.faces[f].map(|i| d.pos[i as usize]);
                    let w = av.norm();
                    normal += av;
                    weighted += (x + y + z) * (w / 3.0);
                    area += w;
                    h = d.twin(d.prev(h));
                    if h == start {
                        break;
                    }
                }
                let n = normal.try_normalize(0.0)?;
                let delta = weighted / area - p;
                let tangential = delta - n * n.dot(&delta);
                let moved = p + tangential * SMOOTHING_DAMPING;
                let pr = projector.project_with_hint(&moved, Some(d.hint[v] as usize));
                Some((pr.point, pr.face as u32))
            })
            .collect();
        let mut count = 0;
        for (v, u) in updates.into_iter().enumerate() {
            if let Some((p, face)) = u {
                self.d.pos[v] = p;
                self.d.hint[v] = face;
                count += 1;
            }
        }
        count
    }
}
