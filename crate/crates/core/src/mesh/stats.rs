use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::TriangleMesh;

/// Edge lengths are in millimeters, area in square meters.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshStats {
    pub l_min: f64,
    pub l_max: f64,
    pub l_avg: f64,
    pub num_faces: usize,
    pub num_vertices: usize,
    pub num_edges: usize,
    pub valence_histogram: BTreeMap<usize, usize>,
    pub area: f64,
}

pub fn mesh_stats(mesh: &TriangleMesh) -> MeshStats {
    let verts = mesh.vertices();
    let mut l_min = f64::INFINITY;
    let mut l_max: f64 = 0.0;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (_, a, b) in mesh.edges() {
        let l = (verts[a as usize] - verts[b as usize]).norm() * 1e3;
        l_min = l_min.min(l);
        l_max = l_max.max(l);
        sum += l;
        count += 1;
    }
    let mut valence_histogram = BTreeMap::new();
    for v in 0..mesh.num_vertices() as u32 {
        *valence_histogram.entry(mesh.valence(v)).or_insert(0) += 1;
    }
    MeshStats {
        l_min,
        l_max,
        l_avg: sum / count as f64,
        num_faces: mesh.num_faces(),
        num_vertices: mesh.num_vertices(),
        num_edges: count,
        valence_histogram,
        area: mesh.surface_area(),
    }
}

impl MeshStats {
    pub const CSV_HEADER: &'static str = "lhat_min,lhat_max,l_min,l_max,l_avg,n_faces";

    /// One CSV row in the column order of the published mesh tables; the
    /// target columns are empty for meshes that were not remeshed.
    pub fn csv_row(&self, target_mm: Option<(f64, f64)>) -> String {
        let (tmin, tmax) = match target_mm {
            Some((a, b)) => (format!("{a}"), format!("{b}")),
            None => (String::new(), String::new()),
        };
        format!(
            "{tmin},{tmax},{:.3},{:.3},{:.3},{}",
            self.l_min, self.l_max, self.l_avg, self.num_faces
        )
    }

    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "l_min_mm = {:.4}", self.l_min);
        let _ = writeln!(s, "l_max_mm = {:.4}", self.l_max);
        let _ = writeln!(s, "l_avg_mm = {:.4}", self.l_avg);
        let _ = writeln!(s, "faces = {}", self.num_faces);
        let _ = writeln!(s, "vertices = {}", self.num_vertices);
        let _ = writeln!(s, "edges = {}", self.num_edges);
        let _ = writeln!(s, "area_m2 = {:.6e}", self.area);
        let hist: Vec<String> =
            self.valence_histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        let _ = writeln!(s, "valence = {}", hist.join(" "));
        s
    }
}
