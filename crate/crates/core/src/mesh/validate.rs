use std::collections::HashMap;
use std::fmt;

use crate::geometry::{triangle_area, Vec3};

/// Minimum admissible face area, m^2.
pub const AREA_EPS: f64 = 1e-12;
/// Vertices closer than this are considered duplicates, m.
pub const VERTEX_EPS: f64 = 1e-9;

/// A single invariant violation found by [`validate_mesh`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    BadVertexIndex { face: usize, vertex: u32 },
    OpenBoundary { a: u32, b: u32, face: usize },
    NonManifoldEdge { a: u32, b: u32, faces: Vec<usize> },
    /// Both faces traverse the edge `a -> b` in the same direction.
    Orientation { a: u32, b: u32, faces: [usize; 2] },
    Degenerate { face: usize, area: f64 },
    DuplicateVertices { a: u32, b: u32 },
    IsolatedVertex(u32),
    NonManifoldVertex(u32),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadVertexIndex { face, vertex } => {
                write!(f, "face {face} references missing vertex {vertex}")
            }
            Violation::OpenBoundary { a, b, face } => {
                write!(f, "open boundary at edge ({a}, {b}) of face {face}")
            }
            Violation::NonManifoldEdge { a, b, faces } => {
                write!(f, "non-manifold edge ({a}, {b}) shared by faces {faces:?}")
            }
            Violation::Orientation { a, b, faces } => write!(
                f,
                "inconsistent orientation: faces {} and {} both traverse ({a}, {b})",
                faces[0], faces[1]
            ),
            Violation::Degenerate { face, area } => {
                write!(f, "degenerate face {face} (area {area:e} m^2)")
            }
            Violation::DuplicateVertices { a, b } => write!(f, "duplicate vertices {a} and {b}"),
            Violation::IsolatedVertex(v) => write!(f, "vertex {v} is not referenced by any face"),
            Violation::NonManifoldVertex(v) => {
                write!(f, "vertex {v} has a non-manifold neighbourhood")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "mesh is valid");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every `TriangleMesh` invariant on raw vertex/face data.
///
/// Violations are collected, not short-circuited, so a single call reports
/// everything wrong with a file.
pub fn validate_mesh(vertices: &[Vec3], faces: &[[u32; 3]]) -> ValidationReport {
    let mut violations = Vec::new();
    let nv = vertices.len() as u32;

    let mut index_ok = true;
    for (fi, f) in faces.iter().enumerate() {
        for &v in f {
            if v >= nv {
                violations.push(Violation::BadVertexIndex { face: fi, vertex: v });
                index_ok = false;
            }
        }
    }
    if !index_ok {
        return ValidationReport { violations };
    }

    for (fi, f) in faces.iter().enumerate() {
        let [a, b, c] = f.map(|v| vertices[v as usize]);
        let area = triangle_area(&a, &b, &c);
        if !(area > AREA_EPS) || f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
            violations.push(Violation::Degenerate { face: fi, area });
        }
    }

    violations.extend(edge_violations(faces));

    let mut referenced = vec![false; vertices.len()];
    for f in faces {
        for &v in f {
            referenced[v as usize] = true;
        }
    }
    for (v, r) in referenced.iter().enumerate() {
        if !r {
            violations.push(Violation::IsolatedVertex(v as u32));
        }
    }

    violations.extend(duplicate_vertices(vertices));

    // Vertex manifoldness only makes sense once edges are clean.
    if violations.iter().all(|v| {
        matches!(v, Violation::Degenerate { .. } | Violation::DuplicateVertices { .. })
    }) {
        violations.extend(vertex_violations(vertices.len(), faces));
    }

    ValidationReport { violations }
}

fn edge_violations(faces: &[[u32; 3]]) -> Vec<Violation> {
    // (min, max, from, face) sorted groups each undirected edge together
    let mut keys: Vec<(u32, u32, u32, usize)> = Vec::with_capacity(faces.len() * 3);
    for (fi, f) in faces.iter().enumerate() {
        for i in 0..3 {
            let a = f[i];
            let b = f[(i + 1) % 3];
            keys.push((a.min(b), a.max(b), a, fi));
        }
    }
    keys.sort_unstable();

    let mut out = Vec::new();
    let mut start = 0;
    while start < keys.len() {
        let mut end = start + 1;
        while end < keys.len() && keys[end].0 == keys[start].0 && keys[end].1 == keys[start].1 {
            end += 1;
        }
        let group = &keys[start..end];
        let (lo, hi) = (group[0].0, group[0].1);
        match group.len() {
            1 => {
                let (a, b) = directed(group[0].2, lo, hi);
                out.push(Violation::OpenBoundary { a, b, face: group[0].3 });
            }
            2 => {
                if group[0].2 == group[1].2 {
                    let (a, b) = directed(group[0].2, lo, hi);
                    out.push(Violation::Orientation { a, b, faces: [group[0].3, group[1].3] });
                }
            }
            _ => out.push(Violation::NonManifoldEdge {
                a: lo,
                b: hi,
                faces: group.iter().map(|k| k.3).collect(),
            }),
        }
        start = end;
    }
    out
}

fn directed(from: u32, lo: u32, hi: u32) -> (u32, u32) {
    if from == lo {
        (lo, hi)
    } else {
        (hi, lo)
    }
}

fn duplicate_vertices(vertices: &[Vec3]) -> Vec<Violation> {
    let cell = |p: &Vec3| {
        (
            (p.x / VERTEX_EPS).floor() as i64,
            (p.y / VERTEX_EPS).floor() as i64,
            (p.z / VERTEX_EPS).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
    for (i, p) in vertices.iter().enumerate() {
        grid.entry(cell(p)).or_default().push(i as u32);
    }
    let mut out = Vec::new();
    for (i, p) in vertices.iter().enumerate() {
        let (cx, cy, cz) = cell(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = grid.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &j in bucket {
                            if (j as usize) > i
                                && (vertices[j as usize] - p).norm() < VERTEX_EPS
                            {
                                out.push(Violation::DuplicateVertices { a: i as u32, b: j });
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort_by_key(|v| match v {
        Violation::DuplicateVertices { a, b } => (*a, *b),
        _ => unreachable!(),
    });
    out
}

/// Each vertex's incident faces must form one closed fan.
fn vertex_violations(nv: usize, faces: &[[u32; 3]]) -> Vec<Violation> {
    // next-around-vertex map: for face (v, b, c) the fan continues from b to c.
    let mut fans: Vec<Vec<(u32, u32)>> = vec![Vec::new(); nv];
    for f in faces {
        for i in 0..3 {
            fans[f[i] as usize].push((f[(i + 1) % 3], f[(i + 2) % 3]));
        }
    }
    let mut out = Vec::new();
    for (v, fan) in fans.iter().enumerate() {
        if fan.is_empty() {
            continue;
        }
        let succ: HashMap<u32, u32> = fan.iter().copied().collect();
        let mut cur = fan[0].0;
        let mut steps = 0;
        while let Some(&n) = succ.get(&cur) {
            cur = n;
            steps += 1;
            if cur == fan[0].0 || steps > fan.len() {
                break;
            }
        }
        if steps != fan.len() || cur != fan[0].0 {
            out.push(Violation::NonManifoldVertex(v as u32));
        }
    }
    out
}
