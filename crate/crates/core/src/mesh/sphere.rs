use std::collections::HashMap;

use super::TriangleMesh;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Average edge length of a near-equilateral tessellation of the unit sphere
/// into `20 n^2` faces is about `SPHERE_EDGE_FACTOR / n`.
const SPHERE_EDGE_FACTOR: f64 = 1.2046;

/// Closed triangulated sphere with average edge length close to
/// `target_edge_mm`.
///
/// Built as a geodesic (class I) subdivision of the icosahedron with
/// frequency `n`, every face split into `n^2` triangles and all vertices
/// pushed onto the sphere, giving `20 n^2` faces. This avoids the sliver
/// triangles a latitude/longitude sphere has at its poles.
pub fn make_sphere(radius: f64, target_edge_mm: f64) -> Result<TriangleMesh> {
    if !(radius > 0.0) || !(target_edge_mm > 0.0) {
        return Err(Error::InvalidArgument(
            "sphere radius and target edge must be positive".into(),
        ));
    }
    let target = target_edge_mm * 1e-3;
    if target > radius {
        return Err(Error::InvalidArgument(format!(
            "target edge {target_edge_mm} mm exceeds the radius {radius} m; curvature cannot be resolved"
        )));
    }
    let n = ((SPHERE_EDGE_FACTOR * radius / target).round() as usize).max(1);
    geodesic_sphere(radius, n)
}

/// Geodesic sphere of the given subdivision frequency (`20 n^2` faces).
pub(crate) fn geodesic_sphere(radius: f64, n: usize) -> Result<TriangleMesh> {
    let (ico_v, ico_f) = icosahedron();
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut index: HashMap<Key, u32> = HashMap::new();
    let mut faces = Vec::with_capacity(20 * n * n);

    for (fi, tri) in ico_f.iter().enumerate() {
        let mut id = |i: usize, j: usize| -> u32 {
            // lattice point with integer barycentrics (n - i - j, i, j) w.r.t. (a, b, c)
            let bary = [n - i - j, i, j];
            let key = canonical_key(fi, tri, bary, n);
            *index.entry(key).or_insert_with(|| {
                let p = (ico_v[tri[0]] * bary[0] as f64
                    + ico_v[tri[1]] * bary[1] as f64
                    + ico_v[tri[2]] * bary[2] as f64)
                    / n as f64;
                vertices.push(p.normalize() * radius);
                (vertices.len() - 1) as u32
            })
        };
        for i in 0..n {
            for j in 0..(n - i) {
                let a = id(i, j);
                let b = id(i + 1, j);
                let c = id(i, j + 1);
                faces.push([a, b, c]);
                if i + j + 1 < n {
                    let d = id(i + 1, j + 1);
                    faces.push([b, d, c]);
                }
            }
        }
    }
    TriangleMesh::new(vertices, faces)
}

/// Identifies a lattice point independent of which icosahedron face
/// generated it: corners by vertex, edge points by (edge, offset), interior
/// points by (face, i, j).
#[derive(Hash, PartialEq, Eq)]
enum Key {
    Corner(usize),
    Edge(usize, usize, usize),
    Interior(usize, usize, usize),
}

fn canonical_key(face: usize, tri: &[usize; 3], bary: [usize; 3], n: usize) -> Key {
    let nonzero: Vec<usize> = (0..3).filter(|&k| bary[k] > 0).collect();
    match nonzero.len() {
        1 => Key::Corner(tri[nonzero[0]]),
        2 => {
            let (k0, k1) = (nonzero[0], nonzero[1]);
            let (va, vb) = (tri[k0], tri[k1]);
            // offset measured from the lower-indexed icosahedron vertex
            if va < vb {
                Key::Edge(va, vb, bary[k1])
            } else {
                Key::Edge(vb, va, bary[k0])
            }
        }
        _ => {
            debug_assert!(bary.iter().sum::<usize>() == n);
            Key::Interior(face, bary[1], bary[2])
        }
    }
}

fn icosahedron() -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let v = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
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
