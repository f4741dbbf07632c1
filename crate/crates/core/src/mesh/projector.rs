//! Exact closest-point queries against a frozen reference surface.

use super::TriangleMesh;
use crate::geometry::{closest_point_barycentric, from_barycentric, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub point: Vec3,
    pub face: usize,
    pub distance: f64,
    pub barycentric: [f64; 3],
}

#[derive(Debug, Clone)]
struct Node {
    min: Vec3,
    max: Vec3,
    /// Leaf: `start..start + count` into `order`. Inner: `start` is the right
    /// child (left child is `self + 1`) and `count == 0`.
    start: u32,
    count: u32,
}

/// Bounding-volume hierarchy over the faces of a reference mesh (median
/// split on the longest axis, leaves of up to four faces).
#[derive(Debug, Clone)]
pub struct SurfaceProjector {
    triangles: Vec<[Vec3; 3]>,
    order: Vec<u32>,
    nodes: Vec<Node>,
}

impl SurfaceProjector {
    pub fn new(mesh: &TriangleMesh) -> Self {
        let triangles: Vec<[Vec3; 3]> =
            (0..mesh.num_faces()).map(|f| mesh.face_vertices(f)).collect();
        let centers: Vec<Vec3> =
            triangles.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut order: Vec<u32> = (0..triangles.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * triangles.len() / LEAF_SIZE + 1);
        build(&triangles, &centers, &mut order, 0, triangles.len(), &mut nodes);
        Self { triangles, order, nodes }
    }

    pub fn num_faces(&self) -> usize {
        self.triangles.len()
    }

    pub fn project(&self, p: &Vec3) -> Projection {
        self.project_with_hint(p, None)
    }

    /// Same result as [`project`](Self::project); a good `hint` face (e.g. the
    /// previous projection of a slowly moving point) only tightens pruning.
    pub fn project_with_hint(&self, p: &Vec3, hint: Option<usize>) -> Projection {
        let mut best = match hint.filter(|&f| f < self.triangles.len()) {
            Some(f) => self.face_projection(p, f),
            None => Projection {
                point: Vec3::zeros(),
                face: usize::MAX,
                distance: f64::INFINITY,
                barycentric: [0.0; 3],
            },
        };
        let mut best_sq = best.distance * best.distance;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if box_dist_sq(p, &node.min, &node.max) > best_sq {
                continue;
            }
            if node.count > 0 {
                let s = node.start as usize;
                for &f in &self.order[s..s + node.count as usize] {
                    let cand = self.face_projection(p, f as usize);
                    let d2 = cand.distance * cand.distance;
                    // ties resolve to the lowest face index for determinism
                    if d2 < best_sq || (d2 == best_sq && (f as usize) < best.face) {
                        best = cand;
                        best_sq = d2;
                    }
                }
            } else {
                let left = ni + 1;
                let right = node.start;
                let dl = {
                    let n = &self.nodes[left as usize];
                    box_dist_sq(p, &n.min, &n.max)
                };
                let dr = {
                    let n = &self.nodes[right as usize];
                    box_dist_sq(p, &n.min, &n.max)
                };
                // push the farther child first so the nearer one is visited next
                if dl < dr {
                    stack.push(right);
                    stack.push(left);
                } else {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        best
    }

    /// Exhaustive scan over every face; the oracle for `project`.
    pub fn project_brute_force(&self, p: &Vec3) -> Projection {
        let mut best = self.face_projection(p, 0);
        for f in 1..self.triangles.len() {
            let cand = self.face_projection(p, f);
            if cand.distance < best.distance {
                best = cand;
            }
        }
        best
    }

    fn face_projection(&self, p: &Vec3, f: usize) -> Projection {
        let [a, b, c] = &self.triangles[f];
        let bary = closest_point_barycentric(p, a, b, c);
        let q = from_barycentric(bary, a, b, c);
        Projection { point: q, face: f, distance: (p - q).norm(), barycentric: bary }
    }
}

fn build(
    tris: &[[Vec3; 3]],
    centers: &[Vec3],
    order: &mut [u32],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    let mut min = Vec3::repeat(f64::INFINITY);
    let mut max = Vec3::repeat(f64::NEG_INFINITY);
    for &f in &order[start..end] {
        for v in &tris[f as usize] {
            min = min.inf(v);
            max = max.sup(v);
        }
    }
    let idx = nodes.len() as u32;
    nodes.push(Node { min, max, start: start as u32, count: (end - start) as u32 });
    if end - start <= LEAF_SIZE {
        return idx;
    }
    let mut cmin = Vec3::repeat(f64::INFINITY);
    let mut cmax = Vec3::repeat(f64::NEG_INFINITY);
    for &f in &order[start..end] {
        cmin = cmin.inf(&centers[f as usize]);
        cmax = cmax.sup(&centers[f as usize]);
    }
    let axis = (cmax - cmin).imax();
    let mid = (start + end) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        centers[a as usize][axis]
            .total_cmp(&centers[b as usize][axis])
            .then(a.cmp(&b))
    });
    build(tris, centers, order, start, mid, nodes);
    let right = build(tris, centers, order, mid, end, nodes);
    let node = &mut nodes[idx as usize];
    node.start = right;
    node.count = 0;
    idx
}

#[inline]
fn box_dist_sq(p: &Vec3, min: &Vec3, max: &Vec3) -> f64 {
    let mut d = 0.0;
    for i in 0..3 {
        let v = if p[i] < min[i] {
            min[i] - p[i]
        } else if p[i] > max[i] {
            p[i] - max[i]
        } else {
            0.0
        };
        d += v * v;
    }
    d
}
