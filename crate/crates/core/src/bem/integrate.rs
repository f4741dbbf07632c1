//! Integrals of the four kernels over one flat element seen from one point.
//!
//! Far elements use a fixed triangle rule. Near elements (centroid distance
//! below [`NEAR_FACTOR`] diameters) use closed-form static parts plus the
//! bounded dynamic remainders. Below [`SUBDIVIDE_FACTOR`] diameters, and on
//! the element holding the collocation point, the remainders use polar
//! quadrature about the projected point. The hypersingular part is
//! taken in Maue form, `k² (n_x·n) ∫G - n_x · ∮ ∇_x G × dl`, so only weakly
//! singular and line integrals appear.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::kernels::{
    double_remainder, point_kernels, single_remainder, static_parts, PointKernels,
};
use crate::geometry::{gauss_legendre_unit, triangle_area, TriangleRule, Vec3, RULE_12, RULE_7};
use crate::mesh::TriangleMesh;

const FOUR_PI: f64 = 4.0 * PI;

pub const NEAR_FACTOR: f64 = 4.0;
pub const SUBDIVIDE_FACTOR: f64 = 2.0;
const EDGE_ORDER: usize = 8;
const POLAR_ORDER: usize = 8;

/// Order of the rule used for regular (non-singular) element integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureOrder {
    /// 7 points, degree 5.
    #[default]
    Seven,
    /// 12 points, degree 6.
    Twelve,
}

impl QuadratureOrder {
    pub fn rule(&self) -> TriangleRule {
        match self {
            QuadratureOrder::Seven => RULE_7,
            QuadratureOrder::Twelve => RULE_12,
        }
    }

    pub fn points(&self) -> usize {
        self.rule().len()
    }
}

impl std::fmt::Display for QuadratureOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.points())
    }
}

impl std::str::FromStr for QuadratureOrder {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim() {
            "7" => Ok(QuadratureOrder::Seven),
            "12" => Ok(QuadratureOrder::Twelve),
            other => Err(crate::Error::InvalidArgument(format!(
                "quadrature order must be 7 or 12, got '{other}'"
            ))),
        }
    }
}

/// Geometry of one element with its far-field quadrature points.
#[derive(Debug, Clone)]
pub(crate) struct Panel {
    pub v: [Vec3; 3],
    pub n: Vec3,
    pub c: Vec3,
    pub diam: f64,
    pub qp: Vec<Vec3>,
    /// Weights including the element area.
    pub qw: Vec<f64>,
}

pub(crate) fn panels(mesh: &TriangleMesh, order: QuadratureOrder) -> Vec<Panel> {
    let rule = order.rule();
    (0..mesh.num_faces())
        .map(|f| {
            let v = mesh.face_vertices(f);
            let area = mesh.face_area(f);
            let qp = rule.points.iter().map(|b| v[0] * b[0] + v[1] * b[1] + v[2] * b[2]).collect();
            let qw = rule.weights.iter().map(|w| w * area).collect();
            Panel {
                v,
                n: mesh.face_normal(f),
                c: mesh.face_centroid(f),
                diam: mesh.face_diameter(f),
                qp,
                qw,
            }
        })
        .collect()
}

/// Which integrals the caller needs besides `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Want {
    pub g: bool,
    pub kp: bool,
    pub w: bool,
}

impl Want {
    pub const MATRIX: Want = Want { g: false, kp: false, w: true };
    pub const VELOCITY: Want = Want { g: true, kp: true, w: false };
    pub const FIELD: Want = Want { g: true, kp: false, w: false };
    #[cfg(test)]
    pub const ALL: Want = Want { g: true, kp: true, w: true };
}

fn for_each_point<F: FnMut(Vec3, f64)>(v: &[Vec3; 3], rule: &TriangleRule, mut f: F) {
    let area = triangle_area(&v[0], &v[1], &v[2]);
    for (b, w) in rule.points.iter().zip(rule.weights) {
        f(v[0] * b[0] + v[1] * b[1] + v[2] * b[2], w * area);
    }
}

/// Polar (Duffy) quadrature about the projection `xp` of the evaluation
/// point onto the element plane: the element is the signed sum of the
/// triangles `(xp, a, b)` over its edges, each mapped by
/// `y = xp + u ((a - xp) + w (b - a))` so that `R` is smooth in `u`. When the
/// point lies off the plane at height `h`, the `u` range is split
/// geometrically towards `u = 0` to resolve `sqrt(u²ρ² + h²)`.
fn for_each_polar_point<F: FnMut(Vec3, f64)>(
    v: &[Vec3; 3],
    n: &Vec3,
    xp: &Vec3,
    height: f64,
    mut f: F,
) {
    let (nodes, weights) = gauss_legendre_unit(POLAR_ORDER);
    let mut cuts = [0.0; 48];
    for e in 0..3 {
        let a = v[e] - xp;
        let b = v[(e + 1) % 3] - xp;
        let twice_area = a.cross(&b).dot(n);
        if twice_area.abs() <= 1e-14 * a.norm() * b.norm() {
            continue;
        }
        let ray_min = segment_distance(&a, &b);
        let delta = height.abs() / ray_min;
        let mut m = 1;
        cuts[0] = 0.0;
        if delta > 0.0 && delta < 0.5 {
            let mut u = delta;
            while u < 1.0 && m < cuts.len() - 1 {
                cuts[m] = u;
                m += 1;
                u *= 3.0;
            }
        }
        cuts[m] = 1.0;
        // w pieces no longer than the distance from xp to the edge line
        let ab = b - a;
        let line_dist = twice_area.abs() / ab.norm();
        let pieces = (ab.norm() / line_dist).ceil().min(16.0) as usize;
        let dw = 1.0 / pieces as f64;
        for iv in 0..m {
            let (u0, u1) = (cuts[iv], cuts[iv + 1]);
            for (su, wu) in nodes.iter().zip(weights) {
                let u = u0 + (u1 - u0) * su;
                let ju = wu * (u1 - u0) * u * twice_area * dw;
                for piece in 0..pieces {
                    for (sw, ww) in nodes.iter().zip(weights) {
                        let w = dw * (piece as f64 + sw);
                        f(xp + (a + ab * w) * u, ju * ww);
                    }
                }
            }
        }
    }
}

/// Quadrature over `p` for an integrand that is near-singular at `x` (not
/// on `p`): polar about the projection of `x` when close, otherwise the
/// panel rule. Weights sum to the element area.
pub(crate) fn for_each_point_near<F: FnMut(Vec3, f64)>(p: &Panel, x: &Vec3, mut f: F) {
    if (x - p.c).norm() < NEAR_FACTOR * p.diam {
        let height = (x - p.v[0]).dot(&p.n);
        for_each_polar_point(&p.v, &p.n, &(x - p.n * height), height, f);
    } else {
        for (y, &w) in p.qp.iter().zip(&p.qw) {
            f(*y, w);
        }
    }
}

/// Distance from the origin to the segment `[a, b]`.
fn segment_distance(a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let t = (-a.dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (a + ab * t).norm()
}

/// Integrals of `G`, `∂G/∂n_y`, `∂G/∂n_x` and `∂²G/∂n_x∂n_y` over `p` at
/// the point `x` with normal `nx`. `on_panel` marks `x` as the centroid of
/// `p` itself (principal values; the free terms are added by the caller).
pub(crate) fn integrate(
    p: &Panel,
    k: f64,
    x: &Vec3,
    nx: &Vec3,
    on_panel: bool,
    rule: &TriangleRule,
    want: Want,
) -> PointKernels {
    let dist = (x - p.c).norm();
    if !on_panel && dist >= NEAR_FACTOR * p.diam {
        let mut acc = PointKernels::default();
        for (y, &wt) in p.qp.iter().zip(&p.qw) {
            let q = point_kernels(k, x, nx, y, &p.n);
            acc.h += q.h * wt;
            if want.g {
                acc.g += q.g * wt;
            }
            if want.kp {
                acc.kp += q.kp * wt;
            }
            if want.w {
                acc.w += q.w * wt;
            }
        }
        return acc;
    }

    let st = static_parts(x, &p.v, &p.n);
    let need_s = want.g || want.w;
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut h1 = Complex64::new(0.0, 0.0);
    let mut kp1 = Complex64::new(0.0, 0.0);
    if k > 0.0 {
        let body = |y: Vec3, wt: f64| {
            let r = x - y;
            let rr = r.norm();
            if need_s {
                s1 += single_remainder(k, rr) * wt;
            }
            if !on_panel {
                let e2 = double_remainder(k, rr) * wt;
                h1 += e2 * r.dot(&p.n);
                if want.kp {
                    kp1 -= e2 * r.dot(nx);
                }
            }
        };
        if on_panel || dist < SUBDIVIDE_FACTOR * p.diam {
            let mut height = (x - p.v[0]).dot(&p.n);
            if on_panel || height.abs() < 1e-9 * p.diam {
                height = 0.0;
            }
            let xp = x - p.n * height;
            for_each_polar_point(&p.v, &p.n, &xp, height, body);
        } else {
            for_each_point(&p.v, rule, body);
        }
    }

    let mut out = PointKernels::default();
    let s = (s1 + st.single) / FOUR_PI;
    if want.g {
        out.g = s;
    }
    if !on_panel {
        out.h = (h1 + st.solid_angle) / FOUR_PI;
        if want.kp {
            out.kp = (kp1 + nx.dot(&st.grad_single)) / FOUR_PI;
        }
    }
    if want.w {
        let mut curl = st.loop_field;
        let mut dyn_curl = nalgebra::Vector3::<Complex64>::zeros();
        if k > 0.0 {
            let (nodes, weights) = gauss_legendre_unit(EDGE_ORDER);
            for e in 0..3 {
                let a = p.v[e];
                let ab = p.v[(e + 1) % 3] - a;
                let len = ab.norm();
                let t = ab / len;
                // segments no longer than the distance to the edge line
                let d = (x - a).cross(&t).norm();
                let pieces = (2.0 * len / d.max(1e-3 * len)).ceil().min(64.0) as usize;
                let seg = len / pieces as f64;
                for piece in 0..pieces {
                    for (s, w) in nodes.iter().zip(weights) {
                        let r = x - (a + t * (seg * (piece as f64 + s)));
                        let e2 = double_remainder(k, r.norm()) * (w * seg);
                        let rt = r.cross(&t);
                        dyn_curl -= nalgebra::Vector3::new(e2 * rt.x, e2 * rt.y, e2 * rt.z);
                    }
                }
            }
        }
        curl /= FOUR_PI;
        let dyn_n = (dyn_curl.x * nx.x + dyn_curl.y * nx.y + dyn_curl.z * nx.z) / FOUR_PI;
        out.w = s * (k * k * nx.dot(&p.n)) - nx.dot(&curl) - dyn_n;
    }
    out
}
