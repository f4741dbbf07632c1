//! Helmholtz kernels and closed-form static integrals over flat triangles.
//!
//! With `r = x - y`, `R = |r|` and `G = e^{-ikR}/(4πR)`:
//!
//! ```text
//! ∂G/∂n_y     =  G (1 + ikR) (r·n_y) / R²
//! ∂G/∂n_x     = -G (1 + ikR) (r·n_x) / R²
//! ∂²G/∂n_x∂n_y = e^{-ikR}/(4πR³) [(1 + ikR) n_x·n_y + (k²R² - 3 - 3ikR) (r·n_x)(r·n_y)/R²]
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::geometry::Vec3;

const FOUR_PI: f64 = 4.0 * PI;

/// Pointwise values of the four kernels at one source point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct PointKernels {
    pub g: Complex64,
    pub h: Complex64,
    pub kp: Complex64,
    pub w: Complex64,
}

#[inline]
pub(crate) fn point_kernels(k: f64, x: &Vec3, nx: &Vec3, y: &Vec3, ny: &Vec3) -> PointKernels {
    let r = x - y;
    let rr2 = r.norm_squared();
    let rr = rr2.sqrt();
    let (s, c) = (k * rr).sin_cos();
    let g = Complex64::new(c, -s) / (FOUR_PI * rr);
    let ikr = Complex64::new(1.0, k * rr);
    let q = g * ikr / rr2;
    let rny = r.dot(ny);
    let rnx = r.dot(nx);
    let w = g / rr2
        * (ikr * nx.dot(ny)
            + Complex64::new(k * k * rr2 - 3.0, -3.0 * k * rr) * (rnx * rny / rr2));
    PointKernels { g, h: q * rny, kp: -q * rnx, w }
}

/// `(e^{-ikR} - 1) / R`, bounded as `R → 0`.
#[inline]
pub(crate) fn single_remainder(k: f64, rr: f64) -> Complex64 {
    let z = k * rr;
    let half = (0.5 * z).sin();
    Complex64::new(-2.0 * half * half, -z.sin()) / rr
}

/// `(e^{-ikR}(1 + ikR) - 1) / R³`, which tends to `k²/(2R)`.
#[inline]
pub(crate) fn double_remainder(k: f64, rr: f64) -> Complex64 {
    let z = k * rr;
    let r3 = rr * rr * rr;
    if z < 1e-3 {
        let z2 = z * z;
        let re = z2 * (0.5 - z2 / 8.0);
        let im = z2 * z * (-1.0 / 3.0 + z2 / 30.0);
        return Complex64::new(re, im) / r3;
    }
    let (s, c) = z.sin_cos();
    Complex64::new(c - 1.0 + z * s, z * c - s) / r3
}

/// Static potentials of a flat triangle at `x`: `∫1/R`, the signed solid
/// angle `∫ (x-y)·n / R³`, `∇_x ∫1/R` and the Biot–Savart field
/// `∮ ∇_x(1/R) × dl` of the counter-clockwise boundary loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct StaticParts {
    pub single: f64,
    pub solid_angle: f64,
    pub grad_single: Vec3,
    pub loop_field: Vec3,
}

/// Signed solid angle `∫_F (x-y)·n / R³ dy`; `-2π` just behind the face,
/// `+2π` just in front of it.
pub(crate) fn solid_angle(x: &Vec3, v: &[Vec3; 3]) -> f64 {
    let r1 = v[0] - x;
    let r2 = v[1] - x;
    let r3 = v[2] - x;
    let (l1, l2, l3) = (r1.norm(), r2.norm(), r3.norm());
    let num = r1.dot(&r2.cross(&r3));
    let den = l1 * l2 * l3 + r1.dot(&r2) * l3 + r1.dot(&r3) * l2 + r2.dot(&r3) * l1;
    if den < 0.0 && num.abs() <= 1e-13 * l1 * l2 * l3 {
        // x in the plane and inside the face: principal value
        return 0.0;
    }
    -2.0 * num.atan2(den)
}

pub(crate) fn static_parts(x: &Vec3, v: &[Vec3; 3], n: &Vec3) -> StaticParts {
    let omega = solid_angle(x, v);
    let hgt = (x - v[0]).dot(n);
    let ah = hgt.abs();
    let mut single = 0.0;
    let mut grad_in_plane = Vec3::zeros();
    let mut loop_field = Vec3::zeros();
    for e in 0..3 {
        let a = v[e];
        let b = v[(e + 1) % 3];
        let ab = b - a;
        let len = ab.norm();
        let t = ab / len;
        let m = t.cross(n);
        let xa = x - a;
        let ra = xa.norm();
        let rb = (x - b).norm();
        let sm = -xa.dot(&t);
        let sp = sm + len;
        let t0 = -xa.dot(&m);
        let r0sq = t0 * t0 + hgt * hgt;
        let d2 = xa.norm_squared() - sm * sm;
        if d2 <= 1e-24 * len * len {
            // x on the carrier line of this edge: no in-plane log term and
            // no Biot–Savart contribution off the segment
            continue;
        }
        let log = if sp + sm >= 0.0 {
            ((rb + sp) / (ra + sm)).ln()
        } else {
            ((ra - sm) / (rb - sp)).ln()
        };
        single += t0 * log
            - ah * ((t0 * sp / (r0sq + ah * rb)).atan() - (t0 * sm / (r0sq + ah * ra)).atan());
        grad_in_plane -= m * log;
        let s0 = -sm;
        let coef = ((len - s0) / rb + s0 / ra) / d2;
        loop_field += t.cross(&xa) * coef;
    }
    StaticParts { single, solid_angle: omega, grad_single: grad_in_plane - n * omega, loop_field }
}

/// Sub-triangles meeting at the centroid.
#[cfg(test)]
pub(crate) fn centroid_split(v: &[Vec3; 3]) -> [[Vec3; 3]; 3] {
    let c = (v[0] + v[1] + v[2]) / 3.0;
    [[v[0], v[1], c], [v[1], v[2], c], [v[2], v[0], c]]
}

/// Midpoint subdivision into four similar triangles.
#[cfg(test)]
pub(crate) fn split4(v: &[Vec3; 3]) -> [[Vec3; 3]; 4] {
    let m01 = (v[0] + v[1]) * 0.5;
    let m12 = (v[1] + v[2]) * 0.5;
    let m20 = (v[2] + v[0]) * 0.5;
    [[v[0], m01, m20], [m01, v[1], m12], [m20, m12, v[2]], [m01, m12, m20]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{triangle_area, triangle_normal, RULE_7};

    fn tri() -> [Vec3; 3] {
        [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.1, 0.0), Vec3::new(0.3, 0.9, 0.05)]
    }

    /// Brute-force integral of `f` by recursive midpoint subdivision.
    fn brute<F: Fn(&Vec3) -> f64>(v: &[Vec3; 3], depth: u32, f: &F) -> f64 {
        if depth == 0 {
            let area = triangle_area(&v[0], &v[1], &v[2]);
            return RULE_7
                .points
                .iter()
                .zip(RULE_7.weights)
                .map(|(b, w)| w * area * f(&(v[0] * b[0] + v[1] * b[1] + v[2] * b[2])))
                .sum();
        }
        split4(v).iter().map(|s| brute(s, depth - 1, f)).sum()
    }

    #[test]
    fn static_parts_match_quadrature_off_surface() {
        let v = tri();
        let n = triangle_normal(&v[0], &v[1], &v[2]);
        for x in [
            Vec3::new(0.4, 0.3, 0.5),
            Vec3::new(-0.6, 0.2, -0.3),
            Vec3::new(2.0, 1.0, 0.1),
            Vec3::new(0.5, 0.4, -0.08),
        ] {
            let s = static_parts(&x, &v, &n);
            let single = brute(&v, 6, &|y| 1.0 / (x - y).norm());
            let omega = brute(&v, 6, &|y| (x - y).dot(&n) / (x - y).norm().powi(3));
            assert!((s.single - single).abs() < 1e-7 * single.abs().max(1.0), "{x:?}");
            assert!((s.solid_angle - omega).abs() < 1e-7, "{x:?}");
            for axis in 0..3 {
                let g = brute(&v, 6, &|y| -(x - y)[axis] / (x - y).norm().powi(3));
                assert!((s.grad_single[axis] - g).abs() < 1e-6, "{x:?} axis {axis}");
            }
        }
    }

    #[test]
    fn in_plane_single_layer_matches_polar_integration() {
        let v = tri();
        let n = triangle_normal(&v[0], &v[1], &v[2]);
        let c = (v[0] + v[1] + v[2]) / 3.0;
        // ∫ 1/R over a triangle with x at one vertex: ∫ ρ_max(θ) dθ
        let mut polar = 0.0;
        let (nodes, weights) = crate::geometry::gauss_legendre_unit(8);
        for sub in centroid_split(&v) {
            let (p, q) = (sub[0] - c, sub[1] - c);
            let th = p.angle(&q);
            let edge = q - p;
            let beta = (-p).angle(&edge);
            let d = p.norm() * beta.sin();
            let m = 200;
            for i in 0..m {
                for (s, w) in nodes.iter().zip(weights) {
                    let t = (i as f64 + s) / m as f64 * th;
                    polar += w / m as f64 * th * d / (t + beta).sin();
                }
            }
        }
        let s = static_parts(&c, &v, &n);
        assert!((s.single - polar).abs() < 1e-10 * polar, "{} vs {polar}", s.single);
        assert!(s.solid_angle.abs() < 1e-14, "{}", s.solid_angle);
    }

    #[test]
    fn loop_field_is_normal_derivative_of_solid_angle() {
        let v = tri();
        let n = triangle_normal(&v[0], &v[1], &v[2]);
        let eps = 1e-5;
        for x in [Vec3::new(0.4, 0.3, 0.2), Vec3::new(1.4, -0.3, -0.1), Vec3::new(0.2, 0.5, 0.0)] {
            let b = static_parts(&x, &v, &n).loop_field;
            for dir in [Vec3::x(), Vec3::y(), Vec3::z()] {
                let fd = (solid_angle(&(x + dir * eps), &v) - solid_angle(&(x - dir * eps), &v))
                    / (2.0 * eps);
                // ∇Ω_s = -(loop field) for the integral ∮ ∇_x(1/R) × dl
                assert!((fd + b.dot(&dir)).abs() < 1e-6 * (1.0 + fd.abs()), "{x:?}");
            }
        }
    }

    #[test]
    fn closed_surface_solid_angles() {
        let mesh = crate::mesh::fixtures::icosahedron();
        for x in [Vec3::new(0.1, -0.2, 0.05), Vec3::new(3.0, 1.0, 0.0)] {
            let total: f64 = (0..mesh.num_faces())
                .map(|f| solid_angle(&x, &mesh.face_vertices(f)))
                .sum();
            let expected = if x.norm() < 0.5 { -4.0 * PI } else { 0.0 };
            assert!((total - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn remainders_agree_with_direct_formulas() {
        for &(k, r) in &[(3.0, 0.2), (50.0, 0.01), (1.0, 1e-5), (0.5, 2e-4)] {
            let e = Complex64::new(0.0, -k * r).exp();
            let s = (e - 1.0) / r;
            assert!((single_remainder(k, r) - s).norm() < 1e-9 * s.norm().max(k));
            let expected = k * k / (2.0 * r);
            let d = double_remainder(k, r);
            if k * r < 1e-3 {
                assert!((d.re / expected - 1.0).abs() < 1e-6);
            } else {
                let direct = (e * Complex64::new(1.0, k * r) - 1.0) / (r * r * r);
                assert!((d - direct).norm() < 1e-10 * direct.norm());
            }
        }
        // continuity across the series switch
        let k = 1.0;
        let below = double_remainder(k, 0.999_999e-3);
        let above = double_remainder(k, 1.000_001e-3);
        assert!((below - above).norm() < 1e-5 * below.norm());
    }

    #[test]
    fn point_kernels_match_finite_differences() {
        let k = 7.0;
        let x = Vec3::new(0.3, -0.1, 0.2);
        let y = Vec3::new(-0.1, 0.2, 0.05);
        let nx = Vec3::new(1.0, 2.0, -0.5).normalize();
        let ny = Vec3::new(-0.3, 0.4, 1.0).normalize();
        let gfun = |a: &Vec3, b: &Vec3| crate::physics::green(k, (a - b).norm());
        let eps = 1e-5;
        let p = point_kernels(k, &x, &nx, &y, &ny);
        let h = (gfun(&x, &(y + ny * eps)) - gfun(&x, &(y - ny * eps))) / (2.0 * eps);
        let kp = (gfun(&(x + nx * eps), &y) - gfun(&(x - nx * eps), &y)) / (2.0 * eps);
        let dh = |xx: &Vec3| point_kernels(k, xx, &nx, &y, &ny).h;
        let w = (dh(&(x + nx * eps)) - dh(&(x - nx * eps))) / (2.0 * eps);
        assert!((p.h - h).norm() < 1e-7 * h.norm());
        assert!((p.kp - kp).norm() < 1e-7 * kp.norm());
        assert!((p.w - w).norm() < 1e-7 * w.norm());
        assert!((p.g - gfun(&x, &y)).norm() < 1e-15);
    }
}
