//! Small geometric helpers shared by the mesh, remesher and BEM code.

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

/// Twice-area vector `(b - a) x (c - a)`; its direction is the face normal
/// for counter-clockwise vertex order.
#[inline]
pub fn area_vector(a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    (b - a).cross(&(c - a))
}

#[inline]
pub fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * area_vector(a, b, c).norm()
}

#[inline]
pub fn triangle_normal(a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let n = area_vector(a, b, c);
    let len = n.norm();
    if len > 0.0 {
        n / len
    } else {
        Vec3::zeros()
    }
}

#[inline]
pub fn centroid(a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    (a + b + c) / 3.0
}

/// Longest edge of a triangle.
#[inline]
pub fn diameter(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    (b - a).norm().max((c - b).norm()).max((a - c).norm())
}

/// Closest point on triangle `abc` to `p`, returned as barycentric weights
/// `(u, v, w)` with `u*a + v*b + w*c` the closest point.
///
/// Region classification after Ericson, "Real-Time Collision Detection", 5.1.5.
pub fn closest_point_barycentric(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> [f64; 3] {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return [1.0, 0.0, 0.0];
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return [0.0, 1.0, 0.0];
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return [1.0 - v, v, 0.0];
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return [0.0, 0.0, 1.0];
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return [1.0 - w, 0.0, w];
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return [0.0, 1.0 - w, w];
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    [1.0 - v - w, v, w]
}

#[inline]
pub fn from_barycentric(bary: [f64; 3], a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    a * bary[0] + b * bary[1] + c * bary[2]
}

/// Symmetric quadrature rule on the reference triangle. Points are barycentric
/// triples; weights sum to 1 (multiply by the triangle area).
#[derive(Debug, Clone, Copy)]
pub struct TriangleRule {
    pub points: &'static [[f64; 3]],
    pub weights: &'static [f64],
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        match self.len() {
            1 => 1,
            3 => 2,
            7 => 5,
            12 => 6,
            _ => 0,
        }
    }
}

pub const CENTROID_RULE: TriangleRule = TriangleRule {
    points: &[[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]],
    weights: &[1.0],
};

pub const RULE_3: TriangleRule = TriangleRule {
    points: &[
        [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
    ],
    weights: &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
};

const R7_A1: f64 = 0.059_715_871_789_769_82;
const R7_B1: f64 = 0.470_142_064_105_115_1;
const R7_A2: f64 = 0.797_426_985_353_087_3;
const R7_B2: f64 = 0.101_286_507_323_456_3;
const R7_W1: f64 = 0.132_394_152_788_506_2;
const R7_W2: f64 = 0.125_939_180_544_827_1;

/// 7-point degree-5 rule (Radon).
pub const RULE_7: TriangleRule = TriangleRule {
    points: &[
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [R7_A1, R7_B1, R7_B1],
        [R7_B1, R7_A1, R7_B1],
        [R7_B1, R7_B1, R7_A1],
        [R7_A2, R7_B2, R7_B2],
        [R7_B2, R7_A2, R7_B2],
        [R7_B2, R7_B2, R7_A2],
    ],
    weights: &[0.225, R7_W1, R7_W1, R7_W1, R7_W2, R7_W2, R7_W2],
};

const R12_A1: f64 = 0.501_426_509_658_179;
const R12_B1: f64 = 0.249_286_745_170_910;
const R12_A2: f64 = 0.873_821_971_016_996;
const R12_B2: f64 = 0.063_089_014_491_502;
const R12_A3: f64 = 0.053_145_049_844_817;
const R12_B3: f64 = 0.310_352_451_033_784;
const R12_C3: f64 = 0.636_502_499_121_399;
const R12_W1: f64 = 0.116_786_275_726_379;
const R12_W2: f64 = 0.050_844_906_370_207;
const R12_W3: f64 = 0.082_851_075_618_374;

/// 12-point degree-6 rule (Dunavant).
pub const RULE_12: TriangleRule = TriangleRule {
    points: &[
        [R12_A1, R12_B1, R12_B1],
        [R12_B1, R12_A1, R12_B1],
        [R12_B1, R12_B1, R12_A1],
        [R12_A2, R12_B2, R12_B2],
        [R12_B2, R12_A2, R12_B2],
        [R12_B2, R12_B2, R12_A2],
        [R12_A3, R12_B3, R12_C3],
        [R12_A3, R12_C3, R12_B3],
        [R12_B3, R12_A3, R12_C3],
        [R12_B3, R12_C3, R12_A3],
        [R12_C3, R12_A3, R12_B3],
        [R12_C3, R12_B3, R12_A3],
    ],
    weights: &[
        R12_W1, R12_W1, R12_W1, R12_W2, R12_W2, R12_W2, R12_W3, R12_W3, R12_W3, R12_W3, R12_W3,
        R12_W3,
    ],
};

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre_unit(order: usize) -> (&'static [f64], &'static [f64]) {
    match order {
        2 => (&GL2_X, &GL2_W),
        4 => (&GL4_X, &GL4_W),
        8 => (&GL8_X, &GL8_W),
        _ => panic!("unsupported Gauss-Legendre order {order}"),
    }
}

const GL2_X: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];
const GL2_W: [f64; 2] = [0.5, 0.5];
const GL4_X: [f64; 4] = [
    0.069_431_844_202_973_71,
    0.330_009_478_207_571_9,
    0.669_990_521_792_428_1,
    0.930_568_155_797_026_3,
];
const GL4_W: [f64; 4] = [
    0.173_927_422_568_726_9,
    0.326_072_577_431_273_1,
    0.326_072_577_431_273_1,
    0.173_927_422_568_726_9,
];
const GL8_X: [f64; 8] = [
    0.019_855_071_751_231_88,
    0.101_666_761_293_186_6,
    0.237_233_795_041_835_5,
    0.408_282_678_752_175_1,
    0.591_717_321_247_824_9,
    0.762_766_204_958_164_5,
    0.898_333_238_706_813_4,
    0.980_144_928_248_768_1,
];
const GL8_W: [f64; 8] = [
    0.050_614_268_145_188_13,
    0.111_190_517_226_687_2,
    0.156_853_322_938_943_6,
    0.181_341_891_689_181_0,
    0.181_341_891_689_181_0,
    0.156_853_322_938_943_6,
    0.111_190_517_226_687_2,
    0.050_614_268_145_188_13,
];

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn integrate(rule: &TriangleRule, f: impl Fn(f64, f64) -> f64) -> f64 {
        // reference triangle (0,0), (1,0), (0,1), area 1/2
        rule.points
            .iter()
            .zip(rule.weights)
            .map(|(p, w)| w * f(p[1], p[2]))
            .sum::<f64>()
            * 0.5
    }

    // Exact monomial integral over the reference triangle: a! b! / (a + b + 2)!
    fn monomial_exact(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn triangle_rules_are_exact_to_their_degree() {
        for rule in [CENTROID_RULE, RULE_3, RULE_7, RULE_12] {
            let wsum: f64 = rule.weights.iter().sum();
            assert_relative_eq!(wsum, 1.0, epsilon = 1e-12);
            for p in &rule.points.to_vec() {
                assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            }
            let deg = rule.degree() as u32;
            for a in 0..=deg {
                for b in 0..=(deg - a) {
                    let got = integrate(&rule, |x, y| x.powi(a as i32) * y.powi(b as i32));
                    assert_relative_eq!(got, monomial_exact(a, b), max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for order in [2usize, 4, 8] {
            let (x, w) = gauss_legendre_unit(order);
            for p in 0..(2 * order) as i32 {
                let got: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(p)).sum();
                assert_relative_eq!(got, 1.0 / (p as f64 + 1.0), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn closest_point_regions() {
        let a = Vec3::new(0.0, 0.0, 0.0);
        let b = Vec3::new(1.0, 0.0, 0.0);
        let c = Vec3::new(0.0, 1.0, 0.0);
        let inside = closest_point_barycentric(&Vec3::new(0.25, 0.25, 3.0), &a, &b, &c);
        assert_relative_eq!(from_barycentric(inside, &a, &b, &c), Vec3::new(0.25, 0.25, 0.0));
        let vertex = closest_point_barycentric(&Vec3::new(-1.0, -1.0, 0.5), &a, &b, &c);
        assert_eq!(vertex, [1.0, 0.0, 0.0]);
        let edge = closest_point_barycentric(&Vec3::new(1.0, 1.0, 0.0), &a, &b, &c);
        assert_relative_eq!(from_barycentric(edge, &a, &b, &c), Vec3::new(0.5, 0.5, 0.0));
    }
}
