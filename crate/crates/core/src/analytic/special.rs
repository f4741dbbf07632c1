//! Spherical Bessel, Neumann and Hankel functions and Legendre polynomials.
//!
//! `j_n` uses Miller's downward recurrence normalised against `j_0` or `j_1`;
//! `y_n` uses upward recurrence, which is stable for the minimal/dominant
//! pair. Tested envelope: `n <= 200`, `x` in `[1e-3, 1e3]`; `y_n` overflows
//! for large `n / x`, which is reported rather than returned as infinity.

use num_complex::Complex64;

use crate::error::{Error, Result};

const RESCALE_ABOVE: f64 = 1e250;

/// `j_0 ..= j_nmax` at `x`.
pub fn sph_bessel_j_all(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let m = nmax.max(ax.ceil() as usize);
    let start = m + 20 + (8.0 * (m as f64).sqrt()) as usize;

    let mut above = 0.0; // j_{k+1}
    let mut cur = 1e-300; // j_k, arbitrary scale
    let mut j1_raw = 0.0;
    for k in (1..=start).rev() {
        if k <= nmax {
            out[k] = cur;
        }
        let below = (2 * k + 1) as f64 / ax * cur - above;
        above = cur;
        cur = below;
        if cur.abs() > RESCALE_ABOVE {
            cur /= RESCALE_ABOVE;
            above /= RESCALE_ABOVE;
            for v in out.iter_mut().skip(k) {
                *v /= RESCALE_ABOVE;
            }
        }
        if k == 1 {
            j1_raw = above;
        }
    }
    let j0_raw = cur;
    out[0] = j0_raw;

    let (s, c) = ax.sin_cos();
    let j0 = s / ax;
    let j1 = s / (ax * ax) - c / ax;
    let scale = if j0.abs() >= j1.abs() { j0 / j0_raw } else { j1 / j1_raw };
    for (n, v) in out.iter_mut().enumerate() {
        *v *= scale;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

/// `y_0 ..= y_nmax` at `x > 0`. Entries past the first overflow are
/// `-inf`/`+inf`; callers check [`f64::is_finite`].
pub fn sph_bessel_y_all(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; nmax + 1];
    let (s, c) = x.sin_cos();
    out[0] = -c / x;
    if nmax == 0 {
        return out;
    }
    out[1] = -c / (x * x) - s / x;
    for n in 1..nmax {
        let next = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
        if !next.is_finite() {
            break;
        }
        out[n + 1] = next;
    }
    out
}

/// Table of `j_n`, `y_n` for `n <= nmax + 1` at one argument, with
/// derivatives from `f_n' = f_{n-1} - (n+1)/x f_n`.
#[derive(Debug, Clone)]
pub struct SphericalBessel {
    x: f64,
    j: Vec<f64>,
    y: Vec<f64>,
}

impl SphericalBessel {
    pub fn new(nmax: usize, x: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "spherical Hankel functions need x > 0, got {x}"
            )));
        }
        Ok(Self { x, j: sph_bessel_j_all(nmax + 1, x), y: sph_bessel_y_all(nmax + 1, x) })
    }

    pub fn nmax(&self) -> usize {
        self.j.len() - 2
    }

    pub fn j(&self, n: usize) -> f64 {
        self.j[n]
    }

    pub fn jp(&self, n: usize) -> f64 {
        derivative(&self.j, n, self.x)
    }

    pub fn y(&self, n: usize) -> f64 {
        self.y[n]
    }

    pub fn yp(&self, n: usize) -> f64 {
        derivative(&self.y, n, self.x)
    }

    /// Largest order whose `y_n` and `y_n'` are both finite.
    pub fn finite_up_to(&self) -> Option<usize> {
        (0..=self.nmax()).take_while(|&n| self.y[n].is_finite() && self.yp(n).is_finite()).last()
    }

    pub fn h2(&self, n: usize) -> Complex64 {
        Complex64::new(self.j[n], -self.y[n])
    }

    pub fn h2p(&self, n: usize) -> Complex64 {
        Complex64::new(self.jp(n), -self.yp(n))
    }
}

fn derivative(f: &[f64], n: usize, x: f64) -> f64 {
    if n == 0 {
        -f[1]
    } else {
        f[n - 1] - (n + 1) as f64 / x * f[n]
    }
}

pub fn sph_bessel_j(n: usize, x: f64) -> f64 {
    sph_bessel_j_all(n, x)[n]
}

pub fn sph_bessel_j_prime(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 1 { 1.0 / 3.0 } else { 0.0 };
    }
    derivative(&sph_bessel_j_all(n + 1, x), n, x)
}

fn checked(v: f64, what: &str, n: usize, x: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!("{what}_{n}({x}) exceeds the double range")))
    }
}

pub fn sph_bessel_y(n: usize, x: f64) -> Result<f64> {
    let t = SphericalBessel::new(n, x)?;
    checked(t.y(n), "y", n, x)
}

pub fn sph_bessel_y_prime(n: usize, x: f64) -> Result<f64> {
    let t = SphericalBessel::new(n, x)?;
    checked(t.yp(n), "y'", n, x)
}

/// `h_n^(2)(x) = j_n(x) - i y_n(x)`.
pub fn sph_hankel2(n: usize, x: f64) -> Result<Complex64> {
    let t = SphericalBessel::new(n, x)?;
    checked(t.y(n), "y", n, x)?;
    Ok(t.h2(n))
}

pub fn sph_hankel2_prime(n: usize, x: f64) -> Result<Complex64> {
    let t = SphericalBessel::new(n, x)?;
    checked(t.yp(n), "y'", n, x)?;
    Ok(t.h2p(n))
}

/// `P_0(x) ..= P_nmax(x)` by the three-term recurrence; `x` is not checked.
pub fn legendre_all(nmax: usize, x: f64) -> Vec<f64> {
    let mut p = vec![1.0; nmax + 1];
    if nmax >= 1 {
        p[1] = x;
    }
    for n in 1..nmax {
        p[n + 1] = ((2 * n + 1) as f64 * x * p[n] - n as f64 * p[n - 1]) / (n + 1) as f64;
    }
    p
}

pub fn legendre(n: usize, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("Legendre argument {x} outside [-1, 1]")));
    }
    Ok(legendre_all(n, x)[n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // (n, x, j_n(x), y_n(x)) at 40 significant digits, rounded to 17
    const SPOT: [(usize, f64, f64, f64); 20] = [
        (0, 0.001, 9.9999983333334167e-1, -9.9999950000004165e+2),
        (0, 1.0, 8.4147098480789651e-1, -5.4030230586813972e-1),
        (1, 0.5, 1.6253703063606657e-1, -4.4691813247698969),
        (2, 3.7, 2.9766960887405134e-1, -6.2878964225218373e-2),
        (3, 10.0, -3.9495844984470324e-2, -9.5327478876568903e-2),
        (5, 0.1, 9.6163102329164487e-10, -9.4552518756252575e+8),
        (10, 5.0, 4.0734424424946043e-4, -2.66561144057187e+1),
        (10, 50.0, -1.5039221463465961e-2, 1.352468751115876e-2),
        (20, 12.5, 9.902599114738923e-5, -2.4911792406734122e+1),
        (30, 1.0, 5.5668312669813472e-43, -2.9464285474967825e+40),
        (40, 100.0, 1.0434108512084284e-2, -7.0484204069082525e-4),
        (60, 0.5, 1.0269617590489574e-119, -1.6095526567891584e+117),
        (60, 5.0, 9.2859011103410923e-60, -1.7861141807062566e+56),
        (60, 50.0, 1.3397153050962159e-4, -2.199701185857287),
        (100, 20.0, 3.515271112531701e-60, -7.2208893582952978e+55),
        (125, 36.6, 1.8509440642330302e-54, -6.1482964594602934e+49),
        (125, 440.0, -1.8474512978573196e-3, 1.4057286339945878e-3),
        (150, 200.0, -4.5601107717946778e-3, -4.1425126979938651e-3),
        (200, 1000.0, 7.5866693445698598e-4, 6.6719675165739728e-4),
        (7, 123.4, -3.6440819728707036e-3, -7.2465263638557758e-3),
    ];

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn spot_values_against_high_precision() {
        for (n, x, j, y) in SPOT {
            let t = SphericalBessel::new(n, x).unwrap();
            assert!(rel(t.j(n), j) < 1e-11, "j_{n}({x}) = {} vs {j}", t.j(n));
            assert!(rel(t.y(n), y) < 1e-11, "y_{n}({x}) = {} vs {y}", t.y(n));
        }
    }

    #[test]
    fn legendre_spot_values() {
        let spot = [
            (3, 0.3, -3.8249999999999999e-1),
            (10, -0.7, 8.580579553164044e-2),
            (50, 0.123, -1.1252963086645834e-1),
            (125, 0.99, -5.7463056249717167e-2),
            (200, -0.5, -1.5650531003771745e-2),
        ];
        for (n, x, v) in spot {
            assert!((legendre(n, x).unwrap() - v).abs() < 1e-13, "P_{n}({x})");
        }
        assert_eq!(legendre(0, 0.3).unwrap(), 1.0);
        assert!((legendre(2, 0.5).unwrap() + 0.125).abs() < 1e-15);
        for n in 0..=200 {
            assert!((legendre(n, 1.0).unwrap() - 1.0).abs() < 1e-12, "P_{n}(1)");
        }
        assert!(legendre(3, 1.5).is_err());
    }

    #[test]
    fn closed_forms() {
        assert!(sph_bessel_j(0, PI).abs() < 1e-12);
        for x in [1.0, 5.0, 20.0] {
            let h = sph_hankel2(0, x).unwrap();
            let exact = Complex64::i() * Complex64::new(0.0, -x).exp() / x;
            assert!((h - exact).norm() <= 1e-12 * exact.norm(), "{x}");
        }
        assert_eq!(sph_bessel_j(0, 0.0), 1.0);
        assert_eq!(sph_bessel_j(3, 0.0), 0.0);
        assert!((sph_bessel_j_prime(1, 0.0) - 1.0 / 3.0).abs() < 1e-15);
        // parity
        assert!((sph_bessel_j(3, -2.0) + sph_bessel_j(3, 2.0)).abs() < 1e-15);
    }

    #[test]
    fn wronskian() {
        for x in [0.5, 5.0, 50.0] {
            for n in [0, 10, 60] {
                let t = SphericalBessel::new(n, x).unwrap();
                let w = t.j(n) * t.yp(n) - t.jp(n) * t.y(n);
                let expect = 1.0 / (x * x);
                assert!(rel(w, expect) < 1e-10, "n={n} x={x}: {w} vs {expect}");
            }
        }
    }

    #[test]
    fn wronskian_envelope() {
        // wherever y_n is representable in the documented envelope
        for &x in &[1e-3, 0.01, 0.1, 0.37, 1.0, 3.3, 10.0, 42.0, 150.0, 999.0] {
            let t = SphericalBessel::new(200, x).unwrap();
            let top = t.finite_up_to().unwrap();
            for n in (0..=top).step_by(7) {
                let w = t.j(n) * t.yp(n) - t.jp(n) * t.y(n);
                if w.is_finite() && (t.j(n) * t.yp(n)).abs() < f64::MAX {
                    assert!(rel(w, 1.0 / (x * x)) < 1e-10, "n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn hankel_errors() {
        assert!(matches!(sph_hankel2(0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(sph_hankel2(0, -1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(sph_hankel2(200, 1e-3), Err(Error::Overflow(_))));
        assert!(sph_bessel_y(200, 1e-3).is_err());
    }
}
