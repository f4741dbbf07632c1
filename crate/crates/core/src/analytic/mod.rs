//! Point source scattered by a rigid sphere centred at the origin.
//!
//! ```text
//! p_inc(x)  = p0 e^{-ik|x-x*|} / (4π|x-x*|)
//! p_scat(x) = (i k p0 / 4π) Σ_n (2n+1) h_n(k r*) [j_n'(kR) / h_n'(kR)] h_n(k r) P_n(cos β)
//! ```
//!
//! with `h_n = h_n^(2)`, `r = |x|`, `r* = |x*|` and β the angle between `x`
//! and `x*`. At `k = 0` the series is replaced by its static (Neumann)
//! limit `(p0/4π) Σ n/(n+1) R^{2n+1} / (r r*)^{n+1} P_n(cos β)`.

pub mod special;

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::PressureField;
use crate::geometry::Vec3;
use crate::grids::EvalGrid;
use crate::physics::{green, Medium};
use special::{legendre_all, SphericalBessel};

pub const DEFAULT_ORDER: usize = 125;

/// Relative size below which a term is considered negligible when the
/// series has to stop early because `y_n` left the double range.
const NEGLIGIBLE: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct SphereScene {
    pub radius: f64,
    pub source: Vec3,
    /// Source strength in Pa·m.
    pub p0: f64,
    pub wavenumber: f64,
    pub order: usize,
}

impl SphereScene {
    pub fn new(radius: f64, source: Vec3, wavenumber: f64) -> Result<Self> {
        let s = Self { radius, source, p0: 1.0, wavenumber, order: DEFAULT_ORDER };
        s.validate()?;
        Ok(s)
    }

    pub fn with_order(mut self, order: usize) -> Result<Self> {
        self.order = order;
        self.validate()?;
        Ok(self)
    }

    pub fn with_p0(mut self, p0: f64) -> Self {
        self.p0 = p0;
        self
    }

    pub fn with_wavenumber(mut self, k: f64) -> Result<Self> {
        self.wavenumber = k;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::InvalidArgument("sphere radius must be positive".into()));
        }
        if !(self.source.norm() > self.radius) {
            return Err(Error::InvalidArgument(format!(
                "source at distance {} must lie outside the sphere of radius {}",
                self.source.norm(),
                self.radius
            )));
        }
        if !(self.wavenumber >= 0.0) || !self.wavenumber.is_finite() {
            return Err(Error::InvalidArgument(format!("wavenumber {} must be >= 0", self.wavenumber)));
        }
        if self.order < 1 {
            return Err(Error::InvalidArgument("series order must be >= 1".into()));
        }
        Ok(())
    }

    /// Radial series coefficients `c_n` such that
    /// `p_scat = Σ c_n P_n(cos β)` at distance `r` from the centre.
    pub fn radial_coefficients(&self, r: f64) -> Result<Vec<Complex64>> {
        let (big_r, rs, n_max) = (self.radius, self.source.norm(), self.order);
        let pre = self.p0 / (4.0 * PI);
        if self.wavenumber == 0.0 {
            let ratio = big_r * big_r / (r * rs);
            return Ok((0..=n_max)
                .map(|n| {
                    let nf = n as f64;
                    // R^{2n+1} / (r r*)^{n+1} = ratio^{n+1} / R
                    Complex64::new(pre * nf / (nf + 1.0) * ratio.powi(n as i32 + 1) / big_r, 0.0)
                })
                .collect());
        }
        let k = self.wavenumber;
        let at_r = SphericalBessel::new(n_max, k * big_r)?;
        let at_src = SphericalBessel::new(n_max, k * rs)?;
        let at_x = SphericalBessel::new(n_max, k * r)?;
        let pre = Complex64::new(0.0, k) * pre;
        let mut coefs = Vec::with_capacity(n_max + 1);
        let mut peak = 0.0f64;
        for n in 0..=n_max {
            let h_src = at_src.h2(n);
            let h_x = at_x.h2(n);
            let hp = at_r.h2p(n);
            if !(h_src.im.is_finite() && h_x.im.is_finite() && hp.im.is_finite()) {
                // terms must already be negligible where y_n overflows
                let last = coefs.last().map_or(f64::INFINITY, |c: &Complex64| c.norm());
                if last > NEGLIGIBLE * peak {
                    return Err(Error::Overflow(format!(
                        "series term {n} not representable (kR = {}, kr* = {}, kr = {}) before convergence",
                        k * big_r,
                        k * rs,
                        k * r
                    )));
                }
                break;
            }
            let a = Complex64::new(at_r.jp(n), 0.0) / hp * h_src;
            let c = pre * (2 * n + 1) as f64 * a * h_x;
            peak = peak.max(c.norm());
            coefs.push(c);
        }
        Ok(coefs)
    }
}

pub fn incident_pressure(scene: &SphereScene, x: &Vec3) -> Result<Complex64> {
    let d = (x - scene.source).norm();
    if d == 0.0 {
        return Err(Error::InvalidArgument("evaluation point coincides with the source".into()));
    }
    Ok(green(scene.wavenumber, d) * scene.p0)
}

fn cos_angle(x: &Vec3, source: &Vec3) -> f64 {
    (x.dot(source) / (x.norm() * source.norm())).clamp(-1.0, 1.0)
}

fn check_exterior(scene: &SphereScene, x: &Vec3) -> Result<f64> {
    let r = x.norm();
    if r < scene.radius * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "evaluation point at r = {r} lies inside the sphere of radius {}",
            scene.radius
        )));
    }
    Ok(r)
}

fn sum_series(coefs: &[Complex64], cos_beta: f64) -> Complex64 {
    let p = legendre_all(coefs.len().saturating_sub(1), cos_beta);
    coefs.iter().zip(&p).map(|(c, pn)| c * pn).sum()
}

pub fn scattered_pressure(scene: &SphereScene, x: &Vec3) -> Result<Complex64> {
    let r = check_exterior(scene, x)?;
    let coefs = scene.radial_coefficients(r)?;
    Ok(sum_series(&coefs, cos_angle(x, &scene.source)))
}

pub fn total_pressure(scene: &SphereScene, x: &Vec3) -> Result<Complex64> {
    Ok(incident_pressure(scene, x)? + scattered_pressure(scene, x)?)
}

/// Total field `p_inc + p_scat` at every grid point for each frequency.
pub fn reference_field(
    scene: &SphereScene,
    grid: &EvalGrid,
    frequencies: &[f64],
    medium: &Medium,
) -> Result<PressureField> {
    let mut field = PressureField::zeros(frequencies.to_vec(), grid.len());
    for (fi, &f) in frequencies.iter().enumerate() {
        let s = scene.clone().with_wavenumber(medium.wavenumber(f))?;
        let mut by_radius: HashMap<u64, Vec<Complex64>> = HashMap::new();
        for p in &grid.points {
            let r = check_exterior(&s, p)?;
            if let std::collections::hash_map::Entry::Vacant(e) = by_radius.entry(r.to_bits()) {
                e.insert(s.radial_coefficients(r)?);
            }
        }
        let values: Result<Vec<Complex64>> = grid
            .points
            .par_iter()
            .map(|p| {
                let coefs = &by_radius[&p.norm().to_bits()];
                Ok(incident_pressure(&s, p)? + sum_series(coefs, cos_angle(p, &s.source)))
            })
            .collect();
        field.row_mut(fi).copy_from_slice(&values?);
    }
    Ok(field)
}
