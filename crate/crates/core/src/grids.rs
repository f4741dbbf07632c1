//! Exterior evaluation grids ("loudspeaker" positions).
//!
//! Axes: +x front, +y through the left ear (the ipsilateral side), +z up.
//!
//! Interaural-polar coordinates put the poles on the interaural (y) axis:
//! lateral angle ϑ ∈ [−90°, 90°] and polar angle φ ∈ [0°, 360°), with φ = 0°
//! in front and φ = 90° above:
//!
//! ```text
//! x = r cos ϑ cos φ,   y = r sin ϑ,   z = r cos ϑ sin φ
//! ```
//!
//! Spherical (ARI) coordinates use azimuth counter-clockwise from the front
//! (90° = left) and elevation above the horizontal plane.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridKind {
    /// Coordinates are (lateral, polar).
    Eqa,
    /// Coordinates are (azimuth, elevation).
    Ari,
    /// Coordinates are (azimuth, elevation) derived from the points.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hemisphere {
    Ipsilateral,
    Contralateral,
}

impl Hemisphere {
    pub fn as_str(&self) -> &'static str {
        match self {
            Hemisphere::Ipsilateral => "ipsi",
            Hemisphere::Contralateral => "contra",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    pub kind: GridKind,
    pub radius: f64,
    pub points: Vec<Vec3>,
    /// Angular coordinates in degrees, see [`GridKind`].
    pub coords: Vec<[f64; 2]>,
    /// Quadrature weights (solid angle per point, steradian).
    pub weights: Vec<f64>,
    pub hemisphere: Vec<Hemisphere>,
}

pub fn interaural_to_cartesian(lateral_deg: f64, polar_deg: f64, radius: f64) -> Vec3 {
    let (sl, cl) = lateral_deg.to_radians().sin_cos();
    let (sp, cp) = polar_deg.to_radians().sin_cos();
    Vec3::new(radius * cl * cp, radius * sl, radius * cl * sp)
}

/// Returns `(lateral, polar, radius)` with polar in `[0, 360)`; polar is 0
/// on the interaural axis.
pub fn cartesian_to_interaural(p: &Vec3) -> (f64, f64, f64) {
    let r = p.norm();
    let lateral = (p.y / r).clamp(-1.0, 1.0).asin().to_degrees();
    let polar = wrap_degrees(p.z.atan2(p.x).to_degrees());
    (lateral, polar, r)
}

pub fn spherical_to_cartesian(azimuth_deg: f64, elevation_deg: f64, radius: f64) -> Vec3 {
    let (sa, ca) = azimuth_deg.to_radians().sin_cos();
    let (se, ce) = elevation_deg.to_radians().sin_cos();
    Vec3::new(radius * ce * ca, radius * ce * sa, radius * se)
}

/// Returns `(azimuth, elevation, radius)` with azimuth in `[0, 360)`.
pub fn cartesian_to_spherical(p: &Vec3) -> (f64, f64, f64) {
    let r = p.norm();
    let elevation = (p.z / r).clamp(-1.0, 1.0).asin().to_degrees();
    let azimuth = wrap_degrees(p.y.atan2(p.x).to_degrees());
    (azimuth, elevation, r)
}

fn wrap_degrees(a: f64) -> f64 {
    let w = a.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// `n` such that `n * step == range` within rounding, if any.
fn divisions(range: f64, step: f64) -> Option<usize> {
    if !(step > 0.0) || !step.is_finite() {
        return None;
    }
    let n = (range / step).round();
    (n >= 1.0 && ((n * step) - range).abs() < 1e-9 * range).then_some(n as usize)
}

/// Solid angle of a polar cap of half-angle `half` (radians).
fn cap_weight(half: f64) -> f64 {
    TAU * (1.0 - half.cos())
}

/// Equi-angular grid in interaural-polar coordinates.
///
/// Lateral rings at `−90 + i·lateral_step`; the two pole rings (±90°)
/// collapse to one point each. Every other ring is sampled at
/// `j·polar_step` over `[0°, 360°)`. Point order: south (right-ear) pole,
/// rings by increasing lateral angle with increasing polar angle, north pole.
///
/// Weights are `cos ϑ Δϑ Δφ` (the sine of the colatitude measured from the
/// interaural axis); each pole gets the solid angle of a cap of half-angle
/// `Δϑ/2`, so every weight is positive and the sum approximates `4π`.
pub fn make_eqa_grid(radius: f64, lateral_step: f64, polar_step: f64) -> Result<EvalGrid> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("grid radius must be positive, got {radius}")));
    }
    let n_lat = divisions(180.0, lateral_step)
        .filter(|n| n % 2 == 0)
        .ok_or_else(|| Error::InvalidArgument(format!("lateral step {lateral_step} must divide 90°")))?;
    let n_pol = divisions(360.0, polar_step)
        .ok_or_else(|| Error::InvalidArgument(format!("polar step {polar_step} must divide 360°")))?;
    let dl = lateral_step.to_radians();
    let dp = polar_step.to_radians();

    let mut g = EvalGrid::empty(GridKind::Eqa, radius);
    g.push_eqa(-90.0, 0.0, cap_weight(dl / 2.0));
    for i in 1..n_lat {
        let lat = -90.0 + i as f64 * lateral_step;
        let w = lat.to_radians().cos() * dl * dp;
        for j in 0..n_pol {
            g.push_eqa(lat, j as f64 * polar_step, w);
        }
    }
    g.push_eqa(90.0, 0.0, cap_weight(dl / 2.0));
    Ok(g)
}

/// Grid with a polar gap below −30° elevation.
///
/// Elevation rings at −30°, −25°, …, 85° plus a single point at +90°.
/// Azimuth step is 2.5° on rings with |elevation| ≤ 30° and 5° above, so
/// the threshold applies to elevation. This gives 13·144 + 11·72 + 1 = 2665
/// points.
///
/// Weights are `cos(el) Δel Δaz`; the top point gets the cap of half-angle
/// 2.5°.
pub fn make_ari_grid(radius: f64) -> Result<EvalGrid> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("grid radius must be positive, got {radius}")));
    }
    const EL_STEP: f64 = 5.0;
    let del = EL_STEP.to_radians();
    let mut g = EvalGrid::empty(GridKind::Ari, radius);
    for i in 0..24 {
        let el = -30.0 + i as f64 * EL_STEP;
        let az_step: f64 = if el.abs() <= 30.0 { 2.5 } else { 5.0 };
        let n_az = (360.0 / az_step) as usize;
        let w = el.to_radians().cos() * del * az_step.to_radians();
        for j in 0..n_az {
            g.push_spherical(j as f64 * az_step, el, w);
        }
    }
    g.push_spherical(0.0, 90.0, cap_weight(del / 2.0));
    Ok(g)
}

impl EvalGrid {
    fn empty(kind: GridKind, radius: f64) -> Self {
        Self {
            kind,
            radius,
            points: Vec::new(),
            coords: Vec::new(),
            weights: Vec::new(),
            hemisphere: Vec::new(),
        }
    }

    fn push_eqa(&mut self, lateral: f64, polar: f64, weight: f64) {
        self.points.push(interaural_to_cartesian(lateral, polar, self.radius));
        self.coords.push([lateral, polar]);
        self.weights.push(weight);
        self.hemisphere.push(if lateral >= 0.0 {
            Hemisphere::Ipsilateral
        } else {
            Hemisphere::Contralateral
        });
    }

    fn push_spherical(&mut self, azimuth: f64, elevation: f64, weight: f64) {
        self.points.push(spherical_to_cartesian(azimuth, elevation, self.radius));
        self.coords.push([azimuth, elevation]);
        self.weights.push(weight);
        // y ∝ sin(azimuth): azimuth in [0°, 180°] is the +y side
        self.hemisphere.push(if azimuth <= 180.0 || elevation == 90.0 {
            Hemisphere::Ipsilateral
        } else {
            Hemisphere::Contralateral
        });
    }

    /// Arbitrary exterior points with unit weights. Hemisphere follows the
    /// sign of y (y = 0 counts as ipsilateral).
    pub fn from_points(points: Vec<Vec3>) -> Self {
        let radius = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let coords = points
            .iter()
            .map(|p| {
                let (az, el, _) = cartesian_to_spherical(p);
                [az, el]
            })
            .collect();
        let hemisphere = points
            .iter()
            .map(|p| if p.y >= 0.0 { Hemisphere::Ipsilateral } else { Hemisphere::Contralateral })
            .collect();
        Self {
            kind: GridKind::Custom,
            radius,
            weights: vec![1.0; points.len()],
            points,
            coords,
            hemisphere,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn indices(&self, side: Hemisphere) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.hemisphere[i] == side).collect()
    }

    /// Index of the grid point closest in direction to `dir`.
    pub fn nearest(&self, dir: &Vec3) -> usize {
        let d = dir.normalize();
        (0..self.len())
            .max_by(|&a, &b| {
                let ca = self.points[a].dot(&d) / self.points[a].norm();
                let cb = self.points[b].dot(&d) / self.points[b].norm();
                ca.total_cmp(&cb).then(b.cmp(&a))
            })
            .unwrap_or(0)
    }

    pub fn coordinate_names(&self) -> (&'static str, &'static str) {
        match self.kind {
            GridKind::Eqa => ("lateral", "polar"),
            GridKind::Ari | GridKind::Custom => ("azimuth", "elevation"),
        }
    }

    /// CSV with columns `index,x,y,z,<coord1>,<coord2>,weight,hemisphere`.
    pub fn to_csv(&self) -> String {
        let (c1, c2) = self.coordinate_names();
        let mut s = format!("index,x,y,z,{c1},{c2},weight,hemisphere\n");
        for i in 0..self.len() {
            let p = self.points[i];
            let _ = writeln!(
                s,
                "{i},{},{},{},{},{},{},{}",
                p.x,
                p.y,
                p.z,
                self.coords[i][0],
                self.coords[i][1],
                self.weights[i],
                self.hemisphere[i].as_str()
            );
        }
        s
    }
}

/// Total solid angle `4π`, the value EQA weights approximate.
pub const FULL_SOLID_ANGLE: f64 = 4.0 * PI;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eqa_counts() {
        let g = make_eqa_grid(1.2, 2.5, 5.0).unwrap();
        assert_eq!(g.len(), 71 * 72 + 2);
        assert_eq!(g.len(), 5114);
        // rings at -90, 0, 90 with the poles collapsed
        assert_eq!(make_eqa_grid(1.2, 90.0, 90.0).unwrap().len(), 6);
        assert_eq!(make_eqa_grid(1.2, 45.0, 90.0).unwrap().len(), 3 * 4 + 2);
    }

    #[test]
    fn eqa_invalid_steps() {
        assert!(make_eqa_grid(1.2, 7.0, 5.0).is_err());
        assert!(make_eqa_grid(1.2, 60.0, 5.0).is_err());
        assert!(make_eqa_grid(1.2, 2.5, 7.0).is_err());
        assert!(make_eqa_grid(1.2, 0.0, 5.0).is_err());
        assert!(make_eqa_grid(-1.0, 2.5, 5.0).is_err());
    }

    #[test]
    fn eqa_radius_weights_hemispheres() {
        let g = make_eqa_grid(1.2, 2.5, 5.0).unwrap();
        let dev = g.points.iter().map(|p| (p.norm() - 1.2).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-9);
        assert!(g.weights.iter().all(|&w| w > 0.0));
        let total: f64 = g.weights.iter().sum();
        assert!((total / FULL_SOLID_ANGLE - 1.0).abs() < 0.01, "{total}");
        for (p, h) in g.points.iter().zip(&g.hemisphere) {
            if p.y > 1e-12 {
                assert_eq!(*h, Hemisphere::Ipsilateral);
            } else if p.y < -1e-12 {
                assert_eq!(*h, Hemisphere::Contralateral);
            } else {
                assert_eq!(*h, Hemisphere::Ipsilateral);
            }
        }
        let ipsi = g.indices(Hemisphere::Ipsilateral).len();
        let contra = g.indices(Hemisphere::Contralateral).len();
        assert_eq!(ipsi + contra, g.len());
        // the horizontal ring (lateral 0) counts as ipsilateral
        assert_eq!(ipsi - contra, 72);
        // order: right pole first, left pole last
        assert_eq!(g.coords[0], [-90.0, 0.0]);
        assert_eq!(g.coords[g.len() - 1], [90.0, 0.0]);
    }

    #[test]
    fn ari_grid() {
        let g = make_ari_grid(1.2).unwrap();
        assert_eq!(g.len(), 13 * 144 + 11 * 72 + 1);
        assert!(g.coords.iter().all(|c| c[1] >= -30.0));
        assert!(g.points.iter().all(|p| (p.norm() - 1.2).abs() < 1e-9));
        assert!(g.weights.iter().all(|&w| w > 0.0));
        for (p, h) in g.points.iter().zip(&g.hemisphere) {
            if p.y.abs() > 1e-9 {
                assert_eq!(*h == Hemisphere::Ipsilateral, p.y > 0.0);
            }
        }
    }

    #[test]
    fn coordinate_anchors() {
        let p = interaural_to_cartesian(90.0, 123.0, 1.2);
        assert!((p - Vec3::new(0.0, 1.2, 0.0)).norm() < 1e-12);
        let p = interaural_to_cartesian(0.0, 0.0, 1.2);
        assert!((p - Vec3::new(1.2, 0.0, 0.0)).norm() < 1e-12);
        let p = interaural_to_cartesian(0.0, 90.0, 1.0);
        assert!((p - Vec3::z()).norm() < 1e-12);
        let p = spherical_to_cartesian(90.0, 0.0, 1.0);
        assert!((p - Vec3::y()).norm() < 1e-12);
    }

    #[test]
    fn nearest_direction() {
        let g = make_eqa_grid(1.2, 2.5, 5.0).unwrap();
        assert_eq!(g.nearest(&Vec3::y()), g.len() - 1);
        assert_eq!(g.nearest(&-Vec3::y()), 0);
    }

    #[test]
    fn csv_export() {
        let g = make_eqa_grid(1.0, 90.0, 90.0).unwrap();
        let csv = g.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,x,y,z,lateral,polar,weight,hemisphere");
        assert_eq!(lines.len(), 7);
        assert!(lines[1].ends_with("contra"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn interaural_round_trip(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, r in 0.1f64..5.0) {
            let d = Vec3::new(x, y, z);
            prop_assume!(d.norm() > 1e-3);
            let p = d.normalize() * r;
            let (lat, pol, rr) = cartesian_to_interaural(&p);
            prop_assert!((-90.0..=90.0).contains(&lat));
            prop_assert!((0.0..360.0).contains(&pol));
            let q = interaural_to_cartesian(lat, pol, rr);
            prop_assert!((p - q).norm() <= 1e-12 * r.max(1.0), "{p} {q}");
        }

        #[test]
        fn spherical_round_trip(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            let d = Vec3::new(x, y, z);
            prop_assume!(d.norm() > 1e-3);
            let p = d.normalize() * 1.2;
            let (az, el, r) = cartesian_to_spherical(&p);
            let q = spherical_to_cartesian(az, el, r);
            prop_assert!((p - q).norm() <= 1e-12);
        }
    }
}
