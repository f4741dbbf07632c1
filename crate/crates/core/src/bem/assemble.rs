//! Burton–Miller collocation system for a rigid (or partly vibrating) body.
//!
//! With piecewise-constant potential `φ`, boundary velocity `v = ∂φ/∂n`,
//! collocation at centroids and coupling `η = i/k`:
//!
//! ```text
//! (½ I - H - η W) φ = φ_inc + η ∂φ_inc/∂n - (G + η K') v - η v / 2
//! ```
//!
//! `H`, `K'` and `W` are principal values / finite parts; for flat elements
//! the diagonals of `H` and `K'` vanish. The incident terms are taken as
//! element means rather than centroid values, which keeps the right-hand
//! side accurate for point sources close to the surface.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::integrate::{for_each_point_near, integrate, panels, Panel, QuadratureOrder, Want};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::mesh::{TriangleMesh, AREA_EPS};
use crate::physics::{green, Medium};

pub const DEFAULT_DENSE_CAP: usize = 8000;

#[derive(Debug, Clone, PartialEq)]
pub enum Excitation {
    /// Uniform normal velocity `velocity` (m/s) on the faces tagged `label`.
    VibratingPatch { label: String, velocity: f64 },
    /// Point source with free-field pressure `strength · e^{-ikr}/(4πr)`.
    PointSource { position: Vec3, strength: f64 },
}

#[derive(Debug, Clone)]
pub struct BemProblem {
    pub mesh: Arc<TriangleMesh>,
    pub wavenumber: f64,
    pub medium: Medium,
    pub excitation: Excitation,
}

impl BemProblem {
    pub fn new(
        mesh: Arc<TriangleMesh>,
        wavenumber: f64,
        medium: Medium,
        excitation: Excitation,
    ) -> Result<Self> {
        if !(wavenumber > 0.0 && wavenumber.is_finite()) {
            return Err(Error::InvalidArgument(format!("wavenumber must be > 0, got {wavenumber}")));
        }
        if !(medium.density > 0.0 && medium.sound_speed > 0.0) {
            return Err(Error::InvalidArgument("density and sound speed must be > 0".into()));
        }
        match &excitation {
            Excitation::VibratingPatch { label, velocity } => {
                if mesh.faces_with_label(label).is_empty() {
                    return Err(Error::MissingPatch(label.clone()));
                }
                if !velocity.is_finite() {
                    return Err(Error::InvalidArgument("patch velocity must be finite".into()));
                }
            }
            Excitation::PointSource { position, strength } => {
                if !position.iter().all(|c| c.is_finite()) || !strength.is_finite() {
                    return Err(Error::InvalidArgument("point source must be finite".into()));
                }
            }
        }
        Ok(Self { mesh, wavenumber, medium, excitation })
    }

    /// Convenience constructor from a frequency in Hz.
    pub fn at_frequency(
        mesh: Arc<TriangleMesh>,
        freq_hz: f64,
        medium: Medium,
        excitation: Excitation,
    ) -> Result<Self> {
        Self::new(mesh, medium.wavenumber(freq_hz), medium, excitation)
    }

    pub fn frequency(&self) -> f64 {
        self.medium.frequency(self.wavenumber)
    }

    /// Burton–Miller coupling `η = i/k`.
    pub fn coupling(&self) -> Complex64 {
        Complex64::new(0.0, 1.0 / self.wavenumber)
    }

    /// `iρω`, the factor from velocity potential to pressure.
    pub fn pressure_factor(&self) -> Complex64 {
        self.medium.potential_to_pressure(self.wavenumber)
    }

    /// Prescribed `v = ∂φ/∂n` per face.
    pub fn boundary_velocity(&self) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.mesh.num_faces()];
        if let Excitation::VibratingPatch { label, velocity } = &self.excitation {
            for f in self.mesh.faces_with_label(label) {
                v[f] = Complex64::new(*velocity, 0.0);
            }
        }
        v
    }

    /// Element means of the incident potential and of its normal derivative.
    pub(crate) fn incident_mean(&self, p: &Panel) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let Excitation::PointSource { position, .. } = &self.excitation else {
            return (zero, zero);
        };
        let (mut phi, mut dphi, mut area) = (zero, zero, 0.0);
        for_each_point_near(p, position, |y, w| {
            let (v, g) = self.incident(&y);
            phi += v * w;
            dphi += (g[0] * p.n.x + g[1] * p.n.y + g[2] * p.n.z) * w;
            area += w;
        });
        (phi / area, dphi / area)
    }

    /// Incident potential and its gradient at `x` (zero for a patch).
    pub fn incident(&self, x: &Vec3) -> (Complex64, [Complex64; 3]) {
        match &self.excitation {
            Excitation::VibratingPatch { .. } => (Complex64::new(0.0, 0.0), [Complex64::new(0.0, 0.0); 3]),
            Excitation::PointSource { position, strength } => {
                let k = self.wavenumber;
                let r = x - position;
                let d = r.norm();
                let g = green(k, d) / self.pressure_factor() * *strength;
                let radial = -g * Complex64::new(1.0, k * d) / (d * d);
                (g, [radial * r.x, radial * r.y, radial * r.z])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblySettings {
    pub quadrature: QuadratureOrder,
    /// Largest face count for which a dense matrix is built.
    pub dense_cap: usize,
}

impl Default for AssemblySettings {
    fn default() -> Self {
        Self { quadrature: QuadratureOrder::Seven, dense_cap: DEFAULT_DENSE_CAP }
    }
}

/// Bytes needed by the dense system matrix for `faces` unknowns.
pub fn dense_matrix_bytes(faces: usize) -> u64 {
    (faces as u64).pow(2) * std::mem::size_of::<Complex64>() as u64
}

pub(crate) fn checked_panels(mesh: &TriangleMesh, settings: &AssemblySettings) -> Result<Vec<Panel>> {
    let n = mesh.num_faces();
    if n > settings.dense_cap {
        return Err(Error::AssemblyCap { faces: n, cap: settings.dense_cap });
    }
    for f in 0..n {
        let area = mesh.face_area(f);
        let d = mesh.face_diameter(f);
        if area <= AREA_EPS * d * d {
            return Err(Error::DegenerateFace(f, area));
        }
    }
    Ok(panels(mesh, settings.quadrature))
}

/// Dense system matrix and right-hand side. Deterministic: each column is
/// computed independently and written to its own slot.
pub fn assemble(
    problem: &BemProblem,
    settings: &AssemblySettings,
) -> Result<(DMatrix<Complex64>, DVector<Complex64>)> {
    let mesh = &problem.mesh;
    let ps = checked_panels(mesh, settings)?;
    let n = ps.len();
    let k = problem.wavenumber;
    let eta = problem.coupling();
    let rule = settings.quadrature.rule();

    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(j, col)| {
        let pj = &ps[j];
        for (i, out) in col.iter_mut().enumerate() {
            let pi = &ps[i];
            let e = integrate(pj, k, &pi.c, &pi.n, i == j, &rule, Want::MATRIX);
            let mut a = -e.h - eta * e.w;
            if i == j {
                a += 0.5;
            }
            *out = a;
        }
    });
    let a = DMatrix::from_vec(n, n, data);

    let v = problem.boundary_velocity();
    let sources: Vec<usize> = (0..n).filter(|&j| v[j] != Complex64::new(0.0, 0.0)).collect();
    let rhs: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let pi = &ps[i];
            let (phi, dphi) = problem.incident_mean(pi);
            let mut b = phi + eta * dphi - eta * v[i] * 0.5;
            for &j in &sources {
                let e = integrate(&ps[j], k, &pi.c, &pi.n, i == j, &rule, Want::VELOCITY);
                b -= (e.g + eta * e.kp) * v[j];
            }
            b
        })
        .collect();
    Ok((a, DVector::from_vec(rhs)))
}

/// Row sums `Σ_j ∫_{F_j} ∂G/∂n_y` at every centroid. At `k = 0` on a closed
/// surface each sum is `-1/2`.
pub fn double_layer_row_sums(
    mesh: &TriangleMesh,
    wavenumber: f64,
    settings: &AssemblySettings,
) -> Result<Vec<Complex64>> {
    let ps = checked_panels(mesh, settings)?;
    let rule = settings.quadrature.rule();
    Ok((0..ps.len())
        .into_par_iter()
        .map(|i| {
            let pi = &ps[i];
            ps.iter()
                .enumerate()
                .map(|(j, pj)| integrate(pj, wavenumber, &pi.c, &pi.n, i == j, &rule, Want::MATRIX).h)
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::make_sphere;

    fn sphere(edge_mm: f64) -> Arc<TriangleMesh> {
        Arc::new(make_sphere(0.1, edge_mm).unwrap())
    }

    #[test]
    fn validation() {
        let m = sphere(40.0);
        let src = Excitation::PointSource { position: Vec3::new(0.0, 0.5, 0.0), strength: 1.0 };
        assert!(BemProblem::new(m.clone(), 0.0, Medium::default(), src.clone()).is_err());
        assert!(BemProblem::new(m.clone(), -1.0, Medium::default(), src.clone()).is_err());
        let patch = Excitation::VibratingPatch { label: "mic".into(), velocity: 1.0 };
        assert!(matches!(
            BemProblem::new(m.clone(), 5.0, Medium::default(), patch),
            Err(Error::MissingPatch(_))
        ));
        let p = BemProblem::new(m.clone(), 5.0, Medium::default(), src).unwrap();
        let cap = AssemblySettings { dense_cap: 10, ..Default::default() };
        assert!(matches!(assemble(&p, &cap), Err(Error::AssemblyCap { cap: 10, .. })));
    }

    #[test]
    fn static_solid_angle_identity() {
        let m = make_sphere(0.1, 15.0).unwrap();
        assert_eq!(m.num_faces(), 1280);
        let sums = double_layer_row_sums(&m, 0.0, &AssemblySettings::default()).unwrap();
        for s in &sums {
            assert!((s.re + 0.5).abs() < 1e-2 && s.im == 0.0, "{s}");
        }
    }

    #[test]
    fn assembly_is_deterministic() {
        let m = sphere(30.0);
        let src = Excitation::PointSource { position: Vec3::new(0.0, 0.3, 0.1), strength: 1.0 };
        let p = BemProblem::new(m, 9.0, Medium::default(), src).unwrap();
        let s = AssemblySettings::default();
        let (a1, b1) = assemble(&p, &s).unwrap();
        let (a2, b2) = assemble(&p, &s).unwrap();
        assert!(a1.iter().zip(a2.iter()).all(|(x, y)| x.re.to_bits() == y.re.to_bits()
            && x.im.to_bits() == y.im.to_bits()));
        assert_eq!(b1, b2);
    }

    #[test]
    fn incident_gradient_matches_finite_difference() {
        let m = sphere(40.0);
        let src = Excitation::PointSource { position: Vec3::new(0.0, 0.3, 0.1), strength: 2.0 };
        let p = BemProblem::new(m, 12.0, Medium::default(), src).unwrap();
        let x = Vec3::new(0.05, 0.02, -0.04);
        let (_, grad) = p.incident(&x);
        let eps = 1e-6;
        for (axis, g) in grad.iter().enumerate() {
            let mut d = Vec3::zeros();
            d[axis] = eps;
            let fd = (p.incident(&(x + d)).0 - p.incident(&(x - d)).0) / (2.0 * eps);
            assert!((fd - g).norm() < 1e-6 * g.norm().max(1e-12));
        }
    }

    #[test]
    fn incident_mean_matches_subdivision() {
        let m = sphere(30.0);
        let f = 0;
        let v = m.face_vertices(f);
        let c = m.face_centroid(f);
        let n = m.face_normal(f);
        let ps = panels(&m, QuadratureOrder::Seven);
        for height in [0.001, 0.5] {
            let src = Excitation::PointSource { position: c + n * height, strength: 1.0 };
            let p = BemProblem::new(m.clone(), 18.0, Medium::default(), src).unwrap();
            let (phi, dphi) = p.incident_mean(&ps[f]);
            // midpoint rule on a 200x200 barycentric lattice
            let steps = 200;
            let (mut rp, mut rd, mut cnt) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
            for i in 0..steps {
                for j in 0..steps - i {
                    for up in [false, true] {
                        if up && i + j + 1 >= steps {
                            continue;
                        }
                        let (a, b) = if up {
                            ((i as f64 + 2.0 / 3.0) / steps as f64, (j as f64 + 2.0 / 3.0) / steps as f64)
                        } else {
                            ((i as f64 + 1.0 / 3.0) / steps as f64, (j as f64 + 1.0 / 3.0) / steps as f64)
                        };
                        let y = v[0] + (v[1] - v[0]) * a + (v[2] - v[0]) * b;
                        let (q, g) = p.incident(&y);
                        rp += q;
                        rd += g[0] * n.x + g[1] * n.y + g[2] * n.z;
                        cnt += 1.0;
                    }
                }
            }
            assert!((phi - rp / cnt).norm() < 2e-3 * phi.norm(), "h={height}");
            assert!((dphi - rd / cnt).norm() < 2e-2 * dphi.norm(), "h={height}");
        }
    }
}
