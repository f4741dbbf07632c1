//! Exterior Helmholtz collocation BEM with piecewise-constant elements and
//! Burton–Miller coupling.
//!
//! The total potential satisfies
//! `τ φ(x) = ∫ ∂G/∂n_y φ - ∫ G v + φ_inc(x)` with `τ = 1` outside, `½` on
//! the boundary and `0` inside; the normal points into the fluid and the
//! pressure is `p = iρω φ`.

mod assemble;
pub(crate) mod integrate;
pub(crate) mod kernels;
mod solve;

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

pub use assemble::{
    assemble, dense_matrix_bytes, double_layer_row_sums, AssemblySettings, BemProblem,
    Excitation, DEFAULT_DENSE_CAP,
};
pub use integrate::QuadratureOrder;
pub use solve::{gmres, solve, solve_direct, SolveReport, SolverMethod, SolverSettings};

use crate::error::{Error, Result};
use crate::field::PressureField;
use crate::geometry::Vec3;
use crate::grids::EvalGrid;
use crate::mesh::{SurfaceProjector, TriangleMesh};
use crate::physics::Medium;
use integrate::{integrate, Panel, Want};

/// Assembly plus solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BemSettings {
    pub assembly: AssemblySettings,
    pub solver: SolverSettings,
}

#[derive(Debug, Clone)]
pub struct BoundarySolution {
    pub problem: BemProblem,
    /// Velocity potential per face.
    pub phi: Vec<Complex64>,
    /// Prescribed `∂φ/∂n` per face.
    pub velocity: Vec<Complex64>,
    pub report: SolveReport,
    panels: Arc<Vec<Panel>>,
    quadrature: QuadratureOrder,
}

impl BoundarySolution {
    /// Surface pressure per face.
    pub fn surface_pressure(&self) -> Vec<Complex64> {
        let f = self.problem.pressure_factor();
        self.phi.iter().map(|p| p * f).collect()
    }

    /// Right-hand side of the representation formula at any point `x`,
    /// i.e. `τ(x) φ(x)`. No proximity check.
    pub fn representation(&self, x: &Vec3) -> Complex64 {
        let k = self.problem.wavenumber;
        let rule = self.quadrature.rule();
        let nx = Vec3::zeros();
        let mut acc = self.problem.incident(x).0;
        for (j, p) in self.panels.iter().enumerate() {
            let has_v = self.velocity[j] != Complex64::new(0.0, 0.0);
            let want = if has_v { Want::FIELD } else { Want { g: false, kp: false, w: false } };
            let e = integrate(p, k, x, &nx, false, &rule, want);
            acc += e.h * self.phi[j];
            if has_v {
                acc -= e.g * self.velocity[j];
            }
        }
        acc
    }
}

/// Assemble and solve one problem.
pub fn solve_problem(problem: &BemProblem, settings: &BemSettings) -> Result<BoundarySolution> {
    let (a, b) = assemble(problem, &settings.assembly)?;
    let (x, report) = solve(&a, &b, &settings.solver)?;
    drop(a);
    let panels = Arc::new(integrate::panels(&problem.mesh, settings.assembly.quadrature));
    Ok(BoundarySolution {
        problem: problem.clone(),
        phi: x.iter().copied().collect(),
        velocity: problem.boundary_velocity(),
        report,
        panels,
        quadrature: settings.assembly.quadrature,
    })
}

/// Rejects points inside the body or closer to the surface than the
/// diameter of the nearest element.
pub fn check_exterior_points(mesh: &TriangleMesh, points: &[Vec3]) -> Result<()> {
    let projector = SurfaceProjector::new(mesh);
    let faces: Vec<[Vec3; 3]> = (0..mesh.num_faces()).map(|f| mesh.face_vertices(f)).collect();
    let bad = points.par_iter().enumerate().find_map_first(|(i, x)| {
        let proj = projector.project(x);
        if proj.distance <= mesh.face_diameter(proj.face) {
            return Some((i, proj.distance));
        }
        let winding: f64 =
            faces.iter().map(|v| kernels::solid_angle(x, v)).sum::<f64>() / (-4.0 * std::f64::consts::PI);
        (winding > 0.5).then_some((i, -proj.distance))
    });
    match bad {
        Some((index, distance)) => Err(Error::NearSurface { index, distance }),
        None => Ok(()),
    }
}

/// Pressure `iρω φ(x)` at every grid point.
pub fn evaluate_exterior(solution: &BoundarySolution, grid: &EvalGrid) -> Result<Vec<Complex64>> {
    evaluate_points(solution, &grid.points)
}

pub fn evaluate_points(solution: &BoundarySolution, points: &[Vec3]) -> Result<Vec<Complex64>> {
    check_exterior_points(&solution.problem.mesh, points)?;
    let f = solution.problem.pressure_factor();
    Ok(points.par_iter().map(|x| solution.representation(x) * f).collect())
}

/// Wall-clock breakdown and solver diagnostics for one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRun {
    pub frequency: f64,
    pub faces: usize,
    pub assemble_seconds: f64,
    pub solve_seconds: f64,
    pub evaluate_seconds: f64,
    pub iterations: usize,
    pub relative_residual: f64,
}

impl FrequencyRun {
    pub fn total_seconds(&self) -> f64 {
        self.assemble_seconds + self.solve_seconds + self.evaluate_seconds
    }
}

/// Solve at each frequency and evaluate the pressure on the grid.
pub fn calc_field(
    mesh: Arc<TriangleMesh>,
    excitation: &Excitation,
    grid: &EvalGrid,
    frequencies: &[f64],
    medium: Medium,
    settings: &BemSettings,
) -> Result<(PressureField, Vec<FrequencyRun>)> {
    if frequencies.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
        return Err(Error::InvalidArgument("frequencies must be positive".into()));
    }
    check_exterior_points(&mesh, &grid.points)?;
    let mut field = PressureField::zeros(frequencies.to_vec(), grid.len());
    let mut runs = Vec::with_capacity(frequencies.len());
    for (fi, &freq) in frequencies.iter().enumerate() {
        let problem = BemProblem::at_frequency(mesh.clone(), freq, medium, excitation.clone())?;
        let t0 = Instant::now();
        let (a, b) = assemble(&problem, &settings.assembly)?;
        let t1 = Instant::now();
        let (x, report) = solve(&a, &b, &settings.solver)?;
        drop(a);
        let t2 = Instant::now();
        let solution = BoundarySolution {
            problem: problem.clone(),
            phi: x.iter().copied().collect(),
            velocity: problem.boundary_velocity(),
            report: report.clone(),
            panels: Arc::new(integrate::panels(&mesh, settings.assembly.quadrature)),
            quadrature: settings.assembly.quadrature,
        };
        let pf = problem.pressure_factor();
        let values: Vec<Complex64> =
            grid.points.par_iter().map(|x| solution.representation(x) * pf).collect();
        field.row_mut(fi).copy_from_slice(&values);
        let t3 = Instant::now();
        runs.push(FrequencyRun {
            frequency: freq,
            faces: mesh.num_faces(),
            assemble_seconds: (t1 - t0).as_secs_f64(),
            solve_seconds: (t2 - t1).as_secs_f64(),
            evaluate_seconds: (t3 - t2).as_secs_f64(),
            iterations: report.iterations,
            relative_residual: report.relative_residual,
        });
    }
    Ok((field, runs))
}

/// Reciprocal HRTF setup: the patch `label` vibrates with 1 m/s, the
/// pressure is evaluated at the grid (loudspeaker) positions.
pub fn calc_hrtf_reciprocal(
    mesh: Arc<TriangleMesh>,
    label: &str,
    grid: &EvalGrid,
    frequencies: &[f64],
    medium: Medium,
    settings: &BemSettings,
) -> Result<(PressureField, Vec<FrequencyRun>)> {
    let excitation = Excitation::VibratingPatch { label: label.to_string(), velocity: 1.0 };
    calc_field(mesh, &excitation, grid, frequencies, medium, settings)
}

/// Direct setup: a point source of strength `p0` at `source`.
pub fn calc_point_source(
    mesh: Arc<TriangleMesh>,
    source: Vec3,
    p0: f64,
    grid: &EvalGrid,
    frequencies: &[f64],
    medium: Medium,
    settings: &BemSettings,
) -> Result<(PressureField, Vec<FrequencyRun>)> {
    let excitation = Excitation::PointSource { position: source, strength: p0 };
    calc_field(mesh, &excitation, grid, frequencies, medium, settings)
}
