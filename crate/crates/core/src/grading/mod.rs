//! A-priori mesh grading.
//!
//! The local target edge length grows with the straight-line distance of an
//! edge midpoint from the centre of a tagged patch (the microphone), from
//! `lmin` at the patch to `lmax` at the farthest point of the input mesh:
//!
//! ```text
//! d̄  = |E_m - Γ*_m| / d_max          clamped to [0, 1]
//! μ  = d̄^α                           (power)
//! μ  = 1 - cos^α(π d̄ / 2)            (raised cosine)
//! ℓ̂  = lmin + (lmax - lmin) μ(d̄)
//! ```
//!
//! [`remesh`] then drives an incremental split/collapse/flip/smooth remesher
//! towards that target field.

mod dynmesh;
mod remesh;

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

pub use remesh::{edge_band_fraction, remesh, GradedMeshReport, IterationStats};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::mesh::TriangleMesh;

/// Lower and upper remesher thresholds relative to the local target.
pub const COLLAPSE_RATIO: f64 = 4.0 / 5.0;
pub const SPLIT_RATIO: f64 = 4.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GradingFamily {
    Power,
    RaisedCosine,
    Uniform,
}

impl GradingFamily {
    pub fn short_name(&self) -> &'static str {
        match self {
            GradingFamily::Power => "POW",
            GradingFamily::RaisedCosine => "COS",
            GradingFamily::Uniform => "UNI",
        }
    }
}

impl fmt::Display for GradingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GradingFamily::Power => "power",
            GradingFamily::RaisedCosine => "raised-cosine",
            GradingFamily::Uniform => "uniform",
        };
        f.write_str(s)
    }
}

impl FromStr for GradingFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pow" | "power" => Ok(GradingFamily::Power),
            "cos" | "raised-cosine" | "raised_cosine" | "cosine" => Ok(GradingFamily::RaisedCosine),
            "uni" | "uniform" => Ok(GradingFamily::Uniform),
            _ => Err(Error::InvalidArgument(format!("unknown grading family '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradingSpec {
    pub family: GradingFamily,
    pub alpha: f64,
    pub lmin_mm: f64,
    pub lmax_mm: f64,
    /// Face tag marking the patch the grading is centred on.
    pub patch_label: String,
    /// Normalisation distance in meters; `None` freezes it from the input
    /// mesh as the largest edge-midpoint distance to the patch centre.
    pub d_max: Option<f64>,
    pub iterations: usize,
}

pub const DEFAULT_ITERATIONS: usize = 10;
pub const DEFAULT_PATCH_LABEL: &str = "mic";

impl GradingSpec {
    pub fn uniform(edge_mm: f64) -> Self {
        Self {
            family: GradingFamily::Uniform,
            alpha: 0.0,
            lmin_mm: edge_mm,
            lmax_mm: edge_mm,
            patch_label: DEFAULT_PATCH_LABEL.to_string(),
            d_max: None,
            iterations: DEFAULT_ITERATIONS,
        }
    }

    pub fn power(alpha: f64, lmin_mm: f64, lmax_mm: f64) -> Self {
        Self { family: GradingFamily::Power, alpha, lmin_mm, lmax_mm, ..Self::uniform(lmax_mm) }
    }

    pub fn raised_cosine(alpha: f64, lmin_mm: f64, lmax_mm: f64) -> Self {
        Self {
            family: GradingFamily::RaisedCosine,
            alpha,
            lmin_mm,
            lmax_mm,
            ..Self::uniform(lmax_mm)
        }
    }

    /// Short label such as `COS2`, `POW1` or `UNI`.
    pub fn name(&self) -> String {
        match self.family {
            GradingFamily::Uniform => "UNI".to_string(),
            f => format!("{}{}", f.short_name(), self.alpha),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        let lengths_ok = self.lmin_mm > 0.0 && self.lmin_mm <= self.lmax_mm && self.lmax_mm.is_finite();
        if self.family != GradingFamily::Uniform && !lengths_ok {
            return Err(Error::InvalidArgument(format!(
                "need 0 < lmin <= lmax, got ({}, {})",
                self.lmin_mm, self.lmax_mm
            )));
        }
        if !(self.lmax_mm > 0.0) {
            return Err(Error::InvalidArgument("target edge length must be positive".into()));
        }
        if let Some(d) = self.d_max {
            if !(d > 0.0) {
                return Err(Error::InvalidArgument(format!("d_max must be positive, got {d}")));
            }
        }
        Ok(())
    }
}

/// Grading function `μ(d̄)`. The uniform family is `1` everywhere.
pub fn grading_value(spec: &GradingSpec, d: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::InvalidArgument(format!("relative distance {d} outside [0, 1]")));
    }
    Ok(mu(spec.family, spec.alpha, d))
}

#[inline]
fn mu(family: GradingFamily, alpha: f64, d: f64) -> f64 {
    match family {
        GradingFamily::Power => d.powf(alpha),
        // cos(π d/2) written as sin(π (1-d)/2) so that d = 1 gives exactly 0
        GradingFamily::RaisedCosine => 1.0 - (FRAC_PI_2 * (1.0 - d)).sin().powf(alpha),
        GradingFamily::Uniform => 1.0,
    }
}

/// Local target edge length in millimeters; `d` is clamped to `[0, 1]`.
pub fn target_edge_length(spec: &GradingSpec, d: f64) -> f64 {
    let d = d.clamp(0.0, 1.0);
    match spec.family {
        GradingFamily::Uniform => spec.lmax_mm,
        f => spec.lmin_mm + (spec.lmax_mm - spec.lmin_mm) * mu(f, spec.alpha, d),
    }
}

/// Relative distance of the midpoint of the edge carried by half-edge `h`.
pub fn edge_relative_distance(mesh: &TriangleMesh, h: usize, patch_center: &Vec3, d_max: f64) -> f64 {
    let a = mesh.vertices()[mesh.halfedge_from(h) as usize];
    let b = mesh.vertices()[mesh.halfedge_to(h) as usize];
    relative_distance(&((a + b) * 0.5), patch_center, d_max)
}

#[inline]
pub fn relative_distance(p: &Vec3, patch_center: &Vec3, d_max: f64) -> f64 {
    ((p - patch_center).norm() / d_max).clamp(0.0, 1.0)
}

/// Largest distance from any edge midpoint of `mesh` to `center`.
pub fn max_midpoint_distance(mesh: &TriangleMesh, center: &Vec3) -> f64 {
    let v = mesh.vertices();
    mesh.edges()
        .map(|(_, a, b)| ((v[a as usize] + v[b as usize]) * 0.5 - center).norm())
        .fold(0.0, f64::max)
}

/// Target edge-length field in meters, evaluated at edge midpoints.
#[derive(Debug, Clone)]
pub struct TargetField {
    spec: GradingSpec,
    center: Vec3,
    d_max: f64,
}

impl TargetField {
    /// Resolves the patch centre and `d_max` against the input mesh.
    pub fn new(mesh: &TriangleMesh, spec: &GradingSpec) -> Result<Self> {
        spec.validate()?;
        if spec.family == GradingFamily::Uniform {
            return Ok(Self { spec: spec.clone(), center: Vec3::zeros(), d_max: 1.0 });
        }
        let center = mesh.patch_center(&spec.patch_label)?;
        let d_max = match spec.d_max {
            Some(d) => d,
            None => max_midpoint_distance(mesh, &center),
        };
        Ok(Self { spec: spec.clone(), center, d_max })
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn spec(&self) -> &GradingSpec {
        &self.spec
    }

    pub fn relative_distance(&self, midpoint: &Vec3) -> f64 {
        match self.spec.family {
            GradingFamily::Uniform => 1.0,
            _ => relative_distance(midpoint, &self.center, self.d_max),
        }
    }

    /// Target length in meters at `midpoint`.
    #[inline]
    pub fn at(&self, midpoint: &Vec3) -> f64 {
        target_edge_length(&self.spec, self.relative_distance(midpoint)) * 1e-3
    }
}
