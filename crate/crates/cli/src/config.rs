//! Run configuration (TOML). Keys carry their unit as a suffix; unknown keys
//! are rejected.
//!
//! ```toml
//! schema_version = 1
//! output_dir = "runs/sphere"
//!
//! [mesh]
//! sphere_radius_m = 0.1
//! sphere_edge_mm = 1.4
//! patch = "mic"
//! patch_point_m = [0.0, 0.1, 0.0]
//!
//! [[grade]]
//! label = "COS2"
//! family = "cos"
//! alpha = 2.0
//! lmin_mm = 2.0
//! lmax_mm = 20.0
//!
//! [calc]
//! frequencies_hz = [500.0, 1000.0, 2000.0]
//! excitation = "point"
//! source_m = [0.0, 0.101, 0.0]
//!
//! [compare]
//! reference = "analytic"
//! ```

use std::path::{Path, PathBuf};

use gradbem::bem::{AssemblySettings, BemSettings, QuadratureOrder, SolverMethod, SolverSettings, DEFAULT_DENSE_CAP};
use gradbem::grading::{GradingFamily, GradingSpec, DEFAULT_ITERATIONS};
use gradbem::grids::{make_ari_grid, make_eqa_grid, EvalGrid};
use gradbem::physics::{Medium, AIR_DENSITY, SPEED_OF_SOUND};
use gradbem::Vec3;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub output_dir: PathBuf,
    /// Replace an existing output directory.
    #[serde(default)]
    pub overwrite: bool,
    /// Stages to run; dependencies are added and the order is derived from
    /// the stage graph. Defaults to every stage with a section.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<StageName>>,
    #[serde(default)]
    pub medium: MediumConfig,
    pub mesh: MeshConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grade: Vec<GradeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calc: Option<CalcConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageName {
    Mesh,
    Grade,
    Calc,
    Compare,
}

impl StageName {
    pub fn as_str(&self) -> &'static str {
        match self {
            StageName::Mesh => "mesh",
            StageName::Grade => "grade",
            StageName::Calc => "calc",
            StageName::Compare => "compare",
        }
    }

    pub fn dependencies(&self) -> &'static [StageName] {
        match self {
            StageName::Mesh => &[],
            StageName::Grade => &[StageName::Mesh],
            StageName::Calc => &[StageName::Mesh],
            StageName::Compare => &[StageName::Calc],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MediumConfig {
    pub density_kg_m3: f64,
    pub sound_speed_m_s: f64,
}

impl Default for MediumConfig {
    fn default() -> Self {
        Self { density_kg_m3: AIR_DENSITY, sound_speed_m_s: SPEED_OF_SOUND }
    }
}

impl MediumConfig {
    pub fn medium(&self) -> Medium {
        Medium { density: self.density_kg_m3, sound_speed: self.sound_speed_m_s }
    }
}

/// Input mesh: either a generated sphere or a mesh file with optional tags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tags: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere_radius_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere_edge_mm: Option<f64>,
    #[serde(default = "default_patch")]
    pub patch: String,
    /// Tags the faces near this point as `patch` when the mesh has no such
    /// tag yet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch_point_m: Option<[f64; 3]>,
    #[serde(default)]
    pub patch_radius_m: f64,
}

fn default_patch() -> String {
    gradbem::grading::DEFAULT_PATCH_LABEL.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub family: String,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lmin_mm: Option<f64>,
    pub lmax_mm: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_max_m: Option<f64>,
}

fn default_iterations() -> usize {
    DEFAULT_ITERATIONS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExcitationKind {
    Point,
    Patch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalcConfig {
    pub frequencies_hz: Vec<f64>,
    pub excitation: ExcitationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_m: Option<[f64; 3]>,
    #[serde(default = "one")]
    pub strength_pa_m: f64,
    #[serde(default = "one")]
    pub patch_velocity_m_s: f64,
    /// Also solve on the input mesh when grading variants exist.
    #[serde(default)]
    pub include_input: bool,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridChoice {
    Eqa,
    Ari,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub kind: GridChoice,
    pub radius_m: f64,
    pub lateral_step_deg: f64,
    pub polar_step_deg: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { kind: GridChoice::Eqa, radius_m: 1.2, lateral_step_deg: 10.0, polar_step_deg: 10.0 }
    }
}

impl GridConfig {
    pub fn build(&self) -> gradbem::Result<EvalGrid> {
        match self.kind {
            GridChoice::Eqa => make_eqa_grid(self.radius_m, self.lateral_step_deg, self.polar_step_deg),
            GridChoice::Ari => make_ari_grid(self.radius_m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub method: String,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restart: usize,
    pub quadrature: u32,
    pub dense_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolverSettings::default();
        Self {
            method: s.method.to_string(),
            tolerance: s.tolerance,
            max_iterations: s.max_iterations,
            restart: s.restart,
            quadrature: 7,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

impl SolverConfig {
    pub fn settings(&self) -> Result<BemSettings> {
        let method: SolverMethod =
            self.method.parse().map_err(|e: gradbem::Error| CliError::config("calc.solver.method", e.to_string()))?;
        let quadrature: QuadratureOrder = self
            .quadrature
            .to_string()
            .parse()
            .map_err(|e: gradbem::Error| CliError::config("calc.solver.quadrature", e.to_string()))?;
        Ok(BemSettings {
            assembly: AssemblySettings { quadrature, dense_cap: self.dense_cap },
            solver: SolverSettings {
                method,
                tolerance: self.tolerance,
                max_iterations: self.max_iterations,
                restart: self.restart,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    /// Rigid-sphere series; needs a sphere mesh and a point source.
    Analytic,
    /// The field of another variant of the same run.
    Variant,
    /// A PressureField CSV on the same grid and frequencies.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub reference: ReferenceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_order: Option<usize>,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(field, format!("must be a positive number, got {v}")))
    }
}

pub(crate) fn check_label(field: &str, label: &str) -> Result<()> {
    let ok = !label.is_empty()
        && label.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !label.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(CliError::config(field, format!("labels use [A-Za-z0-9_.-] only, got '{label}'")))
    }
}

pub(crate) fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::ConfigSyntax(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a configuration file. Relative paths inside it are resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        if let Some(p) = self.mesh.path.as_mut() {
            fix(p);
        }
        if let Some(p) = self.mesh.tags.as_mut() {
            fix(p);
        }
        if let Some(p) = self.compare.as_mut().and_then(|c| c.path.as_mut()) {
            fix(p);
        }
    }

    pub fn grading_specs(&self) -> Result<Vec<(String, GradingSpec)>> {
        self.grade
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let field = |k: &str| format!("grade[{i}].{k}");
                let family: GradingFamily =
                    g.family.parse().map_err(|e: gradbem::Error| CliError::config(field("family"), e.to_string()))?;
                let lmin = match (family, g.lmin_mm) {
                    (GradingFamily::Uniform, l) => l.unwrap_or(g.lmax_mm),
                    (_, Some(l)) => l,
                    (_, None) => return Err(CliError::config(field("lmin_mm"), "required for graded families")),
                };
                let spec = GradingSpec {
                    family,
                    alpha: g.alpha,
                    lmin_mm: lmin,
                    lmax_mm: g.lmax_mm,
                    patch_label: self.mesh.patch.clone(),
                    d_max: g.d_max_m,
                    iterations: g.iterations,
                };
                spec.validate().map_err(|e| CliError::config(format!("grade[{i}]"), e.to_string()))?;
                let label = g.label.clone().unwrap_or_else(|| default_grade_label(&spec));
                check_label(&field("label"), &label)?;
                Ok((label, spec))
            })
            .collect()
    }

    /// Stages to run in dependency order.
    pub fn stage_plan(&self) -> Result<Vec<StageName>> {
        let mut wanted: Vec<StageName> = match &self.stages {
            Some(s) => s.clone(),
            None => {
                let mut s = vec![StageName::Mesh];
                if !self.grade.is_empty() {
                    s.push(StageName::Grade);
                }
                if self.calc.is_some() {
                    s.push(StageName::Calc);
                }
                if self.compare.is_some() {
                    s.push(StageName::Compare);
                }
                s
            }
        };
        // close over dependencies
        let mut i = 0;
        while i < wanted.len() {
            for d in wanted[i].dependencies() {
                if !wanted.contains(d) {
                    wanted.push(*d);
                }
            }
            i += 1;
        }
        // grading variants feed calc when both are present
        let depends = |a: StageName, b: StageName| {
            a.dependencies().contains(&b) || (a == StageName::Calc && b == StageName::Grade)
        };
        let mut order = Vec::with_capacity(wanted.len());
        let mut pending = wanted;
        pending.sort();
        pending.dedup();
        while !pending.is_empty() {
            let pos = pending
                .iter()
                .position(|s| !pending.iter().any(|o| o != s && depends(*s, *o)))
                .expect("stage graph is acyclic");
            order.push(pending.remove(pos));
        }
        for s in &order {
            let missing = match s {
                StageName::Grade => self.grade.is_empty().then_some("grade"),
                StageName::Calc => self.calc.is_none().then_some("calc"),
                StageName::Compare => self.compare.is_none().then_some("compare"),
                StageName::Mesh => None,
            };
            if let Some(section) = missing {
                return Err(CliError::config("stages", format!("stage '{section}' needs a [{section}] section")));
            }
        }
        Ok(order)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(CliError::config("output_dir", "must not be empty"));
        }
        positive("medium.density_kg_m3", self.medium.density_kg_m3)?;
        positive("medium.sound_speed_m_s", self.medium.sound_speed_m_s)?;

        let m = &self.mesh;
        match (&m.path, m.sphere_radius_m, m.sphere_edge_mm) {
            (Some(_), None, None) => {}
            (None, Some(r), Some(e)) => {
                positive("mesh.sphere_radius_m", r)?;
                positive("mesh.sphere_edge_mm", e)?;
            }
            (None, Some(_), None) => return Err(CliError::config("mesh.sphere_edge_mm", "required with sphere_radius_m")),
            (None, None, Some(_)) => return Err(CliError::config("mesh.sphere_radius_m", "required with sphere_edge_mm")),
            (None, None, None) => return Err(CliError::config("mesh", "give either path or sphere_radius_m + sphere_edge_mm")),
            (Some(_), _, _) => return Err(CliError::config("mesh", "path and sphere_* are mutually exclusive")),
        }
        if m.tags.is_some() && m.path.is_none() {
            return Err(CliError::config("mesh.tags", "only valid together with mesh.path"));
        }
        check_label("mesh.patch", &m.patch)?;
        if let Some(p) = m.patch_point_m {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(CliError::config("mesh.patch_point_m", "must be finite"));
            }
        }
        if !(m.patch_radius_m >= 0.0) {
            return Err(CliError::config("mesh.patch_radius_m", "must be >= 0"));
        }

        let specs = self.grading_specs()?;
        let mut labels: Vec<&str> = specs.iter().map(|(l, _)| l.as_str()).collect();
        labels.push(INPUT_LABEL);
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(CliError::config("grade", format!("duplicate label '{l}'")));
            }
        }

        if let Some(c) = &self.calc {
            if c.frequencies_hz.is_empty() {
                return Err(CliError::config("calc.frequencies_hz", "must not be empty"));
            }
            for (i, f) in c.frequencies_hz.iter().enumerate() {
                positive(&format!("calc.frequencies_hz[{i}]"), *f)?;
            }
            match c.excitation {
                ExcitationKind::Point => match c.source_m {
                    Some(s) if s.iter().all(|v| v.is_finite()) => {}
                    _ => return Err(CliError::config("calc.source_m", "required (finite) for point excitation")),
                },
                ExcitationKind::Patch => {
                    if c.source_m.is_some() {
                        return Err(CliError::config("calc.source_m", "not used with patch excitation"));
                    }
                }
            }
            if !c.strength_pa_m.is_finite() {
                return Err(CliError::config("calc.strength_pa_m", "must be finite"));
            }
            if !c.patch_velocity_m_s.is_finite() {
                return Err(CliError::config("calc.patch_velocity_m_s", "must be finite"));
            }
            positive("calc.grid.radius_m", c.grid.radius_m)?;
            if c.grid.kind == GridChoice::Eqa {
                positive("calc.grid.lateral_step_deg", c.grid.lateral_step_deg)?;
                positive("calc.grid.polar_step_deg", c.grid.polar_step_deg)?;
            }
            c.grid.build().map_err(|e| CliError::config("calc.grid", e.to_string()))?;
            positive("calc.solver.tolerance", c.solver.tolerance)?;
            if c.solver.max_iterations == 0 || c.solver.restart == 0 {
                return Err(CliError::config("calc.solver", "max_iterations and restart must be >= 1"));
            }
            c.solver.settings()?;
        }

        if let Some(cmp) = &self.compare {
            let calc = self
                .calc
                .as_ref()
                .ok_or_else(|| CliError::config("compare", "needs a [calc] section"))?;
            match cmp.reference {
                ReferenceKind::Analytic => {
                    if m.sphere_radius_m.is_none() {
                        return Err(CliError::config("compare.reference", "analytic reference needs a sphere mesh"));
                    }
                    if calc.excitation != ExcitationKind::Point {
                        return Err(CliError::config("compare.reference", "analytic reference needs a point source"));
                    }
                }
                ReferenceKind::Variant => {
                    let l = cmp
                        .label
                        .as_deref()
                        .ok_or_else(|| CliError::config("compare.label", "required for a variant reference"))?;
                    if !labels.contains(&l) {
                        return Err(CliError::config("compare.label", format!("no variant '{l}'")));
                    }
                }
                ReferenceKind::File => {
                    if cmp.path.is_none() {
                        return Err(CliError::config("compare.path", "required for a file reference"));
                    }
                }
            }
            if let Some(n) = cmp.series_order {
                if n == 0 {
                    return Err(CliError::config("compare.series_order", "must be >= 1"));
                }
            }
        }
        self.stage_plan()?;
        Ok(())
    }
}

/// Label of the un-remeshed input mesh in study tables.
pub const INPUT_LABEL: &str = "input";

fn default_grade_label(spec: &GradingSpec) -> String {
    match spec.family {
        GradingFamily::Uniform => format!("UNI{}", spec.lmax_mm),
        _ => format!("{}_{}_{}", spec.name(), spec.lmin_mm, spec.lmax_mm),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
schema_version = 1
output_dir = "out"

[mesh]
sphere_radius_m = 0.1
sphere_edge_mm = 20.0
patch_point_m = [0.0, 0.1, 0.0]

[[grade]]
family = "cos"
alpha = 2.0
lmin_mm = 10.0
lmax_mm = 30.0

[calc]
frequencies_hz = [200.0, 400.0]
excitation = "point"
source_m = [0.0, 0.3, 0.0]

[compare]
reference = "analytic"
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = RunConfig::from_toml(BASE).unwrap();
        assert_eq!(c.grading_specs().unwrap()[0].0, "COS2_10_30");
        assert_eq!(c.calc.as_ref().unwrap().solver.method, "gmres");
        let again = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again, c);
        assert_eq!(
            c.stage_plan().unwrap(),
            vec![StageName::Mesh, StageName::Grade, StageName::Calc, StageName::Compare]
        );
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = BASE.replace("[calc]", "[calc]\nfrequency_step = 3");
        let err = RunConfig::from_toml(&text).unwrap_err();
        assert!(matches!(err, CliError::ConfigSyntax(ref m) if m.contains("frequency_step")), "{err}");
    }

    #[test]
    fn negative_frequency_names_the_field() {
        let text = BASE.replace("[200.0, 400.0]", "[200.0, -400.0]");
        match RunConfig::from_toml(&text).unwrap_err() {
            CliError::Config { field, .. } => assert_eq!(field, "calc.frequencies_hz[1]"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn stage_order_ignores_declaration_order() {
        let text = BASE.replace("output_dir = \"out\"", "output_dir = \"out\"\nstages = [\"compare\", \"grade\"]");
        let c = RunConfig::from_toml(&text).unwrap();
        assert_eq!(
            c.stage_plan().unwrap(),
            vec![StageName::Mesh, StageName::Grade, StageName::Calc, StageName::Compare]
        );
        let only_mesh = BASE.replace("output_dir = \"out\"", "output_dir = \"out\"\nstages = [\"mesh\"]");
        assert_eq!(RunConfig::from_toml(&only_mesh).unwrap().stage_plan().unwrap(), vec![StageName::Mesh]);
    }

    #[test]
    fn semantic_errors() {
        let cases = [
            (BASE.replace("schema_version = 1", "schema_version = 2"), "schema_version"),
            (BASE.replace("sphere_edge_mm = 20.0", ""), "mesh.sphere_edge_mm"),
            (BASE.replace("lmin_mm = 10.0", ""), "grade[0].lmin_mm"),
            (BASE.replace("family = \"cos\"", "family = \"tri\""), "grade[0].family"),
            (BASE.replace("source_m = [0.0, 0.3, 0.0]", ""), "calc.source_m"),
            (BASE.replace("reference = \"analytic\"", "reference = \"variant\""), "compare.label"),
            (BASE.replace("[calc]", "[calc.solver]\nmethod = \"cg\"\ntolerance = 1e-6\nmax_iterations = 10\nrestart = 5\nquadrature = 7\ndense_cap = 10\n[calc]"), "calc.solver.method"),
        ];
        for (text, field) in cases {
            match RunConfig::from_toml(&text) {
                Err(CliError::Config { field: f, .. }) => assert_eq!(f, field),
                other => panic!("{field}: {other:?}"),
            }
        }
    }
}
