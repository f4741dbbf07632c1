//! Stage execution with atomic output: everything is written to a sibling
//! temporary directory which is renamed to `output_dir` at the end, also
//! when a stage fails (the manifest then says so).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use gradbem::analytic::{reference_field, SphereScene};
use gradbem::bem::{calc_field, dense_matrix_bytes, Excitation, FrequencyRun, SolverMethod};
use gradbem::field::PressureField;
use gradbem::grading::remesh;
use gradbem::grids::EvalGrid;
use gradbem::mesh::{make_sphere, mesh_stats, write_mesh, write_tags, SurfaceProjector, TriangleMesh};
use gradbem::metrics::{study_csv, StudyRow, StudyVariant};

use crate::config::{vec3, ExcitationKind, ReferenceKind, RunConfig, StageName, INPUT_LABEL};
use crate::error::{CliError, Result};
use crate::manifest::{file_digest, FailureRecord, OutputWriter, RunManifest, RunStatus, StageRecord, MANIFEST_FILE};

#[derive(Default)]
struct State {
    input: Option<Arc<TriangleMesh>>,
    graded: Vec<StudyVariant>,
    grid: Option<EvalGrid>,
    fields: Vec<(StudyVariant, PressureField, f64)>,
}

/// Runs the configured stages. Relative paths in `config` are taken as
/// they are (see [`RunConfig::load`]).
pub fn run_pipeline(config: &RunConfig) -> Result<RunManifest> {
    config.validate()?;
    let plan = config.stage_plan()?;
    let out_dir = config.output_dir.clone();
    if out_dir.exists() && !config.overwrite {
        return Err(CliError::config("output_dir", format!("{} exists (set overwrite = true)", out_dir.display())));
    }
    let tmp = temp_sibling(&out_dir);
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    }
    fs::create_dir_all(&tmp).map_err(|e| CliError::io(&tmp, e))?;

    let mut manifest = RunManifest::new(config);
    let mut writer = OutputWriter::new(tmp.clone());
    let mut state = State::default();
    let mut failure = None;

    for stage in plan {
        let before = writer.records.len();
        let t = Instant::now();
        let result = match stage {
            StageName::Mesh => stage_mesh(config, &mut state, &mut writer, &mut manifest),
            StageName::Grade => stage_grade(config, &mut state, &mut writer),
            StageName::Calc => stage_calc(config, &mut state, &mut writer),
            StageName::Compare => stage_compare(config, &mut state, &mut writer, &mut manifest),
        };
        let seconds = t.elapsed().as_secs_f64();
        let outputs = writer.records[before..].iter().map(|r| r.path.clone()).collect();
        let peak = match &result {
            Ok(bytes) => *bytes,
            Err(_) => 0,
        };
        manifest.stages.push(StageRecord { name: stage.as_str().to_string(), seconds, peak_memory_bytes: peak, outputs });
        if let Err(e) = result {
            manifest.status = RunStatus::Failed;
            manifest.failure = Some(FailureRecord {
                stage: stage.as_str().to_string(),
                category: e.category().to_string(),
                message: e.to_string(),
            });
            failure = Some((stage, e));
            break;
        }
    }

    manifest.outputs = writer.records.clone();
    manifest.outputs.sort_by(|a, b| a.path.cmp(&b.path));
    let mpath = tmp.join(MANIFEST_FILE);
    fs::write(&mpath, manifest.to_toml()).map_err(|e| CliError::io(&mpath, e))?;
    if out_dir.exists() {
        fs::remove_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    }
    fs::rename(&tmp, &out_dir).map_err(|e| CliError::io(&out_dir, e))?;

    match failure {
        None => Ok(manifest),
        Some((stage, e)) => Err(CliError::StageFailed {
            stage: stage.as_str().to_string(),
            manifest: out_dir.join(MANIFEST_FILE),
            source: Box::new(e),
        }),
    }
}

fn temp_sibling(dir: &Path) -> PathBuf {
    let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    dir.with_file_name(format!(".{name}.tmp-{}", std::process::id()))
}

/// Bytes per face held by mesh-side structures (half-edges, BVH, tags).
const MESH_BYTES_PER_FACE: u64 = 400;

fn stage_mesh(
    config: &RunConfig,
    state: &mut State,
    out: &mut OutputWriter,
    manifest: &mut RunManifest,
) -> Result<u64> {
    let mc = &config.mesh;
    let mut mesh = match (&mc.path, mc.sphere_radius_m, mc.sphere_edge_mm) {
        (Some(path), _, _) => {
            manifest.inputs.push(file_digest(path)?);
            if let Some(t) = &mc.tags {
                manifest.inputs.push(file_digest(t)?);
            }
            gradbem::mesh::load_mesh(path, mc.tags.as_deref())?
        }
        (None, Some(r), Some(e)) => make_sphere(r, e)?,
        _ => unreachable!("validated"),
    };
    if let Some(p) = mc.patch_point_m {
        if mesh.label_id(&mc.patch).is_none() {
            mesh.tag_faces_near(&mc.patch, &vec3(p), mc.patch_radius_m);
        }
    }
    let report = mesh.validate();
    if !report.is_valid() {
        return Err(CliError::Core(gradbem::Error::InvalidMesh(format!("{report:?}"))));
    }
    write_mesh_files(out, INPUT_LABEL, &mesh)?;
    let stats = mesh_stats(&mesh);
    out.write(&format!("mesh/{INPUT_LABEL}_stats.txt"), stats.to_key_value().as_bytes(), false)?;
    let bytes = mesh.num_faces() as u64 * MESH_BYTES_PER_FACE;
    state.input = Some(Arc::new(mesh));
    Ok(bytes)
}

fn write_mesh_files(out: &mut OutputWriter, label: &str, mesh: &TriangleMesh) -> Result<()> {
    out.write(&format!("mesh/{label}.obj"), write_mesh(mesh).as_bytes(), false)?;
    if !mesh.labels().is_empty() {
        out.write(&format!("mesh/{label}.tags"), write_tags(mesh).as_bytes(), false)?;
    }
    Ok(())
}

fn stage_grade(config: &RunConfig, state: &mut State, out: &mut OutputWriter) -> Result<u64> {
    let input = state.input.clone().expect("mesh stage ran");
    let projector = SurfaceProjector::new(&input);
    let mut peak = input.num_faces() as u64 * MESH_BYTES_PER_FACE;
    for (label, spec) in config.grading_specs()? {
        let (mesh, report) = remesh(&input, &spec, &projector)?;
        write_mesh_files(out, &label, &mesh)?;
        out.write(&format!("mesh/{label}_stats.txt"), report.summary().as_bytes(), false)?;
        out.write(&format!("mesh/{label}_trace.csv"), report.trace_csv().as_bytes(), false)?;
        peak = peak.max((input.num_faces() + 2 * mesh.num_faces()) as u64 * MESH_BYTES_PER_FACE);
        state.graded.push(StudyVariant {
            label,
            family: spec.family.short_name().to_string(),
            lmin_mm: spec.lmin_mm,
            lmax_mm: spec.lmax_mm,
            mesh: Arc::new(mesh),
        });
    }
    Ok(peak)
}

fn input_variant(config: &RunConfig, mesh: Arc<TriangleMesh>) -> StudyVariant {
    let (family, lmin, lmax) = match config.mesh.sphere_edge_mm {
        Some(e) => ("UNI", e, e),
        None => {
            let s = mesh_stats(&mesh);
            ("INPUT", s.l_min, s.l_max)
        }
    };
    StudyVariant { label: INPUT_LABEL.to_string(), family: family.to_string(), lmin_mm: lmin, lmax_mm: lmax, mesh }
}

const RUNS_CSV_HEADER: &str =
    "label,freqHz,nFaces,assembleSeconds,solveSeconds,evaluateSeconds,iterations,relativeResidual";

fn stage_calc(config: &RunConfig, state: &mut State, out: &mut OutputWriter) -> Result<u64> {
    let calc = config.calc.as_ref().expect("validated");
    let settings = calc.solver.settings()?;
    let medium = config.medium.medium();
    let grid = calc.grid.build()?;
    out.write("grid.csv", grid.to_csv().as_bytes(), false)?;

    let mut variants = state.graded.clone();
    if variants.is_empty() || calc.include_input {
        variants.insert(0, input_variant(config, state.input.clone().expect("mesh stage ran")));
    }
    let excitation = match calc.excitation {
        ExcitationKind::Point => Excitation::PointSource {
            position: vec3(calc.source_m.expect("validated")),
            strength: calc.strength_pa_m,
        },
        ExcitationKind::Patch => {
            Excitation::VibratingPatch { label: config.mesh.patch.clone(), velocity: calc.patch_velocity_m_s }
        }
    };

    let mut runs_csv = String::from(RUNS_CSV_HEADER);
    runs_csv.push('\n');
    let mut peak = 0u64;
    for v in variants {
        let t = Instant::now();
        let (field, runs) =
            calc_field(v.mesh.clone(), &excitation, &grid, &calc.frequencies_hz, medium, &settings)?;
        let seconds = t.elapsed().as_secs_f64();
        out.write(&format!("fields/{}.csv", v.label), field.to_csv().as_bytes(), false)?;
        append_runs(&mut runs_csv, &v.label, &runs);
        let factor = if settings.solver.method == SolverMethod::Direct { 2 } else { 1 };
        let field_bytes = (field.values.len() * 16) as u64;
        peak = peak.max(factor * dense_matrix_bytes(v.mesh.num_faces()) + field_bytes);
        state.fields.push((v, field, seconds));
    }
    out.write("runs.csv", runs_csv.as_bytes(), true)?;
    state.grid = Some(grid);
    Ok(peak)
}

fn append_runs(csv: &mut String, label: &str, runs: &[FrequencyRun]) {
    for r in runs {
        let _ = writeln!(
            csv,
            "{label},{},{},{},{},{},{},{}",
            r.frequency, r.faces, r.assemble_seconds, r.solve_seconds, r.evaluate_seconds, r.iterations,
            r.relative_residual
        );
    }
}

const FREQUENCY_CSV_HEADER: &str = "label,freqHz,eL2_all,eL2_ipsi,eL2_contra,eLinf_all";

fn stage_compare(
    config: &RunConfig,
    state: &mut State,
    out: &mut OutputWriter,
    manifest: &mut RunManifest,
) -> Result<u64> {
    let cmp = config.compare.as_ref().expect("validated");
    let calc = config.calc.as_ref().expect("validated");
    let grid = state.grid.as_ref().expect("calc stage ran");
    let medium = config.medium.medium();
    let reference = match cmp.reference {
        ReferenceKind::Analytic => {
            let radius = config.mesh.sphere_radius_m.expect("validated");
            let source = vec3(calc.source_m.expect("validated"));
            let k0 = medium.wavenumber(calc.frequencies_hz[0]);
            let mut scene = SphereScene::new(radius, source, k0)?.with_p0(calc.strength_pa_m);
            if let Some(n) = cmp.series_order {
                scene = scene.with_order(n)?;
            }
            let field = reference_field(&scene, grid, &calc.frequencies_hz, &medium)?;
            out.write("fields/reference.csv", field.to_csv().as_bytes(), false)?;
            field
        }
        ReferenceKind::Variant => {
            let label = cmp.label.as_deref().expect("validated");
            state
                .fields
                .iter()
                .find(|(v, _, _)| v.label == label)
                .map(|(_, f, _)| f.clone())
                .ok_or_else(|| CliError::config("compare.label", format!("variant '{label}' was not computed")))?
        }
        ReferenceKind::File => {
            let path = cmp.path.as_ref().expect("validated");
            manifest.inputs.push(file_digest(path)?);
            PressureField::load(path)?
        }
    };

    let mut rows = Vec::with_capacity(state.fields.len());
    let mut per_freq = String::from(FREQUENCY_CSV_HEADER);
    per_freq.push('\n');
    for (v, field, seconds) in &state.fields {
        let row = StudyRow::from_field(v, field, &reference, grid, *seconds)?;
        for f in &row.errors.per_frequency {
            let _ = writeln!(
                per_freq,
                "{},{},{},{},{},{}",
                v.label,
                f.frequency,
                100.0 * f.all.l2,
                100.0 * f.ipsi.l2,
                100.0 * f.contra.l2,
                100.0 * f.all.linf
            );
        }
        rows.push(row);
    }
    out.write("study.csv", study_csv(&rows).as_bytes(), true)?;
    out.write("study_frequency.csv", per_freq.as_bytes(), false)?;
    Ok((reference.values.len() * 16 * (state.fields.len() + 1)) as u64)
}
