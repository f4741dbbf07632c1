use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gradbem::analytic::{reference_field, SphereScene};
use gradbem::bem::{
    calc_field, dense_matrix_bytes, AssemblySettings, BemSettings, Excitation, QuadratureOrder, SolverMethod,
    SolverSettings, DEFAULT_DENSE_CAP,
};
use gradbem::field::PressureField;
use gradbem::grading::{remesh, GradingFamily, GradingSpec, DEFAULT_ITERATIONS, DEFAULT_PATCH_LABEL};
use gradbem::grids::{make_ari_grid, make_eqa_grid, EvalGrid};
use gradbem::mesh::{load_mesh, make_sphere, save_mesh, save_tags, SurfaceProjector, TriangleMesh};
use gradbem::metrics::error_report;
use gradbem::physics::Medium;
use gradbem::Vec3;
use gradbem_cli::args::{parse_frequencies, parse_vec3};
use gradbem_cli::manifest::{file_digest, sha256_hex};
use gradbem_cli::report::report;
use gradbem_cli::{run_pipeline, CliError, Result, RunConfig};
use serde::Serialize;

/// Parsed as one argument; a bare `Vec` would make clap collect repeats.
type Frequencies = Vec<f64>;

#[derive(Parser)]
#[command(name = "gradbem", version, about = "Graded remeshing and BEM for exterior acoustic scattering")]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a geodesic sphere mesh with a tagged patch.
    Sphere(SphereArgs),
    /// Remesh towards a graded target edge length.
    Grade(GradeArgs),
    /// Solve the exterior problem and evaluate the pressure on a grid.
    Calc(CalcArgs),
    /// Rigid-sphere reference field for a point source.
    Analytic(AnalyticArgs),
    /// Relative error of a field against a reference field.
    Compare(CompareArgs),
    /// Run a configured study (mesh, grade, calc, compare).
    #[command(visible_alias = "run")]
    Study(StudyArgs),
    /// Merge study tables and compute relative computation times.
    Report(ReportArgs),
}

#[derive(Args)]
struct SphereArgs {
    /// Radius in meters.
    #[arg(long, default_value_t = 0.1)]
    radius: f64,
    /// Target edge length in millimeters.
    #[arg(long)]
    edge: f64,
    #[arg(long, default_value = DEFAULT_PATCH_LABEL)]
    patch: String,
    /// Patch location (m); defaults to the +y pole.
    #[arg(long, value_parser = parse_vec3)]
    patch_point: Option<Vec3>,
    /// Faces with centroids within this distance (m) join the patch.
    #[arg(long, default_value_t = 0.0)]
    patch_radius: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    tags: Option<PathBuf>,
}

#[derive(Args)]
struct GradeArgs {
    #[command(flatten)]
    input: MeshArgs,
    #[arg(long, default_value = DEFAULT_PATCH_LABEL)]
    patch: String,
    /// pow, cos or uni.
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Millimeters; ignored for the uniform family.
    #[arg(long)]
    lmin: Option<f64>,
    /// Millimeters.
    #[arg(long)]
    lmax: f64,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    iterations: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Eqa,
    Ari,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, value_enum, default_value = "eqa")]
    grid: GridArg,
    /// Meters.
    #[arg(long, default_value_t = 1.2)]
    grid_radius: f64,
    /// Degrees (EQA).
    #[arg(long, default_value_t = 10.0)]
    lateral_step: f64,
    /// Degrees (EQA).
    #[arg(long, default_value_t = 10.0)]
    polar_step: f64,
}

impl GridArgs {
    fn build(&self) -> Result<EvalGrid> {
        Ok(match self.grid {
            GridArg::Eqa => make_eqa_grid(self.grid_radius, self.lateral_step, self.polar_step)?,
            GridArg::Ari => make_ari_grid(self.grid_radius)?,
        })
    }
}

#[derive(Args)]
struct CalcArgs {
    #[command(flatten)]
    input: MeshArgs,
    /// Vibrating patch label (reciprocal setup).
    #[arg(long, conflicts_with = "source")]
    patch: Option<String>,
    /// Patch normal velocity in m/s.
    #[arg(long, default_value_t = 1.0)]
    velocity: f64,
    /// Point source position x,y,z in meters (direct setup).
    #[arg(long, value_parser = parse_vec3)]
    source: Option<Vec3>,
    /// Point source strength in Pa·m.
    #[arg(long, default_value_t = 1.0)]
    strength: f64,
    #[command(flatten)]
    grid: GridArgs,
    /// start:step:count or a comma-separated list, in Hz.
    #[arg(long, value_parser = parse_frequencies)]
    freqs: Frequencies,
    #[arg(long, default_value = "gmres")]
    solver: String,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
    /// Regular triangle rule: 7 or 12 points.
    #[arg(long, default_value = "7")]
    quadrature: String,
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
    dense_cap: usize,
    #[arg(long)]
    out: PathBuf,
    /// Run manifest; defaults to `<out>.manifest.toml`.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyticArgs {
    /// Sphere radius in meters.
    #[arg(long, default_value_t = 0.1)]
    sphere_radius: f64,
    #[arg(long, value_parser = parse_vec3)]
    source: Vec3,
    #[arg(long, default_value_t = 1.0)]
    strength: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_parser = parse_frequencies)]
    freqs: Frequencies,
    /// Series truncation order.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Also write the grid coordinates.
    #[arg(long)]
    grid_out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long)]
    reference: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Per-frequency errors as CSV (percent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    overwrite: bool,
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct ReportArgs {
    /// Study CSV files.
    #[arg(required = true)]
    tables: Vec<PathBuf>,
    /// Label of the reference row (default: the row with most faces).
    #[arg(long)]
    reference: Option<String>,
    /// Output directory for report.csv and cost.csv.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let result = match cli.command {
        Command::Sphere(a) => cmd_sphere(a),
        Command::Grade(a) => cmd_grade(a),
        Command::Calc(a) => cmd_calc(a),
        Command::Analytic(a) => cmd_analytic(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Study(a) => cmd_study(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("category: {}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn with_extension(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

fn save_mesh_and_tags(mesh: &TriangleMesh, out: &Path) -> Result<()> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    save_mesh(mesh, out)?;
    if !mesh.labels().is_empty() {
        save_tags(mesh, &with_extension(out, "tags"))?;
    }
    Ok(())
}

fn cmd_sphere(a: SphereArgs) -> Result<()> {
    let mut mesh = make_sphere(a.radius, a.edge)?;
    let point = a.patch_point.unwrap_or(Vec3::new(0.0, a.radius, 0.0));
    let faces = mesh.tag_faces_near(&a.patch, &point, a.patch_radius);
    save_mesh_and_tags(&mesh, &a.out)?;
    println!("faces = {}", mesh.num_faces());
    println!("vertices = {}", mesh.num_vertices());
    println!("patch_faces = {}", faces.len());
    Ok(())
}

fn cmd_grade(a: GradeArgs) -> Result<()> {
    let mesh = load_mesh(&a.input.mesh, a.input.tags.as_deref())?;
    let family: GradingFamily = a.family.parse()?;
    let lmin = match (family, a.lmin) {
        (GradingFamily::Uniform, l) => l.unwrap_or(a.lmax),
        (_, Some(l)) => l,
        (_, None) => return Err(CliError::config("--lmin", "required for graded families")),
    };
    let spec = GradingSpec {
        family,
        alpha: a.alpha,
        lmin_mm: lmin,
        lmax_mm: a.lmax,
        patch_label: a.patch,
        d_max: None,
        iterations: a.iterations,
    };
    spec.validate()?;
    let projector = SurfaceProjector::new(&mesh);
    let (out, rep) = remesh(&mesh, &spec, &projector)?;
    save_mesh_and_tags(&out, &a.out)?;
    let stem = a.out.with_extension("");
    let stem = stem.to_string_lossy();
    write_text(Path::new(&format!("{stem}_stats.txt")), &rep.summary())?;
    write_text(Path::new(&format!("{stem}_trace.csv")), &rep.trace_csv())?;
    print!("{}", rep.summary());
    Ok(())
}

#[derive(Serialize)]
struct CalcManifest {
    tool: String,
    version: String,
    mesh_sha256: String,
    tags_sha256: Option<String>,
    faces: usize,
    excitation: String,
    grid_points: usize,
    solver: String,
    tolerance: f64,
    quadrature: String,
    peak_memory_bytes: u64,
    output: String,
    output_sha256: String,
    frequencies: Vec<CalcFrequency>,
}

#[derive(Serialize)]
struct CalcFrequency {
    frequency_hz: f64,
    assemble_seconds: f64,
    solve_seconds: f64,
    evaluate_seconds: f64,
    iterations: usize,
    relative_residual: f64,
}

fn cmd_calc(a: CalcArgs) -> Result<()> {
    let mesh = Arc::new(load_mesh(&a.input.mesh, a.input.tags.as_deref())?);
    let excitation = match (&a.patch, a.source) {
        (Some(label), None) => Excitation::VibratingPatch { label: label.clone(), velocity: a.velocity },
        (None, Some(position)) => Excitation::PointSource { position, strength: a.strength },
        _ => return Err(CliError::config("--patch/--source", "give exactly one excitation")),
    };
    let method: SolverMethod = a.solver.parse()?;
    let quadrature: QuadratureOrder = a.quadrature.parse()?;
    let settings = BemSettings {
        assembly: AssemblySettings { quadrature, dense_cap: a.dense_cap },
        solver: SolverSettings { method, tolerance: a.tol, max_iterations: a.max_iterations, ..Default::default() },
    };
    let grid = a.grid.build()?;
    let t = Instant::now();
    let (field, runs) = calc_field(mesh.clone(), &excitation, &grid, &a.freqs, Medium::default(), &settings)?;
    let csv = field.to_csv();
    write_text(&a.out, &csv)?;
    let factor = if method == SolverMethod::Direct { 2 } else { 1 };
    let manifest = CalcManifest {
        tool: "gradbem".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        mesh_sha256: file_digest(&a.input.mesh)?.sha256,
        tags_sha256: a.input.tags.as_deref().map(file_digest).transpose()?.map(|d| d.sha256),
        faces: mesh.num_faces(),
        excitation: format!("{excitation:?}"),
        grid_points: grid.len(),
        solver: method.to_string(),
        tolerance: a.tol,
        quadrature: quadrature.to_string(),
        peak_memory_bytes: factor * dense_matrix_bytes(mesh.num_faces()) + (field.values.len() * 16) as u64,
        output: a.out.display().to_string(),
        output_sha256: sha256_hex(csv.as_bytes()),
        frequencies: runs
            .iter()
            .map(|r| CalcFrequency {
                frequency_hz: r.frequency,
                assemble_seconds: r.assemble_seconds,
                solve_seconds: r.solve_seconds,
                evaluate_seconds: r.evaluate_seconds,
                iterations: r.iterations,
                relative_residual: r.relative_residual,
            })
            .collect(),
    };
    let mpath = a.manifest.unwrap_or_else(|| PathBuf::from(format!("{}.manifest.toml", a.out.display())));
    write_text(&mpath, &toml::to_string(&manifest).expect("manifest serializes"))?;
    println!("faces = {}", mesh.num_faces());
    println!("seconds = {:.3}", t.elapsed().as_secs_f64());
    Ok(())
}

fn cmd_analytic(a: AnalyticArgs) -> Result<()> {
    let grid = a.grid.build()?;
    let medium = Medium::default();
    let k0 = medium.wavenumber(a.freqs[0]);
    let mut scene = SphereScene::new(a.sphere_radius, a.source, k0)?.with_p0(a.strength);
    if let Some(n) = a.order {
        scene = scene.with_order(n)?;
    }
    let field = reference_field(&scene, &grid, &a.freqs, &medium)?;
    write_text(&a.out, &field.to_csv())?;
    if let Some(g) = a.grid_out {
        write_text(&g, &grid.to_csv())?;
    }
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<()> {
    let field = PressureField::load(&a.field)?;
    let reference = PressureField::load(&a.reference)?;
    let grid = a.grid.build()?;
    let r = error_report(&field, &reference, &grid)?;
    println!("eL2_all = {:.6}", 100.0 * r.all.l2);
    println!("eL2_ipsi = {:.6}", 100.0 * r.ipsi.l2);
    println!("eL2_contra = {:.6}", 100.0 * r.contra.l2);
    println!("eLinf_all = {:.6}", 100.0 * r.all.linf);
    println!("ratio = {:.6}", r.ratio());
    if let Some(out) = a.out {
        let mut s = String::from("freqHz,eL2_all,eL2_ipsi,eL2_contra,eLinf_all\n");
        for f in &r.per_frequency {
            s += &format!(
                "{},{},{},{},{}\n",
                f.frequency,
                100.0 * f.all.l2,
                100.0 * f.ipsi.l2,
                100.0 * f.contra.l2,
                100.0 * f.all.linf
            );
        }
        write_text(&out, &s)?;
    }
    Ok(())
}

fn cmd_study(a: StudyArgs) -> Result<()> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(d) = a.output_dir {
        cfg.output_dir = d;
    }
    if a.overwrite {
        cfg.overwrite = true;
    }
    if let Some(calc) = cfg.calc.as_mut() {
        if let Some(s) = a.solver {
            calc.solver.method = s;
        }
        if let Some(t) = a.tol {
            calc.solver.tolerance = t;
        }
    }
    let manifest = run_pipeline(&cfg)?;
    for s in &manifest.stages {
        println!("{:<8} {:>10.3} s  {} outputs", s.name, s.seconds, s.outputs.len());
    }
    println!("output_dir = {}", cfg.output_dir.display());
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let tables = a
        .tables
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Ok((p.display().to_string(), text))
        })
        .collect::<Result<Vec<_>>>()?;
    let r = report(&tables, a.reference.as_deref())?;
    write_text(&a.out.join("report.csv"), &r.to_csv())?;
    write_text(&a.out.join("cost.csv"), &r.cost_csv())?;
    println!("reference = {}", r.reference);
    for row in &r.rows {
        println!("{:<16} {:>7} faces {:>9.2} %", row.record.label, row.record.faces, row.relative_time);
    }
    Ok(())
}
