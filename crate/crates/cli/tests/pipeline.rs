//! End-to-end runs of the staged pipeline on small spheres.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use gradbem_cli::manifest::{RunStatus, MANIFEST_FILE};
use gradbem_cli::{run_pipeline, CliError, RunConfig, RunManifest};

fn config(out: &Path) -> RunConfig {
    let text = format!(
        r#"
schema_version = 1
output_dir = "{}"

[mesh]
sphere_radius_m = 0.1
sphere_edge_mm = 20.0
patch_point_m = [0.0, 0.1, 0.0]

[[grade]]
label = "COS2"
family = "cos"
alpha = 2.0
lmin_mm = 10.0
lmax_mm = 40.0

[calc]
frequencies_hz = [200.0, 400.0, 600.0]
excitation = "point"
source_m = [0.0, 0.3, 0.0]
include_input = true

[calc.grid]
lateral_step_deg = 30.0
polar_step_deg = 30.0

[compare]
reference = "analytic"
"#,
        out.display()
    );
    RunConfig::from_toml(&text).unwrap()
}

fn files_below(root: &Path) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/"));
            }
        }
    }
    out
}

fn without_seconds(study: &str) -> String {
    study.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string() + "\n").collect()
}

#[test]
fn sphere_study_end_to_end_and_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let ma = run_pipeline(&config(&a)).unwrap();
    let names: Vec<&str> = ma.stages.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names, ["mesh", "grade", "calc", "compare"]);
    assert_eq!(ma.status, RunStatus::Completed);
    assert!(a.join("study.csv").is_file());
    let study = fs::read_to_string(a.join("study.csv")).unwrap();
    assert_eq!(study.lines().count(), 3, "{study}");

    // every file except the manifest is listed, and nothing else
    let mut listed: BTreeSet<String> = ma.outputs.iter().map(|o| o.path.clone()).collect();
    listed.insert(MANIFEST_FILE.to_string());
    assert_eq!(files_below(&a), listed);
    assert_eq!(RunManifest::load(&a.join(MANIFEST_FILE)).unwrap(), ma);
    assert!(ma.stage("calc").unwrap().peak_memory_bytes > 0);

    let mb = run_pipeline(&config(&b)).unwrap();
    assert_eq!(ma.stable_digests(), mb.stable_digests());
    assert_eq!(
        without_seconds(&study),
        without_seconds(&fs::read_to_string(b.join("study.csv")).unwrap())
    );
    // no stray temporary directories
    let entries: Vec<_> = fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(entries.len(), 2);
}

#[test]
fn existing_output_is_not_replaced_without_overwrite() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("keep.txt"), "x").unwrap();
    let mut cfg = config(&out);
    cfg.stages = Some(vec![gradbem_cli::config::StageName::Mesh]);
    assert!(matches!(run_pipeline(&cfg), Err(CliError::Config { ref field, .. }) if field == "output_dir"));
    assert!(out.join("keep.txt").exists());
    cfg.overwrite = true;
    let m = run_pipeline(&cfg).unwrap();
    assert_eq!(m.stages.len(), 1);
    assert!(!out.join("keep.txt").exists());
}

#[test]
fn failing_stage_leaves_a_partial_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let mut cfg = config(&out);
    cfg.grade.clear();
    let cmp = cfg.compare.as_mut().unwrap();
    cmp.reference = gradbem_cli::config::ReferenceKind::File;
    cmp.path = Some(tmp.path().join("missing.csv"));
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(matches!(err, CliError::StageFailed { ref stage, .. } if stage == "compare"), "{err}");
    assert_eq!(err.category(), "io");
    let m = RunManifest::load(&out.join(MANIFEST_FILE)).unwrap();
    assert_eq!(m.status, RunStatus::Failed);
    assert_eq!(m.failure.as_ref().unwrap().stage, "compare");
    assert_eq!(m.stages.len(), 3);
    assert!(out.join("fields/input.csv").is_file());
}

#[test]
fn variant_reference_gives_a_zero_row() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let mut cfg = config(&out);
    let cmp = cfg.compare.as_mut().unwrap();
    cmp.reference = gradbem_cli::config::ReferenceKind::Variant;
    cmp.label = Some("input".into());
    run_pipeline(&cfg).unwrap();
    let study = fs::read_to_string(out.join("study.csv")).unwrap();
    let row = study.lines().find(|l| l.starts_with("input,")).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[5..9], ["0", "0", "0", "0"]);
}
