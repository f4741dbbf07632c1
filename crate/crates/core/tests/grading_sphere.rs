//! Remesher behaviour on the high-resolution sphere.

use std::sync::OnceLock;

use gradbem::grading::{edge_band_fraction, remesh, GradingSpec, TargetField};
use gradbem::mesh::{make_sphere, SurfaceProjector, TriangleMesh};
use gradbem::Vec3;
use proptest::prelude::*;

fn reference() -> &'static (TriangleMesh, SurfaceProjector) {
    static CELL: OnceLock<(TriangleMesh, SurfaceProjector)> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut m = make_sphere(0.1, 1.4).unwrap();
        m.tag_faces_near("mic", &Vec3::new(0.0, 0.1, 0.0), 0.0);
        let p = SurfaceProjector::new(&m);
        (m, p)
    })
}

fn edge_lengths(m: &TriangleMesh) -> Vec<(Vec3, f64)> {
    let v = m.vertices();
    m.edges()
        .map(|(_, a, b)| {
            let (pa, pb) = (v[a as usize], v[b as usize]);
            ((pa + pb) * 0.5, (pa - pb).norm())
        })
        .collect()
}

#[test]
fn uniform_two_millimeter() {
    let (m, proj) = reference();
    let (out, rep) = remesh(m, &GradingSpec::uniform(2.0), proj).unwrap();
    let f = out.num_faces() as f64;
    assert!((f / 81920.0 - 1.0).abs() <= 0.15, "faces {f}");
    assert!((rep.stats.l_avg / 1.9 - 1.0).abs() <= 0.15, "l_avg {}", rep.stats.l_avg);
    assert!(rep.within_band >= 0.9);
    assert!(out.validate().is_valid());

    let l: Vec<f64> = edge_lengths(&out).into_iter().map(|x| x.1).collect();
    let mean = l.iter().sum::<f64>() / l.len() as f64;
    let var = l.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / l.len() as f64;
    assert!(var.sqrt() / mean <= 0.15, "cv {}", var.sqrt() / mean);
}

#[test]
fn cos2_two_to_twenty() {
    let (m, proj) = reference();
    let (out, rep) = remesh(m, &GradingSpec::raised_cosine(2.0, 2.0, 20.0), proj).unwrap();
    let f = out.num_faces() as f64;
    assert!((f / 4088.0 - 1.0).abs() <= 0.25, "faces {f}");
    assert!(rep.within_band >= 0.9, "{}", rep.within_band);
    assert_eq!(rep.trace.len(), 10);
    assert!(!out.faces_with_label("mic").is_empty());
}

#[test]
fn graded_families_are_monotone_and_stay_on_surface() {
    let (m, proj) = reference();
    for spec in [
        GradingSpec::power(1.0, 2.0, 16.0),
        GradingSpec::power(2.0, 2.0, 20.0),
        GradingSpec::power(4.0, 2.0, 20.0),
        GradingSpec::raised_cosine(2.0, 2.0, 20.0),
        GradingSpec::raised_cosine(4.0, 2.0, 20.0),
    ] {
        let (out, rep) = remesh(m, &spec, proj).unwrap();
        let name = spec.name();
        assert!(out.validate().is_valid(), "{name}");
        assert!(rep.within_band >= 0.9, "{name}: {}", rep.within_band);
        assert!(!out.faces_with_label("mic").is_empty(), "{name}");

        let field = TargetField::new(m, &spec).unwrap();
        // deciles of the d̄ distribution: ten buckets of equal edge count
        let mut by_distance: Vec<(f64, f64)> = edge_lengths(&out)
            .into_iter()
            .map(|(mid, l)| (field.relative_distance(&mid), l))
            .collect();
        by_distance.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = by_distance.len();
        let means: Vec<f64> = (0..10)
            .map(|k| {
                let bucket = &by_distance[k * n / 10..(k + 1) * n / 10];
                bucket.iter().map(|x| x.1).sum::<f64>() / bucket.len() as f64
            })
            .collect();
        for w in means.windows(2) {
            assert!(w[0] <= w[1], "{name}: decile means {means:?}");
        }

        // vertices lie on the reference surface
        let mut rel = 0.0;
        for p in out.vertices() {
            let d = proj.project(p).distance;
            rel += d / field.at(p);
        }
        assert!(rel / out.num_vertices() as f64 <= 0.2, "{name}");
        assert!(edge_band_fraction(&out, &field) >= 0.9);
    }
}

#[test]
fn uniform_mesh_is_a_fixed_point() {
    let mut m = make_sphere(0.1, 5.0).unwrap();
    m.tag_faces_near("mic", &Vec3::new(0.0, 0.1, 0.0), 0.0);
    let proj = SurfaceProjector::new(&m);
    let l_avg = gradbem::mesh::mesh_stats(&m).l_avg;
    let (_, rep) = remesh(&m, &GradingSpec::uniform(l_avg), &proj).unwrap();
    let last = rep.trace.last().unwrap();
    let edges = rep.stats.num_edges as f64;
    assert!((last.splits + last.collapses) as f64 <= 0.01 * edges, "{last:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn output_is_always_valid(
        sx in 0.6f64..1.4, sz in 0.6f64..1.4,
        theta in 0.0f64..std::f64::consts::TAU,
        family in 0usize..3, alpha in 0.5f64..4.0,
        lmin in 3.0f64..8.0, ratio in 1.0f64..5.0,
    ) {
        let base = make_sphere(0.1, 6.0).unwrap();
        let verts: Vec<Vec3> = base.vertices().iter().map(|p| Vec3::new(p.x * sx, p.y, p.z * sz)).collect();
        let mut m = TriangleMesh::new(verts, base.faces().to_vec()).unwrap();
        let dir = Vec3::new(theta.cos(), 0.3, theta.sin()).normalize() * 0.2;
        m.tag_faces_near("mic", &dir, 0.0);
        let spec = match family {
            0 => GradingSpec::power(alpha, lmin, lmin * ratio),
            1 => GradingSpec::raised_cosine(alpha, lmin, lmin * ratio),
            _ => GradingSpec::uniform(lmin * ratio),
        };
        let proj = SurfaceProjector::new(&m);
        let (out, rep) = remesh(&m, &spec, &proj).unwrap();
        prop_assert!(out.validate().is_valid());
        prop_assert_eq!(out.euler_characteristic(), 2);
        prop_assert!(!out.faces_with_label("mic").is_empty());
        prop_assert_eq!(rep.trace.len(), 10);
    }
}
