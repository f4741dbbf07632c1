//! Independent checks of the rigid-sphere series.

use std::f64::consts::PI;

use gradbem::analytic::{incident_pressure, reference_field, scattered_pressure, total_pressure, SphereScene};
use gradbem::grids::make_eqa_grid;
use gradbem::physics::Medium;
use gradbem::Vec3;

/// Deterministic, roughly uniform directions (Fibonacci sphere).
fn directions(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            Vec3::new(r * t.cos(), z, r * t.sin())
        })
        .collect()
}

#[test]
fn rigid_boundary_condition() {
    // kR = 2; the source sits well off the surface so the series converges
    // on r = R within the default order.
    let big_r = 0.1;
    let s = SphereScene::new(big_r, Vec3::new(0.0, 0.25, 0.0), 20.0).unwrap();
    let h = 1e-6;
    let mut worst_total = 0.0f64;
    let mut worst_inc = 0.0f64;
    for d in directions(100) {
        let f = |r: f64| total_pressure(&s, &(d * r)).unwrap();
        let g = |r: f64| incident_pressure(&s, &(d * r)).unwrap();
        // one-sided second-order difference (the series is defined for r >= R)
        let dp = (f(big_r) * -3.0 + f(big_r + h) * 4.0 - f(big_r + 2.0 * h)) / (2.0 * h);
        let di = (g(big_r) * -3.0 + g(big_r + h) * 4.0 - g(big_r + 2.0 * h)) / (2.0 * h);
        worst_total = worst_total.max(dp.norm());
        worst_inc = worst_inc.max(di.norm());
    }
    assert!(worst_total < 1e-6 * worst_inc, "{worst_total} vs {worst_inc}");
}

#[test]
fn truncation_60_vs_125() {
    for kr in [0.5, 2.0, 5.0, 10.0] {
        let k = kr / 0.1;
        let a = SphereScene::new(0.1, Vec3::new(0.0, 0.101, 0.0), k).unwrap();
        let b = a.clone().with_order(60).unwrap();
        for d in directions(40) {
            let x = d * 1.2;
            let pa = scattered_pressure(&a, &x).unwrap();
            let pb = scattered_pressure(&b, &x).unwrap();
            let tot = total_pressure(&a, &x).unwrap();
            assert!((pa - pb).norm() < 1e-8 * tot.norm(), "kR={kr}");
        }
    }
}

#[test]
fn small_k_approaches_static_limit() {
    // static (k = 0) series: (p0/4π) Σ n/(n+1) R^{2n+1}/(r r*)^{n+1} P_n(cos β),
    // evaluated here independently with an explicit Legendre recurrence
    let (big_r, rs, r): (f64, f64, f64) = (0.1, 0.101, 1.2);
    let static_scat = |cos_b: f64| {
        let (mut p0, mut p1) = (1.0, cos_b);
        let mut sum = 0.5 * big_r.powi(3) / (r * rs).powi(2) * p1;
        for n in 1..200 {
            let p2 = ((2 * n + 1) as f64 * cos_b * p1 - n as f64 * p0) / (n + 1) as f64;
            p0 = p1;
            p1 = p2;
            let m = (n + 1) as f64;
            sum += m / (m + 1.0) * big_r.powi(2 * n + 3) / (r * rs).powi(n + 2) * p1;
        }
        sum / (4.0 * PI)
    };
    let s0 = SphereScene::new(big_r, Vec3::new(0.0, rs, 0.0), 0.0).unwrap();
    let s_small = s0.clone().with_wavenumber(1e-5 / big_r).unwrap();
    for d in directions(30) {
        let x = d * r;
        let cos_b = d.y;
        let expect = static_scat(cos_b);
        let exact_static = scattered_pressure(&s0, &x).unwrap();
        assert!((exact_static.re - expect).abs() < 1e-12 * expect.abs().max(1e-6), "{exact_static} vs {expect}");
        let tiny = scattered_pressure(&s_small, &x).unwrap();
        assert!((tiny - exact_static).norm() < 1e-3 * exact_static.norm(), "{tiny} vs {exact_static}");
    }
}

#[test]
fn rayleigh_limit_for_a_distant_source() {
    // a source close to the sphere scatters about 4 % of the incident field
    // even as k -> 0; a distant one scatters a negligible fraction
    let medium = Medium::default();
    let grid = make_eqa_grid(1.2, 15.0, 30.0).unwrap();
    let s = SphereScene::new(0.1, Vec3::new(0.0, 2.0, 0.0), 1e-2 / 0.1).unwrap();
    for p in &grid.points {
        let ratio = scattered_pressure(&s, p).unwrap().norm() / incident_pressure(&s, p).unwrap().norm();
        assert!(ratio < 1e-3, "{ratio}");
    }
    let s0 = s.clone().with_wavenumber(0.0).unwrap();
    let f = reference_field(&s0, &grid, &[0.0], &medium).unwrap();
    for (i, p) in grid.points.iter().enumerate() {
        let inc = incident_pressure(&s0, p).unwrap();
        assert!((f.get(0, i) - inc).norm() < 1e-3 * inc.norm());
    }

    let near = SphereScene::new(0.1, Vec3::new(0.0, 0.101, 0.0), 0.0).unwrap();
    let x = Vec3::new(0.0, 1.2, 0.0);
    let r = scattered_pressure(&near, &x).unwrap().norm() / incident_pressure(&near, &x).unwrap().norm();
    assert!(r > 1e-2);
}

#[test]
fn sound_hard_sphere_doubles_pressure_at_low_frequency_on_the_near_side() {
    // source far away: near side sees roughly incident + reflection (> incident)
    let s = SphereScene::new(0.1, Vec3::new(0.0, 3.0, 0.0), 30.0).unwrap();
    let front = total_pressure(&s, &Vec3::new(0.0, 0.1, 0.0)).unwrap();
    let inc = incident_pressure(&s, &Vec3::new(0.0, 0.1, 0.0)).unwrap();
    assert!(front.norm() > inc.norm());
}
