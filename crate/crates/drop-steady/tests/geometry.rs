//! Coordinate map, transformed stress and curvature of the perturbed sphere.

use std::f64::consts::PI;

use drop_steady::field::{divergence_tensor, Discretization, ScalarField, VectorField};
use drop_steady::geometry::{
    build_map, curvature_linear, curvature_nonlinear_gh, drop_volume, interior_volume, mean_curvature_grid,
    transformed_stress, HeightFunction,
};
use drop_steady::radial::Phase;
use drop_steady::sphere::{idx, ncoef, Sphere, SphereField};

const MU: f64 = 1.3;

/// Polynomial test flow `v = (y₂², y₁y₃, y₃²)`, `p = y₁y₂`.
fn velocity(y: [f64; 3]) -> [f64; 3] {
    [y[1] * y[1], y[0] * y[2], y[2] * y[2]]
}

fn pressure(y: [f64; 3]) -> f64 {
    y[0] * y[1]
}

/// `Div T(v, p) = μΔv + μ∇(∇·v) − ∇p`, worked out by hand.
fn div_stress(y: [f64; 3]) -> [f64; 3] {
    [2.0 * MU - y[1], -y[0], 4.0 * MU]
}

fn height(band: usize, entries: &[(usize, i64, f64)]) -> SphereField {
    let mut c = vec![0.0; ncoef(band)];
    for &(l, m, v) in entries {
        c[idx(l, m)] = v;
    }
    SphereField { band, coeffs: c }
}

#[test]
fn divergence_of_transformed_stress_is_the_piola_pullback() {
    let disc = Discretization::new(12);
    let eta = height(12, &[(2, 0, 0.004), (2, 1, -0.003), (1, -1, 0.002)]);
    let map = build_map(&disc, &HeightFunction::new(&disc.sphere, eta).unwrap()).unwrap();
    let pos = disc.positions();
    let mapped: Vec<Vec<[f64; 3]>> = pos
        .iter()
        .zip(&map.phi)
        .map(|(sh, ph)| sh.iter().zip(ph).map(|(x, f)| x.map(|c| (1.0 + f) * c)).collect())
        .collect();
    let wg: Vec<Vec<[f64; 3]>> = mapped.iter().map(|sh| sh.iter().map(|y| velocity(*y)).collect()).collect();
    let qg: Vec<Vec<f64>> = mapped.iter().map(|sh| sh.iter().map(|y| pressure(*y)).collect()).collect();
    let w = VectorField::from_grid(&disc, &wg, 12);
    let q = ScalarField::from_grid(&disc, &qg, 12).to_grid(&disc);
    let t = transformed_stress(&disc, (MU, MU), &w.gradient_grid(&disc), &q, &map);
    let div = divergence_tensor(&disc, &t, 12).to_grid(&disc);
    let mut worst: f64 = 0.0;
    for s in 0..disc.n_shells() {
        if disc.radial.phase(s) != Phase::Interior {
            continue;
        }
        for k in 0..pos[s].len() {
            let expect = div_stress(mapped[s][k]);
            for i in 0..3 {
                worst = worst.max((div[s][k][i] - map.j[s][k] * expect[i]).abs());
            }
        }
    }
    assert!(worst < 1e-9, "pullback defect {worst:.3e}");
}

#[test]
fn identity_map_has_unit_jacobian_and_ball_volume() {
    let disc = Discretization::new(6);
    let map = build_map(&disc, &HeightFunction::zero(6)).unwrap();
    assert!(map.j.iter().flatten().all(|j| (j - 1.0).abs() < 1e-15));
    assert!((interior_volume(&disc, &map) - 4.0 * PI / 3.0).abs() < 1e-12);
}

#[test]
fn mapped_volume_matches_surface_formula() {
    let disc = Discretization::new(10);
    let eta = height(10, &[(0, 0, 0.005), (2, 0, 0.004), (3, -2, 0.001)]);
    let map = build_map(&disc, &HeightFunction::new(&disc.sphere, eta.clone()).unwrap()).unwrap();
    let v = interior_volume(&disc, &map);
    assert!((v - drop_volume(&disc.sphere, &eta)).abs() < 1e-10, "{v}");
}

/// Mean curvature of the surface of revolution `r = 1 + ε Y₂₀(θ)` from the meridian curve.
fn revolution_curvature(eps: f64, theta: f64) -> f64 {
    let a = eps * (5.0 / (4.0 * PI)).sqrt();
    let (s, c) = theta.sin_cos();
    let r = 1.0 + a * 0.5 * (3.0 * c * c - 1.0);
    let r1 = -3.0 * a * c * s;
    let r2 = -3.0 * a * (c * c - s * s);
    let (rho1, z1) = (r1 * s + r * c, r1 * c - r * s);
    let (rho2, z2) = (r2 * s + 2.0 * r1 * c - r * s, r2 * c - 2.0 * r1 * s - r * c);
    let speed = (rho1 * rho1 + z1 * z1).sqrt();
    (rho1 * z2 - z1 * rho2) / speed.powi(3) + z1 / (r * s * speed)
}

#[test]
fn curvature_matches_surface_of_revolution() {
    let sp = Sphere::new(24);
    for eps in [0.02, -0.05] {
        let h = mean_curvature_grid(&sp, &height(24, &[(2, 0, eps)])).unwrap();
        let np = sp.grid.n_phi;
        let worst = (0..sp.grid.len())
            .map(|k| (h[k] - revolution_curvature(eps, sp.grid.theta[k / np])).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "ε = {eps}: {worst:.3e}");
    }
}

#[test]
fn curvature_of_spheres() {
    let sp = Sphere::new(16);
    let h = mean_curvature_grid(&sp, &SphereField::zeros(16)).unwrap();
    assert!(h.iter().all(|v| (v + 2.0).abs() < 1e-12));
    for c in [0.05, -0.05, 0.08, -0.08] {
        let h = mean_curvature_grid(&sp, &SphereField::constant(16, c)).unwrap();
        assert!(h.iter().all(|v| (v + 2.0 - 2.0 * c / (1.0 + c)).abs() < 1e-10));
    }
}

#[test]
fn curvature_splits_into_linear_part_and_quadratic_remainder() {
    let sp = Sphere::new(20);
    let base = height(10, &[(2, 0, 1.0), (3, 1, -0.6), (4, -3, 0.4), (1, 0, 0.3)]);
    let mut prev = f64::NAN;
    for eps in [0.02, 0.01, 0.005] {
        let eta = base.scale(eps).with_band(20);
        let h = mean_curvature_grid(&sp, &eta).unwrap();
        let lin = curvature_linear(&eta).values(&sp);
        let gh = curvature_nonlinear_gh(&sp, &eta).unwrap().values(&sp);
        // the identity is exact up to band truncation of the remainder
        let worst = (0..h.len()).map(|k| (h[k] + 2.0 - lin[k] + gh[k]).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-6 * eps * eps, "ε = {eps}: {worst:.3e}");
        let size = gh.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if prev.is_finite() {
            assert!((prev / size - 4.0).abs() < 0.2, "remainder ratio {}", prev / size);
        }
        prev = size;
    }
}
