//! Oseen fundamental solution: PDE residual, Stokes limit and symmetry.

use drop_steady::twophase::{oseenlet, oseenlet_pressure, oseenlet_with, stokeslet};

/// Fourth-order central difference of `f` along axis `a`.
fn d1(f: &dyn Fn([f64; 3]) -> f64, x: [f64; 3], a: usize, h: f64) -> f64 {
    let at = |t: f64| {
        let mut y = x;
        y[a] += t;
        f(y)
    };
    (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
}

fn d2(f: &dyn Fn([f64; 3]) -> f64, x: [f64; 3], a: usize, h: f64) -> f64 {
    let at = |t: f64| {
        let mut y = x;
        y[a] += t;
        f(y)
    };
    (-at(2.0 * h) + 16.0 * at(h) - 30.0 * at(0.0) + 16.0 * at(-h) - at(-2.0 * h)) / (12.0 * h * h)
}

#[test]
fn momentum_and_continuity_residuals_vanish() {
    let h = 4e-3;
    for &(lambda, mu, rho) in &[(0.7, 1.0, 1.0), (-1.3, 0.5, 0.8), (2.0, 2.0, 0.3)] {
        for x in [[0.9, -0.4, 1.1], [-1.2, 0.3, -0.8], [0.2, 1.5, 0.05]] {
            for j in 0..3 {
                let comp = |i: usize| move |y: [f64; 3]| oseenlet_with(y, lambda, mu, rho).unwrap()[i][j];
                let pj = |y: [f64; 3]| oseenlet_pressure(y)[j];
                let mut div = 0.0;
                for i in 0..3 {
                    let g = comp(i);
                    let lap: f64 = (0..3).map(|a| d2(&g, x, a, h)).sum();
                    let res = -mu * lap + rho * lambda * d1(&g, x, 2, h) + d1(&pj, x, i, h);
                    assert!(res.abs() < 1e-9, "momentum residual {res} at {x:?}, ({i},{j})");
                    div += d1(&g, x, i, h);
                }
                assert!(div.abs() < 1e-9, "divergence {div}");
            }
        }
    }
}

#[test]
fn small_drift_limit_is_the_stokeslet() {
    let x = [0.4, -0.7, 1.3];
    let g = oseenlet(x, 1e-6).unwrap();
    let s = stokeslet(x, 1.0);
    for i in 0..3 {
        for j in 0..3 {
            assert!((g[i][j] - s[i][j]).abs() < 1e-6 * 0.1, "{i}{j}: {} vs {}", g[i][j], s[i][j]);
        }
    }
}

#[test]
fn axisymmetric_under_rotations_about_e3() {
    let x = [0.8, 0.1, -0.6];
    let (s, c) = 0.83f64.sin_cos();
    let rot = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
    let rx: [f64; 3] = std::array::from_fn(|i| (0..3).map(|k| rot[i][k] * x[k]).sum());
    let g = oseenlet(x, 0.9).unwrap();
    let gr = oseenlet(rx, 0.9).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            // Rᵀ Γ(Rx) R = Γ(x)
            let mut v = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    v += rot[a][i] * gr[a][b] * rot[b][j];
                }
            }
            assert!((v - g[i][j]).abs() < 1e-13);
        }
    }
}

#[test]
fn origin_is_rejected() {
    assert!(oseenlet([0.0; 3], 1.0).is_err());
    assert!(oseenlet([1.0, 0.0, 0.0], 0.0).is_err());
}
