//! Contraction iteration and diagnostics of the steady drop.

use std::sync::Arc;

use drop_steady::driver::{picard_solve, picard_with_context, reflect_height, SolutionBundle, SolveConfig};
use drop_steady::operators::{DropContext, DropState};

fn config(rho_tilde: f64, lmax: usize) -> SolveConfig {
    SolveConfig { rho_tilde, lmax, ..SolveConfig::default() }
}

#[test]
fn zero_density_contrast_gives_rest_state() {
    let b = picard_solve(&config(0.0, 8)).unwrap();
    assert!(b.history.is_empty());
    assert_eq!(b.x_norm.total(), 0.0);
    assert_eq!(b.lambda, 0.0);
}

#[test]
fn small_contrast_converges_with_constraints() {
    let b = picard_solve(&config(1e-3, 8)).unwrap();
    let d = &b.report;
    assert!(b.contraction < 1.0);
    assert!(b.x_norm.total() <= 1e-3f64.powf(0.8));
    assert!(d.volume_defect < 1e-8);
    assert!(d.force_defect < 1e-6);
    assert!(d.force[0].abs() < 1e-9 && d.force[1].abs() < 1e-9);
    assert!(d.axisymmetry_leakage < 1e-9);
    assert!(b.residual < 1e-8);
    assert!((d.wake_coefficient / d.wake_target - 1.0).abs() < 0.1);
    assert!(d.remainder_slope < -1.0);
}

/// Largest absolute deviation from the mirror image across `λ`, `η` and `u`.
fn mirror_defect(a: &SolutionBundle, b: &SolutionBundle) -> f64 {
    let eta = reflect_height(&a.state.eta).axpy(-1.0, &b.state.eta).max_abs_coeff();
    (a.lambda + b.lambda).abs().max(eta)
}

#[test]
fn reversed_contrast_mirrors_the_drop() {
    let a = picard_solve(&config(1e-3, 8)).unwrap();
    let b = picard_solve(&config(-1e-3, 8)).unwrap();
    assert!(mirror_defect(&a, &b) < 1e-8);
}

/// With the inertial densities held fixed, only buoyancy flips and the
/// reflection is an exact symmetry of the discrete problem.
#[test]
fn reflection_is_exact_with_fixed_densities() {
    let solve = |rho_tilde: f64| {
        let cfg = config(rho_tilde, 8);
        let disc = Arc::new(cfg.discretization());
        let mut prm = cfg.params().unwrap();
        prm.rho1 = 0.5;
        prm.rho2 = 0.5;
        let ctx = DropContext::new(disc.clone(), prm, cfg.truncation_radius(disc.radial.r_inf())).unwrap();
        picard_with_context(&cfg, &ctx, DropState::zeros(&disc)).unwrap()
    };
    let (a, b) = (solve(1e-3), solve(-1e-3));
    let scale = a.lambda.abs().max(a.state.eta.max_abs_coeff());
    assert!(mirror_defect(&a, &b) < 1e-10 * scale, "{}", mirror_defect(&a, &b) / scale);
}

#[test]
fn invalid_exponents_are_rejected() {
    let mut c = config(1e-3, 8);
    c.alpha = 0.7;
    assert!(c.validate().is_err());
    c.alpha = 0.8;
    c.q = 1.5;
    assert!(c.validate().is_err());
}
