//! Two-phase solver against closed-form flows and manufactured solutions.

use std::f64::consts::PI;
use std::sync::Arc;

use drop_steady::field::{Discretization, ScalarField, VectorField};
use drop_steady::oracle::HadamardRybczynski;
use drop_steady::radial::Phase;
use drop_steady::twophase::{
    auxiliary_field, dissipation, drag_integral, JumpData, PhysicalParams, StokesSolver,
};

fn solver(lmax: usize, mu1: f64, mu2: f64) -> StokesSolver {
    let disc = Arc::new(Discretization::new(lmax));
    StokesSolver::new(disc, PhysicalParams::new(mu1, mu2, 1.0, 0.0).unwrap()).unwrap()
}

/// Relative L² error of the solver field against the oracle, over all shells.
fn hr_error(s: &StokesSolver, u: &VectorField, p: &ScalarField, hr: &HadamardRybczynski) -> (f64, f64) {
    let disc = &s.disc;
    let ue = VectorField::from_fn_phased(disc, disc.lmax, |x, ph| hr.velocity(x, ph == Phase::Interior));
    let pe = ScalarField::from_fn_phased(disc, disc.lmax, |x, ph| hr.pressure(x, ph == Phase::Interior));
    let eu = u.axpy(-1.0, &ue).l2(disc) / ue.l2(disc);
    let ep = p.axpy(-1.0, &pe).l2(disc) / pe.l2(disc);
    (eu, ep)
}

#[test]
fn auxiliary_field_matches_hadamard_rybczynski() {
    for (mu1, mu2) in [(1.0, 1.0), (0.1, 1.0), (10.0, 1.0), (0.7, 2.0)] {
        let s = solver(8, mu1, mu2);
        let (u, p) = auxiliary_field(&s).unwrap();
        let hr = HadamardRybczynski::new(mu1, mu2);
        let (eu, ep) = hr_error(&s, &u, &p, &hr);
        assert!(eu < 1e-8, "velocity error {eu} for {mu1}/{mu2}");
        assert!(ep < 1e-8, "pressure error {ep} for {mu1}/{mu2}");
        let d = drag_integral(&s.disc, &s.params, &u, &p);
        assert!((d[2] / hr.drag_z() - 1.0).abs() < 1e-8, "drag {} vs {}", d[2], hr.drag_z());
        assert!(d[0].abs() < 1e-12 && d[1].abs() < 1e-12);
    }
}

#[test]
fn energy_identity_for_auxiliary_field() {
    let s = solver(8, 1.3, 0.8);
    let (u, p) = auxiliary_field(&s).unwrap();
    let d = drag_integral(&s.disc, &s.params, &u, &p)[2];
    let e = dissipation(&s.disc, &s.params, &u, &p);
    assert!(e > 0.0);
    assert!((-d / e - 1.0).abs() < 1e-8, "drag {d} dissipation {e}");
}

#[test]
fn equal_viscosity_drag_is_five_pi_mu() {
    let mu = 1.9;
    let s = solver(8, mu, mu);
    let (u, p) = auxiliary_field(&s).unwrap();
    let d = drag_integral(&s.disc, &s.params, &u, &p)[2];
    assert!((d.abs() / (5.0 * PI * mu) - 1.0).abs() < 1e-8);
}

#[test]
fn zero_data_gives_zero_solution() {
    let s = solver(6, 1.0, 2.0);
    let sol = s.solve(&JumpData::zeros(&s.disc), 1e-2).unwrap();
    assert_eq!(sol.u.l2(&s.disc), 0.0);
    assert_eq!(sol.p.l2(&s.disc), 0.0);
}

/// Smooth field continuous across the sphere and negligible at `R_∞`.
fn manufactured(disc: &Discretization) -> (VectorField, ScalarField) {
    let u = VectorField::from_fn(disc, disc.lmax, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let r = r2.sqrt();
        let c = if r > 1.0 { (-0.1 * (r - 1.0).powi(2)).exp() } else { 1.0 };
        [c * (x[1] + 0.3), c * x[2] * x[0], c * (x[0] * x[0] - x[2])]
    });
    let p = ScalarField::from_fn_phased(disc, disc.lmax, |x, ph| {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        match ph {
            Phase::Interior => x[0] * x[1] + x[2],
            Phase::Exterior => (-0.2 * (r - 1.0).powi(2)).exp() * (x[2] + 0.5 * x[0]),
        }
    });
    (u, p)
}

fn data_for(s: &StokesSolver, u: &VectorField, p: &ScalarField, lambda0: f64) -> JumpData {
    let (mut f, g) = s.apply_stokes(u, p);
    if lambda0 != 0.0 {
        f = f.axpy(1.0, &s.drift(u, lambda0));
    }
    let tj = s.traction_jump(u, p);
    let (h1, _) = u.shell(s.disc.radial.outer_boundary());
    JumpData { f, g, h1, h2: tj.tangential }
}

#[test]
fn manufactured_solution_is_recovered() {
    let s = solver(8, 0.6, 1.4);
    let (u, p) = manufactured(&s.disc);
    for lambda0 in [0.0, 1e-2, -3e-2] {
        let data = data_for(&s, &u, &p, lambda0);
        let sol = s.solve(&data, lambda0).unwrap();
        let eu = sol.u.axpy(-1.0, &u).l2(&s.disc) / u.l2(&s.disc);
        let ep = sol.p.axpy(-1.0, &p).l2(&s.disc) / p.l2(&s.disc);
        assert!(eu < 1e-7 && ep < 1e-7, "lambda0 {lambda0}: {eu} {ep}");
    }
}

#[test]
fn solution_is_continuous_in_lambda() {
    let s = solver(6, 1.0, 1.0);
    let (u, p) = manufactured(&s.disc);
    let data = data_for(&s, &u, &p, 0.0);
    let a = s.solve(&data, 0.0).unwrap();
    let b = s.solve(&data, 1e-9).unwrap();
    assert!(a.u.axpy(-1.0, &b.u).l2(&s.disc) < 1e-8 * a.u.l2(&s.disc));
}

#[test]
fn incompatible_data_is_rejected() {
    let s = solver(4, 1.0, 1.0);
    let mut data = JumpData::zeros(&s.disc);
    data.h1 = drop_steady::sphere::SphereField::constant(4, 1.0);
    assert!(s.solve(&data, 0.0).is_err());
}
