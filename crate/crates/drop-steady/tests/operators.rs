//! Linearized drop operator, its inverse, and the nonlinear remainder.

use std::f64::consts::PI;
use std::sync::Arc;

use drop_steady::field::{Discretization, ScalarField, VectorField};
use drop_steady::operators::{apply_l, assemble_n, invert_l, norm_x, DropContext, DropState, YElement};
use drop_steady::oracle::HadamardRybczynski;
use drop_steady::sphere::{integrate_sphere, ncoef, SphereField, TangentField};
use drop_steady::twophase::PhysicalParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const L: usize = 8;

fn context(lambda0: f64, sigma: f64) -> DropContext {
    let (mu1, mu2) = (0.8, 1.0);
    let drag = HadamardRybczynski::new(mu1, mu2).drag_z();
    let rho_tilde = lambda0 * drag * 3.0 / (4.0 * PI);
    let params = PhysicalParams::new(mu1, mu2, sigma, rho_tilde).unwrap();
    DropContext::new(Arc::new(Discretization::new(L)), params, 16.0).unwrap()
}

fn decaying_coeffs(rng: &mut ChaCha8Rng, band: usize) -> Vec<f64> {
    (0..ncoef(band))
        .map(|k| {
            let l = drop_steady::sphere::degree_of(k) as f64;
            rng.gen_range(-1.0..1.0) * (-0.6 * l).exp()
        })
        .collect()
}

/// Smooth random data with the compatibility constraint enforced through `h₁`.
fn random_y(ctx: &DropContext, rng: &mut ChaCha8Rng) -> YElement {
    let disc = ctx.disc();
    let c: [f64; 12] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let window = |x: [f64; 3]| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 6.0).exp();
    let f = VectorField::from_fn(disc, L, |x| {
        let w = window(x);
        [w * (c[0] + c[1] * x[1]), w * (c[2] + c[3] * x[0] * x[2]), w * (c[4] + c[5] * x[2] + c[6] * x[0])]
    });
    let g = ScalarField::from_fn(disc, L, |x| window(x) * (c[7] + c[8] * x[0] + c[9] * x[1] * x[2]));
    let mut h1 = SphereField { band: L, coeffs: decaying_coeffs(rng, L) };
    let vol = g.integrate_interior(disc);
    h1.coeffs[0] = vol / (4.0 * PI).sqrt();
    let mut h2 = TangentField { band: L, v: decaying_coeffs(rng, L), w: decaying_coeffs(rng, L) };
    h2.v[0] = 0.0;
    h2.w[0] = 0.0;
    let h3 = SphereField { band: L, coeffs: decaying_coeffs(rng, L) };
    YElement { f, g, h1, h2, a1: c[10], a2: c[11], h3 }
}

fn rel_residual(ctx: &DropContext, y: &YElement, z: &YElement) -> f64 {
    let d = z.axpy(-1.0, y).collocated(ctx.disc()).row_norms(ctx.disc());
    let n = y.row_norms(ctx.disc());
    d.iter().sum::<f64>() / n.iter().sum::<f64>()
}

#[test]
fn zero_state_maps_to_zero() {
    let ctx = context(1e-3, 1.0);
    let y = apply_l(&ctx, &DropState::zeros(ctx.disc()));
    assert!(y.row_norms(ctx.disc()).iter().all(|v| *v == 0.0));
}

#[test]
fn speed_correction_only_state() {
    let ctx = context(1e-3, 1.0);
    let mut x = DropState::zeros(ctx.disc());
    x.kappa = 1.0;
    let y = apply_l(&ctx, &x);
    assert!((y.a1 - ctx.drag_z).abs() < 1e-14);
    let expect = ctx.aux_jump.normal.scale(-1.0);
    assert!(y.h3.axpy(-1.0, &expect).l2() < 1e-14);
}

#[test]
fn degree_one_height_keeps_a_third() {
    let ctx = context(1e-3, 1.0);
    let mut x = DropState::zeros(ctx.disc());
    x.eta = SphereField::normal_component(L, 2);
    let y = apply_l(&ctx, &x);
    assert!(y.a2.abs() < 1e-14);
    assert!(y.h3.axpy(-1.0 / 3.0, &x.eta).l2() < 1e-14);
}

#[test]
fn inverse_is_a_right_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for lambda0 in [1e-3, 1e-2] {
        let ctx = context(lambda0, 0.7);
        for _ in 0..3 {
            let y = random_y(&ctx, &mut rng);
            let x = invert_l(&ctx, &y).unwrap();
            let z = apply_l(&ctx, &x);
            let r = rel_residual(&ctx, &y, &z);
            assert!(r < 1e-7, "round trip {r:.3e} at λ₀ = {lambda0}");
            assert!((integrate_sphere(&x.eta) - y.a2).abs() < 1e-9);
        }
    }
}

#[test]
fn force_only_data_sets_kappa() {
    let ctx = context(1e-3, 1.0);
    let mut y = YElement::zeros(ctx.disc());
    y.a1 = 0.37;
    let x = invert_l(&ctx, &y).unwrap();
    assert!((x.kappa - 0.37 / ctx.drag_z).abs() < 1e-14);
    assert!(x.u.l2(ctx.disc()) == 0.0);
    // curvature row: σ(Δ+2)η + (1/4π)n·∫ηn = κ n·⟦T(U)n⟧ with one-third on degree one
    let expect = ctx.aux_jump.normal.scale(3.0 * x.kappa);
    assert!(x.eta.axpy(-1.0, &expect).l2() < 1e-12);
}

#[test]
fn remainder_at_rest_without_buoyancy_vanishes() {
    let ctx = context(0.0, 1.0);
    let n = assemble_n(&ctx, &DropState::zeros(ctx.disc())).unwrap();
    assert!(n.row_norms(ctx.disc()).iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn remainder_at_rest_with_buoyancy() {
    let ctx = context(1e-3, 1.0);
    let n = assemble_n(&ctx, &DropState::zeros(ctx.disc())).unwrap();
    let r = n.row_norms(ctx.disc());
    assert_eq!(n.a2, 0.0);
    assert!(r[2] < 1e-14, "kinematic row {}", r[2]);
    assert!(r[3] < 1e-14 && r[4] < 1e-14);
    // λ₀ n·⟦T(U)n⟧ balances the hydrostatic jump ρ̃ n₃
    assert!(r[6] < 1e-10 * ctx.params().rho_tilde.abs(), "normal row {}", r[6]);
    assert!(r[0] > 0.0);
}

#[test]
fn constant_height_volume_remainder() {
    let ctx = context(1e-3, 1.0);
    let mut x = DropState::zeros(ctx.disc());
    let c = 0.01;
    x.eta = SphereField::constant(L, c);
    let n = assemble_n(&ctx, &x).unwrap();
    assert!((n.a2 + 4.0 * PI * (c * c + c * c * c / 3.0)).abs() < 1e-15);
}

#[test]
fn remainder_rows_are_compatible() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let ctx = context(1e-2, 1.0);
    let y = random_y(&ctx, &mut rng);
    let x = invert_l(&ctx, &y).unwrap();
    let x = x.scale(0.05 / x.eta.sobolev_norm(2.75));
    let n = assemble_n(&ctx, &x).unwrap();
    let (vol, surf) = n.compatibility(ctx.disc());
    assert!((vol - surf).abs() < 1e-12, "{vol} vs {surf}");
}

#[test]
fn norm_is_homogeneous() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let ctx = context(1e-3, 1.0);
    let x = invert_l(&ctx, &random_y(&ctx, &mut rng)).unwrap();
    let a = norm_x(&ctx, &x).total();
    let b = norm_x(&ctx, &x.scale(-2.5)).total();
    assert!((b / a - 2.5).abs() < 1e-12);
    assert_eq!(norm_x(&ctx, &DropState::zeros(ctx.disc())).total(), 0.0);
}
