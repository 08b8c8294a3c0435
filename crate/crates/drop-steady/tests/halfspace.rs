//! Half-space mode solutions: PDE, trace and jump residuals.

use drop_steady::halfspace::{
    default_heights, dirichlet_stokes_halfspace, frequency, jump_to_trace, residual_check, twophase_jump_halfspace,
    BoundarySpectrum, HalfSpaceData, TangentialSpectrum,
};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_modes(rng: &mut ChaCha8Rng, n: usize) -> Vec<[i64; 2]> {
    let mut out = Vec::new();
    while out.len() < n {
        let j = [rng.gen_range(-32..=32), rng.gen_range(-32..=32)];
        let xi = frequency(j);
        if xi[0].hypot(xi[1]) >= 1.0 && !out.contains(&j) {
            out.push(j);
        }
    }
    out
}

fn rc(rng: &mut ChaCha8Rng) -> C {
    C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_trace(rng: &mut ChaCha8Rng) -> BoundarySpectrum {
    let modes = random_modes(rng, 6);
    let values = modes.iter().map(|_| [rc(rng), rc(rng), rc(rng)]).collect();
    TangentialSpectrum::new(modes, values).unwrap()
}

#[test]
fn dirichlet_residuals_vanish_on_random_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let b = random_trace(&mut rng);
        let mu = rng.gen_range(0.2..3.0);
        let s = dirichlet_stokes_halfspace(mu, &b).unwrap();
        let r = residual_check(&s, HalfSpaceData::Dirichlet(&b), &default_heights());
        assert!(r.max() < 1e-10, "{r:?}");
    }
}

#[test]
fn jump_residuals_vanish_on_random_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let modes = random_modes(&mut rng, 5);
        let h1 = TangentialSpectrum::new(modes.clone(), modes.iter().map(|_| rc(&mut rng)).collect()).unwrap();
        let h2 = TangentialSpectrum::new(
            modes.clone(),
            modes.iter().map(|_| [rc(&mut rng), rc(&mut rng), C::new(0.0, 0.0)]).collect(),
        )
        .unwrap();
        let s = twophase_jump_halfspace(0.8, &h1, &h2).unwrap();
        let r = residual_check(&s, HalfSpaceData::Jump(&h1, &h2), &default_heights());
        assert!(r.max() < 1e-10, "{r:?}");
    }
}

/// Independent check: fourth-order differences of the mode amplitudes in `x₃`.
#[test]
fn mode_profiles_satisfy_stokes_by_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let b = random_trace(&mut rng);
    let mu = 1.3;
    let s = dirichlet_stokes_halfspace(mu, &b).unwrap();
    let h = 1e-3;
    for m in &s.modes {
        for x3 in [0.4, -0.7] {
            let f = |t: f64| m.at(x3 + t);
            let k2 = m.xi[0] * m.xi[0] + m.xi[1] * m.xi[1];
            let (u0, p0) = f(0.0);
            let d1 = |g: &dyn Fn(f64) -> C| (-g(2.0 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2.0 * h)) / (12.0 * h);
            let d2 = |g: &dyn Fn(f64) -> C| {
                (-g(2.0 * h) + 16.0 * g(h) - 30.0 * g(0.0) + 16.0 * g(-h) - g(-2.0 * h)) / (12.0 * h * h)
            };
            for i in 0..3 {
                let ui = |t: f64| f(t).0[i];
                let lap = d2(&ui) - k2 * u0[i];
                let gp = if i < 2 { C::new(0.0, m.xi[i]) * p0 } else { d1(&|t| f(t).1) };
                assert!((-mu * lap + gp).norm() < 1e-7);
            }
            let div = C::new(0.0, m.xi[0]) * u0[0] + C::new(0.0, m.xi[1]) * u0[1] + d1(&|t| f(t).0[2]);
            assert!(div.norm() < 1e-8);
        }
    }
}

#[test]
fn tangential_stress_identity_holds_per_mode() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let b = random_trace(&mut rng);
    let mu = 0.6;
    let s = dirichlet_stokes_halfspace(mu, &b).unwrap();
    for (m, bh) in s.modes.iter().zip(&b.values) {
        let k = m.xi[0].hypot(m.xi[1]);
        let tu = m.traction(mu, true);
        let tl = m.traction(mu, false);
        let xb = m.xi[0] * bh[0] + m.xi[1] * bh[1];
        for i in 0..2 {
            let expect = -2.0 * mu * (k * bh[i] + m.xi[i] * xb / k);
            assert!((tu[i] - tl[i] - expect).norm() < 1e-12);
        }
    }
}

#[test]
fn normal_trace_only_reduces_to_dirichlet_problem() {
    let modes = vec![[10, -3]];
    let h1 = TangentialSpectrum::new(modes.clone(), vec![C::new(0.3, -0.2)]).unwrap();
    let h2 = TangentialSpectrum::new(modes, vec![[C::new(0.0, 0.0); 3]]).unwrap();
    let b = jump_to_trace(1.0, &h1, &h2).unwrap();
    assert_eq!(b.values[0], [C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.3, -0.2)]);
}

#[test]
fn solver_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let b1 = random_trace(&mut rng);
    let mut b2 = random_trace(&mut rng);
    b2.modes = b1.modes.clone();
    let alpha = 1.7;
    let comb = TangentialSpectrum::new(
        b1.modes.clone(),
        b1.values.iter().zip(&b2.values).map(|(x, y)| std::array::from_fn(|i| x[i] * alpha + y[i])).collect(),
    )
    .unwrap();
    let s1 = dirichlet_stokes_halfspace(1.0, &b1).unwrap();
    let s2 = dirichlet_stokes_halfspace(1.0, &b2).unwrap();
    let sc = dirichlet_stokes_halfspace(1.0, &comb).unwrap();
    let lin = s2.axpy(alpha, &s1).unwrap();
    for x in [[0.3, 0.1, 0.2], [-1.0, 2.0, -0.05]] {
        let (a, pa) = sc.eval(x);
        let (b, pb) = lin.eval(x);
        assert!((pa - pb).abs() < 1e-12);
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn corrupted_pressure_is_detected() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let b = random_trace(&mut rng);
    let mut s = dirichlet_stokes_halfspace(1.0, &b).unwrap();
    for m in &mut s.modes {
        for p in &mut m.p {
            p.c0 *= 2.0;
        }
    }
    let r = residual_check(&s, HalfSpaceData::Dirichlet(&b), &default_heights());
    assert!(r.momentum > 0.1);
}

#[test]
fn normal_component_of_tangential_jump_is_rejected() {
    let modes = vec![[10, 0]];
    let h1 = TangentialSpectrum::new(modes.clone(), vec![C::new(0.0, 0.0)]).unwrap();
    let h2 = TangentialSpectrum::new(modes, vec![[C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)]]).unwrap();
    assert!(twophase_jump_halfspace(1.0, &h1, &h2).is_err());
}
