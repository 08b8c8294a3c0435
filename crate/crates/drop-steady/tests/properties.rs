//! Property-based invariants of the transforms and linear solvers.

use std::sync::{Arc, OnceLock};

use drop_steady::field::Discretization;
use drop_steady::halfspace::{dirichlet_stokes_halfspace, TangentialSpectrum};
use drop_steady::operators::{invert_l, DropContext};
use drop_steady::sphere::{laplace_beltrami, ncoef, project_complement, solve_shifted, Sphere, SphereField};
use drop_steady::twophase::PhysicalParams;
use drop_steady::validate::random_y_element;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const B: usize = 10;

fn sphere() -> &'static Sphere {
    static S: OnceLock<Sphere> = OnceLock::new();
    S.get_or_init(|| Sphere::new(B))
}

fn coeffs() -> impl Strategy<Value = SphereField> {
    prop::collection::vec(-1.0f64..1.0, ncoef(B)).prop_map(|c| SphereField { band: B, coeffs: c })
}

fn rotation(a: f64, b: f64, c: f64) -> [[f64; 3]; 3] {
    let rz = |t: f64| [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
    let ry = |t: f64| [[t.cos(), 0.0, t.sin()], [0.0, 1.0, 0.0], [-t.sin(), 0.0, t.cos()]];
    let mul = |x: [[f64; 3]; 3], y: [[f64; 3]; 3]| {
        std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| x[i][k] * y[k][j]).sum()))
    };
    mul(mul(rz(a), ry(b)), rz(c))
}

/// `f ∘ Rᵀ` re-expanded from point evaluations on the grid.
fn rotate(f: &SphereField, r: &[[f64; 3]; 3]) -> SphereField {
    let sp = sphere();
    let vals: Vec<f64> = sp
        .grid
        .normal
        .iter()
        .map(|x| {
            let y: [f64; 3] = std::array::from_fn(|i| (0..3).map(|k| r[k][i] * x[k]).sum());
            f.eval(y[2].clamp(-1.0, 1.0).acos(), y[1].atan2(y[0]))
        })
        .collect();
    SphereField { band: B, coeffs: sp.analyze(&vals, B) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval_and_round_trip(f in coeffs()) {
        let sp = sphere();
        let v = f.values(sp);
        let energy = sp.grid.integrate(&v.iter().map(|x| x * x).collect::<Vec<_>>());
        let sum: f64 = f.coeffs.iter().map(|c| c * c).sum();
        prop_assert!((energy - sum).abs() < 1e-12 * sum.max(1.0));
        let back = sp.analyze(&v, B);
        prop_assert!(back.iter().zip(&f.coeffs).all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn rotations_preserve_norm_and_commute_with_laplacian(f in coeffs(), a in 0.0..6.3f64, b in 0.0..3.1f64, c in 0.0..6.3f64) {
        let r = rotation(a, b, c);
        let g = rotate(&f, &r);
        prop_assert!((g.l2() - f.l2()).abs() < 1e-11 * f.l2().max(1.0));
        let lhs = laplace_beltrami(&g);
        let rhs = rotate(&laplace_beltrami(&f), &r);
        prop_assert!(lhs.axpy(-1.0, &rhs).l2() < 1e-10 * (1.0 + rhs.l2()));
    }

    #[test]
    fn shifted_solve_inverts_on_the_complement(f in coeffs()) {
        let f = project_complement(&f);
        let g = solve_shifted(&f).unwrap();
        prop_assert!(laplace_beltrami(&g).axpy(2.0, &g).axpy(-1.0, &f).l2() < 1e-12 * (1.0 + f.l2()));
    }

    #[test]
    fn halfspace_solution_is_linear_in_data(
        vals in prop::collection::vec(-1.0f64..1.0, 24), alpha in -3.0..3.0f64, mu in 0.2..4.0f64, x3 in -2.0..2.0f64,
    ) {
        let modes = vec![[8, 0], [3, -9], [-12, 5], [0, 10]];
        let data = |off: usize| -> Vec<[C; 3]> {
            (0..4).map(|j| std::array::from_fn(|i| C::new(vals[(off + 3 * j + i) % 24], vals[(off + 3 * j + i + 7) % 24]))).collect()
        };
        let (d1, d2) = (data(0), data(12));
        let comb: Vec<[C; 3]> = d1.iter().zip(&d2).map(|(a, b)| std::array::from_fn(|i| a[i] + b[i] * alpha)).collect();
        let s = |d: Vec<[C; 3]>| dirichlet_stokes_halfspace(mu, &TangentialSpectrum::new(modes.clone(), d).unwrap()).unwrap();
        let lin = s(d1).axpy(alpha, &s(d2)).unwrap();
        let direct = s(comb);
        let x = [0.37, -1.1, x3];
        let ((u1, p1), (u2, p2)) = (lin.eval(x), direct.eval(x));
        prop_assert!((p1 - p2).abs() < 1e-12 * (1.0 + p2.abs()));
        for i in 0..3 {
            prop_assert!((u1[i] - u2[i]).abs() < 1e-12 * (1.0 + u2[i].abs()));
        }
    }
}

fn drop_context() -> &'static DropContext {
    static C: OnceLock<DropContext> = OnceLock::new();
    C.get_or_init(|| {
        let prm = PhysicalParams::new(0.7, 1.0, 1.2, -4e-3).unwrap();
        DropContext::new(Arc::new(Discretization::new(6)), prm, 16.0).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn inverse_operator_is_linear(seed in any::<u64>(), alpha in -2.0..2.0f64) {
        let ctx = drop_context();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y1 = random_y_element(ctx, &mut rng);
        let y2 = random_y_element(ctx, &mut rng);
        let x = invert_l(ctx, &y1.axpy(alpha, &y2)).unwrap();
        let z = invert_l(ctx, &y1).unwrap().axpy(alpha, &invert_l(ctx, &y2).unwrap());
        let disc = ctx.disc();
        let d = x.axpy(-1.0, &z);
        prop_assert!(d.u.l2(disc) < 1e-9 * (1.0 + x.u.l2(disc)));
        prop_assert!((d.kappa).abs() < 1e-9 * (1.0 + x.kappa.abs()));
        prop_assert!(d.eta.l2() < 1e-9 * (1.0 + x.eta.l2()));
    }
}
