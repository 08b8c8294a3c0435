//! Linearized drop operator, its inverse, and the nonlinear remainder.
//!
//! Unknowns are `x = (u, p, κ, η)`: the velocity and pressure perturbation
//! relative to the scaled auxiliary field, the speed correction
//! `κ = λ − λ₀`, and the interface height. The steady free-boundary
//! problem is written as `𝓛(x) = N(x)`; [`invert_l`] is the constructive
//! inverse of `𝓛`, and [`assemble_n`] evaluates `N` by pulling every
//! quantity back to the reference configuration.
//!
//! Transformed tractions are split as `⟦T^η n⟧ = ⟦T n⟧ + (⟦T^η n⟧ − ⟦T n⟧)`,
//! the first term from the modal traction used by `𝓛`, the difference from
//! one pointwise stress primitive. The split is exact at `η = 0`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{divergence_tensor, Discretization, GridScalar, GridTensor, GridVector, ScalarField, VectorField};
use crate::geometry::{
    build_map, curvature_linear, curvature_nonlinear_gh, matvec3, transformed_normal_projection,
    transformed_stress_point, HeightFunction, MapData,
};
use crate::radial::Phase;
use crate::sphere::{
    dot, first_moment, integrate_sphere, project_complement, project_kernel, solve_shifted, SphereField,
    TangentField,
};
use crate::twophase::{
    add_interior_constant, auxiliary_field, lambda0, stokes_operator, traction_jump, truncate_field, JumpData,
    PhysicalParams, StokesSolver, TractionJump, restrict_to_collocation,
};

type Mat3 = [[f64; 3]; 3];
const ID: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Unknowns of the reformulated problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DropState {
    pub u: VectorField,
    pub p: ScalarField,
    /// Speed correction `λ − λ₀`.
    pub kappa: f64,
    pub eta: SphereField,
}

impl DropState {
    pub fn zeros(disc: &Discretization) -> Self {
        let b = disc.lmax;
        Self { u: VectorField::zeros(disc, b), p: ScalarField::zeros(disc, b), kappa: 0.0, eta: SphereField::zeros(b) }
    }

    /// `self + a·o`.
    pub fn axpy(&self, a: f64, o: &Self) -> Self {
        Self {
            u: self.u.axpy(a, &o.u),
            p: self.p.axpy(a, &o.p),
            kappa: self.kappa + a * o.kappa,
            eta: self.eta.axpy(a, &o.eta),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { u: self.u.scale(a), p: self.p.scale(a), kappa: a * self.kappa, eta: self.eta.scale(a) }
    }
}

/// Data space of `𝓛`: one entry per row.
#[derive(Debug, Clone, PartialEq)]
pub struct YElement {
    pub f: VectorField,
    pub g: ScalarField,
    pub h1: SphereField,
    pub h2: TangentField,
    pub a1: f64,
    pub a2: f64,
    pub h3: SphereField,
}

impl YElement {
    pub fn zeros(disc: &Discretization) -> Self {
        let b = disc.lmax;
        Self {
            f: VectorField::zeros(disc, b),
            g: ScalarField::zeros(disc, b),
            h1: SphereField::zeros(b),
            h2: TangentField::zeros(b),
            a1: 0.0,
            a2: 0.0,
            h3: SphereField::zeros(b),
        }
    }

    /// `self + a·o`.
    pub fn axpy(&self, a: f64, o: &Self) -> Self {
        Self {
            f: self.f.axpy(a, &o.f),
            g: self.g.axpy(a, &o.g),
            h1: self.h1.axpy(a, &o.h1),
            h2: self.h2.axpy(a, &o.h2),
            a1: self.a1 + a * o.a1,
            a2: self.a2 + a * o.a2,
            h3: self.h3.axpy(a, &o.h3),
        }
    }

    /// `(∫_{B₁} g dx, ∫_{𝕊²} h₁ dS)`.
    pub fn compatibility(&self, disc: &Discretization) -> (f64, f64) {
        (self.g.integrate_interior(disc), integrate_sphere(&self.h1))
    }

    /// Copy with the volume rows restricted to collocated entries.
    pub fn collocated(&self, disc: &Discretization) -> Self {
        let (f, g) = restrict_to_collocation(disc, &self.f, &self.g);
        Self { f, g, ..self.clone() }
    }

    /// Per-row norms (`L²` surrogates).
    pub fn row_norms(&self, disc: &Discretization) -> [f64; 7] {
        [
            self.f.l2(disc),
            self.g.l2(disc),
            self.h1.l2(),
            self.h2.l2(),
            self.a1.abs(),
            self.a2.abs(),
            self.h3.l2(),
        ]
    }
}

/// Precomputed auxiliary field, its truncation and the derived constants.
#[derive(Debug)]
pub struct DropContext {
    pub solver: StokesSolver,
    /// Auxiliary flow `(U, 𝔓)` past the unit sphere.
    pub aux_u: VectorField,
    pub aux_p: ScalarField,
    pub aux_jump: TractionJump,
    /// `e₃·∫⟦T(U, 𝔓) n⟧ dS`.
    pub drag_z: f64,
    pub lambda0: f64,
    /// Truncation radius `R`.
    pub r_trunc: f64,
    pub trunc_u: VectorField,
    pub trunc_p: ScalarField,
    trunc_grid: GridVector,
    trunc_grad: GridTensor,
    trunc_pgrid: GridScalar,
    aux_jump_grid: Vec<[f64; 3]>,
}

impl DropContext {
    /// Builds the linear solver, the auxiliary field and its truncation at `R`.
    pub fn new(disc: Arc<Discretization>, params: PhysicalParams, r_trunc: f64) -> Result<Self> {
        let probe = StokesSolver::new(disc.clone(), params)?;
        let (aux_u, aux_p) = auxiliary_field(&probe)?;
        let aux_jump = traction_jump(&disc, &params, &aux_u, &aux_p);
        let drag_z = aux_jump.integral()[2];
        let lambda0 = lambda0(params.rho_tilde, drag_z);
        let (trunc_u, trunc_p) = truncate_field(&disc, &aux_u, &aux_p, r_trunc)?;
        let aux_jump_grid = jump_grid(&disc, &aux_jump);
        Ok(Self {
            trunc_grid: trunc_u.to_grid(&disc),
            trunc_grad: trunc_u.gradient_grid(&disc),
            trunc_pgrid: trunc_p.to_grid(&disc),
            solver: probe,
            aux_u,
            aux_p,
            aux_jump,
            drag_z,
            lambda0,
            r_trunc,
            trunc_u,
            trunc_p,
            aux_jump_grid,
        })
    }

    pub fn disc(&self) -> &Discretization {
        &self.solver.disc
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.solver.params
    }
}

/// Cartesian traction-jump vectors on the sphere grid.
fn jump_grid(disc: &Discretization, tj: &TractionJump) -> Vec<[f64; 3]> {
    let sp = &disc.sphere;
    let nn = tj.normal.values(sp);
    let tt = tj.tangential.values(sp);
    (0..sp.grid.len())
        .map(|k| std::array::from_fn(|i| nn[k] * sp.grid.normal[k][i] + tt[k][i]))
        .collect()
}

/// `n·v` as a degree-one field.
fn moment_field(v: [f64; 3], band: usize) -> SphereField {
    let mut out = SphereField::zeros(band);
    for (i, vi) in v.iter().enumerate() {
        out = out.axpy(*vi, &SphereField::normal_component(band, i));
    }
    out
}

/// Applies `𝓛^{λ₀}` row by row.
pub fn apply_l(ctx: &DropContext, x: &DropState) -> YElement {
    let disc = ctx.disc();
    let prm = ctx.params();
    let b = disc.lmax;
    let (f, g) = stokes_operator(disc, prm, &x.u, &x.p);
    let f = f.axpy(1.0, &ctx.solver.drift(&x.u, ctx.lambda0));
    let (h1, _) = x.u.shell(disc.radial.outer_boundary());
    let tj = traction_jump(disc, prm, &x.u, &x.p);
    let a1 = x.kappa * ctx.drag_z + tj.integral()[2];
    let a2 = integrate_sphere(&x.eta);
    let h3 = curvature_linear(&x.eta)
        .scale(prm.sigma)
        .axpy(1.0 / (4.0 * PI), &moment_field(first_moment(&x.eta), b))
        .axpy(-x.kappa, &ctx.aux_jump.normal.with_band(b))
        .axpy(-1.0, &tj.normal);
    YElement { f, g, h1: h1.with_band(b), h2: tj.tangential, a1, a2, h3 }
}

/// Constructive inverse of `𝓛^{λ₀}`.
///
/// Solves the two-phase problem, shifts the interior pressure so that the
/// volume row holds automatically, reads `κ` off the force row and solves
/// the curvature row on the kernel and its complement.
pub fn invert_l(ctx: &DropContext, y: &YElement) -> Result<DropState> {
    let disc = ctx.disc();
    let prm = ctx.params();
    let b = disc.lmax;
    let data = JumpData { f: y.f.clone(), g: y.g.clone(), h1: y.h1.clone(), h2: y.h2.clone() };
    let sol = ctx.solver.solve(&data, ctx.lambda0)?;
    let (u, mut p) = (sol.u, sol.p);
    let tj = traction_jump(disc, prm, &u, &p);
    let c_p = (integrate_sphere(&tj.normal) + integrate_sphere(&y.h3) - 2.0 * prm.sigma * y.a2) / (4.0 * PI);
    add_interior_constant(disc, &mut p, c_p);
    let tj = traction_jump(disc, prm, &u, &p);
    let kappa = (y.a1 - tj.integral()[2]) / ctx.drag_z;
    let s = y.h3.with_band(b).axpy(kappa, &ctx.aux_jump.normal.with_band(b)).axpy(1.0, &tj.normal);
    // (1/4π) n·∫ηn dS keeps one third of the degree-one content
    let eta_par = project_kernel(&s).scale(3.0);
    let eta_perp = solve_shifted(&project_complement(&s))?.scale(1.0 / prm.sigma);
    Ok(DropState { u, p, kappa, eta: eta_par.axpy(1.0, &eta_perp) })
}

/// Pulled-back traction jumps of `(w, q)` on the sphere grid:
/// `(⟦T^η n⟧, ⟦T n⟧)`, both anchored at the modal `⟦T n⟧`.
fn traction_pair(
    disc: &Discretization,
    prm: &PhysicalParams,
    map: &MapData,
    grad: &GridTensor,
    q: &GridScalar,
    modal: &[[f64; 3]],
) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
    let sp = &disc.sphere;
    let si = disc.radial.inner_boundary();
    let se = disc.radial.outer_boundary();
    (0..sp.grid.len())
        .map(|k| {
            let n = sp.grid.normal[k];
            let side = |s: usize, mu: f64| {
                let te = transformed_stress_point(mu, &grad[s][k], q[s][k], &map.f_inv[s][k], &map.a[s][k]);
                let t0 = transformed_stress_point(mu, &grad[s][k], q[s][k], &ID, &ID);
                (matvec3(&te, map.atn[k]), matvec3(&t0, n))
            };
            let (ei, ii) = side(si, prm.mu1);
            let (ee, ie) = side(se, prm.mu2);
            let d: [f64; 3] = std::array::from_fn(|i| (ei[i] - ee[i]) - (ii[i] - ie[i]));
            (std::array::from_fn(|i| modal[k][i] + d[i]), modal[k])
        })
        .unzip()
}

fn integral_vec(disc: &Discretization, v: &[[f64; 3]]) -> [f64; 3] {
    std::array::from_fn(|i| disc.sphere.grid.integrate(&v.iter().map(|x| x[i]).collect::<Vec<_>>()))
}

/// Evaluates the nonlinear remainder `N(x)`.
pub fn assemble_n(ctx: &DropContext, x: &DropState) -> Result<YElement> {
    let disc = ctx.disc();
    let prm = ctx.params();
    let sp = &disc.sphere;
    let b = disc.lmax;
    let height = HeightFunction::new(sp, x.eta.clone())?;
    let map = build_map(disc, &height)?;
    let lam0 = ctx.lambda0;
    let lam = lam0 + x.kappa;
    let ug = x.u.to_grid(disc);
    let gu = x.u.gradient_grid(disc);
    let pg = x.p.to_grid(disc);
    let (uu, g_aux, p_aux) = (&ctx.trunc_grid, &ctx.trunc_grad, &ctx.trunc_pgrid);
    let ns = disc.n_shells();
    let npts = sp.grid.len();
    let e3 = [0.0, 0.0, 1.0];

    // rows 1 and 2 pointwise
    let mut stress: GridTensor = vec![vec![[[0.0; 3]; 3]; npts]; ns];
    let mut adv: GridVector = vec![vec![[0.0; 3]; npts]; ns];
    let mut flux: GridVector = vec![vec![[0.0; 3]; npts]; ns];
    for s in 0..ns {
        let ph = disc.radial.phase(s);
        let (mu, rho) = (prm.mu(ph), prm.rho(ph));
        for k in 0..npts {
            let (fi, a) = (&map.f_inv[s][k], &map.a[s][k]);
            let tu = transformed_stress_point(mu, &gu[s][k], pg[s][k], fi, a);
            let t0 = transformed_stress_point(mu, &gu[s][k], pg[s][k], &ID, &ID);
            let tr = transformed_stress_point(mu, &g_aux[s][k], p_aux[s][k], fi, a);
            stress[s][k] = std::array::from_fn(|i| std::array::from_fn(|j| lam * tr[i][j] + tu[i][j] - t0[i][j]));
            let au = matvec3(a, ug[s][k]);
            let a_aux = matvec3(a, uu[s][k]);
            let ae3 = matvec3(a, e3);
            let ae3m: [f64; 3] = std::array::from_fn(|i| ae3[i] - e3[i]);
            let (g1, g2) = (&gu[s][k], &g_aux[s][k]);
            let t = [
                (matvec3(g1, au), -rho),
                (matvec3(g1, a_aux), -rho * lam),
                (matvec3(g2, au), -rho * lam),
                (matvec3(g2, a_aux), -rho * lam * lam),
                (matvec3(g1, ae3), -rho * x.kappa),
                (matvec3(g1, ae3m), -rho * lam0),
                (matvec3(g2, ae3), -rho * lam * lam),
            ];
            adv[s][k] = std::array::from_fn(|i| t.iter().map(|(v, c)| c * v[i]).sum());
            flux[s][k] = std::array::from_fn(|i| {
                ug[s][k][i] - au[i] - lam * a_aux[i]
            });
        }
    }
    let n1 = divergence_tensor(disc, &stress, b).axpy(1.0, &VectorField::from_grid(disc, &adv, b));
    let n2 = VectorField::from_grid(disc, &flux, b + 1).divergence(disc).with_band(b);

    // interface rows
    let si = disc.radial.inner_boundary();
    let atn = &map.atn;
    let (nhat, proj) = transformed_normal_projection(&map);
    let aux_u_grid = ctx.aux_u.to_grid(disc);
    let n3v: Vec<f64> = (0..npts)
        .map(|k| {
            let n = sp.grid.normal[k];
            let w: [f64; 3] = std::array::from_fn(|i| ug[si][k][i] + lam * (aux_u_grid[si][k][i] + e3[i]));
            dot(w, std::array::from_fn(|i| n[i] - atn[k][i]))
        })
        .collect();
    let n3 = SphereField { band: b, coeffs: sp.analyze(&n3v, b) };

    let tj_u = traction_jump(disc, prm, &x.u, &x.p);
    let (ju_eta, ju_id) = traction_pair(disc, prm, &map, &gu, &pg, &jump_grid(disc, &tj_u));
    let (jaux_eta, jaux_id) = traction_pair(disc, prm, &map, g_aux, p_aux, &ctx.aux_jump_grid);

    let mut n4v = vec![[0.0; 3]; npts];
    let mut n5v = vec![[0.0; 3]; npts];
    let mut n7v = vec![0.0; npts];
    let eta_v = x.eta.values(sp);
    let quart: Vec<[f64; 3]> = (0..npts)
        .map(|k| {
            let e = eta_v[k];
            let c = 1.5 * e * e + e * e * e + 0.25 * e.powi(4);
            std::array::from_fn(|i| c * sp.grid.normal[k][i])
        })
        .collect();
    let quart_int = integral_vec(disc, &quart);
    let lin_int = first_moment(&x.eta);
    for k in 0..npts {
        let n = sp.grid.normal[k];
        let a = &map.a[si][k];
        let p0: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| ID[i][j] - n[i] * n[j]));
        let t0 = matvec3(&p0, ju_id[k]);
        let tu = matvec3(a, matvec3(&proj[k], ju_eta[k]));
        let t_aux = matvec3(a, matvec3(&proj[k], jaux_eta[k]));
        n4v[k] = std::array::from_fn(|i| t0[i] - tu[i] - lam * t_aux[i]);
        n5v[k] = std::array::from_fn(|i| lam * (jaux_id[k][i] - jaux_eta[k][i]) + ju_id[k][i] - ju_eta[k][i]);
        let m2 = dot(atn[k], atn[k]);
        let bvec: [f64; 3] = std::array::from_fn(|i| atn[k][i] / m2);
        n7v[k] = dot(bvec, ju_eta[k]) - dot(n, ju_id[k]) + lam0 * dot(bvec, jaux_eta[k])
            + x.kappa * (dot(bvec, jaux_eta[k]) - dot(n, jaux_id[k]))
            - dot(nhat[k], quart_int) / (4.0 * PI)
            + dot(std::array::from_fn(|i| n[i] - nhat[k][i]), lin_int) / (4.0 * PI)
            - prm.rho_tilde * (1.0 + eta_v[k]) * n[2];
    }
    let n4 = TangentField::from_values(sp, b, &n4v);
    let a1 = integral_vec(disc, &n5v)[2];
    let n6v: Vec<f64> = eta_v.iter().map(|e| -(e * e + e * e * e / 3.0)).collect();
    let a2 = sp.grid.integrate(&n6v);
    let gh = curvature_nonlinear_gh(sp, &x.eta)?;
    let h3 = SphereField { band: b, coeffs: sp.analyze(&n7v, b) }.axpy(prm.sigma, &gh.with_band(b));
    Ok(YElement { f: n1, g: n2, h1: n3, h2: n4, a1, a2, h3 })
}

/// Normal component of the assembled tangential row, before projection.
pub fn tangential_leakage(ctx: &DropContext, y: &YElement) -> f64 {
    let sp = &ctx.disc().sphere;
    let v = y.h2.values(sp);
    v.iter().zip(&sp.grid.normal).map(|(x, n)| dot(*x, *n).abs()).fold(0.0, f64::max)
}

/// Per-component `X`-norm surrogate.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct XNorm {
    /// `|λ₀|^{1/2}‖u‖ + |λ₀|^{1/4}‖∇u‖ + ‖(Div T(u,p), Div u)‖`.
    pub velocity: f64,
    pub pressure: f64,
    pub kappa: f64,
    /// `H^{5/2}` surrogate of `η`.
    pub eta: f64,
}

impl XNorm {
    pub fn total(&self) -> f64 {
        self.velocity + self.pressure + self.kappa + self.eta
    }
}

/// Sobolev index of the `η` component of the `X` norm.
pub const ETA_NORM_INDEX: f64 = 2.5;

/// `X`-norm surrogate with the `λ₀` weights of the velocity component.
pub fn norm_x(ctx: &DropContext, x: &DropState) -> XNorm {
    let disc = ctx.disc();
    let lam = ctx.lambda0.abs();
    let grad = x.u.gradient_grid(disc);
    let g2: GridScalar = grad
        .iter()
        .map(|sh| sh.iter().map(|m| m.iter().flatten().map(|v| v * v).sum::<f64>()).collect())
        .collect();
    let (f, g) = stokes_operator(disc, ctx.params(), &x.u, &x.p);
    XNorm {
        velocity: lam.sqrt() * x.u.l2(disc) + lam.powf(0.25) * disc.integrate(&g2).sqrt() + f.l2(disc) + g.l2(disc),
        pressure: x.p.l2(disc),
        kappa: x.kappa.abs(),
        eta: x.eta.sobolev_norm(ETA_NORM_INDEX),
    }
}

/// `Y`-norm surrogate: sum of the row norms with Sobolev weights on the sphere rows.
pub fn norm_y(ctx: &DropContext, y: &YElement) -> f64 {
    let disc = ctx.disc();
    y.f.l2(disc) + y.g.l2(disc) + y.h1.sobolev_norm(1.5) + y.h2.l2() + y.a1.abs() + y.a2.abs() + y.h3.sobolev_norm(0.5)
}

/// Rejects a `Y` element whose rows 2–3 violate the compatibility constraint.
pub fn check_compatibility(ctx: &DropContext, y: &YElement, tol: f64) -> Result<()> {
    let (volume, surface) = y.compatibility(ctx.disc());
    if (volume - surface).abs() > tol * (1.0 + volume.abs().max(surface.abs())) {
        return Err(Error::Compatibility { volume, surface });
    }
    Ok(())
}

/// Phase of shell `s` (helper for callers that build `Y` data pointwise).
pub fn shell_phase(ctx: &DropContext, s: usize) -> Phase {
    ctx.disc().radial.phase(s)
}

/// `∫⟦T^η(w, 𝔮) A^T n⟧ dS` with `w = u + λU_R`, using the same modal anchoring as `N`.
pub fn interface_force(ctx: &DropContext, x: &DropState) -> Result<[f64; 3]> {
    let disc = ctx.disc();
    let prm = ctx.params();
    let height = HeightFunction::new(&disc.sphere, x.eta.clone())?;
    let map = build_map(disc, &height)?;
    let lam = ctx.lambda0 + x.kappa;
    let tj_u = traction_jump(disc, prm, &x.u, &x.p);
    let (ju, _) = traction_pair(disc, prm, &map, &x.u.gradient_grid(disc), &x.p.to_grid(disc), &jump_grid(disc, &tj_u));
    let (ja, _) = traction_pair(disc, prm, &map, &ctx.trunc_grad, &ctx.trunc_pgrid, &ctx.aux_jump_grid);
    let total: Vec<[f64; 3]> = ju.iter().zip(&ja).map(|(a, b)| std::array::from_fn(|i| a[i] + lam * b[i])).collect();
    Ok(integral_vec(disc, &total))
}
