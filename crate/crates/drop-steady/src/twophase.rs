//! Two-phase Stokes and Oseen problems on `ℝ³ ∖ 𝕊²`.
//!
//! For data `(f, g, h₁, h₂)` the solver finds `(u, p)` with
//!
//! ```text
//! −Div T(u, p) + ρλ₀ ∂₃u = f,   Div u = g        in B₁ and in B₁ᶜ,
//! ⟦u⟧ = 0,  u·n = h₁,  (I − n⊗n)⟦T(u, p) n⟧ = h₂  on 𝕊²,
//! ```
//!
//! where `T = μ(∇u + ∇uᵀ) − pI` and `⟦φ⟧` is the interior trace minus the
//! exterior trace. The Stokes part decouples into independent radial
//! boundary-value problems per harmonic degree, solved by collocation with
//! one LU factorisation per degree. The exterior is closed at `R_∞` by
//! requiring the solution to continue as a decaying homogeneous Stokes flow.
//! The drift term is handled by Richardson iteration.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Dyn, LU};

/// Dense LU factorization of one per-degree block.
type Factor = LU<f64, Dyn, Dyn>;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{poloidal_parity, radial_apply, scalar_parity, Discretization, ScalarField, VectorField};
use crate::radial::{Phase, RadialGrid};
use crate::sphere::{degree_of, idx, ncoef, SphereField, TangentField};

/// Material parameters in nondimensional form (`ρ₁ + ρ₂ = 1`).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhysicalParams {
    pub mu1: f64,
    pub mu2: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub sigma: f64,
    pub rho_tilde: f64,
}

impl PhysicalParams {
    /// Parameters from viscosities, surface tension and density contrast.
    pub fn new(mu1: f64, mu2: f64, sigma: f64, rho_tilde: f64) -> Result<Self> {
        if !(mu1 > 0.0 && mu2 > 0.0 && sigma > 0.0) {
            return Err(Error::Parameter("viscosities and surface tension must be positive".into()));
        }
        if rho_tilde.is_nan() || rho_tilde.abs() >= 1.0 {
            return Err(Error::Parameter(format!("|rho_tilde| = {} must be below 1", rho_tilde.abs())));
        }
        Ok(Self { mu1, mu2, rho1: 0.5 * (1.0 + rho_tilde), rho2: 0.5 * (1.0 - rho_tilde), sigma, rho_tilde })
    }

    /// Same fluids with another density contrast.
    pub fn with_rho_tilde(&self, rho_tilde: f64) -> Result<Self> {
        Self::new(self.mu1, self.mu2, self.sigma, rho_tilde)
    }

    pub fn mu(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Interior => self.mu1,
            Phase::Exterior => self.mu2,
        }
    }

    pub fn rho(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Interior => self.rho1,
            Phase::Exterior => self.rho2,
        }
    }
}

/// Right-hand side of the two-phase problem.
#[derive(Debug, Clone)]
pub struct JumpData {
    pub f: VectorField,
    pub g: ScalarField,
    pub h1: SphereField,
    pub h2: TangentField,
}

impl JumpData {
    pub fn zeros(disc: &Discretization) -> Self {
        let b = disc.lmax;
        Self {
            f: VectorField::zeros(disc, b),
            g: ScalarField::zeros(disc, b),
            h1: SphereField::zeros(b),
            h2: TangentField::zeros(b),
        }
    }

    /// `(∫_{B₁} g dx, ∫_{𝕊²} h₁ dS)`.
    pub fn compatibility(&self, disc: &Discretization) -> (f64, f64) {
        (self.g.integrate_interior(disc), crate::sphere::integrate_sphere(&self.h1))
    }
}

/// Result of a two-phase solve.
#[derive(Debug, Clone)]
pub struct TwoPhaseSolution {
    pub u: VectorField,
    pub p: ScalarField,
    /// Richardson iterations used for the drift term (0 without drift).
    pub iterations: usize,
    /// Largest observed ratio of successive Richardson updates.
    pub contraction: f64,
}

/// One-sided traces at `r = 1`: normal and tangential traction jumps.
#[derive(Debug, Clone)]
pub struct TractionJump {
    /// `n·⟦T n⟧`.
    pub normal: SphereField,
    /// `(I − n⊗n)⟦T n⟧`.
    pub tangential: TangentField,
}

impl TractionJump {
    /// `∫ ⟦T n⟧ dS` as a Cartesian vector.
    pub fn integral(&self) -> [f64; 3] {
        let a = crate::sphere::first_moment(&self.normal);
        let b = self.tangential.integral();
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }
}

/// Tolerance on the compatibility condition `∫_{B₁} g = ∫ h₁`.
pub const COMPATIBILITY_TOL: f64 = 1e-10;
/// Relative update at which the drift iteration stops.
pub const RICHARDSON_TOL: f64 = 1e-11;
const RICHARDSON_MAX: usize = 200;

/// Factorised per-degree Stokes operators for fixed viscosities.
pub struct StokesSolver {
    pub disc: Arc<Discretization>,
    pub params: PhysicalParams,
    poloidal: Vec<Factor>,
    toroidal: Vec<Option<Factor>>,
}

impl std::fmt::Debug for StokesSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StokesSolver").field("lmax", &self.disc.lmax).field("params", &self.params).finish()
    }
}

/// Entries of `d/dr` or `d²/dr²` in the row of shell `s`, as `(shell, coefficient)`.
fn deriv_row(rg: &RadialGrid, s: usize, parity: usize, second: bool) -> Vec<(usize, f64)> {
    let ni = rg.n_int();
    if s < ni {
        let m = if second { &rg.interior.d2[parity] } else { &rg.interior.d1[parity] };
        return (0..ni).map(|j| (j, m[(s, j)])).collect();
    }
    for (e, &off) in rg.exterior.iter().zip(&rg.ext_offset) {
        if s < off + e.len() {
            let m = if second { &e.d2 } else { &e.d1 };
            return (0..e.len()).map(|j| (off + j, m[(s - off, j)])).collect();
        }
    }
    unreachable!("shell {s} outside the grid")
}

/// Two rows annihilating the decaying Lamb modes in `(u_r, v, v', p)` at `r`.
fn decay_annihilator(l: usize, mu: f64, r: f64) -> [[f64; 4]; 2] {
    let lf = l as f64;
    // u_r = −(l+1) r^{−l−2}, v = r^{−l−2}, p = 0
    let p1 = [-(lf + 1.0) * r.powf(-lf - 2.0), r.powf(-lf - 2.0), -(lf + 2.0) * r.powf(-lf - 3.0), 0.0];
    // pressure-carrying decaying mode
    let cu = (lf + 1.0) / (2.0 * mu * (2.0 * lf - 1.0));
    let cv = (2.0 - lf) / (2.0 * mu * lf * (2.0 * lf - 1.0));
    let p2 = [cu * r.powf(-lf), cv * r.powf(-lf), -lf * cv * r.powf(-lf - 1.0), r.powf(-lf - 1.0)];
    let mut basis: Vec<[f64; 4]> = Vec::new();
    for v in [p1, p2] {
        push_orthonormal(&mut basis, v);
    }
    let mut out = Vec::new();
    for e in 0..4 {
        let mut v = [0.0; 4];
        v[e] = 1.0;
        if push_orthonormal(&mut basis, v) {
            out.push(*basis.last().expect("just pushed"));
        }
        if out.len() == 2 {
            break;
        }
    }
    [out[0], out[1]]
}

fn push_orthonormal(basis: &mut Vec<[f64; 4]>, mut v: [f64; 4]) -> bool {
    let n0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..2 {
        for b in basis.iter() {
            let d: f64 = (0..4).map(|i| v[i] * b[i]).sum();
            for i in 0..4 {
                v[i] -= d * b[i];
            }
        }
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 1e-8 * n0 {
        return false;
    }
    for x in v.iter_mut() {
        *x /= n;
    }
    basis.push(v);
    true
}

impl StokesSolver {
    /// Factorises the per-degree operators.
    pub fn new(disc: Arc<Discretization>, params: PhysicalParams) -> Result<Self> {
        let lmax = disc.lmax;
        let built: Vec<(Factor, Option<Factor>)> = (0..=lmax)
            .into_par_iter()
            .map(|l| {
                let a = assemble_poloidal(&disc.radial, &params, l);
                let t = if l >= 1 { Some(assemble_toroidal(&disc.radial, &params, l).lu()) } else { None };
                (a.lu(), t)
            })
            .collect();
        let mut poloidal = Vec::new();
        let mut toroidal = Vec::new();
        for (l, (p, t)) in built.into_iter().enumerate() {
            if !p.is_invertible() || t.as_ref().is_some_and(|t| !t.is_invertible()) {
                return Err(Error::Shape(format!("singular mode matrix at degree {l}")));
            }
            poloidal.push(p);
            toroidal.push(t);
        }
        Ok(Self { disc, params, poloidal, toroidal })
    }

    /// Solves the Stokes problem (no drift) for all modes.
    pub fn solve_stokes(&self, data: &JumpData) -> Result<(VectorField, ScalarField)> {
        let (vol, surf) = data.compatibility(&self.disc);
        if (vol - surf).abs() > COMPATIBILITY_TOL * (1.0 + vol.abs().max(surf.abs())) {
            return Err(Error::Compatibility { volume: vol, surface: surf });
        }
        Ok(self.solve_stokes_unchecked(data))
    }

    /// Stokes solve without the compatibility check.
    pub fn solve_stokes_unchecked(&self, data: &JumpData) -> (VectorField, ScalarField) {
        let disc = &self.disc;
        let b = disc.lmax;
        let ns = disc.n_shells();
        let f = data.f.with_band(b);
        let g = data.g.with_band(b);
        let h1 = data.h1.with_band(b);
        let h2v = pad(&data.h2.v, data.h2.band, b);
        let h2w = pad(&data.h2.w, data.h2.band, b);
        let sols: Vec<(usize, Vec<f64>, Option<Vec<f64>>)> = (0..ncoef(b))
            .into_par_iter()
            .map(|k| {
                let (l, _) = crate::sphere::lm_of(k);
                let mut rhs = DVector::zeros(3 * ns);
                for s in 0..ns {
                    rhs[3 * s] = g.c[s][k];
                    rhs[3 * s + 1] = f.ur[s][k];
                    rhs[3 * s + 2] = if l == 0 { 0.0 } else { f.v[s][k] };
                }
                poloidal_bc_rhs(&disc.radial, l, h1.coeffs[k], h2v[k], &mut rhs);
                let x = self.poloidal[l].solve(&rhs).expect("factorised mode matrix");
                let tor = self.toroidal[l].as_ref().map(|lu| {
                    let mut rt = DVector::zeros(ns);
                    for s in 0..ns {
                        rt[s] = f.w[s][k];
                    }
                    toroidal_bc_rhs(&disc.radial, h2w[k], &mut rt);
                    lu.solve(&rt).expect("factorised mode matrix").iter().copied().collect()
                });
                (k, x.iter().copied().collect(), tor)
            })
            .collect();
        let mut u = VectorField::zeros(disc, b);
        let mut p = ScalarField::zeros(disc, b);
        for (k, x, t) in sols {
            for s in 0..ns {
                u.ur[s][k] = x[3 * s];
                u.v[s][k] = x[3 * s + 1];
                p.c[s][k] = x[3 * s + 2];
                if let Some(t) = &t {
                    u.w[s][k] = t[s];
                }
            }
        }
        (u, p)
    }

    /// Solves the two-phase problem with drift `ρλ₀∂₃u` by Richardson iteration.
    pub fn solve(&self, data: &JumpData, lambda0: f64) -> Result<TwoPhaseSolution> {
        let (mut u, mut p) = self.solve_stokes(data)?;
        if lambda0 == 0.0 {
            return Ok(TwoPhaseSolution { u, p, iterations: 0, contraction: 0.0 });
        }
        let disc = &self.disc;
        let mut prev_update = f64::INFINITY;
        let mut worst: f64 = 0.0;
        let mut growth = 0;
        for it in 1..=RICHARDSON_MAX {
            let drift = self.drift(&u, lambda0);
            let mut d = data.clone();
            d.f = data.f.with_band(disc.lmax).axpy(-1.0, &drift);
            let (un, pn) = self.solve_stokes_unchecked(&d);
            let update = un.axpy(-1.0, &u).l2(disc);
            let size = un.l2(disc).max(f64::MIN_POSITIVE);
            if prev_update.is_finite() && prev_update > 0.0 {
                let ratio = update / prev_update;
                worst = worst.max(ratio);
                if ratio >= 1.0 {
                    growth += 1;
                    if growth >= 3 {
                        return Err(Error::Richardson { ratio });
                    }
                } else {
                    growth = 0;
                }
            }
            prev_update = update;
            u = un;
            p = pn;
            if update <= RICHARDSON_TOL * size {
                return Ok(TwoPhaseSolution { u, p, iterations: it, contraction: worst });
            }
        }
        Err(Error::Richardson { ratio: worst })
    }

    /// `ρλ₀∂₃u` with the phasewise density.
    pub fn drift(&self, u: &VectorField, lambda0: f64) -> VectorField {
        let disc = &self.disc;
        let mut d = u.dz(disc);
        for s in 0..disc.n_shells() {
            let c = self.params.rho(disc.radial.phase(s)) * lambda0;
            for x in d.ur[s].iter_mut().chain(d.v[s].iter_mut()).chain(d.w[s].iter_mut()) {
                *x *= c;
            }
        }
        d
    }

    /// `(−Div T(u, p), Div u)` evaluated at every node.
    pub fn apply_stokes(&self, u: &VectorField, p: &ScalarField) -> (VectorField, ScalarField) {
        stokes_operator(&self.disc, &self.params, u, p)
    }

    /// Traction jump `⟦T(u, p) n⟧` on the unit sphere.
    pub fn traction_jump(&self, u: &VectorField, p: &ScalarField) -> TractionJump {
        traction_jump(&self.disc, &self.params, u, p)
    }
}

fn pad(c: &[f64], from: usize, to: usize) -> Vec<f64> {
    let mut o = vec![0.0; ncoef(to)];
    let n = ncoef(from.min(to));
    o[..n].copy_from_slice(&c[..n]);
    o
}

/// Poloidal collocation matrix of degree `l`; unknowns `(u_r, v, p)` per shell.
fn assemble_poloidal(rg: &RadialGrid, prm: &PhysicalParams, l: usize) -> DMatrix<f64> {
    let ns = rg.n_shells();
    let ni = rg.n_int();
    let n = 3 * ns;
    let mut a = DMatrix::zeros(n, n);
    let lf = (l * (l + 1)) as f64;
    let pu = poloidal_parity(l);
    let pp = scalar_parity(l);
    let (iu, iv, ip) = (|s: usize| 3 * s, |s: usize| 3 * s + 1, |s: usize| 3 * s + 2);
    for s in 0..ns {
        let r = rg.r[s];
        let mu = prm.mu(rg.phase(s));
        let d1 = deriv_row(rg, s, pu, false);
        let d2 = deriv_row(rg, s, pu, true);
        let dp = deriv_row(rg, s, pp, false);
        // continuity: u_r' + 2u_r/r − L v/r
        let row = 3 * s;
        for &(j, c) in &d1 {
            a[(row, iu(j))] += c;
        }
        a[(row, iu(s))] += 2.0 / r;
        a[(row, iv(s))] += -lf / r;
        // radial momentum
        let row = 3 * s + 1;
        for &(j, c) in &d2 {
            a[(row, iu(j))] += -2.0 * mu * c;
        }
        for &(j, c) in &d1 {
            a[(row, iu(j))] += -4.0 * mu * c / r;
            a[(row, iv(j))] += mu * lf * c / r;
        }
        a[(row, iu(s))] += mu * (lf + 4.0) / (r * r);
        a[(row, iv(s))] += -3.0 * mu * lf / (r * r);
        for &(j, c) in &dp {
            a[(row, ip(j))] += c;
        }
        // tangential momentum
        let row = 3 * s + 2;
        if l == 0 {
            a[(row, iv(s))] = 1.0;
            continue;
        }
        for &(j, c) in &d2 {
            a[(row, iv(j))] += -mu * c;
        }
        for &(j, c) in &d1 {
            a[(row, iv(j))] += -2.0 * mu * c / r;
            a[(row, iu(j))] += -mu * c / r;
        }
        a[(row, iv(s))] += 2.0 * mu * lf / (r * r);
        a[(row, iu(s))] += -4.0 * mu / (r * r);
        a[(row, ip(s))] += 1.0 / r;
    }
    let clear = |a: &mut DMatrix<f64>, row: usize| a.row_mut(row).fill(0.0);
    let se = ni;
    let last = ns - 1;
    if l == 0 {
        // interior pressure mean replaces the radial momentum row on r = 1
        clear(&mut a, 1);
        for (j, w) in rg.interior.w_even.iter().enumerate() {
            a[(1, ip(j))] = *w;
        }
        for (e, (el, &off)) in rg.exterior.iter().zip(&rg.ext_offset).enumerate() {
            let first = off;
            let lastn = off + el.len() - 1;
            clear(&mut a, 3 * first);
            a[(3 * first, iu(first))] = 1.0;
            if e > 0 {
                a[(3 * first, iu(first - 1))] = -1.0;
            }
            clear(&mut a, 3 * lastn + 1);
            a[(3 * lastn + 1, ip(lastn))] = 1.0;
            if lastn != last {
                a[(3 * lastn + 1, ip(lastn + 1))] = -1.0;
            }
        }
        return a;
    }
    // interface: interior side
    clear(&mut a, 1);
    a[(1, iu(0))] = 1.0;
    clear(&mut a, 2);
    a[(2, iv(0))] = 1.0;
    a[(2, iv(se))] = -1.0;
    // interface: exterior side
    clear(&mut a, 3 * se + 1);
    a[(3 * se + 1, iu(se))] = 1.0;
    let row = 3 * se + 2;
    clear(&mut a, row);
    for (s, mu) in [(0usize, prm.mu1), (se, -prm.mu2)] {
        for (j, c) in deriv_row(rg, s, pu, false) {
            a[(row, iv(j))] += mu * c;
        }
        a[(row, iv(s))] += -mu;
        a[(row, iu(s))] += mu;
    }
    // element junctions
    for w in rg.ext_offset.windows(2) {
        let (sr, sl) = (w[1], w[1] - 1);
        clear(&mut a, 3 * sl + 1);
        a[(3 * sl + 1, iu(sl))] = 1.0;
        a[(3 * sl + 1, iu(sr))] = -1.0;
        clear(&mut a, 3 * sl + 2);
        a[(3 * sl + 2, iv(sl))] = 1.0;
        a[(3 * sl + 2, iv(sr))] = -1.0;
        clear(&mut a, 3 * sr + 1);
        for (j, c) in deriv_row(rg, sl, pu, false) {
            a[(3 * sr + 1, iv(j))] += c;
        }
        for (j, c) in deriv_row(rg, sr, pu, false) {
            a[(3 * sr + 1, iv(j))] -= c;
        }
        clear(&mut a, 3 * sr + 2);
        a[(3 * sr + 2, ip(sl))] = 1.0;
        a[(3 * sr + 2, ip(sr))] = -1.0;
    }
    // decay at R_∞
    let ann = decay_annihilator(l, prm.mu2, rg.r[last]);
    let dv = deriv_row(rg, last, pu, false);
    for (q, row) in [3 * last + 1, 3 * last + 2].into_iter().enumerate() {
        clear(&mut a, row);
        let c = ann[q];
        a[(row, iu(last))] += c[0];
        a[(row, iv(last))] += c[1];
        for &(j, d) in &dv {
            a[(row, iv(j))] += c[2] * d;
        }
        a[(row, ip(last))] += c[3];
    }
    a
}

/// Inserts boundary data into the poloidal right-hand side.
fn poloidal_bc_rhs(rg: &RadialGrid, l: usize, h1: f64, h2v: f64, rhs: &mut DVector<f64>) {
    let ns = rg.n_shells();
    let se = rg.n_int();
    if l == 0 {
        rhs[1] = 0.0;
        for (e, (el, &off)) in rg.exterior.iter().zip(&rg.ext_offset).enumerate() {
            rhs[3 * off] = if e == 0 { h1 } else { 0.0 };
            rhs[3 * (off + el.len() - 1) + 1] = 0.0;
        }
        return;
    }
    rhs[1] = h1;
    rhs[2] = 0.0;
    rhs[3 * se + 1] = h1;
    rhs[3 * se + 2] = h2v;
    for w in rg.ext_offset.windows(2) {
        let (sr, sl) = (w[1], w[1] - 1);
        for row in [3 * sl + 1, 3 * sl + 2, 3 * sr + 1, 3 * sr + 2] {
            rhs[row] = 0.0;
        }
    }
    rhs[3 * (ns - 1) + 1] = 0.0;
    rhs[3 * (ns - 1) + 2] = 0.0;
}

/// Toroidal collocation matrix of degree `l ≥ 1`.
fn assemble_toroidal(rg: &RadialGrid, prm: &PhysicalParams, l: usize) -> DMatrix<f64> {
    let ns = rg.n_shells();
    let se = rg.n_int();
    let lf = (l * (l + 1)) as f64;
    let pw = scalar_parity(l);
    let mut a = DMatrix::zeros(ns, ns);
    for s in 0..ns {
        let r = rg.r[s];
        let mu = prm.mu(rg.phase(s));
        for (j, c) in deriv_row(rg, s, pw, true) {
            a[(s, j)] += -mu * c;
        }
        for (j, c) in deriv_row(rg, s, pw, false) {
            a[(s, j)] += -2.0 * mu * c / r;
        }
        a[(s, s)] += mu * lf / (r * r);
    }
    let clear = |a: &mut DMatrix<f64>, row: usize| a.row_mut(row).fill(0.0);
    clear(&mut a, 0);
    a[(0, 0)] = 1.0;
    a[(0, se)] = -1.0;
    clear(&mut a, se);
    for (s, mu) in [(0usize, prm.mu1), (se, -prm.mu2)] {
        for (j, c) in deriv_row(rg, s, pw, false) {
            a[(se, j)] += mu * c;
        }
        a[(se, s)] += -mu;
    }
    for w in rg.ext_offset.windows(2) {
        let (sr, sl) = (w[1], w[1] - 1);
        clear(&mut a, sl);
        a[(sl, sl)] = 1.0;
        a[(sl, sr)] = -1.0;
        clear(&mut a, sr);
        for (j, c) in deriv_row(rg, sl, pw, false) {
            a[(sr, j)] += c;
        }
        for (j, c) in deriv_row(rg, sr, pw, false) {
            a[(sr, j)] -= c;
        }
    }
    let last = ns - 1;
    clear(&mut a, last);
    for (j, c) in deriv_row(rg, last, pw, false) {
        a[(last, j)] += c;
    }
    a[(last, last)] += (l as f64 + 1.0) / rg.r[last];
    a
}

/// Rows of the collocation system that enforce the field equations, per
/// shell for degree `l`: `[continuity, radial, poloidal, toroidal]`.
///
/// Rows replaced by interface, junction and decay conditions are `false`;
/// the solver ignores the data there. Mirrors the assembly above.
pub fn collocated_rows(rg: &RadialGrid, l: usize) -> Vec<[bool; 4]> {
    let ns = rg.n_shells();
    let se = rg.n_int();
    let last = ns - 1;
    let mut m = vec![[true, true, l > 0, l > 0]; ns];
    if l == 0 {
        m[0][1] = false;
        for (el, &off) in rg.exterior.iter().zip(&rg.ext_offset) {
            m[off][0] = false;
            m[off + el.len() - 1][1] = false;
        }
        return m;
    }
    let mut cut = vec![0, se, last];
    for w in rg.ext_offset.windows(2) {
        cut.extend([w[1] - 1, w[1]]);
    }
    for s in cut {
        m[s][1] = false;
        m[s][2] = false;
        m[s][3] = false;
    }
    m
}

/// Zeroes the data entries of `(f, g)` that the collocation system does not enforce.
pub fn restrict_to_collocation(disc: &Discretization, f: &VectorField, g: &ScalarField) -> (VectorField, ScalarField) {
    let (mut f, mut g) = (f.clone(), g.clone());
    for l in 0..=f.band.max(g.band) {
        let mask = collocated_rows(&disc.radial, l);
        for (s, m) in mask.iter().enumerate() {
            for k in idx(l, -(l as i64))..=idx(l, l as i64) {
                if l <= g.band && !m[0] {
                    g.c[s][k] = 0.0;
                }
                if l <= f.band {
                    if !m[1] {
                        f.ur[s][k] = 0.0;
                    }
                    if !m[2] {
                        f.v[s][k] = 0.0;
                    }
                    if !m[3] {
                        f.w[s][k] = 0.0;
                    }
                }
            }
        }
    }
    (f, g)
}

fn toroidal_bc_rhs(rg: &RadialGrid, h2w: f64, rhs: &mut DVector<f64>) {
    let se = rg.n_int();
    rhs[0] = 0.0;
    rhs[se] = h2w;
    for w in rg.ext_offset.windows(2) {
        rhs[w[1]] = 0.0;
        rhs[w[1] - 1] = 0.0;
    }
    let last = rg.n_shells() - 1;
    rhs[last] = 0.0;
}

/// `(−Div T(u, p), Div u)` evaluated pointwise from the mode formulas.
pub fn stokes_operator(
    disc: &Discretization,
    prm: &PhysicalParams,
    u: &VectorField,
    p: &ScalarField,
) -> (VectorField, ScalarField) {
    let b = u.band;
    let rg = &disc.radial;
    let p = p.with_band(b);
    let ur1 = radial_apply(rg, &u.ur, b, poloidal_parity, false);
    let ur2 = radial_apply(rg, &u.ur, b, poloidal_parity, true);
    let v1 = radial_apply(rg, &u.v, b, poloidal_parity, false);
    let v2 = radial_apply(rg, &u.v, b, poloidal_parity, true);
    let w1 = radial_apply(rg, &u.w, b, scalar_parity, false);
    let w2 = radial_apply(rg, &u.w, b, scalar_parity, true);
    let p1 = radial_apply(rg, &p.c, b, scalar_parity, false);
    let mut f = VectorField::zeros(disc, b);
    let mut g = ScalarField::zeros(disc, b);
    for s in 0..disc.n_shells() {
        let r = rg.r[s];
        let mu = prm.mu(rg.phase(s));
        for k in 0..ncoef(b) {
            let lf = {
                let l = degree_of(k) as f64;
                l * (l + 1.0)
            };
            let (a, da, dda) = (u.ur[s][k], ur1[s][k], ur2[s][k]);
            let (v, dv, ddv) = (u.v[s][k], v1[s][k], v2[s][k]);
            g.c[s][k] = da + 2.0 * a / r - lf * v / r;
            f.ur[s][k] = -mu * (2.0 * dda + 4.0 * da / r - (lf + 4.0) * a / (r * r) + 3.0 * lf * v / (r * r) - lf * dv / r)
                + p1[s][k];
            if k > 0 {
                f.v[s][k] = -mu * (ddv + 2.0 * dv / r - 2.0 * lf * v / (r * r) + da / r + 4.0 * a / (r * r))
                    + p.c[s][k] / r;
                let w = u.w[s][k];
                f.w[s][k] = -mu * (w2[s][k] + 2.0 * w1[s][k] / r - lf * w / (r * r));
            }
        }
    }
    (f, g)
}

/// One-sided tractions at `r = 1` for interior (`Phase::Interior`) or exterior side:
/// `(normal, tangential v, tangential w)` coefficient vectors.
pub fn traction_side(
    disc: &Discretization,
    prm: &PhysicalParams,
    u: &VectorField,
    p: &ScalarField,
    phase: Phase,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let rg = &disc.radial;
    let b = u.band;
    let s = match phase {
        Phase::Interior => rg.inner_boundary(),
        Phase::Exterior => rg.outer_boundary(),
    };
    let mu = prm.mu(phase);
    let nc = ncoef(b);
    let (mut nn, mut tv, mut tw) = (vec![0.0; nc], vec![0.0; nc], vec![0.0; nc]);
    for k in 0..nc {
        let l = degree_of(k);
        let row = |par: usize, data: &Vec<Vec<f64>>| -> f64 {
            deriv_row(rg, s, par, false).iter().map(|&(j, c)| c * data[j][k]).sum()
        };
        let dur = row(poloidal_parity(l), &u.ur);
        let dv = row(poloidal_parity(l), &u.v);
        let dw = row(scalar_parity(l), &u.w);
        let pk = if k < p.c[s].len() { p.c[s][k] } else { 0.0 };
        nn[k] = -pk + 2.0 * mu * dur;
        if k > 0 {
            tv[k] = mu * (dv - u.v[s][k] + u.ur[s][k]);
            tw[k] = mu * (dw - u.w[s][k]);
        }
    }
    (nn, tv, tw)
}

/// `⟦T(u, p) n⟧` on the unit sphere, interior minus exterior.
pub fn traction_jump(disc: &Discretization, prm: &PhysicalParams, u: &VectorField, p: &ScalarField) -> TractionJump {
    let (ni, vi, wi) = traction_side(disc, prm, u, p, Phase::Interior);
    let (ne, ve, we) = traction_side(disc, prm, u, p, Phase::Exterior);
    let sub = |a: Vec<f64>, b: Vec<f64>| -> Vec<f64> { a.iter().zip(&b).map(|(x, y)| x - y).collect() };
    TractionJump {
        normal: SphereField { band: u.band, coeffs: sub(ni, ne) },
        tangential: TangentField { band: u.band, v: sub(vi, ve), w: sub(wi, we) },
    }
}

/// `∫ ⟦T(u, p) n⟧ dS`.
pub fn drag_integral(disc: &Discretization, prm: &PhysicalParams, u: &VectorField, p: &ScalarField) -> [f64; 3] {
    traction_jump(disc, prm, u, p).integral()
}

/// Viscous dissipation `∫ 2μ|S(u)|² dx` inside `B_{R_∞}` plus the exact
/// contribution of the decaying Stokes continuation beyond `R_∞`.
pub fn dissipation(disc: &Discretization, prm: &PhysicalParams, u: &VectorField, p: &ScalarField) -> f64 {
    let grad = u.gradient_grid(disc);
    let rg = &disc.radial;
    let g: Vec<Vec<f64>> = grad
        .iter()
        .enumerate()
        .map(|(s, sh)| {
            let mu = prm.mu(rg.phase(s));
            sh.iter()
                .map(|m| {
                    let mut acc = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            let e = 0.5 * (m[i][j] + m[j][i]);
                            acc += e * e;
                        }
                    }
                    2.0 * mu * acc
                })
                .collect()
        })
        .collect();
    disc.integrate(&g) + far_field_dissipation(disc, prm, u, p)
}

/// Dissipation of the decaying Stokes continuation outside `B_{R_∞}`:
/// `−∫_{|x| = R_∞} u·T(u, p) x̂ dS`.
pub fn far_field_dissipation(disc: &Discretization, prm: &PhysicalParams, u: &VectorField, p: &ScalarField) -> f64 {
    let rg = &disc.radial;
    let s = rg.n_shells() - 1;
    let r = rg.r[s];
    let mu = prm.mu2;
    let b = u.band;
    let mut acc = 0.0;
    for k in 0..ncoef(b) {
        let l = degree_of(k);
        let lf = (l * (l + 1)) as f64;
        let d = |par: usize, data: &Vec<Vec<f64>>| -> f64 {
            deriv_row(rg, s, par, false).iter().map(|&(j, c)| c * data[j][k]).sum()
        };
        let (a, v, w) = (u.ur[s][k], u.v[s][k], u.w[s][k]);
        let pk = p.c[s].get(k).copied().unwrap_or(0.0);
        acc += a * (-pk + 2.0 * mu * d(poloidal_parity(l), &u.ur))
            + lf * v * mu * (d(poloidal_parity(l), &u.v) - v / r + a / r)
            + lf * w * mu * (d(scalar_parity(l), &u.w) - w / r);
    }
    -r * r * acc
}

/// Auxiliary field: the two-phase Stokes flow past the unit sphere with
/// `U·n = −e₃·n`, no tangential stress jump, and interior pressure shifted
/// so that `∫ n·⟦T(U, 𝔓) n⟧ dS = 0`.
pub fn auxiliary_field(solver: &StokesSolver) -> Result<(VectorField, ScalarField)> {
    let disc = &solver.disc;
    let mut data = JumpData::zeros(disc);
    data.h1 = SphereField::normal_component(disc.lmax, 2).scale(-1.0);
    let (u, mut p) = solver.solve_stokes(&data)?;
    let tj = solver.traction_jump(&u, &p);
    let c = crate::sphere::integrate_sphere(&tj.normal) / (4.0 * PI);
    add_interior_constant(disc, &mut p, c);
    Ok((u, p))
}

/// Adds the constant `c` to the pressure inside the drop.
pub fn add_interior_constant(disc: &Discretization, p: &mut ScalarField, c: f64) {
    for s in 0..disc.radial.n_int() {
        p.c[s][idx(0, 0)] += c * (4.0 * PI).sqrt();
    }
}

/// `λ₀ = ρ̃ (4π/3) / (e₃·∫⟦T(U, 𝔓) n⟧ dS)`.
pub fn lambda0(rho_tilde: f64, drag_z: f64) -> f64 {
    rho_tilde * (4.0 * PI / 3.0) / drag_z
}

/// Cutoff profile: 1 on `[0, a]`, 0 beyond `b`, quintic smoothstep between.
pub fn cutoff(s: f64, a: f64, b: f64) -> f64 {
    if s <= a {
        1.0
    } else if s >= b {
        0.0
    } else {
        let t = (s - a) / (b - a);
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// `(χ_R U, χ_R 𝔓)` with `χ_R = 1` on `B_R` and `0` outside `B_{2R}`.
pub fn truncate_field(
    disc: &Discretization,
    u: &VectorField,
    p: &ScalarField,
    r_cut: f64,
) -> Result<(VectorField, ScalarField)> {
    let r_inf = disc.radial.r_inf();
    if !(r_cut > 4.0 && r_cut <= r_inf / 2.0 + 1e-12) {
        return Err(Error::Parameter(format!("truncation radius {r_cut} outside (4, {}]", r_inf / 2.0)));
    }
    let mut ut = u.clone();
    let mut pt = p.clone();
    for s in 0..disc.n_shells() {
        let c = cutoff(disc.radial.r[s], r_cut, 2.0 * r_cut);
        for x in ut.ur[s].iter_mut().chain(ut.v[s].iter_mut()).chain(ut.w[s].iter_mut()).chain(pt.c[s].iter_mut()) {
            *x *= c;
        }
    }
    Ok((ut, pt))
}

/// `Ein(z) = ∫₀^z (1 − e^{−t})/t dt` and its first two derivatives.
fn ein(z: f64) -> (f64, f64, f64) {
    if z.abs() < 0.5 {
        // Ein'(z) = Σ (−z)^n/(n+1)!, Ein(z) = Σ (−z)^n z/((n+1)(n+1)!)
        let (mut e0, mut e1, mut e2) = (0.0, 0.0, 0.0);
        let mut fact = 1.0;
        for n in 0..30i32 {
            fact *= (n + 1) as f64;
            let t = (-z).powi(n) / fact;
            e1 += t;
            e0 += t * z / (n + 1) as f64;
            if n >= 1 {
                e2 -= n as f64 * (-z).powi(n - 1) / fact;
            }
        }
        (e0, e1, e2)
    } else {
        let ez = (-z).exp();
        let e1 = (1.0 - ez) / z;
        let e2 = (ez * (1.0 + z) - 1.0) / (z * z);
        // Ein(z) = γ + ln z + E₁(z)
        (0.577_215_664_901_532_9 + z.ln() + expint_e1(z), e1, e2)
    }
}

/// Exponential integral `E₁(z)` for `z > 0`.
fn expint_e1(z: f64) -> f64 {
    if z < 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -z / k as f64;
            sum -= term / k as f64;
        }
        -0.577_215_664_901_532_9 - z.ln() + sum
    } else {
        // continued fraction (modified Lentz)
        let mut b = z + 1.0;
        let mut c = 1.0 / f64::MIN_POSITIVE;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..200 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-z).exp()
    }
}

/// Oseen fundamental tensor for `−μΔu + ρλ∂₃u + ∇p = δ e_j`, column `j`
/// of the returned matrix. Requires `x ≠ 0`, `λ ≠ 0`.
pub fn oseenlet_with(x: [f64; 3], lambda: f64, mu: f64, rho: f64) -> Result<[[f64; 3]; 3]> {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if r == 0.0 {
        return Err(Error::Parameter("oseenlet evaluated at the origin".into()));
    }
    let c = rho * lambda;
    if c == 0.0 {
        return Err(Error::Parameter("oseenlet needs a nonzero drift".into()));
    }
    let k = c / (2.0 * mu);
    let sgn = k.signum();
    let ka = k.abs();
    let z = ka * (r - sgn * x[2]);
    let (_, e1, e2) = ein(z);
    let pre = 1.0 / (4.0 * PI * c.abs());
    let zi: [f64; 3] = std::array::from_fn(|i| ka * (x[i] / r - if i == 2 { sgn } else { 0.0 }));
    let lap = pre * (e2 * 2.0 * ka * ka * (1.0 - sgn * x[2] / r) + e1 * 2.0 * ka / r);
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let d = if i == j { 1.0 } else { 0.0 };
            let zij = ka * (d / r - x[i] * x[j] / (r * r * r));
            g[i][j] = d * lap - pre * (e2 * zi[i] * zi[j] + e1 * zij);
        }
    }
    Ok(g)
}

/// Oseen fundamental tensor with unit viscosity and density.
pub fn oseenlet(x: [f64; 3], lambda: f64) -> Result<[[f64; 3]; 3]> {
    oseenlet_with(x, lambda, 1.0, 1.0)
}

/// Pressure vector of the fundamental solution, `x / (4π|x|³)`.
pub fn oseenlet_pressure(x: [f64; 3]) -> [f64; 3] {
    let r3 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).powf(1.5);
    [x[0] / (4.0 * PI * r3), x[1] / (4.0 * PI * r3), x[2] / (4.0 * PI * r3)]
}

/// Stokeslet `(8πμ|x|)^{-1}(I + x⊗x/|x|²)`.
pub fn stokeslet(x: [f64; 3], mu: f64) -> [[f64; 3]; 3] {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let d = if i == j { 1.0 } else { 0.0 };
            (d + x[i] * x[j] / (r * r)) / (8.0 * PI * mu * r)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lamb_modes_solve_homogeneous_stokes() {
        let (l, mu) = (3usize, 1.7);
        let lf = (l * (l + 1)) as f64;
        let lv = l as f64;
        let cu = (lv + 1.0) / (2.0 * mu * (2.0 * lv - 1.0));
        let cv = (2.0 - lv) / (2.0 * mu * lv * (2.0 * lv - 1.0));
        let r: f64 = 2.3;
        // pressure-carrying mode: u_r = cu r^-l, v = cv r^-l, p = r^-l-1
        let a = cu * r.powf(-lv);
        let da = -lv * cu * r.powf(-lv - 1.0);
        let dda = lv * (lv + 1.0) * cu * r.powf(-lv - 2.0);
        let v = cv * r.powf(-lv);
        let dv = -lv * cv * r.powf(-lv - 1.0);
        let ddv = lv * (lv + 1.0) * cv * r.powf(-lv - 2.0);
        let p = r.powf(-lv - 1.0);
        let dp = -(lv + 1.0) * r.powf(-lv - 2.0);
        let ed = da + 2.0 * a / r - lf * v / r;
        let er = -mu * (2.0 * dda + 4.0 * da / r - (lf + 4.0) * a / (r * r) + 3.0 * lf * v / (r * r) - lf * dv / r) + dp;
        let ev = -mu * (ddv + 2.0 * dv / r - 2.0 * lf * v / (r * r) + da / r + 4.0 * a / (r * r)) + p / r;
        assert!(ed.abs() < 1e-12 && er.abs() < 1e-12 && ev.abs() < 1e-12, "{ed} {er} {ev}");
    }

    #[test]
    fn ein_branches_agree() {
        for z in [0.49, 0.51] {
            let (a, b, c) = ein(z);
            let ez = (-z).exp();
            assert!((b - (1.0 - ez) / z).abs() < 1e-13);
            assert!((c - (ez * (1.0 + z) - 1.0) / (z * z)).abs() < 1e-12);
            let big = 0.577_215_664_901_532_9 + z.ln() + expint_e1(z);
            assert!((a - big).abs() < 1e-13, "{a} {big}");
        }
    }
}
