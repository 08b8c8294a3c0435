//! Fixed-point iteration `x ↦ 𝓛⁻¹ N(x)` and diagnostics of the converged drop.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Discretization, GridScalar, ScalarField, VectorField};
use crate::geometry::{build_map, drop_volume, HeightFunction, UNIT_BALL_VOLUME};
use crate::operators::{apply_l, assemble_n, interface_force, invert_l, norm_x, norm_y, DropContext, DropState, XNorm};
use crate::radial::{Phase, RadialGrid, DEFAULT_BREAKPOINTS};
use crate::sphere::{lm_of, SphereField, TangentField};
use crate::twophase::{auxiliary_field, oseenlet_with, stokes_operator, truncate_field, PhysicalParams, StokesSolver};

/// Consecutive non-contracting steps tolerated before aborting.
pub const MAX_GROWTH_STEPS: usize = 3;

/// Parameters of one steady-drop solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Normalized density difference `ρ̃`.
    pub rho_tilde: f64,
    /// Ball exponent: `‖x‖ ≤ |ρ̃|^α`, truncation `R = |ρ̃|^{−α}`.
    pub alpha: f64,
    /// Nominal Lebesgue exponents of the norm surrogates.
    pub q: f64,
    pub r: f64,
    pub max_iters: usize,
    /// Stop once the `X`-norm of the update falls below this value.
    pub tol_fixed_point: f64,
    /// Spherical-harmonic band limit.
    pub lmax: usize,
    /// Interior and per-element exterior radial resolution (defaults scale with `lmax`).
    pub n_int: Option<usize>,
    pub n_ext: Option<usize>,
    pub mu1: f64,
    pub mu2: f64,
    pub sigma: f64,
    /// Abort once an iterate leaves the ball `‖x‖_X ≤ |ρ̃|^α`.
    pub enforce_ball: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            rho_tilde: 1e-3,
            alpha: 0.8,
            q: 4.0 / 3.0,
            r: 4.0,
            max_iters: 60,
            tol_fixed_point: 1e-9,
            lmax: 16,
            n_int: None,
            n_ext: None,
            mu1: 1.0,
            mu2: 1.0,
            sigma: 1.0,
            enforce_ball: true,
        }
    }
}

impl SolveConfig {
    /// Checks the exponent ranges and positivity of the physical constants.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.alpha > 0.75 && self.alpha < 1.0) {
            return bad(format!("alpha = {} must lie in (3/4, 1)", self.alpha));
        }
        if !(self.q > 1.0 && self.q <= 4.0 / 3.0) {
            return bad(format!("q = {} must lie in (1, 4/3]", self.q));
        }
        if self.r <= 3.0 {
            return bad(format!("r = {} must exceed 3", self.r));
        }
        if !self.rho_tilde.is_finite() || self.rho_tilde.abs() >= 1.0 {
            return bad(format!("rho_tilde = {} must lie in (−1, 1)", self.rho_tilde));
        }
        if self.lmax < 2 || self.max_iters == 0 || !self.tol_fixed_point.is_finite() || self.tol_fixed_point <= 0.0 {
            return bad("lmax ≥ 2, max_iters ≥ 1 and tol_fixed_point > 0 are required".into());
        }
        PhysicalParams::new(self.mu1, self.mu2, self.sigma, self.rho_tilde).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        PhysicalParams::new(self.mu1, self.mu2, self.sigma, self.rho_tilde)
    }

    pub fn discretization(&self) -> Discretization {
        let n_int = self.n_int.unwrap_or(self.lmax / 2 + 12);
        let n_ext = self.n_ext.unwrap_or(16 + self.lmax / 4);
        Discretization::with_radial(self.lmax, RadialGrid::new(n_int, n_ext, &DEFAULT_BREAKPOINTS))
    }

    /// `R(ρ̃) = |ρ̃|^{−α}` clamped into `(4, R_∞/2]`.
    pub fn truncation_radius(&self, r_inf: f64) -> f64 {
        let hi = r_inf / 2.0;
        if self.rho_tilde == 0.0 {
            return hi;
        }
        self.rho_tilde.abs().powf(-self.alpha).clamp(4.0 + 1e-9, hi)
    }
}

/// One fixed-point step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    /// `‖x_{k+1} − x_k‖_X`.
    pub update: f64,
    /// `update_k / update_{k−1}` (NaN on the first step).
    pub ratio: f64,
    /// `‖x_{k+1}‖_X`.
    pub norm: f64,
}

/// Constraint and far-field diagnostics of a converged drop.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `|vol(Ω^{(1)}) − 4π/3|`.
    pub volume_defect: f64,
    /// `∫⟦T^η(w, 𝔮) n⟧ dS` on the reference sphere.
    pub force: [f64; 3],
    /// `|F₃ − ρ̃ 4π/3| / |ρ̃ 4π/3|` (absolute when `ρ̃ = 0`).
    pub force_defect: f64,
    /// Largest `m ≠ 0` coefficient among `u`, `p`, `η`.
    pub axisymmetry_leakage: f64,
    /// Least-squares coefficient of `Γ_Oseen e₃` on the far-field shells.
    pub wake_coefficient: f64,
    /// `(4π/3) ρ̃`.
    pub wake_target: f64,
    /// Log-log slope of the wake-fit remainder.
    pub remainder_slope: f64,
    /// `∫_{Ω^{(1)}} x dx`.
    pub barycenter: [f64; 3],
    /// `λ ≠ 0` whenever `ρ̃ ≠ 0`.
    pub lambda_nonzero: bool,
}

/// Converged fixed point with its history and diagnostics.
#[derive(Debug, Clone)]
pub struct SolutionBundle {
    pub config: SolveConfig,
    pub state: DropState,
    pub lambda0: f64,
    /// `λ = λ₀ + κ`.
    pub lambda: f64,
    pub r_trunc: f64,
    pub history: Vec<IterRecord>,
    pub x_norm: XNorm,
    /// Largest contraction ratio over the informative steps.
    pub contraction: f64,
    /// `‖𝓛(x) − N(x)‖_Y` on the collocated rows.
    pub residual: f64,
    pub report: Diagnostics,
}

/// Physical fields on the reference domain and the mapped node positions.
#[derive(Debug, Clone)]
pub struct PhysicalSolution {
    /// `w = u + λ U_R`, the velocity pulled back by `Φ^η`.
    pub w: VectorField,
    /// `𝔮 = 𝔭 + λ 𝔓_R`.
    pub q: ScalarField,
    pub lambda: f64,
    pub eta: SphereField,
    /// `Φ^η(x)` at every node, where `v(Φ(x)) = w(x)`.
    pub positions: Vec<Vec<[f64; 3]>>,
}

/// Runs the contraction iteration from the zero state.
pub fn picard_solve(config: &SolveConfig) -> Result<SolutionBundle> {
    config.validate()?;
    let disc = Arc::new(config.discretization());
    let r_trunc = config.truncation_radius(disc.radial.r_inf());
    let ctx = DropContext::new(disc.clone(), config.params()?, r_trunc)?;
    picard_with_context(config, &ctx, DropState::zeros(&disc))
}

/// Contraction iteration in a prepared context from the initial guess `x0`.
pub fn picard_with_context(config: &SolveConfig, ctx: &DropContext, x0: DropState) -> Result<SolutionBundle> {
    let mut x = x0;
    let mut history = Vec::new();
    let mut growth = 0;
    let mut prev = f64::NAN;
    if config.rho_tilde != 0.0 || norm_x(ctx, &x).total() != 0.0 {
        for iter in 1..=config.max_iters {
            let next = invert_l(ctx, &assemble_n(ctx, &x)?)?;
            let update = norm_x(ctx, &next.axpy(-1.0, &x)).total();
            let ratio = update / prev;
            let norm = norm_x(ctx, &next).total();
            history.push(IterRecord { iter, update, ratio, norm });
            x = next;
            let radius = config.rho_tilde.abs().powf(config.alpha);
            if config.enforce_ball && norm > radius {
                return Err(Error::FixedPoint(format!(
                    "iterate left the ball: ‖x‖ = {norm:.3e} > |ρ̃|^α = {radius:.3e} at step {iter}"
                )));
            }
            if update < config.tol_fixed_point {
                break;
            }
            if ratio >= 1.0 {
                growth += 1;
                if growth >= MAX_GROWTH_STEPS {
                    return Err(Error::FixedPoint(format!("no contraction: ratio {ratio:.3} at step {iter}")));
                }
            } else {
                growth = 0;
            }
            prev = update;
            if iter == config.max_iters {
                return Err(Error::FixedPoint(format!("no convergence in {iter} steps, update {update:.3e}")));
            }
        }
    }
    // ratios are informative only while updates are far above round-off
    let floor = 1e-6 * history.first().map_or(0.0, |h| h.update);
    let contraction = history
        .iter()
        .filter(|h| h.ratio.is_finite() && h.update > floor)
        .map(|h| h.ratio)
        .fold(0.0, f64::max);
    let residual = fixed_point_residual(ctx, &x)?;
    let report = diagnostics(ctx, &x)?;
    Ok(SolutionBundle {
        config: config.clone(),
        lambda0: ctx.lambda0,
        lambda: ctx.lambda0 + x.kappa,
        r_trunc: ctx.r_trunc,
        x_norm: norm_x(ctx, &x),
        state: x,
        history,
        contraction,
        residual,
        report,
    })
}

/// `‖𝓛(x) − N(x)‖_Y` with the volume rows restricted to collocated entries.
pub fn fixed_point_residual(ctx: &DropContext, x: &DropState) -> Result<f64> {
    let d = apply_l(ctx, x).axpy(-1.0, &assemble_n(ctx, x)?).collocated(ctx.disc());
    Ok(norm_y(ctx, &d))
}

/// `w = u + λU_R`, `𝔮 = 𝔭 + λ𝔓_R` and the mapped node positions.
pub fn reconstruct_physical(ctx: &DropContext, x: &DropState) -> Result<PhysicalSolution> {
    let disc = ctx.disc();
    let lambda = ctx.lambda0 + x.kappa;
    let height = HeightFunction::new(&disc.sphere, x.eta.clone())?;
    let map = build_map(disc, &height)?;
    let positions = disc
        .positions()
        .iter()
        .zip(&map.phi)
        .map(|(sh, ph)| sh.iter().zip(ph).map(|(p, f)| std::array::from_fn(|i| (1.0 + f) * p[i])).collect())
        .collect();
    Ok(PhysicalSolution {
        w: x.u.axpy(lambda, &ctx.trunc_u),
        q: x.p.axpy(lambda, &ctx.trunc_p),
        lambda,
        eta: x.eta.clone(),
        positions,
    })
}

/// Constraint suite and far-field fit.
pub fn diagnostics(ctx: &DropContext, x: &DropState) -> Result<Diagnostics> {
    let disc = ctx.disc();
    let prm = ctx.params();
    let sp = &disc.sphere;
    let lambda = ctx.lambda0 + x.kappa;
    let volume_defect = (drop_volume(sp, &x.eta) - UNIT_BALL_VOLUME).abs();

    let force = interface_force(ctx, x)?;
    let target = prm.rho_tilde * UNIT_BALL_VOLUME;
    let force_defect = if target != 0.0 { (force[2] - target).abs() / target.abs() } else { force[2].abs() };

    let axisymmetry_leakage =
        x.u.nonaxisymmetric_leakage().max(x.p.nonaxisymmetric_leakage()).max(x.eta.nonaxisymmetric_leakage());
    let phys = reconstruct_physical(ctx, x)?;
    let (wake_coefficient, remainder_slope) = wake_fit(disc, prm, &phys.w, lambda)?;
    let barycenter = barycenter(ctx, x)?;
    Ok(Diagnostics {
        volume_defect,
        force,
        force_defect,
        axisymmetry_leakage,
        wake_coefficient,
        wake_target: target,
        remainder_slope,
        barycenter,
        lambda_nonzero: prm.rho_tilde == 0.0 || lambda != 0.0,
    })
}

/// Least-squares fit `w ≈ c Γ_Oseen e₃ + d ∇(x₃/r³)` on exterior shells with
/// `R_∞/4 ≤ r ≤ R_∞/2`; returns `c` and the log-log slope of the per-shell
/// remainder `w − c Γ_Oseen e₃`.
pub fn wake_fit(disc: &Discretization, prm: &PhysicalParams, w: &VectorField, lambda: f64) -> Result<(f64, f64)> {
    let rg = &disc.radial;
    let (lo, hi) = (rg.r_inf() / 4.0, rg.r_inf() / 2.0);
    if lambda == 0.0 {
        return Ok((0.0, f64::NAN));
    }
    let mut shells: Vec<usize> =
        (rg.n_int()..rg.n_shells()).filter(|&s| rg.r[s] >= lo - 1e-12 && rg.r[s] <= hi + 1e-12).collect();
    shells.dedup_by(|a, b| (rg.r[*a] - rg.r[*b]).abs() < 1e-12);
    let grid = w.to_grid(disc);
    let pos = disc.positions();
    let sp = &disc.sphere;
    let mut wake = Vec::with_capacity(shells.len());
    let mut gram = [[0.0; 2]; 2];
    let mut rhs = [0.0; 2];
    for &s in &shells {
        let mut sh = Vec::with_capacity(sp.grid.len());
        for k in 0..sp.grid.len() {
            let x = pos[s][k];
            let g = oseenlet_with(x, lambda, prm.mu2, prm.rho2)?;
            let r = rg.r[s];
            let basis = [[g[0][2], g[1][2], g[2][2]], std::array::from_fn(|i| {
                let e = if i == 2 { 1.0 } else { 0.0 };
                e / r.powi(3) - 3.0 * x[2] * x[i] / r.powi(5)
            })];
            let wt = sp.grid.weights[k] * r * r;
            for a in 0..2 {
                rhs[a] += wt * dot3(basis[a], grid[s][k]);
                for b in 0..2 {
                    gram[a][b] += wt * dot3(basis[a], basis[b]);
                }
            }
            sh.push(basis[0]);
        }
        wake.push(sh);
    }
    let det = gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0];
    let c = (rhs[0] * gram[1][1] - rhs[1] * gram[0][1]) / det;
    let pts: Vec<(f64, f64)> = shells
        .iter()
        .zip(&wake)
        .filter_map(|(&s, m)| {
            let rem = (0..sp.grid.len())
                .map(|k| sp.grid.weights[k] * (0..3).map(|i| (grid[s][k][i] - c * m[k][i]).powi(2)).sum::<f64>())
                .sum::<f64>()
                .sqrt();
            (rem > 0.0).then(|| (rg.r[s].ln(), rem.ln()))
        })
        .collect();
    Ok((c, slope(&pts)))
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Least-squares slope of `(x, y)` pairs.
pub fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for p in pts {
        sxy += (p.0 - mx) * (p.1 - my);
        sxx += (p.0 - mx) * (p.0 - mx);
    }
    sxy / sxx
}

/// `∫_{Ω^{(1)}} x dx = ∫_{B₁} Φ(x) J dx`.
pub fn barycenter(ctx: &DropContext, x: &DropState) -> Result<[f64; 3]> {
    let disc = ctx.disc();
    let height = HeightFunction::new(&disc.sphere, x.eta.clone())?;
    let map = build_map(disc, &height)?;
    let pos = disc.positions();
    Ok(std::array::from_fn(|i| {
        let g: GridScalar = (0..disc.n_shells())
            .map(|s| (0..pos[s].len()).map(|k| (1.0 + map.phi[s][k]) * pos[s][k][i] * map.j[s][k]).collect())
            .collect();
        disc.integrate_phase(&g, Phase::Interior)
    }))
}

/// `L^q` surrogate of `Div T(U_R, 𝔓_R)` for each truncation radius, and the
/// fitted log-log exponent.
pub fn truncation_slope(solver: &StokesSolver, radii: &[f64], q: f64) -> Result<(Vec<f64>, f64)> {
    let disc = &solver.disc;
    let (u, p) = auxiliary_field(solver)?;
    let mut norms = Vec::with_capacity(radii.len());
    for &r in radii {
        let (ur, pr) = truncate_field(disc, &u, &p, r)?;
        let (f, _) = stokes_operator(disc, &solver.params, &ur, &pr);
        let g = f.to_grid(disc);
        let pw: GridScalar =
            g.iter().map(|sh| sh.iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().powf(q)).collect()).collect();
        norms.push(disc.integrate(&pw).powf(1.0 / q));
    }
    let pts: Vec<(f64, f64)> = radii.iter().zip(&norms).map(|(r, n)| (r.ln(), n.ln())).collect();
    Ok((norms, slope(&pts)))
}

/// Mirror image of a height function under `x₃ ↦ −x₃`.
pub fn reflect_height(eta: &SphereField) -> SphereField {
    let coeffs = eta
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let (l, m) = lm_of(k);
            if (l as i64 + m).rem_euclid(2) == 0 {
                *c
            } else {
                -c
            }
        })
        .collect();
    SphereField { band: eta.band, coeffs }
}

/// Mirror image of a tangent field under `x₃ ↦ −x₃` (poloidal even, toroidal odd).
pub fn reflect_tangent(t: &TangentField) -> TangentField {
    let f = |c: &[f64], flip: bool| -> Vec<f64> {
        c.iter()
            .enumerate()
            .map(|(k, v)| {
                let (l, m) = lm_of(k);
                if ((l as i64 + m).rem_euclid(2) == 0) != flip {
                    *v
                } else {
                    -v
                }
            })
            .collect()
    };
    TangentField { band: t.band, v: f(&t.v, false), w: f(&t.w, true) }
}

/// Wake target `(4π/3) ρ̃`.
pub fn wake_target(rho_tilde: f64) -> f64 {
    4.0 * PI / 3.0 * rho_tilde
}
