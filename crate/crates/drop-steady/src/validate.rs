//! Self-checks that run without a full nonlinear solve.
//!
//! Each check compares a solver stage against a closed form or an exact
//! identity and reports the observed defect next to its tolerance.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::driver::truncation_slope;
use crate::error::{Error, Result};
use crate::field::{Discretization, ScalarField, VectorField};
use crate::geometry::mean_curvature_grid;
use crate::halfspace::{
    default_heights, dirichlet_stokes_halfspace, frequency, residual_check, twophase_jump_halfspace, HalfSpaceData,
    TangentialSpectrum,
};
use crate::operators::{apply_l, invert_l, DropContext, YElement};
use crate::oracle::HadamardRybczynski;
use crate::radial::Phase;
use crate::sphere::{
    degree_of, integrate_sphere, laplace_beltrami, ncoef, project_complement, solve_shifted, Sphere, SphereField,
    TangentField,
};
use crate::twophase::{auxiliary_field, dissipation, drag_integral, lambda0, PhysicalParams, StokesSolver};

/// Names accepted by `--only`, in execution order.
pub const CHECK_NAMES: [&str; 8] =
    ["curvature", "kernel", "halfspace", "hadamard-rybczynski", "energy", "lambda0", "round-trip", "truncation-slope"];

/// Seed of every randomized check.
pub const VALIDATION_SEED: u64 = 20_240_601;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Observed defect (for the slope check: the distance to the expected exponent).
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, value: f64, tolerance: f64, detail: String) -> Self {
        Self { name, passed: value.is_finite() && value < tolerance, value, tolerance, detail }
    }
}

/// Check selection and test hooks.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidateOptions {
    /// Run only the named check.
    pub only: Option<String>,
    /// Factor applied to `μ₂` inside the Hadamard–Rybczynski reference (1 = no fault).
    pub hr_mu2_fault: f64,
    /// Band limit of the volume checks.
    pub lmax: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self { only: None, hr_mu2_fault: 1.0, lmax: 8 }
    }
}

/// Runs the selected checks in order.
pub fn run_validation(opts: &ValidateOptions) -> Result<Vec<CheckOutcome>> {
    if let Some(name) = &opts.only {
        if !CHECK_NAMES.contains(&name.as_str()) {
            return Err(Error::Config(format!("unknown check `{name}`; expected one of {}", CHECK_NAMES.join(", "))));
        }
    }
    let mut out = Vec::new();
    for name in CHECK_NAMES {
        if opts.only.as_deref().is_some_and(|o| o != name) {
            continue;
        }
        let mut res = match name {
            "curvature" => check_curvature()?,
            "kernel" => check_kernel()?,
            "halfspace" => check_halfspace()?,
            "hadamard-rybczynski" => check_hadamard_rybczynski(opts)?,
            "energy" => check_energy(opts)?,
            "lambda0" => check_lambda0(opts)?,
            "round-trip" => check_round_trip(opts)?,
            _ => check_truncation_slope(opts)?,
        };
        out.append(&mut res);
    }
    Ok(out)
}

/// Fixed-width pass/fail table.
pub fn format_table(rows: &[CheckOutcome]) -> String {
    let mut s = format!("{:<22} {:<6} {:>12} {:>10}  {}\n", "check", "status", "defect", "tolerance", "detail");
    for r in rows {
        let status = if r.passed { "PASS" } else { "FAIL" };
        s += &format!("{:<22} {:<6} {:>12.3e} {:>10.1e}  {}\n", r.name, status, r.value, r.tolerance, r.detail);
    }
    s
}

fn check_curvature() -> Result<Vec<CheckOutcome>> {
    let sp = Sphere::new(16);
    let h0 = mean_curvature_grid(&sp, &SphereField::zeros(16))?;
    let rest = h0.iter().map(|h| (h + 2.0).abs()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for c in [0.05, -0.05, 0.08, -0.08] {
        let h = mean_curvature_grid(&sp, &SphereField::constant(16, c))?;
        let expect = 2.0 * c / (1.0 + c);
        worst = h.iter().map(|v| (v + 2.0 - expect).abs()).fold(worst, f64::max);
    }
    Ok(vec![
        CheckOutcome::new("curvature", rest, 1e-12, "(H+2)(0) on the unit sphere".into()),
        CheckOutcome::new("curvature", worst, 1e-10, "(H+2)(c) = 2c/(1+c), c ∈ {±0.05, ±0.08}".into()),
    ])
}

fn check_kernel() -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
    let mut kernel: f64 = 0.0;
    let mut round: f64 = 0.0;
    for band in [16, 32] {
        for i in 0..3 {
            let n = SphereField::normal_component(band, i);
            kernel = kernel.max(laplace_beltrami(&n).axpy(2.0, &n).max_abs_coeff());
        }
        let f = project_complement(&random_sphere_field(&mut rng, band));
        let g = solve_shifted(&f)?;
        let back = laplace_beltrami(&g).axpy(2.0, &g);
        round = round.max(back.axpy(-1.0, &f).l2() / f.l2());
    }
    Ok(vec![
        CheckOutcome::new("kernel", kernel, 1e-12, "(Δ_S+2) n_i at L = 16, 32".into()),
        CheckOutcome::new("kernel", round, 1e-10, "shifted solve round trip at L = 16, 32".into()),
    ])
}

fn check_halfspace() -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED + 1);
    let heights = default_heights();
    let rc = |rng: &mut ChaCha8Rng| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let (mut dir, mut jump): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let modes = random_modes(&mut rng, 6);
        let b = TangentialSpectrum::new(modes.clone(), modes.iter().map(|_| [rc(&mut rng), rc(&mut rng), rc(&mut rng)]).collect())?;
        let mu = rng.gen_range(0.2..3.0);
        let s = dirichlet_stokes_halfspace(mu, &b)?;
        dir = dir.max(residual_check(&s, HalfSpaceData::Dirichlet(&b), &heights).max());
        let h1 = TangentialSpectrum::new(modes.clone(), modes.iter().map(|_| rc(&mut rng)).collect())?;
        let h2 = TangentialSpectrum::new(
            modes.clone(),
            modes.iter().map(|_| [rc(&mut rng), rc(&mut rng), C::new(0.0, 0.0)]).collect(),
        )?;
        let s = twophase_jump_halfspace(mu, &h1, &h2)?;
        jump = jump.max(residual_check(&s, HalfSpaceData::Jump(&h1, &h2), &heights).max());
    }
    Ok(vec![
        CheckOutcome::new("halfspace", dir, 1e-10, "Dirichlet problem, 50 random data sets".into()),
        CheckOutcome::new("halfspace", jump, 1e-10, "two-phase jump problem, 50 random data sets".into()),
    ])
}

fn check_hadamard_rybczynski(opts: &ValidateOptions) -> Result<Vec<CheckOutcome>> {
    let disc = Arc::new(Discretization::new(opts.lmax));
    let mut field_err: f64 = 0.0;
    let mut drag_err: f64 = 0.0;
    let mu2 = 1.0;
    for ratio in [0.1, 1.0, 10.0] {
        let s = StokesSolver::new(disc.clone(), PhysicalParams::new(ratio * mu2, mu2, 1.0, 0.0)?)?;
        let (u, p) = auxiliary_field(&s)?;
        let hr = HadamardRybczynski::new(ratio * mu2, mu2 * opts.hr_mu2_fault);
        let ue = VectorField::from_fn_phased(&disc, disc.lmax, |x, ph| hr.velocity(x, ph == Phase::Interior));
        let pe = ScalarField::from_fn_phased(&disc, disc.lmax, |x, ph| hr.pressure(x, ph == Phase::Interior));
        field_err = field_err
            .max(u.axpy(-1.0, &ue).l2(&disc) / ue.l2(&disc))
            .max(p.axpy(-1.0, &pe).l2(&disc) / pe.l2(&disc));
        let d = drag_integral(&disc, &s.params, &u, &p)[2];
        let closed = -(2.0 + 3.0 * ratio) / (1.0 + ratio) * 2.0 * PI * mu2 * opts.hr_mu2_fault;
        drag_err = drag_err.max((d / closed - 1.0).abs());
    }
    Ok(vec![
        CheckOutcome::new("hadamard-rybczynski", field_err, 1e-8, "auxiliary field vs closed form, κ ∈ {0.1, 1, 10}".into()),
        CheckOutcome::new("hadamard-rybczynski", drag_err, 1e-8, "drag (2+3κ)/(1+κ)·2πμ₂".into()),
    ])
}

fn check_energy(opts: &ValidateOptions) -> Result<Vec<CheckOutcome>> {
    let disc = Arc::new(Discretization::new(opts.lmax));
    let mut worst: f64 = 0.0;
    for (mu1, mu2) in [(1.0, 1.0), (1.3, 0.8), (0.1, 1.0)] {
        let s = StokesSolver::new(disc.clone(), PhysicalParams::new(mu1, mu2, 1.0, 0.0)?)?;
        let (u, p) = auxiliary_field(&s)?;
        let d = drag_integral(&disc, &s.params, &u, &p)[2];
        let e = dissipation(&disc, &s.params, &u, &p);
        worst = worst.max((-d / e - 1.0).abs());
    }
    Ok(vec![CheckOutcome::new("energy", worst, 1e-8, "surface drag vs volume dissipation".into())])
}

fn check_lambda0(opts: &ValidateOptions) -> Result<Vec<CheckOutcome>> {
    let disc = Arc::new(Discretization::new(opts.lmax));
    let mut lin: f64 = 0.0;
    let mut law: f64 = 0.0;
    for mu in [1.0, 1.9] {
        let s = StokesSolver::new(disc.clone(), PhysicalParams::new(mu, mu, 1.0, 0.0)?)?;
        let (u, p) = auxiliary_field(&s)?;
        let drag = drag_integral(&disc, &s.params, &u, &p)[2];
        let base = lambda0(1e-3, drag);
        for rho in [2.5e-4, -5e-4, 1e-2] {
            lin = lin.max((lambda0(rho, drag) - base * rho / 1e-3).abs() / (base * rho / 1e-3).abs());
            law = law.max((lambda0(rho, drag).abs() / (4.0 * rho.abs() / (15.0 * mu)) - 1.0).abs());
        }
    }
    Ok(vec![
        CheckOutcome::new("lambda0", lin, 1e-14, "linearity in ρ̃".into()),
        CheckOutcome::new("lambda0", law, 1e-8, "|λ₀| = 4|ρ̃|/(15μ) at equal viscosities".into()),
    ])
}

fn check_round_trip(opts: &ValidateOptions) -> Result<Vec<CheckOutcome>> {
    let disc = Arc::new(Discretization::new(opts.lmax));
    let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED + 2);
    let (mu1, mu2) = (0.8, 1.0);
    let drag = HadamardRybczynski::new(mu1, mu2).drag_z();
    let (mut rel, mut vol): (f64, f64) = (0.0, 0.0);
    for lam in [1e-3, 1e-2] {
        let prm = PhysicalParams::new(mu1, mu2, 0.7, lam * drag * 3.0 / (4.0 * PI))?;
        let ctx = DropContext::new(disc.clone(), prm, disc.radial.r_inf() / 4.0)?;
        for _ in 0..10 {
            let y = random_y_element(&ctx, &mut rng);
            let x = invert_l(&ctx, &y)?;
            let d = apply_l(&ctx, &x).axpy(-1.0, &y).collocated(&disc).row_norms(&disc);
            rel = rel.max(d.iter().sum::<f64>() / y.row_norms(&disc).iter().sum::<f64>());
            vol = vol.max((integrate_sphere(&x.eta) - y.a2).abs());
        }
    }
    Ok(vec![
        CheckOutcome::new("round-trip", rel, 1e-7, "‖𝓛𝓛⁻¹y − y‖/‖y‖, 20 random y, λ₀ ∈ {1e-3, 1e-2}".into()),
        CheckOutcome::new("round-trip", vol, 1e-9, "∫η dS = a₂".into()),
    ])
}

fn check_truncation_slope(opts: &ValidateOptions) -> Result<Vec<CheckOutcome>> {
    let disc = Arc::new(Discretization::new(opts.lmax));
    let s = StokesSolver::new(disc, PhysicalParams::new(1.0, 1.0, 1.0, 0.0)?)?;
    let q = 4.0 / 3.0;
    let (_, slope) = truncation_slope(&s, &[8.0, 16.0, 32.0], q)?;
    let expect = -3.0 + 3.0 / q;
    Ok(vec![CheckOutcome::new(
        "truncation-slope",
        (slope - expect).abs(),
        0.3,
        format!("fitted exponent {slope:.4} vs {expect:.4}, R ∈ {{8, 16, 32}}"),
    )])
}

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

fn decaying(rng: &mut ChaCha8Rng, band: usize) -> Vec<f64> {
    (0..ncoef(band)).map(|k| rng.gen_range(-1.0..1.0) * (-0.6 * degree_of(k) as f64).exp()).collect()
}

fn random_sphere_field(rng: &mut ChaCha8Rng, band: usize) -> SphereField {
    SphereField { band, coeffs: decaying(rng, band) }
}

/// Smooth random `Y`-element whose normal trace satisfies the flux compatibility.
pub fn random_y_element(ctx: &DropContext, rng: &mut ChaCha8Rng) -> YElement {
    let disc = ctx.disc();
    let b = disc.lmax;
    let c: [f64; 12] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let window = |x: [f64; 3]| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 6.0).exp();
    let f = VectorField::from_fn(disc, b, |x| {
        let w = window(x);
        [w * (c[0] + c[1] * x[1]), w * (c[2] + c[3] * x[0] * x[2]), w * (c[4] + c[5] * x[2] + c[6] * x[0])]
    });
    let g = ScalarField::from_fn(disc, b, |x| window(x) * (c[7] + c[8] * x[0] + c[9] * x[1] * x[2]));
    let mut h1 = random_sphere_field(rng, b);
    h1.coeffs[0] = g.integrate_interior(disc) / (4.0 * PI).sqrt();
    let mut h2 = TangentField { band: b, v: decaying(rng, b), w: decaying(rng, b) };
    h2.v[0] = 0.0;
    h2.w[0] = 0.0;
    let h3 = random_sphere_field(rng, b);
    YElement { f, g, h1, h2, a1: c[10], a2: c[11], h3 }
}
