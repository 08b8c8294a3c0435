//! Fourier-multiplier solutions of the twofold half-space Stokes problems.
//!
//! The plane `{x₃ = 0}` is replaced by a square torus of side `16π`
//! (frequency spacing `1/8`). Every retained tangential mode `e^{iξ'·x'}`
//! is solved exactly: each component is `(c₀ + c₁x₃) e^{−|ξ'||x₃|}` on either
//! side of the interface. The normal is `n = e₃` and jumps are taken as
//! upper minus lower side.

use num_complex::Complex64 as C;

use crate::error::{Error, Result};

/// Side length of the periodic torus replacing `ℝ²`.
pub const TORUS_SIDE: f64 = 16.0 * std::f64::consts::PI;
/// Frequency spacing `2π / T`.
pub const FREQUENCY_SPACING: f64 = 2.0 * std::f64::consts::PI / TORUS_SIDE;
/// Lower edge of the admissible frequency support.
pub const MIN_FREQUENCY: f64 = 1.0;

const I: C = C::new(0.0, 1.0);
const ZERO: C = C::new(0.0, 0.0);

/// Tangential spectrum: lattice frequencies with complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentialSpectrum<T> {
    /// Lattice indices `j`, so that `ξ' = j / 8`.
    pub modes: Vec<[i64; 2]>,
    pub values: Vec<T>,
}

impl<T: Clone> TangentialSpectrum<T> {
    pub fn new(modes: Vec<[i64; 2]>, values: Vec<T>) -> Result<Self> {
        if modes.len() != values.len() {
            return Err(Error::Shape(format!("{} modes, {} amplitudes", modes.len(), values.len())));
        }
        Ok(Self { modes, values })
    }
}

/// Frequency vector of a lattice index.
pub fn frequency(j: [i64; 2]) -> [f64; 2] {
    [j[0] as f64 * FREQUENCY_SPACING, j[1] as f64 * FREQUENCY_SPACING]
}

/// Dirichlet data `b = (b_v, b_w)`: tangential and normal trace.
pub type BoundarySpectrum = TangentialSpectrum<[C; 3]>;

/// Linear-exponential profile `(c₀ + c₁x₃) e^{−σ|ξ'|x₃}` on the side `σ = sgn x₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub c0: C,
    pub c1: C,
}

impl Profile {
    const ZERO: Self = Self { c0: ZERO, c1: ZERO };

    pub fn eval(&self, k: f64, x3: f64) -> C {
        (self.c0 + self.c1 * x3) * (-k * x3.abs()).exp()
    }

    /// Exact `∂₃` on the side `σ`.
    pub fn d3(&self, k: f64, sigma: f64) -> Self {
        Self { c0: self.c1 - sigma * k * self.c0, c1: -sigma * k * self.c1 }
    }
}

/// One solved mode: profiles for `(u₁, u₂, u₃, p)` on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSolution {
    pub xi: [f64; 2],
    /// Index 0: upper side `x₃ > 0`; index 1: lower side.
    pub u: [[Profile; 3]; 2],
    pub p: [Profile; 2],
}

impl ModeSolution {
    fn k(&self) -> f64 {
        self.xi[0].hypot(self.xi[1])
    }

    /// Mode amplitudes `(û, p̂)` at height `x₃ ≠ 0`.
    pub fn at(&self, x3: f64) -> ([C; 3], C) {
        let s = side(x3);
        let k = self.k();
        (std::array::from_fn(|i| self.u[s][i].eval(k, x3)), self.p[s].eval(k, x3))
    }

    /// One-sided limit at `x₃ → 0±` (`upper` selects the side).
    pub fn trace(&self, upper: bool) -> ([C; 3], C) {
        let s = if upper { 0 } else { 1 };
        (std::array::from_fn(|i| self.u[s][i].c0), self.p[s].c0)
    }

    /// Traction `T(u,p)e₃` at `x₃ → 0±`.
    pub fn traction(&self, mu: f64, upper: bool) -> [C; 3] {
        let s = if upper { 0 } else { 1 };
        let sigma = if upper { 1.0 } else { -1.0 };
        let k = self.k();
        let u3 = self.u[s][2].c0;
        std::array::from_fn(|i| {
            let d3u = self.u[s][i].d3(k, sigma).c0;
            let diu3 = if i < 2 { I * self.xi[i] * u3 } else { self.u[s][2].d3(k, sigma).c0 };
            mu * (d3u + diu3) - if i == 2 { self.p[s].c0 } else { ZERO }
        })
    }
}

fn side(x3: f64) -> usize {
    if x3 > 0.0 {
        0
    } else {
        1
    }
}

/// Solution of a half-space problem as a superposition of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceSolution {
    pub mu: f64,
    pub modes: Vec<ModeSolution>,
}

impl HalfSpaceSolution {
    /// Real part of the physical fields at `x` (`x₃ ≠ 0`).
    pub fn eval(&self, x: [f64; 3]) -> ([f64; 3], f64) {
        let mut u = [0.0; 3];
        let mut p = 0.0;
        for m in &self.modes {
            let e = C::from_polar(1.0, m.xi[0] * x[0] + m.xi[1] * x[1]);
            let (um, pm) = m.at(x[2]);
            for i in 0..3 {
                u[i] += (um[i] * e).re;
            }
            p += (pm * e).re;
        }
        (u, p)
    }

    /// `self + α·other` (same mode list).
    pub fn axpy(&self, alpha: f64, other: &Self) -> Result<Self> {
        if self.modes.len() != other.modes.len() {
            return Err(Error::Shape("mode lists differ".into()));
        }
        let comb = |a: Profile, b: Profile| Profile { c0: a.c0 + b.c0 * alpha, c1: a.c1 + b.c1 * alpha };
        let modes = self
            .modes
            .iter()
            .zip(&other.modes)
            .map(|(a, b)| ModeSolution {
                xi: a.xi,
                u: std::array::from_fn(|s| std::array::from_fn(|i| comb(a.u[s][i], b.u[s][i]))),
                p: std::array::from_fn(|s| comb(a.p[s], b.p[s])),
            })
            .collect();
        Ok(Self { mu: self.mu, modes })
    }
}

fn check_support(modes: &[[i64; 2]]) -> Result<()> {
    for &j in modes {
        let xi = frequency(j);
        if xi[0].hypot(xi[1]) < MIN_FREQUENCY {
            return Err(Error::HalfSpaceData(format!("mode {j:?} has |ξ'| < 1")));
        }
    }
    Ok(())
}

/// Stokes problem in `ℝ̇³` with prescribed velocity trace `b` on both sides.
pub fn dirichlet_stokes_halfspace(mu: f64, b: &BoundarySpectrum) -> Result<HalfSpaceSolution> {
    check_support(&b.modes)?;
    let modes = b
        .modes
        .iter()
        .zip(&b.values)
        .map(|(&j, bh)| {
            let xi = frequency(j);
            let k = xi[0].hypot(xi[1]);
            let xb = xi[0] * bh[0] + xi[1] * bh[1];
            let mut u = [[Profile::ZERO; 3]; 2];
            let mut p = [Profile::ZERO; 2];
            for (s, sigma) in [(0, 1.0), (1, -1.0)] {
                let a = 2.0 * mu * (sigma * k * bh[2] - I * xb);
                // |x₃| = σx₃, so the linear term carries σ
                for i in 0..2 {
                    u[s][i] = Profile { c0: bh[i], c1: -sigma * I * xi[i] * a / (2.0 * mu * k) };
                }
                u[s][2] = Profile { c0: bh[2], c1: a / (2.0 * mu) };
                p[s] = Profile { c0: a, c1: ZERO };
            }
            ModeSolution { xi, u, p }
        })
        .collect();
    Ok(HalfSpaceSolution { mu, modes })
}

/// Boundary trace realising normal velocity `H₁` and tangential stress jump `H₂`.
pub fn jump_to_trace(mu: f64, h1: &TangentialSpectrum<C>, h2: &TangentialSpectrum<[C; 3]>) -> Result<BoundarySpectrum> {
    if h1.modes != h2.modes {
        return Err(Error::Shape("H₁ and H₂ must share the mode list".into()));
    }
    check_support(&h1.modes)?;
    let mut values = Vec::with_capacity(h1.modes.len());
    for ((&j, &a), b) in h1.modes.iter().zip(&h1.values).zip(&h2.values) {
        if b[2].norm() > 0.0 {
            return Err(Error::HalfSpaceData(format!("H₂ has normal component at mode {j:?}")));
        }
        let xi = frequency(j);
        let k2 = xi[0] * xi[0] + xi[1] * xi[1];
        let k = k2.sqrt();
        let xb = xi[0] * b[0] + xi[1] * b[1];
        let bv: [C; 2] = std::array::from_fn(|i| -(b[i] - xi[i] * xb / (2.0 * k2)) / (2.0 * mu * k));
        values.push([bv[0], bv[1], a]);
    }
    TangentialSpectrum::new(h1.modes.clone(), values)
}

/// Two-phase problem: continuous velocity, `u·n = H₁`, tangential stress jump `H₂`.
pub fn twophase_jump_halfspace(
    mu: f64,
    h1: &TangentialSpectrum<C>,
    h2: &TangentialSpectrum<[C; 3]>,
) -> Result<HalfSpaceSolution> {
    dirichlet_stokes_halfspace(mu, &jump_to_trace(mu, h1, h2)?)
}

/// Data a solution is checked against.
#[derive(Debug, Clone, Copy)]
pub enum HalfSpaceData<'a> {
    Dirichlet(&'a BoundarySpectrum),
    Jump(&'a TangentialSpectrum<C>, &'a TangentialSpectrum<[C; 3]>),
}

/// Mode-summed residual norms (upper bounds for the pointwise residuals).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ResidualReport {
    pub momentum: f64,
    pub divergence: f64,
    pub trace: f64,
    pub jump: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.momentum.max(self.divergence).max(self.trace).max(self.jump)
    }
}

/// Evaluates PDE, divergence, trace and jump residuals by exact
/// differentiation of the mode profiles at the heights `x3_samples`.
pub fn residual_check(sol: &HalfSpaceSolution, data: HalfSpaceData<'_>, x3_samples: &[f64]) -> ResidualReport {
    let mu = sol.mu;
    let mut rep = ResidualReport::default();
    for &x3 in x3_samples.iter().filter(|x| **x != 0.0) {
        let (mut mom, mut div) = (0.0, 0.0);
        for m in &sol.modes {
            let s = side(x3);
            let sigma = if s == 0 { 1.0 } else { -1.0 };
            let k = m.k();
            let lap = |pr: Profile| pr.d3(k, sigma).d3(k, sigma).eval(k, x3) - k * k * pr.eval(k, x3);
            for i in 0..3 {
                let grad_p = if i < 2 { I * m.xi[i] * m.p[s].eval(k, x3) } else { m.p[s].d3(k, sigma).eval(k, x3) };
                mom += (-mu * lap(m.u[s][i]) + grad_p).norm();
            }
            let d = I * m.xi[0] * m.u[s][0].eval(k, x3)
                + I * m.xi[1] * m.u[s][1].eval(k, x3)
                + m.u[s][2].d3(k, sigma).eval(k, x3);
            div += d.norm();
        }
        rep.momentum = rep.momentum.max(mom);
        rep.divergence = rep.divergence.max(div);
    }
    let find = |modes: &[[i64; 2]], xi: [f64; 2]| modes.iter().position(|&j| frequency(j) == xi);
    match data {
        HalfSpaceData::Dirichlet(b) => {
            for m in &sol.modes {
                let bh = find(&b.modes, m.xi).map(|q| b.values[q]).unwrap_or([ZERO; 3]);
                for up in [true, false] {
                    let (u, _) = m.trace(up);
                    rep.trace += (0..3).map(|i| (u[i] - bh[i]).norm()).sum::<f64>();
                }
            }
        }
        HalfSpaceData::Jump(h1, h2) => {
            for m in &sol.modes {
                let q = find(&h1.modes, m.xi);
                let a = q.map(|q| h1.values[q]).unwrap_or(ZERO);
                let b = q.map(|q| h2.values[q]).unwrap_or([ZERO; 3]);
                let (uu, _) = m.trace(true);
                let (ul, _) = m.trace(false);
                rep.trace += (uu[2] - a).norm() + (ul[2] - a).norm();
                let tu = m.traction(mu, true);
                let tl = m.traction(mu, false);
                rep.jump += (0..3).map(|i| (uu[i] - ul[i]).norm()).sum::<f64>();
                rep.jump += (0..2).map(|i| (tu[i] - tl[i] - b[i]).norm()).sum::<f64>();
            }
        }
    }
    rep
}

/// Geometric `x₃` samples clustered at `0±`, excluding `0`.
pub fn default_heights() -> Vec<f64> {
    let mut v: Vec<f64> = (0..12).map(|k| 1e-4 * 2f64.powi(k)).collect();
    let neg: Vec<f64> = v.iter().map(|x| -x).collect();
    v.extend(neg);
    v
}
