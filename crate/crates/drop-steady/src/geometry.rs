//! Coordinate map from the reference configuration to the deformed drop.
//!
//! A height function `η` on the unit sphere describes the interface
//! `{(1 + η(ζ))ζ}`. It is extended harmonically into `B₁` and into the
//! annulus `B₄ ∖ B₁`, cut off smoothly between radii 2 and 3, and used as a
//! radial stretch `Φ(x) = (1 + φ(x)) x` with `φ = χ(|x|) H_η(x)`. All pulled
//! back quantities (`F`, `J`, `A = J F⁻¹`, the transformed stress and the
//! tangential projector) are evaluated pointwise on the quadrature grid.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Discretization, GridScalar, GridTensor, ScalarField};
use crate::radial::Phase;
use crate::sphere::{degree_of, laplace_beltrami, ncoef, Sphere, SphereField, TangentField};
use crate::twophase::cutoff;

/// Admissibility threshold on the `H^{2.75}` surrogate norm of `η`.
pub const ADMISSIBILITY_DELTA: f64 = 0.1;
/// Sobolev index of the height-function norm (`3 − 1/r` with `r = 4`).
pub const HEIGHT_SOBOLEV_INDEX: f64 = 2.75;
/// Radii between which the extension is cut off.
pub const CUTOFF_INNER: f64 = 2.0;
pub const CUTOFF_OUTER: f64 = 3.0;
/// Outer radius of the harmonic extension.
pub const EXTENSION_RADIUS: f64 = 4.0;

type Mat3 = [[f64; 3]; 3];

/// Admissible height function.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightFunction {
    pub eta: SphereField,
    norm: f64,
}

impl HeightFunction {
    /// Validates admissibility: small surrogate norm and `1 + η > 0` on the grid.
    pub fn new(sphere: &Sphere, eta: SphereField) -> Result<Self> {
        let norm = eta.sobolev_norm(HEIGHT_SOBOLEV_INDEX);
        if norm >= ADMISSIBILITY_DELTA {
            return Err(Error::Inadmissible(format!(
                "height norm {norm:.3e} exceeds threshold {ADMISSIBILITY_DELTA}"
            )));
        }
        let min = eta.values(sphere).into_iter().fold(f64::INFINITY, f64::min);
        if 1.0 + min <= 0.0 {
            return Err(Error::Inadmissible("interface radius is not positive".into()));
        }
        Ok(Self { eta, norm })
    }

    pub fn zero(band: usize) -> Self {
        Self { eta: SphereField::zeros(band), norm: 0.0 }
    }

    /// Cached `H^{2.75}` surrogate norm.
    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Radial factor of the annulus extension: harmonic, 1 at `r = 1`, 0 at `r = 4`.
pub fn annulus_profile(l: usize, r: f64) -> f64 {
    let lf = l as f64;
    let q = EXTENSION_RADIUS.powf(-2.0 * lf - 1.0);
    (r.powf(-lf - 1.0) - r.powf(lf) * q) / (1.0 - q)
}

fn annulus_profile_dr(l: usize, r: f64) -> f64 {
    let lf = l as f64;
    let q = EXTENSION_RADIUS.powf(-2.0 * lf - 1.0);
    (-(lf + 1.0) * r.powf(-lf - 2.0) - lf * r.powf(lf - 1.0) * q) / (1.0 - q)
}

/// Harmonic extension `H_η` (zero beyond `r = 4`).
pub fn harmonic_extension(disc: &Discretization, eta: &SphereField) -> ScalarField {
    let b = eta.band;
    let mut h = ScalarField::zeros(disc, b);
    for s in 0..disc.n_shells() {
        let r = disc.radial.r[s];
        for k in 0..ncoef(b) {
            let l = degree_of(k);
            h.c[s][k] = eta.coeffs[k]
                * match disc.radial.phase(s) {
                    Phase::Interior => r.powi(l as i32),
                    Phase::Exterior if r < EXTENSION_RADIUS => annulus_profile(l, r),
                    Phase::Exterior => 0.0,
                };
        }
    }
    h
}

/// Pointwise coordinate-map data on every shell.
#[derive(Debug, Clone)]
pub struct MapData {
    /// Radial stretch `φ = χH_η`, so that `Φ(x) = (1 + φ)x`.
    pub phi: GridScalar,
    /// `F = ∇Φ`.
    pub f: GridTensor,
    /// `F⁻¹`.
    pub f_inv: GridTensor,
    /// `J = det F`.
    pub j: GridScalar,
    /// `A = J F⁻¹`, so that `Aᵀ = cof F`.
    pub a: GridTensor,
    /// `Aᵀn` on the unit sphere (identical from both sides).
    pub atn: Vec<[f64; 3]>,
}

impl MapData {
    /// Map of the undeformed configuration.
    pub fn identity(disc: &Discretization) -> Self {
        let npts = disc.sphere.grid.len();
        let ns = disc.n_shells();
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        Self {
            phi: vec![vec![0.0; npts]; ns],
            f: vec![vec![id; npts]; ns],
            f_inv: vec![vec![id; npts]; ns],
            j: vec![vec![1.0; npts]; ns],
            a: vec![vec![id; npts]; ns],
            atn: disc.sphere.grid.normal.clone(),
        }
    }

    /// Smallest Jacobian over the grid.
    pub fn min_jacobian(&self) -> f64 {
        self.j.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Builds `Φ^η` and its derivatives on the grid.
pub fn build_map(disc: &Discretization, eta: &HeightFunction) -> Result<MapData> {
    let sp = &disc.sphere;
    let b = eta.eta.band;
    let rg = &disc.radial;
    // φ = χ H and ∂_r φ per coefficient, analytically in r
    let mut phi = ScalarField::zeros(disc, b);
    let mut dphi = ScalarField::zeros(disc, b);
    for s in 0..disc.n_shells() {
        let r = rg.r[s];
        let (chi, dchi) = cutoff_with_derivative(r);
        for k in 0..ncoef(b) {
            let l = degree_of(k);
            let a = eta.eta.coeffs[k];
            let (h, dh) = match rg.phase(s) {
                Phase::Interior => (r.powi(l as i32), if l == 0 { 0.0 } else { l as f64 * r.powi(l as i32 - 1) }),
                Phase::Exterior if r < EXTENSION_RADIUS => (annulus_profile(l, r), annulus_profile_dr(l, r)),
                Phase::Exterior => (0.0, 0.0),
            };
            phi.c[s][k] = a * chi * h;
            dphi.c[s][k] = a * (dchi * h + chi * dh);
        }
    }
    let phi_g = phi.to_grid(disc);
    let dphi_g = dphi.to_grid(disc);
    // tangential gradient (1/r)∇_S φ on each shell
    let tang: Vec<Vec<[f64; 3]>> = (0..disc.n_shells())
        .into_par_iter()
        .map(|s| {
            let r = rg.r[s];
            let mut t = TangentField { band: b, v: phi.c[s].clone(), w: vec![0.0; ncoef(b)] };
            t.v[0] = 0.0;
            t.values(sp).into_iter().map(|x| [x[0] / r, x[1] / r, x[2] / r]).collect()
        })
        .collect();
    let ns = disc.n_shells();
    let npts = sp.grid.len();
    let mut out = MapData {
        phi: phi_g.clone(),
        f: vec![vec![[[0.0; 3]; 3]; npts]; ns],
        f_inv: vec![vec![[[0.0; 3]; 3]; npts]; ns],
        j: vec![vec![0.0; npts]; ns],
        a: vec![vec![[[0.0; 3]; 3]; npts]; ns],
        atn: Vec::new(),
    };
    for s in 0..ns {
        let r = rg.r[s];
        for k in 0..npts {
            let n = sp.grid.normal[k];
            let x = [r * n[0], r * n[1], r * n[2]];
            let gphi: [f64; 3] = std::array::from_fn(|i| dphi_g[s][k] * n[i] + tang[s][k][i]);
            let p1 = 1.0 + phi_g[s][k];
            let xg = x[0] * gphi[0] + x[1] * gphi[1] + x[2] * gphi[2];
            let den = p1 + xg;
            let jac = p1 * p1 * den;
            let mut f = [[0.0; 3]; 3];
            let mut fi = [[0.0; 3]; 3];
            for i in 0..3 {
                for jj in 0..3 {
                    let d = if i == jj { 1.0 } else { 0.0 };
                    f[i][jj] = p1 * d + x[i] * gphi[jj];
                    fi[i][jj] = (d - x[i] * gphi[jj] / den) / p1;
                }
            }
            out.f[s][k] = f;
            out.f_inv[s][k] = fi;
            out.j[s][k] = jac;
            out.a[s][k] = scale3(&fi, jac);
        }
    }
    let jmin = out.min_jacobian();
    if jmin <= 0.5 {
        return Err(Error::Inadmissible(format!("Jacobian {jmin:.3} not above 1/2")));
    }
    out.atn = surface_cofactor_normal(sp, &eta.eta);
    Ok(out)
}

/// `χ(r)` and `χ'(r)` for the extension cutoff.
fn cutoff_with_derivative(r: f64) -> (f64, f64) {
    let (a, b) = (CUTOFF_INNER, CUTOFF_OUTER);
    if r <= a || r >= b {
        return (cutoff(r, a, b), 0.0);
    }
    let t = (r - a) / (b - a);
    (cutoff(r, a, b), -30.0 * t * t * (1.0 - t) * (1.0 - t) / (b - a))
}

/// `Aᵀn = (1 + η)² n − (1 + η) ∇_S η` on the sphere grid.
pub fn surface_cofactor_normal(sp: &Sphere, eta: &SphereField) -> Vec<[f64; 3]> {
    let e = eta.values(sp);
    let mut t = TangentField { band: eta.band, v: eta.coeffs.clone(), w: vec![0.0; eta.coeffs.len()] };
    t.v[0] = 0.0;
    let g = t.values(sp);
    (0..sp.grid.len())
        .map(|k| {
            let n = sp.grid.normal[k];
            let p = 1.0 + e[k];
            std::array::from_fn(|i| p * p * n[i] - p * g[k][i])
        })
        .collect()
}

fn scale3(m: &Mat3, a: f64) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| a * m[i][j]))
}

#[inline]
pub(crate) fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

#[inline]
pub(crate) fn transpose(a: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

#[inline]
pub(crate) fn matvec3(a: &Mat3, x: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2])
}

/// Pointwise `T^η = [μ(∇w F⁻¹ + F⁻ᵀ∇wᵀ) − qI] Aᵀ` from `G = ∇w`.
#[inline]
pub fn transformed_stress_point(mu: f64, g: &Mat3, q: f64, f_inv: &Mat3, a: &Mat3) -> Mat3 {
    let gf = matmul(g, f_inv);
    let mut s: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| mu * (gf[i][j] + gf[j][i])));
    for (i, row) in s.iter_mut().enumerate() {
        row[i] -= q;
    }
    matmul(&s, &transpose(a))
}

/// `T^η(w, q)` on every shell from grid gradient `∇w` and pressure `q`.
pub fn transformed_stress(
    disc: &Discretization,
    mu: (f64, f64),
    grad_w: &GridTensor,
    q: &GridScalar,
    map: &MapData,
) -> GridTensor {
    (0..disc.n_shells())
        .into_par_iter()
        .map(|s| {
            let m = if disc.radial.phase(s) == Phase::Interior { mu.0 } else { mu.1 };
            (0..grad_w[s].len())
                .map(|k| transformed_stress_point(m, &grad_w[s][k], q[s][k], &map.f_inv[s][k], &map.a[s][k]))
                .collect()
        })
        .collect()
}

/// Transformed unit normal `Aᵀn/|Aᵀn|` and projector `P^η = I − n̂⊗n̂` on the sphere grid.
pub fn transformed_normal_projection(map: &MapData) -> (Vec<[f64; 3]>, Vec<Mat3>) {
    map.atn
        .iter()
        .map(|v| {
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let h = [v[0] / n, v[1] / n, v[2] / n];
            let p = std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 } - h[i] * h[j]));
            (h, p)
        })
        .unzip()
}

/// `Δ_S η + 2η`.
pub fn curvature_linear(eta: &SphereField) -> SphereField {
    laplace_beltrami(eta).axpy(2.0, eta)
}

/// Grid values of the mean curvature `H∘Φ^η` (unit sphere: `−2`).
pub fn mean_curvature_grid(sp: &Sphere, eta: &SphereField) -> Result<Vec<f64>> {
    let parts = curvature_parts(sp, eta)?;
    Ok((0..sp.grid.len())
        .map(|k| {
            let (e, lap, sg, cross) = (parts.eta[k], parts.lap[k], parts.sqrt_g[k], parts.cross[k]);
            (lap / sg + cross - 2.0 * (1.0 + e) / sg) / (1.0 + e)
        })
        .collect())
}

struct CurvatureParts {
    eta: Vec<f64>,
    lap: Vec<f64>,
    sqrt_g: Vec<f64>,
    /// `∇_S(1/√g)·∇_S η`.
    cross: Vec<f64>,
}

fn curvature_parts(sp: &Sphere, eta: &SphereField) -> Result<CurvatureParts> {
    let cap = sp.capacity();
    let e = eta.values(sp);
    let lap = laplace_beltrami(eta).values(sp);
    let mut t = TangentField { band: eta.band, v: eta.coeffs.clone(), w: vec![0.0; eta.coeffs.len()] };
    t.v[0] = 0.0;
    let ge = t.values(sp);
    let mut sqrt_g = Vec::with_capacity(e.len());
    for k in 0..e.len() {
        let g2 = ge[k][0] * ge[k][0] + ge[k][1] * ge[k][1] + ge[k][2] * ge[k][2];
        let g = (1.0 + e[k]).powi(2) + g2;
        if g <= 0.0 {
            return Err(Error::Inadmissible("degenerate surface metric".into()));
        }
        sqrt_g.push(g.sqrt());
    }
    let inv: Vec<f64> = sqrt_g.iter().map(|s| 1.0 / s).collect();
    let mut ti = TangentField { band: cap, v: sp.analyze(&inv, cap), w: vec![0.0; ncoef(cap)] };
    ti.v[0] = 0.0;
    let gi = ti.values(sp);
    let cross = (0..e.len()).map(|k| (0..3).map(|i| gi[k][i] * ge[k][i]).sum()).collect();
    Ok(CurvatureParts { eta: e, lap, sqrt_g, cross })
}

/// Nonlinear curvature remainder `𝒢_H(η)` with `(H+2)∘Φ = Δ_S η + 2η − 𝒢_H(η)`.
pub fn curvature_nonlinear_gh(sp: &Sphere, eta: &SphereField) -> Result<SphereField> {
    let p = curvature_parts(sp, eta)?;
    let vals: Vec<f64> = (0..sp.grid.len())
        .map(|k| {
            let (e, sg) = (p.eta[k], p.sqrt_g[k]);
            -(1.0 - (1.0 + e) * sg) / ((1.0 + e) * sg) * p.lap[k] - p.cross[k] / (1.0 + e)
                + (2.0 - 2.0 * (1.0 - e) * sg) / sg
        })
        .collect();
    Ok(SphereField { band: eta.band, coeffs: sp.analyze(&vals, eta.band) })
}

/// `∫_{B₁} J dx` over the interior shells.
pub fn interior_volume(disc: &Discretization, map: &MapData) -> f64 {
    disc.integrate_phase(&map.j, Phase::Interior)
}

/// Volume of the deformed drop, `(1/3)∫(1 + η)³ dS`.
pub fn drop_volume(sp: &Sphere, eta: &SphereField) -> f64 {
    let v: Vec<f64> = eta.values(sp).iter().map(|e| (1.0 + e).powi(3) / 3.0).collect();
    sp.grid.integrate(&v)
}

/// Volume of the unit ball.
pub const UNIT_BALL_VOLUME: f64 = 4.0 * PI / 3.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_height_has_closed_form_curvature() {
        let sp = Sphere::new(8);
        for c in [0.05, -0.08] {
            let eta = SphereField::constant(8, c);
            let gh = curvature_nonlinear_gh(&sp, &eta).unwrap();
            let exact = 2.0 * c * c / (1.0 + c);
            assert!((gh.coeffs[0] / (4.0 * PI).sqrt() - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn annulus_profile_boundary_values() {
        for l in 0..6 {
            assert!((annulus_profile(l, 1.0) - 1.0).abs() < 1e-15);
            assert!(annulus_profile(l, 4.0).abs() < 1e-15);
        }
    }
}
