//! Spherical-harmonic calculus on the unit sphere.
//!
//! Fields are expanded in orthonormal real harmonics
//! `Y_{l,0} = P̄_l^0`, `Y_{l,m} = √2 P̄_l^m cos mφ`, `Y_{l,-m} = √2 P̄_l^m sin mφ`
//! (no Condon–Shortley phase), sampled on a Gauss–Legendre × equispaced grid.
//! Coefficients are stored flat at index `l² + l + m`.
//!
//! The grid is padded by a factor 3/2 over the field band limit so that
//! quadratic and cubic products can be projected back without aliasing.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Flat coefficient index of `(l, m)`, `|m| ≤ l`.
#[inline]
pub fn idx(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Number of coefficients for band limit `b`.
#[inline]
pub fn ncoef(b: usize) -> usize {
    (b + 1) * (b + 1)
}

/// Degree of the coefficient at flat index `k`.
#[inline]
pub fn degree_of(k: usize) -> usize {
    (k as f64).sqrt().floor() as usize
}

/// `(l, m)` of the coefficient at flat index `k`.
#[inline]
pub fn lm_of(k: usize) -> (usize, i64) {
    let l = degree_of(k);
    (l, k as i64 - (l * l + l) as i64)
}

#[inline]
fn pidx(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes in decreasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Legendre × equispaced-φ quadrature grid on the unit sphere.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    /// Colatitudes θ_i.
    pub theta: Vec<f64>,
    /// Azimuths φ_j.
    pub phi: Vec<f64>,
    /// Quadrature weight per grid point (row-major `i * n_phi + j`), summing to 4π.
    pub weights: Vec<f64>,
    /// Outward unit normal per grid point.
    pub normal: Vec<[f64; 3]>,
    /// Unit vector e_θ per grid point.
    pub e_theta: Vec<[f64; 3]>,
    /// Unit vector e_φ per grid point.
    pub e_phi: Vec<[f64; 3]>,
}

impl SphereGrid {
    /// Grid with the given node counts.
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let (x, w) = gauss_legendre(n_theta);
        let theta: Vec<f64> = x.iter().map(|c| c.acos()).collect();
        let phi: Vec<f64> = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
        let npts = n_theta * n_phi;
        let mut weights = Vec::with_capacity(npts);
        let mut normal = Vec::with_capacity(npts);
        let mut e_theta = Vec::with_capacity(npts);
        let mut e_phi = Vec::with_capacity(npts);
        for i in 0..n_theta {
            let (st, ct) = theta[i].sin_cos();
            for &p in &phi {
                let (sp, cp) = p.sin_cos();
                weights.push(w[i] * 2.0 * PI / n_phi as f64);
                normal.push([st * cp, st * sp, ct]);
                e_theta.push([ct * cp, ct * sp, -st]);
                e_phi.push([-sp, cp, 0.0]);
            }
        }
        Self { n_theta, n_phi, theta, phi, weights, normal, e_theta, e_phi }
    }

    /// Padded grid for band limit `lmax`: `n_theta = 3L/2 + 2`, `n_phi = 3L + 4`.
    pub fn for_band(lmax: usize) -> Self {
        Self::new(3 * lmax / 2 + 2, 3 * lmax + 4)
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest band limit transformable exactly on this grid.
    pub fn capacity(&self) -> usize {
        (self.n_theta - 1).min((self.n_phi - 1) / 2)
    }

    /// Quadrature of grid samples.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

/// Harmonic transforms on a [`SphereGrid`], with precomputed Legendre tables.
#[derive(Debug, Clone)]
pub struct Sphere {
    pub grid: SphereGrid,
    /// Band limit of stored fields.
    pub lmax: usize,
    cap: usize,
    npm: usize,
    p: Vec<f64>,
    dp: Vec<f64>,
    mp: Vec<f64>,
    cosm: Vec<f64>,
    sinm: Vec<f64>,
}

impl Sphere {
    /// Transforms for fields of band `lmax` on the padded grid.
    pub fn new(lmax: usize) -> Self {
        Self::with_grid(lmax, SphereGrid::for_band(lmax))
    }

    /// Transforms on a caller-supplied grid.
    pub fn with_grid(lmax: usize, grid: SphereGrid) -> Self {
        assert!(
            grid.n_phi > 2 * lmax && grid.n_theta > lmax,
            "grid too coarse for band {lmax}"
        );
        let cap = grid.capacity();
        let npm = pidx(cap, cap) + 1;
        let nt = grid.n_theta;
        let mut p = vec![0.0; nt * npm];
        let mut dp = vec![0.0; nt * npm];
        let mut mp = vec![0.0; nt * npm];
        for i in 0..nt {
            let (st, x) = grid.theta[i].sin_cos();
            let row = &mut p[i * npm..(i + 1) * npm];
            let mut pmm = 1.0 / (4.0 * PI).sqrt();
            for m in 0..=cap {
                if m > 0 {
                    pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * st;
                }
                row[pidx(m, m)] = pmm;
                if m < cap {
                    row[pidx(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * x * pmm;
                }
                for l in m + 2..=cap {
                    let (lf, mf) = (l as f64, m as f64);
                    let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                    let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
                    row[pidx(l, m)] = a * (x * row[pidx(l - 1, m)] - b * row[pidx(l - 2, m)]);
                }
            }
            for m in 0..=cap {
                for l in m..=cap {
                    let (lf, mf) = (l as f64, m as f64);
                    let prev = if l > m {
                        ((2.0 * lf + 1.0) / (2.0 * lf - 1.0) * (lf - mf) * (lf + mf)).sqrt()
                            * p[i * npm + pidx(l - 1, m)]
                    } else {
                        0.0
                    };
                    let k = i * npm + pidx(l, m);
                    dp[k] = (lf * x * p[k] - prev) / st;
                    mp[k] = mf * p[k] / st;
                }
            }
        }
        let nphi = grid.n_phi;
        let mut cosm = vec![0.0; (cap + 1) * nphi];
        let mut sinm = vec![0.0; (cap + 1) * nphi];
        for m in 0..=cap {
            for j in 0..nphi {
                let (s, c) = (m as f64 * grid.phi[j]).sin_cos();
                cosm[m * nphi + j] = c;
                sinm[m * nphi + j] = s;
            }
        }
        Self { grid, lmax, cap, npm, p, dp, mp, cosm, sinm }
    }

    /// Largest admissible transform band.
    pub fn capacity(&self) -> usize {
        self.cap
    }

    fn check_band(&self, band: usize) {
        assert!(band <= self.cap, "band {band} exceeds grid capacity {}", self.cap);
    }

    #[inline]
    fn norm_m(m: usize) -> f64 {
        if m == 0 {
            1.0
        } else {
            std::f64::consts::SQRT_2
        }
    }

    /// Grid values of a band-`band` scalar expansion.
    pub fn synth(&self, coeffs: &[f64], band: usize) -> Vec<f64> {
        self.check_band(band);
        debug_assert!(coeffs.len() >= ncoef(band));
        let (nt, np) = (self.grid.n_theta, self.grid.n_phi);
        let mut out = vec![0.0; nt * np];
        let mut cm = vec![0.0; band + 1];
        let mut sm = vec![0.0; band + 1];
        for i in 0..nt {
            let pt = &self.p[i * self.npm..(i + 1) * self.npm];
            for m in 0..=band {
                let (mut c, mut s) = (0.0, 0.0);
                for l in m..=band {
                    let pl = pt[pidx(l, m)];
                    c += coeffs[idx(l, m as i64)] * pl;
                    if m > 0 {
                        s += coeffs[idx(l, -(m as i64))] * pl;
                    }
                }
                let nm = Self::norm_m(m);
                cm[m] = c * nm;
                sm[m] = s * nm;
            }
            let row = &mut out[i * np..(i + 1) * np];
            for m in 0..=band {
                let (c, s) = (cm[m], sm[m]);
                let ct = &self.cosm[m * np..(m + 1) * np];
                let st = &self.sinm[m * np..(m + 1) * np];
                for j in 0..np {
                    row[j] += c * ct[j] + s * st[j];
                }
            }
        }
        out
    }

    /// Band-`band` coefficients of grid samples (quadrature projection).
    pub fn analyze(&self, values: &[f64], band: usize) -> Vec<f64> {
        self.check_band(band);
        let (nt, np) = (self.grid.n_theta, self.grid.n_phi);
        let mut out = vec![0.0; ncoef(band)];
        for i in 0..nt {
            let wi = self.grid.weights[i * np];
            let row = &values[i * np..(i + 1) * np];
            let pt = &self.p[i * self.npm..(i + 1) * self.npm];
            for m in 0..=band {
                let ct = &self.cosm[m * np..(m + 1) * np];
                let st = &self.sinm[m * np..(m + 1) * np];
                let (mut a, mut b) = (0.0, 0.0);
                for j in 0..np {
                    a += row[j] * ct[j];
                    b += row[j] * st[j];
                }
                let nm = Self::norm_m(m) * wi;
                for l in m..=band {
                    let pl = pt[pidx(l, m)] * nm;
                    out[idx(l, m as i64)] += a * pl;
                    if m > 0 {
                        out[idx(l, -(m as i64))] += b * pl;
                    }
                }
            }
        }
        out
    }

    /// Grid components `(u_θ, u_φ)` of `Σ v ∇_S Y + w n×∇_S Y`.
    pub fn synth_tangent(&self, v: &[f64], w: &[f64], band: usize) -> (Vec<f64>, Vec<f64>) {
        self.check_band(band);
        let (nt, np) = (self.grid.n_theta, self.grid.n_phi);
        let mut ut = vec![0.0; nt * np];
        let mut up = vec![0.0; nt * np];
        for i in 0..nt {
            let base = i * self.npm;
            for m in 0..=band {
                // cos/sin amplitudes of u_θ and u_φ at this order
                let (mut tc, mut ts, mut pc, mut ps) = (0.0, 0.0, 0.0, 0.0);
                let mi = m as i64;
                for l in m.max(1)..=band {
                    let d = self.dp[base + pidx(l, m)];
                    let q = self.mp[base + pidx(l, m)];
                    let (vc, wc) = (v[idx(l, mi)], w[idx(l, mi)]);
                    tc += vc * d;
                    ps -= vc * q;
                    ts += wc * q;
                    pc += wc * d;
                    if m > 0 {
                        let (vs, ws) = (v[idx(l, -mi)], w[idx(l, -mi)]);
                        ts += vs * d;
                        pc += vs * q;
                        tc += -ws * q;
                        ps += ws * d;
                    }
                }
                let nm = Self::norm_m(m);
                let ct = &self.cosm[m * np..(m + 1) * np];
                let st = &self.sinm[m * np..(m + 1) * np];
                for j in 0..np {
                    ut[i * np + j] += nm * (tc * ct[j] + ts * st[j]);
                    up[i * np + j] += nm * (pc * ct[j] + ps * st[j]);
                }
            }
        }
        (ut, up)
    }

    /// Poloidal/toroidal coefficients `(v, w)` of a tangential grid field.
    pub fn analyze_tangent(&self, ut: &[f64], up: &[f64], band: usize) -> (Vec<f64>, Vec<f64>) {
        self.check_band(band);
        let (nt, np) = (self.grid.n_theta, self.grid.n_phi);
        let mut v = vec![0.0; ncoef(band)];
        let mut w = vec![0.0; ncoef(band)];
        for i in 0..nt {
            let wi = self.grid.weights[i * np];
            let base = i * self.npm;
            for m in 0..=band {
                let ct = &self.cosm[m * np..(m + 1) * np];
                let st = &self.sinm[m * np..(m + 1) * np];
                let (mut tc, mut ts, mut pc, mut ps) = (0.0, 0.0, 0.0, 0.0);
                for j in 0..np {
                    let (a, b) = (ut[i * np + j], up[i * np + j]);
                    tc += a * ct[j];
                    ts += a * st[j];
                    pc += b * ct[j];
                    ps += b * st[j];
                }
                let nm = Self::norm_m(m) * wi;
                let mi = m as i64;
                for l in m.max(1)..=band {
                    let d = self.dp[base + pidx(l, m)] * nm;
                    let q = self.mp[base + pidx(l, m)] * nm;
                    let ll = (l * (l + 1)) as f64;
                    // cosine partner: ∇Y = (d cos, -q sin), n×∇Y = (q sin, d cos)
                    v[idx(l, mi)] += (tc * d - ps * q) / ll;
                    w[idx(l, mi)] += (ts * q + pc * d) / ll;
                    if m > 0 {
                        // sine partner: ∇Y = (d sin, q cos), n×∇Y = (-q cos, d sin)
                        v[idx(l, -mi)] += (ts * d + pc * q) / ll;
                        w[idx(l, -mi)] += (-tc * q + ps * d) / ll;
                    }
                }
            }
        }
        (v, w)
    }
}

/// Scalar field on the unit sphere held as harmonic coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereField {
    pub band: usize,
    pub coeffs: Vec<f64>,
}

/// Tangent vector field `Σ v ∇_S Y + w n×∇_S Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    pub band: usize,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl SphereField {
    pub fn zeros(band: usize) -> Self {
        Self { band, coeffs: vec![0.0; ncoef(band)] }
    }

    pub fn from_coeffs(band: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != ncoef(band) {
            return Err(Error::Shape(format!(
                "{} coefficients for band {band} (expected {})",
                coeffs.len(),
                ncoef(band)
            )));
        }
        Ok(Self { band, coeffs })
    }

    /// Constant field.
    pub fn constant(band: usize, c: f64) -> Self {
        let mut f = Self::zeros(band);
        f.coeffs[0] = c * (4.0 * PI).sqrt();
        f
    }

    /// Normal component `n_i` (i = 0, 1, 2), a degree-one harmonic.
    pub fn normal_component(band: usize, i: usize) -> Self {
        let mut f = Self::zeros(band);
        let c = (4.0 * PI / 3.0).sqrt();
        let m = match i {
            0 => 1,
            1 => -1,
            _ => 0,
        };
        f.coeffs[idx(1, m)] = c;
        f
    }

    /// Projection of `f(n)` sampled on the grid.
    pub fn from_fn(sphere: &Sphere, band: usize, f: impl Fn([f64; 3]) -> f64) -> Self {
        let vals: Vec<f64> = sphere.grid.normal.iter().map(|&n| f(n)).collect();
        Self { band, coeffs: sphere.analyze(&vals, band) }
    }

    /// Value at the direction with polar angle `theta` and azimuth `phi`.
    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        let (st, x) = theta.sin_cos();
        let b = self.band;
        let mut out = 0.0;
        let mut pmm = 1.0 / (4.0 * PI).sqrt();
        for m in 0..=b {
            if m > 0 {
                pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * st;
            }
            let (s_m, c_m) = (m as f64 * phi).sin_cos();
            let nm = if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
            let (mut p2, mut p1) = (0.0, pmm);
            for l in m..=b {
                if l == m + 1 {
                    p2 = p1;
                    p1 = ((2 * m + 3) as f64).sqrt() * x * pmm;
                } else if l > m + 1 {
                    let (lf, mf) = (l as f64, m as f64);
                    let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                    let bb = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
                    let next = a * (x * p1 - bb * p2);
                    p2 = p1;
                    p1 = next;
                }
                out += nm * p1 * self.coeffs[idx(l, m as i64)] * c_m;
                if m > 0 {
                    out += nm * p1 * self.coeffs[idx(l, -(m as i64))] * s_m;
                }
            }
        }
        out
    }

    /// Grid samples.
    pub fn values(&self, sphere: &Sphere) -> Vec<f64> {
        sphere.synth(&self.coeffs, self.band)
    }

    /// Same field at another band limit (truncated or zero-padded).
    pub fn with_band(&self, band: usize) -> Self {
        let mut c = vec![0.0; ncoef(band)];
        let n = ncoef(band.min(self.band));
        c[..n].copy_from_slice(&self.coeffs[..n]);
        Self { band, coeffs: c }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { band: self.band, coeffs: self.coeffs.iter().map(|c| a * c).collect() }
    }

    /// `self + a·other` (bands must agree).
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        assert_eq!(self.band, other.band);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + a * y).collect();
        Self { band: self.band, coeffs }
    }

    /// Euclidean norm of the coefficients (the L² norm on the sphere).
    pub fn l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()))
    }

    /// Coefficient surrogate `(Σ (1 + l(l+1))^s a²)^{1/2}` of the `H^s` norm.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let l = degree_of(k) as f64;
                (1.0 + l * (l + 1.0)).powf(s) * c * c
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Largest coefficient with `m ≠ 0`.
    pub fn nonaxisymmetric_leakage(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(k, _)| lm_of(*k).1 != 0)
            .fold(0.0f64, |a, (_, c)| a.max(c.abs()))
    }
}

/// Coefficients of grid samples, checking the sample count.
pub fn forward_transform(sphere: &Sphere, values: &[f64]) -> Result<SphereField> {
    if values.len() != sphere.grid.len() {
        return Err(Error::Shape(format!(
            "{} samples on a grid of {} points",
            values.len(),
            sphere.grid.len()
        )));
    }
    Ok(SphereField { band: sphere.lmax, coeffs: sphere.analyze(values, sphere.lmax) })
}

/// Grid samples of a field, checking the band limit.
pub fn inverse_transform(sphere: &Sphere, f: &SphereField) -> Result<Vec<f64>> {
    if f.band > sphere.capacity() || f.coeffs.len() != ncoef(f.band) {
        return Err(Error::Shape(format!("band {} not supported by the grid", f.band)));
    }
    Ok(f.values(sphere))
}

/// Δ_S: multiply each coefficient by `-l(l+1)`.
pub fn laplace_beltrami(f: &SphereField) -> SphereField {
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let l = degree_of(k) as f64;
            -l * (l + 1.0) * c
        })
        .collect();
    SphereField { band: f.band, coeffs }
}

/// ∇_S f as a tangent field (purely poloidal with the same coefficients).
pub fn surface_gradient(f: &SphereField) -> TangentField {
    let mut v = f.coeffs.clone();
    v[0] = 0.0;
    TangentField { band: f.band, v, w: vec![0.0; f.coeffs.len()] }
}

impl TangentField {
    pub fn zeros(band: usize) -> Self {
        Self { band, v: vec![0.0; ncoef(band)], w: vec![0.0; ncoef(band)] }
    }

    /// Cartesian grid samples.
    pub fn values(&self, sphere: &Sphere) -> Vec<[f64; 3]> {
        let (ut, up) = sphere.synth_tangent(&self.v, &self.w, self.band);
        let g = &sphere.grid;
        (0..g.len())
            .map(|k| {
                let (a, b) = (g.e_theta[k], g.e_phi[k]);
                [ut[k] * a[0] + up[k] * b[0], ut[k] * a[1] + up[k] * b[1], ut[k] * a[2] + up[k] * b[2]]
            })
            .collect()
    }

    /// Projection of Cartesian grid samples (normal part discarded).
    pub fn from_values(sphere: &Sphere, band: usize, vals: &[[f64; 3]]) -> Self {
        let g = &sphere.grid;
        let ut: Vec<f64> = (0..g.len()).map(|k| dot(vals[k], g.e_theta[k])).collect();
        let up: Vec<f64> = (0..g.len()).map(|k| dot(vals[k], g.e_phi[k])).collect();
        let (v, w) = sphere.analyze_tangent(&ut, &up, band);
        Self { band, v, w }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            band: self.band,
            v: self.v.iter().map(|x| a * x).collect(),
            w: self.w.iter().map(|x| a * x).collect(),
        }
    }

    pub fn axpy(&self, a: f64, o: &Self) -> Self {
        Self {
            band: self.band,
            v: self.v.iter().zip(&o.v).map(|(x, y)| x + a * y).collect(),
            w: self.w.iter().zip(&o.w).map(|(x, y)| x + a * y).collect(),
        }
    }

    /// L² norm on the sphere: `Σ l(l+1)(v² + w²)`.
    pub fn l2(&self) -> f64 {
        (0..self.v.len())
            .map(|k| {
                let l = degree_of(k) as f64;
                l * (l + 1.0) * (self.v[k].powi(2) + self.w[k].powi(2))
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Integral of the field over the sphere, as a Cartesian vector.
    pub fn integral(&self) -> [f64; 3] {
        // ∫ ∇_S Y_{1,m} dS = 2 ∫ Y_{1,m} n dS, ∫ n×∇_S Y dS = 0.
        let c = 2.0 * (4.0 * PI / 3.0).sqrt();
        [c * self.v[idx(1, 1)], c * self.v[idx(1, -1)], c * self.v[idx(1, 0)]]
    }
}

#[inline]
pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `∫_{𝕊²} f dS` from the degree-zero coefficient.
pub fn integrate_sphere(f: &SphereField) -> f64 {
    f.coeffs[0] * (4.0 * PI).sqrt()
}

/// `∫_{𝕊²} f n dS` from the degree-one coefficients.
pub fn first_moment(f: &SphereField) -> [f64; 3] {
    if f.band == 0 {
        return [0.0; 3];
    }
    let c = (4.0 * PI / 3.0).sqrt();
    [c * f.coeffs[idx(1, 1)], c * f.coeffs[idx(1, -1)], c * f.coeffs[idx(1, 0)]]
}

/// Orthogonal projection onto `span{n₁, n₂, n₃}` (the kernel of Δ_S + 2):
/// `(3/4π) n·∫ f n dS`.
pub fn project_kernel(f: &SphereField) -> SphereField {
    let mut out = SphereField::zeros(f.band);
    if f.band >= 1 {
        for m in -1..=1 {
            out.coeffs[idx(1, m)] = f.coeffs[idx(1, m)];
        }
    }
    out
}

/// Complementary projection `I − P`.
pub fn project_complement(f: &SphereField) -> SphereField {
    f.axpy(-1.0, &project_kernel(f))
}

/// Tolerance on kernel content accepted by [`solve_shifted`].
pub const SHIFTED_KERNEL_TOL: f64 = 1e-10;

/// Solves `(Δ_S + 2) η = f` on the complement of the kernel.
///
/// Rejects `f` whose degree-one content exceeds [`SHIFTED_KERNEL_TOL`]
/// (relative to `max(1, ‖f‖)`).
pub fn solve_shifted(f: &SphereField) -> Result<SphereField> {
    let residual = project_kernel(f).l2();
    let tolerance = SHIFTED_KERNEL_TOL * f.l2().max(1.0);
    if residual > tolerance {
        return Err(Error::Kernel { residual, tolerance });
    }
    Ok(solve_shifted_unchecked(f))
}

/// Coefficient-wise division by `2 − l(l+1)`, dropping degree one.
pub fn solve_shifted_unchecked(f: &SphereField) -> SphereField {
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let l = degree_of(k);
            if l == 1 {
                0.0
            } else {
                c / (2.0 - (l * (l + 1)) as f64)
            }
        })
        .collect();
    SphereField { band: f.band, coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_four_pi() {
        let g = SphereGrid::for_band(16);
        let s: f64 = g.weights.iter().sum();
        assert!((s / (4.0 * PI) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn constant_and_cos_theta() {
        let sp = Sphere::new(8);
        let one = SphereField::from_fn(&sp, 8, |_| 1.0);
        assert!((one.coeffs[0] - (4.0 * PI).sqrt()).abs() < 1e-13);
        assert!(one.coeffs[1..].iter().all(|c| c.abs() < 1e-13));
        let n3 = SphereField::from_fn(&sp, 8, |n| n[2]);
        for (k, c) in n3.coeffs.iter().enumerate() {
            if k != idx(1, 0) {
                assert!(c.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn tangent_round_trip() {
        let sp = Sphere::new(6);
        let mut t = TangentField::zeros(6);
        for k in 1..t.v.len() {
            t.v[k] = (k as f64 * 0.37).sin();
            t.w[k] = (k as f64 * 0.91).cos();
        }
        let back = TangentField::from_values(&sp, 6, &t.values(&sp));
        for k in 0..t.v.len() {
            assert!((back.v[k] - t.v[k]).abs() < 1e-12, "v {k}");
            assert!((back.w[k] - t.w[k]).abs() < 1e-12, "w {k}");
        }
    }

    #[test]
    fn shifted_solve_rejects_kernel() {
        assert!(solve_shifted(&SphereField::normal_component(4, 2)).is_err());
        let c = solve_shifted(&SphereField::constant(4, 3.0)).unwrap();
        assert!((c.coeffs[0] - 1.5 * (4.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn point_evaluation_matches_grid_synthesis() {
        let sp = Sphere::new(7);
        let f = SphereField { band: 7, coeffs: (0..ncoef(7)).map(|k| ((k * 37 % 11) as f64 - 5.0) / 7.0).collect() };
        let v = f.values(&sp);
        for k in [0, 5, 17, sp.grid.len() - 1] {
            let (i, j) = (k / sp.grid.n_phi, k % sp.grid.n_phi);
            assert!((f.eval(sp.grid.theta[i], sp.grid.phi[j]) - v[k]).abs() < 1e-13);
        }
    }
}
