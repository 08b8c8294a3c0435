//! Two-phase volume fields on `ℝ³ ∖ 𝕊²`.
//!
//! A field is a stack of spherical-harmonic expansions, one per radial shell
//! of a [`RadialGrid`]. Vector fields use the vector spherical harmonic
//! decomposition
//!
//! `u = Σ u_r(r) Y n + v(r) ∇_S Y + w(r) n × ∇_S Y`,
//!
//! with `∇_S` the surface gradient on the *unit* sphere. Nonlinear products
//! are formed on the padded quadrature grid of every shell and projected back.

use rayon::prelude::*;

use crate::radial::{Phase, RadialGrid};
use crate::sphere::{degree_of, idx, ncoef, Sphere, SphereField, TangentField};

/// Spherical and radial resolution shared by all fields of a computation.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub sphere: Sphere,
    pub radial: RadialGrid,
    /// Band limit of stored fields.
    pub lmax: usize,
}

/// Grid samples of a scalar field, `[shell][grid point]`.
pub type GridScalar = Vec<Vec<f64>>;
/// Grid samples of a Cartesian vector field.
pub type GridVector = Vec<Vec<[f64; 3]>>;
/// Grid samples of a Cartesian tensor field, `t[i][j]`.
pub type GridTensor = Vec<Vec<[[f64; 3]; 3]>>;

impl Discretization {
    /// Default resolution for band limit `lmax`.
    pub fn new(lmax: usize) -> Self {
        Self::with_radial(lmax, RadialGrid::for_band(lmax))
    }

    pub fn with_radial(lmax: usize, radial: RadialGrid) -> Self {
        Self { sphere: Sphere::new(lmax), radial, lmax }
    }

    pub fn n_shells(&self) -> usize {
        self.radial.n_shells()
    }

    /// Cartesian position of every grid point on every shell.
    pub fn positions(&self) -> GridVector {
        self.radial
            .r
            .iter()
            .map(|&r| self.sphere.grid.normal.iter().map(|n| [r * n[0], r * n[1], r * n[2]]).collect())
            .collect()
    }

    /// `∫ g dx` over one phase for grid samples whose radial profile is even
    /// (products of regular fields).
    pub fn integrate_phase(&self, g: &GridScalar, phase: Phase) -> f64 {
        let w = self.radial.weights();
        (0..self.n_shells())
            .filter(|&s| self.radial.phase(s) == phase)
            .map(|s| w[s] * self.sphere.grid.integrate(&g[s]))
            .sum()
    }

    /// `∫ g dx` over both phases.
    pub fn integrate(&self, g: &GridScalar) -> f64 {
        self.integrate_phase(g, Phase::Interior) + self.integrate_phase(g, Phase::Exterior)
    }
}

/// Interior parity of a scalar coefficient of degree `l`.
#[inline]
pub fn scalar_parity(l: usize) -> usize {
    l % 2
}

/// Interior parity of the `u_r` and `v` coefficients of degree `l`.
#[inline]
pub fn poloidal_parity(l: usize) -> usize {
    (l + 1) % 2
}

/// Radial derivative of every coefficient profile of `data`.
pub(crate) fn radial_apply(
    radial: &RadialGrid,
    data: &[Vec<f64>],
    band: usize,
    parity: fn(usize) -> usize,
    second: bool,
) -> Vec<Vec<f64>> {
    let ns = data.len();
    let nc = ncoef(band);
    let cols: Vec<Vec<f64>> = (0..nc)
        .into_par_iter()
        .map(|k| {
            let prof: Vec<f64> = (0..ns).map(|s| data[s][k]).collect();
            let p = parity(degree_of(k));
            if second {
                radial.deriv2(&prof, p)
            } else {
                radial.deriv(&prof, p)
            }
        })
        .collect();
    (0..ns).map(|s| (0..nc).map(|k| cols[k][s]).collect()).collect()
}

/// Scalar field: harmonic coefficients per shell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub band: usize,
    pub c: Vec<Vec<f64>>,
}

impl ScalarField {
    pub fn zeros(disc: &Discretization, band: usize) -> Self {
        Self { band, c: vec![vec![0.0; ncoef(band)]; disc.n_shells()] }
    }

    /// Projection of `f(x)` onto band `band`.
    pub fn from_fn(disc: &Discretization, band: usize, f: impl Fn([f64; 3]) -> f64 + Sync) -> Self {
        Self::from_fn_phased(disc, band, |x, _| f(x))
    }

    /// Projection of a phasewise function `f(x, phase)`; shells on `r = 1`
    /// see the phase they belong to.
    pub fn from_fn_phased(disc: &Discretization, band: usize, f: impl Fn([f64; 3], Phase) -> f64 + Sync) -> Self {
        let pos = disc.positions();
        let g: GridScalar = pos
            .par_iter()
            .enumerate()
            .map(|(s, sh)| {
                let ph = disc.radial.phase(s);
                sh.iter().map(|&x| f(x, ph)).collect()
            })
            .collect();
        Self::from_grid(disc, &g, band)
    }

    pub fn from_grid(disc: &Discretization, g: &GridScalar, band: usize) -> Self {
        let c = g.par_iter().map(|v| disc.sphere.analyze(v, band)).collect();
        Self { band, c }
    }

    pub fn to_grid(&self, disc: &Discretization) -> GridScalar {
        self.c.par_iter().map(|c| disc.sphere.synth(c, self.band)).collect()
    }

    /// Radial profile of coefficient `k`.
    pub fn profile(&self, k: usize) -> Vec<f64> {
        self.c.iter().map(|c| c[k]).collect()
    }

    pub fn set_profile(&mut self, k: usize, prof: &[f64]) {
        for (c, &p) in self.c.iter_mut().zip(prof) {
            c[k] = p;
        }
    }

    /// Trace on one shell as a sphere field.
    pub fn shell(&self, s: usize) -> SphereField {
        SphereField { band: self.band, coeffs: self.c[s].clone() }
    }

    pub fn with_band(&self, band: usize) -> Self {
        let n = ncoef(band.min(self.band));
        let c = self
            .c
            .iter()
            .map(|c| {
                let mut o = vec![0.0; ncoef(band)];
                o[..n].copy_from_slice(&c[..n]);
                o
            })
            .collect();
        Self { band, c }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { band: self.band, c: self.c.iter().map(|c| c.iter().map(|x| a * x).collect()).collect() }
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, o: &Self) -> Self {
        assert_eq!(self.band, o.band);
        let c = self
            .c
            .iter()
            .zip(&o.c)
            .map(|(x, y)| x.iter().zip(y).map(|(x, y)| x + a * y).collect())
            .collect();
        Self { band: self.band, c }
    }

    pub fn dr(&self, disc: &Discretization) -> Self {
        Self { band: self.band, c: radial_apply(&disc.radial, &self.c, self.band, scalar_parity, false) }
    }

    /// `∇f = f' Y n + (f/r) ∇_S Y`.
    pub fn gradient(&self, disc: &Discretization) -> VectorField {
        let ur = radial_apply(&disc.radial, &self.c, self.band, scalar_parity, false);
        let v = self
            .c
            .iter()
            .zip(&disc.radial.r)
            .map(|(c, r)| {
                let mut o: Vec<f64> = c.iter().map(|x| x / r).collect();
                o[0] = 0.0;
                o
            })
            .collect();
        VectorField { band: self.band, ur, v, w: vec![vec![0.0; ncoef(self.band)]; self.c.len()] }
    }

    /// `∂₃ f`, raising the band by one.
    pub fn dz(&self, disc: &Discretization) -> Self {
        let d = self.dr(disc);
        let b = self.band;
        let nb = b + 1;
        let c = self
            .c
            .iter()
            .zip(&d.c)
            .zip(&disc.radial.r)
            .map(|((f, fp), &r)| {
                let mut o = vec![0.0; ncoef(nb)];
                for l in 0..=b {
                    for m in -(l as i64)..=(l as i64) {
                        let k = idx(l, m);
                        let lf = l as f64;
                        let up = fp[k] - lf * f[k] / r;
                        o[idx(l + 1, m)] += dz_coef(l, m) * up;
                        if l >= 1 && (m.unsigned_abs() as usize) < l {
                            let down = fp[k] + (lf + 1.0) * f[k] / r;
                            o[idx(l - 1, m)] += dz_coef(l - 1, m) * down;
                        }
                    }
                }
                o
            })
            .collect();
        Self { band: nb, c }
    }

    /// Sum of squared coefficients per shell, integrated with `r² dr`.
    pub fn l2_phase(&self, disc: &Discretization, phase: Phase) -> f64 {
        let w = disc.radial.weights();
        (0..self.c.len())
            .filter(|&s| disc.radial.phase(s) == phase)
            .map(|s| w[s] * self.c[s].iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// `L²(ℝ³∖𝕊²)` norm.
    pub fn l2(&self, disc: &Discretization) -> f64 {
        (self.l2_phase(disc, Phase::Interior).powi(2) + self.l2_phase(disc, Phase::Exterior).powi(2)).sqrt()
    }

    /// `∫_{B₁} f dx`.
    pub fn integrate_interior(&self, disc: &Discretization) -> f64 {
        let ni = disc.radial.n_int();
        let prof: Vec<f64> = self.c[..ni].iter().map(|c| c[0]).collect();
        disc.radial.integrate_interior(&prof, 0) * (4.0 * std::f64::consts::PI).sqrt()
    }

    /// Largest `m ≠ 0` coefficient.
    pub fn nonaxisymmetric_leakage(&self) -> f64 {
        self.c.iter().map(|c| self.shell_leak(c)).fold(0.0, f64::max)
    }

    fn shell_leak(&self, c: &[f64]) -> f64 {
        SphereField { band: self.band, coeffs: c.to_vec() }.nonaxisymmetric_leakage()
    }
}

/// Coupling coefficient of `∂₃` between degree `l` and `l + 1`.
#[inline]
pub fn dz_coef(l: usize, m: i64) -> f64 {
    let (lf, mf) = (l as f64, m as f64);
    (((lf + 1.0).powi(2) - mf * mf) / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0))).sqrt()
}

/// Vector field in vector spherical harmonic form, per shell.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub band: usize,
    pub ur: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn zeros(disc: &Discretization, band: usize) -> Self {
        let z = vec![vec![0.0; ncoef(band)]; disc.n_shells()];
        Self { band, ur: z.clone(), v: z.clone(), w: z }
    }

    /// Projection of `f(x)` onto band `band`.
    pub fn from_fn(disc: &Discretization, band: usize, f: impl Fn([f64; 3]) -> [f64; 3] + Sync) -> Self {
        Self::from_fn_phased(disc, band, |x, _| f(x))
    }

    /// Projection of a phasewise function `f(x, phase)`.
    pub fn from_fn_phased(
        disc: &Discretization,
        band: usize,
        f: impl Fn([f64; 3], Phase) -> [f64; 3] + Sync,
    ) -> Self {
        let pos = disc.positions();
        let g: GridVector = pos
            .par_iter()
            .enumerate()
            .map(|(s, sh)| {
                let ph = disc.radial.phase(s);
                sh.iter().map(|&x| f(x, ph)).collect()
            })
            .collect();
        Self::from_grid(disc, &g, band)
    }

    pub fn from_grid(disc: &Discretization, g: &GridVector, band: usize) -> Self {
        let sp = &disc.sphere;
        let parts: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = g
            .par_iter()
            .map(|vals| {
                let grid = &sp.grid;
                let un: Vec<f64> = (0..grid.len()).map(|k| dot(vals[k], grid.normal[k])).collect();
                let t = TangentField::from_values(sp, band, vals);
                (sp.analyze(&un, band), t.v, t.w)
            })
            .collect();
        let mut out = Self { band, ur: vec![], v: vec![], w: vec![] };
        for (a, b, c) in parts {
            out.ur.push(a);
            out.v.push(b);
            out.w.push(c);
        }
        out
    }

    pub fn to_grid(&self, disc: &Discretization) -> GridVector {
        let sp = &disc.sphere;
        (0..self.ur.len())
            .into_par_iter()
            .map(|s| {
                let un = sp.synth(&self.ur[s], self.band);
                let t = TangentField { band: self.band, v: self.v[s].clone(), w: self.w[s].clone() }.values(sp);
                (0..un.len())
                    .map(|k| {
                        let n = sp.grid.normal[k];
                        [un[k] * n[0] + t[k][0], un[k] * n[1] + t[k][1], un[k] * n[2] + t[k][2]]
                    })
                    .collect()
            })
            .collect()
    }

    /// Cartesian components as scalar fields of band `band`.
    pub fn cartesian(&self, disc: &Discretization, band: usize) -> [ScalarField; 3] {
        let g = self.to_grid(disc);
        let comp = |i: usize| -> GridScalar { g.iter().map(|sh| sh.iter().map(|x| x[i]).collect()).collect() };
        [
            ScalarField::from_grid(disc, &comp(0), band),
            ScalarField::from_grid(disc, &comp(1), band),
            ScalarField::from_grid(disc, &comp(2), band),
        ]
    }

    /// Vector field from Cartesian components.
    pub fn from_cartesian(disc: &Discretization, comps: &[ScalarField; 3], band: usize) -> Self {
        let g: Vec<GridScalar> = comps.iter().map(|c| c.to_grid(disc)).collect();
        let gv: GridVector = (0..disc.n_shells())
            .map(|s| (0..g[0][s].len()).map(|k| [g[0][s][k], g[1][s][k], g[2][s][k]]).collect())
            .collect();
        Self::from_grid(disc, &gv, band)
    }

    pub fn with_band(&self, band: usize) -> Self {
        let n = ncoef(band.min(self.band));
        let f = |d: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            d.iter()
                .map(|c| {
                    let mut o = vec![0.0; ncoef(band)];
                    o[..n].copy_from_slice(&c[..n]);
                    o
                })
                .collect()
        };
        Self { band, ur: f(&self.ur), v: f(&self.v), w: f(&self.w) }
    }

    pub fn scale(&self, a: f64) -> Self {
        let f = |d: &Vec<Vec<f64>>| -> Vec<Vec<f64>> { d.iter().map(|c| c.iter().map(|x| a * x).collect()).collect() };
        Self { band: self.band, ur: f(&self.ur), v: f(&self.v), w: f(&self.w) }
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, o: &Self) -> Self {
        assert_eq!(self.band, o.band);
        let f = |x: &Vec<Vec<f64>>, y: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            x.iter().zip(y).map(|(x, y)| x.iter().zip(y).map(|(x, y)| x + a * y).collect()).collect()
        };
        Self { band: self.band, ur: f(&self.ur, &o.ur), v: f(&self.v, &o.v), w: f(&self.w, &o.w) }
    }

    /// Radial derivatives `(u_r', v', w')`.
    pub fn dr(&self, disc: &Discretization) -> Self {
        let rd = &disc.radial;
        Self {
            band: self.band,
            ur: radial_apply(rd, &self.ur, self.band, poloidal_parity, false),
            v: radial_apply(rd, &self.v, self.band, poloidal_parity, false),
            w: radial_apply(rd, &self.w, self.band, scalar_parity, false),
        }
    }

    /// `Div u = u_r' + 2u_r/r − l(l+1) v / r`.
    pub fn divergence(&self, disc: &Discretization) -> ScalarField {
        let d = radial_apply(&disc.radial, &self.ur, self.band, poloidal_parity, false);
        let c = (0..self.ur.len())
            .map(|s| {
                let r = disc.radial.r[s];
                (0..ncoef(self.band))
                    .map(|k| {
                        let l = degree_of(k) as f64;
                        d[s][k] + 2.0 * self.ur[s][k] / r - l * (l + 1.0) * self.v[s][k] / r
                    })
                    .collect()
            })
            .collect();
        ScalarField { band: self.band, c }
    }

    /// `∂₃ u`, kept at the same band.
    pub fn dz(&self, disc: &Discretization) -> Self {
        let b = self.band;
        let comps = self.cartesian(disc, b + 1);
        let d = [comps[0].dz(disc), comps[1].dz(disc), comps[2].dz(disc)];
        Self::from_cartesian(disc, &d, b)
    }

    /// Cartesian gradient `G[i][j] = ∂_j u_i` on the grid.
    pub fn gradient_grid(&self, disc: &Discretization) -> GridTensor {
        let comps = self.cartesian(disc, self.band + 1);
        let grads: Vec<GridVector> = comps.iter().map(|c| c.gradient(disc).to_grid(disc)).collect();
        (0..disc.n_shells())
            .map(|s| {
                (0..grads[0][s].len())
                    .map(|k| [grads[0][s][k], grads[1][s][k], grads[2][s][k]])
                    .collect()
            })
            .collect()
    }

    /// Trace on one shell: `(u·n, tangential part)`.
    pub fn shell(&self, s: usize) -> (SphereField, TangentField) {
        (
            SphereField { band: self.band, coeffs: self.ur[s].clone() },
            TangentField { band: self.band, v: self.v[s].clone(), w: self.w[s].clone() },
        )
    }

    /// `L²` norm over one phase.
    pub fn l2_phase(&self, disc: &Discretization, phase: Phase) -> f64 {
        let w = disc.radial.weights();
        (0..self.ur.len())
            .filter(|&s| disc.radial.phase(s) == phase)
            .map(|s| {
                w[s] * (0..ncoef(self.band))
                    .map(|k| {
                        let l = degree_of(k) as f64;
                        self.ur[s][k].powi(2) + l * (l + 1.0) * (self.v[s][k].powi(2) + self.w[s][k].powi(2))
                    })
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2(&self, disc: &Discretization) -> f64 {
        (self.l2_phase(disc, Phase::Interior).powi(2) + self.l2_phase(disc, Phase::Exterior).powi(2)).sqrt()
    }

    /// Largest `m ≠ 0` coefficient over all components.
    pub fn nonaxisymmetric_leakage(&self) -> f64 {
        let leak = |d: &Vec<Vec<f64>>| {
            d.iter()
                .map(|c| SphereField { band: self.band, coeffs: c.clone() }.nonaxisymmetric_leakage())
                .fold(0.0, f64::max)
        };
        leak(&self.ur).max(leak(&self.v)).max(leak(&self.w))
    }
}

/// Divergence of a grid tensor, row by row: `(Div T)_i = Σ_j ∂_j T_ij`.
pub fn divergence_tensor(disc: &Discretization, t: &GridTensor, band: usize) -> VectorField {
    let ab = band + 1;
    let comps: Vec<ScalarField> = (0..3)
        .map(|i| {
            let row: GridVector = t.iter().map(|sh| sh.iter().map(|m| m[i]).collect()).collect();
            VectorField::from_grid(disc, &row, ab).divergence(disc)
        })
        .collect();
    let arr = [comps[0].clone(), comps[1].clone(), comps[2].clone()];
    VectorField::from_cartesian(disc, &arr, band)
}

#[inline]
pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
