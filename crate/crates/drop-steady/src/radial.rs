//! Radial collocation for the two phases.
//!
//! The drop interior `(0, 1]` is one Chebyshev element restricted to a fixed
//! parity, which builds regularity at the origin into the basis: a degree-`l`
//! scalar coefficient is a polynomial of parity `(−1)^l`. The exterior
//! `[1, R_∞]` is split into elements in the algebraic coordinate `s = 1/r`,
//! each carrying Chebyshev–Lobatto nodes, so algebraic decay in `r` becomes
//! polynomial in `s`.
//!
//! Nodes are stored as a flat list of *shells*: interior nodes first (from
//! `r = 1` inward), then each exterior element in order of increasing `r`.
//! Breakpoints between elements appear twice, once per element.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::sphere::gauss_legendre;

/// Default exterior breakpoints; the last one is the truncation radius `R_∞`.
pub const DEFAULT_BREAKPOINTS: [f64; 8] = [1.0, 2.0, 3.0, 4.0, 8.0, 16.0, 32.0, 64.0];

/// Values, first and second derivatives of `T_0 … T_n` at `x`.
pub fn chebyshev_table(n: usize, x: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut t = vec![0.0; n + 1];
    let mut d = vec![0.0; n + 1];
    let mut dd = vec![0.0; n + 1];
    t[0] = 1.0;
    if n >= 1 {
        t[1] = x;
        d[1] = 1.0;
    }
    for k in 1..n {
        t[k + 1] = 2.0 * x * t[k] - t[k - 1];
        d[k + 1] = 2.0 * t[k] + 2.0 * x * d[k] - d[k - 1];
        dd[k + 1] = 4.0 * d[k] + 2.0 * x * dd[k] - dd[k - 1];
    }
    (t, d, dd)
}

/// Chebyshev–Lobatto points `cos(πk/(n−1))`, `k = 0..n`, in decreasing order.
pub fn lobatto_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|k| (PI * k as f64 / (n - 1) as f64).cos()).collect()
}

/// Differentiation matrix on [`lobatto_nodes`].
pub fn lobatto_diff(n: usize) -> DMatrix<f64> {
    let x = lobatto_nodes(n);
    let c: Vec<f64> = (0..n)
        .map(|k| {
            let base = if k == 0 || k == n - 1 { 2.0 } else { 1.0 };
            if k % 2 == 0 {
                base
            } else {
                -base
            }
        })
        .collect();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d[(i, j)] = c[i] / c[j] / (x[i] - x[j]);
            }
        }
    }
    for i in 0..n {
        let s: f64 = (0..n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    d
}

/// Clenshaw–Curtis weights on [`lobatto_nodes`] for `∫_{-1}^{1}`.
pub fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let nn = n - 1;
    let mut w = vec![0.0; n];
    for (k, wk) in w.iter_mut().enumerate() {
        let theta = PI * k as f64 / nn as f64;
        let mut s = 0.0;
        for j in 0..=nn / 2 {
            let b = if j == 0 || 2 * j == nn { 1.0 } else { 2.0 };
            s += b / (1.0 - 4.0 * (j * j) as f64) * (2.0 * j as f64 * theta).cos();
        }
        let c = if k == 0 || k == nn { 1.0 } else { 2.0 };
        *wk = c * s / nn as f64;
    }
    w
}

/// Parity-restricted Chebyshev element on `(0, 1]`.
#[derive(Debug, Clone)]
pub struct InteriorElement {
    /// Nodes `cos(πk/(2n−1))`, `k = 0..n`, starting at `r = 1`.
    pub r: Vec<f64>,
    /// `d/dr` for even (index 0) and odd (index 1) profiles.
    pub d1: [DMatrix<f64>; 2],
    /// `d²/dr²` for even and odd profiles.
    pub d2: [DMatrix<f64>; 2],
    /// Node values → Chebyshev coefficients, per parity.
    pub to_coef: [DMatrix<f64>; 2],
    /// Weights for `∫₀¹ f r² dr` of even profiles.
    pub w_even: Vec<f64>,
    /// Weights for `∫₀¹ f r² dr` of odd profiles.
    pub w_odd: Vec<f64>,
}

impl InteriorElement {
    pub fn new(n: usize) -> Self {
        let r: Vec<f64> = (0..n).map(|k| (PI * k as f64 / (2 * n - 1) as f64).cos()).collect();
        let deg = 2 * n;
        let tabs: Vec<_> = r.iter().map(|&x| chebyshev_table(deg, x)).collect();
        let (gx, gw) = gauss_legendre(2 * n + 8);
        let build = |p: usize| {
            let v = DMatrix::from_fn(n, n, |k, j| tabs[k].0[2 * j + p]);
            let vd = DMatrix::from_fn(n, n, |k, j| tabs[k].1[2 * j + p]);
            let vdd = DMatrix::from_fn(n, n, |k, j| tabs[k].2[2 * j + p]);
            let vinv = v.clone().try_inverse().expect("interior Vandermonde is invertible");
            // moments ∫₀¹ T_{2j+p} r² dr
            let m = DVector::from_fn(n, |j, _| {
                gx.iter()
                    .zip(&gw)
                    .map(|(&x, &w)| {
                        let rr = 0.5 * (x + 1.0);
                        0.5 * w * (((2 * j + p) as f64) * rr.acos()).cos() * rr * rr
                    })
                    .sum()
            });
            let w = vinv.transpose() * m;
            (&vd * &vinv, &vdd * &vinv, vinv, w.iter().copied().collect::<Vec<f64>>())
        };
        let (d1e, d2e, ce, we) = build(0);
        let (d1o, d2o, co, wo) = build(1);
        Self { r, d1: [d1e, d1o], d2: [d2e, d2o], to_coef: [ce, co], w_even: we, w_odd: wo }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Interpolates a profile of the given parity at `r ∈ [0, 1]`.
    pub fn interp(&self, prof: &[f64], parity: usize, r: f64) -> f64 {
        let n = self.len();
        let c = &self.to_coef[parity] * DVector::from_column_slice(prof);
        let t = r.clamp(-1.0, 1.0).acos();
        (0..n).map(|j| c[j] * (((2 * j + parity) as f64) * t).cos()).sum()
    }
}

/// Chebyshev–Lobatto element in `s = 1/r` covering `[r_a, r_b]`.
#[derive(Debug, Clone)]
pub struct ExteriorElement {
    pub ra: f64,
    pub rb: f64,
    /// Nodes in increasing `r`; `r[0] = ra`, `r[n−1] = rb`.
    pub r: Vec<f64>,
    /// `d/dr` on the element.
    pub d1: DMatrix<f64>,
    /// `d²/dr²` on the element.
    pub d2: DMatrix<f64>,
    /// Weights for `∫ f r² dr` over the element.
    pub w: Vec<f64>,
    xi: Vec<f64>,
}

impl ExteriorElement {
    pub fn new(ra: f64, rb: f64, n: usize) -> Self {
        let (sa, sb) = (1.0 / ra, 1.0 / rb);
        let (mid, half) = (0.5 * (sa + sb), 0.5 * (sa - sb));
        let xi = lobatto_nodes(n);
        let s: Vec<f64> = xi.iter().map(|x| mid + half * x).collect();
        let mut r: Vec<f64> = s.iter().map(|s| 1.0 / s).collect();
        r[0] = ra;
        r[n - 1] = rb;
        let ds = lobatto_diff(n) / half;
        let dss = &ds * &ds;
        let d1 = DMatrix::from_fn(n, n, |i, j| -s[i] * s[i] * ds[(i, j)]);
        let d2 = DMatrix::from_fn(n, n, |i, j| {
            s[i].powi(4) * dss[(i, j)] + 2.0 * s[i].powi(3) * ds[(i, j)]
        });
        let cc = clenshaw_curtis(n);
        let w = (0..n).map(|k| cc[k] * half * s[k].powi(-4)).collect();
        Self { ra, rb, r, d1, d2, w, xi }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Barycentric interpolation at `r ∈ [ra, rb]`.
    pub fn interp(&self, prof: &[f64], r: f64) -> f64 {
        let (sa, sb) = (1.0 / self.ra, 1.0 / self.rb);
        let x = (2.0 / r - sa - sb) / (sa - sb);
        let n = self.len();
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..n {
            let dx = x - self.xi[k];
            if dx.abs() < 1e-15 {
                return prof[k];
            }
            let mut c = if k % 2 == 0 { 1.0 } else { -1.0 };
            if k == 0 || k == n - 1 {
                c *= 0.5;
            }
            num += c / dx * prof[k];
            den += c / dx;
        }
        num / den
    }
}

/// Phase of a shell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Interior,
    Exterior,
}

/// Full radial discretization of `(0, R_∞]`.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub interior: InteriorElement,
    pub exterior: Vec<ExteriorElement>,
    /// Radius of every shell.
    pub r: Vec<f64>,
    /// First shell index of each exterior element.
    pub ext_offset: Vec<usize>,
}

impl RadialGrid {
    /// Grid with `n_int` interior nodes and `n_ext` nodes per exterior element.
    pub fn new(n_int: usize, n_ext: usize, breakpoints: &[f64]) -> Self {
        let interior = InteriorElement::new(n_int);
        let exterior: Vec<ExteriorElement> = breakpoints
            .windows(2)
            .map(|w| ExteriorElement::new(w[0], w[1], n_ext))
            .collect();
        let mut r = interior.r.clone();
        let mut ext_offset = Vec::new();
        for e in &exterior {
            ext_offset.push(r.len());
            r.extend_from_slice(&e.r);
        }
        Self { interior, exterior, r, ext_offset }
    }

    /// Default resolution for band limit `lmax`.
    pub fn for_band(lmax: usize) -> Self {
        Self::new(lmax / 2 + 12, 16 + lmax / 4, &DEFAULT_BREAKPOINTS)
    }

    pub fn n_shells(&self) -> usize {
        self.r.len()
    }

    pub fn n_int(&self) -> usize {
        self.interior.len()
    }

    pub fn r_inf(&self) -> f64 {
        self.exterior.last().map_or(1.0, |e| e.rb)
    }

    pub fn phase(&self, shell: usize) -> Phase {
        if shell < self.n_int() {
            Phase::Interior
        } else {
            Phase::Exterior
        }
    }

    /// Shell index of the interior node on `r = 1`.
    pub fn inner_boundary(&self) -> usize {
        0
    }

    /// Shell index of the exterior node on `r = 1`.
    pub fn outer_boundary(&self) -> usize {
        self.n_int()
    }

    /// `d/dr` of a profile; `parity` selects the interior basis.
    pub fn deriv(&self, prof: &[f64], parity: usize) -> Vec<f64> {
        self.apply(prof, parity, false)
    }

    /// `d²/dr²` of a profile.
    pub fn deriv2(&self, prof: &[f64], parity: usize) -> Vec<f64> {
        self.apply(prof, parity, true)
    }

    fn apply(&self, prof: &[f64], parity: usize, second: bool) -> Vec<f64> {
        let mut out = vec![0.0; prof.len()];
        let ni = self.n_int();
        let m = if second { &self.interior.d2[parity] } else { &self.interior.d1[parity] };
        matvec(m, &prof[..ni], &mut out[..ni]);
        for (e, &off) in self.exterior.iter().zip(&self.ext_offset) {
            let m = if second { &e.d2 } else { &e.d1 };
            let n = e.len();
            matvec(m, &prof[off..off + n], &mut out[off..off + n]);
        }
        out
    }

    /// `∫ f r² dr` over the interior, for a profile of the given parity.
    pub fn integrate_interior(&self, prof: &[f64], parity: usize) -> f64 {
        let w = if parity == 0 { &self.interior.w_even } else { &self.interior.w_odd };
        w.iter().zip(prof).map(|(w, f)| w * f).sum()
    }

    /// `∫ f r² dr` over `[1, R_∞]`.
    pub fn integrate_exterior(&self, prof: &[f64]) -> f64 {
        self.exterior
            .iter()
            .zip(&self.ext_offset)
            .map(|(e, &off)| e.w.iter().zip(&prof[off..off + e.len()]).map(|(w, f)| w * f).sum::<f64>())
            .sum()
    }

    /// Radial quadrature weight of every shell for `∫ f r² dr`
    /// (interior weights exact for even profiles).
    pub fn weights(&self) -> Vec<f64> {
        let mut w = self.interior.w_even.clone();
        for e in &self.exterior {
            w.extend_from_slice(&e.w);
        }
        w
    }

    /// Interpolated value at radius `r` (interior needs the profile parity).
    pub fn interp(&self, prof: &[f64], parity: usize, r: f64) -> f64 {
        let ni = self.n_int();
        if r <= 1.0 {
            return self.interior.interp(&prof[..ni], parity, r);
        }
        for (e, &off) in self.exterior.iter().zip(&self.ext_offset) {
            if r <= e.rb {
                return e.interp(&prof[off..off + e.len()], r);
            }
        }
        let e = self.exterior.last().expect("exterior elements");
        let off = *self.ext_offset.last().expect("exterior elements");
        e.interp(&prof[off..off + e.len()], r)
    }
}

pub(crate) fn matvec(m: &DMatrix<f64>, x: &[f64], y: &mut [f64]) {
    let (nr, nc) = m.shape();
    for i in 0..nr {
        let mut s = 0.0;
        for j in 0..nc {
            s += m[(i, j)] * x[j];
        }
        y[i] = s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_derivative_is_exact_on_parity_polynomials() {
        let e = InteriorElement::new(14);
        let f: Vec<f64> = e.r.iter().map(|r| r.powi(7) - 2.0 * r).collect();
        let df = {
            let mut y = vec![0.0; 14];
            matvec(&e.d1[1], &f, &mut y);
            y
        };
        for (k, r) in e.r.iter().enumerate() {
            assert!((df[k] - (7.0 * r.powi(6) - 2.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn exterior_derivative_of_inverse_powers() {
        let g = RadialGrid::for_band(16);
        let f: Vec<f64> = g.r.iter().map(|r| r.powi(-5)).collect();
        let d = g.deriv2(&f, 1);
        for k in g.n_int()..g.n_shells() {
            let ex = 30.0 * g.r[k].powi(-7);
            assert!((d[k] - ex).abs() < 1e-10, "{k}");
        }
    }

    #[test]
    fn quadrature_volumes() {
        let g = RadialGrid::for_band(16);
        let one = vec![1.0; g.n_shells()];
        assert!((g.integrate_interior(&one, 0) - 1.0 / 3.0).abs() < 1e-14);
        let f: Vec<f64> = g.r.iter().map(|r| r.powi(-4)).collect();
        assert!((g.integrate_exterior(&f) - (1.0 - 1.0 / 64.0)).abs() < 1e-13);
        let odd: Vec<f64> = g.r.iter().map(|r| r.powi(3)).collect();
        assert!((g.integrate_interior(&odd, 1) - 1.0 / 6.0).abs() < 1e-13);
    }
}
