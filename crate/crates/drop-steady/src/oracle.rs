//! Closed-form reference flows.
//!
//! The Hadamard–Rybczynski solution for a spherical drop translating with
//! unit speed along `−e₃` in Stokes flow. The interior is a Hill-type
//! vortex, the exterior a Stokeslet plus a potential dipole. The formulas
//! are written in terms of Stokes stream functions so that they can serve
//! as an independent check of the spectral solver.

use std::f64::consts::PI;

/// Hadamard–Rybczynski flow for viscosities `mu1` (drop) and `mu2` (ambient).
#[derive(Debug, Clone, Copy)]
pub struct HadamardRybczynski {
    pub mu1: f64,
    pub mu2: f64,
}

impl HadamardRybczynski {
    pub fn new(mu1: f64, mu2: f64) -> Self {
        Self { mu1, mu2 }
    }

    /// Viscosity ratio `μ₁/μ₂`.
    pub fn ratio(&self) -> f64 {
        self.mu1 / self.mu2
    }

    /// Stream-function coefficients `(a, b, c, d)`:
    /// `ψ_ext = ½(a r + b/r) sin²θ`, `ψ_int = ½(c r² + d r⁴) sin²θ`.
    pub fn coefficients(&self) -> (f64, f64, f64, f64) {
        let k = self.ratio();
        let d = 1.0 / (2.0 * (1.0 + k));
        let b = k * d;
        let a = -(2.0 + 3.0 * k) / (2.0 * (1.0 + k));
        let c = -1.0 - d;
        (a, b, c, d)
    }

    /// Stokes stream function at `(r, θ)`.
    pub fn stream_function(&self, r: f64, theta: f64, inside: bool) -> f64 {
        let (a, b, c, d) = self.coefficients();
        let s2 = theta.sin().powi(2);
        if inside {
            0.5 * (c * r * r + d * r.powi(4)) * s2
        } else {
            0.5 * (a * r + b / r) * s2
        }
    }

    /// `(u_r, u_θ)` from derivatives of the stream function; `inside`
    /// selects the branch on `r = 1`.
    pub fn polar_velocity(&self, r: f64, theta: f64, inside: bool) -> (f64, f64) {
        let (a, b, c, d) = self.coefficients();
        let (st, ct) = theta.sin_cos();
        // ψ = F(r) sin²θ / 2 ⇒ u_r = F cosθ / r², u_θ = −F' sinθ / (2r)
        let (f, fp) = if inside {
            (c * r * r + d * r.powi(4), 2.0 * c * r + 4.0 * d * r.powi(3))
        } else {
            (a * r + b / r, a - b / (r * r))
        };
        (f * ct / (r * r), -fp * st / (2.0 * r))
    }

    /// Cartesian velocity at `x`.
    pub fn velocity(&self, x: [f64; 3], inside: bool) -> [f64; 3] {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let theta = (x[2] / r).clamp(-1.0, 1.0).acos();
        let phi = x[1].atan2(x[0]);
        let (ur, ut) = self.polar_velocity(r, theta, inside);
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        [
            ur * st * cp + ut * ct * cp,
            ur * st * sp + ut * ct * sp,
            ur * ct - ut * st,
        ]
    }

    /// Pressure at `x` (zero mean over the drop, vanishing at infinity).
    pub fn pressure(&self, x: [f64; 3], inside: bool) -> f64 {
        let (a, _, _, d) = self.coefficients();
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if inside {
            10.0 * self.mu1 * d * x[2]
        } else {
            self.mu2 * a * x[2] / r.powi(3)
        }
    }

    /// `e₃·∫ ⟦T n⟧ dS` (interior minus exterior traction).
    pub fn drag_z(&self) -> f64 {
        -2.0 * PI * self.mu2 * (2.0 + 3.0 * self.ratio()) / (1.0 + self.ratio())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_velocity_matches_translation() {
        let hr = HadamardRybczynski::new(0.3, 1.7);
        for th in [0.1, 0.9, 2.0, 3.0] {
            let (ui, _) = hr.polar_velocity(1.0, th, true);
            let (ue, _) = hr.polar_velocity(1.0, th, false);
            assert!((ui + th.cos()).abs() < 1e-12);
            assert!((ue + th.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_viscosity_drag() {
        let hr = HadamardRybczynski::new(2.0, 2.0);
        assert!((hr.drag_z() + 5.0 * PI * 2.0).abs() < 1e-12);
    }
}
