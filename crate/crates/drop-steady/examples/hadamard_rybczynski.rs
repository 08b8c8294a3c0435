//! Auxiliary translating-drop field against the Hadamard–Rybczynski closed form.

use std::sync::Arc;

use drop_steady::field::{Discretization, VectorField};
use drop_steady::oracle::HadamardRybczynski;
use drop_steady::radial::Phase;
use drop_steady::twophase::{auxiliary_field, dissipation, drag_integral, lambda0, PhysicalParams, StokesSolver};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let disc = Arc::new(Discretization::new(8));
    for ratio in [0.1, 1.0, 10.0] {
        let s = StokesSolver::new(disc.clone(), PhysicalParams::new(ratio, 1.0, 1.0, 0.0)?)?;
        let (u, p) = auxiliary_field(&s)?;
        let hr = HadamardRybczynski::new(ratio, 1.0);
        let ue = VectorField::from_fn_phased(&disc, disc.lmax, |x, ph| hr.velocity(x, ph == Phase::Interior));
        let err = u.axpy(-1.0, &ue).l2(&disc) / ue.l2(&disc);
        let drag = drag_integral(&disc, &s.params, &u, &p)[2];
        let diss = dissipation(&disc, &s.params, &u, &p);
        println!(
            "μ₁/μ₂ = {ratio:5}: velocity error {err:.2e}, drag {drag:.10} (closed form {:.10}), dissipation {diss:.10}, λ₀(ρ̃=1e-3) = {:.6e}",
            hr.drag_z(),
            lambda0(1e-3, drag)
        );
    }
    Ok(())
}
