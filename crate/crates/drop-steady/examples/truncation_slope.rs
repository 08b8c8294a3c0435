//! Decay of the truncation forcing `Div T(U_R, 𝔓_R)` as the cut-off radius doubles.

use std::sync::Arc;

use drop_steady::driver::truncation_slope;
use drop_steady::field::Discretization;
use drop_steady::twophase::{PhysicalParams, StokesSolver};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = 4.0 / 3.0;
    let solver = StokesSolver::new(Arc::new(Discretization::new(8)), PhysicalParams::new(1.0, 1.0, 1.0, 0.0)?)?;
    let radii = [8.0, 16.0, 32.0];
    let (norms, slope) = truncation_slope(&solver, &radii, q)?;
    for (r, n) in radii.iter().zip(&norms) {
        println!("R = {r:4}  ‖Div T(U_R, P_R)‖_q = {n:.6e}");
    }
    println!("fitted exponent {slope:.4}  (expected {:.4})", -3.0 + 3.0 / q);
    Ok(())
}
