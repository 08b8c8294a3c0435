//! Solves for a steady falling drop and prints the iteration history and diagnostics.
//!
//! Usage: `cargo run --release --example solve_drop -- [rho_tilde] [lmax]`

use drop_steady::driver::{picard_solve, SolveConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let rho_tilde = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1e-3);
    let lmax = args.next().map(|s| s.parse()).transpose()?.unwrap_or(16);
    let b = picard_solve(&SolveConfig { rho_tilde, lmax, ..SolveConfig::default() })?;
    println!("R = {}  λ₀ = {:.6e}  λ = {:.6e}", b.r_trunc, b.lambda0, b.lambda);
    for h in &b.history {
        println!("iter {:2}  update {:.3e}  ratio {:.3e}  ‖x‖ {:.6e}", h.iter, h.update, h.ratio, h.norm);
    }
    println!("contraction {:.3e}  residual {:.3e}", b.contraction, b.residual);
    println!("{:#?}", b.report);
    Ok(())
}
