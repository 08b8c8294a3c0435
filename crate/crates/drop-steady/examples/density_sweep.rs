//! Scaling of the settling speed, shape and wake with the density contrast.

use drop_steady::cli::sweep;
use drop_steady::driver::SolveConfig;

fn main() {
    let base = SolveConfig { lmax: 8, ..SolveConfig::default() };
    let grid = [2e-3, 1e-3, 5e-4, 2.5e-4, -1e-3];
    println!("{:>10} {:>14} {:>12} {:>11} {:>14} {:>10}", "rho_tilde", "lambda", "eta_norm", "ratio", "wake", "status");
    for r in sweep(&base, &grid) {
        println!(
            "{:>10.2e} {:>14.6e} {:>12.4e} {:>11.3e} {:>14.6e} {:>10}",
            r.rho_tilde, r.lambda, r.eta_norm, r.contraction_ratio, r.wake_coefficient, r.status
        );
    }
}
