//! Two-phase Stokes jump problem on the flat interface, mode by mode.

use drop_steady::halfspace::{default_heights, residual_check, twophase_jump_halfspace, HalfSpaceData, TangentialSpectrum};
use num_complex::Complex64 as C;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let modes = vec![[8, 0], [5, -7], [0, 12]];
    let h1 = TangentialSpectrum::new(modes.clone(), vec![C::new(0.2, 0.0), C::new(0.0, -0.1), C::new(0.05, 0.05)])?;
    let zero = C::new(0.0, 0.0);
    let h2 = TangentialSpectrum::new(
        modes,
        vec![[C::new(0.1, 0.0), zero, zero], [zero, C::new(0.0, 0.3), zero], [C::new(-0.2, 0.1), C::new(0.1, 0.0), zero]],
    )?;
    let sol = twophase_jump_halfspace(0.8, &h1, &h2)?;
    let r = residual_check(&sol, HalfSpaceData::Jump(&h1, &h2), &default_heights());
    println!("{r:#?}");
    for x3 in [1.0, 0.1, -0.1, -1.0] {
        let (u, p) = sol.eval([0.4, -0.2, x3]);
        println!("x₃ = {x3:5.2}: u = [{:+.4e}, {:+.4e}, {:+.4e}], p = {p:+.4e}", u[0], u[1], u[2]);
    }
    Ok(())
}
