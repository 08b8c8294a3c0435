//! Harmonic transforms on the sphere, the Laplace–Beltrami kernel and the shifted solve.

use drop_steady::sphere::{
    forward_transform, laplace_beltrami, project_complement, project_kernel, solve_shifted, Sphere, SphereField,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sp = Sphere::new(16);
    let f = SphereField::from_fn(&sp, 16, |x| x[0] * x[2] + 0.3 * x[1] + (2.0 * x[2]).sin());
    let back = forward_transform(&sp, &f.values(&sp))?;
    println!("round-trip coefficient error {:.2e}", back.axpy(-1.0, &f).max_abs_coeff());
    for i in 0..3 {
        let n = SphereField::normal_component(16, i);
        println!("‖(Δ_S + 2) n_{}‖ = {:.2e}", i + 1, laplace_beltrami(&n).axpy(2.0, &n).l2());
    }
    let g = solve_shifted(&project_complement(&f))?;
    let check = laplace_beltrami(&g).axpy(2.0, &g).axpy(-1.0, &project_complement(&f));
    println!("kernel part ‖P f‖ = {:.4e}, shifted-solve residual {:.2e}", project_kernel(&f).l2(), check.l2());
    Ok(())
}
