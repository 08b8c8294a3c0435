//! Constructive inverse of the linearized drop operator and its round trip.

use std::sync::Arc;

use drop_steady::field::Discretization;
use drop_steady::operators::{apply_l, invert_l, norm_x, DropContext};
use drop_steady::sphere::integrate_sphere;
use drop_steady::twophase::PhysicalParams;
use drop_steady::validate::random_y_element;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let disc = Arc::new(Discretization::new(8));
    let ctx = DropContext::new(disc.clone(), PhysicalParams::new(0.8, 1.0, 1.0, 5e-3)?, 16.0)?;
    println!("drag {:.10}, λ₀ {:.6e}", ctx.drag_z, ctx.lambda0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..4 {
        let y = random_y_element(&ctx, &mut rng);
        let x = invert_l(&ctx, &y)?;
        let d = apply_l(&ctx, &x).axpy(-1.0, &y).collocated(&disc).row_norms(&disc);
        let rel = d.iter().sum::<f64>() / y.row_norms(&disc).iter().sum::<f64>();
        println!(
            "‖x‖_X = {:.4e}, κ = {:+.4e}, relative round trip {rel:.2e}, ∫η − a₂ = {:.1e}",
            norm_x(&ctx, &x).total(),
            x.kappa,
            integrate_sphere(&x.eta) - y.a2
        );
    }
    Ok(())
}
