//! Coordinate map of a perturbed sphere: Jacobian, volume and mean curvature.

use drop_steady::field::Discretization;
use drop_steady::geometry::{
    build_map, curvature_linear, curvature_nonlinear_gh, drop_volume, interior_volume, mean_curvature_grid,
    HeightFunction,
};
use drop_steady::sphere::{idx, SphereField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let disc = Discretization::new(12);
    let mut eta = SphereField::zeros(12);
    eta.coeffs[idx(2, 0)] = 0.004;
    eta.coeffs[idx(3, 1)] = -0.002;
    let height = HeightFunction::new(&disc.sphere, eta.clone())?;
    println!("H^2.75 norm of η: {:.4e}", height.norm());
    let map = build_map(&disc, &height)?;
    println!("min Jacobian {:.6}", map.min_jacobian());
    println!("volume: mapped ball {:.12}, surface formula {:.12}", interior_volume(&disc, &map), drop_volume(&disc.sphere, &eta));
    let h = mean_curvature_grid(&disc.sphere, &eta)?;
    let lin = curvature_linear(&eta).values(&disc.sphere);
    let gh = curvature_nonlinear_gh(&disc.sphere, &eta)?.values(&disc.sphere);
    let split = (0..h.len()).map(|k| (h[k] + 2.0 - lin[k] + gh[k]).abs()).fold(0.0, f64::max);
    println!("mean curvature range [{:.6}, {:.6}], linear + remainder split defect {split:.2e}",
        h.iter().cloned().fold(f64::INFINITY, f64::min), h.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    Ok(())
}
