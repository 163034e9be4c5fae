//! Closed forms for rays, obtuse and acute simplexes, including the
//! equilateral triangle whose cost is exactly 6 at radius 0.25.

use shallow_denoise::closed_form::{build_acute_simplex, build_obtuse_simplex, build_rays};
use shallow_denoise::experiment::GeometrySpec;
use shallow_denoise::geometry::{check_rays, classify_simplex, CleanDataset, ANGLE_TOL, SUBSPACE_TOL};

fn main() -> shallow_denoise::Result<()> {
    let obtuse = GeometrySpec::ObtuseTriangle { scale: 1.0 }.dataset()?;
    println!("obtuse triangle: {:?}", classify_simplex(&obtuse, ANGLE_TOL)?);
    let f = build_obtuse_simplex(&obtuse, 0.2)?;
    println!("  cost {:.6}, f(0.9, 0.1) = {:?}", f.representation_cost(), f.eval(&[0.9, 0.1])?);

    let eq = GeometrySpec::Equilateral { radius: 1.0 }.dataset()?;
    println!("equilateral triangle: {:?}", classify_simplex(&eq, ANGLE_TOL)?);
    let f = build_acute_simplex(&eq, 0.25)?;
    println!("  cost {:.12}, f(0, 0) = {:?}", f.representation_cost(), f.eval(&[0.0, 0.0])?);

    let rays = CleanDataset::new(vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![2.0, 0.0],
        vec![-1.0, 1.5],
    ])?;
    let r = check_rays(&rays, SUBSPACE_TOL)?;
    let f = build_rays(&r, 0.3)?;
    println!("rays: cost {:.6}, f(1.5, 0.2) = {:?}", f.representation_cost(), f.eval(&[1.5, 0.2])?);
    Ok(())
}
