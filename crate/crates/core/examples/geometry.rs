//! Geometric predicates: separation of noise clusters, simplex type, ray
//! decomposition and the weighted geometric median.

use shallow_denoise::geometry::{
    check_rays, check_well_separated, classify_simplex, fit_subspace, weighted_geometric_median, CleanDataset,
    ANGLE_TOL, SUBSPACE_TOL,
};
use shallow_denoise::synth;

fn main() -> shallow_denoise::Result<()> {
    let noisy = synth::separated_1d(0, 0, 5)?;
    let sep = check_well_separated(&noisy)?;
    println!("separated: {} (min gap {:.3})", sep.separated, sep.min_gap);

    for (name, ds) in [
        ("obtuse", synth::obtuse_simplex(0, 1, 4)?),
        ("acute", synth::acute_simplex(0, 1, 4)?),
    ] {
        println!("{name} simplex in R^{}: {:?}", ds.dim(), classify_simplex(&ds, ANGLE_TOL)?);
    }

    let (rays, _) = synth::rays(0, 2, 3)?;
    let r = check_rays(&rays, SUBSPACE_TOL)?;
    println!("{} rays through the origin", r.directions.len());
    println!("span rank {}", fit_subspace(&rays, SUBSPACE_TOL).rank());

    let pts = CleanDataset::new(vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 3.0]])?;
    let m = weighted_geometric_median(pts.points(), &[1.0, 1.0, 1.0], 1e-12, 1000)?;
    println!("geometric median {m:?}");
    Ok(())
}
