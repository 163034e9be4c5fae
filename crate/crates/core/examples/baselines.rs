//! The empirical MMSE denoiser against its nearest-neighbour limit.

use shallow_denoise::baselines::{nn1, EmmseDenoiser};
use shallow_denoise::geometry::CleanDataset;
use shallow_denoise::Denoiser;

fn main() -> shallow_denoise::Result<()> {
    let clean = CleanDataset::from_scalars(&[-5.0, -5.0 / 3.0, 5.0 / 3.0, 5.0])?;
    for sigma in [1.5, 0.5, 0.05] {
        let g = EmmseDenoiser::new(clean.clone(), sigma)?;
        print!("sigma {sigma:4}:");
        for y in [-4.0, -3.3, 0.2, 3.0] {
            print!("  g({y}) = {:7.4}", g.denoise(&[y])[0]);
        }
        println!();
    }
    print!("1-NN      :");
    for y in [-4.0, -3.3, 0.2, 3.0] {
        print!("  g({y}) = {:7.4}", nn1(&clean, &[y])[0]);
    }
    println!();
    Ok(())
}
