//! Offline training on noisy scalar clusters, compared with the closed form.

use shallow_denoise::closed_form::build_1d;
use shallow_denoise::geometry::CleanDataset;
use shallow_denoise::network::ShallowNet;
use shallow_denoise::training::{gen_noisy, train, Mode, Schedule, TrainConfig};

fn main() -> shallow_denoise::Result<()> {
    let clean = CleanDataset::from_scalars(&[-5.0, -5.0 / 3.0, 5.0 / 3.0, 5.0])?;
    let noisy = gen_noisy(&clean, 500, 0.3, 1)?;
    let cfg = TrainConfig {
        mode: Mode::Offline { replicates: 500 },
        iterations: 5000,
        batch_size: 2000,
        learning_rate: 1e-2,
        lambda: 1e-5,
        sigma: 0.3,
        schedule: Schedule::CosineToZero,
        trace_every: 1000,
        ..TrainConfig::default()
    };
    let net0 = ShallowNet::init(1, 100, true, 9.0, 1);
    let out = train(&net0, &clean, Some(&noisy), &cfg)?;
    for row in &out.trace {
        println!("step {:5} loss {:.6e} balanced cost {:.4}", row.step, row.loss, row.balanced_cost);
    }
    let f = build_1d(&noisy)?;
    let worst = (-60..=60)
        .map(|i| 0.1 * i as f64)
        .map(|y| (out.net.forward(&[y]).expect("dimension 1")[0] - f.eval(y)).abs())
        .fold(0.0, f64::max);
    println!("max |net - f*| on [-6, 6]: {worst:.4}");
    println!("closed-form cost {:.4}", f.representation_cost());
    Ok(())
}
