//! Analytic ReLU moments under Gaussians and the exact marginalized loss.

use shallow_denoise::gaussian_moments::{
    marginalized_loss_parts, mc_oracle, moment_benchmark, relu_gauss_mean, standard_bvn_tail,
};
use shallow_denoise::geometry::CleanDataset;
use shallow_denoise::network::ShallowNet;

fn main() -> shallow_denoise::Result<()> {
    println!("E[relu(N(1, 25))] = {:.10}", relu_gauss_mean(1.0, 5.0));
    println!("P(X > 0, Y > 0), corr -0.5 = {:.15}", standard_bvn_tail(0.0, 0.0, -0.5));
    for c in moment_benchmark(100_000, 3)? {
        println!(
            "{:<28} analytic {:12.6} mc {:12.6} +- {:.2e}",
            c.case, c.analytic, c.mc_mean, c.mc_se
        );
    }

    let mut net = ShallowNet::init(2, 3, false, 1.0, 5);
    net.b_mut().iter_mut().for_each(|b| *b = 0.0);
    let prior = CleanDataset::new(vec![vec![1.0, 0.0], vec![-0.5, 0.8]])?;
    let parts = marginalized_loss_parts(&net, &prior, 0.5)?;
    let (mc, se) = mc_oracle(&net, &prior, 0.5, 200_000, 9)?;
    println!("marginalized loss {:.6} (quadratic form {:.6}), mc {mc:.6} +- {se:.1e}", parts.total(), parts.h_form);
    Ok(())
}
