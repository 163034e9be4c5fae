//! MSE against a uniform prior, contractivity toward the clean points, and
//! alignment of a closed form's units with the triangle's edges.

use shallow_denoise::analysis::{alignment_report, contractivity_1d, mse_vs_prior, MseMethod, Prior};
use shallow_denoise::baselines::EmmseDenoiser;
use shallow_denoise::closed_form::{build_1d, build_obtuse_simplex, ClosedForm};
use shallow_denoise::experiment::GeometrySpec;
use shallow_denoise::geometry::{classify_simplex, ANGLE_TOL};
use shallow_denoise::network::ShallowNet;
use shallow_denoise::training::gen_noisy;

fn main() -> shallow_denoise::Result<()> {
    let clean = GeometrySpec::Line { n: 4, lo: -5.0, hi: 5.0 }.dataset()?;
    let prior = Prior::uniform(-5.0, 5.0)?;
    for sigma in [0.3, 0.1, 0.03] {
        let noisy = gen_noisy(&clean, 9000, sigma, 0)?;
        let f = build_1d(&noisy)?;
        let g = EmmseDenoiser::new(clean.clone(), sigma)?;
        let mf = mse_vs_prior(&f, &prior, sigma, MseMethod::Quadrature)?.value;
        let mg = mse_vs_prior(&g, &prior, sigma, MseMethod::Quadrature)?.value;
        println!("sigma {sigma:4}: mse f* {mf:.5}  mse emmse {mg:.5}  ratio {:.2}", mg / mf);
        if sigma == 0.3 {
            let queries: Vec<f64> = (0..=400).map(|i| -10.0 + 0.05 * i as f64).collect();
            let c = contractivity_1d(&f, &noisy, &queries, 0.01)?;
            println!("  contraction factor {:.6} over {} queries", c.alpha_observed, c.queries_evaluated);
        }
    }

    let tri = GeometrySpec::ObtuseTriangle { scale: 1.0 }.dataset()?;
    let tag = classify_simplex(&tri, ANGLE_TOL)?;
    let net = ShallowNet::from_closed_form(&ClosedForm::RankOneSum(build_obtuse_simplex(&tri, 0.2)?));
    let report = alignment_report(&net, &tri, &tag, 0.05)?;
    print!("{}", report.to_csv());
    Ok(())
}
