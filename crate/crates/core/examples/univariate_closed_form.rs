//! Min-cost interpolating denoiser for four noisy scalar clusters, and the
//! ReLU network that realizes it exactly.

use shallow_denoise::closed_form::{build_1d, representation_cost_closed_form, ClosedForm};
use shallow_denoise::geometry::{check_well_separated, CleanDataset};
use shallow_denoise::network::ShallowNet;
use shallow_denoise::training::gen_noisy;

fn main() -> shallow_denoise::Result<()> {
    let clean = CleanDataset::from_scalars(&[-5.0, -5.0 / 3.0, 5.0 / 3.0, 5.0])?;
    let noisy = gen_noisy(&clean, 200, 0.3, 7)?;
    let sep = check_well_separated(&noisy)?;
    println!("smallest gap between noise clusters: {:.3}", sep.min_gap);

    let f = build_1d(&noisy)?;
    println!("knots  {:?}", f.knots());
    println!("values {:?}", f.values());
    for y in [-7.0, -5.2, -3.0, 0.0, 1.9, 6.0] {
        println!("f({y:5.2}) = {:8.4}", f.eval(y));
    }

    let form = ClosedForm::Univariate(f);
    let net = ShallowNet::from_closed_form(&form);
    println!(
        "{} units, balanced cost {:.6}, closed-form cost {:.6}",
        net.width(),
        net.balanced_cost(),
        representation_cost_closed_form(&form)
    );
    Ok(())
}
