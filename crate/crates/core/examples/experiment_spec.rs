//! A declarative experiment: parse a spec, train, and write CSV and SVG
//! artifacts into a directory.

use shallow_denoise::experiment::{run, ExperimentSpec};

const SPEC: &str = "\
name = demo
geometry = line
geometry.n = 3
geometry.lo = -3
geometry.hi = 3
sigma = 0.2
width = 40
init_radius = 5
regimes = offline
offline.replicates = 200
offline.iterations = 3000
offline.batch_size = 600
offline.learning_rate = 1e-2
offline.schedule = cosine
offline.trace_every = 500
compare = closed_form, emmse, nn1
outputs = csv, svg
";

fn main() -> shallow_denoise::Result<()> {
    let spec = ExperimentSpec::from_text(SPEC)?;
    let dir = std::env::args().nth(1).unwrap_or_else(|| "out".into());
    let report = run(&spec, Some(std::path::Path::new(&dir)), 0)?;
    for t in &report.trials {
        println!("{}: final loss {:.6e}", t.label(), t.final_row().loss);
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
