use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use shallow_denoise::experiment::{self, builtin_group, builtin_spec, ExperimentSpec, RunReport};
use shallow_denoise::{Error, Result};

/// Shallow ReLU denoiser experiments.
#[derive(Parser)]
#[command(name = "denoise", version)]
struct Cli {
    /// Overrides the seed of every spec.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory receiving artifacts.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads for concurrent trials (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment spec file.
    Run {
        spec: PathBuf,
        /// Validate only; no training.
        #[arg(long)]
        check: bool,
    },
    /// Run a builtin: fig1, fig2 or suite.
    Builtin {
        name: String,
        #[arg(long)]
        check: bool,
    },
    /// Analytic ReLU moments against Monte Carlo.
    MomentsBench {
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
    /// Validate a spec file, or every builtin when none is given.
    Check { spec: Option<PathBuf> },
}

fn load(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)?;
    ExperimentSpec::from_text(&text)
}

fn with_seed(mut spec: ExperimentSpec, seed: Option<u64>) -> ExperimentSpec {
    if let Some(s) = seed {
        spec.seed = s;
    }
    spec
}

fn report(r: &RunReport) {
    println!("{}: {} trial(s)", r.name, r.trials.len());
    if let Some(f) = &r.closed_form {
        println!(
            "  closed form: cost {:.6} conjectural: {}",
            shallow_denoise::closed_form::representation_cost_closed_form(f),
            f.conjectural()
        );
    }
    for t in &r.trials {
        let row = t.final_row();
        let align = t.alignment.as_ref().map_or(String::new(), |a| format!(" min|cos| {:.4}", a.min_abs_cosine));
        println!(
            "  {:<16} loss {:.6e} balanced cost {:.6}{align}",
            t.label(),
            row.loss,
            row.balanced_cost
        );
    }
    for f in &r.files {
        println!("  wrote {}", f.display());
    }
}

fn run_specs(specs: Vec<ExperimentSpec>, cli: &Cli, check: bool) -> Result<()> {
    for spec in specs {
        let spec = with_seed(spec, cli.seed);
        spec.validate()?;
        if check {
            println!("{}: ok", spec.name);
            continue;
        }
        report(&experiment::run(&spec, Some(&cli.out_dir), cli.threads)?);
    }
    Ok(())
}

fn main_inner(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Run { spec, check } => run_specs(vec![load(spec)?], cli, *check)?,
        Command::Builtin { name, check } if name == "suite" => {
            if *check {
                println!("suite: ok");
                return Ok(ExitCode::SUCCESS);
            }
            let r = experiment::suite(cli.seed.unwrap_or(0), Some(&cli.out_dir), cli.threads)?;
            for c in &r.checks {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                println!("{verdict} {:<30} value {:.6e} threshold {:.3e} {}", c.name, c.value, c.threshold, c.detail);
            }
            for f in &r.files {
                println!("  wrote {}", f.display());
            }
            if !r.passed() {
                return Ok(ExitCode::from(4));
            }
        }
        Command::Builtin { name, check } => run_specs(builtin_group(name)?, cli, *check)?,
        Command::MomentsBench { samples } => {
            print!("{}", experiment::moments_bench(*samples, cli.seed.unwrap_or(0), Some(&cli.out_dir))?);
        }
        Command::Check { spec: Some(p) } => run_specs(vec![load(p)?], cli, true)?,
        Command::Check { spec: None } => {
            let names = ["fig1", "fig2_obtuse", "fig2_equilateral", "equilateral_cost"];
            let specs = names.iter().map(|n| builtin_spec(n)).collect::<Result<Vec<_>>>()?;
            run_specs(specs, cli, true)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(code) => code,
        Err(e) => {
            let context = match &e {
                Error::Io(_) => "i/o",
                _ if e.exit_code() == 2 => "config",
                _ => "numeric",
            };
            eprintln!("error ({context}): {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
