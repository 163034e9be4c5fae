//! Declarative experiment specs, the builtin experiments (`fig1`, `fig2`) and
//! the property suite.
//!
//! A spec file is flat `key = value` text. Unprefixed training keys (see
//! [`TrainConfig::from_text`]) apply to every regime; `<regime>.<key>`
//! overrides them for one regime.
//!
//! ```text
//! name = fig1
//! geometry = line
//! geometry.n = 4
//! geometry.lo = -5
//! geometry.hi = 5
//! regimes = online, offline
//! sigma = 1.5
//! lambda = 1e-5
//! online.mode = online
//! online.iterations = 100000
//! offline.mode = offline
//! offline.replicates = 9000
//! compare = emmse
//! outputs = csv, svg
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analysis::{
    alignment_report, contractivity_1d, mse_vs_prior, AlignmentReport, MseMethod, Prior,
};
use crate::baselines::{EmmseDenoiser, NearestNeighbor};
use crate::closed_form::{
    build_1d, build_acute_simplex, build_colinear, build_obtuse_simplex, build_perturbed_rays_from_chains,
    build_rays, representation_cost_closed_form, rho_from_noisy, serialize, ClosedForm,
};
use crate::gaussian_moments::{
    benchmark_csv, marginalized_loss, marginalized_loss_parts, mc_oracle, moment_benchmark, standard_bvn_tail,
};
use crate::geometry::{
    check_rays, classify_simplex, fit_subspace, CleanDataset, GeometryTag, NoisyDataset, ANGLE_TOL, SUBSPACE_TOL,
};
use crate::io::{clean_to_csv, fmt_real, parse_kv, write_text, KvEntry};
use crate::linalg::{dist, norm};
use crate::network::ShallowNet;
use crate::svg::line_chart;
use crate::synth;
use crate::training::{gen_noisy, train, trace_csv, Mode, TraceRow, TrainConfig};
use crate::{Denoiser, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySpec {
    /// `n` equally spaced scalars on `[lo, hi]`.
    Line { n: usize, lo: f64, hi: f64 },
    Points(Vec<Vec<f64>>),
    /// `{(0,0), (1,0), (−0.5,0.85)}` scaled; obtuse at the origin.
    ObtuseTriangle { scale: f64 },
    /// Equilateral triangle inscribed in the circle of the given radius.
    Equilateral { radius: f64 },
}

impl GeometrySpec {
    pub fn dataset(&self) -> Result<CleanDataset> {
        match self {
            GeometrySpec::Line { n, lo, hi } => {
                if *n == 0 || !(hi > lo) {
                    return Err(Error::InvalidParameter("line geometry needs n >= 1 and hi > lo".into()));
                }
                let xs: Vec<f64> = if *n == 1 {
                    vec![0.5 * (lo + hi)]
                } else {
                    (0..*n).map(|i| lo + (hi - lo) * i as f64 / (*n - 1) as f64).collect()
                };
                CleanDataset::from_scalars(&xs)
            }
            GeometrySpec::Points(p) => CleanDataset::new(p.clone()),
            GeometrySpec::ObtuseTriangle { scale } => {
                CleanDataset::new(vec![vec![0.0, 0.0], vec![*scale, 0.0], vec![-0.5 * scale, 0.85 * scale]])
            }
            GeometrySpec::Equilateral { radius } => CleanDataset::new(
                (0..3)
                    .map(|i| {
                        let t = std::f64::consts::PI * (0.5 + 2.0 * i as f64 / 3.0);
                        vec![radius * t.cos(), radius * t.sin()]
                    })
                    .collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    Gaussian,
    /// Deterministic samples on and inside balls of this radius.
    Ball { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    ClosedForm,
    Emmse,
    Nn1,
    Marginalized,
}

impl Comparison {
    pub fn as_str(self) -> &'static str {
        match self {
            Comparison::ClosedForm => "closed_form",
            Comparison::Emmse => "emmse",
            Comparison::Nn1 => "nn1",
            Comparison::Marginalized => "marginalized",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "closed_form" => Comparison::ClosedForm,
            "emmse" => Comparison::Emmse,
            "nn1" => Comparison::Nn1,
            "marginalized" => Comparison::Marginalized,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Regime {
    pub name: String,
    pub config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub geometry: GeometrySpec,
    pub noise: NoiseSpec,
    pub regimes: Vec<Regime>,
    pub width: usize,
    pub init_radius: f64,
    pub use_skip: bool,
    /// Independent trials use seeds `seed, seed + 1, ...`.
    pub trials: usize,
    pub seed: u64,
    pub comparisons: Vec<Comparison>,
    pub outputs: Vec<OutputKind>,
    /// Ball radius for multivariate closed forms; defaults to the largest
    /// observed noise radius.
    pub rho: Option<f64>,
    pub significance: f64,
    /// `(lo, hi, n)` per axis for the function-space grid.
    pub grid: Option<(f64, f64, usize)>,
}

fn list(value: &str) -> Vec<&str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn parse_points(e: &KvEntry) -> Result<Vec<Vec<f64>>> {
    e.value
        .split(';')
        .map(|p| {
            p.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|err| e.error(err.to_string())))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

impl ExperimentSpec {
    pub fn from_text(text: &str) -> Result<Self> {
        let entries = parse_kv(text)?;
        let find = |k: &str| entries.iter().find(|e| e.key == k);
        let regime_names: Vec<String> = match find("regimes") {
            Some(e) => list(&e.value).into_iter().map(String::from).collect(),
            None => vec!["offline".to_string()],
        };
        let geometry_kind = find("geometry").map(|e| e.value.clone()).unwrap_or_else(|| "line".into());
        let mut base = TrainConfig::default();
        let mut spec = ExperimentSpec {
            name: String::new(),
            geometry: GeometrySpec::Line { n: 4, lo: -5.0, hi: 5.0 },
            noise: NoiseSpec::Gaussian,
            regimes: Vec::new(),
            width: 100,
            init_radius: 1.0,
            use_skip: true,
            trials: 1,
            seed: 0,
            comparisons: Vec::new(),
            outputs: vec![OutputKind::Csv],
            rho: None,
            significance: 0.05,
            grid: None,
        };
        let (mut g_n, mut g_lo, mut g_hi, mut g_scale, mut g_points) = (4usize, -5.0, 5.0, 1.0, None);
        let (mut grid_lo, mut grid_hi, mut grid_n) = (None, None, None);
        let mut noise_kind = "gaussian".to_string();
        let mut noise_radius = None;
        let mut per_regime: Vec<&KvEntry> = Vec::new();
        for e in &entries {
            match e.key.as_str() {
                "name" => spec.name = e.value.clone(),
                "regimes" | "geometry" => {}
                "geometry.n" => g_n = e.parse()?,
                "geometry.lo" => g_lo = e.parse()?,
                "geometry.hi" => g_hi = e.parse()?,
                "geometry.scale" | "geometry.radius" => g_scale = e.parse()?,
                "geometry.points" => g_points = Some(parse_points(e)?),
                "noise" => noise_kind = e.value.clone(),
                "noise.radius" => noise_radius = Some(e.parse::<f64>()?),
                "width" => spec.width = e.parse()?,
                "init_radius" => spec.init_radius = e.parse()?,
                "use_skip" => spec.use_skip = e.parse()?,
                "trials" => spec.trials = e.parse()?,
                "rho" => spec.rho = Some(e.parse()?),
                "significance" => spec.significance = e.parse()?,
                "grid.lo" => grid_lo = Some(e.parse::<f64>()?),
                "grid.hi" => grid_hi = Some(e.parse::<f64>()?),
                "grid.n" => grid_n = Some(e.parse::<usize>()?),
                "compare" => {
                    spec.comparisons = list(&e.value)
                        .into_iter()
                        .map(|c| Comparison::parse(c).ok_or_else(|| e.error(format!("unknown comparison `{c}`"))))
                        .collect::<Result<_>>()?
                }
                "outputs" => {
                    spec.outputs = list(&e.value)
                        .into_iter()
                        .map(|o| match o {
                            "csv" => Ok(OutputKind::Csv),
                            "svg" => Ok(OutputKind::Svg),
                            _ => Err(e.error(format!("unknown output `{o}`"))),
                        })
                        .collect::<Result<_>>()?
                }
                key => {
                    if let Some((prefix, _)) = key.split_once('.') {
                        if regime_names.iter().any(|r| r == prefix) {
                            per_regime.push(e);
                            continue;
                        }
                    }
                    // `seed` belongs to both the experiment and the shared training keys.
                    if key == "seed" {
                        spec.seed = e.parse()?;
                    }
                    if !base.apply(e)? {
                        return Err(e.error("unknown key"));
                    }
                }
            }
        }
        spec.geometry = match geometry_kind.as_str() {
            "line" => GeometrySpec::Line { n: g_n, lo: g_lo, hi: g_hi },
            "points" => GeometrySpec::Points(g_points.ok_or_else(|| Error::ConfigParse {
                line: find("geometry").map_or(0, |e| e.line),
                message: "`geometry = points` needs `geometry.points`".into(),
            })?),
            "obtuse_triangle" => GeometrySpec::ObtuseTriangle { scale: g_scale },
            "equilateral" => GeometrySpec::Equilateral { radius: g_scale },
            other => return Err(find("geometry").expect("present").error(format!("unknown geometry `{other}`"))),
        };
        spec.noise = match noise_kind.as_str() {
            "gaussian" => NoiseSpec::Gaussian,
            "ball" => NoiseSpec::Ball {
                radius: noise_radius.ok_or_else(|| find("noise").expect("present").error("needs `noise.radius`"))?,
            },
            other => return Err(find("noise").expect("present").error(format!("unknown noise `{other}`"))),
        };
        if let (Some(lo), Some(hi)) = (grid_lo, grid_hi) {
            spec.grid = Some((lo, hi, grid_n.unwrap_or(201)));
        }
        for name in &regime_names {
            let mut cfg = base.clone();
            if name == "online" {
                cfg.mode = Mode::Online;
            } else if name == "offline" && cfg.mode == Mode::Online {
                cfg.mode = Mode::Offline { replicates: 100 };
            }
            for e in per_regime.iter().filter(|e| e.key.split_once('.').map(|(p, _)| p) == Some(name.as_str())) {
                let inner = KvEntry { line: e.line, key: e.key[name.len() + 1..].to_string(), value: e.value.clone() };
                if !cfg.apply(&inner)? {
                    return Err(e.error("unknown key"));
                }
            }
            spec.regimes.push(Regime { name: name.clone(), config: cfg });
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.name.trim().is_empty() {
            return bad("experiment name must be nonempty".into());
        }
        if self.name.contains(['/', '\\']) {
            return bad("experiment name must not contain path separators".into());
        }
        if self.regimes.is_empty() || self.width == 0 || self.trials == 0 {
            return bad("need at least one regime, width >= 1 and trials >= 1".into());
        }
        for (i, o) in self.outputs.iter().enumerate() {
            if self.outputs[..i].contains(o) {
                return bad("output targets must be distinct".into());
            }
        }
        for (i, r) in self.regimes.iter().enumerate() {
            if self.regimes[..i].iter().any(|q| q.name == r.name) {
                return bad(format!("duplicate regime `{}`", r.name));
            }
            r.config.validate()?;
            if matches!(self.noise, NoiseSpec::Ball { .. }) && r.config.mode == Mode::Online {
                return bad("ball noise needs offline training".into());
            }
        }
        if !(self.init_radius > 0.0) || !(0.0..1.0).contains(&self.significance) {
            return bad("init_radius must be > 0 and significance in [0, 1)".into());
        }
        if let Some(r) = self.rho {
            if !(r > 0.0) {
                return bad("rho must be > 0".into());
            }
        }
        self.geometry.dataset().map(|_| ())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "name = {}", self.name);
        match &self.geometry {
            GeometrySpec::Line { n, lo, hi } => {
                let _ = writeln!(out, "geometry = line\ngeometry.n = {n}\ngeometry.lo = {lo}\ngeometry.hi = {hi}");
            }
            GeometrySpec::Points(p) => {
                let pts: Vec<String> =
                    p.iter().map(|q| q.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")).collect();
                let _ = writeln!(out, "geometry = points\ngeometry.points = {}", pts.join("; "));
            }
            GeometrySpec::ObtuseTriangle { scale } => {
                let _ = writeln!(out, "geometry = obtuse_triangle\ngeometry.scale = {scale}");
            }
            GeometrySpec::Equilateral { radius } => {
                let _ = writeln!(out, "geometry = equilateral\ngeometry.radius = {radius}");
            }
        }
        if let NoiseSpec::Ball { radius } = self.noise {
            let _ = writeln!(out, "noise = ball\nnoise.radius = {radius}");
        }
        let _ = writeln!(out, "width = {}\ninit_radius = {}\nuse_skip = {}", self.width, self.init_radius, self.use_skip);
        let _ = writeln!(out, "trials = {}\nseed = {}", self.trials, self.seed);
        if let Some(r) = self.rho {
            let _ = writeln!(out, "rho = {r}");
        }
        let _ = writeln!(out, "significance = {}", self.significance);
        if let Some((lo, hi, n)) = self.grid {
            let _ = writeln!(out, "grid.lo = {lo}\ngrid.hi = {hi}\ngrid.n = {n}");
        }
        if !self.comparisons.is_empty() {
            let c: Vec<&str> = self.comparisons.iter().map(|c| c.as_str()).collect();
            let _ = writeln!(out, "compare = {}", c.join(", "));
        }
        let o: Vec<&str> = self.outputs.iter().map(|o| if *o == OutputKind::Csv { "csv" } else { "svg" }).collect();
        let _ = writeln!(out, "outputs = {}", o.join(", "));
        let names: Vec<&str> = self.regimes.iter().map(|r| r.name.as_str()).collect();
        let _ = writeln!(out, "regimes = {}", names.join(", "));
        for r in &self.regimes {
            for line in r.config.to_text().lines() {
                // The experiment seed drives every trial.
                if !line.starts_with("seed ") {
                    let _ = writeln!(out, "{}.{line}", r.name);
                }
            }
        }
        out
    }

    /// Shorthand for tests and quick looks: every regime runs `iterations`.
    pub fn with_iterations(mut self, iterations: usize) -> Self {
        for r in &mut self.regimes {
            r.config.iterations = iterations;
            r.config.trace_every = r.config.trace_every.min(iterations);
        }
        self
    }

    fn sigma(&self) -> f64 {
        self.regimes[0].config.sigma
    }
}

/// Named builtin specs: `fig1`, `fig2_obtuse`, `fig2_equilateral`, `equilateral_cost`.
pub fn builtin_spec(name: &str) -> Result<ExperimentSpec> {
    let text = match name {
        "fig1" => FIG1,
        "fig2_obtuse" => &FIG2.replace("@NAME", "fig2_obtuse").replace("@GEOM", "obtuse_triangle\ngeometry.scale = 1"),
        "fig2_equilateral" => &FIG2.replace("@NAME", "fig2_equilateral").replace("@GEOM", "equilateral\ngeometry.radius = 1"),
        "equilateral_cost" => EQUILATERAL_COST,
        _ => return Err(Error::InvalidParameter(format!("unknown builtin `{name}`"))),
    };
    ExperimentSpec::from_text(text)
}

/// Builtin names grouped as the CLI exposes them.
pub fn builtin_group(name: &str) -> Result<Vec<ExperimentSpec>> {
    match name {
        "fig1" => Ok(vec![builtin_spec("fig1")?]),
        "fig2" => Ok(vec![builtin_spec("fig2_obtuse")?, builtin_spec("fig2_equilateral")?]),
        _ => Err(Error::InvalidParameter(format!("unknown builtin `{name}`"))),
    }
}

const FIG1: &str = "\
name = fig1
geometry = line
geometry.n = 4
geometry.lo = -5
geometry.hi = 5
sigma = 1.5
lambda = 1e-5
width = 200
init_radius = 9
regimes = online, offline
optimizer = adam
schedule = cosine
online.iterations = 100000
online.batch_size = 64
online.learning_rate = 1e-3
online.trace_every = 1000
offline.replicates = 9000
offline.iterations = 20000
offline.batch_size = 36000
offline.learning_rate = 1e-2
offline.trace_every = 100
compare = emmse
grid.lo = -9
grid.hi = 9
grid.n = 361
outputs = csv, svg
";

const FIG2: &str = "\
name = @NAME
geometry = @GEOM
sigma = 0.05
lambda = 1e-5
width = 100
init_radius = 1.5
trials = 3
regimes = offline
offline.replicates = 100
offline.iterations = 50000
offline.batch_size = 300
offline.learning_rate = 1e-2
offline.schedule = cosine
offline.trace_every = 500
compare = closed_form
significance = 0.05
grid.lo = -2
grid.hi = 2
grid.n = 41
outputs = csv, svg
";

const EQUILATERAL_COST: &str = "\
name = equilateral_cost
geometry = equilateral
geometry.radius = 1
noise = ball
noise.radius = 0.25
rho = 0.25
sigma = 0
lambda = 1e-5
width = 100
init_radius = 1.5
regimes = offline
offline.replicates = 100
offline.iterations = 50000
offline.batch_size = 300
offline.learning_rate = 1e-2
offline.schedule = cosine
offline.trace_every = 500
compare = closed_form
grid.lo = -2
grid.hi = 2
grid.n = 41
outputs = csv, svg
";

/// One trained network.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub regime: String,
    pub seed: u64,
    pub net: ShallowNet,
    pub trace: Vec<TraceRow>,
    pub alignment: Option<AlignmentReport>,
}

impl TrialResult {
    pub fn label(&self) -> String {
        format!("{}_s{}", self.regime, self.seed)
    }

    pub fn final_row(&self) -> TraceRow {
        *self.trace.last().expect("training records a final row")
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub name: String,
    pub clean: CleanDataset,
    /// Noisy training data of the first offline trial, if any.
    pub noisy: Option<NoisyDataset>,
    pub geometry: Option<GeometryTag>,
    pub closed_form: Option<ClosedForm>,
    pub trials: Vec<TrialResult>,
    pub files: Vec<PathBuf>,
}

/// Geometry detection and the matching closed form, tried in order:
/// univariate, simplex, rays, line through the origin.
pub fn auto_closed_form(noisy: &NoisyDataset, rho: f64) -> Result<(GeometryTag, ClosedForm)> {
    let ds = noisy.clean();
    if ds.dim() == 1 {
        return Ok((GeometryTag::Univariate, ClosedForm::Univariate(build_1d(noisy)?)));
    }
    if ds.len() <= ds.dim() + 1 {
        if let Ok(tag) = classify_simplex(ds, ANGLE_TOL) {
            match tag {
                GeometryTag::ObtuseSimplex { .. } => {
                    return Ok((tag, ClosedForm::RankOneSum(build_obtuse_simplex(ds, rho)?)));
                }
                GeometryTag::AcuteSimplex | GeometryTag::Equilateral => {
                    return Ok((tag, ClosedForm::RankOneSum(build_acute_simplex(ds, rho)?)));
                }
                _ => {}
            }
        }
    }
    if let Ok(r) = check_rays(ds, SUBSPACE_TOL) {
        let f = build_rays(&r, rho)?;
        return Ok((GeometryTag::Rays(r), ClosedForm::RankOneSum(f)));
    }
    let fit = fit_subspace(ds, SUBSPACE_TOL);
    if fit.rank() == 1 {
        let f = build_colinear(ds, rho)?;
        let direction = fit.basis[0].clone();
        let coords = ds.points().iter().map(|p| crate::linalg::dot(p, &direction)).collect();
        return Ok((GeometryTag::Colinear { direction, coords }, ClosedForm::RankOneSum(f)));
    }
    Err(Error::ModelShapeUnsupported)
}

fn training_data(spec: &ExperimentSpec, clean: &CleanDataset, cfg: &TrainConfig, seed: u64) -> Result<Option<NoisyDataset>> {
    match cfg.mode {
        Mode::Online => Ok(None),
        Mode::Offline { replicates } => Ok(Some(match spec.noise {
            NoiseSpec::Gaussian => gen_noisy(clean, replicates, cfg.sigma, seed)?,
            NoiseSpec::Ball { radius } => synth::ball_samples(clean, replicates, radius)?,
        })),
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

/// Runs every (regime, trial) pair, writing artifacts under
/// `out_dir/<name>/` when `out_dir` is given. Trials run concurrently on up
/// to `threads` threads (0 picks the machine default).
pub fn run(spec: &ExperimentSpec, out_dir: Option<&Path>, threads: usize) -> Result<RunReport> {
    spec.validate()?;
    let clean = spec.geometry.dataset()?;
    let wants = |c: Comparison| spec.comparisons.contains(&c);

    let jobs: Vec<(usize, u64)> =
        (0..spec.regimes.len()).flat_map(|r| (0..spec.trials as u64).map(move |t| (r, spec.seed + t))).collect();
    let run_one = |&(r, seed): &(usize, u64)| -> Result<(TrialResult, Option<NoisyDataset>)> {
        let regime = &spec.regimes[r];
        let mut cfg = regime.config.clone();
        cfg.seed = seed;
        let noisy = training_data(spec, &clean, &cfg, seed)?;
        let net0 = ShallowNet::init(clean.dim(), spec.width, spec.use_skip, spec.init_radius, seed);
        let out = train(&net0, &clean, noisy.as_ref(), &cfg)?;
        Ok((TrialResult { regime: regime.name.clone(), seed, net: out.net, trace: out.trace, alignment: None }, noisy))
    };
    let results: Vec<Result<(TrialResult, Option<NoisyDataset>)>> =
        pool(threads)?.install(|| jobs.par_iter().map(run_one).collect());
    let mut trials = Vec::with_capacity(results.len());
    let mut noisy_first = None;
    for r in results {
        let (t, n) = r?;
        if noisy_first.is_none() {
            noisy_first = n;
        }
        trials.push(t);
    }

    let sigma = spec.sigma();
    let (mut geometry, mut closed_form) = (None, None);
    if wants(Comparison::ClosedForm) {
        let reference = match &noisy_first {
            Some(n) => n.clone(),
            None => gen_noisy(&clean, 1000, sigma, spec.seed)?,
        };
        let rho = spec.rho.unwrap_or_else(|| rho_from_noisy(&reference));
        let (tag, f) = auto_closed_form(&reference, rho)?;
        geometry = Some(tag);
        closed_form = Some(f);
    }
    if clean.dim() >= 2 {
        let tag = match &geometry {
            Some(t) => Some(t.clone()),
            None => classify_simplex(&clean, ANGLE_TOL).ok(),
        };
        if let Some(tag) = &tag {
            for t in &mut trials {
                t.alignment = alignment_report(&t.net, &clean, tag, spec.significance).ok();
            }
        }
        geometry = tag;
    }

    let mut report = RunReport {
        name: spec.name.clone(),
        clean,
        noisy: noisy_first,
        geometry,
        closed_form,
        trials,
        files: Vec::new(),
    };
    if let Some(dir) = out_dir {
        report.files = write_artifacts(spec, &report, &dir.join(&spec.name))?;
    }
    Ok(report)
}

fn denoisers<'a>(spec: &ExperimentSpec, report: &'a RunReport) -> Result<Vec<(String, Box<dyn Denoiser + 'a>)>> {
    let mut out: Vec<(String, Box<dyn Denoiser + 'a>)> = Vec::new();
    for t in &report.trials {
        out.push((t.label(), Box::new(&t.net)));
    }
    if let Some(f) = &report.closed_form {
        out.push(("closed_form".into(), Box::new(f)));
    }
    if spec.comparisons.contains(&Comparison::Emmse) {
        let sigma = spec.sigma();
        if sigma > 0.0 {
            out.push(("emmse".into(), Box::new(EmmseDenoiser::new(report.clean.clone(), sigma)?)));
        }
    }
    if spec.comparisons.contains(&Comparison::Nn1) {
        out.push(("nn1".into(), Box::new(NearestNeighbor(report.clean.clone()))));
    }
    Ok(out)
}

fn grid_axis(spec: &ExperimentSpec, clean: &CleanDataset) -> (f64, f64, usize) {
    spec.grid.unwrap_or_else(|| {
        let lo = clean.points().iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let hi = clean.points().iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        let pad = 0.5 * (hi - lo).max(1.0);
        (lo - pad, hi + pad, if clean.dim() == 1 { 201 } else { 41 })
    })
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Function-space CSV: grid coordinates then every denoiser's output.
pub fn function_csv(names: &[String], fs: &[&dyn Denoiser], grid: &[Vec<f64>]) -> String {
    let d = grid.first().map_or(1, Vec::len);
    let mut out = String::new();
    for j in 0..d {
        let _ = write!(out, "{}y{j}", if j > 0 { "," } else { "" });
    }
    for n in names {
        for j in 0..d {
            if d == 1 {
                let _ = write!(out, ",{n}");
            } else {
                let _ = write!(out, ",{n}_{j}");
            }
        }
    }
    out.push('\n');
    for y in grid {
        let row: Vec<String> = y.iter().map(|v| fmt_real(*v)).collect();
        out.push_str(&row.join(","));
        for f in fs {
            for v in f.denoise(y) {
                let _ = write!(out, ",{}", fmt_real(v));
            }
        }
        out.push('\n');
    }
    out
}

fn summary_csv(report: &RunReport) -> String {
    let mut out = String::from("regime,seed,final_loss,penalty,balanced_cost,min_abs_cosine,significant_units\n");
    for t in &report.trials {
        let r = t.final_row();
        let (c, u) = match &t.alignment {
            Some(a) => (fmt_real(a.min_abs_cosine), a.units.len().to_string()),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{c},{u}",
            t.regime,
            t.seed,
            fmt_real(r.loss),
            fmt_real(r.penalty),
            fmt_real(r.balanced_cost)
        );
    }
    out
}

fn write_artifacts(spec: &ExperimentSpec, report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let csv = spec.outputs.contains(&OutputKind::Csv);
    let svg = spec.outputs.contains(&OutputKind::Svg);
    let mut files = Vec::new();
    let mut put = |name: String, text: String| -> Result<()> {
        let p = dir.join(name);
        write_text(&p, &text)?;
        files.push(p);
        Ok(())
    };
    let clean = &report.clean;
    let named = denoisers(spec, report)?;
    let names: Vec<String> = named.iter().map(|(n, _)| n.clone()).collect();
    let fs: Vec<&dyn Denoiser> = named.iter().map(|(_, f)| f.as_ref()).collect();
    let (lo, hi, n) = grid_axis(spec, clean);
    if csv {
        put("spec.txt".into(), spec.to_text())?;
        put("clean.csv".into(), clean_to_csv(clean))?;
        put("summary.csv".into(), summary_csv(report))?;
        for t in &report.trials {
            put(format!("trace_{}.csv", t.label()), trace_csv(&t.trace))?;
            put(format!("net_{}.json", t.label()), t.net.to_json())?;
            if let Some(a) = &t.alignment {
                put(format!("alignment_{}.csv", t.label()), a.to_csv())?;
            }
        }
        if let Some(f) = &report.closed_form {
            put("closed_form.json".into(), serialize(f))?;
            let mut s = String::from("key,value\n");
            let _ = writeln!(s, "representation_cost,{}", fmt_real(representation_cost_closed_form(f)));
            let _ = writeln!(s, "conjectural,{}", f.conjectural());
            put("closed_form_cost.csv".into(), s)?;
        }
    }
    match clean.dim() {
        1 => {
            let xs = axis(lo, hi, n);
            let grid: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x]).collect();
            if csv {
                put("function.csv".into(), function_csv(&names, &fs, &grid))?;
            }
            if svg {
                let series: Vec<(&str, Vec<f64>)> =
                    named.iter().map(|(nm, f)| (nm.as_str(), xs.iter().map(|x| f.denoise(&[*x])[0]).collect())).collect();
                put("function.svg".into(), line_chart(&spec.name, &xs, &series))?;
            }
            if csv {
                if let (Some(ClosedForm::Univariate(f)), Some(noisy)) = (&report.closed_form, &report.noisy) {
                    let scale = hi - lo;
                    let q = axis(lo, hi, 1001);
                    let c = contractivity_1d(f, noisy, &q, 1e-3 * scale)?;
                    let mut s = String::from("key,value\n");
                    let _ = writeln!(s, "alpha_observed,{}", fmt_real(c.alpha_observed));
                    let _ = writeln!(s, "worst_query,{}", c.worst_query.first().map_or(String::new(), |v| fmt_real(*v)));
                    let _ = writeln!(s, "queries_evaluated,{}", c.queries_evaluated);
                    let _ = writeln!(s, "queries_excluded,{}", c.queries_excluded);
                    let _ = writeln!(s, "passed,{}", c.passed());
                    put("contraction.csv".into(), s)?;
                }
            }
        }
        2 => {
            if csv {
                let ax = axis(lo, hi, n);
                let grid: Vec<Vec<f64>> = ax.iter().flat_map(|y| ax.iter().map(move |x| vec![*x, *y])).collect();
                put("function.csv".into(), function_csv(&names, &fs, &grid))?;
            }
            if svg {
                let rho = spec.rho.unwrap_or_else(|| report.noisy.as_ref().map_or(0.1, rho_from_noisy));
                for t in &report.trials {
                    if let Some(a) = &t.alignment {
                        let title = format!("{} {} (min |cos| {:.4})", spec.name, t.label(), a.min_abs_cosine);
                        put(format!("alignment_{}.svg", t.label()), a.to_svg(clean, rho, &title)?)?;
                    }
                }
                if let Some(ClosedForm::RankOneSum(f)) = &report.closed_form {
                    let net = ShallowNet::from_closed_form(report.closed_form.as_ref().expect("checked"));
                    if let (Some(tag), true) = (&report.geometry, f.dim() == 2) {
                        let a = alignment_report(&net, clean, tag, 0.0)?;
                        put("alignment_predicted.svg".into(), a.to_svg(clean, rho, &format!("{} predicted", spec.name))?)?;
                    }
                }
            }
        }
        _ => {}
    }
    if csv && spec.comparisons.contains(&Comparison::Marginalized) {
        let sigma = spec.sigma();
        let mut s = String::from("denoiser,mc_mse,mc_se,exact\n");
        for (i, (nm, f)) in named.iter().enumerate() {
            let (m, se) = mc_oracle(f.as_ref(), clean, sigma, 100_000, spec.seed.wrapping_add(i as u64))?;
            let exact = report
                .trials
                .iter()
                .find(|t| &t.label() == nm)
                .and_then(|t| marginalized_loss(&t.net, clean, sigma).ok())
                .map_or(String::new(), fmt_real);
            let _ = writeln!(s, "{nm},{},{},{exact}", fmt_real(m), fmt_real(se));
        }
        put("marginalized.csv".into(), s)?;
    }
    Ok(files)
}

/// One line of the property suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteCheck {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl SuiteCheck {
    fn new(name: &str, passed: bool, value: f64, threshold: f64, detail: String) -> Self {
        Self { name: name.into(), passed, value, threshold, detail }
    }
}

/// CSV `check,passed,value,threshold,detail`.
pub fn suite_csv(checks: &[SuiteCheck]) -> String {
    let mut out = String::from("check,passed,value,threshold,detail\n");
    for c in checks {
        let _ = writeln!(
            out,
            "{},{},{},{},\"{}\"",
            c.name,
            c.passed,
            fmt_real(c.value),
            fmt_real(c.threshold),
            c.detail.replace('"', "'")
        );
    }
    out
}

/// Balanced cost of the exact network equals the closed-form cost, and the
/// univariate min-cost net uses `2N − 2` units.
pub fn suite_minimal_representation(seed: u64, count: usize) -> Result<(SuiteCheck, String)> {
    let rows: Vec<Result<(usize, usize, f64, f64)>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let n = 2 + (i as usize % 9);
            let noisy = synth::separated_1d(seed, i, n)?;
            let f = ClosedForm::Univariate(build_1d(&noisy)?);
            let net = ShallowNet::from_closed_form(&f);
            Ok((n, net.width(), net.balanced_cost(), representation_cost_closed_form(&f)))
        })
        .collect();
    let mut csv = String::from("instance,n,units,balanced_cost,closed_form_cost\n");
    let (mut ok, mut worst) = (true, 0.0f64);
    for (i, r) in rows.into_iter().enumerate() {
        let (n, units, bc, cost) = r?;
        worst = worst.max((bc - cost).abs());
        ok &= units == 2 * n - 2 && (bc - cost).abs() <= 1e-10;
        let _ = writeln!(csv, "{i},{n},{units},{},{}", fmt_real(bc), fmt_real(cost));
    }
    let check = SuiteCheck::new("minimal_representation", ok, worst, 1e-10, format!("{count} datasets"));
    Ok((check, csv))
}

/// The min-cost interpolant beats the empirical MMSE denoiser under the
/// uniform prior, increasingly so as the noise shrinks.
pub fn suite_mse_vs_sigma(seed: u64, sigmas: &[f64]) -> Result<(SuiteCheck, String)> {
    let ds = GeometrySpec::Line { n: 4, lo: -5.0, hi: 5.0 }.dataset()?;
    let prior = Prior::uniform(-5.0, 5.0)?;
    let mut csv = String::from("sigma,mse_fstar,mse_emmse,ratio\n");
    let mut ratios = Vec::new();
    let mut ok = true;
    for &s in sigmas {
        let noisy = gen_noisy(&ds, 9000, s, seed)?;
        let f = build_1d(&noisy)?;
        let g = EmmseDenoiser::new(ds.clone(), s)?;
        let mf = mse_vs_prior(&f, &prior, s, MseMethod::Quadrature)?.value;
        let mg = mse_vs_prior(&g, &prior, s, MseMethod::Quadrature)?.value;
        ok &= mg > mf;
        ratios.push(mg / mf);
        let _ = writeln!(csv, "{},{},{},{}", fmt_real(s), fmt_real(mf), fmt_real(mg), fmt_real(mg / mf));
    }
    // `sigmas` is listed in decreasing order.
    ok &= ratios.windows(2).all(|w| w[1] >= w[0]);
    let worst = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((SuiteCheck::new("mse_fstar_below_emmse", ok, worst, 1.0, format!("ratios {ratios:?}")), csv))
}

/// Contractivity toward the clean points on random separated datasets.
pub fn suite_contractivity(seed: u64, count: usize, queries: usize) -> Result<(SuiteCheck, String)> {
    let rows: Vec<Result<(usize, f64, usize)>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let n = 2 + (i as usize % 7);
            let noisy = synth::separated_1d(seed, i, n)?;
            let f = build_1d(&noisy)?;
            let xs: Vec<f64> = noisy.clean().points().iter().map(|p| p[0]).collect();
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let scale = hi - lo;
            let q = axis(lo - 0.5 * scale, hi + 0.5 * scale, queries);
            let r = contractivity_1d(&f, &noisy, &q, 1e-3 * scale)?;
            Ok((n, r.alpha_observed, r.queries_evaluated))
        })
        .collect();
    let mut csv = String::from("instance,n,alpha_observed,queries_evaluated\n");
    let (mut worst, mut passed) = (0.0f64, 0usize);
    for (i, r) in rows.into_iter().enumerate() {
        let (n, a, q) = r?;
        worst = worst.max(a);
        passed += usize::from(a < 1.0);
        let _ = writeln!(csv, "{i},{n},{},{q}", fmt_real(a));
    }
    let check = SuiteCheck::new("contractivity", passed == count, worst, 1.0, format!("{passed}/{count} contractive"));
    Ok((check, csv))
}

/// Analytic ReLU moments against stratified Monte Carlo.
pub fn suite_moments(seed: u64, samples: usize) -> Result<(SuiteCheck, String)> {
    let rows = moment_benchmark(samples, seed)?;
    let orthant = standard_bvn_tail(0.0, 0.0, -0.5);
    let worst = rows.iter().map(|r| r.normalized_error()).fold(0.0, f64::max);
    let ok = rows.iter().all(|r| r.within_se(4.0) && r.normalized_error() <= 5e-4) && (orthant - 1.0 / 6.0).abs() <= 1e-10;
    let detail = format!("orthant {orthant:.15}");
    Ok((SuiteCheck::new("gaussian_moments", ok, worst, 5e-4, detail), benchmark_csv(&rows)))
}

/// Exact marginalized loss against Monte Carlo on random small networks.
pub fn suite_marginalized(seed: u64, count: usize, samples: usize) -> Result<(SuiteCheck, String)> {
    let rows: Vec<Result<(f64, f64, f64, f64)>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let k = 1 + (i as usize % 4);
            let mut net = ShallowNet::init(2, k, false, 1.0, seed.wrapping_add(i));
            net.b_mut().iter_mut().for_each(|b| *b = 0.0);
            let prior = synth::obtuse_simplex(seed, i, 2)?;
            let prior = CleanDataset::new(prior.points().iter().map(|p| vec![p[0], 0.5 * p[0] - 0.3]).collect())?;
            let parts = marginalized_loss_parts(&net, &prior, 0.5)?;
            let (m, se) = mc_oracle(&net, &prior, 0.5, samples, seed.wrapping_add(1000 + i))?;
            Ok((parts.total(), parts.h_form, m, se))
        })
        .collect();
    let mut csv = String::from("instance,exact,h_form,mc_mean,mc_se\n");
    let (mut ok, mut worst) = (true, 0.0f64);
    for (i, r) in rows.into_iter().enumerate() {
        let (e, h, m, se) = r?;
        let z = (e - m).abs() / se;
        worst = worst.max(z);
        ok &= z <= 4.0 && h >= -1e-10;
        let _ = writeln!(csv, "{i},{},{},{},{}", fmt_real(e), fmt_real(h), fmt_real(m), fmt_real(se));
    }
    Ok((SuiteCheck::new("marginalized_loss", ok, worst, 4.0, "max |exact - mc| / se".into()), csv))
}

/// Central finite differences against the analytic gradient.
pub fn suite_gradients(seed: u64, configs: usize) -> Result<(SuiteCheck, String)> {
    let dims = [1usize, 2, 3, 8];
    let widths = [1usize, 4, 7, 32];
    let mut csv = String::from("config,d,k,use_skip,max_rel_error\n");
    let mut worst = 0.0f64;
    for c in 0..configs {
        let (d, k) = (dims[c % dims.len()], widths[(c / dims.len()) % widths.len()]);
        let use_skip = c % 3 != 2;
        let s = seed.wrapping_add(c as u64);
        let net = ShallowNet::init(d, k, use_skip, 1.0, s);
        let ys: Vec<Vec<f64>> = (0..6).map(|j| crate::rng::normal_vec(s, &[crate::rng::tag::DATA, j], d)).collect();
        let xs: Vec<Vec<f64>> = (0..6).map(|j| crate::rng::normal_vec(s, &[crate::rng::tag::DATA, 100 + j], d)).collect();
        let e = gradient_check(&net, &ys, &xs, 1e-3)?;
        worst = worst.max(e);
        let _ = writeln!(csv, "{c},{d},{k},{use_skip},{}", fmt_real(e));
    }
    Ok((SuiteCheck::new("gradient_check", worst <= 1e-4, worst, 1e-4, format!("{configs} configurations")), csv))
}

/// Largest per-coordinate relative error between the analytic gradient and
/// central differences; coordinates where both are below `1e-8` count as exact.
/// The loss is piecewise quadratic in each coordinate, so a moderate step is
/// exact as long as no activation changes sign; the step is capped at half
/// the smallest preactivation margin to guarantee that.
pub fn gradient_check(net: &ShallowNet, ys: &[Vec<f64>], xs: &[Vec<f64>], lambda: f64) -> Result<f64> {
    let batch: Vec<(Vec<f64>, Vec<f64>)> = ys.iter().cloned().zip(xs.iter().cloned()).collect();
    let (_, g) = net.loss_and_grad_pairs(&batch, lambda)?;
    let margin = ys
        .iter()
        .flat_map(|y| {
            let reach = 1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            (0..net.width()).map(move |k| net.preactivation(k, y).abs() / reach)
        })
        .fold(f64::INFINITY, f64::min);
    let mut worst = 0.0f64;
    let mut probe = net.clone();
    for i in 0..g.len() {
        let p = net.params()[i];
        let h = (1e-4 * p.abs().max(1.0)).min(0.5 * margin);
        probe.params_mut()[i] = p + h;
        let (lp, _) = probe.loss_and_grad_pairs(&batch, lambda)?;
        probe.params_mut()[i] = p - h;
        let (lm, _) = probe.loss_and_grad_pairs(&batch, lambda)?;
        probe.params_mut()[i] = p;
        let fd = (lp - lm) / (2.0 * h);
        let scale = fd.abs().max(g[i].abs());
        if scale > 1e-8 {
            worst = worst.max((fd - g[i]).abs() / scale);
        }
    }
    Ok(worst)
}

/// Exact interpolation and ball constancy of every closed-form builder.
pub fn suite_closed_form_invariants(seed: u64, per_geometry: usize) -> Result<(SuiteCheck, String)> {
    let kinds = ["rays", "obtuse_simplex", "acute_simplex", "perturbed_rays"];
    let mut csv = String::from("geometry,instance,max_vertex_error,max_ball_error\n");
    let mut worst = 0.0f64;
    for (ki, kind) in kinds.iter().enumerate() {
        let rows: Vec<Result<(f64, f64)>> = (0..per_geometry as u64)
            .into_par_iter()
            .map(|i| {
                let (f, pts, rho) = match *kind {
                    "rays" => {
                        let (ds, rho) = synth::rays(seed, i, 1 + (i as usize % 4))?;
                        (build_rays(&check_rays(&ds, SUBSPACE_TOL)?, rho)?, ds.points().to_vec(), rho)
                    }
                    "obtuse_simplex" | "acute_simplex" => {
                        let n = 3 + (i as usize % 3);
                        let ds = if *kind == "obtuse_simplex" {
                            synth::obtuse_simplex(seed, i, n)?
                        } else {
                            synth::acute_simplex(seed, i, n)?
                        };
                        let rho = simplex_rho(&ds);
                        let f = if *kind == "obtuse_simplex" {
                            build_obtuse_simplex(&ds, rho)?
                        } else {
                            build_acute_simplex(&ds, rho)?
                        };
                        (f, ds.points().to_vec(), rho)
                    }
                    _ => {
                        let (chains, d, rho) = synth::perturbed_rays(seed, i, 1 + (i as usize % 4))?;
                        let f = build_perturbed_rays_from_chains(&chains, d, 1e-9, rho)?;
                        let mut pts = vec![vec![0.0; d]];
                        pts.extend(chains.into_iter().flatten());
                        (f, pts, rho)
                    }
                };
                let mut r = crate::rng::keyed(seed, &[crate::rng::tag::DATA, 99, ki as u64, i]);
                let (mut ev, mut eb) = (0.0f64, 0.0f64);
                for x in &pts {
                    ev = ev.max(dist(&f.eval(x)?, x));
                    for _ in 0..20 {
                        let u: Vec<f64> = (0..x.len()).map(|_| crate::rng::std_normal(&mut r)).collect();
                        let nu = norm(&u);
                        let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + 0.9 * rho * b / nu).collect();
                        eb = eb.max(dist(&f.eval(&y)?, x));
                    }
                }
                Ok((ev, eb))
            })
            .collect();
        for (i, r) in rows.into_iter().enumerate() {
            let (ev, eb) = r?;
            worst = worst.max(ev).max(eb);
            let _ = writeln!(csv, "{kind},{i},{},{}", fmt_real(ev), fmt_real(eb));
        }
    }
    let check = SuiteCheck::new(
        "closed_form_invariants",
        worst <= 1e-10,
        worst,
        1e-10,
        format!("{per_geometry} instances per geometry"),
    );
    Ok((check, csv))
}

/// A ball radius safely inside every simplex constraint: a fifth of the
/// smallest height or edge.
pub fn simplex_rho(ds: &CleanDataset) -> f64 {
    let pts = ds.points();
    let mut h = ds.min_pairwise_distance();
    for n in 0..pts.len() {
        let face: Vec<Vec<f64>> = (0..pts.len()).filter(|&m| m != n).map(|m| pts[m].clone()).collect();
        h = h.min(dist(&pts[n], &crate::closed_form::project_onto_affine_hull(&pts[n], &face)));
    }
    0.2 * h
}

/// Closed-form cost of the equilateral construction and the balanced cost
/// of a network trained on the same balls.
pub fn suite_equilateral_cost(iterations: Option<usize>) -> Result<(Vec<SuiteCheck>, RunReport)> {
    let mut spec = builtin_spec("equilateral_cost")?;
    if let Some(it) = iterations {
        spec = spec.with_iterations(it);
    }
    let report = run(&spec, None, 1)?;
    let cost = representation_cost_closed_form(report.closed_form.as_ref().expect("requested"));
    let trained = report.trials[0].net.balanced_cost();
    Ok((
        vec![
            SuiteCheck::new("equilateral_closed_form_cost", (cost - 6.0).abs() <= 1e-12, cost, 6.0, String::new()),
            SuiteCheck::new(
                "equilateral_trained_cost",
                (trained - 6.0).abs() <= 0.6,
                trained,
                6.0,
                "within 10%".into(),
            ),
        ],
        report,
    ))
}

/// Outcome of the full property suite.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub checks: Vec<SuiteCheck>,
    pub files: Vec<PathBuf>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Every property check outside the trained-network experiments, written under `out_dir/suite/`.
pub fn suite(seed: u64, out_dir: Option<&Path>, threads: usize) -> Result<SuiteReport> {
    pool(threads)?.install(|| {
        let mut checks = Vec::new();
        let mut tables: Vec<(String, String)> = Vec::new();
        let mut add = |(c, t): (SuiteCheck, String), file: &str| {
            checks.push(c);
            tables.push((file.to_string(), t));
        };
        add(suite_minimal_representation(seed, 100)?, "minimal_representation.csv");
        add(suite_mse_vs_sigma(seed, &[0.3, 0.1, 0.03])?, "mse_vs_sigma.csv");
        add(suite_contractivity(seed, 1000, 1000)?, "contractivity.csv");
        add(suite_moments(seed, 1_000_000)?, "moments.csv");
        add(suite_marginalized(seed, 20, 1_000_000)?, "marginalized.csv");
        add(suite_gradients(seed, 60)?, "gradients.csv");
        add(suite_closed_form_invariants(seed, 50)?, "closed_form_invariants.csv");
        let (eq, eq_report) = suite_equilateral_cost(None)?;
        checks.extend(eq);
        tables.push(("equilateral_trace.csv".into(), trace_csv(&eq_report.trials[0].trace)));
        let mut files = Vec::new();
        if let Some(dir) = out_dir {
            let dir = dir.join("suite");
            for (name, text) in &tables {
                let p = dir.join(name);
                write_text(&p, text)?;
                files.push(p);
            }
            let p = dir.join("suite.csv");
            write_text(&p, &suite_csv(&checks))?;
            files.push(p);
        }
        Ok(SuiteReport { checks, files })
    })
}

/// Writes the moment benchmark to `out_dir/moments.csv` and returns its rows.
pub fn moments_bench(samples: usize, seed: u64, out_dir: Option<&Path>) -> Result<String> {
    let rows = moment_benchmark(samples, seed)?;
    let csv = benchmark_csv(&rows);
    if let Some(dir) = out_dir {
        write_text(&dir.join("moments.csv"), &csv)?;
    }
    Ok(csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse_and_round_trip() {
        for name in ["fig1", "fig2_obtuse", "fig2_equilateral", "equilateral_cost"] {
            let spec = builtin_spec(name).unwrap();
            assert_eq!(spec.name, name);
            let again = ExperimentSpec::from_text(&spec.to_text()).unwrap();
            assert_eq!(again, spec, "{name}");
        }
        let fig1 = builtin_spec("fig1").unwrap();
        assert_eq!(fig1.regimes.len(), 2);
        assert_eq!(fig1.regimes[0].config.mode, Mode::Online);
        assert_eq!(fig1.regimes[1].config.mode, Mode::Offline { replicates: 9000 });
        assert_eq!(fig1.regimes[1].config.iterations, 20000);
        assert_eq!(fig1.regimes[0].config.lambda, 1e-5);
    }

    #[test]
    fn spec_errors_carry_lines() {
        let e = ExperimentSpec::from_text("name = x\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, Error::ConfigParse { line: 2, .. }));
        let e = ExperimentSpec::from_text("name = x\ngeometry = blob\n").unwrap_err();
        assert!(matches!(e, Error::ConfigParse { line: 2, .. }));
        let e = ExperimentSpec::from_text("name = x\noutputs = csv, csv\n").unwrap_err();
        assert!(matches!(e, Error::InvalidParameter(_)));
        assert!(ExperimentSpec::from_text("geometry = line\n").is_err());
        let e = ExperimentSpec::from_text("name = x\nregimes = a\na.iterations = z\n").unwrap_err();
        assert!(matches!(e, Error::ConfigParse { line: 3, .. }));
    }

    #[test]
    fn small_run_is_deterministic_and_writes_artifacts() {
        let text = "name = tiny\ngeometry = line\ngeometry.n = 3\ngeometry.lo = -2\ngeometry.hi = 2\n\
                    sigma = 0.1\nwidth = 8\ninit_radius = 3\nregimes = online, offline\n\
                    online.iterations = 30\nonline.batch_size = 4\noffline.replicates = 10\noffline.iterations = 20\n\
                    offline.batch_size = 8\ncompare = closed_form, emmse, nn1, marginalized\noutputs = csv, svg\n";
        let spec = ExperimentSpec::from_text(text).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ra = run(&spec, Some(a.path()), 2).unwrap();
        let rb = run(&spec, Some(b.path()), 1).unwrap();
        assert_eq!(ra.files.len(), rb.files.len());
        for (fa, fb) in ra.files.iter().zip(&rb.files) {
            assert_eq!(std::fs::read(fa).unwrap(), std::fs::read(fb).unwrap(), "{fa:?}");
        }
        let func = std::fs::read_to_string(a.path().join("tiny/function.csv")).unwrap();
        assert!(func.starts_with("y0,online_s0,offline_s0,closed_form,emmse,nn1\n"));
        assert!(a.path().join("tiny/contraction.csv").exists());
        assert!(a.path().join("tiny/function.svg").exists());
    }

    #[test]
    fn obtuse_closed_form_is_detected() {
        let ds = builtin_spec("fig2_obtuse").unwrap().geometry.dataset().unwrap();
        let noisy = gen_noisy(&ds, 10, 0.05, 0).unwrap();
        let (tag, f) = auto_closed_form(&noisy, 0.2).unwrap();
        assert!(matches!(tag, GeometryTag::ObtuseSimplex { apex: 0 }));
        assert!(!f.conjectural());
    }
}
