//! Quantitative checks: MSE under a prior, contractivity, the subspace
//! property and neuron alignment.

use std::fmt::Write as _;

use rand::Rng;

use crate::closed_form::{project_onto_affine_hull, PiecewiseLinear1D};
use crate::gaussian_moments::mc_oracle;
use crate::geometry::{CleanDataset, GeometryTag, NoisyDataset};
use crate::io::fmt_real;
use crate::linalg::{abs_cosine, dist, dot, norm, normalized, sub};
use crate::network::ShallowNet;
use crate::normal;
use crate::quadrature::integrate;
use crate::rng::{self, tag};
use crate::svg::{Bounds, Canvas};
use crate::{Denoiser, Error, Result};

/// Standard-normal tail cut-off for noise integrals.
const Z_MAX: f64 = 12.0;

/// Distribution of clean signals.
#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    /// Uniform over the points of a dataset.
    Discrete(CleanDataset),
    /// Univariate density proportional to `weights[i]` on `[edges[i], edges[i + 1]]`.
    PiecewiseConstant { edges: Vec<f64>, weights: Vec<f64> },
}

impl Prior {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let p = Prior::PiecewiseConstant { edges: vec![lo, hi], weights: vec![1.0] };
        p.validate()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        match self {
            Prior::Discrete(ds) => ds.dim(),
            Prior::PiecewiseConstant { .. } => 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Prior::PiecewiseConstant { edges, weights } = self {
            let ok = edges.len() == weights.len() + 1
                && !weights.is_empty()
                && edges.windows(2).all(|w| w[0] < w[1])
                && edges.iter().all(|e| e.is_finite())
                && weights.iter().all(|w| *w >= 0.0 && w.is_finite())
                && weights.iter().any(|w| *w > 0.0);
            if !ok {
                return Err(Error::InvalidParameter("malformed piecewise-constant prior".into()));
            }
        }
        Ok(())
    }

    /// Normalized density value on each piece.
    fn densities(edges: &[f64], weights: &[f64]) -> Vec<f64> {
        let mass: f64 = weights.iter().zip(edges.windows(2)).map(|(w, e)| w * (e[1] - e[0])).sum();
        weights.iter().map(|w| w / mass).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MseMethod {
    Quadrature,
    MonteCarlo { samples: usize, seed: u64 },
}

/// An MSE value and, for Monte Carlo, its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// `E ‖f(x + σε) − x‖²` with `x` from the prior and `ε` standard normal.
///
/// Quadrature (univariate only) integrates the noise with adaptive
/// Gauss–Legendre split at the denoiser's breakpoints; for piecewise-constant
/// priors the clean-signal integral is done in closed form for each `y`.
pub fn mse_vs_prior<D: Denoiser + ?Sized>(f: &D, prior: &Prior, sigma: f64, method: MseMethod) -> Result<MseEstimate> {
    prior.validate()?;
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter("sigma must be >= 0".into()));
    }
    if prior.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: prior.dim() });
    }
    match method {
        MseMethod::Quadrature => {
            if f.dim() != 1 {
                return Err(Error::UnsupportedDensity);
            }
            let value = match prior {
                Prior::Discrete(ds) => quad_discrete(f, ds, sigma),
                Prior::PiecewiseConstant { edges, weights } => quad_piecewise(f, edges, weights, sigma),
            };
            Ok(MseEstimate { value, std_error: 0.0 })
        }
        MseMethod::MonteCarlo { samples, seed } => {
            let (value, std_error) = match prior {
                Prior::Discrete(ds) => mc_oracle(f, ds, sigma, samples, seed)?,
                Prior::PiecewiseConstant { edges, weights } => mc_piecewise(f, edges, weights, sigma, samples, seed)?,
            };
            Ok(MseEstimate { value, std_error })
        }
    }
}

const QUAD_TOL: f64 = 1e-10;

fn eval1<D: Denoiser + ?Sized>(f: &D, y: f64) -> f64 {
    f.denoise(&[y])[0]
}

fn quad_discrete<D: Denoiser + ?Sized>(f: &D, ds: &CleanDataset, sigma: f64) -> f64 {
    let bps = f.breakpoints_1d();
    let total: f64 = ds
        .points()
        .iter()
        .map(|p| {
            let x = p[0];
            if sigma == 0.0 {
                let e = eval1(f, x) - x;
                return e * e;
            }
            let zb: Vec<f64> = bps.iter().map(|t| (t - x) / sigma).collect();
            integrate(
                |z| {
                    let e = eval1(f, x + sigma * z) - x;
                    normal::pdf(z) * e * e
                },
                -Z_MAX,
                Z_MAX,
                &zb,
                8,
                QUAD_TOL,
            )
        })
        .sum();
    total / ds.len() as f64
}

fn quad_piecewise<D: Denoiser + ?Sized>(f: &D, edges: &[f64], weights: &[f64], sigma: f64) -> f64 {
    let dens = Prior::densities(edges, weights);
    let mut bps = f.breakpoints_1d();
    bps.extend_from_slice(edges);
    let (lo, hi) = (edges[0], edges[edges.len() - 1]);
    if sigma == 0.0 {
        return edges
            .windows(2)
            .zip(&dens)
            .map(|(e, p)| {
                p * integrate(
                    |x| {
                        let r = eval1(f, x) - x;
                        r * r
                    },
                    e[0],
                    e[1],
                    &bps,
                    8,
                    QUAD_TOL,
                )
            })
            .sum();
    }
    for e in edges {
        for k in [1.0, 2.0, 4.0] {
            bps.push(e - k * sigma);
            bps.push(e + k * sigma);
        }
    }
    // For fixed y, ∫ p(x) φ_σ(y − x) (f(y) − x)² dx over each piece with
    // x = y + σz: ∫ φ(z) (e − σz)² dz, e = f(y) − y.
    let inner = |y: f64| {
        let e = eval1(f, y) - y;
        edges
            .windows(2)
            .zip(&dens)
            .map(|(w, p)| {
                let (za, zb) = ((w[0] - y) / sigma, (w[1] - y) / sigma);
                let (za, zb) = (za.max(-40.0), zb.min(40.0));
                if zb <= za {
                    return 0.0;
                }
                let mass = normal::cdf(zb) - normal::cdf(za);
                let (pa, pb) = (normal::pdf(za), normal::pdf(zb));
                let m1 = pa - pb;
                let m2 = mass + za * pa - zb * pb;
                p * (e * e * mass - 2.0 * e * sigma * m1 + sigma * sigma * m2)
            })
            .sum::<f64>()
    };
    let panels = (((hi - lo) / sigma).ceil() as usize).clamp(8, 4096);
    integrate(inner, lo - Z_MAX * sigma, hi + Z_MAX * sigma, &bps, panels, QUAD_TOL)
}

fn mc_piecewise<D: Denoiser + ?Sized>(
    f: &D,
    edges: &[f64],
    weights: &[f64],
    sigma: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let dens = Prior::densities(edges, weights);
    let mut cum = Vec::with_capacity(dens.len());
    let mut acc = 0.0;
    for (p, e) in dens.iter().zip(edges.windows(2)) {
        acc += p * (e[1] - e[0]);
        cum.push(acc);
    }
    let mut r = rng::keyed(seed, &[tag::MONTE_CARLO, 1]);
    let (mut mean, mut m2) = (0.0, 0.0);
    for s in 0..samples {
        let u: f64 = r.random::<f64>() * acc;
        let i = cum.partition_point(|c| *c < u).min(dens.len() - 1);
        let x = edges[i] + r.random::<f64>() * (edges[i + 1] - edges[i]);
        let y = x + sigma * rng::std_normal(&mut r);
        let e = eval1(f, y) - x;
        let v = e * e;
        let delta = v - mean;
        mean += delta / (s + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok((mean, (var / samples as f64).sqrt()))
}

/// Result of a contractivity scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    /// Largest ratio `min_i |f(y) − x_i| / |y − x_i|` over the evaluated
    /// queries. An empirical lower bound for the contraction constant.
    pub alpha_observed: f64,
    pub worst_query: Vec<f64>,
    pub excluded_fixed_points: Vec<f64>,
    pub queries_evaluated: usize,
    pub queries_excluded: usize,
}

impl ContractionReport {
    pub fn passed(&self) -> bool {
        self.alpha_observed < 1.0
    }
}

/// Fixed points of the univariate min-cost interpolant between neighbouring
/// noise intervals, where the connecting line crosses the identity.
pub fn fixed_points_1d(ds: &NoisyDataset) -> Result<Vec<f64>> {
    if ds.clean().dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: ds.clean().dim() });
    }
    let mut order: Vec<usize> = (0..ds.clean().len()).collect();
    order.sort_by(|&a, &b| ds.clean().point(a)[0].total_cmp(&ds.clean().point(b)[0]));
    Ok(order
        .windows(2)
        .map(|w| {
            let (n, m) = (w[0], w[1]);
            let (xn, xm) = (ds.clean().point(n)[0], ds.clean().point(m)[0]);
            let (emax, emin) = (ds.eps_max()[n], ds.eps_min()[m]);
            (xm * emax - xn * emin) / (emax - emin)
        })
        .collect())
}

/// Scans `queries` for the worst contraction ratio toward the clean points,
/// skipping queries within `delta` of a fixed point.
pub fn contractivity_1d(f: &PiecewiseLinear1D, ds: &NoisyDataset, queries: &[f64], delta: f64) -> Result<ContractionReport> {
    let fixed = fixed_points_1d(ds)?;
    let xs: Vec<f64> = ds.clean().points().iter().map(|p| p[0]).collect();
    let mut report = ContractionReport {
        alpha_observed: 0.0,
        worst_query: Vec::new(),
        excluded_fixed_points: fixed.clone(),
        queries_evaluated: 0,
        queries_excluded: 0,
    };
    for &y in queries {
        if fixed.iter().any(|p| (y - p).abs() < delta) {
            report.queries_excluded += 1;
            continue;
        }
        let fy = f.eval(y);
        let ratio = xs
            .iter()
            .filter(|&&x| x != y)
            .map(|&x| (fy - x).abs() / (y - x).abs())
            .fold(f64::INFINITY, f64::min);
        if !ratio.is_finite() {
            continue;
        }
        report.queries_evaluated += 1;
        if ratio > report.alpha_observed || report.worst_query.is_empty() {
            report.alpha_observed = report.alpha_observed.max(ratio);
            if ratio >= report.alpha_observed {
                report.worst_query = vec![y];
            }
        }
    }
    Ok(report)
}

/// `max_q ‖f(y_q) − P f(P y_q)‖` for the orthogonal projector onto span(basis).
pub fn subspace_property_check<D: Denoiser + ?Sized>(f: &D, basis: &[Vec<f64>], queries: &[Vec<f64>]) -> Result<f64> {
    let d = f.dim();
    if basis.iter().any(|b| b.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: basis.iter().map(Vec::len).find(|&l| l != d).unwrap_or(0) });
    }
    let project = |y: &[f64]| {
        let mut out = vec![0.0; d];
        for b in basis {
            let c = dot(b, y);
            out.iter_mut().zip(b).for_each(|(o, bi)| *o += c * bi);
        }
        out
    };
    let mut worst: f64 = 0.0;
    for y in queries {
        if y.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: y.len() });
        }
        let lhs = f.denoise(y);
        let rhs = project(&f.denoise(&project(y)));
        worst = worst.max(dist(&lhs, &rhs));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    Edges,
    FaceNormals,
}

impl ReferenceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceKind::Edges => "edges",
            ReferenceKind::FaceNormals => "face-normals",
        }
    }
}

/// Directions that the boundaries of a min-cost denoiser follow for the given
/// geometry: unit edges from the apex (obtuse), ray or chain directions, or
/// the unit normals `(x_n − z_n)/‖x_n − z_n‖` of the opposite faces (acute).
pub fn reference_directions(ds: &CleanDataset, geometry: &GeometryTag) -> Result<(ReferenceKind, Vec<Vec<f64>>)> {
    let pts = ds.points();
    let unit = |v: Vec<f64>| normalized(&v).ok_or_else(|| Error::InvalidParameter("coincident points".into()));
    match geometry {
        GeometryTag::Colinear { direction, .. } => Ok((ReferenceKind::Edges, vec![direction.clone()])),
        GeometryTag::Rays(r) => Ok((ReferenceKind::Edges, r.directions.clone())),
        GeometryTag::ObtuseSimplex { apex } => {
            let apex = *apex;
            if apex >= pts.len() {
                return Err(Error::InvalidParameter(format!("apex {apex} out of range")));
            }
            let dirs = (0..pts.len())
                .filter(|&n| n != apex)
                .map(|n| unit(sub(&pts[n], &pts[apex])))
                .collect::<Result<_>>()?;
            Ok((ReferenceKind::Edges, dirs))
        }
        GeometryTag::AcuteSimplex | GeometryTag::Equilateral => {
            let dirs = (0..pts.len())
                .map(|n| {
                    let face: Vec<Vec<f64>> = (0..pts.len()).filter(|&m| m != n).map(|m| pts[m].clone()).collect();
                    unit(sub(&pts[n], &project_onto_affine_hull(&pts[n], &face)))
                })
                .collect::<Result<_>>()?;
            Ok((ReferenceKind::FaceNormals, dirs))
        }
        GeometryTag::PerturbedRays { chains } => {
            let mut dirs = Vec::new();
            for chain in chains {
                let mut anchor = vec![0.0; ds.dim()];
                for p in chain {
                    dirs.push(unit(sub(p, &anchor))?);
                    anchor = p.clone();
                }
            }
            Ok((ReferenceKind::Edges, dirs))
        }
        GeometryTag::Univariate | GeometryTag::Subspace { .. } | GeometryTag::General => Err(Error::InvalidParameter(
            "alignment needs a colinear, rays, perturbed-rays or simplex geometry".into(),
        )),
    }
}

/// One significant unit and its best-matching reference direction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitAlignment {
    pub unit: usize,
    pub normal: Vec<f64>,
    pub offset: f64,
    pub strength: f64,
    pub reference: usize,
    pub abs_cosine: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentReport {
    pub kind: ReferenceKind,
    pub references: Vec<Vec<f64>>,
    pub units: Vec<UnitAlignment>,
    /// Smallest `|cos|` over significant units.
    pub min_abs_cosine: f64,
}

/// Matches every unit carrying at least `significance` of the total strength
/// against the reference directions of `geometry`.
pub fn alignment_report(net: &ShallowNet, ds: &CleanDataset, geometry: &GeometryTag, significance: f64) -> Result<AlignmentReport> {
    if ds.dim() != net.dim() {
        return Err(Error::DimensionMismatch { expected: net.dim(), got: ds.dim() });
    }
    let (kind, references) = reference_directions(ds, geometry)?;
    let units: Vec<UnitAlignment> = net
        .extract_units(significance)
        .into_iter()
        .map(|u| {
            let (reference, c) = references
                .iter()
                .enumerate()
                .map(|(i, r)| (i, abs_cosine(&u.normal, r).clamp(0.0, 1.0)))
                .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            UnitAlignment { unit: u.index, normal: u.normal, offset: u.offset, strength: u.strength, reference, abs_cosine: c }
        })
        .collect();
    if units.is_empty() {
        return Err(Error::NoSignificantUnits);
    }
    let min_abs_cosine = units.iter().map(|u| u.abs_cosine).fold(1.0, f64::min);
    Ok(AlignmentReport { kind, references, units, min_abs_cosine })
}

impl AlignmentReport {
    /// CSV `unit,strength,offset,reference,abs_cosine,normal0,...`.
    pub fn to_csv(&self) -> String {
        let d = self.references.first().map_or(0, Vec::len);
        let mut out = String::from("unit,strength,offset,reference,abs_cosine");
        for j in 0..d {
            let _ = write!(out, ",normal{j}");
        }
        out.push('\n');
        for u in &self.units {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                u.unit,
                fmt_real(u.strength),
                fmt_real(u.offset),
                u.reference,
                fmt_real(u.abs_cosine)
            );
            for v in &u.normal {
                let _ = write!(out, ",{}", fmt_real(*v));
            }
            out.push('\n');
        }
        out
    }

    /// Planar overlay: clean points, `rho`-balls, unit boundaries (solid) and
    /// the predicted boundaries through the data (dashed).
    pub fn to_svg(&self, ds: &CleanDataset, rho: f64, title: &str) -> Result<String> {
        if ds.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: ds.dim() });
        }
        let pts: Vec<(f64, f64)> = ds.points().iter().map(|p| (p[0], p[1])).collect();
        let spread = pts.iter().flat_map(|&(x, y)| [(x - rho, y - rho), (x + rho, y + rho)]);
        let bounds = Bounds::around(spread, 0.35).squared();
        let mut c = Canvas::new(560.0, 560.0, bounds);
        c.axes();
        c.title(title);
        let max_s = self.units.iter().map(|u| u.strength).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for u in &self.units {
            c.boundary_line(&u.normal, u.offset, Canvas::color(0), 0.6 + 2.4 * u.strength / max_s, false);
        }
        for p in ds.points() {
            for r in &self.references {
                c.boundary_line(r, dot(r, p), Canvas::color(5), 0.8, true);
            }
        }
        for &p in &pts {
            c.ball(p, rho, Canvas::color(1));
            c.dot(p, 3.5, "#000");
        }
        Ok(c.finish())
    }
}

/// Largest `ρ` for which the balls around the clean points stay disjoint,
/// times `fraction`.
pub fn default_rho(ds: &CleanDataset, fraction: f64) -> f64 {
    0.5 * ds.min_pairwise_distance() * fraction
}

/// Norm of a vector-valued output, for relative deviation reporting.
pub fn output_scale<D: Denoiser + ?Sized>(f: &D, queries: &[Vec<f64>]) -> f64 {
    queries.iter().map(|y| norm(&f.denoise(y))).fold(0.0, f64::max)
}
