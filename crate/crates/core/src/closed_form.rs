//! Exact minimum-representation-cost interpolating denoisers.
//!
//! Univariate data gets the piecewise-linear interpolant that is flat on every
//! noise interval and linear in between. Every multivariate construction is a
//! sum of rank-one ramps `v φ(uᵀ(y - z))` plus an offset.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde_json::Value;

use crate::geometry::{
    self, check_well_separated, classify_simplex, CleanDataset, GeometryTag, NoisyDataset, Rays,
    ANGLE_TOL, SUBSPACE_TOL,
};
use crate::io::fmt_real;
use crate::linalg::{axpy, dist, dot, norm, normalized, sub};
use crate::{Denoiser, Error, Result};

/// Continuous piecewise-linear function of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear1D {
    knots: Vec<f64>,
    values: Vec<f64>,
    left_slope: f64,
    right_slope: f64,
}

impl PiecewiseLinear1D {
    /// Knots closer than `1e-12 * scale` are merged (the first one is kept).
    pub fn new(knots: Vec<f64>, values: Vec<f64>, left_slope: f64, right_slope: f64) -> Result<Self> {
        if knots.is_empty() || knots.len() != values.len() {
            return Err(Error::InvalidParameter("knots and values must be nonempty and equal length".into()));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) || !left_slope.is_finite() || !right_slope.is_finite() {
            return Err(Error::InvalidParameter("non-finite piecewise-linear data".into()));
        }
        let scale = knots.iter().fold(1.0f64, |m, k| m.max(k.abs()));
        let mut k_out = vec![knots[0]];
        let mut v_out = vec![values[0]];
        for (&k, &v) in knots.iter().zip(&values).skip(1) {
            let last = *k_out.last().expect("nonempty");
            if k - last <= 1e-12 * scale {
                if k < last - 1e-12 * scale {
                    return Err(Error::InvalidParameter("knots must be increasing".into()));
                }
                continue;
            }
            k_out.push(k);
            v_out.push(v);
        }
        Ok(Self { knots: k_out, values: v_out, left_slope, right_slope })
    }

    /// `s([t - a]_+ - [t - b]_+)`: zero up to `a`, linear to `s (b - a)` at `b`, flat after.
    pub fn ramp(a: f64, b: f64, s: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::InvalidParameter(format!("ramp needs a < b, got a={a}, b={b}")));
        }
        Self::new(vec![a, b], vec![0.0, s * (b - a)], 0.0, 0.0)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_slope(&self) -> f64 {
        self.left_slope
    }

    pub fn right_slope(&self) -> f64 {
        self.right_slope
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = &self.knots;
        let v = &self.values;
        let last = k.len() - 1;
        if t <= k[0] {
            return if t == k[0] { v[0] } else { v[0] + self.left_slope * (t - k[0]) };
        }
        if t >= k[last] {
            return if t == k[last] { v[last] } else { v[last] + self.right_slope * (t - k[last]) };
        }
        let i = k.partition_point(|&x| x <= t) - 1;
        v[i] + (v[i + 1] - v[i]) * (t - k[i]) / (k[i + 1] - k[i])
    }

    /// Slopes of every linear piece, left tail first and right tail last.
    pub fn slopes(&self) -> Vec<f64> {
        let mut s = vec![self.left_slope];
        for i in 0..self.knots.len() - 1 {
            s.push((self.values[i + 1] - self.values[i]) / (self.knots[i + 1] - self.knots[i]));
        }
        s.push(self.right_slope);
        s
    }

    /// `max{∫|f''|, |f'(-∞) + f'(+∞)|}`.
    pub fn representation_cost(&self) -> f64 {
        let s = self.slopes();
        let tv: f64 = s.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        tv.max((self.left_slope + self.right_slope).abs())
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.slopes().iter().all(|&s| s >= 0.0)
    }
}

impl Denoiser for PiecewiseLinear1D {
    fn dim(&self) -> usize {
        1
    }

    fn denoise(&self, y: &[f64]) -> Vec<f64> {
        vec![self.eval(y[0])]
    }

    fn breakpoints_1d(&self) -> Vec<f64> {
        self.knots.clone()
    }
}

/// `v φ(uᵀ(y - z))`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneUnit {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub z: Vec<f64>,
    pub profile: PiecewiseLinear1D,
}

impl RankOneUnit {
    pub fn eval_into(&self, y: &[f64], out: &mut [f64]) {
        let t = dot(&self.u, y) - dot(&self.u, &self.z);
        let p = self.profile.eval(t);
        if p != 0.0 {
            axpy(p, &self.v, out);
        }
    }
}

/// Which construction produced a [`RankOneSumDenoiser`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Colinear,
    Rays,
    PerturbedRays,
    ObtuseSimplex,
    AcuteSimplex,
    Equilateral,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Colinear => "colinear",
            Family::Rays => "rays",
            Family::PerturbedRays => "perturbed_rays",
            Family::ObtuseSimplex => "obtuse_simplex",
            Family::AcuteSimplex => "acute_simplex",
            Family::Equilateral => "equilateral",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "colinear" => Family::Colinear,
            "rays" => Family::Rays,
            "perturbed_rays" => Family::PerturbedRays,
            "obtuse_simplex" => Family::ObtuseSimplex,
            "acute_simplex" => Family::AcuteSimplex,
            "equilateral" => Family::Equilateral,
            _ => return None,
        })
    }
}

/// `offset + Σ_i v_i φ_i(u_iᵀ(y - z_i))`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneSumDenoiser {
    pub family: Family,
    pub offset: Vec<f64>,
    pub units: Vec<RankOneUnit>,
    /// Set when optimality of the construction is only conjectured.
    pub conjectural: bool,
}

impl RankOneSumDenoiser {
    pub fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.offset.len() {
            return Err(Error::DimensionMismatch { expected: self.offset.len(), got: y.len() });
        }
        Ok(self.eval_unchecked(y))
    }

    fn eval_unchecked(&self, y: &[f64]) -> Vec<f64> {
        let mut out = self.offset.clone();
        for unit in &self.units {
            unit.eval_into(y, &mut out);
        }
        out
    }

    /// Sum of the profile costs (every unit has unit-norm `u` and `v`).
    pub fn representation_cost(&self) -> f64 {
        self.units.iter().map(|u| u.profile.representation_cost()).sum()
    }

    /// A bound on the Lipschitz constant: the sum of the steepest profile slopes.
    pub fn lipschitz_bound(&self) -> f64 {
        self.units
            .iter()
            .map(|u| u.profile.slopes().iter().fold(0.0f64, |m, s| m.max(s.abs())))
            .sum()
    }
}

impl Denoiser for RankOneSumDenoiser {
    fn dim(&self) -> usize {
        self.offset.len()
    }

    fn denoise(&self, y: &[f64]) -> Vec<f64> {
        self.eval_unchecked(y)
    }

    fn breakpoints_1d(&self) -> Vec<f64> {
        if self.dim() != 1 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for unit in &self.units {
            for &k in unit.profile.knots() {
                out.push(k / unit.u[0] + unit.z[0]);
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Either closed-form representation.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    Univariate(PiecewiseLinear1D),
    RankOneSum(RankOneSumDenoiser),
}

impl ClosedForm {
    pub fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        match self {
            ClosedForm::Univariate(f) => {
                if y.len() != 1 {
                    return Err(Error::DimensionMismatch { expected: 1, got: y.len() });
                }
                Ok(vec![f.eval(y[0])])
            }
            ClosedForm::RankOneSum(f) => f.eval(y),
        }
    }

    pub fn representation_cost(&self) -> f64 {
        match self {
            ClosedForm::Univariate(f) => f.representation_cost(),
            ClosedForm::RankOneSum(f) => f.representation_cost(),
        }
    }

    pub fn conjectural(&self) -> bool {
        matches!(self, ClosedForm::RankOneSum(f) if f.conjectural)
    }
}

impl Denoiser for ClosedForm {
    fn dim(&self) -> usize {
        match self {
            ClosedForm::Univariate(_) => 1,
            ClosedForm::RankOneSum(f) => f.dim(),
        }
    }

    fn denoise(&self, y: &[f64]) -> Vec<f64> {
        match self {
            ClosedForm::Univariate(f) => f.denoise(y),
            ClosedForm::RankOneSum(f) => f.denoise(y),
        }
    }

    fn breakpoints_1d(&self) -> Vec<f64> {
        match self {
            ClosedForm::Univariate(f) => f.breakpoints_1d(),
            ClosedForm::RankOneSum(f) => f.breakpoints_1d(),
        }
    }
}

/// Free function form of [`ClosedForm::representation_cost`].
pub fn representation_cost_closed_form(f: &ClosedForm) -> f64 {
    f.representation_cost()
}

/// Flat on each `[x_n + lo_n, x_n + hi_n]` at height `x_n`, linear in
/// between, flat outside. Inputs must already be sorted and separated.
fn interval_interpolant(xs: &[f64], lo: &[f64], hi: &[f64]) -> Result<PiecewiseLinear1D> {
    let mut knots = Vec::with_capacity(2 * xs.len());
    let mut values = Vec::with_capacity(2 * xs.len());
    for ((&x, &l), &h) in xs.iter().zip(lo).zip(hi) {
        knots.push(x + l);
        knots.push(x + h);
        values.push(x);
        values.push(x);
    }
    PiecewiseLinear1D::new(knots, values, 0.0, 0.0)
}

/// Minimum-cost interpolant of well-separated univariate noisy data.
pub fn build_1d(ds: &NoisyDataset) -> Result<PiecewiseLinear1D> {
    let report = check_well_separated(ds)?;
    if let Some((a, b)) = report.violation {
        return Err(Error::AssumptionViolated(a, b));
    }
    if let Some(n) = report.not_straddling {
        return Err(Error::NoiseNotStraddling(n));
    }
    let xs: Vec<f64> = report.order.iter().map(|&n| ds.clean().point(n)[0]).collect();
    let lo: Vec<f64> = report.order.iter().map(|&n| ds.eps_min()[n]).collect();
    let hi: Vec<f64> = report.order.iter().map(|&n| ds.eps_max()[n]).collect();
    interval_interpolant(&xs, &lo, &hi)
}

/// Univariate interpolant with symmetric noise radius `rho` around sorted,
/// `2 rho`-separated points.
fn ball_profile(coords: &[f64], rho: f64, ids: &[usize]) -> Result<PiecewiseLinear1D> {
    for (i, w) in coords.windows(2).enumerate() {
        if !(w[1] - w[0] > 2.0 * rho) {
            return Err(Error::BallsOverlap(ids[i + 1]));
        }
    }
    let lo = vec![-rho; coords.len()];
    let hi = vec![rho; coords.len()];
    interval_interpolant(coords, &lo, &hi)
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    Ok(())
}

/// Data-driven ball radius: the largest distance from a noisy sample to its clean point.
pub fn rho_from_noisy(ds: &NoisyDataset) -> f64 {
    ds.max_noise_radius()
}

/// Points `c_n u` on a line through the origin.
pub fn build_colinear(ds: &CleanDataset, rho: f64) -> Result<RankOneSumDenoiser> {
    check_rho(rho)?;
    let fit = geometry::fit_subspace(ds, SUBSPACE_TOL);
    let u = match fit.rank() {
        1 => fit.basis[0].clone(),
        0 => {
            let mut e = vec![0.0; ds.dim()];
            e[0] = 1.0;
            e
        }
        r => return Err(Error::InvalidParameter(format!("points span {r} dimensions, not a line"))),
    };
    let mut entries: Vec<(f64, usize)> = ds.points().iter().map(|p| dot(p, &u)).zip(0..).collect();
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let coords: Vec<f64> = entries.iter().map(|e| e.0).collect();
    let ids: Vec<usize> = entries.iter().map(|e| e.1).collect();
    let profile = ball_profile(&coords, rho, &ids)?;
    Ok(RankOneSumDenoiser {
        family: Family::Colinear,
        offset: vec![0.0; ds.dim()],
        units: vec![RankOneUnit { u: u.clone(), v: u, z: vec![0.0; ds.dim()], profile }],
        conjectural: false,
    })
}

/// Union of mutually obtuse rays plus a sample at the origin.
pub fn build_rays(rays: &Rays, rho: f64) -> Result<RankOneSumDenoiser> {
    check_rho(rho)?;
    let d = rays
        .directions
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidParameter("no rays".into()))?;
    for l in 0..rays.directions.len() {
        for k in l + 1..rays.directions.len() {
            let c = dot(&rays.directions[l], &rays.directions[k]);
            if !(c < -ANGLE_TOL) {
                return Err(Error::RaysNotObtuse(l, k, c));
            }
        }
    }
    let mut units = Vec::new();
    for ((u, coords), ids) in rays.directions.iter().zip(&rays.coords).zip(&rays.indices) {
        let mut c = vec![0.0];
        c.extend_from_slice(coords);
        let mut idx = vec![rays.origin_index];
        idx.extend_from_slice(ids);
        let profile = ball_profile(&c, rho, &idx)?;
        units.push(RankOneUnit { u: u.clone(), v: u.clone(), z: vec![0.0; d], profile });
    }
    Ok(RankOneSumDenoiser { family: Family::Rays, offset: vec![0.0; d], units, conjectural: false })
}

/// Simplex with one vertex forming obtuse angles with all others.
pub fn build_obtuse_simplex(ds: &CleanDataset, rho: f64) -> Result<RankOneSumDenoiser> {
    check_rho(rho)?;
    let apex = match classify_simplex(ds, ANGLE_TOL)? {
        GeometryTag::ObtuseSimplex { apex } => apex,
        _ => return Err(Error::NotObtuse),
    };
    let x1 = ds.point(apex).to_vec();
    let mut units = Vec::new();
    for (n, xn) in ds.points().iter().enumerate() {
        if n == apex {
            continue;
        }
        let diff = sub(xn, &x1);
        let len = norm(&diff);
        if !(len > 2.0 * rho) {
            return Err(Error::BallsOverlap(n));
        }
        let u = normalized(&diff).expect("distinct vertices");
        let (a, b) = (rho, len - rho);
        let profile = PiecewiseLinear1D::ramp(a, b, len / (b - a))?;
        units.push(RankOneUnit { u: u.clone(), v: u, z: x1.clone(), profile });
    }
    Ok(RankOneSumDenoiser { family: Family::ObtuseSimplex, offset: x1, units, conjectural: false })
}

/// Orthogonal projection of `x` onto the affine hull of `face` (least squares).
pub fn project_onto_affine_hull(x: &[f64], face: &[Vec<f64>]) -> Vec<f64> {
    let p0 = &face[0];
    if face.len() == 1 {
        return p0.clone();
    }
    let d = x.len();
    let cols = face.len() - 1;
    let m = DMatrix::from_fn(d, cols, |i, j| face[j + 1][i] - p0[i]);
    let rhs = DVector::from_iterator(d, sub(x, p0));
    let coef = m
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .expect("SVD was computed with both factors");
    let step = m * coef;
    p0.iter().zip(step.iter()).map(|(a, b)| a + b).collect()
}

/// Simplex with every vertex acute. Optimal only for equilateral triangles;
/// otherwise the output is marked conjectural.
pub fn build_acute_simplex(ds: &CleanDataset, rho: f64) -> Result<RankOneSumDenoiser> {
    check_rho(rho)?;
    let family = match classify_simplex(ds, ANGLE_TOL)? {
        GeometryTag::AcuteSimplex => Family::AcuteSimplex,
        GeometryTag::Equilateral => Family::Equilateral,
        _ => return Err(Error::NotAcute),
    };
    let pts = ds.points();
    let mut feet = Vec::with_capacity(pts.len());
    let mut heights = Vec::with_capacity(pts.len());
    for n in 0..pts.len() {
        let face: Vec<Vec<f64>> = (0..pts.len()).filter(|&i| i != n).map(|i| pts[i].clone()).collect();
        let z = project_onto_affine_hull(&pts[n], &face);
        let h = dist(&pts[n], &z);
        if !(h > 2.0 * rho) {
            return Err(Error::BallsOverlap(n));
        }
        feet.push(z);
        heights.push(h);
    }
    let weights: Vec<f64> = heights.iter().map(|h| 1.0 / h).collect();
    let center = geometry::weighted_geometric_median(pts, &weights, 1e-13, 200_000)?;
    let mut units = Vec::with_capacity(pts.len());
    for n in 0..pts.len() {
        let u = normalized(&sub(&pts[n], &feet[n])).expect("positive height");
        let out = sub(&pts[n], &center);
        let reach = norm(&out);
        let v = normalized(&out).ok_or_else(|| {
            Error::InvalidParameter(format!("weighted median coincides with vertex {n}"))
        })?;
        let (a, b) = (rho, heights[n] - rho);
        let profile = PiecewiseLinear1D::ramp(a, b, reach / (b - a))?;
        units.push(RankOneUnit { u, v, z: feet[n].clone(), profile });
    }
    Ok(RankOneSumDenoiser {
        family,
        offset: center,
        units,
        conjectural: family != Family::Equilateral,
    })
}

/// Splits a point set into the origin sample and chains of near-ray samples.
///
/// Non-origin points are grouped into connected components of the
/// "positive inner product" graph and each chain is ordered by norm.
pub fn split_perturbed_rays(ds: &CleanDataset, tol: f64) -> Result<Vec<Vec<Vec<f64>>>> {
    let pts = ds.points();
    let scale = ds.max_norm().max(f64::MIN_POSITIVE);
    let origin = (0..pts.len())
        .find(|&i| norm(&pts[i]) <= tol * scale)
        .ok_or_else(|| Error::InvalidParameter("no sample at the origin".into()))?;
    let rest: Vec<usize> = (0..pts.len()).filter(|&i| i != origin).collect();
    let mut comp = vec![usize::MAX; rest.len()];
    let mut n_comp = 0;
    for s in 0..rest.len() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = n_comp;
        let mut stack = vec![s];
        while let Some(i) = stack.pop() {
            for j in 0..rest.len() {
                if comp[j] == usize::MAX && dot(&pts[rest[i]], &pts[rest[j]]) > 0.0 {
                    comp[j] = n_comp;
                    stack.push(j);
                }
            }
        }
        n_comp += 1;
    }
    let mut chains = vec![Vec::new(); n_comp];
    for (i, &c) in comp.iter().enumerate() {
        chains[c].push(pts[rest[i]].clone());
    }
    for chain in &mut chains {
        chain.sort_by(|a, b| norm(a).total_cmp(&norm(b)));
    }
    Ok(chains)
}

/// Checks the successive-difference obtuseness (A1) and halfspace-nesting
/// (A2) conditions for chains that start after the origin.
pub fn check_perturbed_rays(chains: &[Vec<Vec<f64>>], rho: f64, tol: f64) -> Result<()> {
    let diffs: Vec<Vec<Vec<f64>>> = chains.iter().map(|c| successive_differences(c)).collect();
    for l in 0..diffs.len() {
        for k in l + 1..diffs.len() {
            for a in &diffs[l] {
                for b in &diffs[k] {
                    if !(dot(a, b) / (norm(a) * norm(b)) < -tol) {
                        return Err(Error::A1Violated(l, k));
                    }
                }
            }
        }
    }
    // A halfspace avoiding the origin that contains B(x_n, ρ) has a unit normal
    // within angle acos(ρ/‖x_n‖) of x_n. It contains every later ball iff each
    // x_m - x_n lies within angle asin(ρ/‖x_n‖) of x_n.
    for (l, chain) in chains.iter().enumerate() {
        for n in 0..chain.len() {
            let r = norm(&chain[n]);
            if r <= rho {
                return Err(Error::A2Violated { ray: l, index: n });
            }
            let cap = (rho / r).asin();
            for m in n + 1..chain.len() {
                let dm = sub(&chain[m], &chain[n]);
                let c = (dot(&dm, &chain[n]) / (norm(&dm) * r)).clamp(-1.0, 1.0);
                if c.acos() > cap + tol {
                    return Err(Error::A2Violated { ray: l, index: n });
                }
            }
        }
    }
    Ok(())
}

fn successive_differences(chain: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut prev = vec![0.0; chain.first().map_or(0, Vec::len)];
    chain
        .iter()
        .map(|p| {
            let d = sub(p, &prev);
            prev = p.clone();
            d
        })
        .collect()
}

/// Min-cost denoiser for samples perturbed off a union of rays.
pub fn build_perturbed_rays(ds: &CleanDataset, tol: f64, rho: f64) -> Result<RankOneSumDenoiser> {
    let chains = split_perturbed_rays(ds, tol)?;
    build_perturbed_rays_from_chains(&chains, ds.dim(), tol, rho)
}

/// As [`build_perturbed_rays`] with the chains given explicitly (origin omitted).
pub fn build_perturbed_rays_from_chains(
    chains: &[Vec<Vec<f64>>],
    dim: usize,
    tol: f64,
    rho: f64,
) -> Result<RankOneSumDenoiser> {
    check_rho(rho)?;
    check_perturbed_rays(chains, rho, tol)?;
    let mut units = Vec::new();
    let mut index = 0;
    for chain in chains {
        let mut anchor = vec![0.0; dim];
        for p in chain {
            index += 1;
            let diff = sub(p, &anchor);
            let len = norm(&diff);
            if !(len > 2.0 * rho) {
                return Err(Error::BallsOverlap(index));
            }
            let u = normalized(&diff).expect("positive length");
            let (a, b) = (rho, len - rho);
            let profile = PiecewiseLinear1D::ramp(a, b, len / (b - a))?;
            units.push(RankOneUnit { u: u.clone(), v: u, z: anchor.clone(), profile });
            anchor = p.clone();
        }
    }
    Ok(RankOneSumDenoiser { family: Family::PerturbedRays, offset: vec![0.0; dim], units, conjectural: false })
}

fn json_array(out: &mut String, xs: &[f64]) {
    out.push('[');
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_real(*x));
    }
    out.push(']');
}

fn profile_fields(out: &mut String, p: &PiecewiseLinear1D) {
    out.push_str("\"knots\":");
    json_array(out, p.knots());
    out.push_str(",\"values\":");
    json_array(out, p.values());
    let _ = write!(
        out,
        ",\"left_slope\":{},\"right_slope\":{}",
        fmt_real(p.left_slope()),
        fmt_real(p.right_slope())
    );
}

/// JSON text with every real written to 17 significant digits.
pub fn serialize(f: &ClosedForm) -> String {
    let mut out = String::new();
    match f {
        ClosedForm::Univariate(p) => {
            out.push_str("{\"type\":\"piecewise_linear_1d\",");
            profile_fields(&mut out, p);
            out.push('}');
        }
        ClosedForm::RankOneSum(r) => {
            let _ = write!(
                out,
                "{{\"type\":\"{}\",\"conjectural\":{},\"offset\":",
                r.family.as_str(),
                r.conjectural
            );
            json_array(&mut out, &r.offset);
            out.push_str(",\"units\":[");
            for (i, unit) in r.units.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str("{\"u\":");
                json_array(&mut out, &unit.u);
                out.push_str(",\"v\":");
                json_array(&mut out, &unit.v);
                out.push_str(",\"z\":");
                json_array(&mut out, &unit.z);
                out.push(',');
                profile_fields(&mut out, &unit.profile);
                out.push('}');
            }
            out.push_str("]}");
        }
    }
    out
}

pub(crate) fn reals(v: &Value, key: &str) -> Result<Vec<f64>> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Format(format!("missing array `{key}`")))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| Error::Format(format!("non-numeric entry in `{key}`"))))
        .collect()
}

pub(crate) fn real(v: &Value, key: &str) -> Result<f64> {
    v.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Format(format!("missing number `{key}`")))
}

fn parse_profile(v: &Value) -> Result<PiecewiseLinear1D> {
    PiecewiseLinear1D::new(
        reals(v, "knots")?,
        reals(v, "values")?,
        real(v, "left_slope")?,
        real(v, "right_slope")?,
    )
}

/// Inverse of [`serialize`].
pub fn parse(text: &str) -> Result<ClosedForm> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let ty = v
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Format("missing `type`".into()))?;
    if ty == "piecewise_linear_1d" {
        return Ok(ClosedForm::Univariate(parse_profile(&v)?));
    }
    let family = Family::parse(ty).ok_or_else(|| Error::Format(format!("unknown type `{ty}`")))?;
    let offset = reals(&v, "offset")?;
    let units = v
        .get("units")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Format("missing `units`".into()))?
        .iter()
        .map(|u| {
            let unit = RankOneUnit {
                u: reals(u, "u")?,
                v: reals(u, "v")?,
                z: reals(u, "z")?,
                profile: parse_profile(u)?,
            };
            if unit.u.len() != offset.len() || unit.v.len() != offset.len() || unit.z.len() != offset.len() {
                return Err(Error::DimensionMismatch { expected: offset.len(), got: unit.u.len() });
            }
            Ok(unit)
        })
        .collect::<Result<Vec<_>>>()?;
    let conjectural = v.get("conjectural").and_then(Value::as_bool).unwrap_or(false);
    Ok(ClosedForm::RankOneSum(RankOneSumDenoiser { family, offset, units, conjectural }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::check_rays;

    fn two_point() -> PiecewiseLinear1D {
        let ds = NoisyDataset::from_extremes_1d(&[0.0, 1.0], &[-0.1, -0.1], &[0.1, 0.1]).unwrap();
        build_1d(&ds).unwrap()
    }

    #[test]
    fn univariate_examples() {
        let f = two_point();
        assert_eq!(f.knots().len(), 4);
        assert_eq!(f.eval(0.05), 0.0);
        assert_eq!(f.eval(0.95), 1.0);
        assert!((f.eval(0.5) - 0.5).abs() < 1e-15);
        // Third branch: x_1 + (t - x_1 - ε_1^max) (x_2 - x_1)/(x_2 + ε_2^min - x_1 - ε_1^max)
        let oracle = 0.0 + (0.3 - 0.0 - 0.1) * (1.0 - 0.0) / (1.0 - 0.1 - 0.0 - 0.1);
        assert!((f.eval(0.3) - oracle).abs() < 1e-15);
        assert!((f.eval(0.3) - 0.25).abs() < 1e-15);
        let s = f.slopes();
        assert!((s[2] - 1.25).abs() < 1e-15);
        assert_eq!(f.eval(-100.0), 0.0);
        assert_eq!(f.eval(100.0), 1.0);
        for (k, v) in f.knots().iter().zip(f.values()) {
            assert_eq!(f.eval(*k), *v);
        }
    }

    #[test]
    fn univariate_cost() {
        // slope changes 0 -> 1.25 -> 0 at four knots: |0| + |1.25| + |0| + |-1.25|
        assert!((two_point().representation_cost() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn univariate_rejects_overlap_and_touching() {
        let ds = NoisyDataset::from_extremes_1d(&[0.0, 1.0], &[-0.6, -0.6], &[0.6, 0.6]).unwrap();
        assert!(matches!(build_1d(&ds), Err(Error::AssumptionViolated(0, 1))));
        let ds = NoisyDataset::from_extremes_1d(&[0.0, 1.0], &[-0.5, -0.5], &[0.5, 0.5]).unwrap();
        assert!(matches!(build_1d(&ds), Err(Error::AssumptionViolated(0, 1))));
    }

    #[test]
    fn knot_dedup_merges_near_duplicates() {
        let f = PiecewiseLinear1D::new(vec![0.0, 1e-14, 1.0], vec![0.0, 0.0, 1.0], 0.0, 0.0).unwrap();
        assert_eq!(f.knots(), &[0.0, 1.0]);
        assert!(PiecewiseLinear1D::new(vec![1.0, 0.0], vec![0.0, 0.0], 0.0, 0.0).is_err());
    }

    #[test]
    fn cost_uses_boundary_slope_term() {
        // Identity-like: slopes 1 on both tails, no kinks.
        let f = PiecewiseLinear1D::new(vec![0.0], vec![0.0], 1.0, 1.0).unwrap();
        assert_eq!(f.representation_cost(), 2.0);
    }

    #[test]
    fn colinear_examples() {
        let ds = CleanDataset::new(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let f = build_colinear(&ds, 1.0).unwrap();
        let u = [0.6, 0.8];
        let at = |t: f64| f.eval(&[t * u[0], t * u[1]]).unwrap();
        let y = at(5.0);
        assert!((y[0] - 3.0).abs() < 1e-12 && (y[1] - 4.0).abs() < 1e-12);
        let m = at(2.5);
        assert!((m[0] - 1.5).abs() < 1e-12 && (m[1] - 2.0).abs() < 1e-12);
        let base = f.eval(&[1.0, 0.5]).unwrap();
        let moved = f.eval(&[1.0 - 0.8 * 3.0, 0.5 + 0.6 * 3.0]).unwrap();
        assert!(dist(&base, &moved) < 1e-12);
        assert!(matches!(build_colinear(&ds, 2.5), Err(Error::BallsOverlap(_))));
    }

    #[test]
    fn opposite_rays_match_colinear() {
        let ds = CleanDataset::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let rays = check_rays(&ds, ANGLE_TOL).unwrap();
        let fr = build_rays(&rays, 0.2).unwrap();
        let fc = build_colinear(&ds, 0.2).unwrap();
        for i in 0..100 {
            let y = [-2.0 + 4.0 * i as f64 / 99.0, 0.3 * (i as f64).sin()];
            assert!(dist(&fr.eval(&y).unwrap(), &fc.eval(&y).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn rays_dead_zone_and_interpolation() {
        let s = 0.5f64.sqrt();
        let ds = CleanDataset::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![2.0, 0.0],
            vec![-s, s],
            vec![-2.0 * s, 2.0 * s],
        ])
        .unwrap();
        let f = build_rays(&check_rays(&ds, ANGLE_TOL).unwrap(), 0.3).unwrap();
        assert_eq!(f.eval(&[0.1, -0.2]).unwrap(), vec![0.0, 0.0]);
        for x in ds.points() {
            assert!(dist(&f.eval(x).unwrap(), x) < 1e-12);
        }
    }

    #[test]
    fn obtuse_simplex_examples() {
        let ds = CleanDataset::new(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![-1.0, 2.0]]).unwrap();
        let f = build_obtuse_simplex(&ds, 0.2).unwrap();
        let p = &f.units[0].profile;
        assert_eq!(p.knots(), &[0.2, 1.8]);
        assert!((p.slopes()[1] - 2.0 / 1.6).abs() < 1e-15);
        for x in ds.points() {
            assert!(dist(&f.eval(x).unwrap(), x) < 1e-12);
        }
        let expected: f64 = [2.0f64, 5.0f64.sqrt()]
            .iter()
            .map(|len| 2.0 * len / (len - 0.4))
            .sum();
        assert!((f.representation_cost() - expected).abs() < 1e-12);
        let acute = CleanDataset::new(vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![1.0, 2.0]]).unwrap();
        assert!(matches!(build_obtuse_simplex(&acute, 0.1), Err(Error::NotObtuse)));
    }

    fn unit_circle_triangle() -> CleanDataset {
        CleanDataset::new(
            [90.0f64, 210.0, 330.0]
                .iter()
                .map(|a| vec![a.to_radians().cos(), a.to_radians().sin()])
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn equilateral_matches_explicit_construction() {
        let ds = unit_circle_triangle();
        let rho = 0.25;
        let f = build_acute_simplex(&ds, rho).unwrap();
        assert_eq!(f.family, Family::Equilateral);
        assert!(!f.conjectural);
        assert!(norm(&f.offset) < 1e-9);
        let (alpha, beta) = (-0.5 + rho, 1.0 - rho);
        let explicit = |y: &[f64]| {
            let mut out = vec![0.0; 2];
            for x in ds.points() {
                let t = dot(x, y);
                let s = ((t - alpha).max(0.0) - (t - beta).max(0.0)) / (beta - alpha);
                axpy(s, x, &mut out);
            }
            out
        };
        for i in 0..50 {
            let y = [1.7 * (i as f64 * 0.37).cos(), 1.3 * (i as f64 * 0.91).sin()];
            assert!(dist(&f.eval(&y).unwrap(), &explicit(&y)) < 1e-9);
        }
        assert!((f.representation_cost() - 6.0 / (beta - alpha)).abs() < 1e-12);
        // Summing all three unit contributions at each vertex recovers the vertex.
        for x in ds.points() {
            let mut acc = f.offset.clone();
            for unit in &f.units {
                let t = dot(&unit.u, &sub(x, &unit.z));
                axpy(unit.profile.eval(t), &unit.v, &mut acc);
            }
            assert!(dist(&acc, x) < 1e-10);
        }
    }

    #[test]
    fn acute_simplex_interpolates_and_is_flagged() {
        let ds = CleanDataset::new(vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![1.0, 2.0]]).unwrap();
        let f = build_acute_simplex(&ds, 0.2).unwrap();
        assert!(f.conjectural);
        for x in ds.points() {
            assert!(dist(&f.eval(x).unwrap(), x) < 1e-10);
        }
    }

    #[test]
    fn perturbed_rays_reduce_to_rays() {
        let ds = CleanDataset::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![2.5, 0.0],
            vec![-0.6, 0.8],
        ])
        .unwrap();
        let fr = build_rays(&check_rays(&ds, ANGLE_TOL).unwrap(), 0.2).unwrap();
        let fp = build_perturbed_rays(&ds, ANGLE_TOL, 0.2).unwrap();
        for i in 0..200 {
            let y = [-3.0 + 6.0 * (i as f64 * 0.618).fract(), -3.0 + 6.0 * (i as f64 * 0.414).fract()];
            assert!(dist(&fr.eval(&y).unwrap(), &fp.eval(&y).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn perturbed_unit_follows_segment() {
        let a = 150f64.to_radians();
        let p = vec![1.0, 0.05];
        let ds = CleanDataset::new(vec![vec![0.0, 0.0], p.clone(), vec![a.cos(), a.sin()]]).unwrap();
        let f = build_perturbed_rays(&ds, ANGLE_TOL, 0.1).unwrap();
        let len = (1.0f64 + 0.0025).sqrt();
        let unit = f.units.iter().find(|u| u.u[0] > 0.0).unwrap();
        assert!((unit.u[0] - 1.0 / len).abs() < 1e-15 && (unit.u[1] - 0.05 / len).abs() < 1e-15);
        for x in ds.points() {
            assert!(dist(&f.eval(x).unwrap(), x) < 1e-12);
        }
    }

    #[test]
    fn perturbed_rays_checks_assumptions() {
        // Second segment bends back toward the other ray.
        let chains = vec![vec![vec![1.0, 0.0], vec![1.2, 1.5]], vec![vec![-0.5, 0.1]]];
        assert!(matches!(
            build_perturbed_rays_from_chains(&chains, 2, ANGLE_TOL, 0.1),
            Err(Error::A1Violated(0, 1))
        ));
        let chains = vec![vec![vec![1.0, 0.0], vec![1.3, 0.8]], vec![vec![-1.0, -0.1]]];
        assert!(matches!(
            build_perturbed_rays_from_chains(&chains, 2, ANGLE_TOL, 0.1),
            Err(Error::A2Violated { ray: 0, index: 0 })
        ));
    }

    #[test]
    fn serialization_round_trips_bit_exactly() {
        let ds = CleanDataset::new(vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![1.0, 2.0]]).unwrap();
        let f = ClosedForm::RankOneSum(build_acute_simplex(&ds, 0.2).unwrap());
        let text = serialize(&f);
        let back = parse(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(serialize(&back), text);
        let g = ClosedForm::Univariate(two_point());
        assert_eq!(parse(&serialize(&g)).unwrap(), g);
        assert!(parse("{\"type\":\"nope\"}").is_err());
    }
}
