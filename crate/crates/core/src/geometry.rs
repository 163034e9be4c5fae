//! Datasets and the geometric predicates that decide which closed form
//! applies to them.

use nalgebra::DMatrix;

use crate::linalg::{self, dist, dot, norm, normalized, sub};
use crate::{Error, Result};

/// Inner-product/angle tolerance on normalized vectors.
pub const ANGLE_TOL: f64 = 1e-9;
/// Relative tolerance for subspace membership.
pub const SUBSPACE_TOL: f64 = 1e-8;

/// `N` distinct clean points in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanDataset {
    points: Vec<Vec<f64>>,
    dim: usize,
}

impl CleanDataset {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptyDataset)?.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("points must have dimension >= 1".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("non-finite coordinate".into()));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if dist(&points[i], &points[j]) == 0.0 {
                    return Err(Error::DuplicatePoints(i, j));
                }
            }
        }
        Ok(Self { points, dim })
    }

    /// Convenience constructor for univariate data.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| vec![x]).collect())
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, n: usize) -> &[f64] {
        &self.points[n]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest point norm.
    pub fn max_norm(&self) -> f64 {
        self.points.iter().map(|p| norm(p)).fold(0.0, f64::max)
    }

    /// Smallest pairwise distance (`+inf` for a single point).
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.min(dist(&self.points[i], &self.points[j]));
            }
        }
        best
    }

    /// The same points translated by `t`.
    pub fn translated(&self, t: &[f64]) -> Self {
        Self {
            points: self.points.iter().map(|p| linalg::add(p, t)).collect(),
            dim: self.dim,
        }
    }
}

/// `M` noisy replicates for each clean point.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyDataset {
    clean: CleanDataset,
    samples: Vec<Vec<Vec<f64>>>,
    sigma: f64,
    eps_max: Vec<f64>,
    eps_min: Vec<f64>,
}

impl NoisyDataset {
    /// `samples[n][m]` is the `m`-th noisy copy of clean point `n`.
    pub fn new(clean: CleanDataset, samples: Vec<Vec<Vec<f64>>>, sigma: f64) -> Result<Self> {
        if samples.len() != clean.len() {
            return Err(Error::DimensionMismatch { expected: clean.len(), got: samples.len() });
        }
        let m = samples[0].len();
        if m == 0 {
            return Err(Error::EmptyDataset);
        }
        for row in &samples {
            if row.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: row.len() });
            }
            for y in row {
                if y.len() != clean.dim() {
                    return Err(Error::DimensionMismatch { expected: clean.dim(), got: y.len() });
                }
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("non-finite noisy sample".into()));
                }
            }
        }
        let (eps_max, eps_min) = if clean.dim() == 1 {
            samples
                .iter()
                .zip(clean.points())
                .map(|(row, x)| {
                    row.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), y| {
                        let e = y[0] - x[0];
                        (hi.max(e), lo.min(e))
                    })
                })
                .unzip()
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(Self { clean, samples, sigma, eps_max, eps_min })
    }

    /// Univariate dataset whose only samples are the stated noise extremes.
    pub fn from_extremes_1d(xs: &[f64], eps_min: &[f64], eps_max: &[f64]) -> Result<Self> {
        if xs.len() != eps_min.len() || xs.len() != eps_max.len() {
            return Err(Error::DimensionMismatch { expected: xs.len(), got: eps_min.len() });
        }
        let clean = CleanDataset::from_scalars(xs)?;
        let samples = xs
            .iter()
            .zip(eps_min.iter().zip(eps_max))
            .map(|(&x, (&lo, &hi))| vec![vec![x + lo], vec![x + hi]])
            .collect();
        Self::new(clean, samples, 0.0)
    }

    pub fn clean(&self) -> &CleanDataset {
        &self.clean
    }

    pub fn samples(&self) -> &[Vec<Vec<f64>>] {
        &self.samples
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn replicates(&self) -> usize {
        self.samples[0].len()
    }

    /// Per-point largest noise (univariate only; empty otherwise).
    pub fn eps_max(&self) -> &[f64] {
        &self.eps_max
    }

    /// Per-point smallest noise (univariate only; empty otherwise).
    pub fn eps_min(&self) -> &[f64] {
        &self.eps_min
    }

    /// Data-driven ball radius: the largest observed `‖y - x‖`.
    pub fn max_noise_radius(&self) -> f64 {
        self.samples
            .iter()
            .zip(self.clean.points())
            .flat_map(|(row, x)| row.iter().map(move |y| dist(y, x)))
            .fold(0.0, f64::max)
    }

    /// All `(y, x)` training pairs, point-major.
    pub fn pairs(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        self.samples
            .iter()
            .zip(self.clean.points())
            .flat_map(|(row, x)| row.iter().map(move |y| (y.clone(), x.clone())))
            .collect()
    }
}

/// Rays sharing a common origin sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Rays {
    pub origin_index: usize,
    /// Unit direction per ray.
    pub directions: Vec<Vec<f64>>,
    /// Sorted positive coordinates `c_n` along each ray.
    pub coords: Vec<Vec<f64>>,
    /// Dataset index of each `c_n`.
    pub indices: Vec<Vec<usize>>,
}

/// Which closed-form family a dataset belongs to.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometryTag {
    Univariate,
    /// Points `c_n u` with the coordinates in dataset order.
    Colinear { direction: Vec<f64>, coords: Vec<f64> },
    Subspace { basis: Vec<Vec<f64>> },
    Rays(Rays),
    ObtuseSimplex { apex: usize },
    AcuteSimplex,
    Equilateral,
    /// Chains of samples starting after the origin, one chain per ray.
    PerturbedRays { chains: Vec<Vec<Vec<f64>>> },
    General,
}

/// Outcome of the univariate well-separation test.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub separated: bool,
    /// Smallest `x_{n+1} + ε_{n+1}^min - (x_n + ε_n^max)` in sorted order
    /// (`+inf` for a single point).
    pub min_gap: f64,
    /// Dataset indices in ascending order of `x`.
    pub order: Vec<usize>,
    /// First offending consecutive pair (dataset indices), if any.
    pub violation: Option<(usize, usize)>,
    /// First point whose extremes do not straddle zero, if any.
    pub not_straddling: Option<usize>,
}

/// Checks that the univariate noise intervals are disjoint and contain their
/// clean points in their interiors.
pub fn check_well_separated(ds: &NoisyDataset) -> Result<SeparationReport> {
    let clean = ds.clean();
    if clean.is_empty() || ds.replicates() == 0 {
        return Err(Error::EmptyDataset);
    }
    if clean.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: clean.dim() });
    }
    let x = |n: usize| clean.point(n)[0];
    let mut order: Vec<usize> = (0..clean.len()).collect();
    order.sort_by(|&a, &b| x(a).total_cmp(&x(b)));

    let not_straddling = order
        .iter()
        .copied()
        .find(|&n| !(ds.eps_max[n] > 0.0 && ds.eps_min[n] < 0.0));
    let mut min_gap = f64::INFINITY;
    let mut violation = None;
    for w in order.windows(2) {
        let (a, b) = (w[0], w[1]);
        let gap = (x(b) + ds.eps_min[b]) - (x(a) + ds.eps_max[a]);
        if gap < min_gap {
            min_gap = gap;
        }
        if !(gap > 0.0) && violation.is_none() {
            violation = Some((a, b));
        }
    }
    Ok(SeparationReport {
        separated: violation.is_none() && not_straddling.is_none(),
        min_gap,
        order,
        violation,
        not_straddling,
    })
}

fn cosine_at(points: &[Vec<f64>], apex: usize, i: usize, k: usize) -> f64 {
    let a = sub(&points[i], &points[apex]);
    let b = sub(&points[k], &points[apex]);
    dot(&a, &b) / (norm(&a) * norm(&b))
}

fn singular_values(rows: &[Vec<f64>], d: usize) -> Vec<f64> {
    if rows.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical affine rank of a point set.
pub fn affine_rank(points: &[Vec<f64>], tol: f64) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let d = points[0].len();
    let diffs: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, &points[0])).collect();
    let s = singular_values(&diffs, d);
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&v| v > tol * top.max(f64::MIN_POSITIVE)).count()
}

/// Classifies a simplex by the signs of its vertex angles.
///
/// Vertex `j` is obtuse when every pair of edges leaving it has cosine
/// `< -tol`; the simplex is acute when every such pair at every vertex has
/// cosine `> tol`. Anything in between (including right angles) is
/// [`GeometryTag::General`]. The lowest obtuse vertex index wins.
pub fn classify_simplex(ds: &CleanDataset, tol: f64) -> Result<GeometryTag> {
    let pts = ds.points();
    let n = pts.len();
    let rank = affine_rank(pts, tol.max(1e-12));
    if n > ds.dim() + 1 || rank < n - 1 {
        return Err(Error::DegenerateSimplex { rank, expected: n - 1 });
    }
    let pairs_at = |v: usize| {
        let others: Vec<usize> = (0..n).filter(|&i| i != v).collect();
        let mut out = Vec::new();
        for (a, &i) in others.iter().enumerate() {
            for &k in &others[a + 1..] {
                out.push((i, k));
            }
        }
        out
    };
    for apex in 0..n {
        if pairs_at(apex).iter().all(|&(i, k)| cosine_at(pts, apex, i, k) < -tol) {
            return Ok(GeometryTag::ObtuseSimplex { apex });
        }
    }
    let acute = (0..n).all(|v| pairs_at(v).iter().all(|&(i, k)| cosine_at(pts, v, i, k) > tol));
    if !acute {
        return Ok(GeometryTag::General);
    }
    let mut dmin = f64::INFINITY;
    let mut dmax: f64 = 0.0;
    for i in 0..n {
        for k in i + 1..n {
            let d = dist(&pts[i], &pts[k]);
            dmin = dmin.min(d);
            dmax = dmax.max(d);
        }
    }
    if dmax - dmin <= tol * dmax {
        Ok(GeometryTag::Equilateral)
    } else {
        Ok(GeometryTag::AcuteSimplex)
    }
}

/// Orthonormal basis of a linear subspace and its projector.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceFit {
    pub basis: Vec<Vec<f64>>,
    /// `B Bᵀ`, row-major `d x d`.
    pub projector: Vec<f64>,
}

impl SubspaceFit {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        linalg::matvec(&self.projector, y)
    }

    fn from_basis(basis: Vec<Vec<f64>>, d: usize) -> Self {
        let mut projector = vec![0.0; d * d];
        for b in &basis {
            for i in 0..d {
                for j in 0..d {
                    projector[i * d + j] += b[i] * b[j];
                }
            }
        }
        Self { basis, projector }
    }
}

/// Smallest linear subspace containing every point to relative accuracy `tol`.
pub fn fit_subspace(ds: &CleanDataset, tol: f64) -> SubspaceFit {
    let d = ds.dim();
    let pts = ds.points();
    let m = DMatrix::from_fn(pts.len(), d, |i, j| pts[i][j]);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let directions: Vec<Vec<f64>> = order
        .iter()
        .map(|&r| {
            let mut v: Vec<f64> = (0..d).map(|j| v_t[(r, j)]).collect();
            let lead = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();
    for r in 0..=directions.len() {
        let fit = SubspaceFit::from_basis(directions[..r].to_vec(), d);
        let ok = pts.iter().all(|x| {
            let resid = sub(x, &fit.project(x));
            norm(&resid) <= tol * norm(x)
        });
        if ok {
            return fit;
        }
    }
    SubspaceFit::from_basis(directions, d)
}

/// Greedy ray detection around the origin sample.
///
/// Points are clustered by direction with angular threshold
/// `acos(1 - tol)`; each cluster's direction is then refit by least squares
/// and every point must lie within `tol * ‖x‖` of its ray.
pub fn check_rays(ds: &CleanDataset, tol: f64) -> Result<Rays> {
    let pts = ds.points();
    let scale = ds.max_norm().max(f64::MIN_POSITIVE);
    let origin_index = (0..pts.len())
        .find(|&i| norm(&pts[i]) <= tol * scale)
        .ok_or_else(|| Error::InvalidParameter("no sample at the origin".into()))?;

    let mut clusters: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        if i == origin_index {
            continue;
        }
        let dir = normalized(p).ok_or(Error::NotRays(i))?;
        match clusters.iter_mut().find(|(seed, _)| dot(seed, &dir) >= 1.0 - tol) {
            Some((_, members)) => members.push(i),
            None => clusters.push((dir, vec![i])),
        }
    }

    let mut rays = Rays {
        origin_index,
        directions: Vec::new(),
        coords: Vec::new(),
        indices: Vec::new(),
    };
    for (seed, members) in clusters {
        let mut u = seed.clone();
        // Least-squares direction through the origin: top right singular vector.
        let m = DMatrix::from_fn(members.len(), ds.dim(), |r, j| pts[members[r]][j]);
        let svd = m.svd(false, true);
        if let Some(v_t) = svd.v_t {
            let top = (0..svd.singular_values.len())
                .max_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
                .unwrap_or(0);
            let mut v: Vec<f64> = (0..ds.dim()).map(|j| v_t[(top, j)]).collect();
            if dot(&v, &seed) < 0.0 {
                v = linalg::scale(&v, -1.0);
            }
            u = normalized(&v).unwrap_or(u);
        }
        let mut entries: Vec<(f64, usize)> = Vec::with_capacity(members.len());
        for &i in &members {
            let c = dot(&pts[i], &u);
            let off = norm(&sub(&pts[i], &linalg::scale(&u, c)));
            if c <= 0.0 || off > tol * norm(&pts[i]) {
                return Err(Error::NotRays(i));
            }
            entries.push((c, i));
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        rays.directions.push(u);
        rays.coords.push(entries.iter().map(|e| e.0).collect());
        rays.indices.push(entries.iter().map(|e| e.1).collect());
    }

    for l in 0..rays.directions.len() {
        for k in l + 1..rays.directions.len() {
            let c = dot(&rays.directions[l], &rays.directions[k]);
            if !(c < -tol) {
                return Err(Error::RaysNotObtuse(l, k, c));
            }
        }
    }
    Ok(rays)
}

/// Result of [`weighted_geometric_median_traced`].
#[derive(Debug, Clone)]
pub struct MedianTrace {
    pub point: Vec<f64>,
    pub iterations: usize,
    /// Objective value after each iterate (starting point first).
    pub objective: Vec<f64>,
}

pub fn weighted_distance_sum(points: &[Vec<f64>], weights: &[f64], x: &[f64]) -> f64 {
    points.iter().zip(weights).map(|(p, w)| w * dist(p, x)).sum()
}

/// Minimizer of `Σ w_n ‖x_n - x‖`.
///
/// Weiszfeld iteration with a vertex escape: when an iterate reaches a data
/// point that is not optimal, it steps off along the steepest-descent
/// direction. Collinear inputs are solved exactly as a weighted median on the
/// line; when the minimizing set is a segment its midpoint is returned.
pub fn weighted_geometric_median(
    points: &[Vec<f64>],
    weights: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    weighted_geometric_median_traced(points, weights, tol, max_iter).map(|t| t.point)
}

pub fn weighted_geometric_median_traced(
    points: &[Vec<f64>],
    weights: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<MedianTrace> {
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if weights.len() != points.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), got: weights.len() });
    }
    if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidParameter("weights must be positive".into()));
    }
    let d = points[0].len();
    let total_w: f64 = weights.iter().sum();
    let objective = |x: &[f64]| weighted_distance_sum(points, weights, x);

    if points.len() == 1 || affine_rank(points, 1e-12) <= 1 {
        let point = collinear_median(points, weights);
        let obj = objective(&point);
        return Ok(MedianTrace { point, iterations: 0, objective: vec![obj] });
    }

    let scale = points.iter().map(|p| norm(p)).fold(0.0, f64::max).max(1.0);
    let snap = 1e-12 * scale;
    let mut x = vec![0.0; d];
    for (p, w) in points.iter().zip(weights) {
        linalg::axpy(w / total_w, p, &mut x);
    }
    let mut trace = vec![objective(&x)];
    // Off the line the objective is strictly convex, so an optimal vertex is
    // the minimizer; iterating toward it would converge only sublinearly.
    for n in 0..points.len() {
        let (r, _) = vertex_pull(points, weights, n);
        if norm(&r) <= weights[n] * (1.0 + 1e-12) {
            let point = points[n].clone();
            trace.push(objective(&point));
            return Ok(MedianTrace { point, iterations: 0, objective: trace });
        }
    }
    let mut best = (trace[0], x.clone());

    for it in 1..=max_iter {
        let near = (0..points.len()).find(|&n| dist(&points[n], &x) <= snap);
        let next = match near {
            Some(n) => {
                let (r, lsum) = vertex_pull(points, weights, n);
                let rn = norm(&r);
                if rn <= weights[n] * (1.0 + 1e-12) {
                    let point = points[n].clone();
                    trace.push(objective(&point));
                    return Ok(MedianTrace { point, iterations: it, objective: trace });
                }
                let step = (rn - weights[n]) / lsum;
                let mut y = points[n].clone();
                linalg::axpy(step / rn, &r, &mut y);
                y
            }
            None => {
                let mut num = vec![0.0; d];
                let mut den = 0.0;
                let mut grad = vec![0.0; d];
                for (p, w) in points.iter().zip(weights) {
                    let dd = dist(p, &x);
                    linalg::axpy(w / dd, p, &mut num);
                    den += w / dd;
                    let diff = sub(&x, p);
                    linalg::axpy(w / dd, &diff, &mut grad);
                }
                if norm(&grad) <= tol * total_w {
                    return Ok(MedianTrace { point: x, iterations: it - 1, objective: trace });
                }
                linalg::scale(&num, 1.0 / den)
            }
        };
        let moved = dist(&next, &x);
        x = next;
        let obj = objective(&x);
        trace.push(obj);
        if obj < best.0 {
            best = (obj, x.clone());
        }
        if moved <= 1e-16 * scale {
            // Stalled in floating point: accept if stationary to tolerance.
            let g = gradient_norm(points, weights, &x);
            if g <= tol * total_w || near.is_some() {
                return Ok(MedianTrace { point: x, iterations: it, objective: trace });
            }
        }
    }
    Err(Error::NoConvergence { max_iter, best: best.1 })
}

fn vertex_pull(points: &[Vec<f64>], weights: &[f64], n: usize) -> (Vec<f64>, f64) {
    let d = points[n].len();
    let mut r = vec![0.0; d];
    let mut lsum = 0.0;
    for (m, (p, w)) in points.iter().zip(weights).enumerate() {
        if m == n {
            continue;
        }
        let diff = sub(p, &points[n]);
        let dd = norm(&diff);
        if dd == 0.0 {
            continue;
        }
        linalg::axpy(w / dd, &diff, &mut r);
        lsum += w / dd;
    }
    (r, lsum)
}

fn gradient_norm(points: &[Vec<f64>], weights: &[f64], x: &[f64]) -> f64 {
    let mut grad = vec![0.0; x.len()];
    for (p, w) in points.iter().zip(weights) {
        let dd = dist(p, x);
        if dd > 0.0 {
            linalg::axpy(w / dd, &sub(x, p), &mut grad);
        }
    }
    norm(&grad)
}

fn collinear_median(points: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    if points.len() == 1 {
        return points[0].clone();
    }
    let origin = &points[0];
    let far = points
        .iter()
        .max_by(|a, b| dist(a, origin).total_cmp(&dist(b, origin)))
        .expect("nonempty");
    let dir = normalized(&sub(far, origin)).expect("distinct points");
    let mut coords: Vec<(f64, f64)> = points
        .iter()
        .zip(weights)
        .map(|(p, &w)| (dot(&sub(p, origin), &dir), w))
        .collect();
    coords.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut lo = coords[0].0;
    let mut hi = coords[coords.len() - 1].0;
    for (i, &(c, w)) in coords.iter().enumerate() {
        acc += w;
        if (acc - 0.5 * total).abs() <= 1e-12 * total {
            lo = c;
            hi = coords[i + 1].0;
            break;
        }
        if acc > 0.5 * total {
            lo = c;
            hi = c;
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    let mut out = origin.clone();
    linalg::axpy(t, &dir, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_two_points() {
        let ds = NoisyDataset::from_extremes_1d(&[0.0, 1.0], &[-0.1, -0.1], &[0.1, 0.1]).unwrap();
        let r = check_well_separated(&ds).unwrap();
        assert!(r.separated);
        assert!((r.min_gap - 0.8).abs() < 1e-15);
    }

    #[test]
    fn overlapping_two_points() {
        let ds = NoisyDataset::from_extremes_1d(&[0.0, 1.0], &[-0.6, -0.6], &[0.6, 0.6]).unwrap();
        let r = check_well_separated(&ds).unwrap();
        assert!(!r.separated);
        assert_eq!(r.violation, Some((0, 1)));
    }

    #[test]
    fn separation_requires_straddling_noise() {
        let ds = NoisyDataset::from_extremes_1d(&[0.0, 1.0], &[0.01, -0.1], &[0.1, 0.1]).unwrap();
        let r = check_well_separated(&ds).unwrap();
        assert!(!r.separated);
        assert_eq!(r.not_straddling, Some(0));
    }

    #[test]
    fn separation_sorts_internally() {
        let ds = NoisyDataset::from_extremes_1d(&[1.0, 0.0], &[-0.1, -0.1], &[0.1, 0.1]).unwrap();
        let r = check_well_separated(&ds).unwrap();
        assert!(r.separated);
        assert_eq!(r.order, vec![1, 0]);
    }

    #[test]
    fn separation_rejects_multivariate() {
        let clean = CleanDataset::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let ds = NoisyDataset::new(clean, vec![vec![vec![0.0, 0.1]], vec![vec![1.0, 0.1]]], 0.1).unwrap();
        assert!(matches!(
            check_well_separated(&ds),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(matches!(CleanDataset::new(vec![]), Err(Error::EmptyDataset)));
        let clean = CleanDataset::from_scalars(&[0.0]).unwrap();
        assert!(matches!(NoisyDataset::new(clean, vec![vec![]], 0.1), Err(Error::EmptyDataset)));
        assert!(matches!(
            CleanDataset::from_scalars(&[1.0, 1.0]),
            Err(Error::DuplicatePoints(0, 1))
        ));
    }

    #[test]
    fn simplex_classification_examples() {
        let obtuse = CleanDataset::new(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![-1.0, 2.0]]).unwrap();
        assert_eq!(classify_simplex(&obtuse, ANGLE_TOL).unwrap(), GeometryTag::ObtuseSimplex { apex: 0 });

        let eq: Vec<Vec<f64>> = [90.0f64, 210.0, 330.0]
            .iter()
            .map(|a| vec![a.to_radians().cos(), a.to_radians().sin()])
            .collect();
        let eq = CleanDataset::new(eq).unwrap();
        assert_eq!(classify_simplex(&eq, ANGLE_TOL).unwrap(), GeometryTag::Equilateral);

        let acute = CleanDataset::new(vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(classify_simplex(&acute, ANGLE_TOL).unwrap(), GeometryTag::AcuteSimplex);

        let right = CleanDataset::new(vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(classify_simplex(&right, ANGLE_TOL).unwrap(), GeometryTag::General);

        let flat = CleanDataset::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert!(matches!(classify_simplex(&flat, ANGLE_TOL), Err(Error::DegenerateSimplex { .. })));
    }

    #[test]
    fn subspace_examples() {
        let ds = CleanDataset::new(vec![vec![0.6, 0.8], vec![-1.2, -1.6], vec![3.0, 4.0]]).unwrap();
        let fit = fit_subspace(&ds, SUBSPACE_TOL);
        assert_eq!(fit.rank(), 1);
        let u = &fit.basis[0];
        assert!((u[0].abs() - 0.6).abs() < 1e-12 && (u[1].abs() - 0.8).abs() < 1e-12);
        assert!(u[0] * u[1] > 0.0);
    }

    #[test]
    fn rays_examples() {
        let s = 0.5f64.sqrt();
        let ds = CleanDataset::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![2.0, 0.0],
            vec![-s, s],
            vec![-2.0 * s, 2.0 * s],
        ])
        .unwrap();
        let rays = check_rays(&ds, ANGLE_TOL).unwrap();
        assert_eq!(rays.directions.len(), 2);
        assert_eq!(rays.indices, vec![vec![1, 2], vec![3, 4]]);
        assert!((rays.coords[1][1] - 2.0).abs() < 1e-12);

        let pts: Vec<Vec<f64>> = std::iter::once(vec![0.0, 0.0])
            .chain([0.0f64, 120.0, 240.0].iter().map(|a| vec![a.to_radians().cos(), a.to_radians().sin()]))
            .collect();
        assert_eq!(check_rays(&CleanDataset::new(pts).unwrap(), ANGLE_TOL).unwrap().directions.len(), 3);

        let acute = CleanDataset::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![60f64.to_radians().cos(), 60f64.to_radians().sin()],
        ])
        .unwrap();
        assert!(matches!(check_rays(&acute, ANGLE_TOL), Err(Error::RaysNotObtuse(0, 1, _))));

        let off = CleanDataset::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.001]]).unwrap();
        // The off-ray point seeds its own ray, which is not obtuse to the first.
        assert!(matches!(check_rays(&off, ANGLE_TOL), Err(Error::RaysNotObtuse(..))));
    }

    #[test]
    fn median_of_equilateral_is_centroid() {
        let pts: Vec<Vec<f64>> = [90.0f64, 210.0, 330.0]
            .iter()
            .map(|a| vec![a.to_radians().cos() + 3.0, a.to_radians().sin() - 1.0])
            .collect();
        let m = weighted_geometric_median(&pts, &[1.0, 1.0, 1.0], 1e-12, 10_000).unwrap();
        assert!((m[0] - 3.0).abs() < 1e-9 && (m[1] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn median_of_two_points_is_midpoint() {
        let pts = vec![vec![0.0, 0.0], vec![2.0, 4.0]];
        let m = weighted_geometric_median(&pts, &[1.0, 1.0], 1e-12, 100).unwrap();
        assert_eq!(m, vec![1.0, 2.0]);
    }

    #[test]
    fn median_snaps_to_dominant_vertex() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let m = weighted_geometric_median(&pts, &[5.0, 1.0, 1.0], 1e-12, 1000).unwrap();
        assert!(norm(&m) < 1e-9);
    }

    #[test]
    fn median_rejects_bad_weights() {
        let pts = vec![vec![0.0], vec![1.0]];
        assert!(weighted_geometric_median(&pts, &[1.0, 0.0], 1e-9, 10).is_err());
    }
}
