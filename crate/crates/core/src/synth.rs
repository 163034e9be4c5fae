//! Random instances of each supported geometry.
//!
//! Every generator draws from the keyed stream `(seed, DATA, kind, index)`,
//! so instance `i` of a suite can be regenerated on its own.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::closed_form::check_perturbed_rays;
use crate::geometry::{classify_simplex, CleanDataset, GeometryTag, NoisyDataset, ANGLE_TOL};
use crate::linalg::{norm, normalized};
use crate::rng::{self, tag};
use crate::Result;

const KIND_1D: u64 = 1;
const KIND_OBTUSE: u64 = 2;
const KIND_ACUTE: u64 = 3;
const KIND_RAYS: u64 = 4;
const KIND_PERTURBED: u64 = 5;

fn stream(seed: u64, kind: u64, index: u64) -> ChaCha8Rng {
    rng::keyed(seed, &[tag::DATA, kind, index])
}

/// A univariate dataset with `n` points whose noise intervals are disjoint
/// and straddle their clean points.
pub fn separated_1d(seed: u64, index: u64, n: usize) -> Result<NoisyDataset> {
    let mut r = stream(seed, KIND_1D, index);
    let mut xs = Vec::with_capacity(n);
    let mut x = r.random_range(-5.0..0.0);
    for _ in 0..n {
        xs.push(x);
        x += r.random_range(0.5..3.0);
    }
    let gap = |i: usize| {
        let left = if i > 0 { xs[i] - xs[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < n { xs[i + 1] - xs[i] } else { f64::INFINITY };
        let g = left.min(right);
        if g.is_finite() { g } else { 1.0 }
    };
    let mut eps_min = Vec::with_capacity(n);
    let mut eps_max = Vec::with_capacity(n);
    for i in 0..n {
        let g = gap(i);
        eps_min.push(-r.random_range(0.05..0.45) * g);
        eps_max.push(r.random_range(0.05..0.45) * g);
    }
    // Shuffle the dataset order so callers cannot rely on sorted input.
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, r.random_range(0..=i));
    }
    let pick = |v: &[f64]| order.iter().map(|&i| v[i]).collect::<Vec<_>>();
    NoisyDataset::from_extremes_1d(&pick(&xs), &pick(&eps_min), &pick(&eps_max))
}

fn random_rotation(r: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng::std_normal(r));
    let qr = g.qr();
    let (mut q, rr) = (qr.q(), qr.r());
    for j in 0..d {
        if rr[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn rotate(q: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    let d = v.len();
    (0..d).map(|i| (0..d).map(|j| q[(i, j)] * v[j]).sum()).collect()
}

/// `m` pairwise-obtuse unit vectors in `R^d` (`m ≤ d`), randomly rotated.
fn obtuse_directions(r: &mut ChaCha8Rng, m: usize, d: usize) -> Vec<Vec<f64>> {
    // e_i − t·1 restricted to the first m coordinates has pairwise inner
    // product m t² − 2t < 0 for 0 < t < 2/m; t ≠ 1/m keeps them independent.
    let t = r.random_range(1.2..1.8) / m as f64;
    let q = random_rotation(r, d);
    (0..m)
        .map(|i| {
            let mut v = vec![0.0; d];
            for (j, vj) in v.iter_mut().enumerate().take(m) {
                *vj = if i == j { 1.0 - t } else { -t };
            }
            rotate(&q, &normalized(&v).expect("nonzero"))
        })
        .collect()
}

/// An `(n−1)`-simplex in `R^(n−1)` whose vertex 0 is obtuse with every pair.
pub fn obtuse_simplex(seed: u64, index: u64, n: usize) -> Result<CleanDataset> {
    let mut r = stream(seed, KIND_OBTUSE, index);
    let d = (n - 1).max(1);
    loop {
        let apex: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
        let dirs = obtuse_directions(&mut r, n - 1, d);
        let mut pts = vec![apex.clone()];
        for u in dirs {
            let len = r.random_range(1.0..3.0);
            pts.push(apex.iter().zip(&u).map(|(a, b)| a + len * b).collect());
        }
        let ds = CleanDataset::new(pts)?;
        if n <= 2 || matches!(classify_simplex(&ds, ANGLE_TOL)?, GeometryTag::ObtuseSimplex { apex: 0 }) {
            return Ok(ds);
        }
    }
}

/// A perturbed regular `(n−1)`-simplex in `R^(n−1)` with every vertex acute.
pub fn acute_simplex(seed: u64, index: u64, n: usize) -> Result<CleanDataset> {
    let mut r = stream(seed, KIND_ACUTE, index);
    let d = n - 1;
    loop {
        // Regular simplex: centered standard basis of R^n, then an orthonormal
        // basis of the sum-zero hyperplane maps it into R^(n−1).
        let basis = hyperplane_basis(n);
        let q = random_rotation(&mut r, d);
        let scale = r.random_range(0.5..2.0);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let e: Vec<f64> = (0..n).map(|j| if i == j { 1.0 } else { 0.0 } - 1.0 / n as f64).collect();
                let c: Vec<f64> = basis.iter().map(|b| b.iter().zip(&e).map(|(x, y)| x * y).sum::<f64>() * scale).collect();
                let c: Vec<f64> = c.iter().map(|v| v * (1.0 + r.random_range(-0.1..0.1))).collect();
                rotate(&q, &c)
            })
            .collect();
        let ds = CleanDataset::new(pts)?;
        if n <= 1 || matches!(classify_simplex(&ds, ANGLE_TOL)?, GeometryTag::AcuteSimplex | GeometryTag::Equilateral) {
            return Ok(ds);
        }
    }
}

fn hyperplane_basis(n: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..n - 1 {
        let mut v: Vec<f64> = (0..n).map(|j| if j == i { 1.0 } else { 0.0 } - 1.0 / n as f64).collect();
        for b in &basis {
            let c: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
        }
        basis.push(normalized(&v).expect("independent"));
    }
    basis
}

/// The origin plus `l` pairwise-obtuse rays in `R^l` with up to three points
/// each; returns the dataset and a radius that keeps all balls disjoint.
pub fn rays(seed: u64, index: u64, l: usize) -> Result<(CleanDataset, f64)> {
    let mut r = stream(seed, KIND_RAYS, index);
    let d = l.max(2);
    let dirs = obtuse_directions(&mut r, l, d);
    let mut pts = vec![vec![0.0; d]];
    for u in &dirs {
        let count = r.random_range(1..=3);
        let mut c = 0.0;
        for _ in 0..count {
            c += r.random_range(1.0..2.5);
            pts.push(u.iter().map(|v| c * v).collect());
        }
    }
    let ds = CleanDataset::new(pts)?;
    let rho = 0.3 * ds.min_pairwise_distance() / 2.0;
    Ok((ds, rho))
}

/// Chains near `l` obtuse rays satisfying the obtuseness and nesting
/// conditions, the origin omitted; returns the chains, dimension and radius.
pub fn perturbed_rays(seed: u64, index: u64, l: usize) -> Result<(Vec<Vec<Vec<f64>>>, usize, f64)> {
    let mut r = stream(seed, KIND_PERTURBED, index);
    let d = l.max(2);
    loop {
        let dirs = obtuse_directions(&mut r, l, d);
        let rho = r.random_range(0.2..0.4);
        let chains: Vec<Vec<Vec<f64>>> = dirs
            .iter()
            .map(|u| {
                let count = r.random_range(1..=3);
                let mut c = 0.0;
                (0..count)
                    .map(|_| {
                        c += r.random_range(1.5..2.5);
                        let jitter: Vec<f64> = (0..d).map(|_| 0.05 * rho * rng::std_normal(&mut r)).collect();
                        u.iter().zip(&jitter).map(|(v, j)| c * v + j).collect()
                    })
                    .collect()
            })
            .collect();
        if chains.iter().flatten().all(|p| norm(p) > 2.0 * rho) && check_perturbed_rays(&chains, rho, 1e-9).is_ok() {
            return Ok((chains, d, rho));
        }
    }
}

/// `m` deterministic samples on and inside the radius-`radius` ball around
/// every clean point (`d ≤ 2`). In the plane, 64% of them lie evenly on the
/// circle and the rest fill the disk along a sunflower spiral.
pub fn ball_samples(ds: &CleanDataset, m: usize, radius: f64) -> Result<NoisyDataset> {
    if m == 0 {
        return Err(crate::Error::EmptyDataset);
    }
    let d = ds.dim();
    let offsets: Vec<Vec<f64>> = match d {
        1 => (0..m)
            .map(|j| match j {
                0 => vec![-radius],
                1 => vec![radius],
                _ => vec![radius * (2.0 * (j - 1) as f64 / (m - 1) as f64 - 1.0)],
            })
            .collect(),
        2 => {
            let on = ((0.64 * m as f64).round() as usize).clamp(1, m);
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|j| {
                    let (r, t) = if j < on {
                        (radius, 2.0 * std::f64::consts::PI * j as f64 / on as f64)
                    } else {
                        let i = j - on;
                        (radius * ((i as f64 + 0.5) / (m - on) as f64).sqrt(), golden * i as f64)
                    };
                    vec![r * t.cos(), r * t.sin()]
                })
                .collect()
        }
        _ => return Err(crate::Error::InvalidParameter("ball samples need d <= 2".into())),
    };
    let samples = ds
        .points()
        .iter()
        .map(|x| offsets.iter().map(|o| x.iter().zip(o).map(|(a, b)| a + b).collect()).collect())
        .collect();
    NoisyDataset::new(ds.clone(), samples, 0.0)
}
