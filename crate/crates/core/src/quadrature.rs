//! Gauss rules and an adaptive panel integrator.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Probabilists' Gauss–Hermite rule: `E[g(Z)] ≈ Σ w_i g(z_i)` for `Z ~ N(0,1)`.
///
/// Built with the Golub–Welsch eigenvalue method; weights sum to one.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    (
        pairs.iter().map(|p| p.0).collect(),
        pairs.iter().map(|p| p.1 / total).collect(),
    )
}

fn gl10() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(10))
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = gl10();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * x.iter().zip(w).map(|(&xi, &wi)| wi * f(mid + half * xi)).sum::<f64>()
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let left = panel(f, a, mid);
    let right = panel(f, mid, b);
    let refined = left + right;
    if depth == 0 || (refined - whole).abs() <= tol || (b - a) < 1e-14 * (1.0 + a.abs()) {
        return refined;
    }
    adapt(f, a, mid, left, 0.5 * tol, depth - 1) + adapt(f, mid, b, right, 0.5 * tol, depth - 1)
}

/// Adaptive 10-point Gauss–Legendre integration of `f` over `[a, b]`.
///
/// The interval is first cut at every breakpoint inside `(a, b)` and into at
/// least `min_panels` equal pieces; each piece is bisected until two-level
/// estimates agree to its share of `tol`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    min_panels: usize,
    tol: f64,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = min_panels.max(1);
    let mut cuts: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    cuts.extend(breakpoints.iter().copied().filter(|&t| t > a && t < b));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (1.0 + y.abs()));
    let pieces = (cuts.len() - 1) as f64;
    cuts.windows(2)
        .map(|w| {
            let whole = panel(&f, w[0], w[1]);
            adapt(&f, w[0], w[1], whole, tol / pieces, 40)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // ∫ x^18 over [-1,1] = 2/19
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_moments() {
        let (z, w) = gauss_hermite(64);
        assert_eq!(z.len(), 64);
        let m2: f64 = z.iter().zip(&w).map(|(zi, wi)| wi * zi * zi).sum();
        let m4: f64 = z.iter().zip(&w).map(|(zi, wi)| wi * zi.powi(4)).sum();
        assert!((m2 - 1.0).abs() < 1e-12);
        assert!((m4 - 3.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let v = integrate(|x: f64| x.abs(), -1.0, 2.0, &[], 1, 1e-12);
        assert!((v - 2.5).abs() < 1e-10);
        let v = integrate(|x: f64| x.abs(), -1.0, 2.0, &[0.0], 1, 1e-12);
        assert!((v - 2.5).abs() < 1e-14);
    }
}
