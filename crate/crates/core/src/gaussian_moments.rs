//! Moments of ReLU'd Gaussians and the exact noise-marginalized loss.

use rand_distr::{Distribution, StandardNormal};

use crate::geometry::CleanDataset;
use crate::linalg::{dist_sq, dot, norm};
use crate::network::ShallowNet;
use crate::normal::{self, cdf, pdf, sf};
use crate::quadrature;
use crate::rng::{self, tag};
use crate::{Denoiser, Error, Result};

/// Beyond this many standard deviations the moments take their limits.
const EXTREME: f64 = 37.0;
/// Correlations this close to ±1 use the degenerate-line formulas.
const DEGENERATE_RHO: f64 = 1.0 - 1e-12;

/// `E[[z]_+]` for `z ~ N(mu, sigma²)`.
pub fn relu_gauss_mean(mu: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return mu.max(0.0);
    }
    let t = mu / sigma;
    if t > EXTREME {
        return mu;
    }
    if t < -EXTREME {
        return 0.0;
    }
    // (1 - Φ(-μ/σ)) μ + σ φ(-μ/σ)
    (mu * sf(-t) + sigma * pdf(-t)).max(0.0)
}

/// `E[[z]_+²]` for `z ~ N(mu, sigma²)`.
pub fn relu_gauss_second(mu: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return mu.max(0.0).powi(2);
    }
    let t = mu / sigma;
    if t > EXTREME {
        return mu * mu + sigma * sigma;
    }
    if t < -EXTREME {
        return 0.0;
    }
    ((mu * mu + sigma * sigma) * cdf(t) + mu * sigma * pdf(t)).max(0.0)
}

/// A strictly positive definite bivariate normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateGaussian {
    pub mu: [f64; 2],
    /// `(σ₁₁, σ₁₂, σ₂₂)`.
    pub cov: [f64; 3],
}

impl BivariateGaussian {
    pub fn new(mu: [f64; 2], cov: [f64; 3]) -> Result<Self> {
        let [s11, s12, s22] = cov;
        if !(s11 > 0.0 && s22 > 0.0 && s11 * s22 - s12 * s12 > 0.0) || mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::IllConditioned);
        }
        Ok(Self { mu, cov })
    }

    pub fn det(&self) -> f64 {
        self.cov[0] * self.cov[2] - self.cov[1] * self.cov[1]
    }

    pub fn correlation(&self) -> f64 {
        self.cov[1] / (self.cov[0] * self.cov[2]).sqrt()
    }

    /// Coordinates swapped.
    pub fn swapped(&self) -> Self {
        Self { mu: [self.mu[1], self.mu[0]], cov: [self.cov[2], self.cov[1], self.cov[0]] }
    }
}

/// `P(Z₁ > h, Z₂ > k)` for standard margins with correlation `rho`.
///
/// Integrates `φ(s) Φ̄((h - ρs)/√(1-ρ²))` over `s > k`, truncated at 8.5.
/// For `|ρ| > 1 - 1e-12` the perfectly correlated limit is returned.
pub fn standard_bvn_tail(h: f64, k: f64, rho: f64) -> f64 {
    if rho > DEGENERATE_RHO {
        return sf(h.max(k));
    }
    if rho < -DEGENERATE_RHO {
        return (sf(k) - cdf(h)).max(0.0);
    }
    let (lo, hi) = (k.max(-8.5), 8.5);
    if lo >= hi {
        return 0.0;
    }
    let r = (1.0 - rho * rho).sqrt();
    let mut breaks = Vec::new();
    if rho != 0.0 {
        breaks.push(h / rho);
    }
    let v = quadrature::integrate(|s| pdf(s) * sf((h - rho * s) / r), lo, hi, &breaks, 4, 1e-15);
    v.clamp(0.0, 1.0)
}

/// `P(z₁ > t₁, z₂ > t₂)`.
pub fn bvn_tail(b: &BivariateGaussian, t: [f64; 2]) -> f64 {
    let (s1, s2) = (b.cov[0].sqrt(), b.cov[2].sqrt());
    standard_bvn_tail((t[0] - b.mu[0]) / s1, (t[1] - b.mu[1]) / s2, b.correlation())
}

/// `E[[z₁]_+ [z₂]_+]`.
pub fn relu_gauss_cross(b: &BivariateGaussian) -> f64 {
    relu_cross_moment(b.mu, b.cov)
}

/// `E[[z₁]_+ [z₂]_+]` for any (possibly singular) covariance.
pub fn relu_cross_moment(mu: [f64; 2], cov: [f64; 3]) -> f64 {
    let [m1, m2] = mu;
    let [s11, s12, s22] = cov;
    if s11 <= 0.0 {
        return m1.max(0.0) * relu_gauss_mean(m2, s22.max(0.0).sqrt());
    }
    if s22 <= 0.0 {
        return m2.max(0.0) * relu_gauss_mean(m1, s11.sqrt());
    }
    let (sd1, sd2) = (s11.sqrt(), s22.sqrt());
    let rho = (s12 / (sd1 * sd2)).clamp(-1.0, 1.0);
    if rho.abs() > DEGENERATE_RHO {
        return degenerate_cross(m1, sd1, m2, rho.signum() * sd2);
    }
    if m1 / sd1 < -EXTREME || m2 / sd2 < -EXTREME {
        return 0.0;
    }
    let det = s11 * s22 - s12 * s12;
    let p = standard_bvn_tail(-m1 / sd1, -m2 / sd2, rho);
    // Unnormalized boundary terms: marginal density at the truncation point
    // times the conditional probability that the other coordinate survives.
    let f1 = pdf(-m1 / sd1) / sd1 * {
        let cm = s12 / s11 * (-m1);
        let cv = s22 - s12 * s12 / s11;
        sf((-m2 - cm) / cv.sqrt())
    };
    let f2 = pdf(-m2 / sd2) / sd2 * {
        let cm = s12 / s22 * (-m2);
        let cv = s11 - s12 * s12 / s22;
        sf((-m1 - cm) / cv.sqrt())
    };
    let density = normal::bivariate_pdf(-m1, -m2, s11, s12, s22);
    let v = s12 * p + det * density + s11 * m2 * f1 + m1 * s22 * f2 + m1 * m2 * p;
    v.max(0.0)
}

/// `z₁ = m1 + a g`, `z₂ = m2 + b g` with a single standard normal `g`.
fn degenerate_cross(m1: f64, a: f64, m2: f64, b: f64) -> f64 {
    // Each factor is positive on a half-line in g; integrate the product of
    // the two linear functions over the intersection in closed form.
    let half = |m: f64, s: f64| -> (f64, f64) {
        if s > 0.0 {
            (-m / s, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, -m / s)
        }
    };
    let (l1, h1) = half(m1, a);
    let (l2, h2) = half(m2, b);
    let (lo, hi) = (l1.max(l2), h1.min(h2));
    if !(hi > lo) {
        return 0.0;
    }
    let (p_lo, p_hi) = (pdf(lo), pdf(hi));
    let mass = cdf(hi) - cdf(lo);
    let m_1 = p_lo - p_hi;
    let xphi = |x: f64, p: f64| if x.is_finite() { x * p } else { 0.0 };
    let m_2 = mass + xphi(lo, p_lo) - xphi(hi, p_hi);
    (m1 * m2 * mass + (m1 * b + m2 * a) * m_1 + a * b * m_2).max(0.0)
}

/// The two parts of the marginalized loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalizedLoss {
    /// `E_x ‖Σ a_k φ̃_k - x‖²`.
    pub mean_term: f64,
    /// `E_x Σ_ij a_iᵀa_j H_ij`.
    pub h_form: f64,
}

impl MarginalizedLoss {
    pub fn total(&self) -> f64 {
        self.mean_term + self.h_form
    }
}

fn check_shape(net: &ShallowNet) -> Result<()> {
    if net.use_skip() || net.b().iter().any(|&b| b != 0.0) {
        return Err(Error::ModelShapeUnsupported);
    }
    Ok(())
}

/// Expected squared error of a bias-free, skip-free network under
/// `y = x + σg`, averaged over the clean points.
pub fn marginalized_loss(net: &ShallowNet, prior: &CleanDataset, sigma: f64) -> Result<f64> {
    marginalized_loss_parts(net, prior, sigma).map(|p| p.total())
}

pub fn marginalized_loss_parts(net: &ShallowNet, prior: &CleanDataset, sigma: f64) -> Result<MarginalizedLoss> {
    check_shape(net)?;
    if prior.dim() != net.dim() {
        return Err(Error::DimensionMismatch { expected: net.dim(), got: prior.dim() });
    }
    let k = net.width();
    let d = net.dim();
    let s2 = sigma * sigma;
    let gram: Vec<f64> = (0..k * k).map(|ij| dot(net.w(ij / k), net.w(ij % k))).collect();
    let a_gram: Vec<f64> = (0..k * k).map(|ij| dot(net.a(ij / k), net.a(ij % k))).collect();
    let mut mean_term = 0.0;
    let mut h_form = 0.0;
    for x in prior.points() {
        let mu: Vec<f64> = (0..k).map(|i| dot(net.w(i), x)).collect();
        let m: Vec<f64> = (0..k).map(|i| relu_gauss_mean(mu[i], sigma * gram[i * k + i].sqrt())).collect();
        let mut pred = vec![0.0; d];
        for i in 0..k {
            for (p, a) in pred.iter_mut().zip(net.a(i)) {
                *p += a * m[i];
            }
        }
        mean_term += dist_sq(&pred, x);
        for i in 0..k {
            for j in i..k {
                let second = if i == j {
                    relu_gauss_second(mu[i], sigma * gram[i * k + i].sqrt())
                } else {
                    relu_cross_moment([mu[i], mu[j]], [s2 * gram[i * k + i], s2 * gram[i * k + j], s2 * gram[j * k + j]])
                };
                let h = second - m[i] * m[j];
                let weight = if i == j { 1.0 } else { 2.0 };
                h_form += weight * a_gram[i * k + j] * h;
            }
        }
    }
    let n = prior.len() as f64;
    Ok(MarginalizedLoss { mean_term: mean_term / n, h_form: h_form / n })
}

/// Monte-Carlo estimate of `E ‖f(x + σg) - x‖²` with `x` uniform over the
/// clean points. Returns `(mean, standard error)`.
pub fn mc_oracle<D: Denoiser + ?Sized>(f: &D, prior: &CleanDataset, sigma: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    if prior.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: prior.dim() });
    }
    let mut rng = rng::keyed(seed, &[tag::MONTE_CARLO]);
    let d = prior.dim();
    let n = prior.len();
    let mut y = vec![0.0; d];
    let values = (0..samples).map(|_| {
        let idx = if n == 1 { 0 } else { rand::Rng::random_range(&mut rng, 0..n) };
        let x = prior.point(idx);
        for (yi, xi) in y.iter_mut().zip(x) {
            let g: f64 = StandardNormal.sample(&mut rng);
            *yi = xi + sigma * g;
        }
        dist_sq(&f.denoise(&y), x)
    });
    Ok(mean_and_se(values))
}

fn mean_and_se(values: impl Iterator<Item = f64>) -> (f64, f64) {
    // Welford accumulation.
    let (mut count, mut mean, mut m2) = (0.0f64, 0.0f64, 0.0f64);
    for v in values {
        count += 1.0;
        let delta = v - mean;
        mean += delta / count;
        m2 += delta * (v - mean);
    }
    let var = if count > 1.0 { m2 / (count - 1.0) } else { 0.0 };
    (mean, (var / count).sqrt())
}

/// Plain Monte-Carlo `(mean, se)` of `g(z)` for `z ~ N(0, 1)`.
pub fn mc_standard_normal<G: Fn(f64) -> f64>(g: G, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = rng::keyed(seed, &[tag::MONTE_CARLO, 1]);
    mean_and_se((0..samples).map(|_| g(StandardNormal.sample(&mut rng))))
}

/// Stratified Monte Carlo for `E[g(z)]`, `z ~ N(0, I_dim)`, `dim ∈ {1, 2}`.
///
/// The unit cube of uniforms is cut into equal cells and each cell receives
/// two independent uniform draws mapped through the inverse normal CDF. The
/// standard error comes from the within-cell pair differences.
pub fn mc_stratified<G: Fn(&[f64]) -> f64>(g: G, dim: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if !(dim == 1 || dim == 2) || samples < 2 {
        return Err(Error::InvalidParameter("stratified sampling supports 1 or 2 dimensions and >= 2 samples".into()));
    }
    let cells_per_axis = if dim == 1 { samples / 2 } else { ((samples / 2) as f64).sqrt().floor() as usize };
    let cells = cells_per_axis.pow(dim as u32);
    let mut rng = rng::keyed(seed, &[tag::MONTE_CARLO, 2]);
    let width = 1.0 / cells_per_axis as f64;
    let mut total = 0.0;
    let mut var_sum = 0.0;
    let mut z = [0.0f64; 2];
    for cell in 0..cells {
        let mut pair = [0.0f64; 2];
        for slot in &mut pair {
            let mut c = cell;
            for zi in z.iter_mut().take(dim) {
                let idx = c % cells_per_axis;
                c /= cells_per_axis;
                let u: f64 = rand::Rng::random::<f64>(&mut rng);
                let p = ((idx as f64 + u) * width).clamp(1e-300, 1.0 - 1e-16);
                *zi = inverse_cdf(p);
            }
            *slot = g(&z[..dim]);
        }
        total += pair[0] + pair[1];
        var_sum += 0.5 * (pair[0] - pair[1]).powi(2);
    }
    let n = cells as f64;
    // Each cell mean has variance σ_c²/2; the estimator averages n of them.
    let mean = total / (2.0 * n);
    let se = (var_sum / 2.0).sqrt() / n;
    Ok((mean, se))
}

/// Standard normal quantile.
pub fn inverse_cdf(p: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    thread_local! {
        static STD: Normal = Normal::new(0.0, 1.0).expect("valid parameters");
    }
    let x = STD.with(|n| n.inverse_cdf(p));
    // One Newton step against the erfc-based CDF for full precision.
    let dens = pdf(x);
    if dens > 0.0 && x.is_finite() {
        x - (cdf(x) - p) / dens
    } else {
        x
    }
}

/// One row of the moment accuracy benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCase {
    pub case: String,
    pub analytic: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
}

impl MomentCase {
    pub fn normalized_error(&self) -> f64 {
        (self.analytic - self.mc_mean).abs() / self.analytic.abs()
    }

    pub fn within_se(&self, k: f64) -> bool {
        (self.analytic - self.mc_mean).abs() <= k * self.mc_se
    }
}

/// The two univariate and two bivariate reference cases.
pub fn moment_benchmark(samples: usize, seed: u64) -> Result<Vec<MomentCase>> {
    let mut out = Vec::new();
    for (i, (mu, sigma)) in [(1.0, 5.0), (-1.0, 5.0)].into_iter().enumerate() {
        let (m, se) = mc_stratified(|z| (mu + sigma * z[0]).max(0.0), 1, samples, seed ^ (i as u64))?;
        out.push(MomentCase {
            case: format!("relu_mean mu={mu} sigma={sigma}"),
            analytic: relu_gauss_mean(mu, sigma),
            mc_mean: m,
            mc_se: se,
        });
    }
    for (i, (mu, cov)) in [([-4.0, 17.0], [13.0, -9.0, 8.0]), ([6.0, 2.0], [10.0, 2.0, 1.0])]
        .into_iter()
        .enumerate()
    {
        let b = BivariateGaussian::new(mu, cov)?;
        let l11 = cov[0].sqrt();
        let l21 = cov[1] / l11;
        let l22 = (cov[2] - l21 * l21).sqrt();
        let (m, se) = mc_stratified(
            |z| {
                let z1 = mu[0] + l11 * z[0];
                let z2 = mu[1] + l21 * z[0] + l22 * z[1];
                z1.max(0.0) * z2.max(0.0)
            },
            2,
            samples,
            seed ^ (16 + i as u64),
        )?;
        out.push(MomentCase {
            case: format!("relu_cross mu=({},{}) cov=({},{},{})", mu[0], mu[1], cov[0], cov[1], cov[2]),
            analytic: relu_gauss_cross(&b),
            mc_mean: m,
            mc_se: se,
        });
    }
    Ok(out)
}

/// CSV `case,analytic,mc_mean,mc_se,normalized_error`.
pub fn benchmark_csv(rows: &[MomentCase]) -> String {
    use crate::io::fmt_real;
    let mut out = String::from("case,analytic,mc_mean,mc_se,normalized_error\n");
    for r in rows {
        out.push_str(&format!(
            "\"{}\",{},{},{},{}\n",
            r.case,
            fmt_real(r.analytic),
            fmt_real(r.mc_mean),
            fmt_real(r.mc_se),
            fmt_real(r.normalized_error())
        ));
    }
    out
}

/// Norm of the unit inner weight used for `φ̃`; exposed for tests.
pub fn unit_scale(net: &ShallowNet, k: usize) -> f64 {
    norm(net.w(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn relu_mean_examples() {
        assert!((relu_gauss_mean(0.0, 1.0) - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-16);
        let tiny = relu_gauss_mean(-10.0, 1.0);
        // σ φ(x) (1/x² - 3/x⁴ + ...) at x = 10
        let lead = pdf(10.0) * (1.0 / 100.0 - 3.0 / 1e4);
        assert!(tiny > 0.0 && tiny < 1e-20);
        assert!((tiny / lead - 1.0).abs() < 2e-3, "{tiny} vs {lead}");
    }

    #[test]
    fn relu_mean_identities() {
        for mu in [-3.0, -0.7, 0.0, 0.4, 2.5] {
            for sigma in [0.1, 1.0, 4.0] {
                let diff = relu_gauss_mean(mu, sigma) - relu_gauss_mean(-mu, sigma);
                assert!((diff - mu).abs() < 1e-12);
            }
        }
        for mu in [-3.0f64, -1.0, 0.5, 2.0] {
            assert!((relu_gauss_mean(mu, 1e-8) - mu.max(0.0)).abs() < 1e-7);
        }
    }

    #[test]
    fn second_moment_matches_quadrature() {
        for (mu, sigma) in [(0.3, 1.2), (-1.0, 0.5), (2.0, 3.0)] {
            let q = quadrature::integrate(
                |z| pdf(z) * (mu + sigma * z).max(0.0).powi(2),
                -12.0,
                12.0,
                &[-mu / sigma],
                8,
                1e-14,
            );
            assert!((relu_gauss_second(mu, sigma) - q).abs() < 1e-11);
        }
    }

    #[test]
    fn bvn_tail_examples() {
        let b = BivariateGaussian::new([0.0, 0.0], [1.0, 0.0, 1.0]).unwrap();
        assert!((bvn_tail(&b, [0.0, 0.0]) - 0.25).abs() < 1e-13);
        let b = BivariateGaussian::new([0.0, 0.0], [1.0, -0.5, 1.0]).unwrap();
        assert!((bvn_tail(&b, [0.0, 0.0]) - 1.0 / 6.0).abs() < 1e-12);
        assert!((standard_bvn_tail(0.0, 0.0, 1.0 - 1e-13) - 0.5).abs() < 1e-15);
        // Orthant formula for other correlations.
        for rho in [-0.9, -0.2, 0.3, 0.8] {
            let want = 0.25 + f64::asin(rho) / (2.0 * PI);
            assert!((standard_bvn_tail(0.0, 0.0, rho) - want).abs() < 1e-12);
        }
        assert!(BivariateGaussian::new([0.0, 0.0], [1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn bvn_tail_is_monotone() {
        let b = BivariateGaussian::new([0.3, -0.2], [2.0, 0.7, 1.5]).unwrap();
        let mut prev = 1.0;
        for i in 0..40 {
            let t = -4.0 + 0.2 * i as f64;
            let v = bvn_tail(&b, [t, 0.1]);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn cross_examples() {
        let b = BivariateGaussian::new([0.0, 0.0], [1.0, 0.0, 1.0]).unwrap();
        assert!((relu_gauss_cross(&b) - 1.0 / (2.0 * PI)).abs() < 1e-13);
        let b = BivariateGaussian::new([0.4, -1.3], [2.0, 0.9, 1.1]).unwrap();
        assert!((relu_gauss_cross(&b) - relu_gauss_cross(&b.swapped())).abs() < 1e-12);
    }

    #[test]
    fn cross_matches_two_dimensional_quadrature() {
        for (mu, cov) in [([-4.0, 17.0], [13.0, -9.0, 8.0]), ([6.0, 2.0], [10.0, 2.0, 1.0]), ([0.5, -0.5], [1.0, 0.6, 2.0])] {
            let b = BivariateGaussian::new(mu, cov).unwrap();
            let l11 = cov[0].sqrt();
            let l21 = cov[1] / l11;
            let l22 = (cov[2] - l21 * l21).sqrt();
            let inner = |g1: f64| {
                let z1 = mu[0] + l11 * g1;
                if z1 <= 0.0 {
                    return 0.0;
                }
                let base = mu[1] + l21 * g1;
                // E_{g2}[[base + l22 g2]_+] in closed form.
                z1 * relu_gauss_mean(base, l22)
            };
            let q = quadrature::integrate(|g| pdf(g) * inner(g), -12.0, 12.0, &[-mu[0] / l11], 16, 1e-13);
            let v = relu_gauss_cross(&b);
            assert!((v - q).abs() < 1e-9 * q.max(1.0), "{v} vs {q}");
        }
    }

    #[test]
    fn degenerate_cross_matches_limit() {
        let near = relu_cross_moment([0.3, -0.2], [1.0, 2.0 * (1.0 - 1e-10), 4.0]);
        let exact = relu_cross_moment([0.3, -0.2], [1.0, 2.0, 4.0]);
        assert!((near - exact).abs() < 1e-6);
        // z2 = z1 exactly: second moment.
        let same = relu_cross_moment([0.7, 0.7], [1.5, 1.5, 1.5]);
        assert!((same - relu_gauss_second(0.7, 1.5f64.sqrt())).abs() < 1e-13);
    }

    #[test]
    fn inverse_cdf_round_trips() {
        for p in [1e-12, 0.001, 0.3, 0.5, 0.9, 0.999999] {
            assert!((cdf(inverse_cdf(p)) / p - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn marginalized_loss_zero_noise() {
        let mut net = ShallowNet::init(2, 3, false, 0.0, 9);
        net.b_mut().iter_mut().for_each(|b| *b = 0.0);
        let prior = CleanDataset::new(vec![vec![1.0, 0.5], vec![-0.3, 2.0]]).unwrap();
        let l = marginalized_loss(&net, &prior, 0.0).unwrap();
        let direct: f64 = prior
            .points()
            .iter()
            .map(|x| dist_sq(&net.forward(x).unwrap(), x))
            .sum::<f64>()
            / 2.0;
        assert!((l - direct).abs() < 1e-12);
    }

    #[test]
    fn marginalized_loss_shape_checks() {
        let prior = CleanDataset::new(vec![vec![1.0, 0.5]]).unwrap();
        let skip = ShallowNet::init(2, 3, true, 0.0, 1);
        assert!(matches!(marginalized_loss(&skip, &prior, 0.1), Err(Error::ModelShapeUnsupported)));
        let biased = ShallowNet::init(2, 3, false, 1.0, 1);
        assert!(matches!(marginalized_loss(&biased, &prior, 0.1), Err(Error::ModelShapeUnsupported)));
    }

    #[test]
    fn mc_oracle_examples() {
        let one = CleanDataset::new(vec![vec![0.3]]).unwrap();
        let (m, se) = mc_oracle(&crate::Identity(1), &one, 0.0, 100, 1).unwrap();
        assert_eq!((m, se), (0.0, 0.0));
        let (m, se) = mc_oracle(&crate::Identity(1), &one, 2.0, 100_000, 1).unwrap();
        assert!((m - 4.0).abs() <= 4.0 * se, "{m} ± {se}");
        let constant = crate::FnDenoiser::new(1, |_: &[f64]| vec![0.3]);
        assert_eq!(mc_oracle(&constant, &one, 1.0, 10, 1).unwrap().0, 0.0);
    }

    #[test]
    fn stratified_estimates_are_accurate() {
        let (m, se) = mc_stratified(|z| z[0] * z[0], 1, 10_000, 3).unwrap();
        assert!((m - 1.0).abs() < 5.0 * se.max(1e-6));
        let (m, se) = mc_stratified(|z| z[0] * z[0] + z[1] * z[1], 2, 20_000, 3).unwrap();
        assert!((m - 2.0).abs() < 5.0 * se.max(1e-5));
    }
}
