//! Empirical MMSE denoiser and its nearest-neighbour limit.

use crate::geometry::CleanDataset;
use crate::linalg::{axpy, dist_sq};
use crate::{Denoiser, Error, Result};

/// Posterior mean under the uniform prior on the clean points.
#[derive(Debug, Clone)]
pub struct EmmseDenoiser {
    clean: CleanDataset,
    sigma: f64,
}

impl EmmseDenoiser {
    pub fn new(clean: CleanDataset, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { clean, sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn clean(&self) -> &CleanDataset {
        &self.clean
    }

    /// `Σ x_n softmax_n(-‖y - x_n‖² / 2σ²)`, shifted by the smallest distance
    /// so the largest weight is exactly 1.
    pub fn emmse(&self, y: &[f64]) -> Vec<f64> {
        let d2: Vec<f64> = self.clean.points().iter().map(|x| dist_sq(y, x)).collect();
        let dmin = d2.iter().copied().fold(f64::INFINITY, f64::min);
        let inv = 1.0 / (2.0 * self.sigma * self.sigma);
        let mut out = vec![0.0; self.clean.dim()];
        let mut total = 0.0;
        for (x, d) in self.clean.points().iter().zip(&d2) {
            let w = (-(d - dmin) * inv).exp();
            total += w;
            axpy(w, x, &mut out);
        }
        out.iter_mut().for_each(|v| *v /= total);
        out
    }
}

impl Denoiser for EmmseDenoiser {
    fn dim(&self) -> usize {
        self.clean.dim()
    }

    fn denoise(&self, y: &[f64]) -> Vec<f64> {
        self.emmse(y)
    }

    /// Decision midpoints between consecutive sorted points, where the
    /// softmax switches fastest.
    fn breakpoints_1d(&self) -> Vec<f64> {
        if self.clean.dim() != 1 {
            return Vec::new();
        }
        let mut xs: Vec<f64> = self.clean.points().iter().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        xs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// Index of the nearest clean point; ties go to the lowest index.
pub fn nearest_index(ds: &CleanDataset, y: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (n, x) in ds.points().iter().enumerate() {
        let d = dist_sq(y, x);
        if d < best_d {
            best = n;
            best_d = d;
        }
    }
    best
}

/// The nearest clean point to `y`.
pub fn nn1(ds: &CleanDataset, y: &[f64]) -> Vec<f64> {
    ds.point(nearest_index(ds, y)).to_vec()
}

/// [`nn1`] as a [`Denoiser`].
#[derive(Debug, Clone)]
pub struct NearestNeighbor(pub CleanDataset);

impl Denoiser for NearestNeighbor {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn denoise(&self, y: &[f64]) -> Vec<f64> {
        nn1(&self.0, y)
    }

    fn breakpoints_1d(&self) -> Vec<f64> {
        EmmseDenoiser { clean: self.0.clone(), sigma: 1.0 }.breakpoints_1d()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;

    fn pair() -> CleanDataset {
        CleanDataset::from_scalars(&[0.0, 1.0]).unwrap()
    }

    #[test]
    fn emmse_examples() {
        for sigma in [0.01, 0.3, 10.0] {
            let e = EmmseDenoiser::new(pair(), sigma).unwrap();
            assert!((e.emmse(&[0.5])[0] - 0.5).abs() < 1e-15);
        }
        let e = EmmseDenoiser::new(pair(), 0.1).unwrap();
        // weights ∝ exp(-0.09/0.02), exp(-0.49/0.02): output = 1 / (1 + exp(20))
        let oracle = 1.0 / (1.0 + 20f64.exp());
        let got = e.emmse(&[0.3])[0];
        assert!((got / oracle - 1.0).abs() < 1e-12, "{got} vs {oracle}");
        assert!((got - 2.06e-9).abs() < 1e-11);
    }

    #[test]
    fn emmse_small_sigma_does_not_overflow() {
        let e = EmmseDenoiser::new(pair(), 1e-3).unwrap();
        let v = e.emmse(&[40.0])[0];
        assert_eq!(v, 1.0);
        assert!(EmmseDenoiser::new(pair(), 0.0).is_err());
    }

    #[test]
    fn emmse_far_field_is_the_mean() {
        let ds = CleanDataset::new(vec![vec![0.0, 1.0], vec![2.0, -1.0], vec![1.0, 3.0]]).unwrap();
        let e = EmmseDenoiser::new(ds, 1e6 * 3.0).unwrap();
        let v = e.emmse(&[0.7, -0.2]);
        assert!(dist(&v, &[1.0, 1.0]) < 1e-6);
    }

    #[test]
    fn nn1_examples() {
        assert_eq!(nn1(&pair(), &[0.5]), vec![0.0]);
        assert_eq!(nn1(&pair(), &[1.0]), vec![1.0]);
        assert_eq!(nn1(&pair(), &[0.51]), vec![1.0]);
    }
}
