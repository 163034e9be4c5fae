//! Minimum-representation-cost shallow ReLU denoisers.
//!
//! The crate is organized around the objects a denoising experiment needs:
//!
//! - [`geometry`]: clean/noisy datasets and the geometric predicates that
//!   decide which closed form applies (well-separation, simplex type, rays,
//!   subspaces, weighted geometric medians).
//! - [`closed_form`]: exact min-cost interpolating denoisers (univariate,
//!   co-linear, rays, perturbed rays, obtuse and acute simplexes) and their
//!   representation cost.
//! - [`baselines`]: the empirical MMSE denoiser and its 1-NN limit.
//! - [`network`]: the one-hidden-layer ReLU model with skip connection,
//!   analytic gradients, weight-decay penalty and unit extraction.
//! - [`training`]: online and offline training with deterministic,
//!   counter-based noise streams.
//! - [`gaussian_moments`]: ReLU moments under (bivariate) Gaussians and the
//!   exact marginalized loss.
//! - [`analysis`]: MSE against a prior, contractivity, subspace and
//!   alignment checks.
//! - [`synth`]: seeded generators of random instances for each geometry.
//! - [`experiment`]: declarative experiment specs, the builtin experiments
//!   and the property suite driven by the `denoise` binary.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod analysis;
pub mod baselines;
pub mod closed_form;
pub mod error;
pub mod experiment;
pub mod gaussian_moments;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod network;
pub mod normal;
pub mod quadrature;
pub mod rng;
pub mod svg;
pub mod synth;
pub mod training;

pub use error::{Error, Result};

/// A denoiser that can be evaluated at a point.
pub trait Denoiser: Sync {
    /// Input/output dimension.
    fn dim(&self) -> usize;

    /// Evaluate at `y`. Callers guarantee `y.len() == self.dim()`.
    fn denoise(&self, y: &[f64]) -> Vec<f64>;

    /// Points where a univariate denoiser is not smooth (kinks or sharp
    /// transitions). Quadrature splits its panels there.
    fn breakpoints_1d(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Wraps a closure as a [`Denoiser`].
pub struct FnDenoiser<F> {
    dim: usize,
    f: F,
}

impl<F> FnDenoiser<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Denoiser for FnDenoiser<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn denoise(&self, y: &[f64]) -> Vec<f64> {
        (self.f)(y)
    }
}

impl<D: Denoiser + ?Sized> Denoiser for &D {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn denoise(&self, y: &[f64]) -> Vec<f64> {
        (**self).denoise(y)
    }

    fn breakpoints_1d(&self) -> Vec<f64> {
        (**self).breakpoints_1d()
    }
}

/// The identity map on `R^d`.
pub struct Identity(pub usize);

impl Denoiser for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn denoise(&self, y: &[f64]) -> Vec<f64> {
        y.to_vec()
    }
}
