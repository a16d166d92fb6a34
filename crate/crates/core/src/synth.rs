//! Seeded synthetic data for tests, examples and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::error::Result;

/// Isotropic Gaussian components with centers drawn uniformly from a cube.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    d: usize,
    sigma: f32,
    centers: Vec<f32>,
}

impl GaussianMixture {
    /// `components` centers uniform in `[-center_scale, center_scale]^d`.
    pub fn new(components: usize, d: usize, center_scale: f32, sigma: f32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = (0..components * d).map(|_| rng.random_range(-center_scale..=center_scale)).collect();
        GaussianMixture { d, sigma, centers }
    }

    pub fn components(&self) -> usize {
        self.centers.len() / self.d
    }

    pub fn center(&self, c: usize) -> &[f32] {
        &self.centers[c * self.d..(c + 1) * self.d]
    }

    /// `n` samples with balanced class sizes (round-robin, then shuffled);
    /// the component id is attached as the class.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut classes: Vec<usize> = (0..n).map(|i| i % self.components()).collect();
        classes.shuffle(&mut rng);
        let noise = Normal::new(0.0f32, self.sigma).expect("sigma must be finite and non-negative");
        let mut rows = Vec::with_capacity(n * self.d);
        for &c in &classes {
            rows.extend(self.center(c).iter().map(|&m| m + noise.sample(&mut rng)));
        }
        Dataset::new(rows, self.d)?.with_classes(classes)
    }
}

/// Shorthand: a fresh mixture sampled once, all randomness from `seed`.
pub fn gaussian_mixture(n: usize, d: usize, components: usize, center_scale: f32, sigma: f32, seed: u64) -> Result<Dataset> {
    GaussianMixture::new(components, d, center_scale, sigma, seed).sample(n, seed ^ 0x5eed)
}

/// Balanced blobs at the `2^dims` corners of a cube with side `side`
/// spanning the first `dims` coordinates; sample `i` belongs to corner
/// `i mod 2^dims` (attached as its class). Even splits exist at every level,
/// so bisecting it halves each cluster.
pub fn hypercube_mixture(n: usize, d: usize, dims: usize, side: f32, sigma: f32, seed: u64) -> Result<Dataset> {
    assert!(dims <= d && dims < usize::BITS as usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0f32, sigma).expect("sigma must be finite and non-negative");
    let corners = 1usize << dims;
    let mut rows = Vec::with_capacity(n * d);
    for i in 0..n {
        let c = i % corners;
        rows.extend((0..d).map(|j| {
            let base = if j < dims && (c >> j) & 1 == 1 { side } else { 0.0 };
            base + noise.sample(&mut rng)
        }));
    }
    Dataset::new(rows, d)?.with_classes((0..n).map(|i| i % corners).collect())
}

/// Uniform samples in `[lo, hi)^d`.
pub fn uniform(n: usize, d: usize, lo: f32, hi: f32, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Dataset::new((0..n * d).map(|_| rng.random_range(lo..hi)).collect(), d)
}
