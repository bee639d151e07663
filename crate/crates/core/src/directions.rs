//! Deterministic quasi-uniform direction sequences on the unit sphere.
//!
//! Points come from a Kronecker (generalized golden ratio) sequence in the
//! unit cube, shifted by a seed-derived offset, pushed through the inverse
//! normal CDF and normalized. Any prefix of the sequence is itself a
//! well-spread design, so a larger budget always contains the smaller one.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::seeding::{derive_seed, unit_from_seed};

fn kronecker_alphas(dim: usize) -> Vec<f64> {
    // phi_d is the unique positive root of x^(d+1) = x + 1
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    (1..=dim).map(|j| phi.powi(-(j as i32)).fract()).collect()
}

pub struct SphereSequence {
    dim: usize,
    alphas: Vec<f64>,
    offset: Vec<f64>,
    normal: Normal,
}

impl SphereSequence {
    /// Sequence on the sphere in R^dim (dim >= 2).
    pub fn new(dim: usize, seed: u64) -> Self {
        let offset = (0..dim)
            .map(|j| unit_from_seed(derive_seed(seed, "sphere-offset", j as u64)))
            .collect();
        Self {
            dim,
            alphas: kronecker_alphas(dim),
            offset,
            normal: Normal::new(0.0, 1.0).expect("standard normal"),
        }
    }

    pub fn point(&self, k: usize) -> Vec<f64> {
        if self.dim == 2 {
            let t = (self.offset[0] + k as f64 * self.alphas[0]).fract();
            let theta = std::f64::consts::TAU * t;
            return vec![theta.cos(), theta.sin()];
        }
        let mut v: Vec<f64> = (0..self.dim)
            .map(|j| {
                let u = (self.offset[j] + (k as f64 + 0.5) * self.alphas[j]).fract();
                self.normal.inverse_cdf(u.clamp(1e-12, 1.0 - 1e-12))
            })
            .collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        v.iter_mut().for_each(|c| *c /= norm);
        v
    }

    pub fn take(&self, count: usize) -> Vec<Vec<f64>> {
        (0..count).map(|k| self.point(k)).collect()
    }
}

/// Spherical Fibonacci lattice on S^2, used as a dense deterministic grid.
pub fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * k as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}
