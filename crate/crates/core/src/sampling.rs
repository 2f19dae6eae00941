//! Seeded sampling used by the spot checks and containment audits.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{MeasureAlgebra, Partition};
use crate::scalar::L0Scalar;
use crate::vector::L0Vector;

pub type AuditRng = ChaCha8Rng;

/// Sample count and seed for probabilistic spot checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self { samples: 1000, seed: 0 }
    }
}

impl AuditConfig {
    pub fn rng(&self) -> AuditRng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Coordinates drawn at a random log-scale so that samples exercise both
/// tiny and large magnitudes.
pub fn random_point(rng: &mut impl Rng, dim: usize, scale: f64) -> Vec<f64> {
    let s = scale * libm::exp(uniform(rng, -3.0, 1.5));
    (0..dim).map(|_| uniform(rng, -s, s)).collect()
}

pub fn random_vector(rng: &mut impl Rng, atoms: usize, dim: usize, scale: f64) -> L0Vector {
    L0Vector::from_fn(atoms, dim, |_| random_point(rng, dim, scale))
}

pub fn random_scalar(rng: &mut impl Rng, atoms: usize, lo: f64, hi: f64) -> L0Scalar {
    L0Scalar::from_fn(atoms, |_| uniform(rng, lo, hi))
}

/// A scalar constant on every block of `parts`.
pub fn random_measurable_scalar(rng: &mut impl Rng, parts: &Partition, lo: f64, hi: f64) -> L0Scalar {
    let levels: Vec<f64> = (0..parts.len()).map(|_| uniform(rng, lo, hi)).collect();
    L0Scalar::from_fn(parts.algebra().atom_count(), |a| levels[parts.block_of(a)])
}

/// A random partition with at most `max_blocks` blocks.
pub fn random_partition(rng: &mut impl Rng, algebra: &MeasureAlgebra, max_blocks: usize) -> Partition {
    let k = rng.random_range(1..=max_blocks.max(1));
    let labels: Vec<usize> = (0..algebra.atom_count()).map(|_| rng.random_range(0..k)).collect();
    Partition::from_labels(algebra, &labels)
}
