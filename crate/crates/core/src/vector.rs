use alloc::format;
use alloc::vec::Vec;

use crate::algebra::Partition;
use crate::error::{Error, Result};
use crate::scalar::L0Scalar;

/// An element of `(L⁰)^d`: one point of `ℝ^d` per atom, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct L0Vector {
    dim: usize,
    data: Vec<f64>,
}

impl L0Vector {
    pub fn new(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        if dim == 0 || points.is_empty() {
            return Err(Error::InvalidInput("vectors need dim ≥ 1 and at least one atom".into()));
        }
        let mut data = Vec::with_capacity(dim * points.len());
        for (a, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "point on atom {a} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(format!("point on atom {a} is not finite")));
            }
            data.extend_from_slice(p);
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(atoms: usize, dim: usize, mut f: impl FnMut(usize) -> Vec<f64>) -> Self {
        let mut data = Vec::with_capacity(atoms * dim);
        for a in 0..atoms {
            let p = f(a);
            assert_eq!(p.len(), dim);
            data.extend(p);
        }
        Self { dim, data }
    }

    pub fn constant(atoms: usize, point: &[f64]) -> Self {
        Self::from_fn(atoms, point.len(), |_| point.to_vec())
    }

    pub fn zeros(atoms: usize, dim: usize) -> Self {
        Self { dim, data: alloc::vec![0.0; atoms * dim] }
    }

    /// The constant canonical unit vector `e_m` (the indicator `1_{m=n}` basis).
    pub fn unit(atoms: usize, dim: usize, m: usize) -> Self {
        Self::from_fn(atoms, dim, |_| (0..dim).map(|i| if i == m { 1.0 } else { 0.0 }).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn point(&self, atom: usize) -> &[f64] {
        &self.data[atom * self.dim..(atom + 1) * self.dim]
    }

    pub fn point_mut(&mut self, atom: usize) -> &mut [f64] {
        &mut self.data[atom * self.dim..(atom + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Coordinate `i` as a scalar.
    pub fn coordinate(&self, i: usize) -> L0Scalar {
        L0Scalar::from_fn(self.atoms(), |a| self.point(a)[i])
    }

    pub fn concat(parts: &Partition, xs: &[L0Vector]) -> Result<Self> {
        if xs.len() != parts.len() {
            return Err(Error::ArityError { expected: parts.len(), found: xs.len() });
        }
        let n = parts.algebra().atom_count();
        let dim = xs[0].dim;
        if xs.iter().any(|x| x.atoms() != n || x.dim != dim) {
            return Err(Error::AlgebraMismatch);
        }
        Ok(Self::from_fn(n, dim, |a| xs[parts.block_of(a)].point(a).to_vec()))
    }

    fn assert_compatible(&self, other: &Self) {
        assert!(
            self.dim == other.dim && self.data.len() == other.data.len(),
            "L0 vectors of different shape"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    /// Multiplication by an `L⁰` scalar, atom by atom.
    pub fn scale(&self, r: &L0Scalar) -> Self {
        assert_eq!(r.atoms(), self.atoms());
        let mut out = self.clone();
        for a in 0..self.atoms() {
            let c = r.get(a);
            out.point_mut(a).iter_mut().for_each(|v| *v *= c);
        }
        out
    }

    pub fn dot(&self, other: &Self) -> L0Scalar {
        self.assert_compatible(other);
        L0Scalar::from_fn(self.atoms(), |a| crate::geometry::dot(self.point(a), other.point(a)))
    }

    /// Per-atom Euclidean norm.
    pub fn norm(&self) -> L0Scalar {
        L0Scalar::from_fn(self.atoms(), |a| crate::geometry::norm(self.point(a)))
    }
}
