//! The ring `L⁰` of per-atom reals and the step naturals `L⁰_s(ℕ)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::algebra::{Event, MeasureAlgebra, Partition};
use crate::error::{Error, Result};

/// One finite real per atom.
///
/// Arithmetic operators panic when the operands have different atom counts;
/// that is a programming error, not a data error.
#[derive(Debug, Clone, PartialEq)]
pub struct L0Scalar {
    values: Vec<f64>,
}

impl L0Scalar {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("an L0 scalar needs at least one atom".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("value on atom {i} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn constant(atoms: usize, c: f64) -> Self {
        Self { values: vec![c; atoms] }
    }

    pub fn zero(atoms: usize) -> Self {
        Self::constant(atoms, 0.0)
    }

    pub fn from_fn(atoms: usize, f: impl FnMut(usize) -> f64) -> Self {
        Self { values: (0..atoms).map(f).collect() }
    }

    /// The indicator `1_A`.
    pub fn indicator(event: &Event) -> Self {
        let n = event.algebra().atom_count();
        Self::from_fn(n, |a| if event.contains(a) { 1.0 } else { 0.0 })
    }

    pub fn atoms(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, atom: usize) -> f64 {
        self.values[atom]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { values: self.values.iter().map(|v| f(*v)).collect() }
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.atoms(), other.atoms(), "L0 scalars over different atom counts");
        Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn max(&self, other: &Self) -> Self {
        self.zip(other, f64::max)
    }

    pub fn min(&self, other: &Self) -> Self {
        self.zip(other, f64::min)
    }

    /// The almost-everywhere order `self ≤ other`.
    pub fn le(&self, other: &Self) -> bool {
        self.atoms() == other.atoms() && self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    /// `self < other` on every atom.
    pub fn lt_everywhere(&self, other: &Self) -> bool {
        self.atoms() == other.atoms() && self.values.iter().zip(&other.values).all(|(a, b)| a < b)
    }

    /// Membership in `L⁰₊₊`.
    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|v| *v > 0.0)
    }

    /// Membership in `L⁰₊`.
    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| *v >= 0.0)
    }

    /// The event `{self > 0}`.
    pub fn positivity_event(&self, algebra: &MeasureAlgebra) -> Result<Event> {
        self.check_algebra(algebra)?;
        algebra.event((0..self.atoms()).filter(|a| self.values[*a] > 0.0))
    }

    /// The event `{self ≥ other}`.
    pub fn ge_event(&self, other: &Self, algebra: &MeasureAlgebra) -> Result<Event> {
        self.check_algebra(algebra)?;
        other.check_algebra(algebra)?;
        algebra.event((0..self.atoms()).filter(|a| self.values[*a] >= other.values[*a]))
    }

    pub(crate) fn check_algebra(&self, algebra: &MeasureAlgebra) -> Result<()> {
        if self.atoms() == algebra.atom_count() {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    /// The unique scalar equal to `xs[k]` on every atom of block `k`.
    pub fn concat(parts: &Partition, xs: &[L0Scalar]) -> Result<Self> {
        if xs.len() != parts.len() {
            return Err(Error::ArityError { expected: parts.len(), found: xs.len() });
        }
        let n = parts.algebra().atom_count();
        if xs.iter().any(|x| x.atoms() != n) {
            return Err(Error::AlgebraMismatch);
        }
        Ok(Self::from_fn(n, |a| xs[parts.block_of(a)].values[a]))
    }

    /// Essential supremum of a finite family: the per-atom maximum.
    pub fn ess_sup(xs: &[L0Scalar]) -> Result<Self> {
        Self::fold_nonempty(xs, f64::max)
    }

    pub fn ess_inf(xs: &[L0Scalar]) -> Result<Self> {
        Self::fold_nonempty(xs, f64::min)
    }

    fn fold_nonempty(xs: &[L0Scalar], f: fn(f64, f64) -> f64) -> Result<Self> {
        let (first, rest) = xs
            .split_first()
            .ok_or(Error::ArityError { expected: 1, found: 0 })?;
        if rest.iter().any(|x| x.atoms() != first.atoms()) {
            return Err(Error::AlgebraMismatch);
        }
        Ok(rest.iter().fold(first.clone(), |acc, x| acc.zip(x, f)))
    }

    /// `E[x | sub]`: on each block the probability-weighted mean.
    pub fn conditional_expectation(&self, sub: &Partition) -> Result<Self> {
        let alg = sub.algebra();
        self.check_algebra(alg)?;
        let means: Vec<f64> = sub
            .blocks()
            .iter()
            .map(|b| {
                let mass = b.prob();
                b.atoms().map(|a| alg.atom_prob(a) * self.values[a]).sum::<f64>() / mass
            })
            .collect();
        Ok(Self::from_fn(self.atoms(), |a| means[sub.block_of(a)]))
    }

    /// `E[x]` as a plain real.
    pub fn expectation(&self, algebra: &MeasureAlgebra) -> Result<f64> {
        self.check_algebra(algebra)?;
        Ok(self.values.iter().zip(algebra.probs()).map(|(v, p)| v * p).sum())
    }
}

impl Add for &L0Scalar {
    type Output = L0Scalar;
    fn add(self, rhs: &L0Scalar) -> L0Scalar {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &L0Scalar {
    type Output = L0Scalar;
    fn sub(self, rhs: &L0Scalar) -> L0Scalar {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for &L0Scalar {
    type Output = L0Scalar;
    fn mul(self, rhs: &L0Scalar) -> L0Scalar {
        self.zip(rhs, |a, b| a * b)
    }
}

impl Neg for &L0Scalar {
    type Output = L0Scalar;
    fn neg(self) -> L0Scalar {
        self.map(|v| -v)
    }
}

/// An extended real, used only by conjugation where `+∞` marks points
/// outside the effective domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        use core::cmp::Ordering;
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::PosInf, ExtReal::PosInf) => Some(Ordering::Equal),
            (ExtReal::PosInf, _) => Some(Ordering::Greater),
            (_, ExtReal::PosInf) => Some(Ordering::Less),
        }
    }
}

/// A per-atom natural number, every value at least 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepNatural {
    values: Vec<u32>,
}

impl StepNatural {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("a step natural needs at least one atom".into()));
        }
        if let Some(a) = values.iter().position(|v| *v == 0) {
            return Err(Error::InvalidInput(format!("step natural is 0 on atom {a}")));
        }
        Ok(Self { values })
    }

    pub fn constant(atoms: usize, n: u32) -> Result<Self> {
        Self::new(vec![n; atoms])
    }

    pub fn atoms(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn get(&self, atom: usize) -> u32 {
        self.values[atom]
    }

    pub fn max_value(&self) -> u32 {
        self.values.iter().copied().max().unwrap_or(1)
    }

    /// The decomposition `n = Σ 1_{A_k} n_k` with blocks of equal value.
    pub fn canonical_partition(&self, algebra: &MeasureAlgebra) -> Result<(Partition, Vec<u32>)> {
        if self.atoms() != algebra.atom_count() {
            return Err(Error::AlgebraMismatch);
        }
        let parts = Partition::from_labels(algebra, &self.values);
        let levels = parts
            .blocks()
            .iter()
            .map(|b| self.values[b.atoms().next().expect("blocks are non-empty")])
            .collect();
        Ok((parts, levels))
    }

    /// Evaluates a stable sequence `(x_n)` at this step natural: on each
    /// block of the canonical decomposition the classical term `x_{n_k}` is
    /// used, then the terms are concatenated.
    pub fn select<T>(
        &self,
        algebra: &MeasureAlgebra,
        mut term: impl FnMut(u32) -> T,
        concat: impl FnOnce(&Partition, Vec<T>) -> Result<T>,
    ) -> Result<T> {
        let (parts, levels) = self.canonical_partition(algebra)?;
        let terms = levels.into_iter().map(&mut term).collect();
        concat(&parts, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> L0Scalar {
        L0Scalar::new(v.to_vec()).unwrap()
    }

    #[test]
    fn concat_examples() {
        let alg = MeasureAlgebra::uniform(4).unwrap();
        let x = s(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(L0Scalar::concat(&alg.trivial_partition(), &[x.clone()]).unwrap(), x);
        let a = alg.event([1, 3]).unwrap();
        let p = Partition::new(&alg, vec![a.clone(), a.complement()]).unwrap();
        assert_eq!(L0Scalar::concat(&p, &[x.clone(), x.clone()]).unwrap(), x);
        let q = Partition::from_labels(&alg, &[0, 0, 1, 1]);
        let got = L0Scalar::concat(&q, &[L0Scalar::constant(4, 1.0), L0Scalar::constant(4, 5.0)])
            .unwrap();
        assert_eq!(got, s(&[1.0, 1.0, 5.0, 5.0]));
        assert_eq!(
            L0Scalar::concat(&q, &[x]),
            Err(Error::ArityError { expected: 2, found: 1 })
        );
    }

    #[test]
    fn ess_sup_examples() {
        let x = s(&[1.0, -2.0]);
        assert_eq!(L0Scalar::ess_sup(&[x.clone()]).unwrap(), x);
        assert_eq!(L0Scalar::ess_sup(&[x.clone(), -&x]).unwrap(), x.abs());
        assert_eq!(
            L0Scalar::ess_sup(&[s(&[1.0, 4.0]), s(&[3.0, 2.0])]).unwrap(),
            s(&[3.0, 4.0])
        );
        assert_eq!(
            L0Scalar::ess_inf(&[s(&[1.0, 4.0]), s(&[3.0, 2.0])]).unwrap(),
            s(&[1.0, 2.0])
        );
        assert!(L0Scalar::ess_sup(&[]).is_err());
    }

    #[test]
    fn positivity_examples() {
        assert!(L0Scalar::constant(3, 1.0).is_strictly_positive());
        assert!(!L0Scalar::zero(3).is_strictly_positive());
        assert!(!s(&[0.1, 0.0, 2.0]).is_strictly_positive());
    }

    #[test]
    fn conditional_expectation_examples() {
        let alg = MeasureAlgebra::uniform(2).unwrap();
        let x = s(&[1.0, 3.0]);
        assert_eq!(x.conditional_expectation(&alg.atom_partition()).unwrap(), x);
        assert_eq!(
            x.conditional_expectation(&alg.trivial_partition()).unwrap(),
            s(&[2.0, 2.0])
        );
        let c = L0Scalar::constant(2, 7.5);
        assert_eq!(c.conditional_expectation(&alg.trivial_partition()).unwrap(), c);
    }

    #[test]
    fn step_natural_decomposition() {
        let alg = MeasureAlgebra::uniform(4).unwrap();
        let n = StepNatural::new(vec![2, 1, 2, 3]).unwrap();
        let (parts, levels) = n.canonical_partition(&alg).unwrap();
        assert_eq!(levels, vec![2, 1, 3]);
        assert_eq!(parts, Partition::from_labels(&alg, &[0, 1, 0, 2]));
        let x = n
            .select(&alg, |k| L0Scalar::constant(4, k as f64 * 10.0), |p, xs| L0Scalar::concat(p, &xs))
            .unwrap();
        assert_eq!(x, s(&[20.0, 10.0, 20.0, 30.0]));
        assert!(StepNatural::new(vec![1, 0]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(L0Scalar::new(vec![1.0, f64::INFINITY]).is_err());
    }
}
