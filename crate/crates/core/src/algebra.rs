//! Finite atomic measure algebras.
//!
//! Every other object in the crate is parameterized by a [`MeasureAlgebra`]:
//! a finite list of atoms with strictly positive masses. Because no atom is
//! null, equality almost everywhere is literal per-atom equality.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-12;

/// A finite probability space whose atoms all carry positive mass.
///
/// Cloning is cheap; clones share the probability vector.
#[derive(Clone)]
pub struct MeasureAlgebra {
    probs: Arc<[f64]>,
}

impl MeasureAlgebra {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidAlgebra("at least one atom is required".into()));
        }
        if let Some(i) = probs.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidAlgebra(format!(
                "atom {i} has non-positive or non-finite mass {}",
                probs[i]
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidAlgebra(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probs: probs.into() })
    }

    pub fn uniform(atoms: usize) -> Result<Self> {
        if atoms == 0 {
            return Err(Error::InvalidAlgebra("at least one atom is required".into()));
        }
        // summation drift for huge atom counts is not a normalization error
        Ok(Self { probs: vec![1.0 / atoms as f64; atoms].into() })
    }

    /// Normalizes positive weights into probabilities.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidAlgebra("weights must have a positive finite sum".into()));
        }
        let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        // absorb the rounding residue into the heaviest atom
        let residue = 1.0 - probs.iter().sum::<f64>();
        if let Some((imax, _)) = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
        {
            probs[imax] += residue;
        }
        Self::new(probs)
    }

    pub fn atom_count(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn atom_prob(&self, atom: usize) -> f64 {
        self.probs[atom]
    }

    pub fn same_as(&self, other: &MeasureAlgebra) -> bool {
        Arc::ptr_eq(&self.probs, &other.probs) || self.probs[..] == other.probs[..]
    }

    pub fn empty_event(&self) -> Event {
        Event {
            algebra: self.clone(),
            bits: vec![0; words(self.atom_count())],
        }
    }

    pub fn full_event(&self) -> Event {
        self.empty_event().complement()
    }

    pub fn event<I: IntoIterator<Item = usize>>(&self, atoms: I) -> Result<Event> {
        let mut ev = self.empty_event();
        for a in atoms {
            if a >= self.atom_count() {
                return Err(Error::InvalidInput(format!(
                    "atom index {a} out of range for {} atoms",
                    self.atom_count()
                )));
            }
            ev.insert(a);
        }
        Ok(ev)
    }

    /// The partition `{full}`.
    pub fn trivial_partition(&self) -> Partition {
        Partition::from_labels(self, &vec![0usize; self.atom_count()])
    }

    /// The finest partition, one block per atom.
    pub fn atom_partition(&self) -> Partition {
        let labels: Vec<usize> = (0..self.atom_count()).collect();
        Partition::from_labels(self, &labels)
    }
}

impl PartialEq for MeasureAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for MeasureAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureAlgebra")
            .field("atoms", &self.atom_count())
            .finish()
    }
}

fn words(atoms: usize) -> usize {
    atoms.div_ceil(64)
}

/// An element of the measure algebra: a set of atoms.
#[derive(Clone)]
pub struct Event {
    algebra: MeasureAlgebra,
    bits: Vec<u64>,
}

impl Event {
    pub fn algebra(&self) -> &MeasureAlgebra {
        &self.algebra
    }

    pub fn contains(&self, atom: usize) -> bool {
        atom < self.algebra.atom_count() && self.bits[atom / 64] >> (atom % 64) & 1 == 1
    }

    pub(crate) fn insert(&mut self, atom: usize) {
        self.bits[atom / 64] |= 1 << (atom % 64);
    }

    fn check(&self, other: &Event) -> Result<()> {
        if self.algebra.same_as(&other.algebra) {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    fn zip_with(&self, other: &Event, op: impl Fn(u64, u64) -> u64) -> Result<Event> {
        self.check(other)?;
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| op(*a, *b))
            .collect();
        Ok(Event { algebra: self.algebra.clone(), bits })
    }

    pub fn meet(&self, other: &Event) -> Result<Event> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn join(&self, other: &Event) -> Result<Event> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &Event) -> Result<Event> {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> Event {
        let n = self.algebra.atom_count();
        let mut bits: Vec<u64> = self.bits.iter().map(|w| !w).collect();
        if !n.is_multiple_of(64) {
            let last = bits.len() - 1;
            bits[last] &= (1u64 << (n % 64)) - 1;
        }
        Event { algebra: self.algebra.clone(), bits }
    }

    /// `self ≤ other` in the Boolean order.
    pub fn leq(&self, other: &Event) -> Result<bool> {
        self.check(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0))
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|w| *w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.complement().is_empty()
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn atoms(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.algebra.atom_count()).filter(move |a| self.contains(*a))
    }

    /// Sum of atom masses over the event, accumulated in atom order.
    pub fn prob(&self) -> f64 {
        self.atoms().map(|a| self.algebra.atom_prob(a)).sum()
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.algebra.same_as(&other.algebra) && self.bits == other.bits
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.atoms()).finish()
    }
}

/// A partition of the full event into non-empty, pairwise disjoint blocks.
#[derive(Clone)]
pub struct Partition {
    algebra: MeasureAlgebra,
    blocks: Vec<Event>,
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(algebra: &MeasureAlgebra, blocks: Vec<Event>) -> Result<Self> {
        let n = algebra.atom_count();
        let mut block_of = vec![usize::MAX; n];
        for (k, b) in blocks.iter().enumerate() {
            if !b.algebra.same_as(algebra) {
                return Err(Error::AlgebraMismatch);
            }
            if b.is_empty() {
                return Err(Error::InvalidPartition(format!("block {k} is empty")));
            }
            for a in b.atoms() {
                if block_of[a] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "atom {a} lies in blocks {} and {k}",
                        block_of[a]
                    )));
                }
                block_of[a] = k;
            }
        }
        if let Some(a) = block_of.iter().position(|k| *k == usize::MAX) {
            return Err(Error::InvalidPartition(format!("atom {a} is not covered")));
        }
        Ok(Self { algebra: algebra.clone(), blocks, block_of })
    }

    /// Groups atoms by equal label; blocks are ordered by first appearance.
    pub fn from_labels<L: PartialEq>(algebra: &MeasureAlgebra, labels: &[L]) -> Self {
        assert_eq!(labels.len(), algebra.atom_count(), "one label per atom");
        let mut reps: Vec<&L> = Vec::new();
        let mut blocks: Vec<Event> = Vec::new();
        let mut block_of = Vec::with_capacity(labels.len());
        for (a, l) in labels.iter().enumerate() {
            let k = match reps.iter().position(|r| *r == l) {
                Some(k) => k,
                None => {
                    reps.push(l);
                    blocks.push(algebra.empty_event());
                    reps.len() - 1
                }
            };
            blocks[k].insert(a);
            block_of.push(k);
        }
        Self { algebra: algebra.clone(), blocks, block_of }
    }

    pub fn algebra(&self) -> &MeasureAlgebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[Event] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, atom: usize) -> usize {
        self.block_of[atom]
    }

    /// Whether every block of `self` lies inside a block of `coarse`.
    pub fn refines(&self, coarse: &Partition) -> bool {
        self.algebra.same_as(&coarse.algebra)
            && self.blocks.iter().all(|b| {
                let mut atoms = b.atoms();
                let first = atoms.next().map(|a| coarse.block_of(a));
                atoms.all(|a| Some(coarse.block_of(a)) == first)
            })
    }

    /// The coarsest partition refining every input.
    pub fn common_refinement(ps: &[Partition]) -> Result<Partition> {
        let first = ps
            .first()
            .ok_or_else(|| Error::InvalidInput("common_refinement of an empty list".into()))?;
        if ps.iter().any(|p| !p.algebra.same_as(&first.algebra)) {
            return Err(Error::AlgebraMismatch);
        }
        let labels: Vec<Vec<usize>> = (0..first.algebra.atom_count())
            .map(|a| ps.iter().map(|p| p.block_of(a)).collect())
            .collect();
        Ok(Partition::from_labels(&first.algebra, &labels))
    }

    /// The finest partition that every input refines.
    pub fn common_coarsening(ps: &[Partition]) -> Result<Partition> {
        let first = ps
            .first()
            .ok_or_else(|| Error::InvalidInput("common_coarsening of an empty list".into()))?;
        if ps.iter().any(|p| !p.algebra.same_as(&first.algebra)) {
            return Err(Error::AlgebraMismatch);
        }
        let n = first.algebra.atom_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut a: usize) -> usize {
            while parent[a] != a {
                parent[a] = parent[parent[a]];
                a = parent[a];
            }
            a
        }
        for p in ps {
            for b in &p.blocks {
                let mut atoms = b.atoms();
                if let Some(head) = atoms.next() {
                    for a in atoms {
                        let (ra, rh) = (root(&mut parent, a), root(&mut parent, head));
                        parent[ra] = rh;
                    }
                }
            }
        }
        let labels: Vec<usize> = (0..n).map(|a| root(&mut parent, a)).collect();
        Ok(Partition::from_labels(&first.algebra, &labels))
    }

    fn canonical_blocks(&self) -> Vec<usize> {
        // relabel blocks by their smallest atom
        let mut first_atom = vec![usize::MAX; self.blocks.len()];
        for (a, k) in self.block_of.iter().enumerate() {
            first_atom[*k] = first_atom[*k].min(a);
        }
        self.block_of.iter().map(|k| first_atom[*k]).collect()
    }
}

/// Partitions compare as unordered sets of blocks.
impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.algebra.same_as(&other.algebra) && self.canonical_blocks() == other.canonical_blocks()
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.blocks.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg4() -> MeasureAlgebra {
        MeasureAlgebra::uniform(4).unwrap()
    }

    #[test]
    fn meet_examples() {
        let alg = alg4();
        let a = alg.event([0, 2]).unwrap();
        assert_eq!(alg.full_event().meet(&a).unwrap(), a);
        assert!(a.meet(&a.complement()).unwrap().is_empty());
        let x = alg.event([0, 1, 2]).unwrap();
        let y = alg.event([1, 2, 3]).unwrap();
        assert_eq!(x.meet(&y).unwrap(), alg.event([1, 2]).unwrap());
    }

    #[test]
    fn mismatched_algebras() {
        let a = alg4().full_event();
        let b = MeasureAlgebra::uniform(3).unwrap().full_event();
        assert_eq!(a.meet(&b), Err(Error::AlgebraMismatch));
        let c = MeasureAlgebra::from_weights(&[1.0, 2.0, 3.0, 4.0]).unwrap().full_event();
        assert_eq!(a.join(&c), Err(Error::AlgebraMismatch));
    }

    #[test]
    fn prob_examples() {
        let alg = alg4();
        assert_eq!(alg.empty_event().prob(), 0.0);
        assert_eq!(alg.full_event().prob(), 1.0);
        assert_eq!(alg.event([0, 2]).unwrap().prob(), 0.5);
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(MeasureAlgebra::new(vec![0.5, 0.5, 0.0]).is_err());
        assert!(MeasureAlgebra::new(vec![0.5, 0.6]).is_err());
        assert!(MeasureAlgebra::new(vec![]).is_err());
        assert!(MeasureAlgebra::new(vec![0.5, f64::NAN]).is_err());
    }

    #[test]
    fn complement_masks_tail_bits() {
        let alg = MeasureAlgebra::uniform(70).unwrap();
        let full = alg.full_event();
        assert_eq!(full.count(), 70);
        assert!(full.complement().is_empty());
    }

    #[test]
    fn refinement_examples() {
        let alg = alg4();
        let p = Partition::from_labels(&alg, &[0, 0, 1, 1]);
        let q = Partition::from_labels(&alg, &[0, 1, 0, 1]);
        assert_eq!(Partition::common_refinement(&[p.clone()]).unwrap(), p);
        let refined =
            Partition::common_refinement(&[alg.trivial_partition(), p.clone()]).unwrap();
        assert_eq!(refined, p);
        assert_eq!(
            Partition::common_refinement(&[p.clone(), q.clone()]).unwrap(),
            alg.atom_partition()
        );
        assert_eq!(
            Partition::common_coarsening(&[p, q]).unwrap(),
            alg.trivial_partition()
        );
    }

    #[test]
    fn partition_validation() {
        let alg = alg4();
        let a = alg.event([0, 1]).unwrap();
        let b = alg.event([1, 2, 3]).unwrap();
        assert!(Partition::new(&alg, vec![a.clone(), b]).is_err());
        assert!(Partition::new(&alg, vec![a.clone()]).is_err());
        assert!(Partition::new(&alg, vec![a.clone(), alg.empty_event(), a.complement()]).is_err());
        let p = Partition::new(&alg, vec![a.complement(), a]).unwrap();
        assert_eq!(p, Partition::from_labels(&alg, &[1, 1, 0, 0]));
        assert!(p.len() <= alg.atom_count());
    }
}
