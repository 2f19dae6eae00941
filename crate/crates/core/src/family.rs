use alloc::vec::Vec;

use crate::algebra::{MeasureAlgebra, Partition};
use crate::error::{Error, Result};
use crate::scalar::StepNatural;

/// A stable finite family `(x_m)_{1 ≤ m ≤ n}`: on block `A_k` of a partition
/// it is the classical list `blocks[k]`.
///
/// Blocks may be empty (length zero), which is how a stable dimension of 0
/// is represented; [`StableFiniteFamily::length`] only returns a step natural
/// when every block is non-empty.
#[derive(Debug, Clone, PartialEq)]
pub struct StableFiniteFamily<T> {
    partition: Partition,
    blocks: Vec<Vec<T>>,
}

impl<T> StableFiniteFamily<T> {
    pub fn new(partition: Partition, blocks: Vec<Vec<T>>) -> Result<Self> {
        if blocks.len() != partition.len() {
            return Err(Error::ArityError { expected: partition.len(), found: blocks.len() });
        }
        Ok(Self { partition, blocks })
    }

    /// The same classical list on every atom.
    pub fn uniform(algebra: &MeasureAlgebra, items: Vec<T>) -> Self {
        Self { partition: algebra.trivial_partition(), blocks: alloc::vec![items] }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn blocks(&self) -> &[Vec<T>] {
        &self.blocks
    }

    pub fn block_len(&self, k: usize) -> usize {
        self.blocks[k].len()
    }

    /// `n(ω)`.
    pub fn len_at(&self, atom: usize) -> usize {
        self.blocks[self.partition.block_of(atom)].len()
    }

    /// The entries that are active on `atom`.
    pub fn entries_at(&self, atom: usize) -> &[T] {
        &self.blocks[self.partition.block_of(atom)]
    }

    pub fn length(&self) -> Option<StepNatural> {
        let n = self.partition.algebra().atom_count();
        let values = (0..n).map(|a| self.len_at(a) as u32).collect();
        StepNatural::new(values).ok()
    }

    /// Per-atom lengths, zero allowed.
    pub fn lengths(&self) -> Vec<usize> {
        (0..self.partition.algebra().atom_count()).map(|a| self.len_at(a)).collect()
    }

    pub fn same_shape<U>(&self, other: &StableFiniteFamily<U>) -> bool {
        let n = self.partition.algebra().atom_count();
        other.partition.algebra().atom_count() == n
            && (0..n).all(|a| self.len_at(a) == other.len_at(a))
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> StableFiniteFamily<U> {
        StableFiniteFamily {
            partition: self.partition.clone(),
            blocks: self.blocks.iter().map(|b| b.iter().map(&mut f).collect()).collect(),
        }
    }
}
