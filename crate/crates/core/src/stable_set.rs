//! Stable subsets of `(L⁰)^d`, realized as compact-valued maps `ω ↦ K_ω`.
//!
//! Over a finite measure algebra a non-empty set of vectors is closed under
//! concatenation exactly when it is the product of its per-atom sections, so
//! a stable set is stored through those sections. The set of vectors itself
//! is recovered as the selectors of the map.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::algebra::Partition;
use crate::error::{Error, Result};
use crate::geometry::{self, dedup_points, point_key};
use crate::scalar::L0Scalar;
use crate::vector::L0Vector;

/// A per-atom compact set.
#[derive(Debug, Clone, PartialEq)]
pub enum CompactRep {
    /// A finite point set.
    Points(Vec<Vec<f64>>),
    /// The convex hull of a vertex list.
    Polytope(Vec<Vec<f64>>),
}

impl CompactRep {
    pub fn data(&self) -> &[Vec<f64>] {
        match self {
            CompactRep::Points(p) | CompactRep::Polytope(p) => p,
        }
    }

    pub fn len(&self) -> usize {
        self.data().len()
    }

    pub fn is_empty(&self) -> bool {
        self.data().is_empty()
    }

    pub fn is_polytope(&self) -> bool {
        matches!(self, CompactRep::Polytope(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StableSet {
    dim: usize,
    per_atom: Vec<CompactRep>,
}

impl StableSet {
    /// Validates and normalizes: every section is non-empty with finite
    /// coordinates of the right dimension; duplicates are removed.
    pub fn new(dim: usize, per_atom: Vec<CompactRep>) -> Result<Self> {
        if dim == 0 || per_atom.is_empty() {
            return Err(Error::InvalidInput("stable sets need dim ≥ 1 and at least one atom".into()));
        }
        let mut out = Vec::with_capacity(per_atom.len());
        for (a, rep) in per_atom.into_iter().enumerate() {
            if rep.is_empty() {
                return Err(Error::InvalidInput(format!("section on atom {a} is empty")));
            }
            if let Some(p) = rep.data().iter().find(|p| p.len() != dim || p.iter().any(|c| !c.is_finite())) {
                return Err(Error::InvalidInput(format!(
                    "section on atom {a} holds a malformed point {p:?}"
                )));
            }
            out.push(match rep {
                CompactRep::Points(p) => CompactRep::Points(dedup_points(p)),
                CompactRep::Polytope(p) => CompactRep::Polytope(dedup_points(p)),
            });
        }
        Ok(Self { dim, per_atom: out })
    }

    /// Wraps raw data without validation. Compactness checks accept such
    /// sets and report the offending atom instead of failing.
    pub fn new_unchecked(dim: usize, per_atom: Vec<CompactRep>) -> Self {
        Self { dim, per_atom }
    }

    pub fn points(dim: usize, per_atom: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        Self::new(dim, per_atom.into_iter().map(CompactRep::Points).collect())
    }

    pub fn polytope(dim: usize, per_atom: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        Self::new(dim, per_atom.into_iter().map(CompactRep::Polytope).collect())
    }

    /// The singleton `{x}`.
    pub fn singleton(x: &L0Vector) -> Self {
        Self {
            dim: x.dim(),
            per_atom: x.points().map(|p| CompactRep::Points(alloc::vec![p.to_vec()])).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> usize {
        self.per_atom.len()
    }

    pub fn section(&self, atom: usize) -> &CompactRep {
        &self.per_atom[atom]
    }

    pub fn sections(&self) -> &[CompactRep] {
        &self.per_atom
    }

    pub fn is_points(&self) -> bool {
        self.per_atom.iter().all(|r| !r.is_polytope())
    }

    /// Number of selectors, `∏_ω |K_ω|` (saturating).
    pub fn selector_count(&self) -> Result<u128> {
        self.require_points()?;
        Ok(self
            .per_atom
            .iter()
            .fold(1u128, |acc, r| acc.saturating_mul(r.len() as u128)))
    }

    fn require_points(&self) -> Result<()> {
        match self.per_atom.iter().position(|r| r.is_polytope()) {
            Some(atom) => Err(Error::NotEnumerable { atom }),
            None => Ok(()),
        }
    }

    /// Enumerates the measurable selectors, atom 0 varying fastest.
    pub fn selectors(&self) -> Result<Selectors<'_>> {
        self.require_points()?;
        Ok(Selectors {
            set: self,
            index: alloc::vec![0; self.atoms()],
            done: self.per_atom.iter().any(|r| r.is_empty()),
        })
    }

    /// The selector picking the `choice[ω]`-th point on each atom.
    pub fn selector(&self, choice: &[usize]) -> L0Vector {
        L0Vector::from_fn(self.atoms(), self.dim, |a| self.per_atom[a].data()[choice[a]].clone())
    }

    /// `Σ 1_{A_k} K_k`: section `ω` is taken from `ks[k]` for `ω ∈ A_k`.
    pub fn concat(parts: &Partition, ks: &[StableSet]) -> Result<Self> {
        if ks.len() != parts.len() {
            return Err(Error::ArityError { expected: parts.len(), found: ks.len() });
        }
        let n = parts.algebra().atom_count();
        let dim = ks[0].dim;
        if ks.iter().any(|k| k.atoms() != n || k.dim != dim) {
            return Err(Error::AlgebraMismatch);
        }
        Ok(Self {
            dim,
            per_atom: (0..n).map(|a| ks[parts.block_of(a)].per_atom[a].clone()).collect(),
        })
    }

    /// Per-atom bound `r(ω) = max_{x ∈ K_ω} ‖x‖`; fails on an empty or
    /// non-finite section.
    pub fn closed_bounded_radius(&self) -> Result<L0Scalar> {
        let mut radius = Vec::with_capacity(self.atoms());
        for (a, rep) in self.per_atom.iter().enumerate() {
            let bad = rep.is_empty()
                || rep.data().iter().any(|p| p.len() != self.dim || p.iter().any(|c| !c.is_finite()));
            if bad {
                return Err(Error::InvalidInput(format!("section on atom {a} is not compact data")));
            }
            radius.push(rep.data().iter().map(|p| geometry::norm(p)).fold(0.0, f64::max));
        }
        L0Scalar::new(radius)
    }

    /// Finite vertex data is always closed and bounded; only malformed raw
    /// data fails.
    pub fn is_closed_bounded(&self) -> bool {
        self.closed_bounded_radius().is_ok()
    }

    /// Converts every section to a polytope of its extreme points.
    pub fn to_polytope(&self) -> Result<Self> {
        if self.dim > geometry::MAX_POLYTOPE_DIM {
            return Err(Error::DimensionUnsupported { dim: self.dim });
        }
        Ok(Self {
            dim: self.dim,
            per_atom: self
                .per_atom
                .iter()
                .map(|r| CompactRep::Polytope(geometry::extreme_points(r.data())))
                .collect(),
        })
    }
}

/// Iterator over the selectors of a [`StableSet`] with point sections.
pub struct Selectors<'a> {
    set: &'a StableSet,
    index: Vec<usize>,
    done: bool,
}

impl Iterator for Selectors<'_> {
    type Item = L0Vector;

    fn next(&mut self) -> Option<L0Vector> {
        if self.done {
            return None;
        }
        let out = self.set.selector(&self.index);
        self.done = true;
        for (a, i) in self.index.iter_mut().enumerate() {
            *i += 1;
            if *i < self.set.per_atom[a].len() {
                self.done = false;
                break;
            }
            *i = 0;
        }
        Some(out)
    }
}

fn vector_key(x: &L0Vector) -> Vec<u64> {
    x.points().flat_map(point_key).collect()
}

fn shape_ok(s: &[L0Vector]) -> bool {
    match s.first() {
        Some(f) => s.iter().all(|x| x.dim() == f.dim() && x.atoms() == f.atoms()),
        None => false,
    }
}

/// Per-atom sections `S_ω = {x(ω) : x ∈ S}` in order of first appearance.
fn sections(s: &[L0Vector]) -> Vec<Vec<Vec<f64>>> {
    let atoms = s[0].atoms();
    (0..atoms)
        .map(|a| dedup_points(s.iter().map(|x| x.point(a).to_vec()).collect()))
        .collect()
}

/// Whether a finite set of vectors is closed under all concatenations.
///
/// `S ⊆ ∏_ω S_ω` always holds, so `S` is the full product exactly when its
/// number of distinct elements equals `∏_ω |S_ω|`.
pub fn is_stable(s: &[L0Vector]) -> bool {
    if !shape_ok(s) {
        return false;
    }
    let distinct: BTreeSet<Vec<u64>> = s.iter().map(vector_key).collect();
    let product = sections(s)
        .iter()
        .fold(1u128, |acc, sec| acc.saturating_mul(sec.len() as u128));
    distinct.len() as u128 == product
}

/// The smallest stable set containing `s`.
pub fn stable_hull(s: &[L0Vector]) -> Result<StableSet> {
    if !shape_ok(s) {
        return Err(Error::InvalidInput("stable hull of an empty or ragged list".into()));
    }
    StableSet::points(s[0].dim(), sections(s))
}

/// The compact-valued map whose selectors are exactly `s`.
pub fn extract_setvalued_map(s: &[L0Vector]) -> Result<StableSet> {
    if !is_stable(s) {
        return Err(Error::NotStable);
    }
    stable_hull(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MeasureAlgebra;
    use alloc::vec;

    fn v1(vals: &[f64]) -> L0Vector {
        L0Vector::new(1, &vals.iter().map(|v| vec![*v]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn selector_examples() {
        let single = StableSet::singleton(&v1(&[1.0, 2.0]));
        assert_eq!(single.selectors().unwrap().count(), 1);
        let k = StableSet::points(1, vec![vec![vec![0.0], vec![1.0]], vec![vec![5.0]]]).unwrap();
        let sels: Vec<_> = k.selectors().unwrap().collect();
        assert_eq!(sels, vec![v1(&[0.0, 5.0]), v1(&[1.0, 5.0])]);
        let k3 = StableSet::points(
            1,
            vec![
                vec![vec![0.0], vec![1.0]],
                vec![vec![0.0], vec![1.0], vec![2.0]],
                vec![vec![7.0]],
            ],
        )
        .unwrap();
        assert_eq!(k3.selectors().unwrap().count(), 6);
        assert_eq!(k3.selector_count().unwrap(), 6);
        let poly = StableSet::polytope(1, vec![vec![vec![0.0], vec![1.0]]]).unwrap();
        assert_eq!(poly.selectors().err(), Some(Error::NotEnumerable { atom: 0 }));
    }

    #[test]
    fn is_stable_examples() {
        assert!(is_stable(&[v1(&[3.0, 4.0])]));
        let diag = [v1(&[0.0, 0.0]), v1(&[1.0, 1.0])];
        assert!(!is_stable(&diag));
        let full = [v1(&[0.0, 0.0]), v1(&[0.0, 1.0]), v1(&[1.0, 0.0]), v1(&[1.0, 1.0])];
        assert!(is_stable(&full));
        assert!(!is_stable(&[]));
    }

    #[test]
    fn hull_and_extraction() {
        let x = v1(&[3.0, 4.0]);
        assert_eq!(stable_hull(&[x.clone()]).unwrap(), StableSet::singleton(&x));
        let diag = [v1(&[0.0, 0.0]), v1(&[1.0, 1.0])];
        let h = stable_hull(&diag).unwrap();
        assert_eq!(h.selectors().unwrap().count(), 4);
        assert_eq!(extract_setvalued_map(&diag), Err(Error::NotStable));
        let full = [v1(&[0.0, 0.0]), v1(&[0.0, 1.0]), v1(&[1.0, 0.0]), v1(&[1.0, 1.0])];
        let k = extract_setvalued_map(&full).unwrap();
        assert!(k.sections().iter().all(|r| r.len() == 2));
        let back: Vec<_> = k.selectors().unwrap().collect();
        assert!(is_stable(&back) && back.len() == 4);
    }

    #[test]
    fn concat_examples() {
        let alg = MeasureAlgebra::uniform(2).unwrap();
        let k1 = StableSet::points(1, vec![vec![vec![0.0], vec![1.0]], vec![vec![0.0]]]).unwrap();
        let k2 = StableSet::points(1, vec![vec![vec![9.0]], vec![vec![0.0], vec![1.0], vec![2.0]]])
            .unwrap();
        assert_eq!(StableSet::concat(&alg.trivial_partition(), &[k1.clone()]).unwrap(), k1);
        let a = alg.event([0]).unwrap();
        let p = Partition::new(&alg, vec![a.clone(), a.complement()]).unwrap();
        assert_eq!(StableSet::concat(&p, &[k1.clone(), k1.clone()]).unwrap(), k1);
        let glued = StableSet::concat(&p, &[k1.clone(), k2]).unwrap();
        assert_eq!(glued.section(0).len(), 2);
        assert_eq!(glued.section(1).len(), 3);
        assert!(StableSet::concat(&p, &[k1]).is_err());
    }

    #[test]
    fn radius_examples() {
        let zero = StableSet::singleton(&L0Vector::zeros(2, 1));
        assert_eq!(zero.closed_bounded_radius().unwrap().values(), &[0.0, 0.0]);
        let cube = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let k = StableSet::points(2, vec![cube.clone(), cube]).unwrap();
        let r = k.closed_bounded_radius().unwrap();
        assert!(r.values().iter().all(|v| *v == libm::sqrt(2.0)));
        let mixed = StableSet::points(1, vec![vec![vec![-3.0], vec![1.0]], vec![vec![0.5]]]).unwrap();
        assert_eq!(mixed.closed_bounded_radius().unwrap().values(), &[3.0, 0.5]);
        let raw = StableSet::new_unchecked(1, vec![CompactRep::Points(vec![])]);
        assert!(!raw.is_closed_bounded());
    }

    #[test]
    fn rejects_empty_sections() {
        assert!(StableSet::points(1, vec![vec![]]).is_err());
        let dup = StableSet::polytope(1, vec![vec![vec![1.0], vec![1.0], vec![2.0]]]).unwrap();
        assert_eq!(dup.section(0).len(), 2);
    }
}
