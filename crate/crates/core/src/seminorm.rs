//! `L⁰`-seminorms and seminorm families with their stable closures.

use alloc::format;
use alloc::vec::Vec;

use crate::algebra::{MeasureAlgebra, Partition};
use crate::error::{Error, Result};
use crate::geometry;
use crate::module::Gauge;
use crate::sampling::{self, AuditConfig};
use crate::scalar::L0Scalar;
use crate::vector::L0Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    One,
    Two,
    Inf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Seminorm {
    /// `‖(w_i x_i)_i‖_q` per atom with non-negative per-atom weights.
    WeightedNorm { weights: L0Vector, exponent: Exponent },
    /// `|⟨x, y⟩|` per atom.
    Pairing(L0Vector),
    /// `E[‖x‖^p | sub]^{1/p}`.
    ConditionalLp { sub: Partition, p: f64 },
    /// Pointwise supremum of finitely many seminorms.
    SupHull(Vec<Seminorm>),
    /// `Σ 1_{A_k} p_k`.
    Concat(Partition, Vec<Seminorm>),
}

impl Seminorm {
    pub fn weighted_norm(weights: L0Vector, exponent: Exponent) -> Result<Self> {
        if weights.points().flatten().any(|w| *w < 0.0) {
            return Err(Error::InvalidInput("seminorm weights must be non-negative".into()));
        }
        Ok(Seminorm::WeightedNorm { weights, exponent })
    }

    /// The plain Euclidean norm.
    pub fn euclidean(atoms: usize, dim: usize) -> Self {
        Seminorm::WeightedNorm {
            weights: L0Vector::constant(atoms, &alloc::vec![1.0; dim]),
            exponent: Exponent::Two,
        }
    }

    pub fn conditional_lp(sub: Partition, p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidInput(format!("conditional L^p needs p in [1, ∞), got {p}")));
        }
        Ok(Seminorm::ConditionalLp { sub, p })
    }

    pub fn sup_hull(members: Vec<Seminorm>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidInput("sup hull of no seminorms".into()));
        }
        Ok(Seminorm::SupHull(members))
    }

    pub fn concat(parts: Partition, members: Vec<Seminorm>) -> Result<Self> {
        if members.len() != parts.len() {
            return Err(Error::ArityError { expected: parts.len(), found: members.len() });
        }
        Ok(Seminorm::Concat(parts, members))
    }

    /// Whether `p(x)(ω)` depends on `x(ω)` alone.
    pub fn is_local(&self) -> bool {
        match self {
            Seminorm::WeightedNorm { .. } | Seminorm::Pairing(_) => true,
            Seminorm::ConditionalLp { sub, .. } => sub.blocks().iter().all(|b| b.count() == 1),
            Seminorm::SupHull(ms) | Seminorm::Concat(_, ms) => ms.iter().all(Seminorm::is_local),
        }
    }

    /// Per-atom evaluation, available for local seminorms.
    pub fn eval_point(&self, atom: usize, x: &[f64]) -> Option<f64> {
        match self {
            Seminorm::WeightedNorm { weights, exponent } => {
                let w = weights.point(atom);
                let scaled = w.iter().zip(x).map(|(wi, xi)| (wi * xi).abs());
                Some(match exponent {
                    Exponent::One => scaled.sum(),
                    Exponent::Two => libm::sqrt(scaled.map(|v| v * v).sum()),
                    Exponent::Inf => scaled.fold(0.0, f64::max),
                })
            }
            Seminorm::Pairing(y) => Some(geometry::dot(x, y.point(atom)).abs()),
            Seminorm::ConditionalLp { .. } => self.is_local().then(|| geometry::norm(x)),
            Seminorm::SupHull(ms) => ms
                .iter()
                .map(|m| m.eval_point(atom, x))
                .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v))),
            Seminorm::Concat(parts, ms) => ms[parts.block_of(atom)].eval_point(atom, x),
        }
    }

    pub fn eval(&self, x: &L0Vector) -> Result<L0Scalar> {
        let atoms = x.atoms();
        match self {
            Seminorm::WeightedNorm { weights, .. } => {
                if weights.atoms() != atoms || weights.dim() != x.dim() {
                    return Err(Error::AlgebraMismatch);
                }
            }
            Seminorm::Pairing(y) => {
                if y.atoms() != atoms || y.dim() != x.dim() {
                    return Err(Error::AlgebraMismatch);
                }
            }
            Seminorm::ConditionalLp { sub, p } => {
                if sub.algebra().atom_count() != atoms {
                    return Err(Error::AlgebraMismatch);
                }
                let powered = x.norm().map(|v| libm::pow(v, *p));
                return Ok(powered.conditional_expectation(sub)?.map(|v| libm::pow(v, 1.0 / p)));
            }
            Seminorm::SupHull(ms) => {
                let values = ms.iter().map(|m| m.eval(x)).collect::<Result<Vec<_>>>()?;
                return L0Scalar::ess_sup(&values);
            }
            Seminorm::Concat(parts, ms) => {
                let values = ms.iter().map(|m| m.eval(x)).collect::<Result<Vec<_>>>()?;
                return L0Scalar::concat(parts, &values);
            }
        }
        Ok(L0Scalar::from_fn(atoms, |a| self.eval_point(a, x.point(a)).expect("local kind")))
    }

    /// Partition with respect to which scalars must be measurable for
    /// `p(rx) = |r| p(x)`; `None` when any scalar works.
    pub fn homogeneity_partition(&self) -> Option<Partition> {
        match self {
            Seminorm::WeightedNorm { .. } | Seminorm::Pairing(_) => None,
            Seminorm::ConditionalLp { sub, .. } => Some(sub.clone()),
            Seminorm::SupHull(ms) | Seminorm::Concat(_, ms) => {
                let parts: Vec<Partition> = ms.iter().filter_map(Seminorm::homogeneity_partition).collect();
                if parts.is_empty() {
                    None
                } else {
                    Partition::common_coarsening(&parts).ok()
                }
            }
        }
    }

    /// Randomized check of non-negativity, absolute homogeneity and
    /// subadditivity.
    pub fn spot_check(&self, algebra: &MeasureAlgebra, dim: usize, cfg: &AuditConfig) -> Result<()> {
        let mut rng = cfg.rng();
        let atoms = algebra.atom_count();
        let measurable = self.homogeneity_partition().unwrap_or_else(|| algebra.atom_partition());
        for _ in 0..cfg.samples {
            let x = sampling::random_vector(&mut rng, atoms, dim, 10.0);
            let y = sampling::random_vector(&mut rng, atoms, dim, 10.0);
            let r = sampling::random_measurable_scalar(&mut rng, &measurable, -5.0, 5.0);
            let px = self.eval(&x)?;
            let py = self.eval(&y)?;
            let prx = self.eval(&x.scale(&r))?;
            let pxy = self.eval(&x.add(&y))?;
            for a in 0..atoms {
                let slack = 1e-9 * (1.0 + px.get(a) + py.get(a));
                if px.get(a) < 0.0 {
                    return Err(Error::InvalidInput(format!("seminorm negative on atom {a}")));
                }
                if (prx.get(a) - r.get(a).abs() * px.get(a)).abs() > slack * (1.0 + r.get(a).abs()) {
                    return Err(Error::InvalidInput(format!("homogeneity fails on atom {a}")));
                }
                if pxy.get(a) > px.get(a) + py.get(a) + slack {
                    return Err(Error::InvalidInput(format!("subadditivity fails on atom {a}")));
                }
            }
        }
        Ok(())
    }

    /// A per-atom gauge view, for local seminorms only.
    pub fn gauge(&self) -> Result<LocalGauge<'_>> {
        if self.is_local() {
            Ok(LocalGauge(self))
        } else {
            Err(Error::NonLocal)
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LocalGauge<'a>(&'a Seminorm);

impl Gauge for LocalGauge<'_> {
    fn eval_at(&self, atom: usize, x: &[f64]) -> f64 {
        self.0.eval_point(atom, x).expect("checked local")
    }
}

/// `sup_{p ∈ members} p(x)`, per atom.
pub fn sup_eval(members: &[Seminorm], x: &L0Vector) -> Result<L0Scalar> {
    let values = members.iter().map(|m| m.eval(x)).collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Ok(L0Scalar::zero(x.atoms()));
    }
    L0Scalar::ess_sup(&values)
}

/// A finite family `𝒫` of seminorms.
#[derive(Debug, Clone, PartialEq)]
pub struct SeminormFamily {
    members: Vec<Seminorm>,
    separated: bool,
}

impl SeminormFamily {
    pub fn new(members: Vec<Seminorm>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidInput("empty seminorm family".into()));
        }
        Ok(Self { members, separated: false })
    }

    /// Flags the family as separated after a spot check: every sampled
    /// `x` that is non-zero on an atom has some member positive there.
    pub fn separated(
        members: Vec<Seminorm>,
        algebra: &MeasureAlgebra,
        dim: usize,
        cfg: &AuditConfig,
    ) -> Result<Self> {
        let fam = Self { members, separated: true };
        let atoms = algebra.atom_count();
        let mut rng = cfg.rng();
        let probes = (0..dim)
            .map(|i| L0Vector::unit(atoms, dim, i))
            .chain((0..cfg.samples).map(|_| sampling::random_vector(&mut rng, atoms, dim, 1.0)));
        for x in probes {
            let s = fam.sup(&x)?;
            if let Some(a) = (0..atoms).find(|a| s.get(*a) <= 0.0 && geometry::norm(x.point(*a)) > 0.0) {
                return Err(Error::InvalidInput(format!("family is not separated on atom {a}")));
            }
        }
        Ok(fam)
    }

    pub fn members(&self) -> &[Seminorm] {
        &self.members
    }

    pub fn is_separated(&self) -> bool {
        self.separated
    }

    pub fn sup(&self, x: &L0Vector) -> Result<L0Scalar> {
        sup_eval(&self.members, x)
    }

    fn pick(&self, idx: &[usize]) -> Result<Vec<Seminorm>> {
        idx.iter()
            .map(|i| {
                self.members
                    .get(*i)
                    .cloned()
                    .ok_or_else(|| Error::InvalidInput(format!("no family member {i}")))
            })
            .collect()
    }

    /// An element of `st(𝒫)`: member `indices[k]` on block `k`.
    pub fn stable_member(&self, parts: &Partition, indices: &[usize]) -> Result<Seminorm> {
        Seminorm::concat(parts.clone(), self.pick(indices)?)
    }

    /// An element of `st-sup(𝒫)`: `Σ 1_{A_k} sup_{p ∈ S_k} p`.
    pub fn stable_sup_member(&self, parts: &Partition, groups: &[Vec<usize>]) -> Result<Seminorm> {
        let pieces = groups
            .iter()
            .map(|g| self.pick(g).and_then(Seminorm::sup_hull))
            .collect::<Result<Vec<_>>>()?;
        Seminorm::concat(parts.clone(), pieces)
    }
}
