//! The three module topologies as membership predicates, together with the
//! constructive inclusion witnesses between them.
//!
//! * ε,λ-neighborhoods: `ℙ(sup_{p∈N} p(x − y) < ε) > 1 − λ`
//! * `L⁰`-balls: `sup_{p∈N} p(x − y) < r` on every atom
//! * stable balls: as `L⁰`-balls, with a stable finite family of seminorms
//!
//! Membership is evaluated exactly, with the strict inequalities as written.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::algebra::{MeasureAlgebra, Partition};
use crate::error::{Error, Result};
use crate::family::StableFiniteFamily;
use crate::sampling::{self, AuditConfig};
use crate::scalar::L0Scalar;
use crate::seminorm::{sup_eval, Seminorm};
use crate::stable_set::StableSet;
use crate::vector::L0Vector;

#[derive(Debug, Clone, PartialEq)]
pub enum NeighborhoodKind {
    EpsLambda { members: Vec<Seminorm>, eps: f64, lam: f64 },
    L0Ball { members: Vec<Seminorm>, radius: L0Scalar },
    StableBall { family: StableFiniteFamily<Seminorm>, radius: L0Scalar },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    center: L0Vector,
    kind: NeighborhoodKind,
}

fn check_radius(radius: &L0Scalar) -> Result<()> {
    match radius.values().iter().position(|r| *r <= 0.0) {
        Some(atom) => Err(Error::RadiusNotStrictlyPositive { atom }),
        None => Ok(()),
    }
}

impl Neighborhood {
    pub fn eps_lambda(center: L0Vector, members: Vec<Seminorm>, eps: f64, lam: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) || !(lam > 0.0 && lam < 1.0) {
            return Err(Error::InvalidInput(format!(
                "need ε > 0 and 0 < λ < 1, got ε = {eps}, λ = {lam}"
            )));
        }
        Ok(Self { center, kind: NeighborhoodKind::EpsLambda { members, eps, lam } })
    }

    pub fn l0_ball(center: L0Vector, members: Vec<Seminorm>, radius: L0Scalar) -> Result<Self> {
        check_radius(&radius)?;
        if radius.atoms() != center.atoms() {
            return Err(Error::AlgebraMismatch);
        }
        Ok(Self { center, kind: NeighborhoodKind::L0Ball { members, radius } })
    }

    pub fn stable_ball(
        center: L0Vector,
        family: StableFiniteFamily<Seminorm>,
        radius: L0Scalar,
    ) -> Result<Self> {
        check_radius(&radius)?;
        if radius.atoms() != center.atoms() || family.partition().algebra().atom_count() != center.atoms() {
            return Err(Error::AlgebraMismatch);
        }
        Ok(Self { center, kind: NeighborhoodKind::StableBall { family, radius } })
    }

    pub fn center(&self) -> &L0Vector {
        &self.center
    }

    pub fn kind(&self) -> &NeighborhoodKind {
        &self.kind
    }

    fn members_at(&self, atom: usize) -> &[Seminorm] {
        match &self.kind {
            NeighborhoodKind::EpsLambda { members, .. } | NeighborhoodKind::L0Ball { members, .. } => members,
            NeighborhoodKind::StableBall { family, .. } => family.entries_at(atom),
        }
    }

    fn is_local(&self) -> bool {
        match &self.kind {
            NeighborhoodKind::EpsLambda { members, .. } | NeighborhoodKind::L0Ball { members, .. } => {
                members.iter().all(Seminorm::is_local)
            }
            NeighborhoodKind::StableBall { family, .. } => family.blocks().iter().flatten().all(Seminorm::is_local),
        }
    }

    /// `sup_p p(y − center)` per atom, as used by the defining inequality.
    fn gauge_of(&self, y: &L0Vector) -> Result<Vec<f64>> {
        let d = y.sub(&self.center);
        let atoms = d.atoms();
        if self.is_local() {
            return Ok((0..atoms)
                .map(|a| {
                    self.members_at(a)
                        .iter()
                        .map(|m| m.eval_point(a, d.point(a)).expect("local"))
                        .fold(0.0, f64::max)
                })
                .collect());
        }
        let mut values = alloc::vec![0.0; atoms];
        match &self.kind {
            NeighborhoodKind::EpsLambda { members, .. } | NeighborhoodKind::L0Ball { members, .. } => {
                values.copy_from_slice(sup_eval(members, &d)?.values());
            }
            NeighborhoodKind::StableBall { family, .. } => {
                for (k, block) in family.blocks().iter().enumerate() {
                    for p in block {
                        let v = p.eval(&d)?;
                        for a in family.partition().blocks()[k].atoms() {
                            values[a] = f64::max(values[a], v.get(a));
                        }
                    }
                }
            }
        }
        Ok(values)
    }

    pub fn contains(&self, algebra: &MeasureAlgebra, y: &L0Vector) -> Result<bool> {
        if y.atoms() != algebra.atom_count() || y.atoms() != self.center.atoms() || y.dim() != self.center.dim() {
            return Err(Error::AlgebraMismatch);
        }
        let s = self.gauge_of(y)?;
        Ok(match &self.kind {
            NeighborhoodKind::EpsLambda { eps, lam, .. } => {
                let probs = algebra.probs();
                let inside: f64 = (0..s.len()).filter(|a| s[*a] < *eps).map(|a| probs[a]).sum();
                inside > 1.0 - lam
            }
            NeighborhoodKind::L0Ball { radius, .. } | NeighborhoodKind::StableBall { radius, .. } => {
                s.iter().zip(radius.values()).all(|(v, r)| v < r)
            }
        })
    }

    /// The `L⁰`-ball `{sup_N p(x − y) < ε}` inside an ε,λ-neighborhood.
    pub fn inner_l0_ball(&self) -> Result<Neighborhood> {
        match &self.kind {
            NeighborhoodKind::EpsLambda { members, eps, .. } => Neighborhood::l0_ball(
                self.center.clone(),
                members.clone(),
                L0Scalar::constant(self.center.atoms(), *eps),
            ),
            _ => Err(Error::InvalidInput("inner_l0_ball needs an ε,λ-neighborhood".into())),
        }
    }

    /// A stable ball inside an `L⁰`-ball: on every block the family holds
    /// `N` plus the block's extra members.
    pub fn inner_stable_ball(&self, extra: &StableFiniteFamily<Seminorm>) -> Result<Neighborhood> {
        match &self.kind {
            NeighborhoodKind::L0Ball { members, radius } => {
                let blocks = extra
                    .blocks()
                    .iter()
                    .map(|b| members.iter().chain(b).cloned().collect())
                    .collect();
                let family = StableFiniteFamily::new(extra.partition().clone(), blocks)?;
                Neighborhood::stable_ball(self.center.clone(), family, radius.clone())
            }
            _ => Err(Error::InvalidInput("inner_stable_ball needs an L0-ball".into())),
        }
    }
}

/// Output of [`epslambda_witness`]: the neighborhood
/// `{ℙ(sup_{p∈N} p < ε') > 1 − λ'}` lies inside the target one.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsLambdaWitness {
    pub members: Vec<Seminorm>,
    pub eps: f64,
    pub lam: f64,
    /// Number of leading blocks used.
    pub m: usize,
}

/// Minimal `m ≥ 1` with `ℙ(∪_{k>m} A_k) < λ/2`, for blocks in the given order.
fn tail_cutoff(block_probs: &[f64], lam: f64) -> usize {
    (1..=block_probs.len())
        .find(|m| block_probs[*m..].iter().sum::<f64>() < lam / 2.0)
        .unwrap_or(block_probs.len())
}

fn check_eps_lam(eps: f64, lam: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) || !(lam > 0.0 && lam < 1.0) {
        return Err(Error::InvalidInput(format!("need ε > 0 and 0 < λ < 1, got {eps}, {lam}")));
    }
    Ok(())
}

/// Given `q = Σ 1_{A_k} sup_{p∈S_k} p` from `st-sup(𝒫)`, returns finitely many
/// members of `𝒫` whose ε,λ-neighborhood (with `λ/2`) sits inside that of `q`.
pub fn epslambda_witness(q: &Seminorm, eps: f64, lam: f64) -> Result<EpsLambdaWitness> {
    check_eps_lam(eps, lam)?;
    let pieces: Vec<(f64, Vec<Seminorm>)> = match q {
        Seminorm::Concat(parts, ms) => parts
            .blocks()
            .iter()
            .zip(ms)
            .map(|(b, m)| (b.prob(), sup_pieces(m)))
            .collect(),
        other => alloc::vec![(1.0, sup_pieces(other))],
    };
    let probs: Vec<f64> = pieces.iter().map(|p| p.0).collect();
    let m = tail_cutoff(&probs, lam);
    let members = pieces.into_iter().take(m).flat_map(|p| p.1).collect();
    Ok(EpsLambdaWitness { members, eps, lam: lam / 2.0, m })
}

fn sup_pieces(p: &Seminorm) -> Vec<Seminorm> {
    match p {
        Seminorm::SupHull(ms) => ms.clone(),
        other => alloc::vec![other.clone()],
    }
}

/// Maps an `L⁰`-ball over one family to a smaller `L⁰`-ball over another:
/// `{sup_{N'} p < s} ⊆ {sup_N p < r}`.
pub trait BallTranslator {
    fn translate(&self, members: &[Seminorm], radius: &L0Scalar) -> (Vec<Seminorm>, L0Scalar);
}

/// The translator for `𝒫₁ = 𝒫₂`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTranslator;

impl BallTranslator for IdentityTranslator {
    fn translate(&self, members: &[Seminorm], radius: &L0Scalar) -> (Vec<Seminorm>, L0Scalar) {
        (members.to_vec(), radius.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementWitness {
    pub members: Vec<Seminorm>,
    pub eps: f64,
    pub lam: f64,
    pub m: usize,
    /// Blocks `(A_k)` of the translated radius, ordered by decreasing `ε_k`.
    pub blocks: Partition,
    pub block_eps: Vec<f64>,
}

/// Samples a vector whose per-atom magnitudes straddle `eps`.
pub(crate) fn straddling_vector(rng: &mut impl Rng, atoms: usize, dim: usize, eps: f64) -> L0Vector {
    L0Vector::from_fn(atoms, dim, |_| {
        let s = eps * libm::pow(10.0, sampling::uniform(rng, -2.0, 1.0));
        (0..dim).map(|_| sampling::uniform(rng, -s, s)).collect()
    })
}

/// Turns a translator witnessing `𝒯₀(𝒫₁) ⊆ 𝒯₀(𝒫₂)` on the ball `{sup_N p < ε}`
/// into an ε,λ-neighborhood over `𝒫₂` inside the ε,λ-neighborhood over `𝒫₁`.
///
/// The translated radius `s` is split into its level sets `A_k` with values
/// `ε_k`; blocks are taken in decreasing `ε_k` until the tail mass drops
/// below `λ/2`, and the witness radius is `min_{k≤m} ε_k`.
pub fn topology_refinement_witness(
    algebra: &MeasureAlgebra,
    n1: &[Seminorm],
    eps: f64,
    lam: f64,
    translator: &dyn BallTranslator,
    dim: usize,
    cfg: &AuditConfig,
) -> Result<RefinementWitness> {
    check_eps_lam(eps, lam)?;
    let atoms = algebra.atom_count();
    let (n2, s) = translator.translate(n1, &L0Scalar::constant(atoms, eps));
    check_radius(&s)?;
    if s.atoms() != atoms {
        return Err(Error::AlgebraMismatch);
    }

    // audit the translator's containment
    let local = n1.iter().chain(&n2).all(Seminorm::is_local);
    let mut rng = cfg.rng();
    for _ in 0..cfg.samples {
        let y = straddling_vector(&mut rng, atoms, dim, eps);
        let v2 = sup_eval(&n2, &y)?;
        let v1 = sup_eval(n1, &y)?;
        if local {
            if let Some(a) = (0..atoms).find(|a| v2.get(*a) < s.get(*a) && v1.get(*a) >= eps) {
                return Err(Error::TranslatorInvalid { atom: a });
            }
        } else if v2.lt_everywhere(&s) && !v1.lt_everywhere(&L0Scalar::constant(atoms, eps)) {
            let a = (0..atoms).find(|a| v1.get(*a) >= eps).unwrap_or(0);
            return Err(Error::TranslatorInvalid { atom: a });
        }
    }

    let keys: Vec<u64> = s.values().iter().map(|v| v.to_bits()).collect();
    let levels = Partition::from_labels(algebra, &keys);
    let mut order: Vec<usize> = (0..levels.len()).collect();
    let level_value = |k: usize| s.get(levels.blocks()[k].atoms().next().expect("non-empty"));
    order.sort_by(|i, j| level_value(*j).total_cmp(&level_value(*i)));
    let blocks = Partition::new(algebra, order.iter().map(|k| levels.blocks()[*k].clone()).collect())?;
    let block_eps: Vec<f64> = order.iter().map(|k| level_value(*k)).collect();
    let probs: Vec<f64> = blocks.blocks().iter().map(|b| b.prob()).collect();
    let m = tail_cutoff(&probs, lam);
    let eps2 = block_eps[..m].iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RefinementWitness { members: n2, eps: eps2, lam: lam / 2.0, m, blocks, block_eps })
}

/// Counts of a containment audit between two neighborhoods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ContainmentAudit {
    pub samples: usize,
    pub inner_hits: usize,
    pub violations: usize,
}

/// Samples points around the common center and checks `inner ⊆ outer`.
pub fn audit_containment(
    algebra: &MeasureAlgebra,
    inner: &Neighborhood,
    outer: &Neighborhood,
    scale: f64,
    cfg: &AuditConfig,
) -> Result<ContainmentAudit> {
    let mut rng = cfg.rng();
    let mut audit = ContainmentAudit { samples: cfg.samples, ..Default::default() };
    let c = inner.center();
    for _ in 0..cfg.samples {
        let y = c.add(&straddling_vector(&mut rng, c.atoms(), c.dim(), scale));
        if inner.contains(algebra, &y)? {
            audit.inner_hits += 1;
            if !outer.contains(algebra, &y)? {
                audit.violations += 1;
            }
        }
    }
    Ok(audit)
}

/// Per-atom closure of a stable set. Finite point data and polytopes are
/// already closed in all three topologies, so this is the identity.
pub fn closure(k: &StableSet) -> StableSet {
    k.clone()
}

/// For `y` outside a point-section stable set, one neighborhood of `y` in
/// each topology that misses the set, in the order ε,λ, `L⁰`-ball, stable
/// ball. Returns `None` when `y` is a selector of `k`.
pub fn exterior_neighborhoods(
    algebra: &MeasureAlgebra,
    k: &StableSet,
    members: &[Seminorm],
    y: &L0Vector,
) -> Result<Option<[Neighborhood; 3]>> {
    if !members.iter().all(Seminorm::is_local) {
        return Err(Error::NonLocal);
    }
    let atoms = algebra.atom_count();
    let mut gap = alloc::vec![f64::INFINITY; atoms];
    let mut outside = Vec::new();
    for (a, g) in gap.iter_mut().enumerate() {
        let yp = y.point(a);
        let d = k
            .section(a)
            .data()
            .iter()
            .map(|p| {
                let diff: Vec<f64> = p.iter().zip(yp).map(|(u, v)| u - v).collect();
                members
                    .iter()
                    .map(|m| m.eval_point(a, &diff).expect("local"))
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        if d > 0.0 {
            outside.push(a);
            *g = d;
        }
    }
    if outside.is_empty() {
        return Ok(None);
    }
    let radius = L0Scalar::from_fn(atoms, |a| if gap[a].is_finite() { gap[a] } else { 1.0 });
    let eps = outside.iter().map(|a| gap[*a]).fold(f64::INFINITY, f64::min);
    let lam = algebra.event(outside)?.prob().min(0.5);
    Ok(Some([
        Neighborhood::eps_lambda(y.clone(), members.to_vec(), eps, lam)?,
        Neighborhood::l0_ball(y.clone(), members.to_vec(), radius.clone())?,
        Neighborhood::stable_ball(
            y.clone(),
            StableFiniteFamily::uniform(algebra, members.to_vec()),
            radius,
        )?,
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seminorm::Exponent;
    use alloc::vec;

    fn alg4() -> MeasureAlgebra {
        MeasureAlgebra::uniform(4).unwrap()
    }

    fn abs1(atoms: usize) -> Vec<Seminorm> {
        vec![Seminorm::euclidean(atoms, 1)]
    }

    fn v1(vals: &[f64]) -> L0Vector {
        L0Vector::new(1, &vals.iter().map(|v| vec![*v]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn center_is_member_of_every_kind() {
        let alg = alg4();
        let c = v1(&[1.0, -2.0, 3.0, 0.0]);
        let el = Neighborhood::eps_lambda(c.clone(), abs1(4), 0.1, 0.5).unwrap();
        let ball = el.inner_l0_ball().unwrap();
        let stable = ball
            .inner_stable_ball(&StableFiniteFamily::uniform(&alg, vec![]))
            .unwrap();
        for n in [&el, &ball, &stable] {
            assert!(n.contains(&alg, &c).unwrap());
        }
    }

    #[test]
    fn l0_ball_membership() {
        let alg = alg4();
        let ball = Neighborhood::l0_ball(L0Vector::zeros(4, 1), abs1(4), L0Scalar::constant(4, 1.0)).unwrap();
        assert!(ball.contains(&alg, &v1(&[0.5, 0.5, 0.5, 0.5])).unwrap());
        assert!(!ball.contains(&alg, &v1(&[0.5, 1.0, 0.5, 0.5])).unwrap());
        assert_eq!(
            Neighborhood::l0_ball(L0Vector::zeros(4, 1), abs1(4), L0Scalar::new(vec![1.0, 0.0, 1.0, 1.0]).unwrap()),
            Err(Error::RadiusNotStrictlyPositive { atom: 1 })
        );
    }

    #[test]
    fn eps_lambda_membership_is_strict() {
        let alg = alg4();
        let n = Neighborhood::eps_lambda(L0Vector::zeros(4, 1), abs1(4), 1.0, 0.5).unwrap();
        assert!(!n.contains(&alg, &v1(&[0.5, 0.5, 2.0, 2.0])).unwrap());
        assert!(n.contains(&alg, &v1(&[0.5, 0.5, 0.5, 2.0])).unwrap());
    }

    #[test]
    fn witness_trivial_partition() {
        let s1 = vec![Seminorm::euclidean(4, 1), Seminorm::Pairing(v1(&[1.0, 2.0, 3.0, 4.0]))];
        let q = Seminorm::sup_hull(s1.clone()).unwrap();
        let w = epslambda_witness(&q, 0.3, 0.4).unwrap();
        assert_eq!(w.m, 1);
        assert_eq!(w.members, s1);
        assert_eq!(w.lam, 0.2);
        assert_eq!(w.eps, 0.3);
    }

    #[test]
    fn witness_minimal_tail() {
        let alg = MeasureAlgebra::new(vec![0.5, 0.3, 0.2]).unwrap();
        let parts = alg.atom_partition();
        let pieces: Vec<Seminorm> = (0..3)
            .map(|i| {
                let w = L0Vector::constant(3, &[1.0 + i as f64]);
                Seminorm::sup_hull(vec![Seminorm::weighted_norm(w, Exponent::One).unwrap()]).unwrap()
            })
            .collect();
        let q = Seminorm::concat(parts, pieces).unwrap();
        let w = epslambda_witness(&q, 1.0, 0.5).unwrap();
        assert_eq!(w.m, 2);
        assert_eq!(w.members.len(), 2);
        let target = Neighborhood::eps_lambda(L0Vector::zeros(3, 1), vec![q], 1.0, 0.5).unwrap();
        let inner = Neighborhood::eps_lambda(L0Vector::zeros(3, 1), w.members, w.eps, w.lam).unwrap();
        let audit = audit_containment(&alg, &inner, &target, 1.0, &AuditConfig { samples: 2000, seed: 3 }).unwrap();
        assert_eq!(audit.violations, 0);
        assert!(audit.inner_hits > 0);
    }

    #[test]
    fn identity_translator() {
        let alg = alg4();
        let n1 = abs1(4);
        let w = topology_refinement_witness(&alg, &n1, 0.7, 0.3, &IdentityTranslator, 1, &AuditConfig::default())
            .unwrap();
        assert_eq!(w.members, n1);
        assert_eq!(w.eps, 0.7);
        assert_eq!(w.lam, 0.15);
    }

    struct Inflating;
    impl BallTranslator for Inflating {
        fn translate(&self, members: &[Seminorm], radius: &L0Scalar) -> (Vec<Seminorm>, L0Scalar) {
            (members.to_vec(), radius.map(|r| 2.0 * r))
        }
    }

    #[test]
    fn invalid_translator_is_caught() {
        let alg = alg4();
        let err = topology_refinement_witness(&alg, &abs1(4), 0.7, 0.3, &Inflating, 1, &AuditConfig::default());
        assert!(matches!(err, Err(Error::TranslatorInvalid { .. })));
    }

    #[test]
    fn closure_is_identity_and_exterior_points_are_separated() {
        let alg = MeasureAlgebra::uniform(2).unwrap();
        let k = StableSet::points(1, vec![vec![vec![0.0], vec![1.0]], vec![vec![2.0]]]).unwrap();
        assert_eq!(closure(&k), k);
        let inside = v1(&[1.0, 2.0]);
        assert!(exterior_neighborhoods(&alg, &k, &abs1(2), &inside).unwrap().is_none());
        let y = v1(&[0.5, 2.0]);
        let nbhds = exterior_neighborhoods(&alg, &k, &abs1(2), &y).unwrap().unwrap();
        for n in &nbhds {
            assert!(n.contains(&alg, &y).unwrap());
            for x in k.selectors().unwrap() {
                assert!(!n.contains(&alg, &x).unwrap());
            }
        }
    }
}
