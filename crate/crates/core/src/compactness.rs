//! Stable compactness: the Heine-Borel predicate, greedy `L⁰`-radius nets,
//! the cluster-point construction, `d∞` on function tables, equicontinuity,
//! finite products and constant-subsequence extraction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::algebra::{Event, MeasureAlgebra};
use crate::error::{Error, Result};
use crate::family::StableFiniteFamily;
use crate::geometry;
use crate::sampling::{self, AuditConfig};
use crate::scalar::{L0Scalar, StepNatural};
use crate::seminorm::Seminorm;
use crate::stable_set::{self, CompactRep, StableSet};
use crate::vector::L0Vector;

/// Relative slack for the triangle inequality in metric spot checks.
pub const TRIANGLE_SLACK: f64 = 1e-12;

/// Metrics on `(L⁰)^d` that act atom by atom.
#[derive(Debug, Clone, PartialEq)]
pub enum StableMetric {
    EuclideanL0,
    /// `d(x, y) = p(x − y)` for a local seminorm `p`.
    SeminormInduced(Seminorm),
}

impl StableMetric {
    pub fn seminorm_induced(p: Seminorm) -> Result<Self> {
        if !p.is_local() {
            return Err(Error::NonLocal);
        }
        Ok(StableMetric::SeminormInduced(p))
    }

    pub fn point_distance(&self, atom: usize, a: &[f64], b: &[f64]) -> f64 {
        match self {
            StableMetric::EuclideanL0 => geometry::dist(a, b),
            StableMetric::SeminormInduced(p) => {
                p.eval_point(atom, &geometry::sub(a, b)).expect("checked local")
            }
        }
    }

    pub fn distance(&self, x: &L0Vector, y: &L0Vector) -> Result<L0Scalar> {
        if x.atoms() != y.atoms() || x.dim() != y.dim() {
            return Err(Error::AlgebraMismatch);
        }
        L0Scalar::new((0..x.atoms()).map(|a| self.point_distance(a, x.point(a), y.point(a))).collect())
    }
}

/// Per-atom function values on the points of a stable set.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionTable {
    values: Vec<Vec<f64>>,
}

impl FunctionTable {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("function table values must be finite".into()));
        }
        Ok(Self { values })
    }

    pub fn atoms(&self) -> usize {
        self.values.len()
    }

    pub fn at(&self, atom: usize) -> &[f64] {
        &self.values[atom]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }
}

/// `d∞(f, g)(ω) = max_{x ∈ K_ω} |f(x) − g(x)|` for tables over `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct DInfinity {
    sizes: Vec<usize>,
}

impl DInfinity {
    pub fn new(domain: &StableSet) -> Self {
        Self { sizes: domain.sections().iter().map(CompactRep::len).collect() }
    }

    fn check(&self, f: &FunctionTable) -> Result<()> {
        let ok = f.atoms() == self.sizes.len() && f.values.iter().zip(&self.sizes).all(|(v, n)| v.len() == *n);
        if ok {
            Ok(())
        } else {
            Err(Error::GridMismatch("function table does not match the domain sections".into()))
        }
    }

    pub fn point_distance(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
    }

    pub fn distance(&self, f: &FunctionTable, g: &FunctionTable) -> Result<L0Scalar> {
        self.check(f)?;
        self.check(g)?;
        L0Scalar::new((0..f.atoms()).map(|a| Self::point_distance(f.at(a), g.at(a))).collect())
    }
}

/// Violation counts from a metric spot check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MetricAudit {
    pub triples: usize,
    pub identity: usize,
    pub symmetry: usize,
    pub triangle: usize,
}

impl MetricAudit {
    pub fn passed(&self) -> bool {
        self.identity == 0 && self.symmetry == 0 && self.triangle == 0
    }
}

/// Checks `d(x, y) = 0 ⇔ x = y`, symmetry and the triangle inequality per
/// atom on sampled triples. `separating` enables the `⇐` direction.
pub fn audit_metric_axioms<T>(
    atoms: usize,
    triples: usize,
    mut sample: impl FnMut() -> T,
    distance: impl Fn(&T, &T) -> Result<L0Scalar>,
    separating: bool,
    same_at: impl Fn(&T, &T, usize) -> bool,
) -> Result<MetricAudit> {
    let mut audit = MetricAudit { triples, ..Default::default() };
    for _ in 0..triples {
        let (x, y, z) = (sample(), sample(), sample());
        let dxy = distance(&x, &y)?;
        let dyx = distance(&y, &x)?;
        let dyz = distance(&y, &z)?;
        let dxz = distance(&x, &z)?;
        let dxx = distance(&x, &x)?;
        for a in 0..atoms {
            let eq = same_at(&x, &y, a);
            if dxx.get(a) != 0.0 || (eq && dxy.get(a) != 0.0) || (separating && !eq && dxy.get(a) == 0.0) {
                audit.identity += 1;
            }
            if dxy.get(a) != dyx.get(a) {
                audit.symmetry += 1;
            }
            let rhs = dxy.get(a) + dyz.get(a);
            if dxz.get(a) > rhs + TRIANGLE_SLACK * rhs.max(1.0) {
                audit.triangle += 1;
            }
        }
    }
    Ok(audit)
}

/// Samples vectors where roughly half of the atoms repeat a shared point, so
/// that identity of indiscernibles is exercised on equal points.
pub fn audit_vector_metric(
    metric: &StableMetric,
    atoms: usize,
    dim: usize,
    cfg: &AuditConfig,
) -> Result<MetricAudit> {
    let mut rng = cfg.rng();
    let base = sampling::random_vector(&mut rng, atoms, dim, 1.0);
    let separating = match metric {
        StableMetric::EuclideanL0 => true,
        StableMetric::SeminormInduced(Seminorm::WeightedNorm { weights, .. }) => {
            weights.points().flatten().all(|w| *w > 0.0)
        }
        StableMetric::SeminormInduced(_) => false,
    };
    audit_metric_axioms(
        atoms,
        cfg.samples,
        || {
            L0Vector::from_fn(atoms, dim, |a| {
                if rng.random::<bool>() {
                    base.point(a).to_vec()
                } else {
                    sampling::random_point(&mut rng, dim, 1.0)
                }
            })
        },
        |x, y| metric.distance(x, y),
        separating,
        |x, y, a| x.point(a) == y.point(a),
    )
}

/// The same audit for `d∞` over function tables on `domain`.
pub fn audit_dinfinity(domain: &StableSet, cfg: &AuditConfig) -> Result<MetricAudit> {
    let d = DInfinity::new(domain);
    let mut rng = cfg.rng();
    let sizes: Vec<usize> = domain.sections().iter().map(CompactRep::len).collect();
    let base: Vec<Vec<f64>> = sizes.iter().map(|n| sampling::random_point(&mut rng, *n, 1.0)).collect();
    audit_metric_axioms(
        domain.atoms(),
        cfg.samples,
        || {
            let values = sizes
                .iter()
                .enumerate()
                .map(|(a, n)| {
                    if rng.random::<bool>() {
                        base[a].clone()
                    } else {
                        sampling::random_point(&mut rng, *n, 1.0)
                    }
                })
                .collect();
            FunctionTable { values }
        },
        |f, g| d.distance(f, g),
        true,
        |f, g, a| f.at(a) == g.at(a),
    )
}

/// Outcome of the Heine-Borel check.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactnessReport {
    pub compact: bool,
    /// `max_{x ∈ K_ω} sup_{p ∈ F} p(x)` per atom, when compact.
    pub radius: Option<L0Scalar>,
    pub offending_atom: Option<usize>,
}

/// Stable compactness of `k` with the boundedness radius measured by the
/// local family `family` (the Euclidean norm when empty).
pub fn is_stably_compact(k: &StableSet, family: &[Seminorm]) -> Result<CompactnessReport> {
    if !family.iter().all(Seminorm::is_local) {
        return Err(Error::NonLocal);
    }
    let mut radius = Vec::with_capacity(k.atoms());
    for (a, rep) in k.sections().iter().enumerate() {
        let bad = rep.is_empty()
            || rep.data().iter().any(|p| p.len() != k.dim() || p.iter().any(|c| !c.is_finite()));
        if bad {
            return Ok(CompactnessReport { compact: false, radius: None, offending_atom: Some(a) });
        }
        let r = rep
            .data()
            .iter()
            .map(|p| {
                if family.is_empty() {
                    geometry::norm(p)
                } else {
                    family.iter().map(|m| m.eval_point(a, p).expect("local")).fold(0.0, f64::max)
                }
            })
            .fold(0.0, f64::max);
        radius.push(r);
    }
    Ok(CompactnessReport { compact: true, radius: Some(L0Scalar::new(radius)?), offending_atom: None })
}

/// Heine-Borel for an explicit finite subset of `(L⁰)^d`: compact iff it is
/// stable (finite data is closed and bounded).
pub fn is_stably_compact_list(s: &[L0Vector], family: &[Seminorm]) -> Result<CompactnessReport> {
    match stable_set::extract_setvalued_map(s) {
        Ok(k) => is_stably_compact(&k, family),
        Err(Error::NotStable) => Ok(CompactnessReport { compact: false, radius: None, offending_atom: None }),
        Err(e) => Err(e),
    }
}

/// A stable finite net: per atom `n(ω)` centers covering `K_ω` within `r(ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsNet {
    pub radius: L0Scalar,
    pub centers: StableFiniteFamily<L0Vector>,
    pub counts: StepNatural,
    per_atom: Vec<Vec<Vec<f64>>>,
}

impl EpsNet {
    pub fn centers_at(&self, atom: usize) -> &[Vec<f64>] {
        &self.per_atom[atom]
    }
}

/// Greedy cover of `points` by closed balls of radius `r`: the first
/// uncovered point in input order becomes the next center.
pub fn greedy_cover<P: Clone>(points: &[P], r: f64, d: impl Fn(&P, &P) -> f64) -> Vec<P> {
    let mut covered = vec![false; points.len()];
    let mut centers = Vec::new();
    for i in 0..points.len() {
        if covered[i] {
            continue;
        }
        let c = &points[i];
        for (j, flag) in covered.iter_mut().enumerate() {
            if !*flag && d(c, &points[j]) <= r {
                *flag = true;
            }
        }
        centers.push(c.clone());
    }
    centers
}

fn assemble_net(algebra: &MeasureAlgebra, dim: usize, radius: L0Scalar, per_atom: Vec<Vec<Vec<f64>>>) -> Result<EpsNet> {
    let counts = StepNatural::new(per_atom.iter().map(|c| c.len() as u32).collect())?;
    let (parts, levels) = counts.canonical_partition(algebra)?;
    let blocks = parts
        .blocks()
        .iter()
        .zip(&levels)
        .map(|(block, n)| {
            (0..*n as usize)
                .map(|j| {
                    L0Vector::from_fn(algebra.atom_count(), dim, |a| {
                        if block.contains(a) { per_atom[a][j].clone() } else { vec![0.0; dim] }
                    })
                })
                .collect()
        })
        .collect();
    let centers = StableFiniteFamily::new(parts, blocks)?;
    Ok(EpsNet { radius, centers, counts, per_atom })
}

/// A stable finite `r`-net of a point-section stable set.
pub fn stable_eps_net(
    algebra: &MeasureAlgebra,
    k: &StableSet,
    metric: &StableMetric,
    r: &L0Scalar,
) -> Result<EpsNet> {
    if let Some(atom) = r.values().iter().position(|v| *v <= 0.0) {
        return Err(Error::RadiusNotStrictlyPositive { atom });
    }
    if k.atoms() != algebra.atom_count() || r.atoms() != algebra.atom_count() {
        return Err(Error::AlgebraMismatch);
    }
    if !k.is_points() {
        return Err(Error::InvalidInput("nets need point sections".into()));
    }
    let per_atom: Vec<Vec<Vec<f64>>> = (0..k.atoms())
        .map(|a| greedy_cover(k.section(a).data(), r.get(a), |p, q| metric.point_distance(a, p, q)))
        .collect();
    if let Some(atom) = per_atom.iter().position(Vec::is_empty) {
        return Err(Error::InvalidInput(format!("empty section on atom {atom}")));
    }
    assemble_net(algebra, k.dim(), r.clone(), per_atom)
}

/// Exhaustive audit that every point of `K_ω` lies within `r(ω)` of a
/// center; returns the first uncovered atom.
pub fn audit_net(k: &StableSet, metric: &StableMetric, net: &EpsNet) -> Option<usize> {
    (0..k.atoms()).find(|a| {
        k.section(*a).data().iter().any(|p| {
            !net.centers_at(*a).iter().any(|c| metric.point_distance(*a, c, p) <= net.radius.get(*a))
        })
    })
}

/// Greedy `d∞`-net of a finite family of function tables, transferring total
/// boundedness from points to function families.
pub fn dinfinity_net(tables: &[FunctionTable], r: &L0Scalar) -> Result<Vec<Vec<usize>>> {
    if let Some(atom) = r.values().iter().position(|v| *v <= 0.0) {
        return Err(Error::RadiusNotStrictlyPositive { atom });
    }
    let atoms = r.atoms();
    if tables.iter().any(|t| t.atoms() != atoms) {
        return Err(Error::GridMismatch("tables over different algebras".into()));
    }
    Ok((0..atoms)
        .map(|a| {
            let idx: Vec<usize> = (0..tables.len()).collect();
            greedy_cover(&idx, r.get(a), |i, j| DInfinity::point_distance(tables[*i].at(a), tables[*j].at(a)))
        })
        .collect())
}

/// Certificate of the cluster-point construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCertificate {
    pub r: L0Scalar,
    pub b: Vec<Event>,
    pub c: Vec<Event>,
    /// `ℙ(r_n ≥ r)` for every `n`.
    pub hit_probs: Vec<f64>,
}

/// Given `r_1, …, r_N ≥ 0` with non-null positivity events `A_n`, builds
/// `r > 0` with `ℙ(r_n ≥ r) > 0` for all `n` via the halving chain
/// `B_1 = A_1`, `B_{n+1} ⊆ A_{n+1}`, `0 < ℙ(B_{n+1}) < ½ℙ(B_n)`.
pub fn cluster_lemma_construct(algebra: &MeasureAlgebra, rs: &[L0Scalar]) -> Result<ClusterCertificate> {
    let atoms = algebra.atom_count();
    let mut a_events = Vec::with_capacity(rs.len());
    for (n, r) in rs.iter().enumerate() {
        if r.atoms() != atoms {
            return Err(Error::AlgebraMismatch);
        }
        if !r.is_nonnegative() {
            return Err(Error::InvalidInput(format!("r_{} takes negative values", n + 1)));
        }
        let a = r.positivity_event(algebra)?;
        if a.is_empty() {
            return Err(Error::InvalidInput(format!("r_{} vanishes identically", n + 1)));
        }
        a_events.push(a);
    }

    let mut b: Vec<Event> = Vec::with_capacity(rs.len());
    let mut b_mass: Vec<f64> = Vec::with_capacity(rs.len());
    for a in &a_events {
        let next = match b_mass.last() {
            None => a.clone(),
            Some(prev) => {
                let bound = prev / 2.0;
                let mut sorted: Vec<usize> = a.atoms().collect();
                sorted.sort_by(|i, j| algebra.atom_prob(*i).total_cmp(&algebra.atom_prob(*j)).then(i.cmp(j)));
                let mut mass = 0.0;
                let mut chosen = algebra.empty_event();
                for i in sorted {
                    let p = algebra.atom_prob(i);
                    if mass + p < bound {
                        mass += p;
                        chosen.insert(i);
                    } else {
                        break;
                    }
                }
                if chosen.is_empty() {
                    return Err(Error::ConstructionImpossible { prefix: b.len() });
                }
                chosen
            }
        };
        b_mass.push(next.prob());
        b.push(next);
    }

    let mut later = algebra.empty_event();
    let mut c = vec![algebra.empty_event(); b.len()];
    for n in (0..b.len()).rev() {
        c[n] = b[n].difference(&later)?;
        later = later.join(&b[n])?;
    }
    let r = L0Scalar::from_fn(atoms, |a| match c.iter().position(|cn| cn.contains(a)) {
        Some(n) => rs[n].get(a) / 2.0,
        None => 1.0,
    });
    let hit_probs = rs
        .iter()
        .map(|rn| rn.ge_event(&r, algebra).map(|e| e.prob()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClusterCertificate { r, b, c, hit_probs })
}

/// The dyadic algebra of `2^depth` uniform atoms.
pub fn dyadic_algebra(depth: u32) -> Result<MeasureAlgebra> {
    MeasureAlgebra::uniform(1usize << depth)
}

/// `r_n = 1` on the `n`-th dyadic block `[1 − 2^{1−n}, 1 − 2^{−n})`, zero
/// elsewhere, for `n = 1..=count`.
pub fn dyadic_blocks(algebra: &MeasureAlgebra, count: usize) -> Vec<L0Scalar> {
    let atoms = algebra.atom_count();
    (1..=count)
        .map(|n| {
            let lo = atoms - (atoms >> (n - 1));
            let hi = atoms - (atoms >> n);
            L0Scalar::from_fn(atoms, |a| if (lo..hi).contains(&a) { 1.0 } else { 0.0 })
        })
        .collect()
}

/// A rectangular grid shared by all atoms, stored in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    shape: Vec<usize>,
}

impl Grid {
    pub fn new(shape: Vec<usize>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::GridMismatch("grid shape must be non-empty with positive extents".into()));
        }
        Ok(Self { shape })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Indices of the axis-adjacent cells of `idx`.
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.shape.len());
        let mut stride = 1;
        for axis in (0..self.shape.len()).rev() {
            let n = self.shape[axis];
            let coord = (idx / stride) % n;
            if coord > 0 {
                out.push(idx - stride);
            }
            if coord + 1 < n {
                out.push(idx + stride);
            }
            stride *= n;
        }
        out
    }
}

/// `true` iff on every atom, every grid point `x` and every axis-adjacent
/// `y`, `|f(x) − f(y)| ≤ r` for all `f` in `tables`. On failure the first
/// offending atom is returned.
pub fn is_stably_equicontinuous(grid: &Grid, tables: &[FunctionTable], r: &L0Scalar) -> Result<Result<(), usize>> {
    let atoms = r.atoms();
    for t in tables {
        if t.atoms() != atoms || t.values.iter().any(|v| v.len() != grid.len()) {
            return Err(Error::GridMismatch(format!(
                "tables must have {atoms} atoms of {} grid values",
                grid.len()
            )));
        }
    }
    for a in 0..atoms {
        for x in 0..grid.len() {
            for y in grid.neighbors(x) {
                if tables.iter().any(|t| (t.at(a)[x] - t.at(a)[y]).abs() > r.get(a)) {
                    return Ok(Err(a));
                }
            }
        }
    }
    Ok(Ok(()))
}

/// Per-atom Cartesian product of stable sets, with the total dimension
/// bounded by `max_dim`.
pub fn product_compactness(ks: &[StableSet], max_dim: usize) -> Result<StableSet> {
    let first = ks.first().ok_or_else(|| Error::InvalidInput("product of no sets".into()))?;
    let atoms = first.atoms();
    if ks.iter().any(|k| k.atoms() != atoms) {
        return Err(Error::AlgebraMismatch);
    }
    let dim: usize = ks.iter().map(StableSet::dim).sum();
    if dim > max_dim {
        return Err(Error::DimensionOverflow { dim, limit: max_dim });
    }
    let polytope = ks.iter().all(|k| k.sections().iter().all(CompactRep::is_polytope));
    if !polytope && !ks.iter().all(StableSet::is_points) {
        return Err(Error::InvalidInput("product factors mix point and polytope sections".into()));
    }
    let per_atom = (0..atoms)
        .map(|a| {
            let mut acc: Vec<Vec<f64>> = vec![Vec::new()];
            for k in ks {
                let sec = k.section(a).data();
                acc = acc
                    .iter()
                    .flat_map(|prefix| {
                        sec.iter().map(move |p| prefix.iter().chain(p).copied().collect::<Vec<f64>>())
                    })
                    .collect();
            }
            if polytope { CompactRep::Polytope(acc) } else { CompactRep::Points(acc) }
        })
        .collect();
    // empty factors yield empty sections, which the compactness check reports
    Ok(StableSet::new_unchecked(dim, per_atom))
}

/// A stable sequence of indices into point sections: per atom a finite
/// prefix followed by a repeating cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventuallyPeriodic {
    pub prefix: Vec<Vec<usize>>,
    pub cycle: Vec<Vec<usize>>,
}

impl EventuallyPeriodic {
    pub fn index(&self, atom: usize, n: usize) -> usize {
        let pre = &self.prefix[atom];
        if n < pre.len() {
            pre[n]
        } else {
            let cyc = &self.cycle[atom];
            cyc[(n - pre.len()) % cyc.len()]
        }
    }
}

/// A constant subsequence `n_k(ω) = start(ω) + k·step(ω)`, `k ≥ 0`, of a
/// stable sequence, with its limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSubsequence {
    pub start: Vec<usize>,
    pub step: Vec<usize>,
    pub limit: L0Vector,
}

impl ConstantSubsequence {
    /// The `k`-th subsequence index as a step natural (1-based terms).
    pub fn term(&self, k: usize) -> Result<StepNatural> {
        StepNatural::new(self.start.iter().zip(&self.step).map(|(s, d)| (s + k * d + 1) as u32).collect())
    }
}

/// Extracts a constant, strictly increasing subsequence on every atom.
pub fn constant_subsequence(k: &StableSet, seq: &EventuallyPeriodic) -> Result<ConstantSubsequence> {
    let atoms = k.atoms();
    if seq.prefix.len() != atoms || seq.cycle.len() != atoms {
        return Err(Error::ArityError { expected: atoms, found: seq.cycle.len() });
    }
    let mut start = Vec::with_capacity(atoms);
    let mut step = Vec::with_capacity(atoms);
    let mut limit = Vec::with_capacity(atoms);
    for a in 0..atoms {
        let cyc = &seq.cycle[a];
        let size = k.section(a).len();
        if cyc.is_empty() || cyc.iter().chain(&seq.prefix[a]).any(|i| *i >= size) {
            return Err(Error::InvalidInput(format!("sequence indices on atom {a} are out of range")));
        }
        start.push(seq.prefix[a].len());
        step.push(cyc.len());
        limit.push(k.section(a).data()[cyc[0]].clone());
    }
    Ok(ConstantSubsequence { start, step, limit: L0Vector::new(k.dim(), &limit)? })
}

/// Random point-section stable set, used by audits and tests.
pub fn random_points_set(rng: &mut impl Rng, atoms: usize, dim: usize, max_points: usize) -> StableSet {
    let per_atom = (0..atoms)
        .map(|_| {
            let n = rng.random_range(1..=max_points.max(1));
            (0..n).map(|_| sampling::random_point(rng, dim, 2.0)).collect()
        })
        .collect();
    StableSet::points(dim, per_atom).expect("non-empty sections")
}
