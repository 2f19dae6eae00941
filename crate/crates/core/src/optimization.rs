//! Conditional optimization over finite measure algebras: argmin over a
//! stable set, the Banach fixed point with `L⁰` contraction rate, strong
//! separation, grid Fenchel conjugation and polars.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::algebra::MeasureAlgebra;
use crate::error::{Error, Result};
use crate::geometry::{self, Generators, Halfspaces, MAX_POLYTOPE_DIM};
use crate::module::ModuleMap;
use crate::sampling::{self, AuditConfig};
use crate::scalar::{L0Scalar, StepNatural};
use crate::stable_set::{CompactRep, StableSet};
use crate::vector::L0Vector;

/// A stable function `(L⁰)^d → L⁰`. Stability forces per-atom locality, so
/// the function is given by its per-atom evaluation.
pub trait StableFunction {
    fn eval_point(&self, atom: usize, x: &[f64]) -> f64;

    fn eval(&self, x: &L0Vector) -> L0Scalar {
        L0Scalar::from_fn(x.atoms(), |a| self.eval_point(a, x.point(a)))
    }

    /// Caller-asserted convexity; documentation only.
    fn is_convex(&self) -> bool {
        false
    }
}

/// The builtin function registry.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    Constant(L0Scalar),
    /// `scale · ‖x − center‖²`.
    Quadratic { center: L0Vector, scale: L0Scalar },
    /// `‖x‖_q` with `q ∈ {1, 2, ∞}`, encoded as `1`, `2` or `0`.
    Norm { q: u8 },
    /// `⟨a, x⟩ + b`.
    Affine { a: L0Vector, b: L0Scalar },
}

impl StableFunction for Builtin {
    fn eval_point(&self, atom: usize, x: &[f64]) -> f64 {
        match self {
            Builtin::Constant(c) => c.get(atom),
            Builtin::Quadratic { center, scale } => {
                let d = geometry::sub(x, center.point(atom));
                scale.get(atom) * geometry::dot(&d, &d)
            }
            Builtin::Norm { q: 1 } => x.iter().map(|v| v.abs()).sum(),
            Builtin::Norm { q: 2 } => geometry::norm(x),
            Builtin::Norm { .. } => x.iter().map(|v| v.abs()).fold(0.0, f64::max),
            Builtin::Affine { a, b } => geometry::dot(a.point(atom), x) + b.get(atom),
        }
    }

    fn is_convex(&self) -> bool {
        match self {
            Builtin::Quadratic { scale, .. } => scale.is_nonnegative(),
            _ => true,
        }
    }
}

/// Checks `f(Σ 1_{A_k} x_k) = Σ 1_{A_k} f(x_k)` on random concatenations;
/// returns the number of failures.
pub fn audit_function_stability(
    f: &dyn StableFunction,
    algebra: &MeasureAlgebra,
    dim: usize,
    cfg: &AuditConfig,
) -> Result<usize> {
    let mut rng = cfg.rng();
    let atoms = algebra.atom_count();
    let mut failures = 0;
    for _ in 0..cfg.samples {
        let parts = sampling::random_partition(&mut rng, algebra, 4);
        let xs: Vec<L0Vector> =
            (0..parts.len()).map(|_| sampling::random_vector(&mut rng, atoms, dim, 2.0)).collect();
        let glued = L0Vector::concat(&parts, &xs)?;
        let values: Vec<L0Scalar> = xs.iter().map(|x| f.eval(x)).collect();
        if f.eval(&glued) != L0Scalar::concat(&parts, &values)? {
            failures += 1;
        }
    }
    Ok(failures)
}

/// Per-atom minimizer over the point sections of `k`, ties broken towards
/// the lexicographically smallest point. Returns `(x₀, f(x₀))`.
pub fn conditional_argmin(f: &dyn StableFunction, k: &StableSet) -> Result<(L0Vector, L0Scalar)> {
    if !k.is_points() {
        return Err(Error::InvalidInput("argmin needs point sections".into()));
    }
    let mut points = Vec::with_capacity(k.atoms());
    for a in 0..k.atoms() {
        let best = k
            .section(a)
            .data()
            .iter()
            .map(|p| (f.eval_point(a, p), p))
            .min_by(|(v1, p1), (v2, p2)| v1.total_cmp(v2).then_with(|| geometry::lex_cmp(p1, p2)))
            .ok_or_else(|| Error::InvalidInput(format!("empty section on atom {a}")))?;
        points.push(best.1.clone());
    }
    let x0 = L0Vector::new(k.dim(), &points)?;
    let value = f.eval(&x0);
    Ok((x0, value))
}

/// A stable self-map of `(L⁰)^d`, given per atom.
pub trait StableMap {
    fn apply_point(&self, atom: usize, x: &[f64]) -> Vec<f64>;

    fn apply(&self, x: &L0Vector) -> L0Vector {
        L0Vector::from_fn(x.atoms(), x.dim(), |a| self.apply_point(a, x.point(a)))
    }
}

/// `T(x) = A x + b` per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub linear: ModuleMap,
    pub shift: L0Vector,
}

impl AffineMap {
    pub fn new(linear: ModuleMap, shift: L0Vector) -> Result<Self> {
        if linear.rows() != linear.cols() || linear.rows() != shift.dim() || linear.atoms() != shift.atoms() {
            return Err(Error::InvalidInput("affine map needs a square matrix matching the shift".into()));
        }
        Ok(Self { linear, shift })
    }

    /// `T(x) = a·x + b` with a scalar slope per atom.
    pub fn scalar(a: &L0Scalar, b: L0Vector) -> Result<Self> {
        let d = b.dim();
        let per_atom = (0..a.atoms())
            .map(|w| (0..d * d).map(|i| if i / d == i % d { a.get(w) } else { 0.0 }).collect())
            .collect();
        Self::new(ModuleMap::new(d, d, per_atom)?, b)
    }
}

impl StableMap for AffineMap {
    fn apply_point(&self, atom: usize, x: &[f64]) -> Vec<f64> {
        let mut y = self.linear.apply_point(atom, x);
        y.iter_mut().zip(self.shift.point(atom)).for_each(|(yi, bi)| *yi += bi);
        y
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityMap;

impl StableMap for IdentityMap {
    fn apply_point(&self, _atom: usize, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

/// A contraction `T` with rate `r`, tolerance and iteration cap.
pub struct ContractionSpec<'a> {
    pub map: &'a dyn StableMap,
    pub rate: L0Scalar,
    /// Sampling domain for the contraction spot check; random vectors when
    /// absent.
    pub domain: Option<StableSet>,
    pub tol: L0Scalar,
    pub max_iter: usize,
}

impl ContractionSpec<'_> {
    fn validate(&self, atoms: usize) -> Result<()> {
        if self.rate.atoms() != atoms || self.tol.atoms() != atoms {
            return Err(Error::AlgebraMismatch);
        }
        if let Some(atom) = self.rate.values().iter().position(|r| !(0.0..1.0).contains(r)) {
            return Err(Error::RateNotContractive { atom });
        }
        if let Some(atom) = self.tol.values().iter().position(|t| *t <= 0.0) {
            return Err(Error::RadiusNotStrictlyPositive { atom });
        }
        Ok(())
    }

    /// Checks `d(Tx, Ty) ≤ r d(x, y)` per atom on sampled pairs.
    pub fn spot_check(&self, dim: usize, cfg: &AuditConfig) -> Result<()> {
        let atoms = self.rate.atoms();
        self.validate(atoms)?;
        let mut rng = cfg.rng();
        for _ in 0..cfg.samples {
            let (x, y) = match &self.domain {
                Some(k) => (pick_selector(&mut rng, k), pick_selector(&mut rng, k)),
                None => (
                    sampling::random_vector(&mut rng, atoms, dim, 4.0),
                    sampling::random_vector(&mut rng, atoms, dim, 4.0),
                ),
            };
            for a in 0..atoms {
                let (tx, ty) = (self.map.apply_point(a, x.point(a)), self.map.apply_point(a, y.point(a)));
                let lhs = geometry::dist(&tx, &ty);
                let rhs = self.rate.get(a) * geometry::dist(x.point(a), y.point(a));
                // rounding in T itself is not a contraction failure
                let slack = 4.0 * f64::EPSILON * (geometry::norm(&tx) + geometry::norm(&ty));
                if lhs > rhs * (1.0 + 1e-12) + slack {
                    return Err(Error::RateNotContractive { atom: a });
                }
            }
        }
        Ok(())
    }
}

fn pick_selector(rng: &mut impl Rng, k: &StableSet) -> L0Vector {
    let points: Vec<Vec<f64>> = k
        .sections()
        .iter()
        .map(|s| s.data()[rng.random_range(0..s.len())].clone())
        .collect();
    L0Vector::new(k.dim(), &points).expect("sections share the dimension")
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixpointResult {
    pub z: L0Vector,
    /// Per-atom index `n` of the returned iterate `x_n`, counting `x₁` as 1.
    pub iters: StepNatural,
    /// Per atom, the iterates `x₁, x₂, …` up to the returned one.
    pub trace: Vec<Vec<Vec<f64>>>,
}

/// Iterates `x_{n+1} = T(x_n)` independently on every atom and stops at the
/// first `n` with `d(x_n, T x_n) ≤ tol·(1 − r)`, which yields
/// `d(x_n, z*) ≤ tol`.
pub fn banach_fixpoint(spec: &ContractionSpec<'_>, x1: &L0Vector) -> Result<FixpointResult> {
    let atoms = x1.atoms();
    spec.validate(atoms)?;
    let mut z = x1.clone();
    let mut iters = vec![0u32; atoms];
    let mut trace = vec![Vec::new(); atoms];
    let mut unconverged = Vec::new();
    for a in 0..atoms {
        let stop = spec.tol.get(a) * (1.0 - spec.rate.get(a));
        let mut x = x1.point(a).to_vec();
        let mut n = 1usize;
        loop {
            trace[a].push(x.clone());
            let tx = spec.map.apply_point(a, &x);
            if geometry::dist(&x, &tx) <= stop {
                break;
            }
            if n >= spec.max_iter {
                unconverged.push(a);
                break;
            }
            x = tx;
            n += 1;
        }
        z.point_mut(a).copy_from_slice(&x);
        iters[a] = n as u32;
    }
    if !unconverged.is_empty() {
        let algebra = MeasureAlgebra::uniform(atoms)?;
        return Err(Error::MaxIterations { cap: spec.max_iter, unconverged: algebra.event(unconverged)? });
    }
    Ok(FixpointResult { z, iters: StepNatural::new(iters)?, trace })
}

/// The a-priori bound `r^k/(1 − r)·d(x₁, T x₁)` on `d(x_{k+1}, z*)` after
/// `k` applications of `T`.
pub fn fixpoint_error_bound(rate: f64, k: usize, first_step: f64) -> f64 {
    libm::pow(rate, k as f64) / (1.0 - rate) * first_step
}

/// `f = ⟨·, y⟩` with `f(x) + r < f(y')` for all `x ∈ S₁`, `y' ∈ S₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationCertificate {
    pub functional: L0Vector,
    pub gap: L0Scalar,
}

impl SeparationCertificate {
    /// Exhaustive check over vertex pairs: `min f(y') − f(x) > r`.
    pub fn audit(&self, s1: &StableSet, s2: &StableSet) -> bool {
        (0..s1.atoms()).all(|a| {
            let u = self.functional.point(a);
            s1.section(a).data().iter().all(|x| {
                s2.section(a).data().iter().all(|y| geometry::dot(y, u) - geometry::dot(x, u) > self.gap.get(a))
            })
        })
    }
}

fn check_dims(s1: &StableSet, s2: &StableSet) -> Result<()> {
    if s1.atoms() != s2.atoms() || s1.dim() != s2.dim() {
        return Err(Error::AlgebraMismatch);
    }
    if s1.dim() > MAX_POLYTOPE_DIM {
        return Err(Error::DimensionUnsupported { dim: s1.dim() });
    }
    Ok(())
}

/// Strong separation of two stable sets whose per-atom convex hulls are
/// disjoint. Section data are read as vertex lists.
pub fn strong_separation(s1: &StableSet, s2: &StableSet) -> Result<SeparationCertificate> {
    check_dims(s1, s2)?;
    let atoms = s1.atoms();
    let mut dirs = Vec::with_capacity(atoms);
    let mut gaps = Vec::with_capacity(atoms);
    let mut touching = Vec::new();
    for a in 0..atoms {
        let (p, q) = (s1.section(a).data(), s2.section(a).data());
        let diffs: Vec<Vec<f64>> = q.iter().flat_map(|y| p.iter().map(move |x| geometry::sub(y, x))).collect();
        let scale = p.iter().chain(q).map(|v| geometry::norm(v)).fold(1.0, f64::max);
        let m = geometry::min_norm_point(&diffs).point;
        let len = geometry::norm(&m);
        if len <= 1e-12 * scale {
            touching.push(a);
            dirs.push(vec![0.0; s1.dim()]);
            gaps.push(0.0);
            continue;
        }
        let u: Vec<f64> = m.iter().map(|c| c / len).collect();
        let lo = q.iter().map(|y| geometry::dot(y, &u)).fold(f64::INFINITY, f64::min);
        let hi = p.iter().map(|x| geometry::dot(x, &u)).fold(f64::NEG_INFINITY, f64::max);
        let gap = lo - hi;
        if !(gap > 0.0) {
            touching.push(a);
        }
        dirs.push(u);
        gaps.push(gap / 2.0);
    }
    if !touching.is_empty() {
        let algebra = MeasureAlgebra::uniform(atoms)?;
        return Err(Error::NotDisjoint(algebra.event(touching)?));
    }
    Ok(SeparationCertificate { functional: L0Vector::new(s1.dim(), &dirs)?, gap: L0Scalar::new(gaps)? })
}

/// A per-atom table of function values on a grid of points shared by all
/// atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

impl GridFunction {
    pub fn new(points: Vec<Vec<f64>>, values: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.is_empty() || points.iter().any(|p| p.len() != dim) {
            return Err(Error::GridMismatch("grid points must be non-empty with a common dimension".into()));
        }
        if values.iter().any(|v| v.len() != points.len()) {
            return Err(Error::GridMismatch(format!("every atom needs {} values", points.len())));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("grid values must be finite".into()));
        }
        Ok(Self { points, values })
    }

    /// Samples `f` on `points` for `atoms` atoms.
    pub fn tabulate(points: Vec<Vec<f64>>, atoms: usize, f: impl Fn(usize, &[f64]) -> f64) -> Result<Self> {
        let values = (0..atoms).map(|a| points.iter().map(|p| f(a, p)).collect()).collect();
        Self::new(points, values)
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn atoms(&self) -> usize {
        self.values.len()
    }
}

/// A bound on `|fl(⟨x, y⟩ − c) − (⟨x, y⟩ − c)|`.
fn affine_error(x: &[f64], y: &[f64], c: f64) -> f64 {
    let mag: f64 = x.iter().zip(y).map(|(a, b)| (a * b).abs()).sum::<f64>() + c.abs();
    (x.len() as f64 + 2.0) * f64::EPSILON * mag * 1.01 + f64::MIN_POSITIVE
}

/// `max_i ⟨x_i, y⟩ − f(x_i)` rounded outward (`up = true`) or inward.
fn legendre(f: &GridFunction, dual: &[Vec<f64>], up: bool) -> Vec<Vec<f64>> {
    (0..f.atoms())
        .map(|a| {
            dual.iter()
                .map(|y| {
                    f.points
                        .iter()
                        .zip(&f.values[a])
                        .map(|(x, fx)| {
                            let v = geometry::dot(x, y) - fx;
                            let e = affine_error(x, y, *fx);
                            if up { (v + e).next_up() } else { (v - e).next_down() }
                        })
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect()
        })
        .collect()
}

/// Discrete Legendre transform `f*(y) = max_x ⟨x, y⟩ − f(x)` on the dual
/// grid, rounded upward so that it bounds the exact transform from above.
pub fn fenchel_conjugate(f: &GridFunction, dual: &[Vec<f64>]) -> Result<GridFunction> {
    if dual.is_empty() || dual.iter().any(|y| y.len() != f.dim()) {
        return Err(Error::GridMismatch("dual grid must be non-empty in the primal dimension".into()));
    }
    GridFunction::new(dual.to_vec(), legendre(f, dual, true))
}

/// `(f*, f**)`, with `f**` rounded downward so that `f** ≤ f` holds exactly.
pub fn fenchel_biconjugate(f: &GridFunction, dual: &[Vec<f64>]) -> Result<(GridFunction, GridFunction)> {
    let conj = fenchel_conjugate(f, dual)?;
    let bi = GridFunction::new(f.points.clone(), legendre(&conj, &f.points, false))?;
    Ok((conj, bi))
}

/// One section of a polar.
#[derive(Debug, Clone, PartialEq)]
pub enum PolarSection {
    Bounded(Vec<Vec<f64>>),
    Unbounded { halfspaces: Halfspaces, generators: Generators },
}

impl PolarSection {
    pub fn is_bounded(&self) -> bool {
        matches!(self, PolarSection::Bounded(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarPair {
    pub polar: Vec<PolarSection>,
    pub bipolar: StableSet,
}

impl PolarPair {
    /// The polar as a polytope stable set when every section is bounded.
    pub fn polar_set(&self, dim: usize) -> Option<StableSet> {
        let per_atom = self
            .polar
            .iter()
            .map(|s| match s {
                PolarSection::Bounded(v) => Some(v.clone()),
                PolarSection::Unbounded { .. } => None,
            })
            .collect::<Option<Vec<_>>>()?;
        StableSet::polytope(dim, per_atom).ok()
    }
}

/// `U°_ω = {y : ⟨x, y⟩ ≤ 1 for x ∈ S_ω}` and `S°°_ω = conv(S_ω ∪ {0})`, each
/// obtained by halfspace-to-generator enumeration.
pub fn polar_and_bipolar(s: &StableSet) -> Result<PolarPair> {
    let dim = s.dim();
    if dim > MAX_POLYTOPE_DIM {
        return Err(Error::DimensionUnsupported { dim });
    }
    let mut polar = Vec::with_capacity(s.atoms());
    let mut bipolar = Vec::with_capacity(s.atoms());
    for rep in s.sections() {
        let h = Halfspaces { normals: rep.data().to_vec(), offsets: vec![1.0; rep.len()] };
        let g = geometry::enumerate_generators(&h, dim).expect("0 lies in every polar");
        let mut normals = g.vertices.clone();
        let mut offsets = vec![1.0; g.vertices.len()];
        for r in &g.rays {
            normals.push(r.clone());
            offsets.push(0.0);
        }
        for l in &g.lineality {
            normals.push(l.clone());
            normals.push(l.iter().map(|c| -c).collect());
            offsets.extend([0.0, 0.0]);
        }
        let back = geometry::enumerate_generators(&Halfspaces { normals, offsets }, dim)
            .expect("0 lies in every bipolar");
        let mut vertices = back.vertices;
        vertices.sort_by(|p, q| geometry::lex_cmp(p, q));
        bipolar.push(CompactRep::Polytope(vertices));
        polar.push(if g.is_bounded() {
            let mut v = g.vertices;
            v.sort_by(|p, q| geometry::lex_cmp(p, q));
            PolarSection::Bounded(v)
        } else {
            PolarSection::Unbounded { halfspaces: h, generators: g }
        });
    }
    Ok(PolarPair { polar, bipolar: StableSet::new(dim, bipolar)? })
}
