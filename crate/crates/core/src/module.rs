//! Stable linear algebra over `L⁰`: stable linear combinations, stable
//! bases with per-atom rank profiles, coordinates, module maps, and the
//! Hahn-Banach extension at finite rank.
//!
//! A stable basis is built constructively: on each atom the generators are
//! reduced by Gaussian elimination in generator order, and atoms with the
//! same pivot set form one block of the profile partition.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::algebra::{MeasureAlgebra, Partition};
use crate::error::{Error, Result};
use crate::family::StableFiniteFamily;
use crate::geometry::{self, dot, norm};
use crate::sampling::{self, AuditConfig};
use crate::scalar::L0Scalar;
use crate::vector::L0Vector;

/// Relative pivot threshold for the per-atom rank decision.
pub const RANK_TOL: f64 = 1e-9;
/// Relative residual threshold for span membership.
pub const SPAN_TOL: f64 = 1e-9;

/// `Σ_{1≤m≤n} r_m x_m`, evaluated blockwise.
pub fn stable_lincomb(
    coeffs: &StableFiniteFamily<L0Scalar>,
    vecs: &StableFiniteFamily<L0Vector>,
) -> Result<L0Vector> {
    let dim = vecs
        .blocks()
        .iter()
        .flatten()
        .map(L0Vector::dim)
        .next()
        .ok_or_else(|| Error::InvalidInput("stable combination of an empty family".into()))?;
    lincomb_with_dim(coeffs, vecs, dim)
}

fn lincomb_with_dim(
    coeffs: &StableFiniteFamily<L0Scalar>,
    vecs: &StableFiniteFamily<L0Vector>,
    dim: usize,
) -> Result<L0Vector> {
    let atoms = vecs.partition().algebra().atom_count();
    if !coeffs.same_shape(vecs) {
        let a = (0..atoms).find(|a| coeffs.len_at(*a) != vecs.len_at(*a)).unwrap_or(0);
        return Err(Error::ArityError { expected: vecs.len_at(a), found: coeffs.len_at(a) });
    }
    let mut out = L0Vector::zeros(atoms, dim);
    for a in 0..atoms {
        for (r, x) in coeffs.entries_at(a).iter().zip(vecs.entries_at(a)) {
            if x.dim() != dim || x.atoms() != atoms || r.atoms() != atoms {
                return Err(Error::AlgebraMismatch);
            }
            let c = r.get(a);
            for (o, xi) in out.point_mut(a).iter_mut().zip(x.point(a)) {
                *o += c * xi;
            }
        }
    }
    Ok(out)
}

/// Indices of a maximal independent subset of `gens`, chosen greedily in
/// order, with partial pivoting inside each reduced row.
pub(crate) fn greedy_independent(gens: &[&[f64]]) -> Vec<usize> {
    let mut reduced: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut chosen = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        let row_max = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if row_max == 0.0 {
            continue;
        }
        let mut v = g.to_vec();
        for (pc, e) in &reduced {
            let factor = v[*pc] / e[*pc];
            v.iter_mut().zip(e).for_each(|(vi, ei)| *vi -= factor * ei);
        }
        let (pc, pv) = v
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .map(|(j, x)| (j, *x))
            .unwrap();
        if pv.abs() > RANK_TOL * row_max {
            reduced.push((pc, v));
            chosen.push(i);
        }
    }
    chosen
}

/// A stable basis: on block `A_k` of `profile`, the generators listed in
/// `selected[k]` form a basis of the span on every atom of the block.
#[derive(Debug, Clone, PartialEq)]
pub struct StableBasis {
    dim: usize,
    selected: Vec<Vec<usize>>,
    vectors: StableFiniteFamily<L0Vector>,
}

impl StableBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn profile(&self) -> &Partition {
        self.vectors.partition()
    }

    /// `n_k` per block.
    pub fn ranks(&self) -> Vec<usize> {
        self.selected.iter().map(Vec::len).collect()
    }

    /// Generator indices used on each block.
    pub fn selected(&self) -> &[Vec<usize>] {
        &self.selected
    }

    pub fn vectors(&self) -> &StableFiniteFamily<L0Vector> {
        &self.vectors
    }

    /// The stable dimension `n = Σ 1_{A_k} n_k`, per atom.
    pub fn stable_dimension(&self) -> Vec<usize> {
        self.vectors.lengths()
    }

    pub fn lincomb(&self, coeffs: &StableFiniteFamily<L0Scalar>) -> Result<L0Vector> {
        lincomb_with_dim(coeffs, &self.vectors, self.dim)
    }

    fn columns_at(&self, atom: usize) -> Vec<&[f64]> {
        self.vectors.entries_at(atom).iter().map(|v| v.point(atom)).collect()
    }

    /// Coefficients of `x` in the basis, or the event where `x` leaves the span.
    pub fn coordinates(&self, x: &L0Vector) -> Result<StableFiniteFamily<L0Scalar>> {
        let parts = self.profile();
        let alg = parts.algebra();
        let atoms = alg.atom_count();
        if x.atoms() != atoms || x.dim() != self.dim {
            return Err(Error::AlgebraMismatch);
        }
        let mut coeffs: Vec<Vec<Vec<f64>>> =
            self.selected.iter().map(|s| vec![vec![0.0; atoms]; s.len()]).collect();
        let mut outside = Vec::new();
        for a in 0..atoms {
            let cols = self.columns_at(a);
            let (c, residual) = least_squares(&cols, x.point(a));
            if residual > SPAN_TOL * norm(x.point(a)).max(1.0) {
                outside.push(a);
                continue;
            }
            let k = parts.block_of(a);
            for (m, cm) in c.into_iter().enumerate() {
                coeffs[k][m][a] = cm;
            }
        }
        if !outside.is_empty() {
            return Err(Error::NotInSpan(alg.event(outside)?));
        }
        let blocks = coeffs
            .into_iter()
            .map(|b| b.into_iter().map(L0Scalar::new).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        StableFiniteFamily::new(parts.clone(), blocks)
    }
}

/// Least squares by modified Gram-Schmidt; returns coefficients and the
/// Euclidean residual. Columns must be linearly independent.
fn least_squares(cols: &[&[f64]], b: &[f64]) -> (Vec<f64>, f64) {
    let k = cols.len();
    if k == 0 {
        return (Vec::new(), norm(b));
    }
    let mut q: Vec<Vec<f64>> = cols.iter().map(|c| c.to_vec()).collect();
    let mut r = vec![vec![0.0; k]; k];
    for j in 0..k {
        for i in 0..j {
            let c = dot(&q[i], &q[j]);
            r[i][j] = c;
            let qi = q[i].clone();
            q[j].iter_mut().zip(&qi).for_each(|(x, y)| *x -= c * y);
        }
        let n = norm(&q[j]);
        r[j][j] = n;
        q[j].iter_mut().for_each(|x| *x /= n);
    }
    let mut rhs: Vec<f64> = q.iter().map(|qi| dot(qi, b)).collect();
    for j in (0..k).rev() {
        let s: f64 = (j + 1..k).map(|c| r[j][c] * rhs[c]).sum();
        rhs[j] = (rhs[j] - s) / r[j][j];
    }
    let mut res = b.to_vec();
    for (c, col) in rhs.iter().zip(cols) {
        res.iter_mut().zip(col.iter()).for_each(|(x, y)| *x -= c * y);
    }
    (rhs, norm(&res))
}

/// Per-atom Gaussian elimination over the generators; atoms sharing a pivot
/// set are grouped into one block.
pub fn extract_stable_basis(algebra: &MeasureAlgebra, generators: &[L0Vector]) -> Result<StableBasis> {
    let first = generators
        .first()
        .ok_or_else(|| Error::InvalidInput("no generators".into()))?;
    let dim = first.dim();
    let atoms = algebra.atom_count();
    if generators.iter().any(|g| g.dim() != dim || g.atoms() != atoms) {
        return Err(Error::AlgebraMismatch);
    }
    let chosen: Vec<Vec<usize>> = (0..atoms)
        .map(|a| {
            let pts: Vec<&[f64]> = generators.iter().map(|g| g.point(a)).collect();
            greedy_independent(&pts)
        })
        .collect();
    let profile = Partition::from_labels(algebra, &chosen);
    let selected: Vec<Vec<usize>> = profile
        .blocks()
        .iter()
        .map(|b| chosen[b.atoms().next().expect("non-empty block")].clone())
        .collect();
    let blocks = selected
        .iter()
        .map(|s| s.iter().map(|i| generators[*i].clone()).collect())
        .collect();
    Ok(StableBasis {
        dim,
        selected,
        vectors: StableFiniteFamily::new(profile, blocks)?,
    })
}

/// An `L⁰`-linear map `(L⁰)^{cols} → (L⁰)^{rows}`: one row-major matrix per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleMap {
    rows: usize,
    cols: usize,
    per_atom: Vec<Vec<f64>>,
}

impl ModuleMap {
    pub fn new(rows: usize, cols: usize, per_atom: Vec<Vec<f64>>) -> Result<Self> {
        if per_atom.is_empty() || per_atom.iter().any(|m| m.len() != rows * cols) {
            return Err(Error::InvalidInput("module map matrices have the wrong shape".into()));
        }
        if per_atom.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("module map entries must be finite".into()));
        }
        Ok(Self { rows, cols, per_atom })
    }

    /// The functional `⟨·, y⟩`.
    pub fn functional(y: &L0Vector) -> Self {
        Self { rows: 1, cols: y.dim(), per_atom: y.points().map(<[f64]>::to_vec).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn atoms(&self) -> usize {
        self.per_atom.len()
    }

    pub fn matrix(&self, atom: usize) -> &[f64] {
        &self.per_atom[atom]
    }

    pub fn apply_point(&self, atom: usize, x: &[f64]) -> Vec<f64> {
        self.per_atom[atom].chunks_exact(self.cols).map(|row| dot(row, x)).collect()
    }

    pub fn apply(&self, x: &L0Vector) -> Result<L0Vector> {
        if x.dim() != self.cols || x.atoms() != self.atoms() {
            return Err(Error::AlgebraMismatch);
        }
        Ok(L0Vector::from_fn(self.atoms(), self.rows, |a| self.apply_point(a, x.point(a))))
    }

    /// For a functional (`rows == 1`), its value as a scalar.
    pub fn eval(&self, x: &L0Vector) -> Result<L0Scalar> {
        if self.rows != 1 {
            return Err(Error::InvalidInput("eval needs a functional".into()));
        }
        Ok(self.apply(x)?.coordinate(0))
    }
}

/// A per-atom sublinear functional `p_ω: ℝ^d → ℝ`.
pub trait Gauge {
    fn eval_at(&self, atom: usize, x: &[f64]) -> f64;
}

impl<F: Fn(usize, &[f64]) -> f64> Gauge for F {
    fn eval_at(&self, atom: usize, x: &[f64]) -> f64 {
        self(atom, x)
    }
}

/// Result of [`hahn_banach_extend`].
#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    pub map: ModuleMap,
    /// Per atom, the admissible interval `[lo, hi]` at each added coordinate.
    pub intervals: Vec<Vec<(f64, f64)>>,
}

/// Golden-section search for a convex function of one variable, with an
/// expanding bracket. Returns the minimal value found.
fn min_convex_1d(f: &mut dyn FnMut(f64) -> f64) -> f64 {
    const R_MAX: f64 = 1e8;
    let f0 = f(0.0);
    let mut hi = 1.0;
    while hi < R_MAX && f(hi) < f(hi / 2.0) {
        hi *= 2.0;
    }
    let mut lo = -1.0;
    while lo > -R_MAX && f(lo) < f(lo / 2.0) {
        lo *= 2.0;
    }
    let g = (libm::sqrt(5.0) - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    [fc, fd, f(a), f(b), f0].into_iter().fold(f64::INFINITY, f64::min)
}

/// Infimum of a convex function over `ℝ^k` by nested one-dimensional
/// searches (partial minimization preserves convexity).
fn min_convex(k: usize, f: &mut dyn FnMut(&[f64]) -> f64) -> f64 {
    fn rec(prefix: &mut Vec<f64>, k: usize, f: &mut dyn FnMut(&[f64]) -> f64) -> f64 {
        if prefix.len() == k {
            return f(prefix);
        }
        let mut inner = |t: f64| {
            prefix.push(t);
            let v = rec(prefix, k, f);
            prefix.pop();
            v
        };
        min_convex_1d(&mut inner)
    }
    rec(&mut Vec::with_capacity(k), k, f)
}

fn combo(span: &[Vec<f64>], t: &[f64], extra: &[f64], sign: f64) -> Vec<f64> {
    let mut x: Vec<f64> = extra.iter().map(|v| sign * v).collect();
    for (ti, s) in t.iter().zip(span) {
        x.iter_mut().zip(s).for_each(|(xi, si)| *xi += ti * si);
    }
    x
}

fn check_sublinear(p: &dyn Gauge, atom: usize, dim: usize, cfg: &AuditConfig) -> Result<()> {
    let mut rng = cfg.rng();
    for _ in 0..cfg.samples {
        let x = sampling::random_point(&mut rng, dim, 10.0);
        let y = sampling::random_point(&mut rng, dim, 10.0);
        let t = sampling::uniform(&mut rng, 0.0, 5.0);
        let (px, py) = (p.eval_at(atom, &x), p.eval_at(atom, &y));
        let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
        let slack = 1e-9 * (1.0 + px.abs() + py.abs());
        let homogeneous = (p.eval_at(atom, &tx) - t * px).abs() <= slack * (1.0 + t);
        let subadditive = p.eval_at(atom, &xy) <= px + py + slack;
        if !(homogeneous && subadditive) {
            return Err(Error::NotSublinear { atom });
        }
    }
    Ok(())
}

/// Extends a functional `f` dominated by the gauge on the stable span of
/// `basis` to all of `(L⁰)^d`, keeping the domination.
///
/// Per atom, coordinates `e_1, …, e_d` outside the current span are added
/// one at a time; the value on each new direction is the midpoint of the
/// admissible interval `[sup_x (g(x) − p(x − v)), inf_x (p(x + v) − g(x))]`.
pub fn hahn_banach_extend(
    p: &dyn Gauge,
    basis: &StableBasis,
    f: &ModuleMap,
    cfg: &AuditConfig,
) -> Result<Extension> {
    let dim = basis.dim();
    let atoms = basis.profile().algebra().atom_count();
    if f.rows() != 1 || f.cols() != dim || f.atoms() != atoms {
        return Err(Error::AlgebraMismatch);
    }
    let mut rows = Vec::with_capacity(atoms);
    let mut intervals = Vec::with_capacity(atoms);
    for a in 0..atoms {
        check_sublinear(p, a, dim, cfg)?;
        let row = f.matrix(a);
        let mut span: Vec<Vec<f64>> = basis.columns_at(a).iter().map(|c| c.to_vec()).collect();
        let mut values: Vec<f64> = span.iter().map(|b| dot(row, b)).collect();

        // domination on the subspace, sampled
        let mut rng = cfg.rng();
        for s in 0..cfg.samples + 2 * span.len() {
            let t: Vec<f64> = if s < 2 * span.len() {
                let mut e = vec![0.0; span.len()];
                e[s / 2] = if s % 2 == 0 { 1.0 } else { -1.0 };
                e
            } else {
                (0..span.len()).map(|_| sampling::uniform(&mut rng, -10.0, 10.0)).collect()
            };
            let x = combo(&span, &t, &vec![0.0; dim], 0.0);
            let fx: f64 = t.iter().zip(&values).map(|(ti, vi)| ti * vi).sum();
            let px = p.eval_at(a, &x);
            if fx > px + 1e-9 * (1.0 + px.abs()) {
                return Err(Error::DominationViolated { atom: a });
            }
        }

        let mut steps = Vec::new();
        for j in 0..dim {
            let mut e = vec![0.0; dim];
            e[j] = 1.0;
            let cols: Vec<&[f64]> = span.iter().map(Vec::as_slice).collect();
            let (_, residual) = least_squares(&cols, &e);
            if residual <= SPAN_TOL {
                continue;
            }
            let k = span.len();
            let mut upper = |t: &[f64]| {
                let gx: f64 = t.iter().zip(&values).map(|(ti, vi)| ti * vi).sum();
                p.eval_at(a, &combo(&span, t, &e, 1.0)) - gx
            };
            let hi = min_convex(k, &mut upper);
            let mut lower = |t: &[f64]| {
                let gx: f64 = t.iter().zip(&values).map(|(ti, vi)| ti * vi).sum();
                p.eval_at(a, &combo(&span, t, &e, -1.0)) - gx
            };
            let lo = -min_convex(k, &mut lower);
            if lo > hi + 1e-9 * (1.0 + hi.abs()) {
                return Err(Error::DominationViolated { atom: a });
            }
            steps.push((lo, hi));
            span.push(e);
            values.push(0.5 * (lo + hi));
        }
        // recover the row vector from its values on a basis of ℝ^d
        let extended = if span.is_empty() {
            vec![0.0; dim]
        } else {
            geometry::solve(span.clone(), values.clone())
                .ok_or_else(|| Error::InvalidInput("degenerate extension basis".into()))?
        };
        rows.push(extended);
        intervals.push(steps);
    }
    Ok(Extension { map: ModuleMap::new(1, dim, rows)?, intervals })
}

/// Random dense generators for tests and audits.
pub fn random_generators(rng: &mut impl Rng, atoms: usize, dim: usize, count: usize) -> Vec<L0Vector> {
    (0..count).map(|_| sampling::random_vector(rng, atoms, dim, 1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg(n: usize) -> MeasureAlgebra {
        MeasureAlgebra::uniform(n).unwrap()
    }

    #[test]
    fn lincomb_examples() {
        let al = alg(2);
        let x = L0Vector::new(2, &[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let one = StableFiniteFamily::uniform(&al, vec![L0Scalar::constant(2, 1.0)]);
        let xs = StableFiniteFamily::uniform(&al, vec![x.clone()]);
        assert_eq!(stable_lincomb(&one, &xs).unwrap(), x);
        let zero = StableFiniteFamily::uniform(&al, vec![L0Scalar::zero(2)]);
        assert_eq!(stable_lincomb(&zero, &xs).unwrap(), L0Vector::zeros(2, 2));

        // n = (1, 2): atom 0 sums one term, atom 1 two terms
        let parts = al.atom_partition();
        let y = L0Vector::new(2, &[vec![10.0, 10.0], vec![100.0, 0.0]]).unwrap();
        let vecs = StableFiniteFamily::new(parts.clone(), vec![vec![x.clone()], vec![x.clone(), y.clone()]])
            .unwrap();
        let r = L0Scalar::constant(2, 2.0);
        let coeffs =
            StableFiniteFamily::new(parts, vec![vec![r.clone()], vec![r.clone(), r]]).unwrap();
        let got = stable_lincomb(&coeffs, &vecs).unwrap();
        assert_eq!(got.point(0), &[2.0, 4.0]);
        assert_eq!(got.point(1), &[206.0, 8.0]);
        let short = StableFiniteFamily::uniform(&al, vec![L0Scalar::zero(2)]);
        assert!(matches!(stable_lincomb(&short, &vecs), Err(Error::ArityError { .. })));
    }

    #[test]
    fn canonical_basis_is_indicator_basis() {
        let al = alg(3);
        let gens: Vec<L0Vector> = (0..3).map(|m| L0Vector::unit(3, 3, m)).collect();
        let b = extract_stable_basis(&al, &gens).unwrap();
        assert_eq!(b.stable_dimension(), vec![3, 3, 3]);
        assert_eq!(b.vectors().blocks(), &[gens]);
    }

    #[test]
    fn zero_generator_has_rank_zero() {
        let al = alg(2);
        let b = extract_stable_basis(&al, &[L0Vector::zeros(2, 2)]).unwrap();
        assert_eq!(b.stable_dimension(), vec![0, 0]);
        assert!(b.vectors().length().is_none());
        let c = b.coordinates(&L0Vector::zeros(2, 2)).unwrap();
        assert_eq!(c.lengths(), vec![0, 0]);
    }

    #[test]
    fn per_atom_ranks_differ() {
        let al = alg(2);
        let g1 = L0Vector::new(2, &[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let g2 = L0Vector::new(2, &[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        let b = extract_stable_basis(&al, &[g1, g2]).unwrap();
        assert_eq!(b.stable_dimension(), vec![2, 1]);
        assert_eq!(b.ranks().len(), 2);
    }

    #[test]
    fn coordinates_examples() {
        let al = alg(2);
        let g1 = L0Vector::new(2, &[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let g2 = L0Vector::new(2, &[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        let b = extract_stable_basis(&al, &[g1.clone(), g2]).unwrap();
        let c = b.coordinates(&g1).unwrap();
        assert_eq!(b.lincomb(&c).unwrap(), g1);
        assert_eq!(c.entries_at(0)[0].get(0), 1.0);
        assert_eq!(c.entries_at(0)[1].get(0), 0.0);
        let z = b.coordinates(&L0Vector::zeros(2, 2)).unwrap();
        assert!(z.blocks().iter().flatten().all(|s| s.values().iter().all(|v| *v == 0.0)));
        // (0,1) is outside span{e1} on atom 1 only
        let off = L0Vector::new(2, &[vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        match b.coordinates(&off) {
            Err(Error::NotInSpan(ev)) => assert_eq!(ev.atoms().collect::<Vec<_>>(), vec![1]),
            other => panic!("expected NotInSpan, got {other:?}"),
        }
    }

    fn euclid(_: usize, x: &[f64]) -> f64 {
        norm(x)
    }

    #[test]
    fn hahn_banach_full_space_is_identity() {
        let al = alg(1);
        let gens: Vec<L0Vector> = (0..2).map(|m| L0Vector::unit(1, 2, m)).collect();
        let b = extract_stable_basis(&al, &gens).unwrap();
        let f = ModuleMap::new(1, 2, vec![vec![0.3, -0.4]]).unwrap();
        let ext = hahn_banach_extend(&euclid, &b, &f, &AuditConfig::default()).unwrap();
        assert_eq!(ext.map, f);
        assert!(ext.intervals[0].is_empty());
    }

    #[test]
    fn hahn_banach_zero_functional() {
        let al = alg(2);
        let b = extract_stable_basis(&al, &[L0Vector::unit(2, 2, 0)]).unwrap();
        let f = ModuleMap::new(1, 2, vec![vec![0.0, 0.0]; 2]).unwrap();
        let ext = hahn_banach_extend(&euclid, &b, &f, &AuditConfig::default()).unwrap();
        for a in 0..2 {
            let row = ext.map.matrix(a);
            assert_eq!(row[0], 0.0);
            assert!(row[1].abs() < 1e-9);
        }
    }

    #[test]
    fn hahn_banach_norming_functional() {
        let al = alg(2);
        let b = extract_stable_basis(&al, &[L0Vector::unit(2, 2, 0)]).unwrap();
        let f = ModuleMap::new(1, 2, vec![vec![1.0, 0.0]; 2]).unwrap();
        let ext = hahn_banach_extend(&euclid, &b, &f, &AuditConfig::default()).unwrap();
        for a in 0..2 {
            let row = ext.map.matrix(a);
            assert_eq!(row[0], 1.0);
            assert!(norm(row) <= 1.0 + 1e-6, "row {row:?}");
            let (lo, hi) = ext.intervals[a][0];
            assert!(lo <= hi + 1e-9);
        }
    }

    #[test]
    fn hahn_banach_rejects_undominated() {
        let al = alg(1);
        let b = extract_stable_basis(&al, &[L0Vector::unit(1, 2, 0)]).unwrap();
        let f = ModuleMap::new(1, 2, vec![vec![2.0, 0.0]]).unwrap();
        assert_eq!(
            hahn_banach_extend(&euclid, &b, &f, &AuditConfig::default()),
            Err(Error::DominationViolated { atom: 0 })
        );
        let not_sublinear = |_: usize, x: &[f64]| dot(x, x);
        assert_eq!(
            hahn_banach_extend(&not_sublinear, &b, &f, &AuditConfig::default()).err(),
            Some(Error::NotSublinear { atom: 0 })
        );
    }
}
