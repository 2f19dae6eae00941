//! Small dense geometry in `ℝ^d`: minimum-norm points of polytopes (Wolfe's
//! algorithm), extreme-point extraction, and vertex/ray enumeration of
//! halfspace systems. Dimensions here are tiny (at most 3 for polytopes),
//! so everything is brute force over index subsets.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

pub const MAX_POLYTOPE_DIM: usize = 3;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Bit pattern key with `-0.0` folded onto `0.0`, so key equality is `==`.
pub(crate) fn point_key(p: &[f64]) -> Vec<u64> {
    p.iter().map(|c| if *c == 0.0 { 0 } else { c.to_bits() }).collect()
}

/// Removes exact duplicates, keeping first appearances in order.
pub(crate) fn dedup_points(points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut seen = BTreeSet::new();
    points.into_iter().filter(|p| seen.insert(point_key(p))).collect()
}

pub fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Solves a square system by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `1e-12` times the matrix scale.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n).max_by(|i, j| a[*i][col].abs().total_cmp(&a[*j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for c in col..n {
                    a[row][c] -= factor * a[col][c];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// The point of minimum Euclidean norm in `conv(points)`, together with
/// convex weights over the active points.
#[derive(Debug, Clone)]
pub struct MinNormPoint {
    pub point: Vec<f64>,
    pub weights: Vec<(usize, f64)>,
}

/// Affine minimum-norm combination of the given points.
fn affine_min_norm(points: &[&[f64]]) -> Option<Vec<f64>> {
    let m = points.len();
    let mut a = vec![vec![0.0; m + 1]; m + 1];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = dot(points[i], points[j]);
        }
        a[i][m] = 1.0;
        a[m][i] = 1.0;
    }
    let mut b = vec![0.0; m + 1];
    b[m] = 1.0;
    solve(a, b).map(|mut x| {
        x.truncate(m);
        x
    })
}

fn combine(points: &[Vec<f64>], active: &[usize], lambda: &[f64]) -> Vec<f64> {
    let dim = points[active[0]].len();
    let mut x = vec![0.0; dim];
    for (idx, l) in active.iter().zip(lambda) {
        for (xi, pi) in x.iter_mut().zip(&points[*idx]) {
            *xi += l * pi;
        }
    }
    x
}

/// Wolfe's minimum-norm-point algorithm.
pub fn min_norm_point(points: &[Vec<f64>]) -> MinNormPoint {
    assert!(!points.is_empty(), "min_norm_point of an empty set");
    let max_sq = points.iter().map(|p| dot(p, p)).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let start = (0..points.len())
        .min_by(|i, j| dot(&points[*i], &points[*i]).total_cmp(&dot(&points[*j], &points[*j])))
        .unwrap();
    let mut active = vec![start];
    let mut lambda = vec![1.0];
    let mut x = points[start].clone();

    for _ in 0..(50 * points.len() + 100) {
        let j = (0..points.len())
            .min_by(|i, k| dot(&x, &points[*i]).total_cmp(&dot(&x, &points[*k])))
            .unwrap();
        if dot(&x, &x) - dot(&x, &points[j]) <= 1e-12 * max_sq || active.contains(&j) {
            break;
        }
        active.push(j);
        lambda.push(0.0);
        loop {
            let pts: Vec<&[f64]> = active.iter().map(|i| points[*i].as_slice()).collect();
            let Some(alpha) = affine_min_norm(&pts) else {
                // affinely dependent corral: drop the newest point and stop
                active.pop();
                lambda.pop();
                break;
            };
            if alpha.iter().all(|a| *a > 1e-12) {
                lambda = alpha;
                break;
            }
            let mut theta = 1.0f64;
            let mut argmin = None;
            for (i, (a, l)) in alpha.iter().zip(&lambda).enumerate() {
                if *a <= 1e-12 {
                    let denom = l - a;
                    let t = if denom > 0.0 { l / denom } else { 0.0 };
                    if argmin.is_none() || t < theta {
                        theta = t;
                        argmin = Some(i);
                    }
                }
            }
            let theta = theta.clamp(0.0, 1.0);
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = theta * a + (1.0 - theta) * *l;
            }
            let drop = argmin.unwrap();
            let mut keep_active = Vec::with_capacity(active.len());
            let mut keep_lambda = Vec::with_capacity(active.len());
            for (i, (idx, l)) in active.iter().zip(&lambda).enumerate() {
                if i != drop && *l > 1e-12 {
                    keep_active.push(*idx);
                    keep_lambda.push(*l);
                }
            }
            let total: f64 = keep_lambda.iter().sum();
            if keep_active.is_empty() || total <= 0.0 {
                keep_active = vec![active[drop]];
                keep_lambda = vec![1.0];
            } else {
                keep_lambda.iter_mut().for_each(|l| *l /= total);
            }
            active = keep_active;
            lambda = keep_lambda;
        }
        x = combine(points, &active, &lambda);
    }
    MinNormPoint {
        point: x,
        weights: active.into_iter().zip(lambda).collect(),
    }
}

/// Euclidean distance from `p` to `conv(points)`.
pub fn distance_to_hull(p: &[f64], points: &[Vec<f64>]) -> f64 {
    let shifted: Vec<Vec<f64>> = points.iter().map(|q| sub(q, p)).collect();
    norm(&min_norm_point(&shifted).point)
}

/// The extreme points of `conv(points)`, in input order.
pub fn extreme_points(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let pts = dedup_points(points.to_vec());
    if pts.len() <= 1 {
        return pts;
    }
    let scale = pts.iter().map(|p| norm(p)).fold(1.0f64, f64::max);
    (0..pts.len())
        .filter(|i| {
            let others: Vec<Vec<f64>> =
                pts.iter().enumerate().filter(|(j, _)| j != i).map(|(_, q)| q.clone()).collect();
            distance_to_hull(&pts[*i], &others) > 1e-10 * scale
        })
        .map(|i| pts[i].clone())
        .collect()
}

/// A halfspace system `{y : ⟨normals[i], y⟩ ≤ offsets[i]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspaces {
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

/// Generators of a polyhedron: `conv(vertices) + cone(rays) + span(lineality)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generators {
    pub vertices: Vec<Vec<f64>>,
    pub rays: Vec<Vec<f64>>,
    pub lineality: Vec<Vec<f64>>,
}

impl Generators {
    pub fn is_bounded(&self) -> bool {
        self.rays.is_empty() && self.lineality.is_empty()
    }
}

fn gram_schmidt(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let n0 = norm(v);
        if n0 == 0.0 {
            continue;
        }
        let mut w: Vec<f64> = v.iter().map(|c| c / n0).collect();
        // two passes for orthogonality
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let n = norm(&w);
        if n > tol {
            basis.push(w.into_iter().map(|c| c / n).collect());
        }
    }
    basis
}

fn subsets(m: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, f);
            cur.pop();
        }
    }
    rec(0, m, k, &mut Vec::with_capacity(k), f);
}

fn push_unique(list: &mut Vec<Vec<f64>>, p: Vec<f64>, tol: f64) {
    if list.iter().all(|q| dist(q, &p) > tol) {
        list.push(p);
    }
}

/// A direction spanning the null space of `k − 1` independent rows in `ℝ^k`.
fn null_direction(rows: &[Vec<f64>], k: usize) -> Option<Vec<f64>> {
    let r = match k {
        1 => vec![1.0],
        2 => vec![-rows[0][1], rows[0][0]],
        3 => vec![
            rows[0][1] * rows[1][2] - rows[0][2] * rows[1][1],
            rows[0][2] * rows[1][0] - rows[0][0] * rows[1][2],
            rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        ],
        _ => return None,
    };
    let n = norm(&r);
    (n > 1e-10).then(|| r.into_iter().map(|c| c / n).collect())
}

const FEAS_TOL: f64 = 1e-9;

/// Vertex, extreme-ray and lineality enumeration for `dim ≤ 3`.
///
/// Returns `None` when the system is infeasible.
pub fn enumerate_generators(h: &Halfspaces, dim: usize) -> Option<Generators> {
    assert!(dim <= MAX_POLYTOPE_DIM);
    // normalize rows; zero rows are either vacuous or infeasible
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (a, b) in h.normals.iter().zip(&h.offsets) {
        let n = norm(a);
        if n <= 1e-14 {
            if *b < -FEAS_TOL {
                return None;
            }
            continue;
        }
        rows.push(a.iter().map(|c| c / n).collect::<Vec<_>>());
        rhs.push(b / n);
    }
    let q = gram_schmidt(&rows, 1e-10);
    let k = q.len();
    let mut unit: Vec<Vec<f64>> = q.clone();
    unit.extend((0..dim).map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect()));
    let lineality: Vec<Vec<f64>> = gram_schmidt(&unit, 1e-10).split_off(k);

    let reduced: Vec<Vec<f64>> = rows.iter().map(|a| q.iter().map(|qi| dot(a, qi)).collect()).collect();
    let lift = |z: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; dim];
        for (zi, qi) in z.iter().zip(&q) {
            y.iter_mut().zip(qi).for_each(|(yj, qj)| *yj += zi * qj);
        }
        y
    };
    let feasible = |z: &[f64]| {
        reduced.iter().zip(&rhs).all(|(a, b)| dot(a, z) <= b + FEAS_TOL * (1.0 + b.abs()))
    };

    let mut vertices = Vec::new();
    if k == 0 {
        if rhs.iter().any(|b| *b < -FEAS_TOL) {
            return None;
        }
        vertices.push(vec![0.0; dim]);
    } else {
        subsets(reduced.len(), k, &mut |idx| {
            let a: Vec<Vec<f64>> = idx.iter().map(|i| reduced[*i].clone()).collect();
            let b: Vec<f64> = idx.iter().map(|i| rhs[*i]).collect();
            if let Some(z) = solve(a, b) {
                if feasible(&z) {
                    push_unique(&mut vertices, lift(&z), 1e-9);
                }
            }
        });
        if vertices.is_empty() {
            return None;
        }
    }

    let mut rays = Vec::new();
    if k >= 1 {
        let cone_ok = |r: &[f64]| reduced.iter().all(|a| dot(a, r) <= FEAS_TOL);
        let mut consider = |r: Vec<f64>| {
            for s in [1.0, -1.0] {
                let cand: Vec<f64> = r.iter().map(|c| s * c).collect();
                if cone_ok(&cand) {
                    push_unique(&mut rays, lift(&cand), 1e-9);
                }
            }
        };
        if k == 1 {
            consider(vec![1.0]);
        } else {
            subsets(reduced.len(), k - 1, &mut |idx| {
                let sel: Vec<Vec<f64>> = idx.iter().map(|i| reduced[*i].clone()).collect();
                if gram_schmidt(&sel, 1e-10).len() == k - 1 {
                    if let Some(r) = null_direction(&sel, k) {
                        consider(r);
                    }
                }
            });
        }
    }
    Some(Generators { vertices, rays, lineality })
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let one_sided = |x: &[Vec<f64>], y: &[Vec<f64>]| {
        x.iter()
            .map(|p| y.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0f64, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}
