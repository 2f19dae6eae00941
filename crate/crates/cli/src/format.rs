//! JSON file formats and their conversion into core objects.
//!
//! Every conversion carries the JSON path of the value being converted, so
//! a rejected input is reported as e.g. `sets.K.per_atom[1]`.

use std::path::Path;

use l0stable_core::compactness::StableMetric;
use l0stable_core::module::ModuleMap;
use l0stable_core::optimization::{AffineMap, Builtin};
use l0stable_core::seminorm::{Exponent, Seminorm};
use l0stable_core::{CompactRep, L0Scalar, L0Vector, MeasureAlgebra, Partition, StableSet};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

/// Reads and deserializes a JSON file, reporting the failing field path.
pub fn read_json<T: DeserializeOwned>(file: &Path) -> CliResult<T> {
    let name = file.display().to_string();
    let text = std::fs::read_to_string(file).map_err(|e| CliError::parse(&name, e))?;
    parse_json(&text, "$").map_err(|e| match e {
        CliError::Parse { path, message } => CliError::parse(path, format!("{name}: {message}")),
        other => other,
    })
}

pub fn parse_json<T: DeserializeOwned>(text: &str, root: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = join(root, &e.path().to_string());
        CliError::parse(path, e.inner())
    })
}

pub fn from_value<T: DeserializeOwned>(v: &Value, root: &str) -> CliResult<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = join(root, &e.path().to_string());
        CliError::parse(path, e.inner())
    })
}

fn join(root: &str, tail: &str) -> String {
    match (root, tail) {
        (r, ".") => r.to_string(),
        ("$", t) => t.to_string(),
        (r, t) if t.starts_with('[') => format!("{r}{t}"),
        (r, t) => format!("{r}.{t}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub atoms: usize,
    /// Atom probabilities; uniform when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
}

impl AlgebraSpec {
    pub fn uniform(atoms: usize) -> Self {
        Self { atoms, probs: None }
    }

    pub fn build(&self, path: &str) -> CliResult<MeasureAlgebra> {
        let alg = match &self.probs {
            None => MeasureAlgebra::uniform(self.atoms),
            Some(p) => {
                if p.len() != self.atoms {
                    return Err(CliError::invalid(
                        format!("{path}.probs"),
                        format!("expected {} probabilities, found {}", self.atoms, p.len()),
                    ));
                }
                MeasureAlgebra::new(p.clone())
            }
        };
        alg.map_err(|e| CliError::invalid(path, e))
    }
}

/// A per-atom scalar: one number for every atom, or a constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarSpec {
    Constant(f64),
    PerAtom(Vec<f64>),
}

impl ScalarSpec {
    pub fn build(&self, atoms: usize, path: &str) -> CliResult<L0Scalar> {
        match self {
            ScalarSpec::Constant(c) => {
                L0Scalar::new(vec![*c; atoms]).map_err(|e| CliError::invalid(path, e))
            }
            ScalarSpec::PerAtom(v) => {
                check_len(v.len(), atoms, path)?;
                L0Scalar::new(v.clone()).map_err(|e| CliError::invalid(path, e))
            }
        }
    }
}

/// A per-atom vector: one point for every atom, or a single shared point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Shared(Vec<f64>),
    PerAtom(Vec<Vec<f64>>),
}

impl VectorSpec {
    pub fn build(&self, atoms: usize, path: &str) -> CliResult<L0Vector> {
        let points = match self {
            VectorSpec::Shared(p) => vec![p.clone(); atoms],
            VectorSpec::PerAtom(ps) => {
                check_len(ps.len(), atoms, path)?;
                ps.clone()
            }
        };
        let dim = points.first().map_or(0, Vec::len);
        for (a, p) in points.iter().enumerate() {
            if p.len() != dim || dim == 0 {
                return Err(CliError::invalid(format!("{path}[{a}]"), "points need one common dimension ≥ 1"));
            }
        }
        L0Vector::new(dim, &points).map_err(|e| CliError::invalid(path, e))
    }
}

fn check_len(found: usize, atoms: usize, path: &str) -> CliResult<()> {
    if found != atoms {
        return Err(CliError::invalid(path, format!("expected {atoms} per-atom entries, found {found}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SectionSpec {
    Points(Vec<Vec<f64>>),
    Polytope(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    pub dim: usize,
    pub per_atom: Vec<SectionSpec>,
}

impl SetSpec {
    pub fn build(&self, atoms: usize, path: &str) -> CliResult<StableSet> {
        check_len(self.per_atom.len(), atoms, &format!("{path}.per_atom"))?;
        for (a, s) in self.per_atom.iter().enumerate() {
            let data = match s {
                SectionSpec::Points(p) | SectionSpec::Polytope(p) => p,
            };
            let at = format!("{path}.per_atom[{a}]");
            if data.is_empty() {
                return Err(CliError::invalid(at, "sections must be non-empty"));
            }
            if let Some(i) = data.iter().position(|p| p.len() != self.dim) {
                return Err(CliError::invalid(format!("{at}[{i}]"), format!("expected a point of dimension {}", self.dim)));
            }
        }
        let reps = self
            .per_atom
            .iter()
            .map(|s| match s {
                SectionSpec::Points(p) => CompactRep::Points(p.clone()),
                SectionSpec::Polytope(p) => CompactRep::Polytope(p.clone()),
            })
            .collect();
        StableSet::new(self.dim, reps).map_err(|e| CliError::invalid(path, e))
    }

    pub fn from_set(k: &StableSet) -> Self {
        let per_atom = k
            .sections()
            .iter()
            .map(|s| match s {
                CompactRep::Points(p) => SectionSpec::Points(p.clone()),
                CompactRep::Polytope(p) => SectionSpec::Polytope(p.clone()),
            })
            .collect();
        Self { dim: k.dim(), per_atom }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExponentSpec {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl From<ExponentSpec> for Exponent {
    fn from(e: ExponentSpec) -> Self {
        match e {
            ExponentSpec::One => Exponent::One,
            ExponentSpec::Two => Exponent::Two,
            ExponentSpec::Inf => Exponent::Inf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeminormSpec {
    WeightedNorm { weights: VectorSpec, exponent: ExponentSpec },
    Euclidean { dim: usize },
    Pairing { y: VectorSpec },
    ConditionalLp { blocks: Vec<Vec<usize>>, p: f64 },
    SupHull { members: Vec<SeminormSpec> },
    Concat { blocks: Vec<Vec<usize>>, members: Vec<SeminormSpec> },
}

pub fn build_partition(alg: &MeasureAlgebra, blocks: &[Vec<usize>], path: &str) -> CliResult<Partition> {
    let events = blocks
        .iter()
        .enumerate()
        .map(|(k, b)| alg.event(b.iter().copied()).map_err(|e| CliError::invalid(format!("{path}[{k}]"), e)))
        .collect::<CliResult<Vec<_>>>()?;
    Partition::new(alg, events).map_err(|e| CliError::invalid(path, e))
}

impl SeminormSpec {
    pub fn build(&self, alg: &MeasureAlgebra, path: &str) -> CliResult<Seminorm> {
        let atoms = alg.atom_count();
        let invalid = |e| CliError::invalid(path, e);
        match self {
            SeminormSpec::WeightedNorm { weights, exponent } => {
                let w = weights.build(atoms, &format!("{path}.weights"))?;
                Seminorm::weighted_norm(w, (*exponent).into()).map_err(invalid)
            }
            SeminormSpec::Euclidean { dim } => {
                if *dim == 0 {
                    return Err(CliError::invalid(format!("{path}.dim"), "dimension must be ≥ 1"));
                }
                Ok(Seminorm::euclidean(atoms, *dim))
            }
            SeminormSpec::Pairing { y } => Ok(Seminorm::Pairing(y.build(atoms, &format!("{path}.y"))?)),
            SeminormSpec::ConditionalLp { blocks, p } => {
                let sub = build_partition(alg, blocks, &format!("{path}.blocks"))?;
                Seminorm::conditional_lp(sub, *p).map_err(invalid)
            }
            SeminormSpec::SupHull { members } => {
                let ms = build_members(alg, members, &format!("{path}.members"))?;
                Seminorm::sup_hull(ms).map_err(invalid)
            }
            SeminormSpec::Concat { blocks, members } => {
                let parts = build_partition(alg, blocks, &format!("{path}.blocks"))?;
                let ms = build_members(alg, members, &format!("{path}.members"))?;
                Seminorm::concat(parts, ms).map_err(invalid)
            }
        }
    }
}

pub fn build_members(alg: &MeasureAlgebra, specs: &[SeminormSpec], path: &str) -> CliResult<Vec<Seminorm>> {
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| s.build(alg, &format!("{path}[{i}]")))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant { value: ScalarSpec },
    Quadratic { center: VectorSpec, #[serde(default = "one")] scale: ScalarSpec },
    Norm { q: ExponentSpec },
    Affine { a: VectorSpec, #[serde(default = "zero")] b: ScalarSpec },
}

fn one() -> ScalarSpec {
    ScalarSpec::Constant(1.0)
}

fn zero() -> ScalarSpec {
    ScalarSpec::Constant(0.0)
}

impl FunctionSpec {
    pub fn build(&self, atoms: usize, path: &str) -> CliResult<Builtin> {
        Ok(match self {
            FunctionSpec::Constant { value } => Builtin::Constant(value.build(atoms, &format!("{path}.value"))?),
            FunctionSpec::Quadratic { center, scale } => Builtin::Quadratic {
                center: center.build(atoms, &format!("{path}.center"))?,
                scale: scale.build(atoms, &format!("{path}.scale"))?,
            },
            FunctionSpec::Norm { q } => Builtin::Norm {
                q: match q {
                    ExponentSpec::One => 1,
                    ExponentSpec::Two => 2,
                    ExponentSpec::Inf => 0,
                },
            },
            FunctionSpec::Affine { a, b } => Builtin::Affine {
                a: a.build(atoms, &format!("{path}.a"))?,
                b: b.build(atoms, &format!("{path}.b"))?,
            },
        })
    }

    /// Parses `--fn` text: either a JSON object, or a builtin name followed
    /// by `key=value` tokens whose values are comma-separated numbers shared
    /// by all atoms, e.g. `quadratic center=1,2 scale=0.5`.
    pub fn parse_inline(text: &str) -> CliResult<Self> {
        let text = text.trim();
        if text.starts_with('{') {
            return parse_json(text, "--fn");
        }
        let mut tokens = text.split_whitespace();
        let name = tokens.next().ok_or_else(|| CliError::parse("--fn", "empty function"))?;
        let mut obj = serde_json::Map::new();
        obj.insert("kind".into(), json!(name));
        for tok in tokens {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| CliError::parse("--fn", format!("expected key=value, found {tok:?}")))?;
            let value = if key == "q" {
                json!(val)
            } else {
                let nums = val
                    .split(',')
                    .map(|s| s.parse::<f64>().map_err(|e| CliError::parse(format!("--fn.{key}"), e)))
                    .collect::<CliResult<Vec<f64>>>()?;
                match (key, nums.as_slice()) {
                    ("center" | "a", _) => json!(nums),
                    (_, [c]) => json!(c),
                    _ => json!(nums),
                }
            };
            obj.insert(key.into(), value);
        }
        from_value(&Value::Object(obj), "--fn")
    }
}

/// A row-major square matrix, shared or given per atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Shared(Vec<f64>),
    PerAtom(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    /// `T(x) = A x + b`.
    Affine { matrix: MatrixSpec, shift: VectorSpec },
    /// `T(x) = a·x + b` with a scalar slope.
    ScalarAffine { a: ScalarSpec, b: VectorSpec },
}

impl MapSpec {
    pub fn build(&self, atoms: usize, path: &str) -> CliResult<AffineMap> {
        match self {
            MapSpec::Affine { matrix, shift } => {
                let b = shift.build(atoms, &format!("{path}.shift"))?;
                let d = b.dim();
                let mpath = format!("{path}.matrix");
                let per_atom = match matrix {
                    MatrixSpec::Shared(m) => vec![m.clone(); atoms],
                    MatrixSpec::PerAtom(ms) => {
                        check_len(ms.len(), atoms, &mpath)?;
                        ms.clone()
                    }
                };
                if let Some(a) = per_atom.iter().position(|m| m.len() != d * d) {
                    return Err(CliError::invalid(format!("{mpath}[{a}]"), format!("expected {} entries", d * d)));
                }
                let linear = ModuleMap::new(d, d, per_atom).map_err(|e| CliError::invalid(&mpath, e))?;
                AffineMap::new(linear, b).map_err(|e| CliError::invalid(path, e))
            }
            MapSpec::ScalarAffine { a, b } => {
                let a = a.build(atoms, &format!("{path}.a"))?;
                let b = b.build(atoms, &format!("{path}.b"))?;
                AffineMap::scalar(&a, b).map_err(|e| CliError::invalid(path, e))
            }
        }
    }
}

/// Metric choice for nets: Euclidean, or induced by a named seminorm family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricSpec {
    Named(String),
    Seminorm { seminorm: SeminormSpec },
}

impl MetricSpec {
    pub fn build(&self, alg: &MeasureAlgebra, path: &str) -> CliResult<StableMetric> {
        match self {
            MetricSpec::Named(n) if n == "euclidean" => Ok(StableMetric::EuclideanL0),
            MetricSpec::Named(n) => Err(CliError::invalid(path, format!("unknown metric {n:?}"))),
            MetricSpec::Seminorm { seminorm } => {
                let p = seminorm.build(alg, &format!("{path}.seminorm"))?;
                StableMetric::seminorm_induced(p).map_err(|e| CliError::at(path, e))
            }
        }
    }
}

pub fn scalar_json(x: &L0Scalar) -> Value {
    json!(x.values())
}

pub fn vector_json(x: &L0Vector) -> Value {
    json!(x.points().map(<[f64]>::to_vec).collect::<Vec<_>>())
}

pub fn set_json(k: &StableSet) -> Value {
    serde_json::to_value(SetSpec::from_set(k)).expect("plain data serializes")
}

pub fn event_json(ev: &l0stable_core::Event) -> Value {
    json!(ev.atoms().collect::<Vec<_>>())
}

pub fn partition_json(p: &Partition) -> Value {
    Value::Array(p.blocks().iter().map(event_json).collect())
}
