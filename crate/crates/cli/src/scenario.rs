//! Scenario files: one measure algebra, named objects over it, and
//! per-command payloads that refer to the objects by name.

use std::collections::BTreeMap;
use std::path::Path;

use l0stable_core::optimization::{AffineMap, Builtin};
use l0stable_core::seminorm::Seminorm;
use l0stable_core::{MeasureAlgebra, StableSet};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::format::{build_members, read_json, AlgebraSpec, FunctionSpec, MapSpec, SeminormSpec, SetSpec};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub algebra: Option<AlgebraSpec>,
    #[serde(default)]
    pub sets: BTreeMap<String, SetSpec>,
    #[serde(default)]
    pub seminorms: BTreeMap<String, Vec<SeminormSpec>>,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionSpec>,
    #[serde(default)]
    pub maps: BTreeMap<String, MapSpec>,
    /// Payload per command name.
    #[serde(default)]
    pub commands: BTreeMap<String, Value>,
}

/// A validated scenario: every object is built over the scenario's algebra.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub algebra: MeasureAlgebra,
    pub sets: BTreeMap<String, StableSet>,
    pub families: BTreeMap<String, Vec<Seminorm>>,
    pub functions: BTreeMap<String, Builtin>,
    pub maps: BTreeMap<String, AffineMap>,
}

impl Scenario {
    pub fn load(file: &Path) -> CliResult<Self> {
        Self::build(read_json(file)?)
    }

    /// Builds every named object. Without an explicit algebra, the uniform
    /// one on the atom count of the first set is used.
    pub fn build(spec: ScenarioSpec) -> CliResult<Self> {
        let alg_spec = match &spec.algebra {
            Some(a) => a.clone(),
            None => match spec.sets.values().next() {
                Some(k) => AlgebraSpec::uniform(k.per_atom.len()),
                None => return Err(CliError::invalid("algebra", "missing algebra and no set to infer it from")),
            },
        };
        let algebra = alg_spec.build("algebra")?;
        let atoms = algebra.atom_count();
        let sets = spec
            .sets
            .iter()
            .map(|(n, s)| Ok((n.clone(), s.build(atoms, &format!("sets.{n}"))?)))
            .collect::<CliResult<_>>()?;
        let families = spec
            .seminorms
            .iter()
            .map(|(n, ms)| {
                let path = format!("seminorms.{n}");
                if ms.is_empty() {
                    return Err(CliError::invalid(path, "empty seminorm family"));
                }
                Ok((n.clone(), build_members(&algebra, ms, &path)?))
            })
            .collect::<CliResult<_>>()?;
        let functions = spec
            .functions
            .iter()
            .map(|(n, f)| Ok((n.clone(), f.build(atoms, &format!("functions.{n}"))?)))
            .collect::<CliResult<_>>()?;
        let maps = spec
            .maps
            .iter()
            .map(|(n, m)| Ok((n.clone(), m.build(atoms, &format!("maps.{n}"))?)))
            .collect::<CliResult<_>>()?;
        Ok(Self { spec, algebra, sets, families, functions, maps })
    }

    pub fn payload(&self, command: &str) -> CliResult<&Value> {
        self.spec
            .commands
            .get(command)
            .ok_or_else(|| CliError::invalid(format!("commands.{command}"), "no payload for this command"))
    }

    pub fn set(&self, name: &str, path: &str) -> CliResult<&StableSet> {
        lookup(&self.sets, name, path, "set")
    }

    pub fn family(&self, name: &str, path: &str) -> CliResult<&[Seminorm]> {
        lookup(&self.families, name, path, "seminorm family").map(Vec::as_slice)
    }

    pub fn function(&self, name: &str, path: &str) -> CliResult<&Builtin> {
        lookup(&self.functions, name, path, "function")
    }

    pub fn map(&self, name: &str, path: &str) -> CliResult<&AffineMap> {
        lookup(&self.maps, name, path, "map")
    }
}

fn lookup<'a, T>(table: &'a BTreeMap<String, T>, name: &str, path: &str, what: &str) -> CliResult<&'a T> {
    table
        .get(name)
        .ok_or_else(|| CliError::invalid(path, format!("unknown {what} {name:?}")))
}
