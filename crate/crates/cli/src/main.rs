use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use l0stable::commands::{self, RunConfig, Sections, COMMANDS};
use l0stable::error::{CliError, CliResult};
use l0stable::format::{read_json, AlgebraSpec, FunctionSpec, SetSpec};
use l0stable::scenario::{Scenario, ScenarioSpec};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "l0stable", version, about = "Stable compactness over finite measure algebras")]
struct Cli {
    /// Seed for every sampling audit.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sampling audits (0 = all cores).
    #[arg(long, global = true, env = "STABLE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Runs one command against the payload stored in a scenario file.
    Run {
        #[arg(value_parser = COMMANDS)]
        command: String,
        scenario: PathBuf,
    },
    CheckCompact {
        #[arg(long)]
        set: PathBuf,
        /// Seminorm family file measuring the radius; Euclidean when absent.
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long)]
        algebra: Option<PathBuf>,
    },
    Argmin {
        #[arg(long)]
        set: PathBuf,
        /// Builtin function: JSON, or e.g. `quadratic center=1,2 scale=0.5`.
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        algebra: Option<PathBuf>,
    },
    Fixpoint {
        #[arg(long)]
        spec: PathBuf,
    },
    Separate {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        algebra: Option<PathBuf>,
    },
    Bipolar {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        algebra: Option<PathBuf>,
    },
    Basis {
        #[arg(long)]
        generators: PathBuf,
    },
    Net {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        algebra: Option<PathBuf>,
    },
    DemoClusterLemma {
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        n: usize,
    },
    AuditTopology {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        query: PathBuf,
    },
}

impl Cmd {
    fn name(&self) -> &str {
        match self {
            Cmd::Run { command, .. } => command,
            Cmd::CheckCompact { .. } => "check-compact",
            Cmd::Argmin { .. } => "argmin",
            Cmd::Fixpoint { .. } => "fixpoint",
            Cmd::Separate { .. } => "separate",
            Cmd::Bipolar { .. } => "bipolar",
            Cmd::Basis { .. } => "basis",
            Cmd::Net { .. } => "net",
            Cmd::DemoClusterLemma { .. } => "demo-cluster-lemma",
            Cmd::AuditTopology { .. } => "audit-topology",
        }
    }
}

fn algebra_from(file: &Option<PathBuf>) -> CliResult<Option<AlgebraSpec>> {
    file.as_deref().map(read_json).transpose()
}

fn with_sets(algebra: Option<AlgebraSpec>, sets: &[(&str, &Path)]) -> CliResult<ScenarioSpec> {
    let mut spec = ScenarioSpec { algebra, ..Default::default() };
    for (name, file) in sets {
        spec.sets.insert((*name).into(), read_json::<SetSpec>(file)?);
    }
    Ok(spec)
}

/// Splits an object into the named keys and the rest.
fn take(obj: &mut Map<String, Value>, key: &str) -> Option<Value> {
    obj.remove(key)
}

/// Atom count of a per-atom array, if the value is one.
fn per_atom_len(v: Option<&Value>) -> Option<usize> {
    match v? {
        Value::Array(xs) if xs.iter().all(Value::is_array) => Some(xs.len()),
        _ => None,
    }
}

fn infer_algebra(explicit: Option<Value>, hint: Option<usize>, path: &str) -> CliResult<AlgebraSpec> {
    match (explicit, hint) {
        (Some(v), _) => l0stable::format::from_value(&v, path),
        (None, Some(n)) => Ok(AlgebraSpec::uniform(n)),
        (None, None) => Err(CliError::invalid(path, "missing algebra; it cannot be inferred")),
    }
}

fn object(v: Value, path: &str) -> CliResult<Map<String, Value>> {
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::parse(path, "expected a JSON object")),
    }
}

fn build(cmd: &Cmd) -> CliResult<(Scenario, String)> {
    let (spec, payload) = match cmd {
        Cmd::Run { command, scenario } => return Ok((Scenario::load(scenario)?, command.clone())),
        Cmd::CheckCompact { set, family, algebra } => {
            let mut spec = with_sets(algebra_from(algebra)?, &[("set", set)])?;
            let mut payload = json!({"set": "set"});
            if let Some(f) = family {
                spec.seminorms.insert("family".into(), read_json(f)?);
                payload["family"] = json!("family");
            }
            (spec, payload)
        }
        Cmd::Argmin { set, function, algebra } => {
            let mut spec = with_sets(algebra_from(algebra)?, &[("set", set)])?;
            spec.functions.insert("fn".into(), FunctionSpec::parse_inline(function)?);
            (spec, json!({"set": "set", "function": "fn"}))
        }
        Cmd::Fixpoint { spec: file } => {
            let mut obj = object(read_json(file)?, "$")?;
            let map = take(&mut obj, "map").ok_or_else(|| CliError::invalid("map", "missing map"))?;
            let hint = per_atom_len(obj.get("x1")).or_else(|| per_atom_len(obj.get("rate")));
            let mut spec = ScenarioSpec {
                algebra: Some(infer_algebra(take(&mut obj, "algebra"), hint, "algebra")?),
                ..Default::default()
            };
            spec.maps.insert("map".into(), l0stable::format::from_value(&map, "map")?);
            if let Some(d) = take(&mut obj, "domain") {
                spec.sets.insert("domain".into(), l0stable::format::from_value(&d, "domain")?);
                obj.insert("domain".into(), json!("domain"));
            }
            obj.insert("map".into(), json!("map"));
            (spec, Value::Object(obj))
        }
        Cmd::Separate { a, b, algebra } => {
            (with_sets(algebra_from(algebra)?, &[("a", a), ("b", b)])?, json!({"a": "a", "b": "b"}))
        }
        Cmd::Bipolar { set, algebra } => (with_sets(algebra_from(algebra)?, &[("set", set)])?, json!({"set": "set"})),
        Cmd::Basis { generators } => {
            let mut obj = object(read_json(generators)?, "$")?;
            let hint = obj
                .get("generators")
                .and_then(|g| g.as_array())
                .and_then(|g| per_atom_len(g.first()));
            let algebra = infer_algebra(take(&mut obj, "algebra"), hint, "algebra")?;
            (ScenarioSpec { algebra: Some(algebra), ..Default::default() }, Value::Object(obj))
        }
        Cmd::Net { set, radius, algebra } => {
            (with_sets(algebra_from(algebra)?, &[("set", set)])?, json!({"set": "set", "radius": radius}))
        }
        Cmd::DemoClusterLemma { depth, n } => {
            // the dyadic algebra is built by the command itself
            let spec = ScenarioSpec { algebra: Some(AlgebraSpec::uniform(1)), ..Default::default() };
            (spec, json!({"depth": depth, "n": n}))
        }
        Cmd::AuditTopology { family, query } => {
            let mut fam = object(read_json(family)?, "$")?;
            let algebra = infer_algebra(take(&mut fam, "algebra"), None, "algebra")?;
            let members = take(&mut fam, "members").ok_or_else(|| CliError::invalid("members", "missing members"))?;
            let mut spec = ScenarioSpec { algebra: Some(algebra), ..Default::default() };
            spec.seminorms.insert("family".into(), l0stable::format::from_value(&members, "members")?);
            let mut payload = object(read_json(query)?, "$")?;
            payload.insert("family".into(), json!("family"));
            (spec, Value::Object(payload))
        }
    };
    let name = cmd.name().to_string();
    let mut spec = spec;
    spec.commands.insert(name.clone(), payload);
    Ok((Scenario::build(spec)?, name))
}

fn execute(cmd: &Cmd, cfg: &RunConfig) -> CliResult<Sections> {
    let (scenario, name) = build(cmd)?;
    commands::dispatch(&name, &scenario, cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("l0stable: cannot configure {n} threads: {e}");
        }
    }
    let cfg = RunConfig { seed: cli.seed };
    let name = cli.cmd.name().to_string();
    let start = Instant::now();
    let outcome = execute(&cli.cmd, &cfg);
    if let Err(e) = &outcome {
        eprintln!("l0stable: {e}");
    }
    let (report, code) = l0stable::report(&name, &cfg, outcome);
    let mut out = std::io::stdout().lock();
    // a closed pipe on stdout is not an error of the command
    let _ = writeln!(out, "{}", serde_json::to_string(&report).expect("reports serialize")).and_then(|_| out.flush());
    eprintln!("l0stable: {name} finished in {:.3}s", start.elapsed().as_secs_f64());
    ExitCode::from(code as u8)
}
