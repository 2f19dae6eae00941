//! Command handlers. Each returns the `inputs`, `outputs` and `audits`
//! sections of the report.

use l0stable_core::compactness::{
    audit_net, cluster_lemma_construct, dyadic_algebra, dyadic_blocks, is_stably_compact, stable_eps_net, StableMetric,
};
use l0stable_core::module::extract_stable_basis;
use l0stable_core::optimization::{
    audit_function_stability, banach_fixpoint, conditional_argmin, polar_and_bipolar, strong_separation,
    ContractionSpec, PolarSection, StableMap,
};
use l0stable_core::sampling::AuditConfig;
use l0stable_core::seminorm::Seminorm;
use l0stable_core::topology::{
    audit_containment, epslambda_witness, topology_refinement_witness, ContainmentAudit, IdentityTranslator,
    Neighborhood,
};
use l0stable_core::{Error, L0Scalar, L0Vector, MeasureAlgebra, StableFiniteFamily};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::format::{
    from_value, partition_json, scalar_json, set_json, vector_json, MetricSpec, ScalarSpec, VectorSpec,
};
use crate::scenario::Scenario;

pub const COMMANDS: [&str; 9] = [
    "check-compact",
    "argmin",
    "fixpoint",
    "separate",
    "bipolar",
    "basis",
    "net",
    "demo-cluster-lemma",
    "audit-topology",
];

/// Sampling audits are split into this many seeded chunks. The count is
/// fixed so that reports do not depend on the thread count.
const AUDIT_CHUNKS: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
}

pub struct Sections {
    pub inputs: Value,
    pub outputs: Value,
    pub audits: Value,
}

pub fn dispatch(command: &str, sc: &Scenario, cfg: &RunConfig) -> CliResult<Sections> {
    let payload = sc.payload(command)?;
    let root = format!("commands.{command}");
    match command {
        "check-compact" => check_compact(sc, from_value(payload, &root)?, &root),
        "argmin" => argmin(sc, from_value(payload, &root)?, &root, cfg),
        "fixpoint" => fixpoint(sc, from_value(payload, &root)?, &root, cfg),
        "separate" => separate(sc, from_value(payload, &root)?, &root),
        "bipolar" => bipolar(sc, from_value(payload, &root)?, &root),
        "basis" => basis(sc, from_value(payload, &root)?, &root),
        "net" => net(sc, from_value(payload, &root)?, &root),
        "demo-cluster-lemma" => cluster_lemma(sc, from_value(payload, &root)?, &root),
        "audit-topology" => audit_topology(sc, from_value(payload, &root)?, &root, cfg),
        other => Err(CliError::invalid("command", format!("unknown command {other:?}"))),
    }
}

fn chunk_configs(seed: u64, samples: usize) -> Vec<AuditConfig> {
    let n = AUDIT_CHUNKS as usize;
    (0..AUDIT_CHUNKS)
        .map(|c| AuditConfig {
            samples: samples / n + usize::from((c as usize) < samples % n),
            seed: seed ^ c.wrapping_mul(0x9E37_79B9_7F4A_7C15),
        })
        .collect()
}

/// Runs a sampling audit chunk-wise on the thread pool; the first failing
/// chunk in chunk order decides the error.
fn par_audit<T: Send>(
    seed: u64,
    samples: usize,
    f: impl Fn(&AuditConfig) -> Result<T, Error> + Sync + Send,
) -> Result<Vec<T>, Error> {
    let results: Vec<Result<T, Error>> = chunk_configs(seed, samples).par_iter().map(f).collect();
    results.into_iter().collect()
}

fn sum_audits(parts: Vec<ContainmentAudit>) -> ContainmentAudit {
    parts.into_iter().fold(ContainmentAudit::default(), |acc, a| ContainmentAudit {
        samples: acc.samples + a.samples,
        inner_hits: acc.inner_hits + a.inner_hits,
        violations: acc.violations + a.violations,
    })
}

fn audit_json(a: &ContainmentAudit) -> Value {
    json!({"samples": a.samples, "inner_hits": a.inner_hits, "violations": a.violations, "passed": a.violations == 0})
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckCompact {
    set: String,
    #[serde(default)]
    family: Option<String>,
}

fn check_compact(sc: &Scenario, p: CheckCompact, root: &str) -> CliResult<Sections> {
    let k = sc.set(&p.set, &format!("{root}.set"))?;
    let family = match &p.family {
        Some(n) => sc.family(n, &format!("{root}.family"))?,
        None => &[],
    };
    let report = is_stably_compact(k, family).map_err(|e| CliError::at(root, e))?;
    Ok(Sections {
        inputs: json!({"set": set_json(k), "family": p.family}),
        outputs: json!({
            "compact": report.compact,
            "radius": report.radius.as_ref().map(scalar_json),
            "offending_atom": report.offending_atom,
        }),
        audits: json!({}),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Argmin {
    set: String,
    function: String,
    #[serde(default = "default_samples")]
    samples: usize,
}

fn default_samples() -> usize {
    1000
}

fn argmin(sc: &Scenario, p: Argmin, root: &str, cfg: &RunConfig) -> CliResult<Sections> {
    let k = sc.set(&p.set, &format!("{root}.set"))?;
    let f = sc.function(&p.function, &format!("{root}.function"))?;
    let (x, v) = conditional_argmin(f, k).map_err(|e| CliError::at(root, e))?;
    let failures: usize = par_audit(cfg.seed, p.samples, |c| audit_function_stability(f, &sc.algebra, k.dim(), c))
        .map_err(|e| CliError::at(root, e))?
        .into_iter()
        .sum();
    Ok(Sections {
        inputs: json!({"set": set_json(k), "function": sc.spec.functions[&p.function]}),
        outputs: json!({"argmin": vector_json(&x), "value": scalar_json(&v)}),
        audits: json!({"stability": {"samples": p.samples, "failures": failures, "passed": failures == 0}}),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Fixpoint {
    map: String,
    rate: ScalarSpec,
    x1: VectorSpec,
    #[serde(default = "default_tol")]
    tol: ScalarSpec,
    #[serde(default = "default_max_iter")]
    max_iter: usize,
    #[serde(default)]
    domain: Option<String>,
    #[serde(default = "default_samples")]
    samples: usize,
}

fn default_tol() -> ScalarSpec {
    ScalarSpec::Constant(1e-12)
}

fn default_max_iter() -> usize {
    100_000
}

fn fixpoint(sc: &Scenario, p: Fixpoint, root: &str, cfg: &RunConfig) -> CliResult<Sections> {
    let atoms = sc.algebra.atom_count();
    let map = sc.map(&p.map, &format!("{root}.map"))?;
    let rate = p.rate.build(atoms, &format!("{root}.rate"))?;
    let tol = p.tol.build(atoms, &format!("{root}.tol"))?;
    let x1 = p.x1.build(atoms, &format!("{root}.x1"))?;
    if x1.dim() != map.shift.dim() {
        return Err(CliError::invalid(format!("{root}.x1"), "dimension does not match the map"));
    }
    let domain = match &p.domain {
        Some(n) => Some(sc.set(n, &format!("{root}.domain"))?.clone()),
        None => None,
    };
    let spec = |domain: Option<l0stable_core::StableSet>| ContractionSpec {
        map,
        rate: rate.clone(),
        domain,
        tol: tol.clone(),
        max_iter: p.max_iter,
    };
    par_audit(cfg.seed, p.samples, |c| spec(domain.clone()).spot_check(x1.dim(), c))
        .map_err(|e| CliError::at(root, e))?;
    let result = banach_fixpoint(&spec(domain.clone()), &x1).map_err(|e| CliError::at(root, e))?;
    let tz = StableMap::apply(map, &result.z);
    let residual = result.z.sub(&tz).norm();
    Ok(Sections {
        inputs: json!({
            "map": sc.spec.maps[&p.map],
            "rate": scalar_json(&rate),
            "x1": vector_json(&x1),
            "tol": scalar_json(&tol),
            "max_iter": p.max_iter,
        }),
        outputs: json!({
            "z": vector_json(&result.z),
            "iters": result.iters.values(),
            "residual": scalar_json(&residual),
        }),
        audits: json!({"contraction": {"samples": p.samples, "passed": true}}),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Separate {
    a: String,
    b: String,
}

fn separate(sc: &Scenario, p: Separate, root: &str) -> CliResult<Sections> {
    let s1 = sc.set(&p.a, &format!("{root}.a"))?;
    let s2 = sc.set(&p.b, &format!("{root}.b"))?;
    let cert = strong_separation(s1, s2).map_err(|e| CliError::at(root, e))?;
    let passed = cert.audit(s1, s2);
    Ok(Sections {
        inputs: json!({"a": set_json(s1), "b": set_json(s2)}),
        outputs: json!({"functional": vector_json(&cert.functional), "gap": scalar_json(&cert.gap)}),
        audits: json!({"vertex_gap": {"passed": passed}}),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Bipolar {
    set: String,
}

fn polar_section_json(s: &PolarSection) -> Value {
    match s {
        PolarSection::Bounded(v) => json!({"bounded": true, "vertices": v}),
        PolarSection::Unbounded { halfspaces, generators } => json!({
            "bounded": false,
            "halfspaces": {"normals": halfspaces.normals, "offsets": halfspaces.offsets},
            "generators": {
                "vertices": generators.vertices,
                "rays": generators.rays,
                "lineality": generators.lineality,
            },
        }),
    }
}

fn bipolar(sc: &Scenario, p: Bipolar, root: &str) -> CliResult<Sections> {
    let s = sc.set(&p.set, &format!("{root}.set"))?;
    let pair = polar_and_bipolar(s).map_err(|e| CliError::at(root, e))?;
    Ok(Sections {
        inputs: json!({"set": set_json(s)}),
        outputs: json!({
            "polar": pair.polar.iter().map(polar_section_json).collect::<Vec<_>>(),
            "bipolar": set_json(&pair.bipolar),
        }),
        audits: json!({}),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Basis {
    generators: Vec<VectorSpec>,
    #[serde(default)]
    coordinates_of: Option<VectorSpec>,
}

fn basis(sc: &Scenario, p: Basis, root: &str) -> CliResult<Sections> {
    let atoms = sc.algebra.atom_count();
    let gens = p
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| g.build(atoms, &format!("{root}.generators[{i}]")))
        .collect::<CliResult<Vec<L0Vector>>>()?;
    if gens.iter().any(|g| g.dim() != gens[0].dim()) {
        return Err(CliError::invalid(format!("{root}.generators"), "generators need one common dimension"));
    }
    let basis = extract_stable_basis(&sc.algebra, &gens).map_err(|e| CliError::at(root, e))?;
    let mut outputs = json!({
        "profile": partition_json(basis.profile()),
        "ranks": basis.ranks(),
        "selected": basis.selected(),
        "stable_dimension": basis.stable_dimension(),
    });
    let mut audits = json!({});
    if let Some(x) = &p.coordinates_of {
        let x = x.build(atoms, &format!("{root}.coordinates_of"))?;
        let coeffs = basis.coordinates(&x).map_err(|e| CliError::at(root, e))?;
        let back = basis.lincomb(&coeffs).map_err(|e| CliError::at(root, e))?;
        let err = x.sub(&back).norm();
        outputs["coordinates"] = json!(coeffs
            .blocks()
            .iter()
            .map(|b| b.iter().map(scalar_json).collect::<Vec<_>>())
            .collect::<Vec<_>>());
        audits["round_trip"] = json!({"max_error": err.values().iter().copied().fold(0.0, f64::max)});
    }
    Ok(Sections {
        inputs: json!({"generators": gens.iter().map(vector_json).collect::<Vec<_>>()}),
        outputs,
        audits,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Net {
    set: String,
    radius: ScalarSpec,
    #[serde(default = "euclidean")]
    metric: MetricSpec,
}

fn euclidean() -> MetricSpec {
    MetricSpec::Named("euclidean".into())
}

fn net(sc: &Scenario, p: Net, root: &str) -> CliResult<Sections> {
    let k = sc.set(&p.set, &format!("{root}.set"))?;
    let r = p.radius.build(sc.algebra.atom_count(), &format!("{root}.radius"))?;
    if let Some(a) = r.values().iter().position(|v| v.is_nan() || *v <= 0.0) {
        return Err(CliError::invalid(format!("{root}.radius[{a}]"), "radius must be strictly positive"));
    }
    let metric = p.metric.build(&sc.algebra, &format!("{root}.metric"))?;
    let net = stable_eps_net(&sc.algebra, k, &metric, &r).map_err(|e| CliError::at(root, e))?;
    let uncovered = audit_net(k, &metric, &net);
    let centers: Vec<&[Vec<f64>]> = (0..k.atoms()).map(|a| net.centers_at(a)).collect();
    let metric_name = match metric {
        StableMetric::EuclideanL0 => "euclidean",
        StableMetric::SeminormInduced(_) => "seminorm",
    };
    Ok(Sections {
        inputs: json!({"set": set_json(k), "radius": scalar_json(&r), "metric": metric_name}),
        outputs: json!({"centers": centers, "counts": net.counts.values()}),
        audits: json!({"cover": {"passed": uncovered.is_none(), "uncovered_atom": uncovered}}),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusterLemma {
    #[serde(default)]
    depth: Option<u32>,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    radii: Option<Vec<ScalarSpec>>,
}

pub const MAX_DYADIC_DEPTH: u32 = 24;

/// Run-length encoding `[start, end, value]` of a per-atom scalar.
fn runs(x: &L0Scalar) -> Value {
    let v = x.values();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=v.len() {
        if i == v.len() || v[i].to_bits() != v[start].to_bits() {
            out.push(json!([start, i, v[start]]));
            start = i;
        }
    }
    Value::Array(out)
}

/// An event as half-open atom ranges `[start, end)`.
fn ranges(ev: &l0stable_core::Event) -> Value {
    let mut out: Vec<[usize; 2]> = Vec::new();
    for a in ev.atoms() {
        match out.last_mut() {
            Some(r) if r[1] == a => r[1] = a + 1,
            _ => out.push([a, a + 1]),
        }
    }
    json!(out)
}

pub fn cluster_lemma_on(alg: &MeasureAlgebra, rs: &[L0Scalar]) -> CliResult<(Value, Value)> {
    let cert = cluster_lemma_construct(alg, rs).map_err(|e| CliError::at("radii", e))?;
    let c_probs: Vec<f64> = cert.c.iter().map(|c| c.prob()).collect();
    let disjoint = cert
        .c
        .iter()
        .enumerate()
        .all(|(i, ci)| cert.c[i + 1..].iter().all(|cj| ci.meet(cj).map(|m| m.is_empty()).unwrap_or(false)));
    let outputs = json!({
        "c": cert.c.iter().map(ranges).collect::<Vec<_>>(),
        "b": cert.b.iter().map(ranges).collect::<Vec<_>>(),
        "r": runs(&cert.r),
        "hit_probs": cert.hit_probs,
        "c_probs": c_probs,
    });
    let audits = json!({
        "c_nonnull": c_probs.iter().all(|p| *p > 0.0),
        "c_disjoint": disjoint,
        "hits_nonnull": cert.hit_probs.iter().all(|p| *p > 0.0),
        "r_positive": cert.r.is_strictly_positive(),
    });
    Ok((outputs, audits))
}

fn cluster_lemma(sc: &Scenario, p: ClusterLemma, root: &str) -> CliResult<Sections> {
    match (&p.radii, p.depth, p.n) {
        (Some(radii), None, None) => {
            let atoms = sc.algebra.atom_count();
            let rs = radii
                .iter()
                .enumerate()
                .map(|(i, r)| r.build(atoms, &format!("{root}.radii[{i}]")))
                .collect::<CliResult<Vec<_>>>()?;
            let (outputs, audits) = cluster_lemma_on(&sc.algebra, &rs)?;
            Ok(Sections { inputs: json!({"radii": rs.iter().map(scalar_json).collect::<Vec<_>>()}), outputs, audits })
        }
        (None, Some(depth), Some(n)) => dyadic_demo(depth, n),
        _ => Err(CliError::invalid(root, "give either radii, or depth together with n")),
    }
}

pub fn dyadic_demo(depth: u32, n: usize) -> CliResult<Sections> {
    if depth == 0 || depth > MAX_DYADIC_DEPTH {
        return Err(CliError::invalid("depth", format!("depth must lie in 1..={MAX_DYADIC_DEPTH}")));
    }
    if n == 0 || n > depth as usize {
        return Err(CliError::invalid("n", format!("n must lie in 1..={depth}")));
    }
    let alg = dyadic_algebra(depth).map_err(|e| CliError::at("depth", e))?;
    let rs = dyadic_blocks(&alg, n);
    let (outputs, audits) = cluster_lemma_on(&alg, &rs)?;
    Ok(Sections { inputs: json!({"depth": depth, "n": n, "atoms": alg.atom_count()}), outputs, audits })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuditTopology {
    family: String,
    center: VectorSpec,
    eps: f64,
    lam: f64,
    #[serde(default)]
    radius: Option<ScalarSpec>,
    #[serde(default = "default_audit_samples")]
    samples: usize,
    #[serde(default)]
    points: Vec<VectorSpec>,
}

fn default_audit_samples() -> usize {
    10_000
}

fn audit_topology(sc: &Scenario, p: AuditTopology, root: &str, cfg: &RunConfig) -> CliResult<Sections> {
    let alg = &sc.algebra;
    let atoms = alg.atom_count();
    let members = sc.family(&p.family, &format!("{root}.family"))?.to_vec();
    let center = p.center.build(atoms, &format!("{root}.center"))?;
    let radius = match &p.radius {
        Some(r) => r.build(atoms, &format!("{root}.radius"))?,
        None => L0Scalar::constant(atoms, p.eps),
    };
    let at = |e| CliError::at(root, e);
    let dim = center.dim();

    let eps_lam = Neighborhood::eps_lambda(center.clone(), members.clone(), p.eps, p.lam).map_err(at)?;
    let ball = Neighborhood::l0_ball(center.clone(), members.clone(), radius.clone()).map_err(at)?;
    let family = StableFiniteFamily::uniform(alg, members.clone());
    let stable = Neighborhood::stable_ball(center.clone(), family, radius.clone()).map_err(at)?;

    let audit = |inner: &Neighborhood, outer: &Neighborhood, scale: f64| -> CliResult<ContainmentAudit> {
        par_audit(cfg.seed, p.samples, |c| audit_containment(alg, inner, outer, scale, c))
            .map(sum_audits)
            .map_err(at)
    };

    // ε,λ witness for the supremum of the family
    let q = Seminorm::sup_hull(members.clone()).map_err(at)?;
    let w = epslambda_witness(&q, p.eps, p.lam).map_err(at)?;
    let w_inner = Neighborhood::eps_lambda(center.clone(), w.members.clone(), w.eps, w.lam).map_err(at)?;
    let w_outer = Neighborhood::eps_lambda(center.clone(), vec![q], p.eps, p.lam).map_err(at)?;
    let w_audit = audit(&w_inner, &w_outer, p.eps)?;

    let audit_cfg = AuditConfig { samples: p.samples.min(1000), seed: cfg.seed };
    let rw = topology_refinement_witness(alg, &members, p.eps, p.lam, &IdentityTranslator, dim, &audit_cfg)
        .map_err(at)?;
    let r_inner = Neighborhood::eps_lambda(center.clone(), rw.members.clone(), rw.eps, rw.lam).map_err(at)?;
    let r_audit = audit(&r_inner, &eps_lam, p.eps)?;

    // 𝒯_{ε,λ} ⊆ 𝒯₀ ⊆ 𝒯_s: each neighborhood contains one of the finer kind
    let l0_inner = eps_lam.inner_l0_ball().map_err(at)?;
    let chain_l0 = audit(&l0_inner, &eps_lam, p.eps)?;
    let extra = StableFiniteFamily::uniform(alg, Vec::new());
    let st_inner = ball.inner_stable_ball(&extra).map_err(at)?;
    let chain_st = audit(&st_inner, &ball, p.eps)?;

    let membership = p
        .points
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let y = y.build(atoms, &format!("{root}.points[{i}]"))?;
            if y.dim() != dim {
                return Err(CliError::invalid(format!("{root}.points[{i}]"), "dimension does not match the center"));
            }
            Ok(json!({
                "eps_lambda": eps_lam.contains(alg, &y).map_err(at)?,
                "l0_ball": ball.contains(alg, &y).map_err(at)?,
                "stable_ball": stable.contains(alg, &y).map_err(at)?,
            }))
        })
        .collect::<CliResult<Vec<_>>>()?;

    Ok(Sections {
        inputs: json!({
            "family": sc.spec.seminorms[&p.family],
            "center": vector_json(&center),
            "eps": p.eps,
            "lam": p.lam,
            "radius": scalar_json(&radius),
            "samples": p.samples,
        }),
        outputs: json!({
            "epslambda_witness": {"members": w.members.len(), "eps": w.eps, "lam": w.lam, "m": w.m},
            "refinement_witness": {
                "members": rw.members.len(),
                "eps": rw.eps,
                "lam": rw.lam,
                "m": rw.m,
                "blocks": partition_json(&rw.blocks),
                "block_eps": rw.block_eps,
            },
            "membership": membership,
        }),
        audits: json!({
            "epslambda_witness": audit_json(&w_audit),
            "refinement_witness": audit_json(&r_audit),
            "chain_l0_in_epslambda": audit_json(&chain_l0),
            "chain_stable_in_l0": audit_json(&chain_st),
        }),
    })
}
