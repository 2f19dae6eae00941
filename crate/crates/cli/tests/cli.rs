use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

const BIN: &str = env!("CARGO_BIN_EXE_l0stable");
const COMMANDS: [&str; 9] = [
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

fn demo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/demo.json")
}

fn write(name: &str, v: &Value) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("STABLE_THREADS").output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn arg(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn every_demo_command_succeeds_deterministically() {
    let scenario = demo();
    for c in COMMANDS {
        let a = run(&["run", c, arg(&scenario)]);
        assert_eq!(a.status.code(), Some(0), "{c}: {}", String::from_utf8_lossy(&a.stderr));
        let r = report(&a);
        assert_eq!(r["status"], "ok", "{c}");
        assert_eq!(r["command"], c);
        let b = run(&["run", c, arg(&scenario)]);
        assert_eq!(a.stdout, b.stdout, "{c} is not byte-identical");
    }
}

#[test]
fn thread_count_does_not_change_reports() {
    let scenario = demo();
    for c in ["audit-topology", "argmin", "fixpoint"] {
        let one = run(&["--threads", "1", "run", c, arg(&scenario)]);
        let many = Command::new(BIN)
            .args(["run", c, arg(&scenario)])
            .env("STABLE_THREADS", "4")
            .output()
            .unwrap();
        assert_eq!(one.status.code(), Some(0));
        assert_eq!(one.stdout, many.stdout, "{c}");
    }
}

#[test]
fn seed_is_echoed_and_reproducible() {
    let scenario = demo();
    let a = run(&["--seed", "7", "run", "audit-topology", arg(&scenario)]);
    let b = run(&["--seed", "7", "run", "audit-topology", arg(&scenario)]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(report(&a)["seed"], 7);
    let c = run(&["--seed", "8", "run", "audit-topology", arg(&scenario)]);
    assert_ne!(report(&a)["audits"], report(&c)["audits"]);
}

#[test]
fn singleton_is_compact_with_norm_radius() {
    let set = write(
        "singleton.json",
        &json!({"dim": 2, "per_atom": [{"points": [[3, 4]]}, {"points": [[1, 0]]}]}),
    );
    let out = run(&["check-compact", "--set", arg(&set)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["outputs"]["compact"], true);
    assert_eq!(r["outputs"]["radius"], json!([5.0, 1.0]));
}

#[test]
fn affine_fixpoint_matches_closed_form() {
    let a = [0.5, -0.8, 0.0, 0.95];
    let b = [[1.0, -2.0], [3.0, 0.5], [-1.0, 1.0], [0.1, 0.2]];
    let spec = write(
        "fixpoint.json",
        &json!({
            "algebra": {"atoms": 4, "probs": [0.1, 0.2, 0.3, 0.4]},
            "map": {"kind": "scalar_affine", "a": a, "b": b},
            "rate": [0.5, 0.8, 0.01, 0.95],
            "x1": [5, 5],
            "tol": 1e-10,
        }),
    );
    let out = run(&["fixpoint", "--spec", arg(&spec)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    for w in 0..4 {
        for i in 0..2 {
            let z = r["outputs"]["z"][w][i].as_f64().unwrap();
            let exact = b[w][i] / (1.0 - a[w]);
            assert!((z - exact).abs() <= 1e-10, "atom {w}: {z} vs {exact}");
        }
        assert!(r["outputs"]["iters"][w].as_u64().unwrap() >= 1);
    }
}

#[test]
fn argmin_matches_brute_force() {
    let pts = [vec![[0.0, 0.0], [2.0, 1.0], [1.0, 3.0]], vec![[5.0, 5.0], [-1.0, -1.0]]];
    let set = write(
        "argmin_set.json",
        &json!({"dim": 2, "per_atom": [{"points": pts[0]}, {"points": pts[1]}]}),
    );
    let out = run(&["argmin", "--set", arg(&set), "--fn", "affine a=1,-1 b=0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    for (w, sec) in pts.iter().enumerate() {
        let best = sec.iter().map(|p| p[0] - p[1] + 0.5).fold(f64::INFINITY, f64::min);
        assert_eq!(r["outputs"]["value"][w].as_f64().unwrap(), best);
    }
}

#[test]
fn malformed_json_reports_field_path() {
    let bad = write(
        "malformed.json",
        &json!({"dim": 1, "per_atom": [{"points": [[1]]}, {"points": [["x"]]}]}),
    );
    let out = run(&["check-compact", "--set", arg(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["status"], "invalid");
    assert_eq!(r["error"]["kind"], "ParseError");
    assert_eq!(r["error"]["path"], "per_atom[1].points[0][0]");

    let truncated = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("truncated.json");
    std::fs::write(&truncated, "{\"dim\": 1, \"per_atom\": [").unwrap();
    let out = run(&["check-compact", "--set", arg(&truncated)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unresolved_names_and_ragged_data_are_validation_errors() {
    let sc = write(
        "unresolved.json",
        &json!({
            "algebra": {"atoms": 2},
            "sets": {"K": {"dim": 1, "per_atom": [{"points": [[0]]}, {"points": [[1]]}]}},
            "commands": {"argmin": {"set": "K", "function": "missing"}},
        }),
    );
    let out = run(&["run", "argmin", arg(&sc)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["error"]["path"], "commands.argmin.function");

    let out = run(&["run", "net", arg(&sc)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["error"]["path"], "commands.net");

    let ragged = write(
        "ragged.json",
        &json!({
            "algebra": {"atoms": 3},
            "sets": {"K": {"dim": 1, "per_atom": [{"points": [[0]]}, {"points": [[1]]}]}},
        }),
    );
    let out = run(&["run", "check-compact", arg(&ragged)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["error"]["path"], "sets.K.per_atom");

    let probs = write("probs.json", &json!({"algebra": {"atoms": 2, "probs": [0.5, 0.6]}}));
    let out = run(&["run", "check-compact", arg(&probs)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["error"]["path"], "algebra");
}

#[test]
fn intersecting_sets_fail_with_event() {
    let a = write(
        "sep_a.json",
        &json!({"dim": 2, "per_atom": [
            {"polytope": [[0, 0], [2, 2]]},
            {"polytope": [[0, 0], [1, 0]]},
            {"polytope": [[0, 0], [1, 0], [0, 1]]},
        ]}),
    );
    let b = write(
        "sep_b.json",
        &json!({"dim": 2, "per_atom": [
            {"polytope": [[0, 2], [2, 0]]},
            {"polytope": [[0, 1], [1, 1]]},
            {"polytope": [[0.2, 0.2], [3, 3]]},
        ]}),
    );
    let out = run(&["separate", "--a", arg(&a), "--b", arg(&b)]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&out);
    assert_eq!(r["status"], "failed");
    assert_eq!(r["error"]["kind"], "NotDisjoint");
    assert_eq!(r["error"]["event"], json!([0, 2]));
}

#[test]
fn separation_certificate_is_audited() {
    let a = write("sep_ok_a.json", &json!({"dim": 2, "per_atom": [{"polytope": [[0, 0], [1, 0], [0, 1]]}]}));
    let b = write("sep_ok_b.json", &json!({"dim": 2, "per_atom": [{"polytope": [[2, 2], [3, 2]]}]}));
    let out = run(&["separate", "--a", arg(&a), "--b", arg(&b)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["audits"]["vertex_gap"]["passed"], true);
    let u: Vec<f64> = r["outputs"]["functional"][0]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let gap = r["outputs"]["gap"][0].as_f64().unwrap();
    let f = |p: [f64; 2]| u[0] * p[0] + u[1] * p[1];
    let hi = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]].iter().map(|p| f(*p)).fold(f64::MIN, f64::max);
    let lo = [[2.0, 2.0], [3.0, 2.0]].iter().map(|p| f(*p)).fold(f64::MAX, f64::min);
    assert!(lo - hi > gap && gap > 0.0);
}

#[test]
fn unit_square_polar_is_the_diamond() {
    let sq = write(
        "square.json",
        &json!({"dim": 2, "per_atom": [{"polytope": [[1, 1], [1, -1], [-1, 1], [-1, -1]]}]}),
    );
    let out = run(&["bipolar", "--set", arg(&sq)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let polar = &r["outputs"]["polar"][0];
    assert_eq!(polar["bounded"], true);
    let mut verts: Vec<(i64, i64)> = polar["vertices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| ((v[0].as_f64().unwrap() * 1e9).round() as i64, (v[1].as_f64().unwrap() * 1e9).round() as i64))
        .collect();
    verts.sort();
    let e = 1_000_000_000;
    assert_eq!(verts, vec![(-e, 0), (0, -e), (0, e), (e, 0)]);
}

#[test]
fn cluster_lemma_demo_and_impossible_case() {
    let out = run(&["demo-cluster-lemma", "--depth", "16", "--n", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    for key in ["c_nonnull", "c_disjoint", "hits_nonnull", "r_positive"] {
        assert_eq!(r["audits"][key], true, "{key}");
    }
    assert_eq!(r["outputs"]["c"].as_array().unwrap().len(), 8);

    let sc = write(
        "cluster4.json",
        &json!({
            "algebra": {"atoms": 4},
            "commands": {"demo-cluster-lemma": {"radii": [
                [1, 1, 1, 1], [0, 1, 1, 1], [0, 0, 1, 1], [0, 0, 0, 1]
            ]}},
        }),
    );
    let out = run(&["run", "demo-cluster-lemma", arg(&sc)]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&out);
    assert_eq!(r["error"]["kind"], "ConstructionImpossible");
    assert_eq!(r["error"]["prefix"], 2);
}

#[test]
fn basis_and_net_commands() {
    let gens = write(
        "gens.json",
        &json!({
            "generators": [[[1, 0], [0, 0]], [[2, 0], [1, 1]], [[0, 1], [2, 2]]],
            "coordinates_of": [[4, 5], [3, 3]],
        }),
    );
    let out = run(&["basis", "--generators", arg(&gens)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["outputs"]["stable_dimension"], json!([2, 1]));
    assert!(r["audits"]["round_trip"]["max_error"].as_f64().unwrap() <= 1e-9);

    let set = write(
        "net_set.json",
        &json!({"dim": 1, "per_atom": [{"points": [[0], [0.5], [1], [3]]}, {"points": [[0], [10]]}]}),
    );
    let out = run(&["net", "--set", arg(&set), "--radius", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["outputs"]["counts"], json!([2, 2]));
    assert_eq!(r["outputs"]["centers"][0], json!([[0.0], [3.0]]));
    assert_eq!(r["audits"]["cover"]["passed"], true);
}

#[test]
fn topology_audit_from_family_and_query_files() {
    let fam = write(
        "family.json",
        &json!({"algebra": {"atoms": 2, "probs": [0.7, 0.3]}, "members": [
            {"kind": "weighted_norm", "weights": [[1, 1], [2, 0]], "exponent": "inf"},
            {"kind": "pairing", "y": [1, -1]},
        ]}),
    );
    let q = write(
        "query.json",
        &json!({"center": [0, 0], "eps": 0.5, "lam": 0.4, "samples": 4000, "points": [
            [[0.1, 0.0], [0.0, 0.0]],
            [[0.1, 0.0], [5.0, 0.0]],
        ]}),
    );
    let out = run(&["audit-topology", "--family", arg(&fam), "--query", arg(&q)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    for key in ["epslambda_witness", "refinement_witness", "chain_l0_in_epslambda", "chain_stable_in_l0"] {
        assert_eq!(r["audits"][key]["violations"], 0, "{key}");
        assert_eq!(r["audits"][key]["samples"], 4000, "{key}");
    }
    // the second point misses the balls only on the atom of mass 0.3 < λ
    assert_eq!(
        r["outputs"]["membership"][1],
        json!({"eps_lambda": true, "l0_ball": false, "stable_ball": false})
    );
    assert_eq!(
        r["outputs"]["membership"][0],
        json!({"eps_lambda": true, "l0_ball": true, "stable_ball": true})
    );
}

#[test]
fn inline_function_syntax() {
    let set = write("inline.json", &json!({"dim": 1, "per_atom": [{"points": [[-2], [1]]}]}));
    let json_fn = r#"{"kind": "quadratic", "center": [0.9], "scale": 3}"#;
    let a = report(&run(&["argmin", "--set", arg(&set), "--fn", json_fn]));
    let b = report(&run(&["argmin", "--set", arg(&set), "--fn", "quadratic center=0.9 scale=3"]));
    assert_eq!(a["outputs"], b["outputs"]);
    assert_eq!(a["outputs"]["argmin"], json!([[1.0]]));
    let out = run(&["argmin", "--set", arg(&set), "--fn", "quadratic center"]);
    assert_eq!(out.status.code(), Some(2));
}
