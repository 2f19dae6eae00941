use l0stable::error::CliError;
use l0stable::format::{parse_json, set_json, AlgebraSpec, FunctionSpec, SeminormSpec, SetSpec};
use l0stable::scenario::{Scenario, ScenarioSpec};
use l0stable_core::optimization::StableFunction;
use l0stable_core::L0Vector;
use serde_json::json;

#[test]
fn set_round_trip() {
    let text = r#"{"dim": 2, "per_atom": [{"points": [[0, 1], [2, 3]]}, {"polytope": [[0, 0], [1, 0], [0, 1]]}]}"#;
    let spec: SetSpec = parse_json(text, "$").unwrap();
    let k = spec.build(2, "set").unwrap();
    let back: SetSpec = serde_json::from_value(set_json(&k)).unwrap();
    assert_eq!(back.build(2, "set").unwrap(), k);
}

#[test]
fn every_seminorm_kind_parses_and_evaluates() {
    let alg = AlgebraSpec { atoms: 3, probs: Some(vec![0.5, 0.25, 0.25]) }.build("algebra").unwrap();
    let specs = json!([
        {"kind": "weighted_norm", "weights": [1, 2], "exponent": "1"},
        {"kind": "euclidean", "dim": 2},
        {"kind": "pairing", "y": [[1, 0], [0, 1], [1, 1]]},
        {"kind": "conditional_lp", "blocks": [[0, 2], [1]], "p": 2},
        {"kind": "sup_hull", "members": [{"kind": "euclidean", "dim": 2}, {"kind": "pairing", "y": [3, 0]}]},
        {"kind": "concat", "blocks": [[0], [1, 2]], "members": [
            {"kind": "euclidean", "dim": 2},
            {"kind": "weighted_norm", "weights": [0, 1], "exponent": "inf"}
        ]},
    ]);
    let specs: Vec<SeminormSpec> = serde_json::from_value(specs).unwrap();
    let x = L0Vector::new(2, &[vec![3.0, 4.0], vec![1.0, -1.0], vec![0.0, 2.0]]).unwrap();
    let expected: [[f64; 3]; 6] = [
        [11.0, 3.0, 4.0],
        [5.0, 2f64.sqrt(), 2.0],
        [3.0, 1.0, 2.0],
        // blocks {0, 2} with masses 0.5, 0.25 and ‖x‖² = 25, 4
        [((0.5 * 25.0 + 0.25 * 4.0) / 0.75f64).sqrt(), 2f64.sqrt(), ((0.5 * 25.0 + 0.25 * 4.0) / 0.75f64).sqrt()],
        [9.0, 3.0, 2.0],
        [5.0, 1.0, 2.0],
    ];
    for (i, s) in specs.iter().enumerate() {
        let p = s.build(&alg, "p").unwrap();
        let v = p.eval(&x).unwrap();
        for a in 0..3 {
            assert!((v.get(a) - expected[i][a]).abs() < 1e-12, "kind {i} atom {a}: {}", v.get(a));
        }
    }
}

#[test]
fn invalid_partition_points_at_the_block() {
    let alg = AlgebraSpec::uniform(3).build("algebra").unwrap();
    let s: SeminormSpec = serde_json::from_value(json!({"kind": "conditional_lp", "blocks": [[0], [1, 5]], "p": 1}))
        .unwrap();
    match s.build(&alg, "seminorms.P[0]") {
        Err(CliError::Validation { path, .. }) => assert_eq!(path, "seminorms.P[0].blocks[1]"),
        other => panic!("unexpected {other:?}"),
    }
    let s: SeminormSpec =
        serde_json::from_value(json!({"kind": "conditional_lp", "blocks": [[0], [1]], "p": 1})).unwrap();
    match s.build(&alg, "q") {
        Err(CliError::Validation { path, .. }) => assert_eq!(path, "q.blocks"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn inline_functions_broadcast_constants() {
    let f = FunctionSpec::parse_inline("affine a=1,2 b=-1").unwrap();
    let f = f.build(2, "f").unwrap();
    assert_eq!(f.eval_point(0, &[1.0, 1.0]), 2.0);
    assert_eq!(f.eval_point(1, &[0.0, 1.0]), 1.0);
    let n = FunctionSpec::parse_inline("norm q=1").unwrap().build(1, "f").unwrap();
    assert_eq!(n.eval_point(0, &[-1.0, 2.0]), 3.0);
    assert!(FunctionSpec::parse_inline("norm q=7").is_err());
    assert!(FunctionSpec::parse_inline("quadratic center=a").is_err());
}

#[test]
fn scenario_infers_uniform_algebra_from_first_set() {
    let spec: ScenarioSpec = serde_json::from_value(json!({
        "sets": {"K": {"dim": 1, "per_atom": [{"points": [[0]]}, {"points": [[1]]}]}}
    }))
    .unwrap();
    let sc = Scenario::build(spec).unwrap();
    assert_eq!(sc.algebra.probs(), &[0.5, 0.5]);
    assert!(Scenario::build(ScenarioSpec::default()).is_err());
}

#[test]
fn unknown_fields_are_rejected_with_path() {
    let err = parse_json::<ScenarioSpec>(r#"{"algebra": {"atoms": 1, "prob": [1]}}"#, "$").unwrap_err();
    match err {
        CliError::Parse { path, .. } => assert_eq!(path, "algebra.prob"),
        other => panic!("unexpected {other:?}"),
    }
}
