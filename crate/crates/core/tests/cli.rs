use std::path::Path;

use genriem::cli::{run, EXIT_ERROR, EXIT_FAIL, EXIT_PASS};
use genriem::fields::{FieldProvider, ManifoldSpec};
use genriem::tensor::TensorValue;
use serde_json::Value;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn genriem(args: &[&str]) -> Out {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("genriem").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Out {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(o: &Out) -> Value {
    serde_json::from_str(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", o.stdout))
}

#[test]
fn verify_passes_on_s6() {
    let o = genriem(&[
        "verify",
        "--builtin",
        "s6",
        "--suite",
        "hermitian",
        "--points",
        "8",
        "--format",
        "json",
    ]);
    assert_eq!(o.code, EXIT_PASS, "{}", o.stderr);
    let v = json(&o);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 20);
    assert!(results.iter().all(|r| r["verdict"] == "pass"));
    for key in [
        "id",
        "paper_ref",
        "max_residual",
        "mean_residual",
        "points",
        "tolerance",
        "verdict",
    ] {
        assert!(results[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn verify_fails_on_the_control() {
    let o = genriem(&[
        "verify",
        "--builtin",
        "control_noncriterion",
        "--suite",
        "emc",
        "--points",
        "8",
        "--format",
        "json",
    ]);
    assert_eq!(o.code, EXIT_FAIL);
    let v = json(&o);
    let verdict =
        |id: &str| v["results"].as_array().unwrap().iter().find(|r| r["id"] == id).unwrap()["verdict"].clone();
    assert_eq!(verdict("skew1"), "fail");
    assert_eq!(verdict("emc"), "fail");
}

#[test]
fn errors_exit_two() {
    let missing = genriem(&["verify", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(missing.code, EXIT_ERROR);
    assert!(missing.stderr.contains("/nonexistent/spec.json"), "{}", missing.stderr);
    assert_eq!(genriem(&["verify", "--builtin", "no_such_manifold"]).code, EXIT_ERROR);
    assert_eq!(genriem(&["verify"]).code, EXIT_ERROR);
    assert_eq!(genriem(&["frobnicate"]).code, EXIT_ERROR);
    assert_eq!(
        genriem(&["verify", "--builtin", "s6", "--suite", "nope"]).code,
        EXIT_ERROR
    );
}

#[test]
fn generate_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wp.json");
    let p = path.to_str().unwrap();
    let o = genriem(&[
        "generate",
        "weighted_product",
        "--factors",
        "t2,t2",
        "--weights",
        "1,4",
        "--out",
        p,
    ]);
    assert_eq!(o.code, EXIT_PASS, "{}", o.stderr);

    let spec = ManifoldSpec::load(&path).unwrap();
    assert_eq!(spec.to_json(), std::fs::read_to_string(&path).unwrap());
    let provider = FieldProvider::new(spec);
    let q = provider.value("Q", &[0.3, 1.0, 2.0, 4.0]).unwrap();
    let mut expected = TensorValue::identity(4);
    for i in 2..4 {
        expected.set(&[i, i], 4.0);
    }
    assert_eq!(q, expected);

    let o = genriem(&["verify", "--spec", p, "--suite", "splitting", "--points", "16"]);
    assert_eq!(o.code, EXIT_PASS, "{}{}", o.stdout, o.stderr);
    let o = genriem(&["split", "--spec", p, "--points", "16", "--format", "json"]);
    assert_eq!(o.code, EXIT_PASS);
    let v = json(&o);
    assert_eq!(v["k"], 2);
    let lambdas: Vec<f64> = v["distributions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["eigenvalue"].as_f64().unwrap())
        .collect();
    assert!(
        (lambdas[0] - 1.0).abs() < 1e-12 && (lambdas[1] - 4.0).abs() < 1e-12,
        "{lambdas:?}"
    );
}

#[test]
fn split_refuses_a_drifting_spectrum() {
    let o = genriem(&["split", "--builtin", "control_drift", "--points", "16"]);
    assert_eq!(o.code, EXIT_FAIL);
    assert!(o.stdout.contains("not constant"), "{}", o.stdout);
}

#[test]
fn connection_text_matches_golden() {
    let o = genriem(&["connection", "--builtin", "round_s2(1)", "--point", "1,0.5"]);
    assert_eq!(o.code, EXIT_PASS);
    let golden =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/connection_round_s2.txt"))
            .unwrap();
    assert_eq!(o.stdout, golden);
}

#[test]
fn connection_json_matches_closed_form() {
    let o = genriem(&[
        "connection",
        "--builtin",
        "round_s2(1)",
        "--point",
        "1,0.5",
        "--format",
        "json",
    ]);
    let v = json(&o);
    let lc = &v["levi_civita"];
    assert!((lc[0][1][1].as_f64().unwrap() + 1f64.sin() * 1f64.cos()).abs() < 1e-14);
    assert!((lc[1][0][1].as_f64().unwrap() - 1f64.cos() / 1f64.sin()).abs() < 1e-14);
}

#[test]
fn basis_on_weighted_product() {
    let o = genriem(&[
        "basis",
        "--builtin",
        "weighted_product([s6, flat_kahler(2)], [1, 3])",
        "--format",
        "json",
    ]);
    assert_eq!(o.code, EXIT_PASS, "{}", o.stdout);
    let v = json(&o);
    assert_eq!(v["pairs"], 4);
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn para_hermitian_example_spec_passes() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/specs/para_hermitian_r4.json");
    let o = genriem(&[
        "verify",
        "--spec",
        path.to_str().unwrap(),
        "--suite",
        "para",
        "--points",
        "8",
    ]);
    assert_eq!(o.code, EXIT_PASS, "{}", o.stdout);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let args = [
        "verify",
        "--builtin",
        "line_product(s6)",
        "--suite",
        "acm",
        "--points",
        "4",
        "--format",
        "json",
    ];
    let direct = genriem(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    assert_eq!(genriem(&with_out).code, EXIT_PASS);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), direct.stdout);
}
