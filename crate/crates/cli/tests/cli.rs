//! End-to-end tests for the biortho-m binary: JSON/CSV output shapes,
//! exit codes, and agreement between the CLI surface and the library.
//!
//! Fixture files under fixtures/ mirror the library's built-in parameter
//! corpus. Regenerate them with
//! `cargo test -p biortho-m-cli regenerate_fixtures -- --ignored`.

use std::path::PathBuf;
use std::process::{Command, Output};

use num_complex::Complex64;
use serde_json::Value;

use biortho_m::poly::{m_first, ParamSet};
use biortho_m::verify::{corpus, params_digest};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_biortho-m"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    cmd.output().expect("binary must launch")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process must exit, not be killed")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout must be JSON: {e}\n{}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn entry_params(name: &str) -> ParamSet {
    corpus()
        .into_iter()
        .find(|e| e.name == name)
        .unwrap_or_else(|| panic!("corpus entry {name} must exist"))
        .params
}

/// [re, im] pair from a JSON matrix value.
fn complex_at(matrix: &Value, i: usize, j: usize) -> Complex64 {
    let pair = &matrix[i][j];
    Complex64::new(
        pair[0].as_f64().expect("re must be a number"),
        pair[1].as_f64().expect("im must be a number"),
    )
}

/// Writes fixtures/<name>.json for every corpus entry. serde_json emits
/// the shortest round-tripping decimal for each f64, so loading a fixture
/// reproduces the corpus parameters bit for bit (checked by
/// fixture_digests_match_corpus).
#[test]
#[ignore]
fn regenerate_fixtures() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir).expect("fixtures dir");
    for entry in corpus() {
        let p = entry.params.dim();
        let matrix_rows = |m: &biortho_m::matrix::ComplexMatrix| -> Value {
            let rows: Vec<Value> = (0..p)
                .map(|i| {
                    let row: Vec<Value> = (0..p)
                        .map(|j| {
                            let z = m.get(i, j);
                            serde_json::json!([z.re, z.im])
                        })
                        .collect();
                    Value::Array(row)
                })
                .collect();
            Value::Array(rows)
        };
        let file = serde_json::json!({
            "p": p,
            "H": matrix_rows(entry.params.h()),
            "C": matrix_rows(entry.params.c()),
            "upsilon": entry.params.upsilon(),
            "max_degree": entry.params.max_degree(),
        });
        let path = dir.join(format!("{}.json", entry.name));
        let mut text = serde_json::to_string_pretty(&file).expect("json");
        text.push('\n');
        std::fs::write(&path, text).expect("write fixture");
    }
}

#[test]
fn fixture_digests_match_corpus() {
    for entry in corpus() {
        let out = run(&[
            "coeffs",
            fixture(&entry.name).to_str().unwrap(),
            "--family",
            "first",
            "-n",
            "0",
        ]);
        assert_eq!(exit_code(&out), 0, "entry {}", entry.name);
        let json = stdout_json(&out);
        assert_eq!(
            json["params_digest"].as_str().unwrap(),
            params_digest(&entry.params),
            "fixture {} must load to the exact corpus parameters; \
             run regenerate_fixtures after corpus changes",
            entry.name
        );
    }
}

#[test]
fn eval_member_zero_is_identity() {
    for family in ["first", "second"] {
        let out = run(&[
            "eval",
            fixture("p2-mixed-u2").to_str().unwrap(),
            "--family",
            family,
            "-n",
            "0",
            "--points",
            "0.5",
        ]);
        assert_eq!(exit_code(&out), 0);
        let json = stdout_json(&out);
        assert_eq!(json["degree"], 0);
        let value = &json["points"][0]["value"];
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(complex_at(value, i, j), Complex64::new(expect, 0.0));
            }
        }
    }
}

#[test]
fn eval_first_member_one_matches_closed_form() {
    // Scalar first family at order one: M_1(u) = (h-2)u - (c+1).
    let out = run(&[
        "eval",
        fixture("p1-u1").to_str().unwrap(),
        "--family",
        "first",
        "-n",
        "1",
        "--points",
        "0,1.0",
    ]);
    assert_eq!(exit_code(&out), 0);
    let json = stdout_json(&out);
    let at = |k: usize| complex_at(&json["points"][k]["value"], 0, 0);
    assert!((at(0) - Complex64::new(-4.25, 0.0)).norm() < 1e-15);
    assert!((at(1) - Complex64::new(10.25, 0.0)).norm() < 1e-15);
}

#[test]
fn eval_agrees_with_library_bit_for_bit() {
    let params = entry_params("p2-complex-u1");
    let poly = m_first(&params, 3).unwrap();
    let out = run(&[
        "eval",
        fixture("p2-complex-u1").to_str().unwrap(),
        "--family",
        "first",
        "-n",
        "3",
        "--points",
        "0.7",
    ]);
    assert_eq!(exit_code(&out), 0);
    let value = &stdout_json(&out)["points"][0]["value"];
    let direct = poly.eval_re(0.7);
    for i in 0..2 {
        for j in 0..2 {
            // serde_json prints shortest round-tripping decimals, so the
            // CLI must reproduce the library value exactly.
            assert_eq!(complex_at(value, i, j), direct.get(i, j), "entry ({i},{j})");
        }
    }
}

#[test]
fn coeffs_degrees_follow_family_rule() {
    // First family degree is upsilon * n, second family degree is n.
    let path = fixture("p1-u2");
    let first = stdout_json(&run(&[
        "coeffs",
        path.to_str().unwrap(),
        "--family",
        "first",
        "-n",
        "2",
    ]));
    assert_eq!(first["degree"], 4);
    assert_eq!(first["coefficients"].as_array().unwrap().len(), 5);
    let second = stdout_json(&run(&[
        "coeffs",
        path.to_str().unwrap(),
        "--family",
        "second",
        "-n",
        "2",
    ]));
    assert_eq!(second["degree"], 2);
    assert_eq!(second["coefficients"].as_array().unwrap().len(), 3);
}

#[test]
fn coeffs_horner_reproduces_eval() {
    let path = fixture("p1-u3");
    let coeffs_json = stdout_json(&run(&[
        "coeffs",
        path.to_str().unwrap(),
        "--family",
        "first",
        "-n",
        "2",
    ]));
    let coeffs: Vec<Complex64> = coeffs_json["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| complex_at(m, 0, 0))
        .collect();
    let u = 0.7_f64;
    let horner = coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * u + a);
    let eval_json = stdout_json(&run(&[
        "eval",
        path.to_str().unwrap(),
        "--family",
        "first",
        "-n",
        "2",
        "--points",
        "0.7",
    ]));
    let direct = complex_at(&eval_json["points"][0]["value"], 0, 0);
    assert!(
        (horner - direct).norm() <= 1e-12 * direct.norm(),
        "horner {horner} vs eval {direct}"
    );
}

#[test]
fn verify_filtered_run_passes() {
    let out = run(&[
        "verify",
        fixture("p1-u1").to_str().unwrap(),
        "--identities",
        "rec1,biorth",
        "--max-n",
        "2",
    ]);
    assert_eq!(exit_code(&out), 0);
    let reports = stdout_json(&out);
    let reports = reports.as_array().unwrap();
    assert!(!reports.is_empty());
    for r in reports {
        assert!(r["passed"].as_bool().unwrap(), "{r}");
        let id = r["identity_id"].as_str().unwrap();
        assert!(id == "rec1" || id == "biorth", "unexpected id {id}");
    }
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("passed") && stderr.contains("failed"), "{stderr}");
}

#[test]
fn verify_full_run_reports_known_failures() {
    // The repeated-derivative recurrence and both integral-representation
    // readings fail as printed; everything else must pass.
    let out = run(&["verify", fixture("p1-u2").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    let reports = stdout_json(&out);
    let mut failed_ids: Vec<&str> = reports
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| !r["passed"].as_bool().unwrap())
        .map(|r| r["identity_id"].as_str().unwrap())
        .collect();
    failed_ids.sort_unstable();
    failed_ids.dedup();
    assert_eq!(
        failed_ids,
        ["intrep-reading-power", "intrep-reading-u", "rec4"],
        "only the documented failures may fail"
    );
}

#[test]
fn verify_csv_format_has_header() {
    let out = run(&[
        "verify",
        fixture("p1-u1").to_str().unwrap(),
        "--identities",
        "poch-gamma",
        "--format",
        "csv",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "identity_id,params_digest,residual,tolerance,passed,notes"
    );
    assert!(lines.next().unwrap().starts_with("poch-gamma,"));
}

#[test]
fn verify_rejects_unknown_identity() {
    let out = run(&[
        "verify",
        fixture("p1-u1").to_str().unwrap(),
        "--identities",
        "rec1,unheard-of",
    ]);
    assert_eq!(exit_code(&out), 2);
    let err = stdout_json(&out);
    let message = err["error"]["message"].as_str().unwrap();
    assert!(message.contains("unheard-of"), "{message}");
}

#[test]
fn verify_rejects_max_n_above_declared_degree() {
    let out = run(&[
        "verify",
        fixture("p1-u1").to_str().unwrap(),
        "--max-n",
        "9",
    ]);
    assert_eq!(exit_code(&out), 2);
    let err = stdout_json(&out);
    assert_eq!(err["error"]["exit"], 2);
}

#[test]
fn verify_runs_under_thread_cap() {
    let mut cmd = bin();
    cmd.args([
        "verify",
        fixture("p1-u1").to_str().unwrap(),
        "--identities",
        "biorth",
        "--max-n",
        "2",
    ]);
    cmd.env("BIORTHO_M_THREADS", "1");
    let out = cmd.output().expect("binary must launch");
    assert_eq!(exit_code(&out), 0);
    assert!(!stdout_json(&out).as_array().unwrap().is_empty());
}

#[test]
fn verify_rejects_bad_thread_cap() {
    let mut cmd = bin();
    cmd.args(["verify", fixture("p1-u1").to_str().unwrap()]);
    cmd.env("BIORTHO_M_THREADS", "0");
    let out = cmd.output().expect("binary must launch");
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn table_emits_full_grid() {
    let out = run(&[
        "table",
        fixture("p1-u1").to_str().unwrap(),
        "--max-n",
        "1",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,s,norm_numeric,norm_closed,relative_residual");
    assert_eq!(lines.len(), 5, "header plus a 2x2 grid");
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5, "{line}");
        let (n, s) = (fields[0], fields[1]);
        if n == s {
            assert!(!fields[3].is_empty(), "diagonal rows carry the closed norm");
        } else {
            assert!(fields[3].is_empty(), "off-diagonal rows have no closed norm");
        }
        let residual: f64 = fields[4].parse().unwrap();
        assert!(residual < 1e-8, "{line}");
    }
}

#[test]
fn table_rejects_max_n_above_declared_degree() {
    let out = run(&[
        "table",
        fixture("p1-u1").to_str().unwrap(),
        "--max-n",
        "7",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn malformed_parameter_file_is_rejected_with_json_error() {
    let dir = std::env::temp_dir().join("biortho-m-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{\"p\": 1,").unwrap();
    let out = run(&[
        "eval",
        path.to_str().unwrap(),
        "--family",
        "first",
        "-n",
        "0",
        "--points",
        "0",
    ]);
    assert_eq!(exit_code(&out), 2);
    let err = stdout_json(&out);
    assert_eq!(err["error"]["exit"], 2);
    assert!(err["error"]["message"].as_str().unwrap().contains("broken.json"));
}

#[test]
fn unknown_paramfile_key_is_rejected() {
    let dir = std::env::temp_dir().join("biortho-m-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("extra-key.json");
    std::fs::write(
        &path,
        r#"{"p": 1, "H": [[[16.5, 0.0]]], "C": [[[3.25, 0.0]]], "upsilon": 1, "max_degree": 4, "stray": 1}"#,
    )
    .unwrap();
    let out = run(&["coeffs", path.to_str().unwrap(), "--family", "first", "-n", "0"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn spectral_violation_is_rejected_as_validation_error() {
    // Re(eigenvalues of H) must exceed the degree bound; h = 3 cannot
    // support max_degree 4.
    let dir = std::env::temp_dir().join("biortho-m-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("shallow-h.json");
    std::fs::write(
        &path,
        r#"{"p": 1, "H": [[[3.0, 0.0]]], "C": [[[3.25, 0.0]]], "upsilon": 1, "max_degree": 4}"#,
    )
    .unwrap();
    let out = run(&["eval", path.to_str().unwrap(), "--family", "first", "-n", "1", "--points", "0"]);
    assert_eq!(exit_code(&out), 2);
    let err = stdout_json(&out);
    assert_eq!(err["error"]["exit"], 2);
}

#[test]
fn eval_degree_above_declared_bound_is_rejected() {
    let out = run(&[
        "eval",
        fixture("p1-u1").to_str().unwrap(),
        "--family",
        "first",
        "-n",
        "5",
        "--points",
        "0",
    ]);
    assert_eq!(exit_code(&out), 2);
}
