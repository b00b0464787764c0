use std::path::{Path, PathBuf};
use std::process::Command;

use hyperforge_cli::export::read_report;
use serde_json::Value;

struct Run {
    status: i32,
    json: Value,
}

fn hf(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_hyperforge"))
        .args(args)
        .output()
        .expect("spawn");
    let text = String::from_utf8(out.stdout).unwrap();
    let json = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{args:?}: {e}\n{text}"));
    Run {
        status: out.status.code().unwrap(),
        json,
    }
}

fn targets(dir: &Path) -> PathBuf {
    let p = dir.join("targets.json");
    std::fs::write(&p, r#"[{"coeffs":[[0,1.0,0.0]]},{"coeffs":[[0,0.5,0.0],[1,-1.0,0.0]]},{"coeffs":[[2,0.0,1.0]]}]"#)
        .unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn coordinatewise_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = targets(dir.path());
    let g = dir.path().join("g.json");
    let run = hf(&[
        "build",
        "coord",
        "--space",
        "l1",
        "--weight",
        "const:2",
        "--targets",
        s(&t),
        "--rounds",
        "10",
        "--out",
        s(&g),
    ]);
    assert_eq!(run.status, 0, "{}", run.json);
    assert_eq!(run.json["kind"], "coordinatewise");
    assert_eq!(run.json["pass"], true);

    let csv = dir.path().join("p.csv");
    let rep = dir.path().join("p.json");
    let run = hf(&[
        "verify",
        "power",
        "--bundle",
        s(&g),
        "--j",
        "1",
        "--csv",
        s(&csv),
        "--out",
        s(&rep),
    ]);
    assert_eq!(run.status, 0, "{}", run.json);
    let rows = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = rows.lines().collect();
    assert_eq!(lines[0], "round,distance,bound,ratio");
    assert_eq!(
        lines.len() - 1,
        run.json["rounds"].as_array().unwrap().len()
    );

    let back = read_report(&rep).unwrap();
    assert_eq!(serde_json::to_value(&back).unwrap(), run.json);
    assert!(back.pass());
}

#[test]
fn builds_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let t = targets(dir.path());
    let mut bytes = Vec::new();
    for name in ["a.json", "b.json"] {
        let g = dir.path().join(name);
        let run = hf(&[
            "build",
            "cauchy",
            "--space",
            "l1",
            "--weight",
            "const:2",
            "--targets",
            s(&t),
            "--rounds",
            "6",
            "--out",
            s(&g),
        ]);
        assert_eq!(run.status, 0, "{}", run.json);
        bytes.push(std::fs::read(&g).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn zero_products_and_element_on_three_generators() {
    let dir = tempfile::tempdir().unwrap();
    let t = targets(dir.path());
    let g = dir.path().join("g.json");
    let run = hf(&[
        "build",
        "algebrable-coord",
        "-k",
        "3",
        "--space",
        "l_p:2",
        "--weight",
        "const:2",
        "--targets",
        s(&t),
        "--rounds",
        "9",
        "--out",
        s(&g),
    ]);
    assert_eq!(run.status, 0, "{}", run.json);
    assert_eq!(run.json["generators"], 3);
    let run = hf(&["verify", "zero-products", "--bundle", s(&g)]);
    assert_eq!(run.status, 0);
    assert_eq!(run.json["pairs"].as_array().unwrap().len(), 3);
    let run = hf(&[
        "verify",
        "element",
        "--bundle",
        s(&g),
        "--element",
        "x1^2 + 0.3*x1^3",
    ]);
    assert_eq!(run.status, 0, "{}", run.json);
}

#[test]
fn cauchy_reports() {
    let dir = tempfile::tempdir().unwrap();
    let t = targets(dir.path());
    let g = dir.path().join("g.json");
    let run = hf(&[
        "build",
        "algebrable-cauchy",
        "-k",
        "2",
        "--space",
        "l1",
        "--weight",
        "const:2",
        "--targets",
        s(&t),
        "--rounds",
        "8",
        "--out",
        s(&g),
    ]);
    assert_eq!(run.status, 0, "{}", run.json);
    for sub in ["certificates", "obstruction"] {
        let run = hf(&["verify", sub, "--bundle", s(&g)]);
        assert_eq!(run.status, 0, "{sub}: {}", run.json);
    }
    let run = hf(&[
        "verify",
        "expansion",
        "--bundle",
        s(&g),
        "--element",
        "x1*x2 + x1",
    ]);
    assert_eq!(run.status, 0, "{}", run.json);
    let run = hf(&[
        "verify",
        "element",
        "--bundle",
        s(&g),
        "--element",
        "x1*x2 + x1",
    ]);
    assert_eq!(run.status, 0, "{}", run.json);
}

#[test]
fn empty_report_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let t = targets(dir.path());
    let g = dir.path().join("g.json");
    hf(&[
        "build",
        "coord",
        "--space",
        "l1",
        "--weight",
        "const:2",
        "--targets",
        s(&t),
        "--rounds",
        "1",
        "--out",
        s(&g),
    ]);
    // j = 2 is first scheduled long after round 1.
    let csv = dir.path().join("e.csv");
    let run = hf(&[
        "verify",
        "power",
        "--bundle",
        s(&g),
        "--j",
        "2",
        "--csv",
        s(&csv),
    ]);
    assert!(run.json["rounds"].as_array().unwrap().is_empty());
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap().trim_end(),
        "round,distance,bound,ratio"
    );
}

#[test]
fn error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let t = targets(dir.path());
    let g = dir.path().join("g.json");
    hf(&[
        "build",
        "coord",
        "--space",
        "l1",
        "--weight",
        "const:2",
        "--targets",
        s(&t),
        "--rounds",
        "3",
        "--out",
        s(&g),
    ]);

    let cases: Vec<(Vec<&str>, &str, i32)> = vec![
        (vec!["bogus"], "usage", 2),
        (vec!["build", "coord", "--space", "l1"], "usage", 2),
        (
            vec!["criteria", "prop-b", "--space", "omega_cauchy"],
            "property_b_condition_i",
            6,
        ),
        (
            vec![
                "criteria",
                "hc",
                "--space",
                "l1",
                "--weight",
                "const:1/2",
                "--count",
                "3",
                "--scan-limit",
                "2000",
            ],
            "search_exhausted",
            4,
        ),
        (
            vec![
                "criteria", "mixing", "--space", "nowhere", "--weight", "const:2",
            ],
            "invalid_input",
            3,
        ),
        (
            vec!["verify", "element", "--bundle", s(&g), "--element", "x1 + "],
            "element_syntax",
            11,
        ),
        (
            vec![
                "verify",
                "element",
                "--bundle",
                s(&g),
                "--element",
                "1 + x1",
            ],
            "constant_term",
            12,
        ),
        (
            vec![
                "verify",
                "element",
                "--bundle",
                s(&g),
                "--element",
                "x1 - x1",
            ],
            "degenerate_element",
            8,
        ),
        (
            vec!["verify", "certificates", "--bundle", "/nonexistent/g.json"],
            "io_error",
            9,
        ),
        (
            vec!["verify", "certificates", "--bundle", s(&t)],
            "json_error",
            10,
        ),
    ];
    for (args, code, status) in cases {
        let run = hf(&args);
        assert_eq!(run.json["error"]["code"], code, "{args:?}: {}", run.json);
        assert_eq!(run.status, status, "{args:?}");
    }
    let run = hf(&["verify", "element", "--bundle", s(&g), "--element", "x1 + "]);
    assert_eq!(run.json["error"]["position"], 5);
}

#[test]
fn omega_cauchy_message_names_the_condition() {
    let run = hf(&["criteria", "prop-b", "--space", "omega_cauchy"]);
    let msg = run.json["error"]["message"].as_str().unwrap();
    assert!(msg.contains("condition (i)"), "{msg}");
}

#[test]
fn tampered_bundle_fails_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let t = targets(dir.path());
    let g = dir.path().join("g.json");
    hf(&[
        "build",
        "cauchy",
        "--space",
        "l1",
        "--weight",
        "const:2",
        "--targets",
        s(&t),
        "--rounds",
        "5",
        "--out",
        s(&g),
    ]);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&g).unwrap()).unwrap();
    let coeffs = find_coeffs(&mut v["rounds"][2]).expect("a stored block");
    let re = coeffs[0][1].as_f64().unwrap();
    coeffs[0][1] = Value::from(re * 2.0);
    std::fs::write(&g, serde_json::to_string(&v).unwrap()).unwrap();
    let run = hf(&["verify", "certificates", "--bundle", s(&g)]);
    assert_eq!(run.status, 1, "{}", run.json);
    assert_eq!(run.json["pass"], false);
}

fn find_coeffs(v: &mut Value) -> Option<&mut Vec<Value>> {
    match v {
        Value::Object(m) => {
            if m.get("coeffs")
                .and_then(|c| c.as_array())
                .is_some_and(|a| !a.is_empty() && a[0].as_array().is_some_and(|e| e.len() == 3))
            {
                return m.get_mut("coeffs").and_then(|c| c.as_array_mut());
            }
            m.values_mut().find_map(find_coeffs)
        }
        Value::Array(a) => a.iter_mut().find_map(find_coeffs),
        _ => None,
    }
}

#[test]
fn spaces_list_names_every_builtin() {
    let run = hf(&["spaces", "list"]);
    assert_eq!(run.status, 0);
    let ids: Vec<&str> = run.json["spaces"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["id"].as_str().unwrap())
        .collect();
    for id in [
        "c0",
        "l1",
        "entire_hadamard",
        "entire_cauchy",
        "omega_cauchy",
    ] {
        assert!(ids.contains(&id), "{id} missing from {ids:?}");
    }
}
