use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fidelity-bounds"));
    c.env_remove("FIDELITY_BOUNDS_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn report(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn bound_of(v: &Value, level: usize) -> f64 {
    v["levels"][level]["certified_bound"].as_f64().unwrap()
}

fn without_wall_time(mut v: Value) -> Value {
    if let Some(levels) = v["levels"].as_array_mut() {
        for l in levels {
            l.as_object_mut().unwrap().remove("wall_time");
        }
    }
    v
}

#[test]
fn isotropic_bounds() {
    for (d, expect) in [("2", 2.0 / 3.0), ("3", 0.5)] {
        let v = report(&run(&["bound", "--generate", "isotropic", "--dim", d, "--level", "1"]));
        assert_eq!(v["levels"][0]["status"], "optimal");
        assert!((bound_of(&v, 0) - expect).abs() <= 1e-6);
    }
}

#[test]
fn local_bounds() {
    let v = report(&run(&["local-bound", "--generate", "bell", "--probs", "0.4,0.3,0.2,0.1", "--level", "1"]));
    assert!((bound_of(&v, 0) - 0.7).abs() <= 1e-6);
    let v = report(&run(&["local-bound", "--generate", "bell", "--probs", "0.25,0.25,0.25,0.25"]));
    assert!((bound_of(&v, 0) - 0.5).abs() <= 1e-6);
    let v = report(&run(&["local-bound", "--generate", "domino", "--level", "1"]));
    assert!((bound_of(&v, 0) - 1.0).abs() <= 1e-6);
    assert_eq!(v["levels"][0]["main_block_side"], 81);
}

#[test]
fn global_bound_of_a_local_document_merges_parties() {
    let v = report(&run(&["bound", "--generate", "bell", "--probs", "0.4,0.3,0.2,0.1"]));
    assert!((bound_of(&v, 0) - 1.0).abs() <= 1e-6);
}

#[test]
fn malformed_documents_exit_one_without_report() {
    for input in ["{not json", r#"{"schema_version": 1}"#, r#"[1, 2, 3]"#] {
        let out = run_stdin(&["bound", "--problem", "-"], input);
        assert_eq!(out.status.code(), Some(1));
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
    let out = run(&["bound", "--problem", "/nonexistent/problem.json"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["bound"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["local-bound", "--generate", "isotropic"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["certify-bell", "--probs", "0.5,0.5,0.5,0.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn size_cap_is_an_input_error() {
    let out = run(&["bound", "--generate", "isotropic", "--dim", "3", "--max-size", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn non_optimal_runs_exit_two_with_report() {
    let out = run(&["bound", "--generate", "isotropic", "--max-iterations", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["levels"][0]["status"], "max-iterations");
}

#[test]
fn seesaw_values_and_determinism() {
    let a = run(&["seesaw", "--generate", "two-pure", "--overlap", "0.6", "--seed", "5"]);
    let v = report(&a);
    assert!((v["seesaw"]["fidelity"].as_f64().unwrap() - 0.9).abs() <= 1e-4);
    let b = run(&["seesaw", "--generate", "two-pure", "--overlap", "0.6", "--seed", "5"]);
    assert_eq!(a.stdout, b.stdout);
    let c = bin()
        .args(["seesaw", "--generate", "two-pure", "--overlap", "0.6"])
        .env("FIDELITY_BOUNDS_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
    assert_eq!(report(&c)["seed"], 5);

    let single = r#"{"schema_version": 1, "name": "single", "kind": "global",
        "dims": {"encoded": [2], "target": 2},
        "states": [{"prob": 1.0, "target": [[0.6, 0], [0.8, 0]], "encoded": [[0.6, 0], [0.8, 0]]}]}"#;
    let v = report(&run_stdin(&["seesaw", "--problem", "-", "--restarts", "2"], single));
    assert!((v["seesaw"]["fidelity"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
    let out = run(&["seesaw", "--generate", "isotropic"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bell_certificates() {
    let v = report(&run(&["certify-bell", "--probs", "0.4,0.3,0.2,0.1"]));
    let c = &v["certificate"];
    assert!((c["bound"].as_f64().unwrap() - 0.7).abs() <= 1e-12);
    assert!(c["feasibility_slack"].as_f64().unwrap() >= -1e-10);
    assert_eq!(c["basis"], "X");
    let v = report(&run(&["certify-bell", "--probs", "1,0,0,0"]));
    assert!((v["certificate"]["bound"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    let probs: [f64; 4] = [0.123456789, 0.387654321, 0.0915, 0.39738889];
    let arg = probs.map(|p| p.to_string()).join(",");
    let v = report(&run(&["certify-bell", "--probs", &arg]));
    let mut sorted = probs.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    assert!((v["certificate"]["bound"].as_f64().unwrap() - sorted[0] - sorted[1]).abs() <= 1e-12);
}

#[test]
fn level_fan_out_matches_sequential_runs() {
    let both = report(&run(&["bound", "--generate", "two-pure", "--levels", "1..2"]));
    let one = report(&run(&["bound", "--generate", "two-pure", "--level", "1"]));
    let two = report(&run(&["bound", "--generate", "two-pure", "--level", "2"]));
    let both = without_wall_time(both);
    let (one, two) = (without_wall_time(one), without_wall_time(two));
    assert_eq!(both["levels"][0], one["levels"][0]);
    let (b2, s2) = (&both["levels"][1], &two["levels"][0]);
    assert_eq!(b2["level_certified_bound"], s2["level_certified_bound"]);
    assert_eq!(b2["primal"], s2["primal"]);
    assert_eq!(b2["dual"], s2["dual"]);
    assert!(bound_of(&both, 1) <= bound_of(&both, 0));
}

#[test]
fn generated_documents_round_trip() {
    for family in ["isotropic", "bell", "domino", "two-pure", "copies"] {
        let generated = run(&["generate", "--generate", family]);
        assert_eq!(generated.status.code(), Some(0));
        let doc: Value = serde_json::from_slice(&generated.stdout).unwrap();
        let again = run_stdin(&["generate", "--problem", "-"], std::str::from_utf8(&generated.stdout).unwrap());
        assert_eq!(again.stdout, generated.stdout, "{family}");
        let cmd = if doc["kind"] == "local" { "local-bound" } else { "bound" };
        if family == "domino" {
            continue;
        }
        let direct = report(&run(&[cmd, "--generate", family]));
        let parsed = report(&run_stdin(&[cmd, "--problem", "-"], std::str::from_utf8(&generated.stdout).unwrap()));
        assert_eq!(direct["problem"], parsed["problem"]);
        assert_eq!(
            without_wall_time(direct)["levels"],
            without_wall_time(parsed)["levels"],
            "{family}"
        );
    }
}

fn schema(name: &str) -> Value {
    let path = format!("{}/schemas/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Required keys present and no keys outside `properties`, recursively
/// through plain object schemas.
fn conforms(value: &Value, schema: &Value, path: &str) {
    if let Some(required) = schema["required"].as_array() {
        for key in required {
            assert!(value.get(key.as_str().unwrap()).is_some(), "{path}: missing {key}");
        }
    }
    if let (Some(props), Some(obj)) = (schema["properties"].as_object(), value.as_object()) {
        for (k, v) in obj {
            let sub = props.get(k).unwrap_or_else(|| panic!("{path}: unexpected key {k}"));
            conforms(v, sub, &format!("{path}.{k}"));
            if let (Some(items), Some(arr)) = (sub["items"].as_object(), v.as_array()) {
                for (i, item) in arr.iter().enumerate() {
                    conforms(item, &Value::Object(items.clone()), &format!("{path}.{k}[{i}]"));
                }
            }
        }
    }
}

#[test]
fn reports_follow_the_published_schemas() {
    let report_schema = schema("report.schema.json");
    let problem_schema = schema("problem.schema.json");
    let runs = [
        run(&["bound", "--generate", "isotropic", "--levels", "1..2"]),
        run(&["certify-bell", "--probs", "0.4,0.3,0.2,0.1"]),
        run(&["seesaw", "--generate", "copies", "--restarts", "2"]),
    ];
    for out in &runs {
        let v = report(out);
        conforms(&v, &report_schema, "report");
        if let Some(p) = v.get("problem") {
            conforms(p, &problem_schema, "problem");
        }
        let text = String::from_utf8(out.stdout.clone()).unwrap();
        assert!(!text.contains("e-0") && !text.contains(".0,"), "floats use the fixed 17-digit form");
    }
}
