use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hecke_walk::algebra::{FieldContext, Mode};
use hecke_walk::cli::{RunConfig, Subcommand};
use hecke_walk::walk::BallMeasure;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hecke-walk"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let code = out.status.code().expect("exit code");
    let report = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", String::from_utf8_lossy(&out.stderr)));
    (code, report)
}

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Checks the subset of JSON Schema used by the published report schema.
fn validate(root: &Value, schema: &Value, v: &Value, at: &str) -> Result<(), String> {
    let s = match schema.get("$ref").and_then(Value::as_str) {
        Some(r) => {
            let name = r.strip_prefix("#/$defs/").expect("local ref");
            &root["$defs"][name]
        }
        None => schema,
    };
    if let Some(c) = s.get("const") {
        if c != v {
            return Err(format!("{at}: expected {c}, got {v}"));
        }
    }
    if let Some(e) = s.get("enum").and_then(Value::as_array) {
        if !e.contains(v) {
            return Err(format!("{at}: {v} not in {e:?}"));
        }
    }
    if let Some(t) = s.get("type") {
        let types: Vec<&str> = match t {
            Value::String(t) => vec![t.as_str()],
            Value::Array(ts) => ts.iter().filter_map(Value::as_str).collect(),
            _ => panic!("bad type in schema"),
        };
        let ok = types.iter().any(|t| match *t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "integer" => v.is_i64() || v.is_u64(),
            "number" => v.is_number(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            other => panic!("unsupported type {other}"),
        });
        if !ok {
            return Err(format!("{at}: {v} is not {types:?}"));
        }
    }
    if let Some(alts) = s.get("oneOf").and_then(Value::as_array) {
        let matching = alts.iter().filter(|a| validate(root, a, v, at).is_ok()).count();
        if matching != 1 {
            return Err(format!("{at}: {matching} oneOf branches match"));
        }
    }
    if let (Some(min), Some(x)) = (s.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if x < min {
            return Err(format!("{at}: {x} < {min}"));
        }
    }
    if let Some(obj) = v.as_object() {
        for key in s.get("required").and_then(Value::as_array).into_iter().flatten() {
            if !obj.contains_key(key.as_str().unwrap()) {
                return Err(format!("{at}: missing {key}"));
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        for (k, x) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(sub) => validate(root, sub, x, &format!("{at}.{k}"))?,
                None if s.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    return Err(format!("{at}: unexpected key {k}"))
                }
                None => {}
            }
        }
    }
    if let Some(items) = v.as_array() {
        if let Some(n) = s.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < n {
                return Err(format!("{at}: fewer than {n} items"));
            }
        }
        if let Some(n) = s.get("maxItems").and_then(Value::as_u64) {
            if (items.len() as u64) > n {
                return Err(format!("{at}: more than {n} items"));
            }
        }
        if let Some(sub) = s.get("items") {
            for (i, x) in items.iter().enumerate() {
                validate(root, sub, x, &format!("{at}[{i}]"))?;
            }
        }
    }
    Ok(())
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn subsum_classify_reports_an_interval() {
    let (code, report) = run_json(&["subsum", "--beta", "geometric:a=1,rho=0.5", "--op", "classify"]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["classification"], "interval");
    assert_eq!(report["result"]["B0"], "2");
}

#[test]
fn check_absorbing_exit_codes() {
    let (code, report) = run_json(&["check-absorbing", "--q", "2", "--mode", "modular", "--measure", "e-lamp"]);
    assert_eq!((code, &report["result"]["absorbing"]), (0, &Value::Bool(true)));
    let (code, report) = run_json(&["check-absorbing", "--q", "2", "--mode", "carry", "--measure", "(1 | 1)@1"]);
    assert_eq!(code, 3);
    assert_eq!(report["status"], "check-failed");
    assert!(report["result"]["witness"]["orbit"].is_array());
}

#[test]
fn completion_of_a_non_absorbing_measure_is_a_precondition_failure() {
    let (code, report) = run_json(&["completion", "--q", "2", "--mode", "carry", "--measure", "(1 | 1)@1"]);
    assert_eq!(code, 2);
    assert_eq!(report["exit_code"], 2);
    assert!(report["result"]["witness"]["orbit"].as_array().unwrap().len() >= 2);
    let (code, report) = run_json(&["completion", "--q", "2", "--mode", "carry", "--measure", "e-bs"]);
    assert_eq!(code, 0, "{report}");
}

#[test]
fn bad_input_exit_codes() {
    let out = run(&["subsum", "--beta", "geometric:a=1", "--op", "classify"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    let out = run(&["simulate", "--q", "4", "--mode", "carry", "--measure", "e-bs"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_files_reject_unknown_keys() {
    let dir = tempdir();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"subcommand": "subsum", "inputs": {"beta": "geometric:a=1,rho=1/2", "bogus": 1}}"#).unwrap();
    let out = run(&["subsum", "--config", path_arg(&path)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_round_trip_and_flag_equivalence() {
    let mut config = RunConfig::new(Subcommand::Spectrum);
    config.inputs.beta = Some("geometric:a=1/3,rho=1/3".into());
    config.inputs.subset = Some(vec![1, 4]);
    config.inputs.h_sigma_o = Some("7/10".into());
    config.seed = 99;
    let text = config.to_json().unwrap();
    assert_eq!(RunConfig::from_json(&text).unwrap(), config);

    let dir = tempdir();
    let path = dir.path().join("spectrum.config.json");
    std::fs::write(&path, &text).unwrap();
    let from_file = run(&["spectrum", "--config", path_arg(&path)]);
    let from_flags = run(&[
        "spectrum",
        "--beta",
        "geometric:a=1/3,rho=1/3",
        "--subset",
        "1,4",
        "--h-sigma-o",
        "7/10",
        "--seed",
        "99",
    ]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, from_flags.stdout);
}

#[test]
fn identical_configs_give_identical_reports() {
    let dir = tempdir();
    let args = |d: &PathBuf| {
        vec![
            "stationary".to_string(),
            "--q".into(),
            "2".into(),
            "--mode".into(),
            "carry".into(),
            "--measure".into(),
            "e-bs".into(),
            "--samples".into(),
            "2000".into(),
            "--window".into(),
            "-1,3".into(),
            "--seed".into(),
            "17".into(),
            "--format".into(),
            "csv".into(),
            "--out".into(),
            d.to_str().unwrap().to_string(),
        ]
    };
    let out_dir = dir.path().join("out");
    let mut previous: Option<(Vec<u8>, Vec<u8>)> = None;
    for threads in ["1", "3", "1"] {
        let status = bin().args(args(&out_dir)).env("HECKE_WALK_THREADS", threads).status().unwrap();
        assert!(status.success());
        let report = std::fs::read(out_dir.join("stationary.json")).unwrap();
        let csv = std::fs::read(out_dir.join("stationary.csv")).unwrap();
        if let Some(prev) = &previous {
            assert_eq!(prev.0, report, "report differs with {threads} threads");
            assert_eq!(prev.1, csv);
        }
        previous = Some((report, csv));
    }
    let first = run(&["simulate", "--q", "2", "--mode", "carry", "--measure", "e-bs", "--steps", "40", "--seed", "1"]);
    let second = run(&["simulate", "--q", "2", "--mode", "carry", "--measure", "e-bs", "--steps", "40", "--seed", "1"]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn ball_csv_round_trips() {
    let ctx = FieldContext::new(2, Mode::Carry).unwrap();
    let dir = tempdir();
    for float in [false, true] {
        let mut args = vec![
            "stationary", "--q", "2", "--mode", "carry", "--measure", "e-bs", "--samples", "3000", "--window", "-1,3",
            "--seed", "5", "--format", "csv", "--out",
        ];
        args.push(path_arg(dir.path()));
        if float {
            args.push("--float");
        }
        assert_eq!(run(&args).status.code(), Some(0));
        let bytes = std::fs::read(dir.path().join("stationary.csv")).unwrap();
        let nu = BallMeasure::read_csv(ctx, bytes.as_slice()).unwrap();
        let total = hecke_walk::rational::to_f64(&nu.total());
        if float {
            assert!((total - 1.0).abs() < 1e-12);
        } else {
            assert_eq!(nu.total(), hecke_walk::rational::int(1));
        }
        let mut again = Vec::new();
        nu.write_csv(&mut again, float).unwrap();
        assert_eq!(again, bytes, "float = {float}");
    }
}

#[test]
fn every_subcommand_report_matches_the_schema() {
    let root = schema();
    let dir = tempdir();
    let lamp = ["--q", "2", "--mode", "modular", "--measure", "e-lamp"];
    let bs = ["--q", "2", "--mode", "carry", "--measure", "e-bs"];
    let cases: Vec<Vec<&str>> = vec![
        [&["check-absorbing"][..], &lamp].concat(),
        [&["construct", "--op", "commuting-average"][..], &bs].concat(),
        [&["completion"][..], &lamp].concat(),
        [&["simulate", "--steps", "20", "--seed", "4"][..], &bs].concat(),
        [&["stationary", "--samples", "500", "--window", "-1,2"][..], &bs].concat(),
        [&["entropy", "--nu", "haar", "--level", "2", "--n-max", "5"][..], &lamp].concat(),
        vec!["spectrum", "--beta", "geometric:a=1/2,rho=1/2", "--subset", "2,5"],
        vec!["subsum", "--beta", "list:1,1/2,1/4", "--op", "enumerate"],
        vec!["decouple", "--q", "3", "--mode", "carry", "--m-range", "-1,2"],
    ];
    for args in cases {
        let (code, report) = run_json(&args);
        assert_eq!(code, 0, "{args:?}: {report}");
        validate(&root, &root, &report, "$").unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert_eq!(report["subcommand"], args[0]);

        let mut with_out = args.clone();
        with_out.extend(["--out", path_arg(dir.path())]);
        assert_eq!(run(&with_out).status.code(), Some(0));
        let written: Value =
            serde_json::from_slice(&std::fs::read(dir.path().join(format!("{}.json", args[0]))).unwrap()).unwrap();
        validate(&root, &root, &written, "$").unwrap();
        for artifact in written["artifacts"].as_array().unwrap() {
            assert!(dir.path().join(artifact.as_str().unwrap()).exists());
        }
    }
}

#[test]
fn schema_validator_rejects_malformed_reports() {
    let root = schema();
    let (_, mut report) = run_json(&["subsum", "--beta", "list:1,1/2", "--op", "classify"]);
    validate(&root, &root, &report, "$").unwrap();
    report["status"] = "fine".into();
    assert!(validate(&root, &root, &report, "$").is_err());
    report["status"] = "ok".into();
    report["config"]["inputs"]["extra"] = 1.into();
    assert!(validate(&root, &root, &report, "$").is_err());
}
