//! End-to-end runs of the `chshq` binary.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn chshq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chshq")).args(args).output().expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = chshq(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout_ok(args)).unwrap()
}

fn exit_code(args: &[&str]) -> i32 {
    chshq(args).status.code().expect("exited normally")
}

type Table = (BTreeMap<String, String>, Vec<BTreeMap<String, String>>);

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Header fields and records of a JSON envelope, every value as text.
fn table_from_json(text: &str) -> Table {
    let v: Value = serde_json::from_str(text).unwrap();
    let mut header = BTreeMap::new();
    header.insert("schema_version".into(), scalar(&v["schema_version"]));
    header.insert("command".into(), scalar(&v["command"]));
    header.insert("seed".into(), if v["seed"].is_null() { "none".into() } else { scalar(&v["seed"]) });
    for (k, x) in v["summary"].as_object().unwrap() {
        header.insert(k.clone(), scalar(x));
    }
    let rows = v["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_object().unwrap().iter().map(|(k, x)| (k.clone(), scalar(x))).collect())
        .collect();
    (header, rows)
}

fn table_from_csv(text: &str) -> Table {
    let mut header = BTreeMap::new();
    let mut body = String::new();
    for line in text.lines() {
        match line.strip_prefix("# ") {
            Some(kv) => {
                let (k, v) = kv.split_once('=').unwrap();
                header.insert(k.to_string(), v.to_string());
            }
            None => {
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let names: Vec<String> = reader.headers().map(|h| h.iter().map(String::from).collect()).unwrap_or_default();
    let rows =
        reader.records().map(|r| names.iter().cloned().zip(r.unwrap().iter().map(String::from)).collect()).collect();
    (header, rows)
}

#[test]
fn exact_classical_value_at_q2() {
    let v = json(&["classical-value", "--p", "2", "--s", "1", "--exact"]);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["summary"]["p_win"], "3/4");
    assert_eq!(v["summary"]["bias"], "1/2");
    assert_eq!(v["records"].as_array().unwrap().len(), 2);
}

#[test]
fn subfield_construction_has_27_incidences() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["json", "csv"] {
        let path = dir.path().join(format!("config.{format}"));
        let path = path.to_str().unwrap();
        stdout_ok(&["construct", "--kind", "subfield", "--p", "3", "--s", "2", "--format", format, "--out", path]);
        let v = json(&["incidences", "--in", path]);
        assert_eq!(v["summary"]["incidences"], 27, "{format}");
    }
}

#[test]
fn regularized_configuration_is_reproducible_and_legal() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    let config = config.to_str().unwrap();
    stdout_ok(&["construct", "--kind", "subfield", "--p", "3", "--s", "2", "--out", config]);
    let a = stdout_ok(&["regularize", "--in", config, "--seed", "11"]);
    let b = stdout_ok(&["regularize", "--in", config, "--seed", "11"]);
    assert_eq!(a, b);
    let reg = dir.path().join("reg.json");
    std::fs::write(&reg, &a).unwrap();
    let v = json(&["incidences", "--in", reg.to_str().unwrap()]);
    assert_eq!(v["summary"]["legal"], true);
}

#[test]
fn box_commands_print_exact_rationals() {
    let v = json(&["box", "compose", "--q", "3", "--E", "1/2", "--m", "2"]);
    let probs: Vec<&str> =
        v["records"].as_array().unwrap().iter().map(|r| r["probability"].as_str().unwrap()).collect();
    assert_eq!(probs, ["1/2", "1/4", "1/4"]);
    let v = json(&["box", "distribute", "--q", "5", "--E", "2/3"]);
    assert_eq!(v["summary"]["distributed_bias"], "4/9");
}

#[test]
fn ic_sweep_csv_has_the_documented_columns() {
    let text = stdout_ok(&["ic-sweep", "--p", "3", "--E", "13/20", "--m-min", "2", "--m-max", "8", "--format", "csv"]);
    let (header, rows) = table_from_csv(&text);
    assert_eq!(header["verdict"], "growing");
    let columns = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(columns, "m,|U_m|,per_index_MI,total,verdict");
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[0]["|U_m|"], "4");
}

#[test]
fn json_and_csv_carry_the_same_data() {
    let cases: &[&[&str]] = &[
        &["classical-value", "--p", "3"],
        &["tsirelson", "--q", "2,3,5"],
        &["construct", "--kind", "grid", "--p", "101"],
        &["box", "compose", "--q", "4", "--E", "1/3", "--m", "3"],
        &["box", "simulate", "--q", "3", "--E", "1/2", "--samples", "5000", "--seed", "4"],
        &["ic-sweep", "--p", "2", "--E", "1/2", "--m-max", "5"],
        &["fourier", "maximize", "--p", "3", "--n", "2", "--seed", "1"],
        &["cstar", "--sigma", "3", "--runs", "2000", "--seed", "2"],
    ];
    for args in cases {
        let j = stdout_ok(&[args, &["--format", "json"][..]].concat());
        let c = stdout_ok(&[args, &["--format", "csv"][..]].concat());
        assert_eq!(table_from_json(&j), table_from_csv(&c), "{args:?}");
    }
}

#[test]
fn seeded_commands_are_reproducible() {
    let cases: &[&[&str]] = &[
        &["box", "simulate", "--q", "5", "--E", "1/2", "--game", "dist", "--samples", "20000", "--seed", "9"],
        &["fourier", "verify", "--p", "5", "--n", "3", "--trials", "200", "--seed", "9"],
        &["classical-value", "--p", "11", "--restarts", "4", "--seed", "9"],
        &["cstar", "--sigma", "2", "--runs", "5000", "--seed", "9"],
    ];
    for args in cases {
        assert_eq!(stdout_ok(args), stdout_ok(args), "{args:?}");
    }
    let a = stdout_ok(&["cstar", "--sigma", "2", "--runs", "5000", "--seed", "1"]);
    let b = stdout_ok(&["cstar", "--sigma", "2", "--runs", "5000", "--seed", "2"]);
    assert_ne!(a, b);
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["fourier", "maximize", "--p", "5", "--n", "3", "--restarts", "4", "--seed", "3"];
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_chshq")).args(args).env("CHSHQ_THREADS", threads).output().unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("3"));
    let bad = Command::new(env!("CARGO_BIN_EXE_chshq")).args(args).env("CHSHQ_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn report_is_byte_identical_and_matches_goldens() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    stdout_ok(&["report", "--all", "--seed", "7", "--out", a.to_str().unwrap()]);
    stdout_ok(&["report", "--all", "--seed", "7", "--out", b.to_str().unwrap()]);
    let (fa, fb) = (read_dir_sorted(&a), read_dir_sorted(&b));
    assert_eq!(fa.len(), 8);
    assert!(fa.iter().all(|(name, _)| name.ends_with(".csv")));
    assert_eq!(fa, fb);

    let golden_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/classical_values.json");
    let golden: Vec<Value> = serde_json::from_str(&std::fs::read_to_string(golden_path).unwrap()).unwrap();
    let text = std::fs::read_to_string(a.join("classical_values.csv")).unwrap();
    let (_, rows) = table_from_csv(&text);
    assert_eq!(rows.len(), golden.len());
    for (row, g) in rows.iter().zip(&golden) {
        let join = |v: &Value| v.as_array().unwrap().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        assert_eq!(row["q"], g["q"].to_string());
        assert_eq!(row["wins"], g["wins"].to_string());
        assert_eq!(row["p_win"], g["p_win"].as_str().unwrap());
        assert_eq!(row["bias"], g["bias"].as_str().unwrap());
        assert_eq!(row["f"], join(&g["f"]));
        assert_eq!(row["g"], join(&g["g"]));
    }

    let text = std::fs::read_to_string(a.join("box_identities.csv")).unwrap();
    let (_, rows) = table_from_csv(&text);
    assert!(rows.iter().all(|r| r["closed_form_equal"] == "true"));
}

#[test]
fn exit_codes() {
    assert_eq!(exit_code(&["classical-value", "--p", "6"]), 2);
    assert_eq!(exit_code(&["box", "compose", "--q", "3", "--E", "2", "--m", "1"]), 2);
    assert_eq!(exit_code(&["box", "compose", "--q", "3", "--E", "1/2", "--m", "0"]), 2);
    assert_eq!(exit_code(&["tsirelson", "--q", "1"]), 2);
    assert_eq!(exit_code(&["classical-value", "--q", "9", "--exact"]), 4);
    assert_eq!(exit_code(&["ic-sweep", "--p", "3", "--E", "1/2", "--m-max", "41"]), 4);
    assert_eq!(exit_code(&["incidences", "--in", "/nonexistent/config.json"]), 1);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"q\": 3, \"points\": [[7, 0]], \"lines\": []}").unwrap();
    assert_eq!(exit_code(&["incidences", "--in", bad.to_str().unwrap()]), 2);
    std::fs::write(&bad, "not a config").unwrap();
    assert_eq!(exit_code(&["incidences", "--in", bad.to_str().unwrap()]), 2);
    let out = dir.path().join("missing-dir/out.json");
    assert_eq!(exit_code(&["tsirelson", "--q", "2", "--out", out.to_str().unwrap()]), 1);
}
