use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sigspec"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sigspec-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, format!("{body}\n[optimizer]\nrestarts = 4\nadam_iterations = 300\n")).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const IX: &str = "[problem]\nk = 2\nfamily = { kind = \"explicit\", paulis = [\"IX\"] }\n";

#[test]
fn scan_single_x() {
    let dir = workdir("ix");
    let cfg = write_config(&dir, IX);
    let out = dir.join("ix.json");
    let o = run(bin().args(["scan", "--config"]).arg(&cfg).arg("--out").arg(&out));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&out);
    let r = &doc["result"];
    assert_eq!(r["shape"], "interval");
    assert!(r["lambda_min"].as_f64().unwrap() < 1e-6);
    assert!((r["lambda_max"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(doc["config"]["optimizer"]["restarts"], 4);
    assert_eq!(doc["config"]["problem"]["n"], 2);
}

#[test]
fn scan_reproduces_from_snapshot() {
    let dir = workdir("snap");
    let cfg = write_config(&dir, IX);
    let out = dir.join("first.json");
    assert_eq!(code(&run(bin().args(["scan", "--grid", "5", "--config"]).arg(&cfg).arg("--out").arg(&out))), 0);
    let first = std::fs::read(&out).unwrap();
    let copy = dir.join("copy.json");
    std::fs::write(&copy, &first).unwrap();
    // the snapshot names `first.json` as its output, so the rerun overwrites it
    assert_eq!(code(&run(bin().args(["scan", "--config"]).arg(&copy))), 0);
    assert_eq!(std::fs::read(&out).unwrap(), first);
}

#[test]
fn csv_and_json_agree() {
    let dir = workdir("fmt");
    let cfg = write_config(&dir, IX);
    let (j, c) = (dir.join("r.json"), dir.join("r.csv"));
    assert_eq!(code(&run(bin().args(["scan", "--grid", "5", "--config"]).arg(&cfg).arg("--out").arg(&j))), 0);
    assert_eq!(code(&run(bin().args(["scan", "--grid", "5", "--format", "csv", "--config"]).arg(&cfg).arg("--out").arg(&c))), 0);
    let points = read_json(&j)["result"]["points"].as_array().unwrap().clone();
    let text = std::fs::read_to_string(&c).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let header = reader.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), points.len());
    assert!(!rows.is_empty());
    for (row, point) in rows.iter().zip(&points) {
        for (name, field) in header.iter().zip(row.iter()) {
            match &point[name] {
                Value::Null => assert_eq!(field, "", "column {name}"),
                Value::String(s) => assert_eq!(field, s, "column {name}"),
                Value::Number(n) => assert_eq!(field.parse::<f64>().unwrap(), n.as_f64().unwrap(), "column {name}"),
                other => assert_eq!(field, other.to_string(), "column {name}"),
            }
        }
    }
    // the snapshot is embedded as comments
    assert!(text.lines().any(|l| l == "# format = \"csv\""));
}

#[test]
fn scan_mix_cyclic_basis() {
    let dir = workdir("mix");
    let cfg = write_config(&dir, "[problem]\nk = 2\nfamily = { kind = \"mix\", n = 5 }\nmode = \"cyclic_basis\"\n");
    let out = dir.join("mix.json");
    let o = run(bin().args(["scan", "--grid", "0", "--config"]).arg(&cfg).arg("--out").arg(&out));
    assert_eq!(code(&o), 0);
    let r = &read_json(&out)["result"];
    assert!(r["lambda_min"].as_f64().unwrap() < 1e-3);
    assert!((r["lambda_max"].as_f64().unwrap() - 1.25f64.sqrt()).abs() < 1e-3);
    assert_eq!(r["shape"], "unclassified");
}

#[test]
fn mode_flag_without_admissible_branch() {
    let dir = workdir("empty");
    // E3 with the shift-invariant restriction has no admissible code
    let e3 = "[problem]\nk = 2\nfamily = { kind = \"explicit\", paulis = [\"XII\",\"IXI\",\"IIX\",\"YII\",\"IYI\",\"IIY\",\"ZZI\",\"ZIZ\",\"IZZ\",\"ZZZ\"] }\n";
    let cfg = write_config(&dir, e3);
    let out = dir.join("e3.json");
    let o = run(bin().args(["scan", "--mode", "cyclic_basis", "--config"]).arg(&cfg).arg("--out").arg(&out));
    assert_eq!(code(&o), 0);
    let doc = read_json(&out);
    assert_eq!(doc["result"]["shape"], "empty");
    assert_eq!(doc["config"]["problem"]["mode"], "cyclic_basis");
}

#[test]
fn config_and_io_errors() {
    let dir = workdir("err");
    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "[problem]\nk = \"two\"\n").unwrap();
    assert_eq!(code(&run(bin().args(["scan", "--config"]).arg(&bad))), 2);
    assert_eq!(code(&run(bin().args(["scan"]))), 2);
    let cfg = write_config(&dir, IX);
    assert_eq!(code(&run(bin().args(["scan", "--restarts", "0", "--config"]).arg(&cfg))), 2);
    assert_eq!(code(&run(bin().args(["scan", "--config"]).arg(dir.join("missing.toml")))), 3);
    assert_eq!(code(&run(bin().args(["scan", "--grid", "0", "--out", "/nonexistent/dir/x.json", "--config"]).arg(&cfg))), 3);
}

#[test]
fn verify_examples() {
    let o = run(bin().args(["verify", "n3_E2", "--grid", "20"]));
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().filter(|l| l.starts_with("ok")).count(), 20);
    assert_eq!(code(&run(bin().args(["verify", "pi52_asym", "--param", "c0_sq=0.3"]))), 0);
    let o = run(bin().args(["verify", "pi52_asym", "--param", "c0_sq=0.1"]));
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("c0_sq=0.1") && err.contains("outside domain"), "{err}");
    assert_eq!(code(&run(bin().args(["verify", "no_such_family"]))), 2);
}

#[test]
fn study_commands() {
    let dir = workdir("study");
    let out = dir.join("c.json");
    let o = run(bin().args(["study", "classify-2q", "--restarts", "4", "--out"]).arg(&out));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&out);
    assert_eq!(doc["result"]["instances"].as_array().unwrap().len(), 35);
    let groups = doc["result"]["checks"].as_array().unwrap().iter().filter(|c| c["name"].as_str().unwrap().starts_with("group")).count();
    assert_eq!(groups, 3);

    let out = dir.join("d.json");
    assert_eq!(code(&run(bin().args(["study", "disconnected", "--out"]).arg(&out))), 0);
    assert!(read_json(&out)["result"]["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));

    assert_eq!(code(&run(bin().args(["study", "no-such-study"]))), 2);
}

#[test]
fn families_listing() {
    let o = run(bin().arg("families"));
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for id in ["n3_E2", "c522", "pi52_asym", "mix52", "s4"] {
        assert!(text.lines().any(|l| l.starts_with(id)), "{id} missing");
    }
}

#[test]
fn table_study_reports_every_cell() {
    let dir = workdir("table");
    let cfg = dir.join("budget.toml");
    std::fs::write(&cfg, "[optimizer]\nrestarts = 4\nadam_iterations = 300\n").unwrap();
    let out = dir.join("t.json");
    let o = run(bin().args(["study", "symmetry-table", "--config"]).arg(&cfg).arg("--out").arg(&out));
    // one reference cell disagrees with exact codes the search finds, so the study exits 1
    assert!(matches!(code(&o), 0 | 1));
    let instances = read_json(&out)["result"]["instances"].as_array().unwrap().clone();
    assert_eq!(instances.len(), 14 * 5);
    assert!(instances.iter().all(|i| i["matches"].is_boolean()));
}
