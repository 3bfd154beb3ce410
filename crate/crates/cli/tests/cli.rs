use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qframes::io::hex_to_f64;
use serde_json::Value;
use tempfile::TempDir;

fn qframes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qframes")).args(args).env_remove("QFRAMES_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn num(v: &Value) -> f64 {
    match v {
        Value::String(s) => hex_to_f64(s).unwrap(),
        other => other.as_f64().unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn diag_operator(diag: &[f64]) -> String {
    let d = diag.len();
    let rows = |f: &dyn Fn(usize, usize) -> f64| -> String {
        let r: Vec<String> = (0..d).map(|i| format!("[{}]", (0..d).map(|j| f(i, j).to_string()).collect::<Vec<_>>().join(","))).collect();
        format!("[{}]", r.join(","))
    };
    format!(r#"{{"dim": {d}, "re": {}, "im": {}}}"#, rows(&|i, j| if i == j { diag[i] } else { 0.0 }), rows(&|_, _| 0.0))
}

fn build_frame(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let out = dir.path().join(name);
    let mut full = vec!["build"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", out.to_str().unwrap()]);
    let o = qframes(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_wootters_qutrit() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w3.json");
    let o = qframes(&["build", "--family", "wootters", "--dim", "3", "--out", path(&out)]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("9 elements"), "{text}");
    let a: f64 = text.split("a = ").nth(1).unwrap().trim().parse().unwrap();
    assert!((a - 1.0 / 3.0).abs() < 1e-12);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["frame"]["ops"].as_array().unwrap().len(), 9);
    assert_eq!(doc["dual"]["labels"][4], "(1,1)");
}

#[test]
fn build_even_qubit_is_redundant_and_tight() {
    let o = qframes(&["build", "--family", "even", "--dim", "2", "--out", "/dev/null"]);
    let text = stdout(&o);
    assert!(text.contains("16 elements, coordinate rank 4"), "{text}");
    assert!(text.contains("tight, a = "));
    let a: f64 = text.split("a = ").nth(1).unwrap().trim().parse().unwrap();
    // Σ‖F‖² = d over a normalized frame forces a = 1/d here
    assert!((a - 0.5).abs() < 1e-12);
}

#[test]
fn build_sic_without_fiducial_runs_optimizer() {
    let o = qframes(&["build", "--family", "sic", "--dim", "7", "--out", "/dev/null"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("fiducial: Optimized")).expect("optimizer line");
    let residual: f64 = line.split("residual ").nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(residual < 1e-8);
}

#[test]
fn family_mismatch_quotes_rule() {
    let o = qframes(&["build", "--family", "odd", "--dim", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("odd d >= 3"));
    let o = qframes(&["build", "--family", "ghw", "--dim", "6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("prime power"));
}

#[test]
fn rep_outputs() {
    let dir = TempDir::new().unwrap();
    let frame = build_frame(&dir, "w3.json", &["--family", "wootters", "--dim", "3"]);
    let mixed = write(&dir, "mm.json", &diag_operator(&[1.0 / 3.0; 3]));
    let o = qframes(&["rep", "--frame", path(&frame), "--state", path(&mixed)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["kind"], "state");
    let values: Vec<f64> = doc["values"].as_array().unwrap().iter().map(num).collect();
    assert_eq!(values.len(), 9);
    assert!(values.iter().all(|v| (v - 1.0 / 9.0).abs() < 1e-14));

    let zero = write(&dir, "z.json", &diag_operator(&[1.0, 0.0, 0.0]));
    let grid = dir.path().join("grid.csv");
    let o = qframes(&["rep", "--frame", path(&frame), "--state", path(&zero), "--format", "csv", "--csv", path(&grid)]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert_eq!(csv, std::fs::read_to_string(&grid).unwrap());
    let rows: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect()).collect();
    for (q, row) in rows.iter().enumerate() {
        for v in row {
            let want = if q == 0 { 1.0 / 3.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12, "{csv}");
        }
    }

    let ident = write(&dir, "id.json", &diag_operator(&[1.0; 3]));
    let o = qframes(&["rep", "--frame", path(&frame), "--effect", path(&ident)]);
    let xi: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(xi["kind"], "dual-effect");
    let xi: Vec<f64> = xi["values"].as_array().unwrap().iter().map(num).collect();
    let total: f64 = rows.iter().flatten().zip(&xi).map(|(m, x)| m * x).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn born_and_channel_and_star() {
    let dir = TempDir::new().unwrap();
    let frame = build_frame(&dir, "w3.json", &["--family", "wootters", "--dim", "3"]);
    let zero = write(&dir, "z.json", &diag_operator(&[1.0, 0.0, 0.0]));
    let e = write(&dir, "e.json", &diag_operator(&[0.25, 0.5, 1.0]));
    let o = qframes(&["born", "--frame", path(&frame), "--state", path(&zero), "--effect", path(&e)]);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((num(&r["born"]) - 0.25).abs() < 1e-12);
    assert!((num(&r["born_deformed"]) - 0.25).abs() < 1e-12);
    assert_eq!(r["seed"], 0);

    let shift = r#"{"dim":3,"kraus":[{"dim":3,"re":[[0,0,1],[1,0,0],[0,1,0]],"im":[[0,0,0],[0,0,0],[0,0,0]]}]}"#;
    let kraus = write(&dir, "x.json", shift);
    let o = qframes(&["channel", "--frame", path(&frame), "--kraus", path(&kraus), "--state", path(&zero)]);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let perm: Vec<u64> = r["permutation"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert_eq!(perm, vec![3, 4, 5, 6, 7, 8, 0, 1, 2]);
    let out: Vec<f64> = r["output"]["values"].as_array().unwrap().iter().map(num).collect();
    assert!((out[3] - 1.0 / 3.0).abs() < 1e-12 && out[0].abs() < 1e-12);

    let bad = write(&dir, "bad.json", r#"{"dim":3,"kraus":[{"dim":3,"re":[[1,0,0],[0,1,0],[0,0,0]],"im":[[0,0,0],[0,0,0],[0,0,0]]}]}"#);
    let o = qframes(&["channel", "--frame", path(&frame), "--kraus", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("trace preserving"));

    let o = qframes(&["star", "--frame", path(&frame), "--a", path(&zero), "--b", path(&zero)]);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let re: Vec<f64> = r["re"].as_array().unwrap().iter().map(num).collect();
    for (i, v) in re.iter().enumerate() {
        let want = if i < 3 { 1.0 / 3.0 } else { 0.0 };
        assert!((v - want).abs() < 1e-12);
    }
}

fn verify_ok(args: &[&str]) -> Value {
    let mut full = vec!["verify"];
    full.extend_from_slice(args);
    let o = qframes(&full);
    assert!(o.status.success(), "{}\n{}", stdout(&o), stderr(&o));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["passed"], true);
    r
}

#[test]
fn verify_examples() {
    let r = verify_ok(&["--family", "wootters", "--dim", "5", "--props", "woo"]);
    assert!(r["checks"].as_array().unwrap().len() >= 4);
    verify_ok(&["--family", "ghw", "--p", "2", "--n", "2", "--props", "covariance"]);
    let r = verify_ok(&["--family", "odd", "--dim", "3", "--props", "fano"]);
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["name"] == "fano:involution"));
    verify_ok(&["--family", "constellation", "--dim", "3", "--props", "kernel,dual,born"]);
}

#[test]
fn verify_failure_exits_nonzero() {
    let o = qframes(&["verify", "--family", "sic", "--dim", "2", "--props", "tight"]);
    assert_eq!(o.status.code(), Some(1));
    let o = qframes(&["verify", "--family", "sic", "--dim", "2", "--props", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn frame_files_round_trip_into_verify() {
    let dir = TempDir::new().unwrap();
    let frame = build_frame(&dir, "g9.json", &["--family", "ghw", "--dim", "9"]);
    let r = verify_ok(&["--frame", path(&frame), "--props", "ghw,dual"]);
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["name"] == "file:matches-recipe" && c["passed"] == true));
    // without the recipe only family-independent suites run
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&frame).unwrap()).unwrap();
    doc.as_object_mut().unwrap().remove("spec");
    let bare = write(&dir, "bare.json", &doc.to_string());
    verify_ok(&["--frame", path(&bare), "--props", "dual,normalization,born"]);
}

#[test]
fn sic_find_and_reload() {
    let dir = TempDir::new().unwrap();
    let fid = dir.path().join("f3.json");
    let o = qframes(&["sic-find", "--dim", "3", "--out", path(&fid), "--seed", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&fid).unwrap()).unwrap();
    assert_eq!(doc["provenance"], "optimized");
    assert!(num(&doc["residual"]) < 1e-8);
    let o = qframes(&["build", "--family", "sic", "--dim", "3", "--fiducial-file", path(&fid), "--out", "/dev/null"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("fiducial: Loaded"));
}

#[test]
fn sweep_defaults_and_determinism() {
    let o = qframes(&["sweep", "--dim", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["result"]["trials"], 1000);
    assert_eq!(r["result"]["nonnegative_duals"], 0);

    let a = qframes(&["sweep", "--dim", "3", "--trials", "20", "--seed", "11"]);
    let b = qframes(&["sweep", "--dim", "3", "--trials", "20", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_qframes")).args(["sweep", "--dim", "3", "--trials", "20"]).env("QFRAMES_SEED", "11").output().unwrap();
    assert_eq!(env.stdout, a.stdout);
    let c = qframes(&["sweep", "--dim", "3", "--trials", "20", "--seed", "12"]);
    assert_ne!(c.stdout, a.stdout);

    let o = qframes(&["sweep", "--dim", "6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("d <= 5"));
}

#[test]
fn negativity_reports() {
    let o = qframes(&["negativity", "--family", "sic", "--dim", "2", "--samples", "40"]);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["failed_conditions"], serde_json::json!(["a:effects"]));
    let o = qframes(&["negativity", "--family", "wootters", "--dim", "3", "--samples", "200"]);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r["failed_conditions"].as_array().unwrap().contains(&serde_json::json!("a:states")));
}

#[test]
fn schema_diagnostics() {
    let dir = TempDir::new().unwrap();
    let frame = build_frame(&dir, "w2.json", &["--family", "wootters", "--dim", "2"]);
    let broken = write(&dir, "broken.json", "{\n  \"dim\": 2,\n  \"re\": [[1, 0], [0, 0]],\n  \"im\": [[0, 0] [0, 0]]\n}\n");
    let o = qframes(&["rep", "--frame", path(&frame), "--state", path(&broken)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
    let skew = write(&dir, "skew.json", r#"{"dim": 2, "re": [[0.5, 0.2], [0, 0.5]], "im": [[0, 0], [0, 0]]}"#);
    let o = qframes(&["rep", "--frame", path(&frame), "--state", path(&skew)]);
    assert!(stderr(&o).contains("entry (0,1)") || stderr(&o).contains("entry (1,0)"), "{}", stderr(&o));
    let o = qframes(&["sweep", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(2));
}
