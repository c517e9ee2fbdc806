use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fracpseudo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracpseudo")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ledger(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("ledger.json")).unwrap()).unwrap()
}

const DIRECT: &str = r#"
alpha = 0.7
T = 1.0

[spectrum]
name = "dirichlet_laplacian_pair"
N = 4

[grid]
J = 10

[data]
phi = { power = -1.0 }

[data.source]
kind = "constant"
amplitude = { values = [1.0, -2.0, 0.5, 3.0] }
"#;

#[test]
fn ml_eval_exponential_case() {
    let o = fracpseudo(&["ml-eval", "--alpha", "1", "--z", "-1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: f64 = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
    assert_eq!(v, (-1.0f64).exp());
}

#[test]
fn ml_eval_several_arguments() {
    let o = fracpseudo(&["ml-eval", "--alpha", "0.5", "--z", "0,-1,-4"]);
    assert!(o.status.success());
    let lines: Vec<f64> = String::from_utf8(o.stdout).unwrap().lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], 1.0);
    assert!(lines[1] > lines[2] && lines[2] > 0.0);
}

#[test]
fn forced_case_i_below_one_half_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = DIRECT
        .replace("alpha = 0.7", "alpha = 0.3")
        .replace("[data]", "[quad]\nrepresentation = \"case_i\"\n\n[data]")
        .replace("kind = \"constant\"", "kind = \"sin\"\nderivative = \"none\"");
    let path = write(dir.path(), "c.toml", &cfg);
    let o = fracpseudo(&["direct", "--config", &path, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("1/2 < alpha"), "{msg}");
    assert!(msg.contains("c.toml:13:"), "{msg}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_keys_and_bad_values_exit_2_with_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "c.toml", &DIRECT.replace("J = 10", "J = 10\nsteps = 4"));
    let o = fracpseudo(&["direct", "--config", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("c.toml:11:"), "{}", stderr(&o));

    let path = write(dir.path(), "d.toml", &DIRECT.replace("N = 4", "N = 3"));
    let o = fracpseudo(&["direct", "--config", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("4 values for N = 3"), "{}", stderr(&o));
}

#[test]
fn quadrature_failure_exits_3_with_mode() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = DIRECT
        .replace("kind = \"constant\"", "kind = \"sin\"\nomega = 40.0")
        .replace("[data]", "[quad]\ntol = 1e-15\nmax_doublings = 1\n\n[data]");
    let path = write(dir.path(), "c.toml", &cfg);
    let o = fracpseudo(&["direct", "--config", &path]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("in mode 1"), "{}", stderr(&o));
}

#[test]
fn direct_outputs_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "c.toml", DIRECT);
    let out = dir.path().join("direct");
    let o = fracpseudo(&["direct", "--config", &path, "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(report.starts_with("mode_index,time,value,tag\n1,0,1,u\n"));
    // 6 tags, 4 modes, 11 nodes
    assert_eq!(report.lines().count(), 1 + 6 * 4 * 11);
    assert!(out.join("source.csv").exists());
    assert!(ledger(&out)["estimates"].as_array().unwrap().len() == 5);

    let back = dir.path().join("inverse");
    let o = fracpseudo(&["inverse", "--from-direct", out.to_str().unwrap(), "--out", back.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let d = &ledger(&back)["diagnostics"];
    assert!(d["round-trip-error"].as_f64().unwrap() < 1e-10, "{d}");
    assert_eq!(d["round-trip-pass"].as_f64(), Some(1.0));
    let f = fs::read_to_string(back.join("source.csv")).unwrap();
    let f: Vec<f64> = f.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    for (a, b) in f.iter().zip([1.0, -2.0, 0.5, 3.0]) {
        assert!((a - b).abs() < 1e-10 * 3.0, "{a} vs {b}");
    }
}

#[test]
fn inverse_with_equal_states_has_zero_constants() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.csv", "mode_index,value\n1,1\n2,-0.5\n3,0.25\n");
    let cfg = r#"
mode = "inverse"
alpha = 0.4
T = 0.5
[spectrum]
name = "bilaplacian_pair"
N = 3
[grid]
J = 4
[data]
phi = { file = "c.csv" }
psi = { file = "c.csv" }
"#;
    let path = write(dir.path(), "i.toml", cfg);
    let out = dir.path().join("out");
    let o = fracpseudo(&["inverse", "--config", &path, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let l = ledger(&out);
    assert!(l["certificate"]["c"].as_array().unwrap().iter().all(|c| c.as_f64() == Some(0.0)));
    assert_eq!(l["diagnostics"]["f-minus-Mphi"].as_f64(), Some(0.0));
}

#[test]
fn mode_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "c.toml", &format!("mode = \"inverse\"\n{DIRECT}"));
    let o = fracpseudo(&["direct", "--config", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("c.toml:1:"));
}
