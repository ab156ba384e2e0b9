use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const KINDS: [&str; 8] = [
    "bell",
    "mix",
    "qutrit",
    "proper-subalgebra",
    "larger-memory",
    "product-extension",
    "appendix-c-1",
    "appendix-c-2",
];

fn zuslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zuslab"))
        .args(args)
        .env_remove("ZUSLAB_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", stdout(o)))
}

fn construct(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(format!("{name}.json"));
    let mut full = vec!["construct"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let o = zuslab(&full);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    path
}

fn run(cmd: &str, file: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, file.to_str().unwrap()];
    args.extend_from_slice(extra);
    zuslab(&args)
}

#[test]
fn check_zus_bell_and_mix() {
    let dir = TempDir::new().unwrap();
    let bell = construct(&dir, "bell", &["bell"]);
    let mix = construct(&dir, "mix", &["mix"]);
    assert_eq!(code(&run("check-zus", &bell, &["--family", "S1"])), 0);
    let o = run("check-zus", &mix, &["--family", "S1"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("(+,-)"));
    let v = json(&run("check-zus", &mix, &["--family", "S1", "--json"]));
    assert_eq!(v["common_zus"], false);
    assert_eq!(v["settings"][1]["failing_pair"], serde_json::json!(["+", "-"]));
    assert_eq!(code(&run("check-zus", &mix, &["--family", "S2"])), 0);
}

#[test]
fn malformed_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{").unwrap();
    for cmd in ["check-zus", "analyze", "normal-form", "steering"] {
        let o = run(cmd, &bad, &["--json"]);
        assert_eq!(code(&o), 2);
        assert_eq!(json(&o)["error"]["kind"], "Schema");
    }
    // valid JSON, invalid state
    let bell = construct(&dir, "bell", &["bell"]);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&bell).unwrap()).unwrap();
    v["state"]["rho"][0][0] = serde_json::json!([2.0, 0.0]);
    std::fs::write(&bad, v.to_string()).unwrap();
    let o = run("check-zus", &bad, &["--json"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["error"]["kind"], "TraceNotOne");
    assert_eq!(code(&run("check-zus", &dir.path().join("missing.json"), &[])), 2);
    assert_eq!(code(&run("check-zus", &bell, &["--family", "S9"])), 2);
    assert_eq!(code(&run("check-zus", &bell, &["--tol", "-1"])), 2);
}

#[test]
fn analyze_reports() {
    let dir = TempDir::new().unwrap();
    let bell = construct(&dir, "bell", &["bell"]);
    let o = run("analyze", &bell, &["--family", "S1"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("algebra: full M₂"), "{text}");
    assert!(text.contains("rigid: pure, maximally entangled"), "{text}");

    let mix = construct(&dir, "mix", &["mix"]);
    let text = stdout(&run("analyze", &mix, &["--family", "S2"]));
    assert!(text.contains("algebra: dim 2 (proper)"), "{text}");
    assert!(text.contains("rigidity theorem silent"), "{text}");

    let qutrit = construct(&dir, "qutrit", &["qutrit"]);
    let v = json(&run("analyze", &qutrit, &["--json"]));
    assert_eq!(v["algebra"]["dim"], 5);
    assert_eq!(v["steering_pass"], true);
    assert_eq!(v["rigidity"]["theorem_violation"], false);
}

#[test]
fn proper_subalgebra_is_a_non_maximally_entangled_azus() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "ps", &["proper-subalgebra", "--blocks", "2x2"]);
    let v = json(&run("analyze", &f, &["--json"]));
    assert_eq!(v["a_zus"]["is_azus"], true);
    assert_eq!(v["a_zus"]["source"], "algebra_generators");
    assert_eq!(v["rigidity"]["conclusions"]["is_max_entangled"], false);
    assert_eq!(v["rigidity"]["hypotheses"]["common_zus"], true);
    assert_eq!(v["rigidity"]["hypotheses"]["algebra_full"], false);
}

#[test]
fn normal_form_examples() {
    let dir = TempDir::new().unwrap();
    let lm = construct(&dir, "lm", &["larger-memory", "--d", "2", "--sigma", "mixed"]);
    let v = json(&run("normal-form", &lm, &["--json"]));
    assert_eq!(v["exit_code"], 0);
    let b = &v["blocks"][0];
    assert_eq!((b["n"].as_u64(), b["k"].as_u64()), (Some(2), Some(2)));
    assert_eq!(b["tau_spectrum"].as_array().unwrap().len(), 2);
    for t in b["tau_spectrum"].as_array().unwrap() {
        assert!((t.as_f64().unwrap() - 0.25).abs() < 1e-9);
    }

    let bell = construct(&dir, "bell", &["bell"]);
    let v = json(&run("normal-form", &bell, &["--json"]));
    let b = &v["blocks"][0];
    assert_eq!((b["n"].as_u64(), b["k"].as_u64()), (Some(2), Some(1)));
    assert!((b["tau_spectrum"][0].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!(v.get("transform_u").is_none());
    let v = json(&run("normal-form", &bell, &["--json", "--full-output"]));
    assert!(v["transform_u"].is_array() && v["full_algebra_form"]["u"].is_array());

    let mix = construct(&dir, "mix", &["mix"]);
    let o = run("normal-form", &mix, &["--family", "S1", "--json"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["error"]["kind"], "NotAZus");
}

/// Eigenvalues of a 2×2 Hermitian matrix in closed form.
fn hermitian2_spectrum(m: &Value) -> [f64; 2] {
    let a = m[0][0][0].as_f64().unwrap();
    let d = m[1][1][0].as_f64().unwrap();
    let (br, bi) = (m[0][1][0].as_f64().unwrap(), m[0][1][1].as_f64().unwrap());
    let r = (((a - d) / 2.0).powi(2) + br * br + bi * bi).sqrt();
    [(a + d) / 2.0 + r, (a + d) / 2.0 - r]
}

#[test]
fn larger_memory_recovers_sigma_spectrum() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "lm3", &["larger-memory", "--d", "3", "--sigma", "random", "--seed", "11"]);
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    let want = hermitian2_spectrum(&file["metadata"]["params"]["memory"]);
    let v = json(&run("normal-form", &f, &["--json"]));
    let got: Vec<f64> = v["full_algebra_form"]["sigma_spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(got.len(), 2);
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-8, "{got:?} vs {want:?}");
    }
    let tau: Vec<f64> = v["blocks"][0]["tau_spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(tau.len(), 2);
    for (t, w) in tau.iter().zip(want) {
        assert!((t - w / 3.0).abs() < 1e-8);
    }
}

#[test]
fn steering_reports() {
    let dir = TempDir::new().unwrap();
    let q = construct(&dir, "q", &["qutrit"]);
    let o = run("steering", &q, &["--json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["settings"].as_array().unwrap().len(), 2);
    for s in v["settings"].as_array().unwrap() {
        assert_eq!(s["pass"], true);
        assert_eq!(s["decoder"]["ranks"], serde_json::json!([2, 1]));
    }

    let mix = construct(&dir, "mix", &["mix"]);
    let o = run("steering", &mix, &["--family", "S1"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("X: FAIL"));

    // single-setting trivial measurement
    let bell = construct(&dir, "bell", &["bell"]);
    let mut file: Value = serde_json::from_str(&std::fs::read_to_string(&bell).unwrap()).unwrap();
    file["pvm_families"] = serde_json::json!({
        "T": [{ "name": "I", "projections": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]] }]
    });
    let trivial = dir.path().join("trivial.json");
    std::fs::write(&trivial, file.to_string()).unwrap();
    let v = json(&run("steering", &trivial, &["--json"]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["settings"][0]["decoder"]["ranks"], serde_json::json!([2]));
}

#[test]
fn every_constructed_file_is_accepted() {
    let dir = TempDir::new().unwrap();
    for kind in KINDS {
        let f = construct(&dir, kind, &[kind]);
        for cmd in ["check-zus", "analyze", "normal-form", "steering"] {
            let o = run(cmd, &f, &[]);
            assert!(
                matches!(code(&o), 0 | 1),
                "{cmd} on {kind}: {}",
                String::from_utf8_lossy(&o.stderr)
            );
        }
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
        assert_eq!(v["version"], "zuslab/1");
        assert_eq!(v["metadata"]["kind"], kind);
    }
}

#[test]
fn construct_errors_and_seeds() {
    let o = zuslab(&["construct", "proper-subalgebra", "--blocks", "2x1", "--json"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["error"]["kind"], "NotProper");
    let o = zuslab(&["construct", "proper-subalgebra", "--blocks", "2x2,1x1", "--block-index", "3"]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&zuslab(&["construct", "proper-subalgebra", "--blocks", "2y2"])), 2);
    assert_eq!(code(&zuslab(&["construct", "bell", "--d", "3"])), 2);
    assert_eq!(code(&zuslab(&["construct", "appendix-c-2", "--k", "3"])), 2);
    assert_eq!(code(&zuslab(&["construct", "nonsense"])), 2);

    let a = zuslab(&["construct", "larger-memory", "--sigma", "random", "--seed", "7"]);
    let b = zuslab(&["construct", "larger-memory", "--sigma", "random", "--seed", "7"]);
    let c = zuslab(&["construct", "larger-memory", "--sigma", "random", "--seed", "8"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_zuslab"))
        .args(["construct", "larger-memory", "--sigma", "random"])
        .env("ZUSLAB_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);
}

fn without_timestamp(o: &Output) -> Value {
    let mut v = json(o);
    assert!(v["timestamp"].is_string());
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn json_reports_are_stable() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "ps", &["proper-subalgebra", "--blocks", "2x2,1x1", "--random-basis", "--seed", "5"]);
    for cmd in ["check-zus", "analyze", "normal-form", "steering"] {
        let flags: &[&str] = if cmd == "normal-form" { &["--json", "--full-output"] } else { &["--json"] };
        let a = run(cmd, &f, flags);
        let b = run(cmd, &f, flags);
        assert_eq!(without_timestamp(&a), without_timestamp(&b), "{cmd}");
        let strip = |o: &Output| {
            stdout(o)
                .lines()
                .filter(|l| !l.contains("\"timestamp\""))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(&a), strip(&b), "{cmd}");
    }
}

#[test]
fn out_flag_writes_report() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "bell", &["bell"]);
    let out = dir.path().join("report.json");
    let o = run("check-zus", &f, &["--json", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema"], "zuslab/1");
    assert_eq!(v["command"], "check-zus");
}
