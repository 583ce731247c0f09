use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn netcoh(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netcoh"))
        .args(args)
        .current_dir(dir)
        .env_remove("NETCOH_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

/// Real matrix in the state-file shape.
fn state_file(rows: &[&[f64]]) -> Value {
    let entries: Vec<[f64; 2]> = rows.iter().flat_map(|r| r.iter().map(|&x| [x, 0.0])).collect();
    json!({"dim": rows.len(), "entries": entries})
}

fn correlated_control() -> Value {
    let q = 0.25;
    state_file(&[&[q, 0.0, 0.0, q], &[0.0, q, q, 0.0], &[0.0, q, q, 0.0], &[q, 0.0, 0.0, q]])
}

fn bell() -> Value {
    state_file(&[&[0.5, 0.0, 0.0, 0.5], &[0.0; 4], &[0.0; 4], &[0.5, 0.0, 0.0, 0.5]])
}

fn plus_zero() -> Value {
    state_file(&[&[0.5, 0.0, 0.5, 0.0], &[0.0; 4], &[0.5, 0.0, 0.5, 0.0], &[0.0; 4]])
}

fn mixed() -> Value {
    state_file(&[&[0.25, 0.0, 0.0, 0.0], &[0.0, 0.25, 0.0, 0.0], &[0.0, 0.0, 0.25, 0.0], &[0.0, 0.0, 0.0, 0.25]])
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn coherence_of_correlated_control() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "s.json", &correlated_control());
    let o = netcoh(&["coherence", f.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert!((num(&v["rec_net"]) - 1.0).abs() < 1e-9);
    assert!((num(&v["rec_global"]) - 1.0).abs() < 1e-9);
}

#[test]
fn coherence_of_product_state_is_zero() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "s.json", &plus_zero());
    let v = stdout_json(&netcoh(&["coherence", f.to_str().unwrap(), "--cut", "0|1"], dir.path()));
    assert!(num(&v["rec_net"]).abs() < 1e-9);
    assert!((num(&v["rec_local"][0]) - 1.0).abs() < 1e-9);
    // in the Hadamard basis on A the same state is incoherent there
    let v = stdout_json(&netcoh(&["coherence", f.to_str().unwrap(), "--basis", "xz"], dir.path()));
    assert!(num(&v["rec_global"]).abs() < 1e-9);
}

#[test]
fn coherence_csv() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "s.json", &correlated_control());
    let o = netcoh(&["coherence", f.to_str().unwrap(), "--format", "csv"], dir.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].split(',').any(|h| h == "rec_net"));
}

#[test]
fn parse_and_state_errors() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"dim\": 2").unwrap();
    assert_eq!(code(&netcoh(&["coherence", "bad.json"], dir.path())), 2);
    assert_eq!(code(&netcoh(&["coherence", "missing.json"], dir.path())), 2);
    write(dir.path(), "trace2.json", &state_file(&[&[1.0, 0.0], &[0.0, 1.0]]));
    assert_eq!(code(&netcoh(&["classify", "trace2.json"], dir.path())), 3);
    write(dir.path(), "neg.json", &state_file(&[&[1.5, 0.0], &[0.0, -0.5]]));
    assert_eq!(code(&netcoh(&["coherence", "neg.json"], dir.path())), 3);
    write(dir.path(), "ok.json", &bell());
    assert_eq!(code(&netcoh(&["coherence", "ok.json", "--basis", "q"], dir.path())), 2);
    assert_eq!(code(&netcoh(&["coherence", "ok.json", "--cut", "0|0"], dir.path())), 2);
    assert_eq!(code(&netcoh(&["frobnicate"], dir.path())), 2);
}

#[test]
fn classify_verdicts() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "bell.json", &bell());
    let v = stdout_json(&netcoh(&["classify", "bell.json"], dir.path()));
    assert_eq!(v["entangled"], true);
    assert_eq!(v["is_cc"], false);
    assert_eq!(v["is_ppt"], false);

    write(dir.path(), "cc.json", &correlated_control());
    let v = stdout_json(&netcoh(&["classify", "cc.json"], dir.path()));
    assert_eq!(v["is_cc"], true);
    assert_eq!(v["quantum_correlated"], true);
    assert_eq!(v["entangled"], false);

    write(dir.path(), "mixed.json", &mixed());
    let v = stdout_json(&netcoh(&["classify", "mixed.json"], dir.path()));
    assert_eq!(v["quantum_correlated"], false);
    assert_eq!(v["entangled"], false);
    assert!(num(&v["discord_a_to_b"]).abs() < 1e-9 && num(&v["rec_net_in_basis"]).abs() < 1e-9);
}

#[test]
fn out_dir_and_manifest() {
    let dir = TempDir::new().unwrap();
    let body = serde_json::to_string(&bell()).unwrap();
    std::fs::write(dir.path().join("bell.json"), &body).unwrap();
    let o = netcoh(&["coherence", "bell.json", "--out", "res", "--seed", "7"], dir.path());
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_slice(&std::fs::read(dir.path().join("res/coherence.json")).unwrap()).unwrap();
    assert_eq!(report, stdout_json(&o));
    let m: Value = serde_json::from_slice(&std::fs::read(dir.path().join("res/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 7);
    assert_eq!(m["command_line"][1], "coherence");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    use sha2::Digest;
    let digest = hex::encode(sha2::Sha256::digest(body.as_bytes()));
    assert_eq!(m["inputs"][0]["sha256"], digest);
    assert!(m["duration_seconds"].is_number());
}

fn descriptor(extra: Value) -> Value {
    let mut d = json!({
        "task": 2,
        "shots": 20000,
        "seed": 42,
        "unitary_a": {"qubits": 2, "gates": []},
        "unitary_b": {"qubits": 1, "gates": []},
    });
    for (k, v) in extra.as_object().unwrap() {
        d[k] = v.clone();
    }
    d
}

#[test]
fn ndqc2_identity_networks() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "d.json", &descriptor(json!({})));
    let o = netcoh(&["ndqc2", "d.json", "--out", "a"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("iota exact") && text.contains("se empirical"));
    let r: Value = serde_json::from_slice(&std::fs::read(dir.path().join("a/report.json")).unwrap()).unwrap();
    let se = num(&r["se_empirical"]);
    assert!((num(&r["iota_est"]["re"]) - 1.0).abs() <= 4.0 * se);
    assert!(num(&r["iota_est"]["im"]).abs() <= 4.0 * se);
    assert_eq!(r["seed"], 42);
    let t: Value = serde_json::from_slice(&std::fs::read(dir.path().join("a/transcript.json")).unwrap()).unwrap();
    for e in t.as_array().unwrap() {
        let pair = (e["sender"].as_str().unwrap(), e["receiver"].as_str().unwrap());
        assert!(pair != ("Alice", "Bob") && pair != ("Bob", "Alice"));
    }
}

#[test]
fn ndqc2_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let mut gates = descriptor(json!({}));
    gates["unitary_a"] = json!({"qubits": 2, "gates": [{"name": "H", "targets": [0]}, {"name": "CNOT", "targets": [0, 1]}, {"name": "T", "targets": [1]}]});
    write(dir.path(), "d.json", &gates);
    for out in ["x", "y"] {
        assert_eq!(code(&netcoh(&["ndqc2", "d.json", "--out", out], dir.path())), 0);
    }
    for f in ["report.json", "transcript.json"] {
        let a = std::fs::read(dir.path().join("x").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("y").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    // without a descriptor seed, --seed decides
    let mut unseeded = gates.clone();
    unseeded.as_object_mut().unwrap().remove("seed");
    write(dir.path(), "u.json", &unseeded);
    assert_eq!(code(&netcoh(&["ndqc2", "u.json", "--out", "z", "--seed", "42"], dir.path())), 0);
    let a = std::fs::read(dir.path().join("x/report.json")).unwrap();
    let c = std::fs::read(dir.path().join("z/report.json")).unwrap();
    assert_eq!(a, c);
}

#[test]
fn ndqc2_writes_to_working_dir_by_default() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "d.json", &descriptor(json!({"task": 1})));
    assert_eq!(code(&netcoh(&["ndqc2", "d.json"], dir.path())), 0);
    for f in ["report.json", "transcript.json", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn ndqc2_injections_exit_4() {
    let dir = TempDir::new().unwrap();
    for inj in ["server-to-server", "server-sends-state", "server-prepares", "client-applies-unitary", "pure-ancillas"] {
        for task in [1, 2] {
            write(dir.path(), "d.json", &descriptor(json!({"task": task, "injection": inj})));
            let o = netcoh(&["ndqc2", "d.json", "--out", "o"], dir.path());
            assert_eq!(code(&o), 4, "{inj} task {task}: {}", String::from_utf8_lossy(&o.stderr));
        }
    }
}

#[test]
fn ndqc2_bad_descriptors() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "d.json", &descriptor(json!({"task": 3})));
    assert_eq!(code(&netcoh(&["ndqc2", "d.json", "--out", "o"], dir.path())), 2);
    write(dir.path(), "d.json", &descriptor(json!({"shots": 2})));
    assert_eq!(code(&netcoh(&["ndqc2", "d.json", "--out", "o"], dir.path())), 2);
    write(dir.path(), "d.json", &descriptor(json!({"unitary_a": {"dim": 2, "entries": [[2, 0], [0, 0], [0, 0], [1, 0]]}})));
    assert_eq!(code(&netcoh(&["ndqc2", "d.json", "--out", "o"], dir.path())), 3);
    write(dir.path(), "d.json", &descriptor(json!({"surprise": 1})));
    assert_eq!(code(&netcoh(&["ndqc2", "d.json", "--out", "o"], dir.path())), 2);
}

#[test]
fn verify_suites() {
    let dir = TempDir::new().unwrap();
    let o = netcoh(&["verify", "thm4", "--ensemble", "50"], dir.path());
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["ok"], true);
    assert_eq!(v["suites"][0]["failed"], 0);

    let o = netcoh(&["verify", "lemma1", "--format", "csv", "--ensemble", "40"], dir.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("suite,instance,check,value,relation,bound,required,pass\n"));
    for check in ["hadamard-not-strict", "plus-minus-incoherent", "cycle3-strict", "strictness-tests-agree"] {
        assert!(text.contains(check), "{check}");
    }
    assert!(!text.contains(",true,false"));

    assert_eq!(code(&netcoh(&["verify", "thm9"], dir.path())), 2);
    assert_eq!(code(&netcoh(&["verify", "thm4", "--ensemble", "5", "--tolerance=-1"], dir.path())), 1);
}

#[test]
fn verify_output_files_and_threads() {
    let dir = TempDir::new().unwrap();
    let run = |threads: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_netcoh"))
            .args(["verify", "isomorphism", "--ensemble", "20", "--out", out])
            .current_dir(dir.path())
            .env("NETCOH_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1", "one")), 0);
    assert_eq!(code(&run("4", "four")), 0);
    for f in ["verify.csv", "verify.json"] {
        assert_eq!(
            std::fs::read(dir.path().join("one").join(f)).unwrap(),
            std::fs::read(dir.path().join("four").join(f)).unwrap()
        );
    }
    assert_eq!(code(&run("zero", "bad")), 2);
}

#[test]
fn verify_all_default() {
    let dir = TempDir::new().unwrap();
    let started = std::time::Instant::now();
    let o = netcoh(&["verify", "all", "--out", "all"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(started.elapsed().as_secs() < 300);
    let v = stdout_json(&o);
    assert_eq!(v["suites"].as_array().unwrap().len(), 7);
    let csv = std::fs::read_to_string(dir.path().join("all/verify.csv")).unwrap();
    assert!(csv.lines().count() > 1000);
}
