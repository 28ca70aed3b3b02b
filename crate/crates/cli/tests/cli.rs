use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn workdir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("lasserre-gap-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lasserre-gap"))
        .env("LASSERRE_GAP_WORKDIR", dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .last()
        .unwrap()
        .to_string()
}

fn read(p: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn gen_is_byte_identical() {
    let d = workdir("gen");
    let a = path_of(&run(&d, &["gen", "--n", "3", "--m", "1", "--seed", "0"]));
    let first = std::fs::read(&a).unwrap();
    let b = path_of(&run(&d, &["gen", "--n", "3", "--m", "1", "--seed", "0"]));
    assert_eq!(a, b);
    assert_eq!(std::fs::read(&b).unwrap(), first);
    let v = read(&a);
    assert_eq!(v["schema"], "v1");
    assert_eq!(v["instance"]["prng"], "chacha8-u64rej/v1");
}

#[test]
fn certify_balance_on_planted_host() {
    let d = workdir("certify");
    let i = path_of(&run(
        &d,
        &["gen", "--n", "4", "--beta", "2", "--seed", "7", "--planted"],
    ));
    let g = path_of(&run(
        &d,
        &[
            "build",
            "--instance",
            &i,
            "--beta",
            "2",
            "--M",
            "2",
            "--seed",
            "7",
        ],
    ));
    let out = run(
        &d,
        &[
            "certify",
            "--target",
            "balance",
            "--instance",
            &i,
            "--gadget",
            &g,
        ],
    );
    let rep = read(&path_of(&out));
    assert_eq!(rep["accepted"], true);
    let delta = rep["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["identity"] == "bs-balance")
        .unwrap();
    assert_eq!(delta["observed"], "24/1");
}

#[test]
fn tampered_gadget_exits_with_identity_code() {
    let d = workdir("tamper");
    let i = path_of(&run(
        &d,
        &["gen", "--n", "4", "--beta", "2", "--seed", "1", "--planted"],
    ));
    let g = path_of(&run(
        &d,
        &[
            "build",
            "--instance",
            &i,
            "--beta",
            "2",
            "--M",
            "2",
            "--seed",
            "1",
        ],
    ));
    let mut v = read(&g);
    let edges = v["gadget"]["edges"].as_array_mut().unwrap();
    let k = edges.iter().position(|e| e["tag"] == "clique").unwrap();
    edges.remove(k);
    let bad = d.join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
    let out = run(
        &d,
        &["lift", "--instance", &i, "--gadget", bad.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_artifact_and_schema_mismatch_fail() {
    let d = workdir("missing");
    let out = run(
        &d,
        &[
            "certify",
            "--instance",
            "nope.json",
            "--gadget",
            "nope.json",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing artifact"));
    let old = d.join("old.json");
    std::fs::write(&old, r#"{"schema":"v0","kind":"instance"}"#).unwrap();
    let out = run(
        &d,
        &[
            "build",
            "--instance",
            old.to_str().unwrap(),
            "--beta",
            "2",
            "--M",
            "2",
        ],
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));
}

#[test]
fn non_convergence_exit_code() {
    let d = workdir("solve");
    let out = run(
        &d,
        &[
            "solve",
            "--graph",
            "cycle:6",
            "--tau",
            "0.3",
            "--r",
            "2",
            "--max-iter",
            "3",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    let ok = run(
        &d,
        &[
            "solve", "--graph", "cycle:6", "--tau", "0.3", "--r", "1", "--csv",
        ],
    );
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("tau_prime,value"));
}

#[test]
fn brute_and_guard() {
    let d = workdir("brute");
    let c = read(&path_of(&run(
        &d,
        &["brute", "--graph", "complete:4", "--tau", "0.5"],
    )));
    assert_eq!(c["stats"]["crossing"], 4);
    assert_eq!(c["mode"], "exact");
    let p = read(&path_of(&run(
        &d,
        &["brute", "--graph", "path:3", "--sparsest"],
    )));
    assert_eq!(p["stats"]["sparsity"], "1/2");
    let out = run(
        &d,
        &[
            "brute",
            "--graph",
            "path:30",
            "--sparsest",
            "--mode",
            "exact",
        ],
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("limited to 26"));
}

#[test]
fn small_gap_pipeline() {
    let d = workdir("gap");
    let out = run(
        &d,
        &[
            "gap",
            "--planted",
            "--n",
            "3",
            "--beta",
            "2/3",
            "--M",
            "3",
            "--tau",
            "0.3",
            "--r",
            "1",
            "--seed",
            "4",
        ],
    );
    let rep = read(&path_of(&out));
    assert_eq!(rep["vertices"], 22);
    assert_eq!(rep["integral"]["mode"], "exact");
    assert!(rep["identities"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["accepted"] == true));
    let ratio = rep["gap_ratio"].as_f64().unwrap();
    assert!(ratio >= rep["ratio_floor"].as_f64().unwrap());
    assert!(rep["config"]["seed"] == 4 && rep["config"]["prng"] == "chacha8-u64rej/v1");
}

#[test]
fn exports() {
    let d = workdir("export");
    let i = path_of(&run(
        &d,
        &["gen", "--n", "4", "--beta", "2", "--seed", "2", "--planted"],
    ));
    let g = path_of(&run(
        &d,
        &[
            "build",
            "--instance",
            &i,
            "--beta",
            "2",
            "--M",
            "2",
            "--seed",
            "2",
        ],
    ));
    let e = d.join("h.edges");
    path_of(&run(
        &d,
        &[
            "export",
            "--graph",
            &g,
            "--format",
            "edges",
            "--out",
            e.to_str().unwrap(),
        ],
    ));
    let text = std::fs::read_to_string(&e).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 236);
    let s = d.join("c.dat-s");
    path_of(&run(
        &d,
        &[
            "export",
            "--graph",
            "cycle:5",
            "--format",
            "sdpa",
            "--tau",
            "0.2",
            "--out",
            s.to_str().unwrap(),
        ],
    ));
    assert!(std::fs::read_to_string(&s).unwrap().lines().count() > 3);
}
