use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

use quinfo::channels::{example_channel, MultiwayChannel, MultiwayCode};
use quinfo::document::{Code, Object, StateObject};
use quinfo::linalg::{c, Mat};
use quinfo::{DensityState, KrausMap, Label, Povm, TensorProduct};
use quinfo_cli::{run, EXIT_INVALID, EXIT_OK};

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn quinfo(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("quinfo").chain(args.iter().copied()), &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &Path, name: &str, object: Object) -> PathBuf {
    let path = dir.join(name);
    object.to_document().write(&path).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn bell() -> StateObject {
    let t = TensorProduct::new(vec![quinfo::BlockAlgebra::full(2), quinfo::BlockAlgebra::full(2)]).unwrap();
    let h = 0.5;
    let mut m = Mat::zeros(4, 4);
    for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        m[(i, j)] = c(h, 0.0);
    }
    let state = DensityState::new(t.from_kron_dense(&m).unwrap()).unwrap();
    StateObject {
        state,
        factors: (0..2).map(|k| t.factor_embedding(k).unwrap()).collect(),
    }
}

fn adder() -> MultiwayChannel {
    let kernel = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ];
    MultiwayChannel::classical(&[2, 2], &kernel).unwrap()
}

#[test]
fn example_reports_the_table() {
    let o = quinfo(&["example"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!((rows[0]["value_bits"].as_f64().unwrap() - 0.399).abs() < 1e-3);
    assert!(o.stderr.contains("h(alpha) - h(beta)"));
    assert!(o.stderr.contains("I(X:Z|Y)"));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(quinfo(&["--help"]).code, EXIT_OK);
    assert_eq!(quinfo(&["--version"]).code, EXIT_OK);
    assert_eq!(quinfo(&["no-such-command"]).code, EXIT_INVALID);
    assert_eq!(quinfo(&["check"]).code, EXIT_INVALID);
}

#[test]
fn unknown_theorem_lists_the_registry() {
    let o = quinfo(&["check", "--theorem", "nope", "--random", "3"]);
    assert_eq!(o.code, EXIT_INVALID);
    assert!(o.stderr.contains("registered theorems"));
    assert!(o.stderr.contains("strong") || o.stderr.contains("ssa"));
}

#[test]
fn random_check_is_deterministic() {
    let a = quinfo(&["check", "--theorem", "ssa", "--random", "25", "--seed", "9"]);
    let b = quinfo(&["check", "--theorem", "ssa", "--random", "25", "--seed", "9"]);
    assert_eq!(a.code, EXIT_OK, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout.lines().count(), 25);
    for line in a.stdout.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["pass"], Value::Bool(true));
    }
    let c = quinfo(&["check", "--theorem", "ssa", "--random", "25", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn conjecture_probe_writes_findings() {
    let dir = tempfile::tempdir().unwrap();
    let findings = dir.path().join("findings.jsonl");
    let o = quinfo(&[
        "check",
        "--theorem",
        "separability_conjecture",
        "--random",
        "20",
        "--findings",
        s(&findings),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(findings.exists());
    assert!(o.stderr.contains("counterexample candidates"));
}

#[test]
fn document_checks_and_entropy() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "bell.json", Object::State(bell()));
    let o = quinfo(&["check", "--theorem", "triangle", "--input", s(&state)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let o = quinfo(&["check", "--theorem", "fano", "--input", s(&state)]);
    assert_eq!(o.code, EXIT_INVALID);

    let o = quinfo(&[
        "entropy", "--state", s(&state), "--language", "alg", "--quantity", "Hcond", "--x", "factor:0", "--y",
        "factor:1",
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert!((v["value_bits"].as_f64().unwrap() + 1.0).abs() < 1e-12);

    let o = quinfo(&["entropy", "--state", s(&state), "--language", "obs", "--quantity", "I", "--x", "factor:0"]);
    assert_eq!(o.code, EXIT_INVALID);

    let povm = write(dir.path(), "z.json", Object::Povm(Povm::computational(&quinfo::BlockAlgebra::full(2))));
    let o = quinfo(&["measure", "--state", s(&state), "--povm", s(&povm)]);
    assert_eq!(o.code, EXIT_INVALID, "a qubit POVM does not act on the two-qubit state");
}

#[test]
fn bad_documents_are_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"schema_version": 7, "kind": "state", "payload": {}}"#).unwrap();
    let o = quinfo(&["check", "--theorem", "ssa", "--input", s(&path)]);
    assert_eq!(o.code, EXIT_INVALID);
    assert!(o.stderr.contains("schema_version"));
    std::fs::write(&path, r#"{"schema_version": 1, "kind": "teapot", "payload": {}}"#).unwrap();
    let o = quinfo(&["check", "--theorem", "ssa", "--input", s(&path)]);
    assert_eq!(o.code, EXIT_INVALID);
    assert!(o.stderr.contains("teapot"));
    let missing = dir.path().join("missing.json");
    assert_eq!(quinfo(&["check", "--theorem", "ssa", "--input", s(&missing)]).code, EXIT_INVALID);
}

#[test]
fn channel_state_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let channel = write(dir.path(), "w.json", Object::Channel(example_channel()));
    let out = dir.path().join("gamma.json");
    let o = quinfo(&["channel-state", "--channel", s(&channel), "--p", "0.5,0.5", "--output", s(&out)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.is_empty());
    let o = quinfo(&[
        "entropy", "--state", s(&out), "--language", "alg", "--quantity", "I", "--x", "factor:0", "--y", "factor:1",
    ]);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert!((v["value_bits"].as_f64().unwrap() - 0.600_876_036_692_856_2).abs() < 1e-9);
    let o = quinfo(&["channel-state", "--channel", s(&channel), "--p", "0.5,0.6"]);
    assert_eq!(o.code, EXIT_INVALID);
}

#[test]
fn code_error_and_broadcast_point() {
    let dir = tempfile::tempdir().unwrap();
    let mc = adder();
    let out = mc.output().clone();
    let code = MultiwayCode {
        block_length: 1,
        encoders: vec![vec![vec![0], vec![1]], vec![vec![0]]],
        decoders: vec![Povm::new(
            out.clone(),
            Label::range(2),
            vec![out.block_unit(0), out.block_unit(1).add(&out.block_unit(2)).unwrap()],
        )
        .unwrap()],
    };
    let mpath = write(dir.path(), "mac.json", Object::Multiway(mc));
    let cpath = write(dir.path(), "code.json", Object::Code(Code::Multiway(code)));
    let o = quinfo(&["code-error", "--code", s(&cpath), "--multiway", s(&mpath), "--converse"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert!(v["errors"][0].as_f64().unwrap().abs() < 1e-12);
    assert!(o.stderr.contains("converse chain holds"));
    assert_eq!(quinfo(&["code-error", "--code", s(&cpath)]).code, EXIT_INVALID);

    let w = quinfo::channels::CqChannel::classical(&[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
    let wpath = write(dir.path(), "bsc.json", Object::Channel(w.clone()));
    let phi = write(dir.path(), "phi.json", Object::KrausMap(KrausMap::identity(w.output())));
    let o = quinfo(&[
        "broadcast-point", "--channel", s(&wpath), "--phi", s(&phi), "--q", "0.5,0.5", "--v", "0.75,0.25;0.25,0.75",
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert!((v["total_bits"].as_f64().unwrap() - 0.531_004_406_410_718_8).abs() < 1e-9);
    assert!(o.stderr.contains("CONJECTURE"));
    let o = quinfo(&["broadcast-point", "--channel", s(&wpath), "--phi", s(&phi), "--q", "1", "--v", "x"]);
    assert_eq!(o.code, EXIT_INVALID);
}

#[test]
fn binary_region_ignores_the_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mpath = write(dir.path(), "mac.json", Object::Multiway(adder()));
    let run_with = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_quinfo"))
            .args(["region", "--multiway", s(&mpath), "--samples", "64", "--seed", "4"])
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(EXIT_OK));
        out.stdout
    };
    let one = run_with("1");
    assert_eq!(one, run_with("4"));
    let doc: Value = serde_json::from_slice(&one).unwrap();
    assert_eq!(doc["kind"], "region");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_quinfo");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(code(&["example"]), Some(EXIT_OK));
    assert_eq!(code(&["check", "--theorem", "nope", "--random", "1"]), Some(EXIT_INVALID));
}
