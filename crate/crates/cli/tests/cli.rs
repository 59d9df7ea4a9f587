use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

const FIBONACCI: &str = r#"{"d":2,"matrices":[[[1,1],[0,1]],[[1,0],[1,1]]]}"#;

fn jspec(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_jspec"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn input(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(cmd: &str, input: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![
        cmd,
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let (code, err) = jspec(&args);
    if code != 0 {
        eprintln!("{cmd}: {err}");
    }
    code
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn assert_no_nan(dir: &Path) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        assert!(!text.to_lowercase().contains("nan"), "NaN in {}", path.display());
        assert!(!text.contains("null") || path.ends_with("manifest.json"), "null in {}", path.display());
    }
}

#[test]
fn spectrum_file_contract() {
    let tmp = TempDir::new().unwrap();
    let inp = input(&tmp, "fib.json", FIBONACCI);
    let out = tmp.path().join("out");
    assert_eq!(run("spectrum", &inp, &out, &["--n", "12", "--dirs", "64"]), 0);
    for f in ["spectrum.csv", "body.json", "lambda_body.json", "manifest.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let rows = csv_rows(&out.join("spectrum.csv"));
    assert_eq!(rows.len(), 12);
    // no previous level to compare against
    assert_eq!(rows[0][4], "inf");
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["resolved"]["dirs"], 64);
    assert_eq!(m["resolved"]["budget"], 2_000_000);
    assert_eq!(m["resolved"]["seed"], 0);
    assert_eq!(m["input"].as_str().unwrap(), FIBONACCI);
    assert!(m["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
    assert_no_nan(&out);
}

#[test]
fn jsr_bounds_are_ordered() {
    let tmp = TempDir::new().unwrap();
    let inp = input(&tmp, "fib.json", FIBONACCI);
    let out = tmp.path().join("out");
    assert_eq!(run("jsr", &inp, &out, &["--depth", "14", "--prune-delta", "0.005"]), 0);
    let rows = csv_rows(&out.join("bounds.csv"));
    assert!(!rows.is_empty());
    for r in rows {
        let lo: f64 = r[3].parse().unwrap();
        let hi: f64 = r[4].parse().unwrap();
        assert!(lo <= hi, "{lo} > {hi}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let inp = input(&tmp, "fib.json", FIBONACCI);
    let cases: [(&str, &[&str], &[&str]); 3] = [
        ("spectrum", &["--n", "10", "--budget", "300", "--seed", "5"], &["spectrum.csv", "body.json"]),
        ("rate", &["--n", "30", "--samples", "3000", "--seed", "9"], &["rate.csv", "rate.json"]),
        ("defect", &["--n", "6", "--samples", "300", "--seed", "2"], &["defect.csv", "defect_histogram.csv"]),
    ];
    for (cmd, args, files) in cases {
        let a = tmp.path().join(format!("{cmd}_a"));
        let b = tmp.path().join(format!("{cmd}_b"));
        assert_eq!(run(cmd, &inp, &a, args), 0);
        let mut more = args.to_vec();
        more.extend_from_slice(&["--workers", "1"]);
        assert_eq!(run(cmd, &inp, &b, &more), 0);
        for f in files {
            assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{cmd}/{f}");
        }
    }
}

#[test]
fn replay_reproduces_outputs() {
    let tmp = TempDir::new().unwrap();
    let inp = input(&tmp, "fib.json", FIBONACCI);
    let first = tmp.path().join("first");
    assert_eq!(
        run("decay", &inp, &first, &["--n", "10,20,40", "--eps", "0.05", "--samples", "2000", "--lyap-n", "300", "--lyap-samples", "40"]),
        0
    );
    // the replay must not depend on the original input file
    fs::remove_file(&inp).unwrap();
    let again = tmp.path().join("again");
    let (code, err) = jspec(&[
        "replay",
        first.join("manifest.json").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    for f in ["decay.csv", "decay.json"] {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }
    let mut replayed = manifest(&again)["params"].clone();
    replayed["out"] = manifest(&first)["params"]["out"].clone();
    assert_eq!(manifest(&first)["params"], replayed);
}

#[test]
fn unbalanced_weights_exit_2_without_artifacts() {
    let tmp = TempDir::new().unwrap();
    let inp = input(
        &tmp,
        "w.json",
        r#"{"d":2,"matrices":[[[1,1],[0,1]],[[1,0],[1,1]]],"weights":[0.3,0.3]}"#,
    );
    let out = tmp.path().join("out");
    assert_eq!(run("lyapunov", &inp, &out, &[]), 2);
    assert!(!out.exists());
}

#[test]
fn validation_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let fib = input(&tmp, "fib.json", FIBONACCI);
    let singular = input(&tmp, "s.json", r#"{"d":2,"matrices":[[[1,2],[2,4]]]}"#);
    let ragged = input(&tmp, "r.json", r#"{"d":3,"matrices":[[[1,0],[0,1]]]}"#);
    let broken = input(&tmp, "b.json", r#"{"d":2,"matrices":[[[1,0],[0,1]]"#);
    let o = |s: &str| tmp.path().join(s);
    assert_eq!(run("spectrum", &singular, &o("a"), &[]), 2);
    assert_eq!(run("spectrum", &ragged, &o("b"), &[]), 2);
    assert_eq!(run("spectrum", &broken, &o("c"), &[]), 2);
    assert_eq!(run("decay", &fib, &o("d"), &["--n", "10,20", "--eps", "0.1"]), 2);
    assert_eq!(run("rate", &fib, &o("e"), &["--projection", "diagonal"]), 2);
    assert_eq!(run("jsr", &fib, &o("f"), &["--k", "2"]), 2);
    assert_eq!(run("lyapunov", &fib, &o("g"), &["--samples", "0"]), 2);
}

#[test]
fn degenerate_cone_exits_3_with_labelled_manifest() {
    let tmp = TempDir::new().unwrap();
    let inp = input(&tmp, "id.json", r#"{"d":2,"matrices":[[[1,0],[0,1]]]}"#);
    let out = tmp.path().join("out");
    assert_eq!(run("cone", &inp, &out, &["--n", "3", "--extra-word", "0"]), 3);
    let m = manifest(&out);
    assert_eq!(m["status"], "failed");
    assert!(m["error"].as_str().unwrap().contains("degenerate"));
    assert_eq!(m["outputs"].as_array().unwrap().len(), 0);
}

#[test]
fn every_command_emits_finite_or_inf() {
    let tmp = TempDir::new().unwrap();
    let inp = input(&tmp, "fib.json", FIBONACCI);
    let cases: [(&str, &[&str]); 11] = [
        ("spectrum", &["--n", "6"]),
        ("jsr", &["--depth", "8"]),
        ("bergerwang", &["--n", "6", "--depth", "8"]),
        ("lyapunov", &["--n", "100", "--samples", "200"]),
        ("rate", &["--n", "20", "--samples", "500"]),
        ("mgf", &["--n", "20", "--samples", "200", "--grid", "9"]),
        ("decay", &["--n", "5,10,20", "--eps", "0.3", "--samples", "300", "--lyap-n", "200", "--lyap-samples", "20"]),
        ("proximal", &["--n", "3"]),
        ("defect", &["--n", "4", "--samples", "100"]),
        ("ams", &["--samples", "100", "--n", "8"]),
        ("cone", &["--n", "5,6"]),
    ];
    for (cmd, args) in cases {
        let out = tmp.path().join(cmd);
        assert_eq!(run(cmd, &inp, &out, args), 0, "{cmd}");
        assert_no_nan(&out);
        let m = manifest(&out);
        for f in m["outputs"].as_array().unwrap() {
            assert!(out.join(f.as_str().unwrap()).is_file());
        }
    }
}

#[test]
fn decay_reports_all_zero_counts() {
    let tmp = TempDir::new().unwrap();
    let inp = input(&tmp, "fib.json", FIBONACCI);
    let out = tmp.path().join("out");
    let args = ["--n", "50,100,200", "--eps", "5", "--samples", "200", "--lyap-n", "200", "--lyap-samples", "20"];
    assert_eq!(run("decay", &inp, &out, &args), 0);
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("decay.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "all_zero_counts");
    for row in csv_rows(&out.join("decay.csv")) {
        assert_eq!(row[2], "-inf");
    }
}

#[test]
fn manifest_input_round_trips_the_matrix_set() {
    use joint_spectrum::spectrum::MatrixSet;
    let text = r#"{"d":3,"matrices":[[[2,1,0],[0,1,3],[1,0,1]],[[1,0,0],[0.5,1,0],[0,0,1]]],"weights":[0.25,0.75]}"#;
    let tmp = TempDir::new().unwrap();
    let inp = input(&tmp, "s.json", text);
    let out = tmp.path().join("out");
    assert_eq!(run("proximal", &inp, &out, &[]), 0);
    let original = MatrixSet::from_json_str(text).unwrap();
    let stored = MatrixSet::from_json_str(manifest(&out)["input"].as_str().unwrap()).unwrap();
    assert_eq!(original, stored);
    let again = MatrixSet::from_json(&original.to_json()).unwrap();
    for (a, b) in original.gens().iter().zip(again.gens()) {
        let (ea, eb) = (a.unit_det_entries(), b.unit_det_entries());
        assert!((ea - eb).amax() <= 1e-12);
    }
    assert_eq!(original.weights(), again.weights());
}
