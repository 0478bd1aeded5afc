use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rhcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rhcap")).args(args).output().expect("spawn rhcap")
}

fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn reruns_write_identical_files() {
    let runs: &[&[&str]] = &[
        &["rh", "solve", "--lambda", "builtin:step", "--phi", "builtin:cos", "--grid", "512", "--audit", "8"],
        &["dimension", "demo", "--gamma", "0,1", "--grid", "512"],
        &["lusin", "run", "--phi", "builtin:sign", "--cells", "512"],
    ];
    for args in runs {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for d in &dirs {
            let mut full = args.to_vec();
            full.extend(["--out", d.path().to_str().unwrap()]);
            let out = rhcap(&full);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            assert!(String::from_utf8_lossy(&out.stderr).starts_with("wall time:"));
        }
        let a = listing(dirs[0].path());
        assert!(a.iter().any(|(n, _)| n.ends_with(".json")));
        assert_eq!(a, listing(dirs[1].path()), "{args:?}");
    }
}

#[test]
fn json_goes_to_stdout_without_out() {
    let out = rhcap(&["cap", "estimate", "--set", "circle:1", "--nmax", "16"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["name"], "cap_estimate");
    assert!((v["outputs"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-3, "{v}");
}

#[test]
fn errors_are_one_json_line() {
    let out = rhcap(&["rh", "solve", "--lambda", "builtin:spiral", "--phi", "builtin:cos", "--grid", "64"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(&err).unwrap();
    assert!(v["error"].as_str().unwrap().contains("spiral"), "{v}");
}

#[test]
fn missing_command_prints_usage() {
    let out = rhcap(&[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}
