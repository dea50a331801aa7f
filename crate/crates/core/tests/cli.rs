use std::path::Path;

use eqloc::cli::{main_with_args, run};

const SMALL: &str = r#"
name = "small"
seed = 4
suites = ["validate", "localize", "compare"]

[manifold]
type = "sphere"

[grids]
x = [[0.5], [1.0], [2.0]]

[[forms]]
label = "one"
terms = [{ form = { name = "one" } }]
"#;

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn args(v: &[&str]) -> Vec<String> {
    std::iter::once("eqloc").chain(v.iter().copied()).map(String::from).collect()
}

#[test]
fn list_suites_exits_zero() {
    assert_eq!(main_with_args(args(&["run", "--list-suites"])), 0);
}

#[test]
fn bad_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("sphere", "klein_bottle"));
    let out = dir.path().join("out");
    assert_eq!(main_with_args(args(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 2);
    let cfg = write_config(dir.path(), SMALL);
    assert_eq!(main_with_args(args(&["run", cfg.to_str().unwrap(), "--suite", "nonsense"])), 2);
    assert_eq!(main_with_args(args(&["run", dir.path().join("missing.toml").to_str().unwrap()])), 2);
    assert_eq!(main_with_args(args(&["frobnicate"])), 2);
}

#[test]
fn small_config_passes_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    assert_eq!(main_with_args(args(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    for f in ["report.json", "validate.csv", "localize.csv", "compare.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let csv = std::fs::read_to_string(out.join("compare.csv")).unwrap();
    assert!(csv.starts_with("suite,experiment,param_name,param_value,re,im,abs_err,rel_err,oracle_re,oracle_im,pass"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    assert_eq!(json["seed"], 4);
}

#[test]
fn suite_override_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("o");
    let (rep, _) = run(&cfg, &["localize".into()], Some(&out), Some(99)).unwrap();
    assert_eq!(rep.seed, 99);
    assert_eq!(rep.suites.len(), 1);
    assert!(!out.join("compare.csv").exists());
}

#[test]
fn same_config_and_seed_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(&cfg, &[], Some(&a), None).unwrap();
    run(&cfg, &[], Some(&b), None).unwrap();
    for f in ["validate.csv", "localize.csv", "compare.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}
