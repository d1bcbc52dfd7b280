use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_backscatter"))
        .current_dir(dir)
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn c0_at_most_one_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["scaling"], "c0 = 1.0\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("C₀ > 1"), "{}", stderr(&o));
}

#[test]
fn unknown_and_duplicate_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["born"], "n = 64\nwavenumber = 3\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2: unknown key `wavenumber`"), "{}", stderr(&o));
    let o = run(dir.path(), &["born"], "n = 64\nn = 128\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("duplicate"));
}

#[test]
fn mismatched_experiment_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["born"], "experiment = forward\n");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn born_run_is_stamped_and_reproducible_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    let config = "n = 64\nk_max = 4\nangles = 16\nout = first\n";
    let o = run(dir.path(), &["born"], config);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = dir.path().join("first");
    for f in ["config.resolved", "data.csv", "data_meta.json", "q_b.bin", "q_b_spectrum.bin", "coverage.csv", "summary.json"] {
        assert!(first.join(f).exists(), "missing {f}");
    }
    assert!(!first.join("PARTIAL").exists());
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(first.join("summary.json")).unwrap()).unwrap();
    let hash = summary["config_hash"].as_str().unwrap().to_string();
    assert_eq!(summary["cache_hits"], 0);
    assert!(fs::read_to_string(first.join("data.csv")).unwrap().starts_with("# backscatter "));
    assert!(fs::read_to_string(first.join("data.csv")).unwrap().lines().next().unwrap().ends_with(&hash));

    // same configuration, different output directory: identical hash, all hits
    let o = run(dir.path(), &["born", "--out", "second"], config);
    assert!(o.status.success(), "{}", stderr(&o));
    let second = dir.path().join("second");
    let summary2: serde_json::Value = serde_json::from_str(&fs::read_to_string(second.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary2["config_hash"].as_str().unwrap(), hash);
    assert_eq!(summary2["cache_misses"], 0);
    for f in ["q_b.bin", "q_b_spectrum.bin", "data.csv"] {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{f} differs");
    }

    let o = run(dir.path(), &["cache", "stats"], config);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("entries"));
    let o = run(dir.path(), &["cache", "verify"], config);
    assert!(String::from_utf8_lossy(&o.stdout).contains("removed 0"));
}

#[test]
fn changed_tolerance_misses_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["born"], "n = 64\nk_max = 3\nangles = 16\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(dir.path(), &["born"], "n = 64\nk_max = 3\nangles = 16\ntol = 1e-11\n");
    assert!(o.status.success());
    let s: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/born/summary.json")).unwrap()).unwrap();
    assert_eq!(s["cache_hits"], 0);
}

#[test]
fn lemmas_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["lemmas", "--seed", "7"], "");
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/lemmas/lemmas.csv")).unwrap();
    assert!(csv.lines().count() > 5);
    assert!(!csv.contains(",false"));
}
