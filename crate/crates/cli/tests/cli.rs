use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use regdepth::{dataset, fit_exact_p2, rd_normalized, ParamVector};

fn rdepth(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdepth"))
        .args(args)
        .current_dir(cwd)
        .env_remove("RDEPTH_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fourpoints() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/fourpoints.csv"))
}

/// Value of the first `key = value` line.
fn field(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no '{key}' in:\n{out}"))
        .to_string()
}

#[test]
fn depth_golden_values() {
    let dir = tempfile::tempdir().unwrap();
    let fp = fourpoints();
    let fp = fp.to_str().unwrap();
    for (method, expected) in [("def21", "0.5"), ("bh99", "1"), ("bh992", "1.5"), ("oracle", "0.5")] {
        let o = rdepth(&["depth", fp, "--beta", "0,0", "--method", method], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(field(&stdout(&o), "depth"), expected, "{method}");
    }
}

#[test]
fn depth_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "x1,y\n1,2\n3,zz\n").unwrap();
    let o = rdepth(&["depth", "bad.csv", "--beta", "0,0"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let fp = fourpoints();
    let o = rdepth(&["depth", fp.to_str().unwrap(), "--beta", "0,0,0"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("dimension mismatch"));
}

#[test]
fn fit_collinear_and_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("line.csv"), "x1,y\n0,1\n1,3\n2,5\n4,9\n").unwrap();
    let o = rdepth(&["fit", "line.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(&out, "beta_hat"), "(1, 2)");
    assert_eq!(field(&out, "depth"), "1");

    std::fs::write(dir.path().join("flat.csv"), "x1,y\n2,1\n2,3\n2,5\n").unwrap();
    let o = rdepth(&["fit", "flat.csv"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("identical"), "{}", stderr(&o));
}

#[test]
fn fit_report_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let fp = fourpoints();
    let o = rdepth(&["fit", fp.to_str().unwrap(), "--out", "rep"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rep/fit.json")).unwrap()).unwrap();
    let lib = fit_exact_p2(&dataset::read_csv_file(&fp).unwrap()).unwrap();
    assert_eq!(json["results"], serde_json::to_value(&lib).unwrap());
    for key in ["command", "version", "seed", "config", "results", "warnings"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }

    // a search never beats the deepest candidate line
    for seed in ["1", "2"] {
        let o = rdepth(&["fit", fp.to_str().unwrap(), "--method", "search", "--seed", seed], dir.path());
        assert!(o.status.success());
        let d: f64 = field(&stdout(&o), "depth").parse().unwrap();
        assert!(d <= lib.candidate_depth);
    }
}

#[test]
fn popdepth_normal_slope_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = rdepth(&["popdepth", "--model", "normal", "--beta", "0,1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: f64 = field(&stdout(&o), "depth").parse().unwrap();
    assert!((v - 0.25).abs() < 1e-3);
    let o = rdepth(&["popdepth", "--model", "disk", "--beta", "-0.5,0.3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = rdepth(&["popdepth", "--model", "laplace", "--beta", "0,0"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn sampled_csv_round_trips_through_depth() {
    let dir = tempfile::tempdir().unwrap();
    let o = rdepth(&["sample", "--model", "disk", "--n", "40", "--seed", "7", "--output", "s.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = rdepth(&["depth", "s.csv", "--beta", "0.1,-0.2"], dir.path());
    assert!(o.status.success());
    let set = regdepth::sample(&regdepth::PopulationModel::UniformUnitDisk, 40, 7).unwrap();
    assert_eq!(dataset::read_csv_file(dir.path().join("s.csv")).unwrap(), set);
    let lib = rd_normalized(&set, &ParamVector::new(vec![0.1, -0.2]).unwrap(), None).unwrap();
    let printed: f64 = field(&stdout(&o), "normalized").parse().unwrap();
    assert!((printed - lib.normalized).abs() < 1e-6);
}

#[test]
fn consistency_report_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["consistency", "--n-grid", "40,80,160", "--reps", "30", "--seed", "5", "--out", "o"];
    let o = rdepth(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("loglog_slope = "));
    let first = std::fs::read(dir.path().join("o/consistency.json")).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("o/consistency_loglog.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert_eq!(csv.lines().next(), Some("logn,logerr"));
    let json: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert!(json["results"]["loglog_slope"].is_number());

    // replay, then again with a different thread count
    let o = rdepth(&args, dir.path());
    assert!(o.status.success());
    assert_eq!(std::fs::read(dir.path().join("o/consistency.json")).unwrap(), first);
    let o = Command::new(env!("CARGO_BIN_EXE_rdepth"))
        .args(args)
        .current_dir(dir.path())
        .env("RDEPTH_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(std::fs::read(dir.path().join("o/consistency.json")).unwrap(), first);
}

#[test]
fn invalid_flags_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["consistency", "--reps", "10", "--n-grid", "50,100"],
        vec!["consistency", "--n-grid", "100,50", "--reps", "30"],
        vec!["uniform", "--model", "nope"],
        vec!["depth"],
    ] {
        let o = rdepth(&args, dir.path());
        assert!(!o.status.success(), "{args:?} succeeded");
    }
}

#[test]
fn limit_empirical_compare_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let o = rdepth(&["limit", "--draws", "60", "--v-grid", "64", "--seed", "3", "--out", "lim"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = rdepth(&["empirical", "--n", "200", "--reps", "60", "--seed", "3", "--out", "emp"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let cloud = std::fs::read_to_string(dir.path().join("lim/limit_samples.csv")).unwrap();
    assert_eq!(cloud.lines().next(), Some("s1,s2"));
    assert_eq!(cloud.lines().count(), 61);
    let o = rdepth(
        &["compare", "lim/limit_samples.csv", "emp/empirical_samples.csv", "--out", "cmp"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("ks = ["), "{}", stdout(&o));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cmp/compare.json")).unwrap()).unwrap();
    assert_eq!(json["results"]["ks"].as_array().unwrap().len(), 2);
}

#[test]
fn assumptions_and_uniform_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = rdepth(&["assumptions", "--model", "disk", "--v-grid", "64", "--out", "a"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("a/assumptions.json").exists());
    assert!(dir.path().join("a/ingredients.json").exists());
    let o = rdepth(&["uniform", "--n-grid", "50,100", "--reps", "30", "--out", "u"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("u/uniform_replicates.csv").exists());
}
