use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dsfusion"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn put(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// The four worked-example evidences, one single-row file each.
fn worked_files(dir: &Path) -> Vec<PathBuf> {
    [[0.5, 0.1, 0.4], [0.3, 0.3, 0.4], [0.5, 0.0, 0.5], [0.4, 0.2, 0.4]]
        .iter()
        .enumerate()
        .map(|(i, m)| {
            put(
                dir,
                &format!("c{}.csv", i + 1),
                &format!("sample_id,mass_E1,mass_E2,mass_ignorance\nx,{},{},{}\n", m[0], m[1], m[2]),
            )
        })
        .collect()
}

/// First data row of a fused output file.
fn fused_row(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("sample_id,mass_") && header.ends_with(",mass_ignorance,predicted"));
    lines.next().unwrap().split(',').map(String::from).collect()
}

#[test]
fn fuse_worked_example_from_evidence_files() {
    let dir = tempfile::tempdir().unwrap();
    let files = worked_files(dir.path());
    let out = dir.path().join("fused.csv");
    let diag = dir.path().join("diag.csv");
    let mut args = vec!["fuse", "--evidence"];
    args.extend(files.iter().map(|p| s(p)));
    args.extend(["--output", s(&out), "--diagnostics", s(&diag)]);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(&out).unwrap().starts_with("sample_id,mass_E1,mass_E2,mass_ignorance,predicted\n"));
    let row = fused_row(&out);
    let masses: Vec<f64> = row[1..4].iter().map(|v| v.parse().unwrap()).collect();
    for (m, e) in masses.iter().zip([0.818, 0.1265, 0.056]) {
        assert!((m - e).abs() <= 0.005, "{masses:?}");
    }
    assert_eq!(row[4], "E1");
    let diag = fs::read_to_string(&diag).unwrap();
    assert_eq!(diag.lines().count(), 1 + 4);
    assert!(diag.lines().nth(1).unwrap().starts_with("x,c1,"));
}

#[test]
fn single_score_file_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let scores = put(dir.path(), "a.csv", "sample_id,score_ok,score_bad\n1,3,1\n2,0,2\n");
    let out = dir.path().join("fused.csv");
    let o = run(&["fuse", "--scores", s(&scores), "--output", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(
        text,
        "sample_id,mass_ok,mass_bad,mass_ignorance,predicted\n1,0.75,0.25,0,ok\n2,0,1,0,bad\n"
    );
}

#[test]
fn scores_with_confusion_weights() {
    let dir = tempfile::tempdir().unwrap();
    let a = put(dir.path(), "a.csv", "sample_id,score_ok,score_bad\n1,0.6,0.4\n");
    let b = put(dir.path(), "b.csv", "sample_id,score_ok,score_bad\n1,0.3,0.7\n");
    let ca = put(dir.path(), "ca.csv", "40,10\n10,40\n");
    let cb = put(dir.path(), "cb.csv", "ok,bad\n45,5\n5,45\n");
    let out = dir.path().join("fused.csv");
    let o = run(&[
        "fuse", "--scores", s(&a), s(&b), "--confusion", s(&ca), s(&cb), "--scheme", "w2", "--output", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let row = fused_row(&out);
    let total: f64 = row[1..4].iter().map(|v| v.parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);

    // weighting schemes other than w0 need confusion matrices
    let o = run(&["fuse", "--scores", s(&a), s(&b), "--scheme", "w2", "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn mismatched_inputs_fail_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = put(dir.path(), "a.csv", "sample_id,score_x,score_y\n1,0.5,0.5\n");
    let b = put(dir.path(), "b.csv", "sample_id,score_x,score_y,score_z\n1,0.2,0.3,0.5\n");
    let out = dir.path().join("fused.csv");
    let o = run(&["fuse", "--scores", s(&a), s(&b), "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());

    let bad = put(dir.path(), "bad.csv", "sample_id,score_x,score_y\n1,0.5,zz\n");
    let o = run(&["fuse", "--scores", s(&a), s(&bad), "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("row 2") && err.contains("score_y"), "{err}");
    assert!(!out.exists());
}

#[test]
fn selftest_exit_codes() {
    let o = run(&["selftest"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("PASS"));

    let o = run(&["selftest", "--deng-log-base", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL at step 5"));

    let o = run(&["selftest", "--distance", "jaccard"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL at step 2"));

    let o = run(&["selftest", "--sigma", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["no-such-command"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn benchmark_with_three_knn_classifiers() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("blobs.csv");
    let o = run(&["gen-synthetic", "--output", s(&data), "--majority", "60", "--minority", "30"]);
    assert!(o.status.success());
    let out = dir.path().join("out");
    let args = [
        "benchmark", "--dataset", s(&data), "--classifiers", "knn5,knn7,knn9", "--seed", "3", "--output", s(&out),
    ];
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cells = fs::read_to_string(out.join("blobs/cells.csv")).unwrap();
    // 7 ensembles × (6 schemes + best)
    assert_eq!(cells.lines().count(), 1 + 7 * 7);
    let summary = fs::read_to_string(out.join("blobs/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 7);

    let again = dir.path().join("again");
    let mut args2 = args.to_vec();
    *args2.last_mut().unwrap() = s(&again);
    assert!(run(&args2).status.success());
    assert_eq!(cells, fs::read_to_string(again.join("blobs/cells.csv")).unwrap());
}

#[test]
fn benchmark_config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("blobs.csv");
    assert!(run(&["gen-synthetic", "--output", s(&data), "--majority", "30", "--minority", "30"]).status.success());
    let cfg = put(
        dir.path(),
        "run.toml",
        "classifiers = [\"knn5\", \"centroid\"]\nschemes = [\"w0\"]\nrepetitions = 2\n",
    );
    let out = dir.path().join("out");
    let o = run(&[
        "benchmark", "--config", s(&cfg), "--dataset", s(&data), "--classifiers", "knn5,knn7,knn9",
        "--output", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cells = fs::read_to_string(out.join("blobs/cells.csv")).unwrap();
    // 2 repetitions × 3 ensembles × (w0 + best)
    assert_eq!(cells.lines().count(), 1 + 2 * 3 * 2);
}

#[test]
fn benchmark_reports_bad_dataset_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    assert!(run(&["gen-synthetic", "--output", s(&good), "--majority", "20", "--minority", "20"]).status.success());
    let bad = put(dir.path(), "bad.csv", "a,b\n1,2\n");
    let out = dir.path().join("out");
    let o = run(&[
        "benchmark", "--dataset", s(&bad), s(&good), "--classifiers", "centroid", "--output", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(out.join("good/cells.csv").exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.csv"));
}
