use std::fs;
use std::process::Command;

fn pgpu() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pgpu"))
}

#[test]
fn gen_writes_a_loadable_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tri.csv");
    let status = pgpu()
        .args(["gen", "--dataset", "triangles", "--flip", "constant:0.3", "--seed", "4", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let d = pgpu::datagen::load_csv(&out).unwrap();
    assert_eq!(d.len(), 2000);
    assert!(d.observed().n_labelled() < 1000);
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"dataset_source": {"triangles": {"n_pos": 60, "n_neg": 60}},
            "flip": {"kind": "constant", "alpha": 0.2},
            "methods": ["pgpu", "svm_naive", "elkan"], "n_splits": 2, "master_seed": 3}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = pgpu().args(["run", "--config"]).arg(&cfg).arg("--out-dir").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(csv.starts_with("method,setting,split,accuracy,wall_time_s\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 2);

    for format in ["csv", "json", "markdown"] {
        let o = pgpu().args(["report", "--in"]).arg(&out).args(["--format", format]).output().unwrap();
        assert!(o.status.success(), "{format}");
        assert!(String::from_utf8(o.stdout).unwrap().contains("svm_naive"));
    }
}

#[test]
fn bad_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"dataset_source": "triangles", "methods": ["pgpu"], "n_splits": 0}"#).unwrap();
    let status = pgpu().args(["run", "--config"]).arg(&cfg).arg("--out-dir").arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(1));
    fs::write(&cfg, r#"{"dataset_source": "triangles", "methods": ["magic"]}"#).unwrap();
    let status = pgpu().args(["run", "--config"]).arg(&cfg).arg("--out-dir").arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn all_cells_failing_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // no latent labels, so no cell can be scored
    let data = dir.path().join("d.csv");
    let mut text = String::from("x1,x2,s,y\n");
    for i in 0..40 {
        let v = i as f64 / 40.0;
        text.push_str(&format!("{v},{},{},\n", 1.0 - v, if i % 3 == 0 { 1 } else { -1 }));
    }
    fs::write(&data, text).unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        format!(r#"{{"dataset_source": {{"csv": {{"path": {:?}}}}}, "methods": ["svm_naive"], "n_splits": 2}}"#, data),
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = pgpu().args(["run", "--config"]).arg(&cfg).arg("--out-dir").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(2));
    assert!(out.join("summary.json").exists());
}
