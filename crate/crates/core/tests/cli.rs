use std::process::Command;

fn ffr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ffr"))
}

#[test]
fn sweep_writes_csv_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let plot = dir.path().join("p.csv");
    let status = ffr()
        .args(["sweep", "--axis", "threshold_T_dB", "--grid", "-5:5:5", "--overlay", "beta=1,2", "--drops", "200"])
        .arg("--out")
        .arg(&out)
        .arg("--emit-plot")
        .arg(&plot)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "axis,overlay,coverage,coverage_ci,ceu_density,ceu_density_ci,analytical_pe,n_drops,seed"
    );
    assert_eq!(lines.count(), 6);
    assert!(std::fs::read_to_string(&plot).unwrap().starts_with("figure,"));
}

#[test]
fn json_output_carries_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let status = ffr()
        .args(["sweep", "--axis", "a", "--grid", "1,3", "--drops", "50", "--format", "json", "--classification-only"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["metadata"]["artifact"], "ffr-core");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
    assert!(doc["rows"][0]["coverage"].is_null());
}

#[test]
fn bad_input_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let bad_grid = ffr()
        .args(["sweep", "--axis", "beta", "--grid", "2,1", "--drops", "10"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(bad_grid.code(), Some(2));
    let bad_axis = ffr()
        .args(["sweep", "--axis", "gamma", "--grid", "1", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(bad_axis.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn reproduce_rejects_unknown_figure() {
    let dir = tempfile::tempdir().unwrap();
    let status = ffr()
        .args(["reproduce", "fig9", "--out"])
        .arg(dir.path().join("f.csv"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
