use std::path::Path;
use std::process::{Command, Output};

use trepr_sim::output::parse_csv;

fn simulate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL_SPECTRUM: &str = r#"
experiment = "spectrum"

[spectrum]
field_min = 90.0
field_max = 110.0
field_points = 11
"#;

#[test]
fn lists_presets() {
    let out = simulate(&["--list-presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().collect();
    assert_eq!(names, trepr_sim::PRESETS);
}

#[test]
fn print_config_round_trips() {
    let out = simulate(&["--preset", "fig6b", "--print-config"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let config = trepr_sim::parse_config(&text).unwrap();
    assert_eq!(config, trepr_sim::preset("fig6b").unwrap().config);
}

#[test]
fn writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SPECTRUM);
    let out_dir = dir.path().join("out");
    let out_dir = out_dir.to_str().unwrap();

    let out = simulate(&["--config", &cfg, "--out", out_dir]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv_path = String::from_utf8(out.stdout).unwrap().trim().to_string();
    assert!(csv_path.ends_with("spectrum.csv"));
    let csv = parse_csv(&std::fs::read_to_string(&csv_path).unwrap()).unwrap();
    assert_eq!(csv.rows.len(), 11);
    assert_eq!(&csv.columns[..3], ["field_mK", "chi_re", "chi_im"]);

    let out = simulate(&["--config", &cfg, "--out", out_dir, "--format", "json"]);
    assert!(out.status.success());
    let json_path = String::from_utf8(out.stdout).unwrap().trim().to_string();
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json_path).unwrap()).unwrap();
    let rows: Vec<Vec<f64>> = serde_json::from_value(doc["rows"].clone()).unwrap();
    assert_eq!(rows, csv.rows);
    assert_eq!(doc["metadata"]["measure"], "spectrum");
    assert!(doc["metadata"]["sign_convention"].as_str().unwrap().contains("-Im chi"));
}

#[test]
fn bad_config_exits_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[model]\nj_exchnage = 3.0\n");
    let out = simulate(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(trepr_sim::exit::CONFIG));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("model.j_exchnage"), "{err}");

    let cfg = write_config(dir.path(), "[spectrum]\nepsilon = -1.0\n");
    let out = simulate(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(trepr_sim::exit::CONFIG));
    assert!(String::from_utf8(out.stderr).unwrap().contains("spectrum.epsilon"));

    let out = simulate(&["--preset", "fig9a"]);
    assert_eq!(out.status.code(), Some(trepr_sim::exit::CONFIG));
}

#[test]
fn io_failures_exit_with_io_status() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.toml");
    let out = simulate(&["--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(trepr_sim::exit::IO));

    // the output directory is an existing file
    let cfg = write_config(dir.path(), SMALL_SPECTRUM);
    let out = simulate(&["--config", &cfg, "--out", &cfg]);
    assert_eq!(out.status.code(), Some(trepr_sim::exit::IO));
}

#[test]
fn config_and_preset_conflict() {
    let out = simulate(&["--config", "x.toml", "--preset", "fig2a"]);
    assert!(!out.status.success());
}
