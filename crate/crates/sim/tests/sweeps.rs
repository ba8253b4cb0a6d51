use trepr_core::lineshape::half_width;
use trepr_sim::config::{Experiment, Measure, SweepSection};
use trepr_sim::output::parse_csv;
use trepr_sim::{parse_config, preset, run_sweep, ExperimentConfig, Format, RunInfo, Table};

fn small_spectrum() -> ExperimentConfig {
    parse_config(
        r#"
        experiment = "spectrum"
        [spectrum]
        field_min = 95.0
        field_max = 105.0
        field_points = 41
        "#,
    )
    .unwrap()
}

fn with_sweep(mut c: ExperimentConfig, parameter: &str, values: &[f64], measure: Measure) -> ExperimentConfig {
    c.experiment = Experiment::Sweep;
    c.sweep = Some(SweepSection {
        parameter: parameter.into(),
        values: values.to_vec(),
        measure,
    });
    c
}

fn run(c: &ExperimentConfig) -> Table {
    run_sweep(c, &RunInfo::default()).unwrap()
}

fn rows_for(table: &Table, value: f64) -> Vec<Vec<f64>> {
    table.rows.iter().filter(|r| r[0] == value).cloned().collect()
}

#[test]
fn sweep_column_leads_the_table() {
    let c = with_sweep(small_spectrum(), "epsilon", &[0.1, 0.2], Measure::Spectrum);
    let t = run(&c);
    assert_eq!(t.columns[0], "epsilon");
    assert_eq!(t.columns[1], "field_mK");
    assert_eq!(t.rows.len(), 82);
    assert!(t.rows.iter().all(|r| r.len() == t.columns.len()));
}

#[test]
fn single_value_sweep_matches_single_run() {
    let single = run(&small_spectrum());
    let sweep = run(&with_sweep(small_spectrum(), "j_exchange", &[-10.0], Measure::Spectrum));
    let stripped: Vec<Vec<f64>> = sweep.rows.iter().map(|r| r[1..].to_vec()).collect();
    assert_eq!(stripped, single.rows);
}

#[test]
fn wider_broadening_gives_wider_lines() {
    let eps = [0.05, 0.1, 0.2];
    let mut c = with_sweep(small_spectrum(), "epsilon", &eps, Measure::Spectrum);
    c.spectrum.field_min = 60.0;
    c.spectrum.field_max = 140.0;
    c.spectrum.field_points = 161;
    let t = run(&c);
    let (widths, heights): (Vec<f64>, Vec<f64>) = eps
        .iter()
        .map(|&e| {
            let rows = rows_for(&t, e);
            let f: Vec<f64> = rows.iter().map(|r| r[1]).collect();
            let y: Vec<f64> = rows.iter().map(|r| r[3].abs()).collect();
            (half_width(&f, &y).unwrap(), y.iter().copied().fold(0.0, f64::max))
        })
        .unzip();
    assert!(widths.windows(2).all(|w| w[1] > w[0]), "{widths:?}");
    assert!(heights.windows(2).all(|w| w[1] < w[0]), "{heights:?}");
}

#[test]
fn worker_count_does_not_change_bytes() {
    let mut c = with_sweep(small_spectrum(), "gamma_triplet_flip", &[1.0, 50.0], Measure::Spectrum);
    c.model.kind = trepr_sim::config::Kind::Drts;
    c.spectrum.field_points = 9;
    let render = |workers| {
        let mut c = c.clone();
        c.workers = workers;
        let t = run(&c);
        (t.render(Format::Csv), t.render(Format::Json))
    };
    assert_eq!(render(1), render(3));
}

#[test]
fn csv_and_json_agree() {
    let t = run(&with_sweep(
        small_spectrum(),
        "omega",
        &[190.0, 200.0],
        Measure::Spectrum,
    ));
    let csv = parse_csv(&t.to_csv()).unwrap();
    let json: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
    let rows: Vec<Vec<f64>> = serde_json::from_value(json["rows"].clone()).unwrap();
    assert_eq!(csv.rows, rows);
    let columns: Vec<String> = serde_json::from_value(json["columns"].clone()).unwrap();
    assert_eq!(csv.columns, columns);
}

#[test]
fn population_preset_has_one_series_per_rate() {
    let p = preset("fig2a").unwrap();
    let t = run_sweep(&p.config, &p.info()).unwrap();
    let mut values: Vec<f64> = t.rows.iter().map(|r| r[0]).collect();
    values.dedup();
    assert_eq!(values, [0.33, 3.3, 33.0]);
    let sum = t
        .rows
        .iter()
        .map(|r| (r[2] + r[3] + r[4] - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(sum < 1e-9, "{sum}");
    let meta: Vec<&str> = t.metadata.iter().map(|(k, _)| k.as_str()).collect();
    assert!(meta.contains(&"preset") && meta.contains(&"sweep_values"));
}

#[test]
fn normalized_series_peak_at_one() {
    let mut c = with_sweep(small_spectrum(), "j_exchange", &[-10.0, -50.0], Measure::Spectrum);
    c.normalize = true;
    let t = run(&c);
    for v in [-10.0, -50.0] {
        let m = rows_for(&t, v).iter().map(|r| r[3].abs()).fold(0.0, f64::max);
        assert!((m - 1.0).abs() < 1e-12, "{m}");
    }
}

#[test]
fn trepr_surface_is_time_major() {
    let mut c = small_spectrum();
    c.experiment = Experiment::Trepr;
    c.spectrum.field_points = 3;
    c.trepr.times = Some(vec![0.5, 5.0, 50.0]);
    let t = run(&c);
    assert_eq!(t.columns, ["t_ns", "field_mK", "chi_re", "chi_im"]);
    let times: Vec<f64> = t.rows.iter().map(|r| r[0]).collect();
    assert_eq!(times, [0.5, 0.5, 0.5, 5.0, 5.0, 5.0, 50.0, 50.0, 50.0]);
}
