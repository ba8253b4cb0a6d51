//! Sweep orchestration.
//!
//! A run is split into independent work items (one per sweep value for
//! populations, one per sweep value and field for spectra and surfaces)
//! evaluated on a pool of `workers` threads. Results are collected in item
//! order, so the output does not depend on the worker count.

use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::Value;
use trepr_core::propagate::{evolve_protocol, Trajectory};
use trepr_core::response::{
    assemble_surface, epr_labels, field_point_over_times, field_sweep, ChiValue, SpectrumResult, SIGN_CONVENTION,
};
use trepr_core::units::UnitSystem;

use crate::config::{ExperimentConfig, Measure};
use crate::error::{Result, SimError};
use crate::output::Table;

/// Provenance recorded alongside a run's data.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunInfo {
    pub preset: Option<String>,
    pub notes: Vec<String>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::config("workers", e.to_string()))
}

/// Runs a configuration (single point or sweep) and returns its table.
pub fn run_sweep(config: &ExperimentConfig, info: &RunInfo) -> Result<Table> {
    config.validate()?;
    let (measure, sweep) = config.plan();
    let points = config.sweep_points();
    let units = UnitSystem::codata();
    let swept = sweep.map(|s| s.parameter.as_str());
    let mut table = pool(config.workers)?.install(|| match measure {
        Measure::Populations => populations_table(&points, swept),
        Measure::Spectrum => spectrum_table(&points, swept, config.normalize, &units),
        Measure::Trepr => trepr_table(&points, swept, config.normalize, &units),
    })?;
    let mut metadata = vec![
        (
            "generator".to_string(),
            Value::from(concat!("trepr-sim ", env!("CARGO_PKG_VERSION"))),
        ),
        ("measure".to_string(), Value::from(measure.file_stem())),
    ];
    if let Some(p) = &info.preset {
        metadata.push(("preset".into(), Value::from(p.as_str())));
    }
    for n in &info.notes {
        metadata.push(("note".into(), Value::from(n.as_str())));
    }
    if let Some(s) = sweep {
        metadata.push(("sweep_parameter".into(), Value::from(s.parameter.as_str())));
        metadata.push(("sweep_values".into(), Value::from(s.values.clone())));
    }
    metadata.push(("energy_unit".into(), Value::from("mK")));
    metadata.push(("mk_to_rad_per_ns".into(), Value::from(units.mk_to_rad_per_ns)));
    metadata.push(("sign_convention".into(), Value::from(SIGN_CONVENTION)));
    metadata.push(("config".into(), config.echo()));
    metadata.append(&mut table.metadata);
    table.metadata = metadata;
    Ok(table)
}

/// Runs and writes `<output.directory>/<measure>.<format>`.
pub fn run_and_write(config: &ExperimentConfig, info: &RunInfo) -> Result<PathBuf> {
    let table = run_sweep(config, info)?;
    table.write(config.output.directory.as_ref(), config.output.format)
}

type Point = (Option<f64>, ExperimentConfig);

/// Column names, led by the swept parameter if there is one.
fn header(swept: Option<&str>, names: &[&str]) -> Vec<String> {
    swept
        .into_iter()
        .chain(names.iter().copied())
        .map(String::from)
        .collect()
}

fn prefixed(value: Option<f64>, mut row: Vec<f64>) -> Vec<f64> {
    if let Some(v) = value {
        row.insert(0, v);
    }
    row
}

fn populations_table(points: &[Point], swept: Option<&str>) -> Result<Table> {
    let trajectories: Vec<Trajectory> = points
        .par_iter()
        .map(|(_, c)| Ok(evolve_protocol(&c.model_params(), &c.protocol()?)?))
        .collect::<Result<_>>()?;
    let correlated = trajectories.iter().all(|t| t.spin_correlation.is_some());
    let mut columns = header(swept, &["t_ns", "pop_gs", "pop_es", "pop_t"]);
    if correlated {
        columns.push("corr_s1s2".into());
    }
    let mut table = Table::new("populations", columns);
    for ((value, _), tr) in points.iter().zip(&trajectories) {
        for (i, (&t, p)) in tr.times.iter().zip(&tr.populations).enumerate() {
            let mut row = vec![t, p.gs, p.es, p.t];
            if correlated {
                row.push(tr.spin_correlation.as_ref().expect("checked")[i]);
            }
            table.push(prefixed(*value, row));
        }
    }
    Ok(table)
}

/// Scale that brings the largest `|−Im χ|` to one (1 for an all-zero series).
fn normalization(chi: impl Iterator<Item = f64>) -> f64 {
    let m = chi.fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        1.0 / m
    } else {
        1.0
    }
}

fn field_items(points: &[Point]) -> Vec<(usize, f64)> {
    points
        .iter()
        .enumerate()
        .flat_map(|(k, (_, c))| c.spectrum_config().field_grid.into_iter().map(move |f| (k, f)))
        .collect()
}

fn spectrum_table(points: &[Point], swept: Option<&str>, normalize: bool, units: &UnitSystem) -> Result<Table> {
    let items = field_items(points);
    let values: Vec<ChiValue> = items
        .par_iter()
        .map(|&(k, f)| {
            let c = &points[k].1;
            let cfg = c.spectrum_config();
            let mut v = field_point_over_times(
                &c.model_params(),
                &cfg,
                c.protocol.t_on_end,
                units,
                f,
                &[cfg.observe_time],
            )?;
            Ok(v.pop().expect("one time"))
        })
        .collect::<Result<_>>()?;

    let labels = epr_labels(&points[0].1.model_params());
    let mut columns = header(swept, &["field_mK", "chi_re", "chi_im"]);
    for l in &labels {
        columns.push(format!("comp_{l}_re"));
        columns.push(format!("comp_{l}_im"));
    }
    let mut table = Table::new("spectrum", columns);
    let mut scales = Vec::new();
    let mut next = values.into_iter();
    for (value, c) in points {
        let cfg = c.spectrum_config();
        let spec: SpectrumResult = field_sweep(&cfg.field_grid, labels.clone(), |_| {
            Ok(next.next().expect("one value per field"))
        })?;
        let scale = if normalize {
            normalization(spec.signal().into_iter())
        } else {
            1.0
        };
        scales.push(scale);
        for (i, &f) in spec.fields.iter().enumerate() {
            let mut row = vec![f, spec.chi[i].re * scale, spec.chi[i].im * scale];
            for z in &spec.components[i] {
                row.push(z.re * scale);
                row.push(z.im * scale);
            }
            table.push(prefixed(*value, row));
        }
    }
    table.meta("signal", "-Im chi (absorption)");
    table.meta("normalization", normalization_note(normalize, &scales));
    Ok(table)
}

fn normalization_note(normalize: bool, scales: &[f64]) -> Value {
    if normalize {
        serde_json::json!({ "divided_by_max_abs_signal": true, "scale": scales })
    } else {
        Value::from("none")
    }
}

fn trepr_table(points: &[Point], swept: Option<&str>, normalize: bool, units: &UnitSystem) -> Result<Table> {
    let items = field_items(points);
    let columns: Vec<Vec<ChiValue>> = items
        .par_iter()
        .map(|&(k, f)| {
            let c = &points[k].1;
            Ok(field_point_over_times(
                &c.model_params(),
                &c.spectrum_config(),
                c.protocol.t_on_end,
                units,
                f,
                &c.trepr_times(),
            )?)
        })
        .collect::<Result<_>>()?;

    let mut table = Table::new("trepr", header(swept, &["t_ns", "field_mK", "chi_re", "chi_im"]));
    let mut scales = Vec::new();
    let mut offset = 0;
    for (value, c) in points {
        let fields = c.spectrum_config().field_grid;
        let surface = assemble_surface(&c.trepr_times(), &fields, &columns[offset..offset + fields.len()]);
        offset += fields.len();
        let scale = if normalize {
            normalization(surface.chi.iter().flatten().map(|z| z.im))
        } else {
            1.0
        };
        scales.push(scale);
        for (i, &t) in surface.times.iter().enumerate() {
            for (j, &f) in surface.fields.iter().enumerate() {
                let z = surface.chi[i][j];
                table.push(prefixed(*value, vec![t, f, z.re * scale, z.im * scale]));
            }
        }
    }
    table.meta("signal", "-Im chi (absorption)");
    table.meta("normalization", normalization_note(normalize, &scales));
    Ok(table)
}
