//! Experiment configuration: a TOML tree with strict keys and baseline
//! defaults.
//!
//! ```toml
//! experiment = "sweep"        # populations | spectrum | trepr | sweep
//! normalize = true
//! workers = 4
//!
//! [model]
//! kind = "SRTS"
//! j_exchange = -10.0
//!
//! [sweep]
//! parameter = "gamma_isc"
//! values = [0.33, 3.3, 33.0]
//! measure = "populations"
//! ```
//!
//! Every section and key is optional; see the struct fields for names and
//! defaults.

use serde::{Deserialize, Serialize};
use trepr_core::model::{ModelKind, ModelParams};
use trepr_core::propagate::{log_grid, Protocol};
use trepr_core::response::{uniform_grid, SpectrumConfig};

use crate::error::{Result, SimError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Populations,
    #[default]
    Spectrum,
    Trepr,
    Sweep,
}

/// What each point of a sweep computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Populations,
    Spectrum,
    Trepr,
}

impl Measure {
    pub fn file_stem(self) -> &'static str {
        match self {
            Measure::Populations => "populations",
            Measure::Spectrum => "spectrum",
            Measure::Trepr => "trepr",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Format, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Kind {
    #[default]
    #[serde(rename = "SRTS", alias = "srts")]
    Srts,
    #[serde(rename = "DRTS", alias = "drts")]
    Drts,
}

impl From<Kind> for ModelKind {
    fn from(k: Kind) -> ModelKind {
        match k {
            Kind::Srts => ModelKind::Srts,
            Kind::Drts => ModelKind::Drts,
        }
    }
}

/// Model parameters in mK.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub kind: Kind,
    pub g_triplet: f64,
    pub g_radical: f64,
    pub zeeman: f64,
    pub j_exchange: f64,
    pub d_zfs: f64,
    pub e_zfs: f64,
    pub v_laser: f64,
    pub gamma_radical_flip: f64,
    pub gamma_radical_dephase: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_radical2_flip: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_radical2_dephase: Option<f64>,
    pub gamma_triplet_flip: f64,
    pub gamma_triplet_dephase: f64,
    pub gamma_isc: f64,
    pub gamma_decay: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection::from(&ModelParams::srts())
    }
}

impl From<&ModelParams> for ModelSection {
    fn from(p: &ModelParams) -> Self {
        ModelSection {
            kind: match p.kind {
                ModelKind::Srts => Kind::Srts,
                ModelKind::Drts => Kind::Drts,
            },
            g_triplet: p.g_triplet,
            g_radical: p.g_radical,
            zeeman: p.zeeman,
            j_exchange: p.j_exchange,
            d_zfs: p.d_zfs,
            e_zfs: p.e_zfs,
            v_laser: p.v_laser,
            gamma_radical_flip: p.gamma_radical_flip,
            gamma_radical_dephase: p.gamma_radical_dephase,
            gamma_radical2_flip: p.gamma_radical2_flip,
            gamma_radical2_dephase: p.gamma_radical2_dephase,
            gamma_triplet_flip: p.gamma_triplet_flip,
            gamma_triplet_dephase: p.gamma_triplet_dephase,
            gamma_isc: p.gamma_isc,
            gamma_decay: p.gamma_decay,
        }
    }
}

impl ModelSection {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            kind: self.kind.into(),
            g_triplet: self.g_triplet,
            g_radical: self.g_radical,
            zeeman: self.zeeman,
            j_exchange: self.j_exchange,
            d_zfs: self.d_zfs,
            e_zfs: self.e_zfs,
            v_laser: self.v_laser,
            gamma_radical_flip: self.gamma_radical_flip,
            gamma_radical_dephase: self.gamma_radical_dephase,
            gamma_radical2_flip: self.gamma_radical2_flip,
            gamma_radical2_dephase: self.gamma_radical2_dephase,
            gamma_triplet_flip: self.gamma_triplet_flip,
            gamma_triplet_dephase: self.gamma_triplet_dephase,
            gamma_isc: self.gamma_isc,
            gamma_decay: self.gamma_decay,
        }
    }
}

/// Laser protocol and population sampling, in ns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolSection {
    pub t_on_end: f64,
    pub t_total: f64,
    /// Number of log-spaced samples when `times` is absent.
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        ProtocolSection {
            t_on_end: Protocol::DEFAULT_T_ON_END,
            t_total: Protocol::DEFAULT_T_TOTAL,
            samples: Protocol::DEFAULT_SAMPLES,
            times: None,
        }
    }
}

/// Field sweep; energies in mK, time in ns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub omega: f64,
    pub epsilon: f64,
    pub field_min: f64,
    pub field_max: f64,
    pub field_points: usize,
    pub observe_time: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            omega: SpectrumConfig::DEFAULT_OMEGA,
            epsilon: SpectrumConfig::DEFAULT_EPSILON,
            field_min: 0.0,
            field_max: 400.0,
            field_points: 201,
            observe_time: SpectrumConfig::DEFAULT_OBSERVE_TIME,
        }
    }
}

/// Observation times of a time-resolved surface: log-spaced on
/// `[t_min, t_max]` unless `times` is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TreprSection {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
}

impl Default for TreprSection {
    fn default() -> Self {
        TreprSection {
            t_min: 0.1,
            t_max: 1000.0,
            points: 40,
            times: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Vec<f64>,
    #[serde(default = "default_measure")]
    pub measure: Measure,
}

fn default_measure() -> Measure {
    Measure::Spectrum
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
    pub format: Format,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: "out".into(),
            format: Format::Csv,
        }
    }
}

/// A complete, defaulted experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Divide each spectrum series by its largest `|−Im χ|`.
    pub normalize: bool,
    /// Concurrent work lanes; never changes the output.
    pub workers: usize,
    pub model: ModelSection,
    pub protocol: ProtocolSection,
    pub spectrum: SpectrumSection,
    pub trepr: TreprSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    pub output: OutputSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::default(),
            normalize: false,
            workers: 1,
            model: ModelSection::default(),
            protocol: ProtocolSection::default(),
            spectrum: SpectrumSection::default(),
            trepr: TreprSection::default(),
            sweep: None,
            output: OutputSection::default(),
        }
    }
}

/// Parameters a sweep may vary: every numeric model field plus the spectrum
/// and protocol settings listed here.
pub const SWEEPABLE: &[&str] = &[
    "g_triplet",
    "g_radical",
    "zeeman",
    "j_exchange",
    "d_zfs",
    "e_zfs",
    "v_laser",
    "gamma_radical_flip",
    "gamma_radical_dephase",
    "gamma_radical2_flip",
    "gamma_radical2_dephase",
    "gamma_triplet_flip",
    "gamma_triplet_dephase",
    "gamma_isc",
    "gamma_decay",
    "omega",
    "epsilon",
    "observe_time",
    "t_on_end",
];

/// Parses and validates a TOML configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = toml::Deserializer::new(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        SimError::config(key, inner.message().trim().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

/// Maps a core parameter name to its key path.
fn core_key(name: &str) -> String {
    match name {
        "protocol" | "t_on_end" => "protocol.t_on_end".into(),
        "sample_times" => "protocol.times".into(),
        "omega" | "epsilon" | "observe_time" => format!("spectrum.{name}"),
        "field_grid" => "spectrum.field_points".into(),
        other => format!("model.{other}"),
    }
}

fn config_error(e: trepr_core::Error) -> SimError {
    match e {
        trepr_core::Error::InvalidParameter { name, reason } => SimError::config(core_key(name), reason),
        other => SimError::Numerical(other),
    }
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// The configuration as recorded in output metadata: execution-only
    /// settings (`workers`, `output`) are left out so that results do not
    /// depend on them.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("configuration serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("workers");
            map.remove("output");
        }
        v
    }

    pub fn model_params(&self) -> ModelParams {
        self.model.params()
    }

    pub fn protocol(&self) -> Result<Protocol> {
        let p = &self.protocol;
        let times = match &p.times {
            Some(t) => t.clone(),
            None => log_grid(p.t_on_end, p.t_total, p.samples),
        };
        Protocol::new(p.t_on_end, p.t_total, times).map_err(config_error)
    }

    pub fn spectrum_config(&self) -> SpectrumConfig {
        let s = &self.spectrum;
        SpectrumConfig {
            omega: s.omega,
            epsilon: s.epsilon,
            field_grid: uniform_grid(s.field_min, s.field_max, s.field_points),
            observe_time: s.observe_time,
        }
    }

    pub fn trepr_times(&self) -> Vec<f64> {
        let t = &self.trepr;
        if let Some(times) = &t.times {
            return times.clone();
        }
        if t.points <= 1 {
            return vec![t.t_min];
        }
        let (a, b) = (t.t_min.log10(), t.t_max.log10());
        (0..t.points)
            .map(|k| 10f64.powf(a + (b - a) * k as f64 / (t.points - 1) as f64))
            .collect()
    }

    /// What the run computes, with the sweep values (a single unnamed
    /// point when not sweeping).
    pub fn plan(&self) -> (Measure, Option<&SweepSection>) {
        match self.experiment {
            Experiment::Populations => (Measure::Populations, None),
            Experiment::Spectrum => (Measure::Spectrum, None),
            Experiment::Trepr => (Measure::Trepr, None),
            Experiment::Sweep => {
                let s = self.sweep.as_ref().expect("validated sweep");
                (s.measure, Some(s))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(SimError::config("workers", "must be a positive integer"));
        }
        self.model_params().validate().map_err(config_error)?;
        self.protocol()?;
        if self.spectrum.field_points == 0 {
            return Err(SimError::config("spectrum.field_points", "must be positive"));
        }
        if !(self.spectrum.field_max >= self.spectrum.field_min) {
            return Err(SimError::config(
                "spectrum.field_max",
                "must not be below spectrum.field_min",
            ));
        }
        self.spectrum_config().validate().map_err(config_error)?;
        let times = self.trepr_times();
        if times.is_empty() || times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(SimError::config(
                "trepr",
                "observation times must be finite and non-negative",
            ));
        }
        if self.trepr.times.is_none() && !(self.trepr.t_min > 0.0 && self.trepr.t_max >= self.trepr.t_min) {
            return Err(SimError::config("trepr.t_min", "need 0 < t_min <= t_max"));
        }
        match (self.experiment, &self.sweep) {
            (Experiment::Sweep, None) => {
                return Err(SimError::config(
                    "sweep",
                    "experiment = \"sweep\" needs a [sweep] table",
                ));
            }
            (Experiment::Sweep, Some(s)) => self.validate_sweep(s)?,
            (_, Some(_)) => {
                return Err(SimError::config("sweep", "only used with experiment = \"sweep\""));
            }
            (_, None) => {}
        }
        Ok(())
    }

    fn validate_sweep(&self, s: &SweepSection) -> Result<()> {
        if !SWEEPABLE.contains(&s.parameter.as_str()) {
            return Err(SimError::config(
                "sweep.parameter",
                format!(
                    "unknown parameter `{}`; expected one of {}",
                    s.parameter,
                    SWEEPABLE.join(", ")
                ),
            ));
        }
        if s.parameter.starts_with("gamma_radical2") && self.model.kind == Kind::Srts {
            return Err(SimError::config(
                "sweep.parameter",
                format!("`{}` needs a second radical, but model.kind is SRTS", s.parameter),
            ));
        }
        if s.values.is_empty() {
            return Err(SimError::config("sweep.values", "at least one value is required"));
        }
        for (i, &v) in s.values.iter().enumerate() {
            let mut point = self.clone();
            point.sweep = None;
            point.experiment = Experiment::Spectrum;
            point.set_parameter(&s.parameter, v);
            point.validate().map_err(|e| match e {
                SimError::Config { key, reason } => {
                    SimError::config(format!("sweep.values[{i}]"), format!("{key}: {reason}"))
                }
                other => other,
            })?;
        }
        Ok(())
    }

    /// Sets one sweepable parameter.
    pub fn set_parameter(&mut self, name: &str, value: f64) {
        let m = &mut self.model;
        match name {
            "g_triplet" => m.g_triplet = value,
            "g_radical" => m.g_radical = value,
            "zeeman" => m.zeeman = value,
            "j_exchange" => m.j_exchange = value,
            "d_zfs" => m.d_zfs = value,
            "e_zfs" => m.e_zfs = value,
            "v_laser" => m.v_laser = value,
            "gamma_radical_flip" => m.gamma_radical_flip = value,
            "gamma_radical_dephase" => m.gamma_radical_dephase = value,
            "gamma_radical2_flip" => m.gamma_radical2_flip = Some(value),
            "gamma_radical2_dephase" => m.gamma_radical2_dephase = Some(value),
            "gamma_triplet_flip" => m.gamma_triplet_flip = value,
            "gamma_triplet_dephase" => m.gamma_triplet_dephase = value,
            "gamma_isc" => m.gamma_isc = value,
            "gamma_decay" => m.gamma_decay = value,
            "omega" => self.spectrum.omega = value,
            "epsilon" => self.spectrum.epsilon = value,
            "observe_time" => self.spectrum.observe_time = value,
            "t_on_end" => self.protocol.t_on_end = value,
            other => panic!("`{other}` is not sweepable"),
        }
    }

    /// The single-point configurations of a sweep, in order.
    pub fn sweep_points(&self) -> Vec<(Option<f64>, ExperimentConfig)> {
        match self.plan() {
            (_, None) => vec![(None, self.clone())],
            (measure, Some(s)) => s
                .values
                .iter()
                .map(|&v| {
                    let mut point = self.clone();
                    point.sweep = None;
                    point.experiment = match measure {
                        Measure::Populations => Experiment::Populations,
                        Measure::Spectrum => Experiment::Spectrum,
                        Measure::Trepr => Experiment::Trepr,
                    };
                    point.set_parameter(&s.parameter, v);
                    (Some(v), point)
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_baseline() {
        let c = parse_config("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.model_params(), ModelParams::srts());
        assert_eq!(c.spectrum_config(), SpectrumConfig::default());
        assert_eq!(c.protocol().unwrap(), Protocol::default());
    }

    #[test]
    fn unknown_keys_are_rejected_with_path() {
        let e = parse_config("[model]\nj_exchnage = 3.0\n").unwrap_err();
        match e {
            SimError::Config { key, reason } => {
                assert_eq!(key, "model.j_exchnage");
                assert!(reason.contains("unknown field"), "{reason}");
            }
            other => panic!("{other}"),
        }
        let e = parse_config("[model]\ngamma_isc = \"fast\"\n").unwrap_err();
        assert!(
            matches!(e, SimError::Config { ref key, .. } if key == "model.gamma_isc"),
            "{e}"
        );
    }

    #[test]
    fn invariant_violations_name_the_key() {
        let e = parse_config("[model]\ngamma_decay = -1.0\n").unwrap_err();
        assert!(
            matches!(e, SimError::Config { ref key, .. } if key == "model.gamma_decay"),
            "{e}"
        );
        let e = parse_config("[model]\ngamma_radical2_flip = 1.0\n").unwrap_err();
        assert!(matches!(e, SimError::Config { ref key, .. } if key == "model.gamma_radical2_flip"));
        let e = parse_config("workers = 0").unwrap_err();
        assert!(matches!(e, SimError::Config { ref key, .. } if key == "workers"));
        let e = parse_config("[spectrum]\nepsilon = 0.0\n").unwrap_err();
        assert!(matches!(e, SimError::Config { ref key, .. } if key == "spectrum.epsilon"));
    }

    #[test]
    fn second_radical_sweep_needs_drts() {
        let text = "experiment = \"sweep\"\n[sweep]\nparameter = \"gamma_radical2_flip\"\nvalues = [1.0]\n";
        let e = parse_config(text).unwrap_err();
        assert!(
            matches!(e, SimError::Config { ref key, .. } if key == "sweep.parameter"),
            "{e}"
        );
        let ok = format!("{text}[model]\nkind = \"DRTS\"\n");
        assert!(parse_config(&ok).is_ok());
    }

    #[test]
    fn sweep_validation() {
        let e = parse_config("experiment = \"sweep\"\n[sweep]\nparameter = \"banana\"\nvalues = [1.0]\n").unwrap_err();
        assert!(matches!(e, SimError::Config { ref key, .. } if key == "sweep.parameter"));
        let e = parse_config("experiment = \"sweep\"\n[sweep]\nparameter = \"gamma_isc\"\nvalues = [1.0, -2.0]\n")
            .unwrap_err();
        assert!(
            matches!(e, SimError::Config { ref key, .. } if key == "sweep.values[1]"),
            "{e}"
        );
        assert!(parse_config("experiment = \"sweep\"").is_err());
        assert!(parse_config("[sweep]\nparameter = \"gamma_isc\"\nvalues = [1.0]\n").is_err());
    }

    #[test]
    fn sweep_points_apply_values() {
        let c = parse_config(
            "experiment = \"sweep\"\n[sweep]\nparameter = \"epsilon\"\nvalues = [0.05, 0.2]\nmeasure = \"spectrum\"\n",
        )
        .unwrap();
        let points = c.sweep_points();
        assert_eq!(points.len(), 2);
        assert_eq!(points[1].0, Some(0.2));
        assert_eq!(points[1].1.spectrum.epsilon, 0.2);
        assert_eq!(points[1].1.experiment, Experiment::Spectrum);
    }

    #[test]
    fn round_trip() {
        let text = r#"
experiment = "sweep"
normalize = true
workers = 3
[model]
kind = "DRTS"
j_exchange = -50.0
gamma_radical2_flip = 0.1
[protocol]
times = [0.5, 1.0, 8.0, 100.0]
[trepr]
times = [1.0, 2.0]
[sweep]
parameter = "gamma_triplet_flip"
values = [1.0, 5.0, 10.0, 50.0]
measure = "trepr"
[output]
format = "json"
"#;
        let c = parse_config(text).unwrap();
        let again = parse_config(&c.to_toml()).unwrap();
        assert_eq!(c, again);
        assert_eq!(
            parse_config(&ExperimentConfig::default().to_toml()).unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn echo_omits_execution_settings() {
        let mut a = ExperimentConfig::default();
        let mut b = a.clone();
        a.workers = 1;
        b.workers = 8;
        b.output.directory = "elsewhere".into();
        assert_eq!(a.echo(), b.echo());
    }

    #[test]
    fn trepr_grid() {
        let c = ExperimentConfig::default();
        let t = c.trepr_times();
        assert_eq!(t.len(), 40);
        assert!((t[0] - 0.1).abs() < 1e-15 && (t[39] - 1000.0).abs() < 1e-9);
    }
}
