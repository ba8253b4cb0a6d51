//! Figure presets. Suffix `a` is the single-radical model, `b` the
//! double-radical one; sweep values follow the figure captions.

use crate::config::{Experiment, ExperimentConfig, Kind, Measure, SweepSection};
use crate::error::{Result, SimError};
use crate::run::RunInfo;

pub const PRESETS: &[&str] = &[
    "fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig5a", "fig5b", "fig6a", "fig6b", "fig7a", "fig7b",
];

/// Exchange values of the line-broadening study, mK.
pub const EXCHANGE_SERIES: [f64; 7] = [0.0, 20.0, 30.0, 50.0, 100.0, 200.0, 500.0];
/// Triplet relaxation values of the line-splitting study, mK.
pub const TRIPLET_RELAXATION_SERIES: [f64; 4] = [1.0, 5.0, 10.0, 50.0];

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: String,
    pub config: ExperimentConfig,
    pub notes: Vec<String>,
}

impl Preset {
    pub fn info(&self) -> RunInfo {
        RunInfo {
            preset: Some(self.name.clone()),
            notes: self.notes.clone(),
        }
    }
}

fn sweep(config: &mut ExperimentConfig, parameter: &str, values: &[f64], measure: Measure) {
    config.experiment = Experiment::Sweep;
    config.sweep = Some(SweepSection {
        parameter: parameter.into(),
        values: values.to_vec(),
        measure,
    });
}

/// Spectrum settings shared by the exchange, relaxation and surface studies.
fn spectrum_base(config: &mut ExperimentConfig) {
    config.model.v_laser = 1.0;
    config.model.gamma_isc = 33.0;
    config.spectrum.observe_time = 1.0;
}

pub fn preset(name: &str) -> Result<Preset> {
    let (figure, variant) = name.split_at(name.len().saturating_sub(1));
    let kind = match variant {
        "a" => Kind::Srts,
        "b" => Kind::Drts,
        _ => return Err(unknown(name)),
    };
    let mut c = ExperimentConfig::default();
    c.model.kind = kind;
    let mut notes = Vec::new();
    match figure {
        "fig2" => sweep(&mut c, "gamma_isc", &[0.33, 3.3, 33.0], Measure::Populations),
        "fig3" => {
            c.model.gamma_isc = 33.0;
            sweep(&mut c, "v_laser", &[1.0, 2.0, 10.0], Measure::Populations);
        }
        "fig4" => {
            sweep(&mut c, "gamma_decay", &[1.0, 2.0, 10.0], Measure::Populations);
            notes.push(
                "the source caption labels two of these decay-rate curves with \"V=\"; \
                 the values are used as decay rates"
                    .into(),
            );
        }
        "fig5" => {
            spectrum_base(&mut c);
            c.normalize = true;
            sweep(&mut c, "j_exchange", &EXCHANGE_SERIES, Measure::Spectrum);
        }
        "fig6" => {
            spectrum_base(&mut c);
            c.model.j_exchange = -50.0;
            c.normalize = true;
            sweep(
                &mut c,
                "gamma_triplet_flip",
                &TRIPLET_RELAXATION_SERIES,
                Measure::Spectrum,
            );
        }
        "fig7" => {
            spectrum_base(&mut c);
            c.model.j_exchange = -50.0;
            sweep(&mut c, "gamma_triplet_flip", &TRIPLET_RELAXATION_SERIES, Measure::Trepr);
        }
        _ => return Err(unknown(name)),
    }
    Ok(Preset {
        name: name.into(),
        config: c,
        notes,
    })
}

fn unknown(name: &str) -> SimError {
    SimError::config(
        "preset",
        format!("unknown preset `{name}`; expected one of {}", PRESETS.join(", ")),
    )
}
