//! Report of a simulated beam run.

use std::fmt::Write as _;

use serde::Serialize;
use thermocav::beam::{run_experiment_atom, CHANNEL_REL_TOL};
use thermocav::ModelKind;

use crate::config::{Format, RunConfig};
use crate::figures::{label_name, model_name, total_with_error};
use crate::output::{number, to_json, Metadata};
use crate::CliError;

/// Below this transition probability the run is reported as showing no
/// measurable transitions.
pub const MEASURABLE_TRANSITION_PROBABILITY: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub error: f64,
    pub unit: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateRow {
    pub state: String,
    pub initial_population: f64,
    pub exit_population: f64,
    pub exit_population_err: f64,
    /// Total rate out of the state, 1/s.
    pub total_rate: f64,
    pub total_rate_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEntry {
    pub from: String,
    pub to: String,
    /// 1/s.
    pub rate: f64,
    pub rate_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamReport {
    pub metadata: Metadata,
    pub model: &'static str,
    pub initial_state: String,
    pub field_gauss: f64,
    pub theta_rad: f64,
    pub survival_fraction: Quantity,
    pub channel_width: Quantity,
    pub flight_time: Quantity,
    pub transition_probability: Quantity,
    pub no_measurable_transitions: bool,
    pub states: Vec<StateRow>,
    pub rates: Vec<RateEntry>,
}

pub fn run_beam(config: &RunConfig, model: Option<ModelKind>, config_sha256: String) -> Result<BeamReport, CliError> {
    let setup = config.setup_with(model)?;
    let atom = config.atom_constants()?;
    let beam = config.beam_config();
    let initial = config.initial_state()?;
    let b = &config.beam;
    let r = run_experiment_atom(
        &setup,
        &beam,
        &atom,
        b.field_gauss,
        b.theta_rad,
        initial,
        &config.quadrature_spec(),
    )?;

    let rates = &r.rates;
    let n = rates.dimension();
    // e^{tG} is a contraction in the 1-norm, so |dp| <= t |dG|_1
    let generator_err = (0..n)
        .map(|i| 2.0 * (0..n).filter(|&f| f != i).map(|f| rates.error[(f, i)]).sum::<f64>())
        .fold(0.0, f64::max);
    let population_err = (r.flight_time * generator_err).min(1.0);

    let states = (0..n)
        .map(|i| {
            let (total, err) = total_with_error(rates, i);
            StateRow {
                state: label_name(r.labels[i]),
                initial_population: if r.labels[i] == initial { 1.0 } else { 0.0 },
                exit_population: r.populations.p[i],
                exit_population_err: population_err,
                total_rate: total,
                total_rate_err: err,
            }
        })
        .collect();
    let mut entries = Vec::new();
    for i in 0..n {
        for f in (0..n).filter(|&f| f != i) {
            entries.push(RateEntry {
                from: label_name(r.labels[i]),
                to: label_name(r.labels[f]),
                rate: rates.gamma[(f, i)],
                rate_err: rates.error[(f, i)],
            });
        }
    }

    let mut warnings = setup.warnings();
    let no_transitions = r.transition_probability < MEASURABLE_TRANSITION_PROBABILITY;
    if no_transitions {
        warnings.push("no measurable transitions".into());
    }
    let width_err = 2.0 * CHANNEL_REL_TOL * r.channel_width;
    Ok(BeamReport {
        metadata: Metadata::new("run-beam", config_sha256, warnings),
        model: model_name(model.unwrap_or_else(|| config.model_kind())),
        initial_state: label_name(initial),
        field_gauss: b.field_gauss,
        theta_rad: b.theta_rad,
        survival_fraction: Quantity {
            value: r.survival_fraction,
            error: width_err / setup.a,
            unit: "1",
        },
        channel_width: Quantity {
            value: r.channel_width,
            error: width_err,
            unit: "m",
        },
        flight_time: Quantity {
            value: r.flight_time,
            error: 0.0,
            unit: "s",
        },
        transition_probability: Quantity {
            value: r.transition_probability,
            error: population_err,
            unit: "1",
        },
        no_measurable_transitions: no_transitions,
        states,
        rates: entries,
    })
}

impl BeamReport {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => to_json(self),
            Format::Csv => self.to_csv(),
        }
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        let m = &self.metadata;
        let _ = writeln!(out, "# program: {} {}", m.program, m.version);
        let _ = writeln!(out, "# library: thermocav {}", m.library_version);
        let _ = writeln!(out, "# output: {}", m.kind);
        let _ = writeln!(out, "# config_sha256: {}", m.config_sha256);
        for w in &m.warnings {
            let _ = writeln!(out, "# warning: {w}");
        }
        let _ = writeln!(out, "# model: {}", self.model);
        let _ = writeln!(out, "# initial_state: {}", self.initial_state);
        let _ = writeln!(out, "# field_gauss: {}", number(self.field_gauss));
        let _ = writeln!(out, "# theta_rad: {}", number(self.theta_rad));
        for (name, q) in [
            ("survival_fraction", &self.survival_fraction),
            ("channel_width", &self.channel_width),
            ("flight_time", &self.flight_time),
            ("transition_probability", &self.transition_probability),
        ] {
            let _ = writeln!(out, "# {name}: {} +- {} {}", number(q.value), number(q.error), q.unit);
        }
        let _ = writeln!(out, "# no_measurable_transitions: {}", self.no_measurable_transitions);

        let names: Vec<&str> = self.states.iter().map(|s| s.state.as_str()).collect();
        out.push_str("state,initial_population,exit_population,exit_population_err,total_rate,total_rate_err");
        for to in &names {
            let _ = write!(out, ",rate_to_{to},rate_to_{to}_err");
        }
        out.push('\n');
        for s in &self.states {
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                s.state,
                number(s.initial_population),
                number(s.exit_population),
                number(s.exit_population_err),
                number(s.total_rate),
                number(s.total_rate_err)
            );
            for to in &names {
                let (rate, err) = self
                    .rates
                    .iter()
                    .find(|e| e.from == s.state && e.to == *to)
                    .map_or((0.0, 0.0), |e| (e.rate, e.rate_err));
                let _ = write!(out, ",{},{}", number(rate), number(err));
            }
            out.push('\n');
        }
        out
    }
}
