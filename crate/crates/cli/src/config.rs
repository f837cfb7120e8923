//! Run configuration: JSON schema, validation, defaults.

use crate::CliError;
use neumann_core::phase::{PhasePoint, PotentialSpec};
use neumann_core::{parse_rat, Rat};
use serde::Deserialize;
use std::path::Path;

pub const DEFAULT_T_FINAL: f64 = 100.0;
pub const DEFAULT_H: f64 = 1e-3;
pub const DEFAULT_STRIDE: usize = 100;
pub const DEFAULT_TOL_CONSTRAINT: f64 = 1e-10;
pub const DEFAULT_TOL_DRIFT_REL: f64 = 1e-6;
pub const DEFAULT_TOL_DRIFT_CONSTRAINT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum NumbersMode {
    Exact,
    Float,
}

/// Initial state: explicit coordinates (exact rationals) or a seed for the
/// deterministic sampler.
#[derive(Debug, Clone)]
pub enum StateSpec {
    Coords { q: Vec<Rat>, p: Vec<Rat> },
    Seed(u64),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub state: StateSpec,
    pub numbers_mode: NumbersMode,
    pub t_final: f64,
    pub h: f64,
    pub stride: usize,
    pub tol_constraint: f64,
    pub tol_drift_rel: f64,
    pub tol_drift_constraint: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    potential: Vec<RawEigenvalue>,
    state: RawState,
    numbers_mode: Option<String>,
    integrator: Option<RawIntegrator>,
    tolerances: Option<RawTolerances>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEigenvalue {
    value: String,
    multiplicity: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    q: Option<Vec<String>>,
    p: Option<Vec<String>>,
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    t_final: Option<f64>,
    h: Option<f64>,
    stride: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    constraint: Option<f64>,
    drift_rel: Option<f64>,
    drift_constraint: Option<f64>,
}

pub(crate) fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn schema_err(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("config field `{field}`: {reason}"))
}

fn parse_rat_field(field: &str, s: &str) -> Result<Rat, CliError> {
    parse_rat(s).ok_or_else(|| schema_err(field, format!("`{s}` is not a decimal or fraction")))
}

/// Loads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let raw: RawConfig = serde_json::from_str(&text).map_err(|e| {
        CliError::Config(format!(
            "{} (line {}, column {})",
            e,
            e.line(),
            e.column()
        ))
    })?;

    if raw.potential.is_empty() {
        return Err(schema_err("potential", "must list at least two eigenvalues"));
    }
    let mut values = Vec::with_capacity(raw.potential.len());
    let mut mults = Vec::with_capacity(raw.potential.len());
    for (i, e) in raw.potential.iter().enumerate() {
        values.push(parse_rat_field(&format!("potential[{i}].value"), &e.value)?);
        mults.push(e.multiplicity);
    }
    let potential = PotentialSpec::new(values, mults)
        .map_err(|e| schema_err("potential", e))?;

    let state = match (&raw.state.q, &raw.state.p, raw.state.seed) {
        (Some(q), Some(p), None) => {
            let parse_vec = |field: &str, v: &[String]| -> Result<Vec<Rat>, CliError> {
                v.iter()
                    .enumerate()
                    .map(|(i, s)| parse_rat_field(&format!("state.{field}[{i}]"), s))
                    .collect()
            };
            StateSpec::Coords {
                q: parse_vec("q", q)?,
                p: parse_vec("p", p)?,
            }
        }
        (None, None, Some(seed)) => StateSpec::Seed(seed),
        _ => {
            return Err(schema_err(
                "state",
                "exactly one of {q, p} or {seed} must be present",
            ))
        }
    };

    let numbers_mode = match raw.numbers_mode.as_deref() {
        None | Some("exact") => NumbersMode::Exact,
        Some("float") => NumbersMode::Float,
        Some(other) => return Err(schema_err("numbers_mode", format!("unknown mode `{other}`"))),
    };

    let integrator = raw.integrator.unwrap_or(RawIntegrator {
        t_final: None,
        h: None,
        stride: None,
    });
    let tolerances = raw.tolerances.unwrap_or(RawTolerances {
        constraint: None,
        drift_rel: None,
        drift_constraint: None,
    });

    let cfg = RunConfig {
        potential,
        state,
        numbers_mode,
        t_final: integrator.t_final.unwrap_or(DEFAULT_T_FINAL),
        h: integrator.h.unwrap_or(DEFAULT_H),
        stride: integrator.stride.unwrap_or(DEFAULT_STRIDE),
        tol_constraint: tolerances.constraint.unwrap_or(DEFAULT_TOL_CONSTRAINT),
        tol_drift_rel: tolerances.drift_rel.unwrap_or(DEFAULT_TOL_DRIFT_REL),
        tol_drift_constraint: tolerances
            .drift_constraint
            .unwrap_or(DEFAULT_TOL_DRIFT_CONSTRAINT),
    };
    if !positive(cfg.t_final) {
        return Err(schema_err("integrator.t_final", "must be positive"));
    }
    if !positive(cfg.h) {
        return Err(schema_err("integrator.h", "must be positive"));
    }
    if cfg.stride == 0 {
        return Err(schema_err("integrator.stride", "must be at least 1"));
    }
    Ok(cfg)
}

impl RunConfig {
    /// The exact rational state; explicit coordinates are required.
    pub fn exact_state(&self) -> Result<PhasePoint<Rat>, CliError> {
        match &self.state {
            StateSpec::Coords { q, p } => PhasePoint::new(q.clone(), p.clone(), 0.0)
                .map_err(CliError::from_core),
            StateSpec::Seed(_) => Err(CliError::Config(
                "this command needs an exact state: give state.q and state.p \
                 as decimal strings instead of a seed"
                    .into(),
            )),
        }
    }

    /// The binary64 state, from coordinates or from the seeded sampler.
    pub fn float_state(&self) -> Result<PhasePoint<f64>, CliError> {
        match &self.state {
            StateSpec::Coords { q, p } => {
                let to_f64 = |v: &[Rat]| -> Vec<f64> {
                    v.iter().map(neumann_core::Scalar::to_f64).collect()
                };
                PhasePoint::new(to_f64(q), to_f64(p), self.tol_constraint)
                    .map_err(CliError::from_core)
            }
            StateSpec::Seed(seed) => Ok(neumann_core::phase::random_state(&self.potential, *seed)),
        }
    }
}
