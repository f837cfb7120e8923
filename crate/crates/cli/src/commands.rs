//! Subcommand implementations.

use crate::config::{NumbersMode, RunConfig};
use crate::report::{
    classification_report, float_invariants, rat_str, write_trajectory_csv, CheckResult,
    InvariantsReport, SimulateReport, SpectralReport, VerifyReport,
};
use crate::CliError;
use neumann_core::laxflow::{assemble_lax, check_form_preservation};
use neumann_core::{dynamics, spectral, Rat};
use num_traits::One;
use serde::Serialize;
use std::path::Path;

/// JSON payload of a finished command, plus a deferred failure so reports
/// are still emitted before the process exits nonzero.
pub struct CommandOutput {
    pub json: String,
    pub post: Option<CliError>,
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports contain no non-serializable values")
}

fn done<T: Serialize>(value: &T) -> Result<CommandOutput, CliError> {
    Ok(CommandOutput {
        json: to_json(value),
        post: None,
    })
}

pub fn classify(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    done(&classification_report(&cfg.potential))
}

pub fn invariants(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    match cfg.numbers_mode {
        NumbersMode::Exact => {
            let state = cfg.exact_state()?;
            let inv = spectral::invariants(&state, &cfg.potential).map_err(CliError::from_core)?;
            let reg = spectral::k_regularity(&inv);
            let (lhs, rhs) =
                spectral::energy_identity(&state, &cfg.potential).map_err(CliError::from_core)?;
            done(&InvariantsReport::exact(&inv, &reg, &lhs, &rhs))
        }
        NumbersMode::Float => {
            let state = cfg.float_state()?;
            let rep =
                float_invariants(&state, &cfg.potential).map_err(CliError::from_core)?;
            done(&rep)
        }
    }
}

pub fn spectral_curve(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let state = cfg.exact_state()?;
    let lax = assemble_lax(&state, &cfg.potential).map_err(CliError::from_core)?;
    let p = spectral::char_poly(&lax);
    let q = spectral::q_polynomial(&state, &cfg.potential).map_err(CliError::from_core)?;
    let d = spectral::factor_curve(&p, &cfg.potential, &q).map_err(CliError::from_core)?;
    let g = spectral::genus_report(&d, &cfg.potential).map_err(CliError::from_core)?;
    done(&SpectralReport::new(&p, &d, &g))
}

pub fn simulate(cfg: &RunConfig, csv: Option<&Path>) -> Result<CommandOutput, CliError> {
    let state = cfg.float_state()?;
    let traj = dynamics::integrate(&state, &cfg.potential, cfg.t_final, cfg.h, cfg.stride)
        .map_err(CliError::from_core)?;
    let report = dynamics::drift_report(&traj, &cfg.potential).map_err(CliError::from_core)?;
    if let Some(path) = csv {
        write_trajectory_csv(path, &traj, &cfg.potential).map_err(CliError::Other)?;
    }
    let sim = SimulateReport::new(
        &traj,
        &report,
        cfg.t_final,
        cfg.stride,
        cfg.tol_drift_rel,
        cfg.tol_drift_constraint,
    );
    let post = (!sim.within_tolerance).then(|| {
        CliError::Drift(format!(
            "relative drift {:e} or constraint drift {:e} exceeds the configured tolerances",
            report.max_relative_drift(),
            report.max_constraint_drift()
        ))
    });
    Ok(CommandOutput {
        json: to_json(&sim),
        post,
    })
}

struct Harness {
    checks: Vec<CheckResult>,
    post: Option<CliError>,
}

impl Harness {
    fn new() -> Self {
        Harness {
            checks: Vec::new(),
            post: None,
        }
    }

    fn pass(&mut self, name: &'static str, detail: impl Into<String>) {
        self.checks.push(CheckResult {
            name,
            passed: true,
            detail: detail.into(),
        });
    }

    fn fail(&mut self, name: &'static str, detail: impl Into<String>, err: CliError) {
        self.checks.push(CheckResult {
            name,
            passed: false,
            detail: detail.into(),
        });
        if self.post.is_none() {
            self.post = Some(err);
        }
    }

    fn finish(self) -> CommandOutput {
        let passed = self.checks.iter().all(|c| c.passed);
        CommandOutput {
            json: to_json(&VerifyReport {
                checks: self.checks,
                passed,
            }),
            post: self.post,
        }
    }
}

/// Runs every exact identity and the numeric property suite on the
/// configured state; any failure makes the exit code nonzero.
pub fn verify(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let spec = &cfg.potential;
    let mut h = Harness::new();

    let state = match cfg.exact_state() {
        Ok(s) => s,
        Err(e) => {
            let detail = e.to_string();
            h.fail("state_constraints", detail, e);
            return Ok(h.finish());
        }
    };
    h.pass("state_constraints", "|q|^2 = 1 and <q,p> = 0 hold exactly");

    let inv = match spectral::invariants(&state, spec) {
        Ok(inv) => {
            h.pass(
                "dual_route_invariants",
                "partial fractions and closed-form residues agree; Lagrange identity holds",
            );
            Some(inv)
        }
        Err(e) => {
            h.fail("dual_route_invariants", e.to_string(), CliError::Other(e.to_string()));
            None
        }
    };

    if let Some(inv) = &inv {
        let sum = inv.sum_f();
        if sum == Rat::one() {
            h.pass("residue_sum", "sum of F_i is exactly 1");
        } else {
            h.fail(
                "residue_sum",
                format!("sum of F_i is {}", rat_str(&sum)),
                CliError::Other("residue sum differs from 1".into()),
            );
        }
    }

    match spectral::energy_identity(&state, spec) {
        Ok((lhs, rhs)) if lhs == rhs => {
            h.pass("energy_identity", format!("H = {}", rat_str(&lhs)));
        }
        Ok((lhs, rhs)) => h.fail(
            "energy_identity",
            format!("H = {} but residues give {}", rat_str(&lhs), rat_str(&rhs)),
            CliError::Other("energy identity failed".into()),
        ),
        Err(e) => h.fail("energy_identity", e.to_string(), CliError::from_core(e)),
    }

    let decomposition = (|| {
        let lax = assemble_lax(&state, spec)?;
        let p = spectral::char_poly(&lax);
        let q = spectral::q_polynomial(&state, spec)?;
        let d = spectral::factor_curve(&p, spec, &q)?;
        Ok::<_, neumann_core::Error>((q, d))
    })();
    match decomposition {
        Ok((q, d)) => {
            h.pass(
                "factorization_identity",
                "characteristic polynomial equals the factored form coefficient by coefficient",
            );
            let bound = spec.k() + spec.r() - 1;
            if q.degree() <= Some(bound) {
                h.pass("q_degree_bound", format!("deg Q = {:?} <= {bound}", q.degree()));
            } else {
                h.fail(
                    "q_degree_bound",
                    format!("deg Q = {:?} exceeds {bound}", q.degree()),
                    CliError::Other("invariant polynomial degree too high".into()),
                );
            }
            match spectral::genus_report(&d, spec) {
                Ok(g) if g.arithmetic_genus == bound && g.geometric_genus <= g.arithmetic_genus => {
                    h.pass(
                        "genus_consistency",
                        format!(
                            "arithmetic genus {} (torus dimension), geometric genus {}",
                            g.arithmetic_genus, g.geometric_genus
                        ),
                    );
                }
                Ok(g) => h.fail(
                    "genus_consistency",
                    format!("arithmetic {} geometric {}", g.arithmetic_genus, g.geometric_genus),
                    CliError::Other("genus bookkeeping inconsistent".into()),
                ),
                Err(e) => h.fail("genus_consistency", e.to_string(), CliError::from_core(e)),
            }
        }
        Err(e) => h.fail("factorization_identity", e.to_string(), CliError::from_core(e)),
    }

    let c = spectral::classify(spec);
    if c.superintegrable == (c.torus_dimension < c.degrees_of_freedom) {
        h.pass(
            "classifier_consistency",
            format!(
                "superintegrable = {} matches torus dimension {} vs n = {}",
                c.superintegrable, c.torus_dimension, c.degrees_of_freedom
            ),
        );
    } else {
        h.fail(
            "classifier_consistency",
            "multiplicity rule and torus dimension disagree",
            CliError::Other("classifier inconsistency".into()),
        );
    }

    let fstate = state.to_f64();
    let order = (|| {
        let coarse = check_form_preservation(&fstate, spec, 1e-3)?;
        let fine = check_form_preservation(&fstate, spec, 5e-4)?;
        Ok::<_, neumann_core::Error>((coarse, fine))
    })();
    match order {
        Ok((coarse, fine)) if coarse.residual <= 1e-12 && fine.residual <= 1e-12 => {
            h.pass("form_preservation_order", "stationary state; residual at roundoff");
        }
        Ok((coarse, fine)) => {
            let ratio = coarse.residual / fine.residual;
            if (3.5..=4.5).contains(&ratio) {
                h.pass(
                    "form_preservation_order",
                    format!("halving h scales the residual by {ratio:.3}"),
                );
            } else {
                h.fail(
                    "form_preservation_order",
                    format!("residual ratio {ratio:.3} outside [3.5, 4.5]"),
                    CliError::Other("matrix-flow consistency check failed".into()),
                );
            }
        }
        Err(e) => h.fail("form_preservation_order", e.to_string(), CliError::from_core(e)),
    }

    let drift = dynamics::integrate(&fstate, spec, cfg.t_final, cfg.h, cfg.stride)
        .and_then(|traj| dynamics::drift_report(&traj, spec));
    match drift {
        Ok(report) => {
            let rel = report.max_relative_drift();
            let constraint = report.max_constraint_drift();
            if rel <= cfg.tol_drift_rel && constraint <= cfg.tol_drift_constraint {
                h.pass(
                    "conservation_drift",
                    format!(
                        "relative drift {rel:.3e}, constraint drift {constraint:.3e} over t = {}",
                        cfg.t_final
                    ),
                );
            } else {
                h.fail(
                    "conservation_drift",
                    format!("relative drift {rel:.3e}, constraint drift {constraint:.3e}"),
                    CliError::Drift("conserved quantities drift beyond tolerance".into()),
                );
            }
        }
        Err(e) => h.fail("conservation_drift", e.to_string(), CliError::from_core(e)),
    }

    Ok(h.finish())
}
