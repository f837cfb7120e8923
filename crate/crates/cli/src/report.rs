//! Machine-readable reports: JSON structures and the trajectory CSV.
//!
//! Rationals serialize as strings like `"7/12"` (integers as `"7"`), so no
//! precision is lost; floats are written losslessly (shortest round-trip in
//! JSON, 17 significant digits in CSV).

use neumann_core::dynamics::{DriftEntry, DriftReport, Trajectory};
use neumann_core::mat::Mat;
use neumann_core::phase::{group_moments, hamiltonian, PotentialSpec};
use neumann_core::ratpoly::{BivarPoly, UniPoly};
use neumann_core::spectral::{
    classify, closed_form_invariants, Classification, CurveDecomposition, GenusReport,
    InvariantSet, KRegularity,
};
use neumann_core::Rat;
use num_traits::One;
use serde::Serialize;

pub fn rat_str(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn rat_vec(v: &[Rat]) -> Vec<String> {
    v.iter().map(rat_str).collect()
}

fn poly_coeffs(p: &UniPoly) -> Vec<String> {
    p.coeffs().iter().map(rat_str).collect()
}

fn mat_strings(m: &Mat<Rat>) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| rat_str(&m[(i, j)])).collect())
        .collect()
}

#[derive(Serialize)]
pub struct ClassifyReport {
    pub superintegrable: bool,
    pub torus_dimension: usize,
    pub degrees_of_freedom: usize,
    pub max_multiplicity: usize,
}

impl From<Classification> for ClassifyReport {
    fn from(c: Classification) -> Self {
        ClassifyReport {
            superintegrable: c.superintegrable,
            torus_dimension: c.torus_dimension,
            degrees_of_freedom: c.degrees_of_freedom,
            max_multiplicity: c.max_multiplicity,
        }
    }
}

#[derive(Serialize)]
pub struct RegularityReport {
    pub group: usize,
    pub regular: bool,
}

#[derive(Serialize)]
pub struct EnergyReport<T: Serialize> {
    pub lhs: T,
    pub rhs: T,
    pub equal: bool,
}

#[derive(Serialize)]
pub struct InvariantsReport {
    pub mode: &'static str,
    pub f: Vec<String>,
    pub sum_f: String,
    pub ksq: Vec<String>,
    pub kblocks: Vec<Vec<Vec<String>>>,
    pub k_regularity: Vec<RegularityReport>,
    pub energy: EnergyReport<String>,
}

impl InvariantsReport {
    pub fn exact(inv: &InvariantSet, reg: &[KRegularity], lhs: &Rat, rhs: &Rat) -> Self {
        InvariantsReport {
            mode: "exact",
            f: rat_vec(&inv.f),
            sum_f: rat_str(&inv.sum_f()),
            ksq: rat_vec(&inv.ksq),
            kblocks: inv.kblocks.iter().map(mat_strings).collect(),
            k_regularity: reg
                .iter()
                .map(|r| RegularityReport {
                    group: r.group + 1,
                    regular: r.regular,
                })
                .collect(),
            energy: EnergyReport {
                lhs: rat_str(lhs),
                rhs: rat_str(rhs),
                equal: lhs == rhs,
            },
        }
    }
}

#[derive(Serialize)]
pub struct FloatInvariantsReport {
    pub mode: &'static str,
    pub f: Vec<f64>,
    pub sum_f: f64,
    pub ksq: Vec<f64>,
    pub energy: EnergyReport<f64>,
}

#[derive(Serialize)]
pub struct CharPolyTerm {
    pub lambda: u32,
    pub mu: u32,
    pub coeff: String,
}

#[derive(Serialize)]
pub struct PrefactorTerm {
    pub eigenvalue: String,
    pub power: usize,
}

#[derive(Serialize)]
pub struct ComponentsReport {
    pub point: bool,
    pub parabolas: Vec<String>,
    pub hyper_numerator: Vec<String>,
    pub hyper_denominator: Vec<String>,
    pub branch_poly: Vec<String>,
    pub lambda_exponent: usize,
    pub prefactor: Vec<PrefactorTerm>,
}

#[derive(Serialize)]
pub struct GenusJson {
    pub arithmetic_genus: usize,
    pub geometric_genus: usize,
    pub torus_dimension: usize,
    pub cancellations: Vec<String>,
}

#[derive(Serialize)]
pub struct SpectralReport {
    pub char_poly: Vec<CharPolyTerm>,
    pub q_poly: Vec<String>,
    pub components: ComponentsReport,
    pub genus: GenusJson,
    pub identity_verified: bool,
}

impl SpectralReport {
    pub fn new(p: &BivarPoly<Rat>, d: &CurveDecomposition, g: &GenusReport) -> Self {
        SpectralReport {
            char_poly: p
                .terms()
                .map(|(&(lambda, mu), c)| CharPolyTerm {
                    lambda,
                    mu,
                    coeff: rat_str(c),
                })
                .collect(),
            q_poly: poly_coeffs(&d.hyper_numerator),
            components: ComponentsReport {
                point: d.point_component,
                parabolas: rat_vec(&d.parabolas),
                hyper_numerator: poly_coeffs(&d.hyper_numerator),
                hyper_denominator: poly_coeffs(&d.hyper_denominator),
                branch_poly: poly_coeffs(&d.branch_poly),
                lambda_exponent: d.lambda_exponent,
                prefactor: d
                    .prefactor
                    .iter()
                    .map(|(a, power)| PrefactorTerm {
                        eigenvalue: rat_str(a),
                        power: *power,
                    })
                    .collect(),
            },
            genus: GenusJson {
                arithmetic_genus: g.arithmetic_genus,
                geometric_genus: g.geometric_genus,
                torus_dimension: g.torus_dimension,
                cancellations: rat_vec(&g.cancellations),
            },
            identity_verified: true,
        }
    }
}

#[derive(Serialize)]
pub struct DriftEntryJson {
    pub name: String,
    pub initial: f64,
    pub max_abs: f64,
    pub max_rel: f64,
}

impl From<&DriftEntry> for DriftEntryJson {
    fn from(e: &DriftEntry) -> Self {
        DriftEntryJson {
            name: e.name.clone(),
            initial: e.initial,
            max_abs: e.max_abs,
            max_rel: e.max_rel,
        }
    }
}

#[derive(Serialize)]
pub struct ToleranceJson {
    pub drift_rel: f64,
    pub drift_constraint: f64,
}

#[derive(Serialize)]
pub struct SimulateReport {
    pub scheme: &'static str,
    pub t_final: f64,
    pub h: f64,
    pub stride: usize,
    pub samples: usize,
    pub constraint_norm: f64,
    pub constraint_tangency: f64,
    pub entries: Vec<DriftEntryJson>,
    pub probe: DriftEntryJson,
    pub tolerances: ToleranceJson,
    pub within_tolerance: bool,
}

impl SimulateReport {
    pub fn new(
        traj: &Trajectory,
        report: &DriftReport,
        t_final: f64,
        stride: usize,
        tol_rel: f64,
        tol_constraint: f64,
    ) -> Self {
        SimulateReport {
            scheme: traj.scheme,
            t_final,
            h: traj.step,
            stride,
            samples: traj.times.len(),
            constraint_norm: report.constraint_norm,
            constraint_tangency: report.constraint_tangency,
            entries: report.entries.iter().map(Into::into).collect(),
            probe: (&report.probe).into(),
            tolerances: ToleranceJson {
                drift_rel: tol_rel,
                drift_constraint: tol_constraint,
            },
            within_tolerance: report.max_relative_drift() <= tol_rel
                && report.max_constraint_drift() <= tol_constraint,
        }
    }
}

#[derive(Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// Float invariants evaluated with the closed-form residue formulas.
pub fn float_invariants(
    state: &neumann_core::phase::PhasePoint<f64>,
    spec: &PotentialSpec,
) -> Result<FloatInvariantsReport, neumann_core::Error> {
    let moments = group_moments(state, spec)?;
    let (f, ksq) = closed_form_invariants(&moments, spec);
    let lhs = hamiltonian(state, spec)?;
    let mut rhs = 0.0;
    for (a, fi) in spec.eigenvalues().iter().zip(&f) {
        rhs += neumann_core::Scalar::to_f64(a) * fi;
    }
    for k in &ksq {
        rhs += k;
    }
    rhs *= 0.5;
    let sum_f = f.iter().sum();
    Ok(FloatInvariantsReport {
        mode: "float",
        f,
        sum_f,
        ksq,
        energy: EnergyReport {
            lhs,
            rhs,
            equal: (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0),
        },
    })
}

/// Writes the trajectory as RFC-4180 CSV with the fixed column order
/// `t, q_1.., p_1.., H, F_1.., Ksq_1..`.
pub fn write_trajectory_csv(
    path: &std::path::Path,
    traj: &Trajectory,
    spec: &PotentialSpec,
) -> Result<(), String> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(path)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    let dim = spec.dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=dim).map(|i| format!("q_{i}")));
    header.extend((1..=dim).map(|i| format!("p_{i}")));
    header.push("H".to_string());
    header.extend((1..=spec.k()).map(|i| format!("F_{i}")));
    header.extend((1..=spec.degenerate_groups().len()).map(|j| format!("Ksq_{j}")));
    writer.write_record(&header).map_err(|e| e.to_string())?;

    let fmt = |x: f64| format!("{x:.16e}");
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![fmt(*t)];
        row.extend(state.q.iter().map(|&x| fmt(x)));
        row.extend(state.p.iter().map(|&x| fmt(x)));
        let h = hamiltonian(state, spec).map_err(|e| e.to_string())?;
        row.push(fmt(h));
        let moments = group_moments(state, spec).map_err(|e| e.to_string())?;
        let (f, ksq) = closed_form_invariants(&moments, spec);
        row.extend(f.iter().map(|&x| fmt(x)));
        row.extend(ksq.iter().map(|&x| fmt(x)));
        writer.write_record(&row).map_err(|e| e.to_string())?;
    }
    writer.flush().map_err(|e| e.to_string())
}

pub fn classification_report(spec: &PotentialSpec) -> ClassifyReport {
    classify(spec).into()
}
