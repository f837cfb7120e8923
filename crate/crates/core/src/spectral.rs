//! Exact spectral algebra: characteristic polynomial, first integrals,
//! factorization of the spectral curve, genus bookkeeping and the
//! superintegrability classifier.
//!
//! The determinant route ([`char_poly`]) and the residue route
//! ([`wa_decomposition`], [`q_polynomial`]) are computed independently and
//! reconciled by [`factor_curve`]: the characteristic polynomial of a Neumann
//! Lax matrix factors, exactly over the rationals, into a power of `λ`, one
//! parabola per repeated eigenvalue and a hyperelliptic part whose numerator
//! is the invariant polynomial `Q(z)`.

use crate::error::{Error, Result};
use crate::laxflow::MatrixPoly2;
use crate::mat::Mat;
use crate::phase::{group_moments, hamiltonian, GroupMoments, PhasePoint, PotentialSpec};
use crate::ratpoly::{partial_fractions, BivarPoly, PartialFraction, UniPoly};
use crate::scalar::{Rat, Scalar};
use num_traits::{One, Zero};

/// First integrals of a state: simple-pole residues `F_i`, double-pole
/// coefficients `K_j²` and the antisymmetric momentum blocks they square.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSet {
    /// One residue per eigenvalue group; they sum to 1.
    pub f: Vec<Rat>,
    /// One total squared angular momentum per group with multiplicity > 1.
    pub ksq: Vec<Rat>,
    /// The `m_j×m_j` antisymmetric blocks, same order as `ksq`.
    pub kblocks: Vec<Mat<Rat>>,
    /// Group indices carrying the `ksq`/`kblocks` entries.
    pub degenerate_groups: Vec<usize>,
}

impl InvariantSet {
    pub fn sum_f(&self) -> Rat {
        self.f.iter().cloned().sum()
    }
}

/// The components of the spectral curve together with the exact data that
/// reconstructs the characteristic polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveDecomposition {
    /// The isolated point `λ = 0, μ = 0`.
    pub point_component: bool,
    /// One parabola `μ = a_jλ²` per eigenvalue with multiplicity > 1.
    pub parabolas: Vec<Rat>,
    /// `Q(z)`, numerator of the hyperelliptic component.
    pub hyper_numerator: UniPoly,
    /// `Π_{m_i=1}(z−a_i) · Π_{m_j>1}(z−a_j)²`.
    pub hyper_denominator: UniPoly,
    /// `Q(z) · Π_{m_i=1}(z−a_i)`, the right side of `w² = …`.
    pub branch_poly: UniPoly,
    /// Power of `λ` split off in front of the factorization (`2n`).
    pub lambda_exponent: usize,
    /// Nontrivial prefactor exponents `(a_i, m_i − 2)` for `m_i > 2`.
    pub prefactor: Vec<(Rat, usize)>,
}

/// Genus bookkeeping for the hyperelliptic component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenusReport {
    /// `k + r − 1`; also the dimension of the generic invariant torus.
    pub arithmetic_genus: usize,
    /// Genus of the desingularized curve, from the squarefree branch degree.
    pub geometric_genus: usize,
    pub torus_dimension: usize,
    /// Eigenvalues where `Q` vanishes, so numerator and denominator share a root.
    pub cancellations: Vec<Rat>,
}

/// Multiplicity-based classification of the system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub superintegrable: bool,
    pub torus_dimension: usize,
    pub degrees_of_freedom: usize,
    pub max_multiplicity: usize,
}

/// Regularity verdict for one momentum block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KRegularity {
    /// Eigenvalue-group index the block belongs to.
    pub group: usize,
    /// True when every eigenvalue of the block is simple.
    pub regular: bool,
}

/// Exact characteristic polynomial `det(μI − L(λ))`, monic in `μ`.
pub fn char_poly<T: Scalar>(lax: &MatrixPoly2<T>) -> BivarPoly<T> {
    let n = lax.dim();
    let entry = |i: usize, j: usize| -> BivarPoly<T> {
        let mut e = BivarPoly::zero();
        if i == j {
            e.add_term(0, 1, T::one());
        }
        e.add_term(2, 0, -lax.coeff2[(i, j)].clone());
        e.add_term(1, 0, -lax.coeff1[(i, j)].clone());
        e.add_term(0, 0, -lax.coeff0[(i, j)].clone());
        e
    };
    let rows: Vec<Vec<BivarPoly<T>>> = (0..n)
        .map(|i| (0..n).map(|j| entry(i, j)).collect())
        .collect();
    det_poly_matrix(&rows)
}

/// Determinant by minor expansion over column subsets.
///
/// Exact for any coefficient ring; fine for the small dimensions here.
fn det_poly_matrix<T: Scalar>(entries: &[Vec<BivarPoly<T>>]) -> BivarPoly<T> {
    let n = entries.len();
    assert!(n <= 20, "determinant dimension out of range");
    if n == 0 {
        return BivarPoly::one();
    }
    let mut minors: Vec<Option<BivarPoly<T>>> = vec![None; 1 << n];
    minors[0] = Some(BivarPoly::one());
    for mask in 1usize..(1 << n) {
        let row = mask.count_ones() as usize - 1;
        let mut acc = BivarPoly::zero();
        let mut position = 0;
        for col in 0..n {
            if mask & (1 << col) == 0 {
                continue;
            }
            let sub = minors[mask ^ (1 << col)]
                .as_ref()
                .expect("minors are filled in mask order");
            let term = entries[row][col].mul(sub);
            if (row + position).is_multiple_of(2) {
                acc = acc.add(&term);
            } else {
                acc = acc.sub(&term);
            }
            position += 1;
        }
        minors[mask] = Some(acc);
    }
    minors[(1 << n) - 1].take().expect("full mask computed")
}

/// Pole orders of the invariant decomposition: 1 for simple eigenvalues,
/// 2 for repeated ones.
fn pole_orders(spec: &PotentialSpec) -> Vec<(Rat, u8)> {
    spec.eigenvalues()
        .iter()
        .zip(spec.multiplicities())
        .map(|(a, &m)| (a.clone(), if m > 1 { 2 } else { 1 }))
        .collect()
}

/// `Q(z)`: the decomposition numerator over the common denominator
/// `Π_{m_i=1}(z−a_i)·Π_{m_j>1}(z−a_j)²`, expanded exactly. Monic of degree
/// `k + r − 1`.
pub fn q_polynomial(state: &PhasePoint<Rat>, spec: &PotentialSpec) -> Result<UniPoly> {
    let m = group_moments(state, spec)?;
    let poles = pole_orders(spec);
    let k = spec.k();

    // Denominator with selected factors removed, built directly from roots so
    // every division is exact by construction.
    let basis = |skip: &dyn Fn(usize) -> usize| -> UniPoly {
        let factors: Vec<(Rat, usize)> = poles
            .iter()
            .enumerate()
            .map(|(l, (a, o))| (a.clone(), *o as usize - skip(l)))
            .collect();
        UniPoly::from_roots(&factors)
    };

    let mut numerator = UniPoly::zero();
    for (i, qq_i) in m.qq.iter().enumerate() {
        if !qq_i.is_zero() {
            let b = basis(&|l| usize::from(l == i));
            numerator = &numerator + &b.scale(qq_i);
        }
    }
    #[allow(clippy::needless_range_loop)] // i and j pair several slices at once
    for i in 0..k {
        for j in i..k {
            let coeff = if i == j {
                m.qq[i].clone() * m.pp[i].clone() - m.qp[i].clone() * m.qp[i].clone()
            } else {
                m.qq[i].clone() * m.pp[j].clone() + m.qq[j].clone() * m.pp[i].clone()
                    - Rat::from_integer(2.into()) * m.qp[i].clone() * m.qp[j].clone()
            };
            if coeff.is_zero() {
                continue;
            }
            if i == j && poles[i].1 == 1 {
                // A one-dimensional group satisfies qq·pp = qp² identically;
                // a nonzero value here would mean the moments are corrupt.
                return Err(Error::InvariantMismatch(
                    "double-pole coefficient at a simple eigenvalue",
                ));
            }
            let b = basis(&|l| usize::from(l == i) + usize::from(l == j));
            numerator = &numerator + &b.scale(&coeff);
        }
    }
    debug_assert!(numerator.degree() <= Some(k + spec.r() - 1));
    Ok(numerator)
}

/// Partial-fraction decomposition of `−λ²Φ_z`: simple coefficients are the
/// residues `F_i`, double coefficients the total squared angular momenta `K_j²`.
pub fn wa_decomposition(state: &PhasePoint<Rat>, spec: &PotentialSpec) -> Result<PartialFraction> {
    let numerator = q_polynomial(state, spec)?;
    partial_fractions(&numerator, &pole_orders(spec))
}

/// Closed-form residues, valid in both scalar instantiations:
/// `F_i = qq_i + Σ_{j≠i}(qq_i·pp_j + qq_j·pp_i − 2·qp_i·qp_j)/(a_i − a_j)`
/// and `K_j² = qq_j·pp_j − qp_j²` per repeated eigenvalue.
pub fn closed_form_invariants<T: Scalar>(
    moments: &GroupMoments<T>,
    spec: &PotentialSpec,
) -> (Vec<T>, Vec<T>) {
    let k = spec.k();
    let a: Vec<T> = spec.eigenvalues().iter().map(T::from_rat).collect();
    let two = T::from_int(2);
    let mut f = Vec::with_capacity(k);
    for i in 0..k {
        let mut fi = moments.qq[i].clone();
        for j in 0..k {
            if j == i {
                continue;
            }
            let numer = moments.qq[i].clone() * moments.pp[j].clone()
                + moments.qq[j].clone() * moments.pp[i].clone()
                - two.clone() * moments.qp[i].clone() * moments.qp[j].clone();
            fi += numer / (a[i].clone() - a[j].clone());
        }
        f.push(fi);
    }
    let ksq = spec
        .degenerate_groups()
        .into_iter()
        .map(|j| {
            moments.qq[j].clone() * moments.pp[j].clone()
                - moments.qp[j].clone() * moments.qp[j].clone()
        })
        .collect();
    (f, ksq)
}

/// Builds the full invariant set, computing the residues along two
/// independent routes (exact partial fractions and closed form) and
/// reconciling them, then attaching the momentum blocks.
pub fn invariants(state: &PhasePoint<Rat>, spec: &PotentialSpec) -> Result<InvariantSet> {
    let pf = wa_decomposition(state, spec)?;
    let moments = group_moments(state, spec)?;
    let (f_closed, ksq_closed) = closed_form_invariants(&moments, spec);

    let f = pf.simple_coeffs();
    if f != f_closed {
        return Err(Error::InvariantMismatch("residues F_i"));
    }
    let ksq = pf.double_coeffs();
    if ksq != ksq_closed {
        return Err(Error::InvariantMismatch("double-pole coefficients K_j^2"));
    }

    let degenerate_groups = spec.degenerate_groups();
    let wedge = Mat::wedge(&state.q, &state.p);
    let mut kblocks = Vec::with_capacity(degenerate_groups.len());
    for (&g, ksq_j) in degenerate_groups.iter().zip(&ksq) {
        let block = wedge.block(spec.group(g));
        // Lagrange identity: K_j² = qq_j·pp_j − qp_j² = ½‖K_j‖_F².
        let half_frob = block.frob_sq() / Rat::from_integer(2.into());
        if half_frob != *ksq_j {
            return Err(Error::InvariantMismatch("Lagrange identity for K_j^2"));
        }
        kblocks.push(block);
    }

    Ok(InvariantSet {
        f,
        ksq,
        kblocks,
        degenerate_groups,
    })
}

/// Both sides of the energy identity `H = ½(Σ a_iF_i + Σ K_j²)`, evaluated
/// independently. They agree exactly on valid states.
pub fn energy_identity(state: &PhasePoint<Rat>, spec: &PotentialSpec) -> Result<(Rat, Rat)> {
    let lhs = hamiltonian(state, spec)?;
    let inv = invariants(state, spec)?;
    let mut acc = Rat::zero();
    for (a, f) in spec.eigenvalues().iter().zip(&inv.f) {
        acc += a.clone() * f.clone();
    }
    for ksq in &inv.ksq {
        acc += ksq.clone();
    }
    let rhs = acc / Rat::from_integer(2.into());
    Ok((lhs, rhs))
}

/// `(μ − aλ²)^power` as a bivariate polynomial.
fn parabola_power(a: &Rat, power: usize) -> BivarPoly<Rat> {
    let base = BivarPoly::from_terms([((0u32, 1u32), Rat::one()), ((2, 0), -a.clone())]);
    let mut acc = BivarPoly::one();
    for _ in 0..power {
        acc = acc.mul(&base);
    }
    acc
}

/// Verifies the exact factorization of the characteristic polynomial and
/// emits the component list of the spectral curve.
///
/// With `z = μ/λ²` and all λ powers cleared, the claimed identity is
/// `det(μI − L) = Π_{m_i>1}(μ−a_iλ²)^{m_i−2} · (Π_i(μ−a_iλ²)^{d_i} + Q̂(λ,μ))`
/// where `d_i` is 1 for simple and 2 for repeated eigenvalues and `Q̂` is the
/// weighted homogenization of `Q(z)`. A mismatch in any coefficient is
/// reported, not repaired.
pub fn factor_curve(
    char_polynomial: &BivarPoly<Rat>,
    spec: &PotentialSpec,
    q_poly: &UniPoly,
) -> Result<CurveDecomposition> {
    let k = spec.k();
    let r = spec.r();
    let degree_bound = k + r - 1;
    if q_poly.degree() > Some(degree_bound) {
        return Err(Error::DegreeTooHigh {
            degree: q_poly.degree().unwrap_or(0),
            bound: degree_bound + 1,
        });
    }

    let mut prefactor_poly = BivarPoly::one();
    let mut inner = BivarPoly::one();
    for (a, &m) in spec.eigenvalues().iter().zip(spec.multiplicities()) {
        if m > 1 {
            prefactor_poly = prefactor_poly.mul(&parabola_power(a, m - 2));
            inner = inner.mul(&parabola_power(a, 2));
        } else {
            inner = inner.mul(&parabola_power(a, 1));
        }
    }
    // Q̂(λ, μ) = Σ_t c_t·μ^t·λ^{2(k+r−1−t)}.
    let mut q_hat = BivarPoly::zero();
    for (t, c) in q_poly.coeffs().iter().enumerate() {
        q_hat.add_term(2 * (degree_bound - t) as u32, t as u32, c.clone());
    }
    let rhs = prefactor_poly.mul(&inner.add(&q_hat));

    let diff = char_polynomial.sub(&rhs);
    if let Some((&(lambda, mu), _)) = diff.terms().next() {
        return Err(Error::FactorizationMismatch { lambda, mu });
    }

    let parabolas: Vec<Rat> = spec
        .degenerate_groups()
        .into_iter()
        .map(|g| spec.eigenvalues()[g].clone())
        .collect();
    let prefactor: Vec<(Rat, usize)> = spec
        .eigenvalues()
        .iter()
        .zip(spec.multiplicities())
        .filter(|(_, &m)| m > 2)
        .map(|(a, &m)| (a.clone(), m - 2))
        .collect();
    let simple_factors: Vec<(Rat, usize)> = spec
        .eigenvalues()
        .iter()
        .zip(spec.multiplicities())
        .filter(|(_, &m)| m == 1)
        .map(|(a, _)| (a.clone(), 1))
        .collect();
    let hyper_denominator = UniPoly::from_roots(
        &pole_orders(spec)
            .into_iter()
            .map(|(a, o)| (a, o as usize))
            .collect::<Vec<_>>(),
    );
    let branch_poly = q_poly * &UniPoly::from_roots(&simple_factors);

    Ok(CurveDecomposition {
        point_component: char_polynomial.coeff(0, 0).is_zero(),
        parabolas,
        hyper_numerator: q_poly.clone(),
        hyper_denominator,
        branch_poly,
        lambda_exponent: 2 * spec.n(),
        prefactor,
    })
}

/// Genus of the hyperelliptic component, before and after desingularization.
pub fn genus_report(d: &CurveDecomposition, spec: &PotentialSpec) -> Result<GenusReport> {
    if d.branch_poly.is_zero() {
        return Err(Error::ZeroBranchPolynomial);
    }
    let arithmetic = spec.k() + spec.r() - 1;
    let squarefree = d.branch_poly.squarefree_part()?;
    let d_sf = squarefree.degree().unwrap_or(0);
    let geometric = d_sf.saturating_sub(1) / 2;
    let cancellations = spec
        .eigenvalues()
        .iter()
        .filter(|a| d.hyper_numerator.eval(a).is_zero())
        .cloned()
        .collect();
    Ok(GenusReport {
        arithmetic_genus: arithmetic,
        geometric_genus: geometric,
        torus_dimension: arithmetic,
        cancellations,
    })
}

/// Superintegrability from the multiplicity pattern alone: some `m_j ≥ 3`,
/// equivalently torus dimension `k + r − 1 < n`.
pub fn classify(spec: &PotentialSpec) -> Classification {
    let torus_dimension = spec.k() + spec.r() - 1;
    let max_multiplicity = spec.max_multiplicity();
    let superintegrable = max_multiplicity >= 3;
    debug_assert_eq!(superintegrable, torus_dimension < spec.n());
    Classification {
        superintegrable,
        torus_dimension,
        degrees_of_freedom: spec.n(),
        max_multiplicity,
    }
}

/// Exact characteristic polynomial of a square rational matrix, monic.
fn matrix_char_poly(m: &Mat<Rat>) -> UniPoly {
    // Faddeev–LeVerrier recursion.
    let n = m.rows();
    let mut coeffs = vec![Rat::zero(); n + 1];
    coeffs[n] = Rat::one();
    let mut aux = Mat::<Rat>::identity(n);
    for step in 1..=n {
        aux = m.matmul(&aux);
        let c = -aux.trace() / Rat::from_integer((step as i64).into());
        coeffs[n - step] = c.clone();
        for i in 0..n {
            aux[(i, i)] += c.clone();
        }
    }
    UniPoly::new(coeffs)
}

/// Regularity of each momentum block: an antisymmetric block is normal, so
/// every eigenvalue is simple exactly when its characteristic polynomial is
/// squarefree. Rotation-rate collisions and zero eigenspaces of dimension
/// ≥ 2 both fail the test.
pub fn k_regularity(inv: &InvariantSet) -> Vec<KRegularity> {
    inv.degenerate_groups
        .iter()
        .zip(&inv.kblocks)
        .map(|(&group, block)| {
            let p = matrix_char_poly(block);
            let g = UniPoly::gcd(&p, &p.derivative());
            KRegularity {
                group,
                regular: g.degree() == Some(0),
            }
        })
        .collect()
}
