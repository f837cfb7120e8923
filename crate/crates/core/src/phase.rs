//! Phase-space model: the potential with its eigenvalue groups and validated
//! points of `T*S^n`.
//!
//! States live in ambient coordinates `(q, p) ∈ R^{n+1} × R^{n+1}` subject to
//! `⟨q,q⟩ = 1` and `⟨q,p⟩ = 0`. Construction validates; nothing projects
//! silently except [`project_to_manifold`], which exists for the integrator
//! and for random sampling.

use crate::error::{Error, Result};
use crate::scalar::{Rat, Scalar};
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::ops::Range;

/// Default tolerance for the float constraint check; the exact path requires
/// exact equality regardless.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Diagonal potential with `k ≥ 2` distinct eigenvalues and their
/// multiplicities, sorted ascending; coordinate indices are grouped
/// contiguously per eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    eigenvalues: Vec<Rat>,
    multiplicities: Vec<usize>,
    groups: Vec<Range<usize>>,
}

impl PotentialSpec {
    /// Validates and sorts the eigenvalue/multiplicity lists.
    pub fn new(values: Vec<Rat>, mults: Vec<usize>) -> Result<Self> {
        if values.len() != mults.len() {
            return Err(Error::LengthMismatch {
                values: values.len(),
                mults: mults.len(),
            });
        }
        if values.len() < 2 {
            return Err(Error::EmptySpec);
        }
        for v in &values {
            if !v.is_positive() {
                return Err(Error::NonpositiveEigenvalue(v.to_string()));
            }
        }
        for (i, v) in values.iter().enumerate() {
            if values[i + 1..].contains(v) {
                return Err(Error::DuplicateEigenvalue);
            }
        }
        if mults.contains(&0) {
            return Err(Error::EmptySpec);
        }
        let mut pairs: Vec<(Rat, usize)> = values.into_iter().zip(mults).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut groups = Vec::with_capacity(pairs.len());
        let mut start = 0;
        for (_, m) in &pairs {
            groups.push(start..start + m);
            start += m;
        }
        let (eigenvalues, multiplicities) = pairs.into_iter().unzip();
        Ok(PotentialSpec {
            eigenvalues,
            multiplicities,
            groups,
        })
    }

    /// Convenience constructor from small integers.
    pub fn from_ints(values: &[i64], mults: &[usize]) -> Result<Self> {
        Self::new(
            values.iter().map(|&v| Rat::from_integer(v.into())).collect(),
            mults.to_vec(),
        )
    }

    /// Number of distinct eigenvalues.
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of eigenvalues with multiplicity greater than one.
    pub fn r(&self) -> usize {
        self.multiplicities.iter().filter(|&&m| m > 1).count()
    }

    /// Degrees of freedom `n`; the sphere is `S^n ⊂ R^{n+1}`.
    pub fn n(&self) -> usize {
        self.dim() - 1
    }

    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn eigenvalues(&self) -> &[Rat] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn max_multiplicity(&self) -> usize {
        *self.multiplicities.iter().max().expect("k >= 2")
    }

    /// Coordinate index range of group `i`.
    pub fn group(&self, i: usize) -> Range<usize> {
        self.groups[i].clone()
    }

    /// Indices of groups with multiplicity `> 1`, ascending in eigenvalue.
    pub fn degenerate_groups(&self) -> Vec<usize> {
        (0..self.k()).filter(|&i| self.multiplicities[i] > 1).collect()
    }

    /// The diagonal of `A` expanded to length `n+1`.
    pub fn diagonal<T: Scalar>(&self) -> Vec<T> {
        let mut d = Vec::with_capacity(self.dim());
        for (a, m) in self.eigenvalues.iter().zip(&self.multiplicities) {
            for _ in 0..*m {
                d.push(T::from_rat(a));
            }
        }
        d
    }
}

/// A validated point of `T*S^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint<T> {
    pub q: Vec<T>,
    pub p: Vec<T>,
}

impl<T: Scalar> PhasePoint<T> {
    /// Validates the two constraints; does not project.
    pub fn new(q: Vec<T>, p: Vec<T>, tol: f64) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                got: p.len(),
            });
        }
        let norm_defect = dot(&q, &q) - T::one();
        if !norm_defect.within(tol) {
            return Err(Error::ConstraintViolation {
                constraint: "|q|^2 = 1",
                magnitude: norm_defect.to_f64(),
            });
        }
        let tangency = dot(&q, &p);
        if !tangency.within(tol) {
            return Err(Error::ConstraintViolation {
                constraint: "<q,p> = 0",
                magnitude: tangency.to_f64(),
            });
        }
        Ok(PhasePoint { q, p })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn to_f64(&self) -> PhasePoint<f64> {
        PhasePoint {
            q: self.q.iter().map(Scalar::to_f64).collect(),
            p: self.p.iter().map(Scalar::to_f64).collect(),
        }
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s += x.clone() * y.clone();
    }
    s
}

/// Per-group bilinear moments `(‖q‖_i², ⟨q,p⟩_i, ‖p‖_i²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMoments<T> {
    pub qq: Vec<T>,
    pub qp: Vec<T>,
    pub pp: Vec<T>,
}

fn check_dim<T>(state: &PhasePoint<T>, spec: &PotentialSpec) -> Result<()> {
    if state.q.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: state.q.len(),
        });
    }
    Ok(())
}

/// `H = ½⟨p,p⟩ + ½⟨Aq,q⟩`.
pub fn hamiltonian<T: Scalar>(state: &PhasePoint<T>, spec: &PotentialSpec) -> Result<T> {
    check_dim(state, spec)?;
    let a = spec.diagonal::<T>();
    let mut aqq = T::zero();
    for (ai, qi) in a.iter().zip(&state.q) {
        aqq += ai.clone() * qi.clone() * qi.clone();
    }
    let half = T::from_rat(&Rat::new(1.into(), 2.into()));
    Ok(half.clone() * dot(&state.p, &state.p) + half * aqq)
}

/// Constrained equations of motion: `dq = p`, `dp = −Aq + εq` with the unique
/// multiplier `ε = ⟨Aq,q⟩ − ⟨p,p⟩` that keeps the flow tangent to `T*S^n`.
pub fn vector_field<T: Scalar>(
    state: &PhasePoint<T>,
    spec: &PotentialSpec,
) -> Result<(Vec<T>, Vec<T>)> {
    check_dim(state, spec)?;
    let a = spec.diagonal::<T>();
    let aq: Vec<T> = a.iter().zip(&state.q).map(|(ai, qi)| ai.clone() * qi.clone()).collect();
    let eps = dot(&aq, &state.q) - dot(&state.p, &state.p);
    let dq = state.p.clone();
    let dp = state
        .q
        .iter()
        .zip(&aq)
        .map(|(qi, aqi)| eps.clone() * qi.clone() - aqi.clone())
        .collect();
    Ok((dq, dp))
}

/// Exact per-group sums of `q_j²`, `q_j p_j`, `p_j²`.
pub fn group_moments<T: Scalar>(
    state: &PhasePoint<T>,
    spec: &PotentialSpec,
) -> Result<GroupMoments<T>> {
    check_dim(state, spec)?;
    let k = spec.k();
    let mut m = GroupMoments {
        qq: vec![T::zero(); k],
        qp: vec![T::zero(); k],
        pp: vec![T::zero(); k],
    };
    for i in 0..k {
        for j in spec.group(i) {
            m.qq[i] += state.q[j].clone() * state.q[j].clone();
            m.qp[i] += state.q[j].clone() * state.p[j].clone();
            m.pp[i] += state.p[j].clone() * state.p[j].clone();
        }
    }
    Ok(m)
}

/// Normalizes `q` and removes the radial component of `p`.
pub fn project_to_manifold(q: &[f64], p: &[f64]) -> Result<PhasePoint<f64>> {
    if q.len() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            got: p.len(),
        });
    }
    let norm = dot(q, q).sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroPosition);
    }
    let q_hat: Vec<f64> = q.iter().map(|x| x / norm).collect();
    let radial = dot(p, &q_hat);
    let p_tan: Vec<f64> = p.iter().zip(&q_hat).map(|(pi, qi)| pi - radial * qi).collect();
    PhasePoint::new(q_hat, p_tan, 1e-12)
}

/// Deterministic random state: `q` uniform on the sphere via normalized
/// Gaussians, `p` Gaussian projected to the tangent space.
pub fn random_state(spec: &PotentialSpec, seed: u64) -> PhasePoint<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = spec.dim();
    loop {
        let q: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let p: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(state) = project_to_manifold(&q, &p) {
            return state;
        }
    }
}

/// Deterministic random state with exact rational coordinates.
///
/// `q` comes from the rational parametrization of the sphere
/// `u ↦ (2u, |u|²−1)/(|u|²+1)` at an integer point `u`, and `p` is an integer
/// vector projected exactly to the tangent space. Both constraints hold as
/// identities over the rationals.
pub fn random_rational_state(spec: &PotentialSpec, seed: u64) -> PhasePoint<Rat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = spec.dim();
    let u: Vec<Rat> = (0..dim - 1)
        .map(|_| Rat::from_integer(rng.gen_range(-9i64..=9).into()))
        .collect();
    let s = dot(&u, &u);
    let denom = s.clone() + Rat::one();
    let two = Rat::from_integer(2.into());
    let mut q: Vec<Rat> = u.iter().map(|ui| two.clone() * ui.clone() / denom.clone()).collect();
    q.push((s - Rat::one()) / denom);
    let w: Vec<Rat> = (0..dim)
        .map(|_| Rat::from_integer(rng.gen_range(-9i64..=9).into()))
        .collect();
    let radial = dot(&w, &q);
    let p: Vec<Rat> = w
        .iter()
        .zip(&q)
        .map(|(wi, qi)| wi.clone() - radial.clone() * qi.clone())
        .collect();
    PhasePoint::new(q, p, 0.0).expect("rational parametrization satisfies the constraints exactly")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_traits::Zero;
    use rand::seq::SliceRandom;

    fn e1_spec() -> PotentialSpec {
        PotentialSpec::from_ints(&[1, 2], &[2, 1]).unwrap()
    }

    fn e3_spec() -> PotentialSpec {
        PotentialSpec::from_ints(&[1, 4], &[3, 1]).unwrap()
    }

    fn rvec(entries: &[(i64, i64)]) -> Vec<Rat> {
        entries.iter().map(|&(n, d)| rat(n, d)).collect()
    }

    pub(crate) fn e1_state() -> PhasePoint<Rat> {
        PhasePoint::new(
            rvec(&[(1, 1), (0, 1), (0, 1)]),
            rvec(&[(0, 1), (1, 1), (0, 1)]),
            0.0,
        )
        .unwrap()
    }

    fn e3_state() -> PhasePoint<Rat> {
        PhasePoint::new(
            rvec(&[(1, 2), (1, 2), (1, 2), (1, 2)]),
            rvec(&[(1, 2), (-1, 2), (1, 2), (-1, 2)]),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn potential_sorts_and_counts() {
        let spec = e1_spec();
        assert_eq!((spec.k(), spec.r(), spec.n()), (2, 1, 2));
        assert_eq!(spec.group(0), 0..2);
        assert_eq!(spec.group(1), 2..3);

        let spec = PotentialSpec::from_ints(&[1, 4], &[3, 1]).unwrap();
        assert_eq!((spec.k(), spec.r(), spec.n()), (2, 1, 3));

        // Sorting convention: (2,1) with unit multiplicities → a = (1,2).
        let spec = PotentialSpec::from_ints(&[2, 1], &[1, 1]).unwrap();
        assert_eq!(spec.eigenvalues(), &[rat(1, 1), rat(2, 1)]);
        assert_eq!((spec.k(), spec.r(), spec.n()), (2, 0, 1));
    }

    #[test]
    fn potential_rejects_bad_input() {
        assert_eq!(
            PotentialSpec::from_ints(&[1, 1], &[1, 1]),
            Err(Error::DuplicateEigenvalue)
        );
        assert!(matches!(
            PotentialSpec::from_ints(&[0, 1], &[1, 1]),
            Err(Error::NonpositiveEigenvalue(_))
        ));
        assert_eq!(PotentialSpec::from_ints(&[1], &[3]), Err(Error::EmptySpec));
        assert_eq!(
            PotentialSpec::from_ints(&[1, 2], &[1]),
            Err(Error::LengthMismatch { values: 2, mults: 1 })
        );
    }

    #[test]
    fn state_validation_rejects_non_tangent_momentum() {
        let err = PhasePoint::new(
            rvec(&[(1, 1), (0, 1), (0, 1)]),
            rvec(&[(1, 1), (0, 1), (0, 1)]),
            0.0,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::ConstraintViolation { constraint: "<q,p> = 0", .. }
        ));
    }

    #[test]
    fn half_vectors_make_a_valid_state() {
        e3_state();
    }

    #[test]
    fn projection_examples() {
        let s = project_to_manifold(&[2.0, 0.0, 0.0], &[3.0, 1.0, 0.0]).unwrap();
        assert_eq!(s.q, vec![1.0, 0.0, 0.0]);
        assert_eq!(s.p, vec![0.0, 1.0, 0.0]);

        // Idempotence on already-valid data.
        let s2 = project_to_manifold(&s.q, &s.p).unwrap();
        assert_eq!(s2, s);

        // Gram–Schmidt by hand: q = (1,1,0), p = (1,0,0).
        let s3 = project_to_manifold(&[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        let h = 0.5f64.sqrt();
        assert!((s3.q[0] - h).abs() < 1e-15 && (s3.q[1] - h).abs() < 1e-15);
        assert!((s3.p[0] - 0.5).abs() < 1e-15 && (s3.p[1] + 0.5).abs() < 1e-15);

        assert_eq!(
            project_to_manifold(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::ZeroPosition)
        );
    }

    #[test]
    fn hamiltonian_worked_values() {
        assert_eq!(hamiltonian(&e1_state(), &e1_spec()).unwrap(), rat(1, 1));
        let rest = PhasePoint::new(
            rvec(&[(0, 1), (0, 1), (1, 1)]),
            rvec(&[(0, 1), (0, 1), (0, 1)]),
            0.0,
        )
        .unwrap();
        assert_eq!(hamiltonian(&rest, &e1_spec()).unwrap(), rat(1, 1));
        assert_eq!(hamiltonian(&e3_state(), &e3_spec()).unwrap(), rat(11, 8));
    }

    #[test]
    fn vector_field_worked_values() {
        // Eigenvector equilibrium.
        let spec = PotentialSpec::from_ints(&[1, 2], &[1, 1]).unwrap();
        let eq = PhasePoint::new(rvec(&[(1, 1), (0, 1)]), rvec(&[(0, 1), (0, 1)]), 0.0).unwrap();
        let (dq, dp) = vector_field(&eq, &spec).unwrap();
        assert!(dq.iter().all(Zero::is_zero) && dp.iter().all(Zero::is_zero));

        let (dq, dp) = vector_field(&e1_state(), &e1_spec()).unwrap();
        assert_eq!(dq, rvec(&[(0, 1), (1, 1), (0, 1)]));
        assert_eq!(dp, rvec(&[(-1, 1), (0, 1), (0, 1)]));

        let (_, dp) = vector_field(&e3_state(), &e3_spec()).unwrap();
        assert_eq!(dp, rvec(&[(-1, 8), (-1, 8), (-1, 8), (-13, 8)]));
    }

    #[test]
    fn basis_vectors_at_rest_are_equilibria() {
        let spec = e3_spec();
        for j in 0..spec.dim() {
            for sign in [1, -1] {
                let mut q = vec![rat(0, 1); spec.dim()];
                q[j] = rat(sign, 1);
                let state = PhasePoint::new(q, vec![rat(0, 1); spec.dim()], 0.0).unwrap();
                let (dq, dp) = vector_field(&state, &spec).unwrap();
                assert!(dq.iter().all(Zero::is_zero));
                assert!(dp.iter().all(Zero::is_zero));
            }
        }
    }

    #[test]
    fn tangency_identities_hold_exactly() {
        // d/dt⟨q,p⟩ = |p|² + ⟨q,dp⟩ must vanish identically.
        for seed in 0..20 {
            let state = random_rational_state(&e3_spec(), seed);
            let (dq, dp) = vector_field(&state, &e3_spec()).unwrap();
            assert_eq!(dot(&state.q, &dq), dot(&state.q, &state.p));
            let defect = dot(&state.p, &state.p) + dot(&state.q, &dp);
            assert!(defect.is_zero());
        }
        // Binary64 mirror of the same identity.
        for seed in 0..20 {
            let state = random_state(&e3_spec(), seed);
            let (_, dp) = vector_field(&state, &e3_spec()).unwrap();
            let defect = dot(&state.p, &state.p) + dot(&state.q, &dp);
            assert!(defect.abs() <= 1e-12);
        }
    }

    #[test]
    fn group_moments_worked_values() {
        let m = group_moments(&e1_state(), &e1_spec()).unwrap();
        assert_eq!((m.qq[0].clone(), m.qp[0].clone(), m.pp[0].clone()), (rat(1, 1), rat(0, 1), rat(1, 1)));
        assert_eq!((m.qq[1].clone(), m.qp[1].clone(), m.pp[1].clone()), (rat(0, 1), rat(0, 1), rat(0, 1)));

        let rest = PhasePoint::new(
            rvec(&[(0, 1), (0, 1), (1, 1)]),
            rvec(&[(0, 1), (0, 1), (0, 1)]),
            0.0,
        )
        .unwrap();
        let m = group_moments(&rest, &e1_spec()).unwrap();
        assert_eq!(m.qq, vec![rat(0, 1), rat(1, 1)]);

        let m = group_moments(&e3_state(), &e3_spec()).unwrap();
        assert_eq!(m.qq, vec![rat(3, 4), rat(1, 4)]);
        assert_eq!(m.qp, vec![rat(1, 4), rat(-1, 4)]);
        assert_eq!(m.pp, vec![rat(3, 4), rat(1, 4)]);
    }

    #[test]
    fn moment_sums_and_cauchy_schwarz() {
        for seed in 0..30 {
            let spec = e3_spec();
            let state = random_rational_state(&spec, seed);
            let m = group_moments(&state, &spec).unwrap();
            let total_qq: Rat = m.qq.iter().cloned().sum();
            let total_qp: Rat = m.qp.iter().cloned().sum();
            assert_eq!(total_qq, Rat::one());
            assert!(total_qp.is_zero());
            for i in 0..spec.k() {
                assert!(m.qp[i].clone() * m.qp[i].clone() <= m.qq[i].clone() * m.pp[i].clone());
            }
        }
    }

    #[test]
    fn hamiltonian_invariant_under_in_group_permutation() {
        let spec = e3_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..10 {
            let state = random_rational_state(&spec, seed);
            let h = hamiltonian(&state, &spec).unwrap();
            let mut idx: Vec<usize> = spec.group(0).collect();
            idx.shuffle(&mut rng);
            let mut q = state.q.clone();
            let mut p = state.p.clone();
            for (slot, &src) in spec.group(0).zip(&idx) {
                q[slot] = state.q[src].clone();
                p[slot] = state.p[src].clone();
            }
            let permuted = PhasePoint::new(q, p, 0.0).unwrap();
            assert_eq!(hamiltonian(&permuted, &spec).unwrap(), h);
        }
    }

    #[test]
    fn random_state_is_deterministic_and_on_manifold() {
        let spec = e1_spec();
        let a = random_state(&spec, 42);
        let b = random_state(&spec, 42);
        assert_eq!(a, b);
        for seed in 0..50 {
            let s = random_state(&spec, seed);
            assert!((dot(&s.q, &s.q) - 1.0).abs() <= 1e-14);
            assert!(dot(&s.q, &s.p).abs() <= 1e-14);
        }
    }

    #[test]
    fn random_state_mean_is_near_zero() {
        let spec = e1_spec();
        let dim = spec.dim();
        let mut mean = vec![0.0; dim];
        let count = 1000;
        for seed in 1..=count {
            let s = random_state(&spec, seed);
            for (m, qi) in mean.iter_mut().zip(&s.q) {
                *m += qi / count as f64;
            }
        }
        for m in mean {
            assert!(m.abs() < 0.1, "coordinate mean {m} too far from 0");
        }
    }
}
