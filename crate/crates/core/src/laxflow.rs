//! Matrix-polynomial representation of the flow.
//!
//! A phase point maps to the degree-2 matrix polynomial
//! `L(λ) = λ²A + λ(q∧p) − q⊗q`; the flow satisfies `dL/dt = [L, M]` with
//! `M(λ) = λA + q∧p`, and the commutator collapses to degree one, so the
//! special form is preserved in time. [`check_form_preservation`] measures
//! that statement numerically.

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::phase::{vector_field, PhasePoint, PotentialSpec};
use crate::scalar::Scalar;

/// Degree-2 matrix polynomial `coeff2·λ² + coeff1·λ + coeff0`.
///
/// For a Neumann state the coefficients are the diagonal potential, the
/// antisymmetric wedge `q∧p` and the symmetric rank-one `−q⊗q`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPoly2<T> {
    pub coeff2: Mat<T>,
    pub coeff1: Mat<T>,
    pub coeff0: Mat<T>,
}

impl<T: Scalar> MatrixPoly2<T> {
    pub fn dim(&self) -> usize {
        self.coeff2.rows()
    }

    pub fn eval(&self, lambda: &T) -> Mat<T> {
        let l2 = lambda.clone() * lambda.clone();
        self.coeff2
            .scale(&l2)
            .add(&self.coeff1.scale(lambda))
            .add(&self.coeff0)
    }

    /// Frobenius distance between coefficient triples.
    pub fn distance(&self, other: &Self) -> f64 {
        let d2 = self.coeff2.sub(&other.coeff2).frob_sq().to_f64();
        let d1 = self.coeff1.sub(&other.coeff1).frob_sq().to_f64();
        let d0 = self.coeff0.sub(&other.coeff0).frob_sq().to_f64();
        (d2 + d1 + d0).sqrt()
    }

    pub fn norm(&self) -> f64 {
        let s = self.coeff2.frob_sq().to_f64()
            + self.coeff1.frob_sq().to_f64()
            + self.coeff0.frob_sq().to_f64();
        s.sqrt()
    }
}

/// Degree-1 matrix polynomial `coeff1·λ + coeff0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPoly1<T> {
    pub coeff1: Mat<T>,
    pub coeff0: Mat<T>,
}

impl<T: Scalar> MatrixPoly1<T> {
    pub fn eval(&self, lambda: &T) -> Mat<T> {
        self.coeff1.scale(lambda).add(&self.coeff0)
    }
}

/// `L(λ) = λ²A + λ(q∧p) − q⊗q` for a validated state.
pub fn assemble_lax<T: Scalar>(
    state: &PhasePoint<T>,
    spec: &PotentialSpec,
) -> Result<MatrixPoly2<T>> {
    if state.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: state.dim(),
        });
    }
    Ok(MatrixPoly2 {
        coeff2: Mat::diagonal(&spec.diagonal::<T>()),
        coeff1: Mat::wedge(&state.q, &state.p),
        coeff0: Mat::outer(&state.q, &state.q).neg(),
    })
}

/// The polynomial part `(λ⁻¹L(λ))₊ = λ·coeff2 + coeff1`.
pub fn plus_part<T: Scalar>(lax: &MatrixPoly2<T>) -> MatrixPoly1<T> {
    MatrixPoly1 {
        coeff1: lax.coeff2.clone(),
        coeff0: lax.coeff1.clone(),
    }
}

/// Commutator `[L(λ), (λ⁻¹L(λ))₊]`, expanded by powers of `λ`.
///
/// The λ³ and λ² coefficients must vanish for matrices of the Neumann form;
/// they are computed and checked rather than assumed.
pub fn lax_rhs<T: Scalar>(lax: &MatrixPoly2<T>) -> Result<MatrixPoly2<T>> {
    let m = plus_part(lax);
    let l = [&lax.coeff0, &lax.coeff1, &lax.coeff2];
    let mm = [&m.coeff0, &m.coeff1];
    let n = lax.dim();
    let mut by_degree: Vec<Mat<T>> = (0..4).map(|_| Mat::zeros(n, n)).collect();
    for (i, li) in l.iter().enumerate() {
        for (j, mj) in mm.iter().enumerate() {
            let comm = li.matmul(mj).sub(&mj.matmul(li));
            by_degree[i + j] = by_degree[i + j].add(&comm);
        }
    }
    for power in [3u32, 2u32] {
        let coeff = &by_degree[power as usize];
        let magnitude = coeff.max_abs();
        let vanishes = if T::EXACT {
            magnitude == 0.0
        } else {
            magnitude <= 1e-12
        };
        if !vanishes {
            return Err(Error::FormViolation { power, magnitude });
        }
    }
    Ok(MatrixPoly2 {
        coeff2: Mat::zeros(n, n),
        coeff1: by_degree[1].clone(),
        coeff0: by_degree[0].clone(),
    })
}

/// Residual of the central difference `(L(s₊ₕ) − L(s₋ₕ))/(2h)` against
/// `[L, M]` at the base state.
#[derive(Debug, Clone, Copy)]
pub struct FormCheck {
    pub residual: f64,
    pub rhs_norm: f64,
}

/// Advances the flow to `±h` with a high-accuracy integrator, forms the
/// central difference of the Lax matrices and compares it to [`lax_rhs`].
/// The residual decays as `O(h²)`.
pub fn check_form_preservation(
    state: &PhasePoint<f64>,
    spec: &PotentialSpec,
    h: f64,
) -> Result<FormCheck> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::InvalidStep(h));
    }
    let forward = rk4_flow(state, spec, h, 32)?;
    let backward = rk4_flow(state, spec, -h, 32)?;
    let l_plus = assemble_lax(&forward, spec)?;
    let l_minus = assemble_lax(&backward, spec)?;
    let rhs = lax_rhs(&assemble_lax(state, spec)?)?;

    let scale = 1.0 / (2.0 * h);
    let diff1 = l_plus.coeff1.sub(&l_minus.coeff1).scale(&scale);
    let diff0 = l_plus.coeff0.sub(&l_minus.coeff0).scale(&scale);
    let r1 = diff1.sub(&rhs.coeff1).frob_sq();
    let r0 = diff0.sub(&rhs.coeff0).frob_sq();
    Ok(FormCheck {
        residual: (r1 + r0).sqrt(),
        rhs_norm: rhs.norm(),
    })
}

/// Classical fourth-order step sequence on the constrained equations of
/// motion. Used only as a reference flow; the production integrator lives in
/// `dynamics`.
fn rk4_flow(
    state: &PhasePoint<f64>,
    spec: &PotentialSpec,
    t: f64,
    substeps: usize,
) -> Result<PhasePoint<f64>> {
    let h = t / substeps as f64;
    let mut q = state.q.clone();
    let mut p = state.p.clone();
    let dim = q.len();
    let eval = |q: &Vec<f64>, p: &Vec<f64>| -> Result<(Vec<f64>, Vec<f64>)> {
        let s = PhasePoint {
            q: q.clone(),
            p: p.clone(),
        };
        vector_field(&s, spec)
    };
    for _ in 0..substeps {
        let (k1q, k1p) = eval(&q, &p)?;
        let shift = |base: &Vec<f64>, dir: &Vec<f64>, f: f64| -> Vec<f64> {
            base.iter().zip(dir).map(|(b, d)| b + f * d).collect()
        };
        let (k2q, k2p) = eval(&shift(&q, &k1q, h / 2.0), &shift(&p, &k1p, h / 2.0))?;
        let (k3q, k3p) = eval(&shift(&q, &k2q, h / 2.0), &shift(&p, &k2p, h / 2.0))?;
        let (k4q, k4p) = eval(&shift(&q, &k3q, h), &shift(&p, &k3p, h))?;
        for i in 0..dim {
            q[i] += h / 6.0 * (k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i]);
            p[i] += h / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
        }
    }
    PhasePoint::new(q, p, 1e-9)
        .map_err(|e| Error::IntegrationFailure(format!("reference flow left the manifold: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{dot, random_state};
    use crate::scalar::{rat, Rat};
    use num_traits::{One, Zero};
    use rand::{Rng, SeedableRng};

    fn e1_spec() -> PotentialSpec {
        PotentialSpec::from_ints(&[1, 2], &[2, 1]).unwrap()
    }

    fn e1_state() -> PhasePoint<Rat> {
        PhasePoint::new(
            vec![Rat::one(), Rat::zero(), Rat::zero()],
            vec![Rat::zero(), Rat::one(), Rat::zero()],
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn assemble_matches_entrywise_expansion() {
        let lax = assemble_lax(&e1_state(), &e1_spec()).unwrap();
        let wedge = Mat::from_rows(vec![
            vec![rat(0, 1), rat(1, 1), rat(0, 1)],
            vec![rat(-1, 1), rat(0, 1), rat(0, 1)],
            vec![rat(0, 1), rat(0, 1), rat(0, 1)],
        ]);
        assert_eq!(lax.coeff1, wedge);
        let mut minus_e11 = Mat::zeros(3, 3);
        minus_e11[(0, 0)] = rat(-1, 1);
        assert_eq!(lax.coeff0, minus_e11);
        assert_eq!(lax.coeff0.trace(), rat(-1, 1));
    }

    #[test]
    fn rest_state_gives_diagonal_lax() {
        let spec = PotentialSpec::from_ints(&[1, 2], &[1, 1]).unwrap();
        let state = PhasePoint::new(
            vec![Rat::one(), Rat::zero()],
            vec![Rat::zero(), Rat::zero()],
            0.0,
        )
        .unwrap();
        let lax = assemble_lax(&state, &spec).unwrap();
        assert_eq!(lax.coeff1, Mat::zeros(2, 2));
        // L(λ) = diag(λ²−1, 2λ²)
        let at = lax.eval(&rat(3, 1));
        assert_eq!(at[(0, 0)], rat(8, 1));
        assert_eq!(at[(1, 1)], rat(18, 1));
        assert_eq!(at[(0, 1)], rat(0, 1));
    }

    #[test]
    fn plus_part_drops_constant_term() {
        let lax = assemble_lax(&e1_state(), &e1_spec()).unwrap();
        let m = plus_part(&lax);
        assert_eq!(m.coeff1, lax.coeff2);
        assert_eq!(m.coeff0, lax.coeff1);
    }

    #[test]
    fn lax_rhs_vanishes_at_equilibrium() {
        let spec = PotentialSpec::from_ints(&[1, 2], &[1, 1]).unwrap();
        let state = PhasePoint::new(
            vec![Rat::one(), Rat::zero()],
            vec![Rat::zero(), Rat::zero()],
            0.0,
        )
        .unwrap();
        let rhs = lax_rhs(&assemble_lax(&state, &spec).unwrap()).unwrap();
        assert_eq!(rhs.coeff1, Mat::zeros(2, 2));
        assert_eq!(rhs.coeff0, Mat::zeros(2, 2));
    }

    #[test]
    fn lax_rhs_matches_time_derivative_at_e1() {
        let rhs = lax_rhs(&assemble_lax(&e1_state(), &e1_spec()).unwrap()).unwrap();
        // λ coefficient −[q⊗q, A] vanishes because q is an eigenvector of A.
        assert_eq!(rhs.coeff1, Mat::zeros(3, 3));
        // Constant coefficient equals d/dt(−q⊗q) = −(p⊗q + q⊗p).
        let expected = Mat::from_rows(vec![
            vec![rat(0, 1), rat(-1, 1), rat(0, 1)],
            vec![rat(-1, 1), rat(0, 1), rat(0, 1)],
            vec![rat(0, 1), rat(0, 1), rat(0, 1)],
        ]);
        assert_eq!(rhs.coeff0, expected);
    }

    #[test]
    fn lax_rhs_structure_on_random_rational_states() {
        let spec = PotentialSpec::from_ints(&[1, 4], &[3, 1]).unwrap();
        for seed in 0..20 {
            let state = crate::phase::random_rational_state(&spec, seed);
            let lax = assemble_lax(&state, &spec).unwrap();
            // λ³ and λ² coefficients vanish exactly, and the surviving
            // coefficients keep the antisymmetric/symmetric split.
            let rhs = lax_rhs(&lax).unwrap();
            assert!(rhs.coeff1.is_antisymmetric(0.0));
            assert!(rhs.coeff0.is_symmetric(0.0));

            // The commutator agrees with the chain rule along the flow.
            let (dq, dp) = vector_field(&state, &spec).unwrap();
            let wedge_dot = Mat::wedge(&dq, &state.p).add(&Mat::wedge(&state.q, &dp));
            let outer_dot = Mat::outer(&dq, &state.q).add(&Mat::outer(&state.q, &dq)).neg();
            assert_eq!(rhs.coeff1, wedge_dot);
            assert_eq!(rhs.coeff0, outer_dot);
        }
    }

    #[test]
    fn trace_polynomial_is_potential_trace_minus_one() {
        let spec = PotentialSpec::from_ints(&[1, 4], &[3, 1]).unwrap();
        let state = crate::phase::random_rational_state(&spec, 3);
        let lax = assemble_lax(&state, &spec).unwrap();
        let trace_a: Rat = spec.diagonal::<Rat>().into_iter().sum();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let l0 = rat(rng.gen_range(-30..=30), rng.gen_range(1..=7));
            let expected = trace_a.clone() * l0.clone() * l0.clone() - Rat::one();
            assert_eq!(lax.eval(&l0).trace(), expected);
        }
    }

    #[test]
    fn central_difference_converges_at_second_order() {
        let spec = e1_spec();
        let state = e1_state().to_f64();
        let coarse = check_form_preservation(&state, &spec, 1e-3).unwrap();
        let fine = check_form_preservation(&state, &spec, 5e-4).unwrap();
        let ratio = coarse.residual / fine.residual;
        assert!(
            (3.5..=4.5).contains(&ratio),
            "ratio {ratio} outside second-order window"
        );
    }

    #[test]
    fn equilibrium_has_zero_residual() {
        let spec = PotentialSpec::from_ints(&[1, 2], &[1, 1]).unwrap();
        let state = PhasePoint::new(vec![1.0, 0.0], vec![0.0, 0.0], 0.0).unwrap();
        let check = check_form_preservation(&state, &spec, 1e-3).unwrap();
        assert!(check.residual <= 1e-12);
        assert_eq!(check.rhs_norm, 0.0);
    }

    #[test]
    fn e3_residual_is_small_relative_to_rhs() {
        let spec = PotentialSpec::from_ints(&[1, 4], &[3, 1]).unwrap();
        let state = PhasePoint::new(
            vec![0.5, 0.5, 0.5, 0.5],
            vec![0.5, -0.5, 0.5, -0.5],
            1e-12,
        )
        .unwrap();
        let check = check_form_preservation(&state, &spec, 1e-3).unwrap();
        assert!(check.residual <= 1e-5 * check.rhs_norm);
    }

    #[test]
    fn eigenvalues_are_isospectral_over_one_step() {
        // Spectrum of L(λ₀) at a fixed λ₀ survives a flow step.
        let spec = e1_spec();
        let state = random_state(&spec, 9);
        let lambda0 = 0.73;
        let before = assemble_lax(&state, &spec).unwrap().eval(&lambda0);
        let stepped = rk4_flow(&state, &spec, 1e-3, 8).unwrap();
        let after = assemble_lax(&stepped, &spec).unwrap().eval(&lambda0);

        let eigs = |m: &Mat<f64>| -> Vec<(f64, f64)> {
            let n = m.rows();
            let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
            let mut v: Vec<(f64, f64)> = dm
                .complex_eigenvalues()
                .iter()
                .map(|c| (c.re, c.im))
                .collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        };
        for (a, b) in eigs(&before).iter().zip(eigs(&after)) {
            assert!((a.0 - b.0).abs() <= 1e-8 && (a.1 - b.1).abs() <= 1e-8);
        }
        // Sanity: the flow actually moved the state.
        assert!(dot(&state.q, &stepped.q) < 1.0);
    }
}
