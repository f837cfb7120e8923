//! Dynamics and exact spectral algebra for the Neumann system on the sphere.
//!
//! A particle moves on `S^n` in the quadratic potential `½⟨Aq,q⟩` with diagonal
//! positive `A`. When eigenvalues of `A` repeat, the system carries extra
//! rotational symmetry; this crate computes everything that can be checked at
//! desk scale about that structure:
//!
//! * [`phase`]: the phase-space model on `T*S^n`: validated states, the
//!   Hamiltonian, the constrained vector field, per-eigenvalue-group moments.
//! * [`laxflow`]: the `(n+1)×(n+1)` matrix-polynomial representation of the
//!   flow and its commutator right-hand side.
//! * [`ratpoly`]: exact rational polynomial arithmetic: univariate and
//!   bivariate polynomials, partial fractions with prescribed poles,
//!   squarefree parts.
//! * [`spectral`]: exact characteristic polynomial, first integrals `F_i`
//!   and `K_j²` with their antisymmetric momentum blocks, the factorization
//!   of the spectral curve into components, genus bookkeeping and the
//!   superintegrability classifier.
//! * [`dynamics`]: constraint-preserving symplectic integration, an
//!   independent matrix-flow integrator for cross-validation, and drift
//!   reports over all conserved quantities.
//!
//! All symbolic computation is exact over arbitrary-precision rationals; the
//! integrators use binary64 mirrors of the same formulas.

pub mod dynamics;
pub mod error;
pub mod laxflow;
pub mod mat;
pub mod phase;
pub mod ratpoly;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::{parse_rat, Rat, Scalar};
