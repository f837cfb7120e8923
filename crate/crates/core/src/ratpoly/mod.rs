//! Exact rational polynomial arithmetic.
//!
//! Coefficients are arbitrary-precision rationals throughout; nothing in this
//! module rounds. [`UniPoly`] carries the numerator/denominator algebra of the
//! invariant decomposition, [`BivarPoly`] the characteristic polynomial in
//! `(λ, μ)`, and [`partial_fractions`] splits a proper rational function over
//! prescribed poles of order one or two.

mod bivar;
mod partial;
mod unipoly;

pub use crate::scalar::Rat;
pub use bivar::BivarPoly;
pub use partial::{partial_fractions, PartialFraction, PoleTerm};
pub use unipoly::UniPoly;
