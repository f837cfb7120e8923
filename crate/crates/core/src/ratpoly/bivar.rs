//! Sparse bivariate polynomials in `(λ, μ)`.

use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;

/// Polynomial in two variables, keyed by `(λ-degree, μ-degree)`.
///
/// No zero coefficient is ever stored, so structural equality is polynomial
/// equality. Generic over the scalar: the spectral algebra instantiates it
/// with `Rat`, the drift reports with `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivarPoly<T> {
    terms: BTreeMap<(u32, u32), T>,
}

impl<T: Scalar> BivarPoly<T> {
    pub fn zero() -> Self {
        BivarPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::term(0, 0, T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::term(0, 0, c)
    }

    /// The monomial `c·λ^dl·μ^dm`.
    pub fn term(dl: u32, dm: u32, c: T) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((dl, dm), c);
        }
        BivarPoly { terms }
    }

    pub fn from_terms(it: impl IntoIterator<Item = ((u32, u32), T)>) -> Self {
        let mut p = Self::zero();
        for ((dl, dm), c) in it {
            p.add_term(dl, dm, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, dl: u32, dm: u32, c: T) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((dl, dm)).or_insert_with(T::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&(dl, dm));
        }
    }

    pub fn coeff(&self, dl: u32, dm: u32) -> T {
        self.terms.get(&(dl, dm)).cloned().unwrap_or_else(T::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &T)> {
        self.terms.iter()
    }

    pub fn lambda_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn mu_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (&(dl, dm), c) in &rhs.terms {
            out.add_term(dl, dm, c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (&(dl, dm), c) in &rhs.terms {
            out.add_term(dl, dm, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        BivarPoly {
            terms: self.terms.iter().map(|(k, c)| (*k, -c.clone())).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero();
        for (&(al, am), a) in &self.terms {
            for (&(bl, bm), b) in &rhs.terms {
                out.add_term(al + bl, am + bm, a.clone() * b.clone());
            }
        }
        out
    }

    pub fn eval(&self, lambda: &T, mu: &T) -> T {
        // Term count is small; plain power evaluation is fine.
        let mut acc = T::zero();
        for (&(dl, dm), c) in &self.terms {
            let mut t = c.clone();
            for _ in 0..dl {
                t = t * lambda.clone();
            }
            for _ in 0..dm {
                t = t * mu.clone();
            }
            acc += t;
        }
        acc
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> BivarPoly<U> {
        BivarPoly {
            terms: self
                .terms
                .iter()
                .filter_map(|(k, c)| {
                    let v = f(c);
                    (!v.is_zero()).then_some((*k, v))
                })
                .collect(),
        }
    }
}

impl<T: Scalar> fmt::Display for BivarPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(dl, dm), c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            if dl > 0 {
                write!(f, "l^{dl}")?;
            }
            if dm > 0 {
                write!(f, "m^{dm}")?;
            }
        }
        Ok(())
    }
}
