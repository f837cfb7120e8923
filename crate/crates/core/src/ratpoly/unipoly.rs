//! Dense univariate polynomials over the rationals.

use crate::error::{Error, Result};
use crate::scalar::Rat;
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Polynomial in one variable, coefficients stored lowest degree first.
///
/// The zero polynomial is the empty list; otherwise the leading coefficient
/// is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<Rat>,
}

impl UniPoly {
    /// Builds a polynomial from ascending coefficients, trimming leading zeros.
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `c·z^deg`.
    pub fn monomial(deg: usize, c: Rat) -> Self {
        let mut coeffs = vec![Rat::zero(); deg + 1];
        coeffs[deg] = c;
        Self::new(coeffs)
    }

    /// The linear factor `z − a`.
    pub fn linear(a: &Rat) -> Self {
        Self::new(vec![-a.clone(), Rat::one()])
    }

    /// `Π (z − a_i)^order_i`.
    pub fn from_roots(roots: &[(Rat, usize)]) -> Self {
        let mut p = Self::one();
        for (a, order) in roots {
            let lin = Self::linear(a);
            for _ in 0..*order {
                p = &p * &lin;
            }
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Coefficient of `z^i` (zero beyond the stored length).
    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.coeffs.last()
    }

    pub fn eval(&self, z: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z.clone() + c.clone();
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.clone() * Rat::from_integer(i.into()))
            .collect();
        Self::new(coeffs)
    }

    pub fn scale(&self, s: &Rat) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    /// Leading coefficient normalized to one. Zero stays zero.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(l) => {
                let inv = Rat::one() / l.clone();
                self.scale(&inv)
            }
        }
    }

    /// Euclidean division; panics on a zero divisor (internal misuse).
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let d_deg = divisor.degree().unwrap();
        let d_lead = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= d_deg {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![Rat::zero(); rem.len() - d_deg];
        for i in (d_deg..rem.len()).rev() {
            let factor = rem[i].clone() / d_lead.clone();
            if factor.is_zero() {
                continue;
            }
            quot[i - d_deg] = factor.clone();
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                let delta = factor.clone() * dc.clone();
                rem[i - d_deg + j] -= delta;
            }
        }
        (Self::new(quot), Self::new(rem))
    }

    /// Monic greatest common divisor by the Euclidean algorithm.
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `p / gcd(p, p′)`, monic; the result has no repeated roots.
    pub fn squarefree_part(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let g = Self::gcd(self, &self.derivative());
        let (q, r) = self.div_rem(&g);
        debug_assert!(r.is_zero(), "gcd must divide the polynomial");
        Ok(q.monic())
    }
}

impl Add for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..len).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..len).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a.clone() * b.clone();
            }
        }
        UniPoly::new(coeffs)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{i}")?,
            }
        }
        Ok(())
    }
}
