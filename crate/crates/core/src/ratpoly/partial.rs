//! Exact partial fractions over prescribed poles of order one or two.

use crate::error::{Error, Result};
use crate::ratpoly::UniPoly;
use crate::scalar::Rat;
use num_traits::Zero;

/// One pole of the decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleTerm {
    pub location: Rat,
    pub order: u8,
    /// Coefficient of `1/(z − a)` (the residue).
    pub simple: Rat,
    /// Coefficient of `1/(z − a)²`; present exactly for order-2 poles.
    pub double: Option<Rat>,
}

/// Decomposition `N/Π(z−a_i)^{o_i} = Σ simple_i/(z−a_i) + Σ double_j/(z−a_j)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFraction {
    pub terms: Vec<PoleTerm>,
}

impl PartialFraction {
    pub fn simple_coeffs(&self) -> Vec<Rat> {
        self.terms.iter().map(|t| t.simple.clone()).collect()
    }

    pub fn double_coeffs(&self) -> Vec<Rat> {
        self.terms.iter().filter_map(|t| t.double.clone()).collect()
    }

    /// Rebuilds the numerator over the common denominator; inverse of
    /// [`partial_fractions`] on valid inputs.
    pub fn recombine(&self) -> UniPoly {
        let poles: Vec<(Rat, u8)> = self
            .terms
            .iter()
            .map(|t| (t.location.clone(), t.order))
            .collect();
        let mut num = UniPoly::zero();
        for (i, t) in self.terms.iter().enumerate() {
            num = &num + &simple_basis(&poles, i).scale(&t.simple);
            if let Some(d) = &t.double {
                num = &num + &double_basis(&poles, i).scale(d);
            }
        }
        num
    }
}

/// Numerator of `1/(z−a_i)` over the common denominator.
fn simple_basis(poles: &[(Rat, u8)], i: usize) -> UniPoly {
    let mut factors: Vec<(Rat, usize)> = Vec::new();
    for (j, (a, o)) in poles.iter().enumerate() {
        let power = if j == i { *o as usize - 1 } else { *o as usize };
        factors.push((a.clone(), power));
    }
    UniPoly::from_roots(&factors)
}

/// Numerator of `1/(z−a_i)²` over the common denominator (order-2 poles only).
fn double_basis(poles: &[(Rat, u8)], i: usize) -> UniPoly {
    let mut factors: Vec<(Rat, usize)> = Vec::new();
    for (j, (a, o)) in poles.iter().enumerate() {
        if j != i {
            factors.push((a.clone(), *o as usize));
        }
    }
    UniPoly::from_roots(&factors)
}

/// Splits `numerator / Π(z−a_i)^{order_i}` into simple and double pole terms.
///
/// Solved as one exact linear system in the unknown coefficients (denominators
/// cleared, coefficients matched), which treats order-1 and order-2 poles
/// uniformly.
pub fn partial_fractions(numerator: &UniPoly, poles: &[(Rat, u8)]) -> Result<PartialFraction> {
    for (_, o) in poles {
        if *o != 1 && *o != 2 {
            return Err(Error::PoleOrderUnsupported(*o));
        }
    }
    for (i, (a, _)) in poles.iter().enumerate() {
        if poles[i + 1..].iter().any(|(b, _)| b == a) {
            return Err(Error::DuplicatePole);
        }
    }
    let total_order: usize = poles.iter().map(|(_, o)| *o as usize).sum();
    if let Some(d) = numerator.degree() {
        if d >= total_order {
            return Err(Error::DegreeTooHigh {
                degree: d,
                bound: total_order,
            });
        }
    }

    // Column layout: one simple coefficient per pole, then one double
    // coefficient per order-2 pole.
    let mut basis: Vec<UniPoly> = (0..poles.len()).map(|i| simple_basis(poles, i)).collect();
    let double_cols: Vec<usize> = poles
        .iter()
        .enumerate()
        .filter(|(_, (_, o))| *o == 2)
        .map(|(i, _)| i)
        .collect();
    for &i in &double_cols {
        basis.push(double_basis(poles, i));
    }

    let rows = total_order;
    let cols = basis.len();
    debug_assert_eq!(rows, cols);
    let mut matrix: Vec<Vec<Rat>> = (0..rows)
        .map(|r| basis.iter().map(|b| b.coeff(r)).collect())
        .collect();
    let mut rhs: Vec<Rat> = (0..rows).map(|r| numerator.coeff(r)).collect();
    let solution = gauss_solve(&mut matrix, &mut rhs)
        .expect("distinct poles yield a nonsingular coefficient system");

    let mut double_iter = double_cols.iter().zip(&solution[poles.len()..]);
    let terms = poles
        .iter()
        .enumerate()
        .map(|(i, (a, o))| PoleTerm {
            location: a.clone(),
            order: *o,
            simple: solution[i].clone(),
            double: (*o == 2).then(|| {
                let (&col, value) = double_iter.next().expect("one double per order-2 pole");
                debug_assert_eq!(col, i);
                value.clone()
            }),
        })
        .collect();
    Ok(PartialFraction { terms })
}

/// Exact Gaussian elimination; `None` when the matrix is singular.
fn gauss_solve(matrix: &mut [Vec<Rat>], rhs: &mut [Rat]) -> Option<Vec<Rat>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !matrix[r][col].is_zero())?;
        matrix.swap(col, pivot);
        rhs.swap(col, pivot);
        let pivot_row = matrix[col].clone();
        for r in col + 1..n {
            if matrix[r][col].is_zero() {
                continue;
            }
            let f = matrix[r][col].clone() / pivot_row[col].clone();
            for (c, pivot_entry) in pivot_row.iter().enumerate().skip(col) {
                let delta = f.clone() * pivot_entry.clone();
                matrix[r][c] -= delta;
            }
            let delta = f * rhs[col].clone();
            rhs[r] -= delta;
        }
    }
    let mut x = vec![Rat::zero(); n];
    for r in (0..n).rev() {
        let mut acc = rhs[r].clone();
        for c in r + 1..n {
            acc -= matrix[r][c].clone() * x[c].clone();
        }
        x[r] = acc / matrix[r][r].clone();
    }
    Some(x)
}
