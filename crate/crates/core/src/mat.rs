//! Small dense matrices over an arbitrary scalar.
//!
//! Everything here is sized by the phase-space dimension `n+1`, so the
//! implementation favors clarity over blocking or SIMD.

use crate::scalar::Scalar;
use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Outer product `x ⊗ y` (entries `x_u y_v`).
    pub fn outer(x: &[T], y: &[T]) -> Self {
        let mut m = Self::zeros(x.len(), y.len());
        for u in 0..x.len() {
            for v in 0..y.len() {
                m[(u, v)] = x[u].clone() * y[v].clone();
            }
        }
        m
    }

    /// Wedge `q ∧ p = q ⊗ p − p ⊗ q`, entries `q_u p_v − q_v p_u`.
    pub fn wedge(q: &[T], p: &[T]) -> Self {
        assert_eq!(q.len(), p.len());
        let mut m = Self::zeros(q.len(), q.len());
        for u in 0..q.len() {
            for v in 0..q.len() {
                m[(u, v)] = q[u].clone() * p[v].clone() - q[v].clone() * p[u].clone();
            }
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn neg(&self) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.clone() * s.clone()).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.clone() * other[(k, j)].clone();
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    /// `ab − ba`.
    pub fn commutator(a: &Self, b: &Self) -> Self {
        a.matmul(b).sub(&b.matmul(a))
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn trace(&self) -> T {
        let mut t = T::zero();
        for i in 0..self.rows.min(self.cols) {
            t += self[(i, i)].clone();
        }
        t
    }

    /// Squared Frobenius norm, exact in the rational instantiation.
    pub fn frob_sq(&self) -> T {
        let mut s = T::zero();
        for a in &self.data {
            s += a.clone() * a.clone();
        }
        s
    }

    /// Largest `|entry|` as f64.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|a| a.to_f64().abs())
            .fold(0.0, f64::max)
    }

    /// Square sub-block over the index range `range`.
    pub fn block(&self, range: std::ops::Range<usize>) -> Self {
        let m = range.len();
        let mut out = Self::zeros(m, m);
        for (bi, i) in range.clone().enumerate() {
            for (bj, j) in range.clone().enumerate() {
                out[(bi, bj)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn is_antisymmetric(&self, tol: f64) -> bool {
        self.sub(&self.transpose().neg()).max_abs() <= tol
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.sub(&self.transpose()).max_abs() <= tol
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &T)> {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .map(move |(idx, v)| ((idx / cols, idx % cols), v))
    }
}

impl Mat<f64> {
    pub fn frob(&self) -> f64 {
        self.frob_sq().sqrt()
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}
