//! Dense complex matrices in row-major order.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest dimension a tensor product is allowed to produce.
pub const MAX_TENSOR_DIM: usize = 4096;

/// Dense complex matrix, the substrate for operators and states.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexMatrix<T> {
    /// Build a matrix from row-major entries, validating shape and finiteness.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::EntryCount {
                rows,
                cols,
                got: entries.len(),
            });
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub(crate) fn from_parts(rows: usize, cols: usize, entries: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(entries.len(), rows * cols);
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_parts(rows, cols, vec![Complex::zero(); rows * cols])
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// Square matrix with the given real diagonal.
    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::from_parts(rows, cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.rows && j < self.cols);
        i * self.cols + j
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_parts(
            self.rows,
            self.cols,
            self.entries.iter().map(|z| z.conj()).collect(),
        )
    }

    /// Conjugate transpose `M†`.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self::from_parts(
            self.rows,
            self.cols,
            self.entries.iter().map(|z| z * factor).collect(),
        )
    }

    pub fn scale_re(&self, factor: T) -> Self {
        self.scale(Complex::new(factor, T::zero()))
    }

    pub fn trace(&self) -> Complex<T> {
        assert!(self.is_square(), "trace requires a square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> T {
        self.entries
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |acc, v| if v > acc { v } else { acc })
    }

    /// Largest entrywise distance to another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.rows, other.rows, "shape mismatch");
        assert_eq!(self.cols, other.cols, "shape mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), |acc, v| if v > acc { v } else { acc })
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Max-entry deviation from `M = M†`; zero for exactly Hermitian input.
    pub fn hermiticity_deviation(&self) -> T {
        assert!(self.is_square(), "hermiticity requires a square matrix");
        let mut dev = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                if d > dev {
                    dev = d;
                }
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.hermiticity_deviation() <= tol
    }

    /// Kronecker product; block `(i, j)` of the result is `self[i,j] * other`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let rows = self.rows.saturating_mul(other.rows);
        let cols = self.cols.saturating_mul(other.cols);
        let limit = rows.max(cols);
        if limit > MAX_TENSOR_DIM {
            return Err(Error::DimensionOverflow {
                dim: limit,
                max: MAX_TENSOR_DIM,
            });
        }
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        Ok(out)
    }
}

impl<T: Scalar> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.entries[self.idx(i, j)]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        let k = self.idx(i, j);
        &mut self.entries[k]
    }
}

impl<T: Scalar> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch"
        );
        ComplexMatrix::from_parts(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl<T: Scalar> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch"
        );
        ComplexMatrix::from_parts(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl<T: Scalar> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Interchange form: `{rows, cols, re: [...], im: [...]}` in row-major order.
#[derive(Serialize, Deserialize)]
struct MatrixRepr<T> {
    rows: usize,
    cols: usize,
    re: Vec<T>,
    im: Vec<T>,
}

impl<T: Scalar + Serialize> Serialize for ComplexMatrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            re: self.entries.iter().map(|z| z.re).collect(),
            im: self.entries.iter().map(|z| z.im).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for ComplexMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::<T>::deserialize(deserializer)?;
        if repr.re.len() != repr.im.len() {
            return Err(D::Error::custom("re and im arrays differ in length"));
        }
        let entries = repr
            .re
            .into_iter()
            .zip(repr.im)
            .map(|(re, im)| Complex::new(re, im))
            .collect();
        ComplexMatrix::new(repr.rows, repr.cols, entries).map_err(D::Error::custom)
    }
}
