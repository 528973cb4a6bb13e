//! Dense real vectors and matrices plus a symmetric eigensolver.
//!
//! Everything here is plain `f64`, row-major and allocation-per-result. The
//! matrices involved are the N²×M data matrix, M×M covariances and the N²×K
//! eigenimage bank, so nothing needs to be clever.

mod jacobi;

use std::fmt;

use thiserror::Error;

use crate::exec::{map_range, Execution};

pub use jacobi::{jacobi_eigh, EigenDecomposition, EigenPair, MAX_SWEEPS};

/// Elements at or below this magnitude are skipped when picking the sign of
/// a direction vector.
pub const SIGN_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty vector or matrix")]
    Empty,
    #[error("non-finite element at index {0}")]
    NonFinite(usize),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (|c[{row}][{col}] - c[{col}][{row}]| = {gap:e})")]
    NotSymmetric { row: usize, col: usize, gap: f64 },
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("cannot normalize a zero vector")]
    ZeroVector,
}

pub type Result<T, E = LinalgError> = std::result::Result<T, E>;

fn check_finite(elems: &[f64]) -> Result<()> {
    match elems.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(LinalgError::NonFinite(i)),
        None => Ok(()),
    }
}

/// Flips `v` in place so that its first element with magnitude above
/// [`SIGN_EPSILON`] is positive.
pub fn apply_sign_convention(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > SIGN_EPSILON) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Non-empty vector of finite reals.
#[derive(Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(elems: Vec<f64>) -> Result<Self> {
        if elems.is_empty() {
            return Err(LinalgError::Empty);
        }
        check_finite(&elems)?;
        Ok(Vector(elems))
    }

    /// # Panics
    /// If `len` is zero.
    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "zero-length vector");
        Vector(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    // Never true; present for clippy's len-without-is-empty lint.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        same_len(self, other)?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        same_len(self, other)?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        same_len(self, other)?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Vector").field(&self.0).finish()
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn same_len(a: &Vector, b: &Vector) -> Result<()> {
    if a.len() != b.len() {
        return Err(LinalgError::DimensionMismatch(format!(
            "vector lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense row-major matrix of finite reals.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    elems: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, elems: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::Empty);
        }
        if rows * cols != elems.len() {
            return Err(LinalgError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} elements, got {}",
                rows * cols,
                elems.len()
            )));
        }
        check_finite(&elems)?;
        Ok(Matrix { rows, cols, elems })
    }

    /// Builds a matrix from nested rows; convenient for literals in tests.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        Matrix::new(rows.len(), cols, rows.concat())
    }

    /// Stacks equal-length vectors as columns.
    pub fn from_columns(columns: &[Vector]) -> Result<Self> {
        let rows = columns.first().map(Vector::len).ok_or(LinalgError::Empty)?;
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(LinalgError::DimensionMismatch(format!(
                "column lengths {rows} and {}",
                bad.len()
            )));
        }
        let cols = columns.len();
        let mut elems = vec![0.0; rows * cols];
        for (j, col) in columns.iter().enumerate() {
            for (i, x) in col.as_slice().iter().enumerate() {
                elems[i * cols + j] = *x;
            }
        }
        Ok(Matrix { rows, cols, elems })
    }

    /// Builds a matrix from column-major storage.
    pub fn from_column_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(LinalgError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} elements, got {}",
                rows * cols,
                data.len()
            )));
        }
        let mut elems = vec![0.0; data.len()];
        for j in 0..cols {
            for i in 0..rows {
                elems[i * cols + j] = data[j * rows + i];
            }
        }
        Matrix::new(rows, cols, elems)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Matrix { rows, cols, elems: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.elems[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.elems
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.elems[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.elems[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vector {
        Vector((0..self.rows).map(|i| self.get(i, col)).collect())
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// Elements in column-major order.
    pub fn to_column_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.elems.len());
        for j in 0..self.cols {
            out.extend((0..self.rows).map(|i| self.get(i, j)));
        }
        out
    }

    /// The first `k` columns.
    pub fn leading_columns(&self, k: usize) -> Matrix {
        assert!(k >= 1 && k <= self.cols, "column count out of range");
        let mut elems = Vec::with_capacity(self.rows * k);
        for i in 0..self.rows {
            elems.extend_from_slice(&self.row(i)[..k]);
        }
        Matrix { rows: self.rows, cols: k, elems }
    }

    pub fn transpose(&self) -> Matrix {
        let mut elems = vec![0.0; self.elems.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                elems[j * self.rows + i] = self.get(i, j);
            }
        }
        Matrix { rows: self.cols, cols: self.rows, elems }
    }

    pub fn frobenius_norm(&self) -> f64 {
        dot(&self.elems, &self.elems).sqrt()
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, elems: self.elems.iter().map(|x| x * s).collect() }
    }

    /// `self · v`.
    pub fn mul_vector(&self, v: &Vector) -> Result<Vector> {
        if self.cols != v.len() {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} matrix times length-{} vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok(Vector((0..self.rows).map(|i| dot(self.row(i), v.as_slice())).collect()))
    }

    pub(crate) fn from_parts_unchecked(rows: usize, cols: usize, elems: Vec<f64>) -> Matrix {
        debug_assert_eq!(rows * cols, elems.len());
        Matrix { rows, cols, elems }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.rows).map(|i| self.row(i)).collect();
        f.debug_struct("Matrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("elems", &rows)
            .finish()
    }
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    mat_mul_with(a, b, Execution::default())
}

/// Matrix product. Rows of the result are computed independently; each entry
/// accumulates over the inner index in ascending order on either execution path.
pub fn mat_mul_with(a: &Matrix, b: &Matrix, exec: Execution) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(LinalgError::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let rows = map_range(exec, a.rows, |i| {
        let mut out = vec![0.0; b.cols];
        for (k, &aik) in a.row(i).iter().enumerate() {
            for (o, &bkj) in out.iter_mut().zip(b.row(k)) {
                *o += aik * bkj;
            }
        }
        out
    });
    Ok(Matrix::from_parts_unchecked(a.rows, b.cols, rows.concat()))
}

/// Mean of the columns: element `j` is the average of row `j`.
pub fn column_mean(m: &Matrix) -> Vector {
    let inv = m.cols as f64;
    Vector((0..m.rows).map(|i| m.row(i).iter().sum::<f64>() / inv).collect())
}

pub fn euclidean_distance(a: &Vector, b: &Vector) -> Result<f64> {
    same_len(a, b)?;
    Ok(squared_distance(a.as_slice(), b.as_slice()).sqrt())
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Scales `v` to unit 2-norm and applies the sign convention.
pub fn unit_normalize(v: &Vector) -> Result<Vector> {
    let norm = v.norm();
    if norm <= SIGN_EPSILON {
        return Err(LinalgError::ZeroVector);
    }
    let mut out: Vec<f64> = v.as_slice().iter().map(|x| x / norm).collect();
    apply_sign_convention(&mut out);
    Ok(Vector(out))
}
