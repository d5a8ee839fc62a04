//! Small dense complex linear algebra.
//!
//! Everything here operates on tiny matrices (a dozen rows at most in the
//! configurations we simulate), so the routines are straightforward
//! triple loops over row-major storage.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use thiserror::Error;

/// Complex column vector.
pub type CVector = Vec<Complex64>;

/// Pivots smaller than this fraction of the largest input entry are treated as zero.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {op} got {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is singular (pivot {pivot:e} at column {column})")]
    Singular { column: usize, pivot: f64 },
    #[error("matrix is rank deficient")]
    RankDeficient,
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("invalid shape {0}x{1}")]
    InvalidShape(usize, usize),
}

pub type LinalgResult<T> = Result<T, LinalgError>;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting bad shapes and NaN/Inf entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> LinalgResult<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(LinalgError::InvalidShape(rows, cols));
        }
        if let Some(pos) = data.iter().position(|z| !z.is_finite()) {
            return Err(LinalgError::NonFinite(pos / cols, pos % cols));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged or non-finite input;
    /// intended for literals in tests and examples.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let data: Vec<Complex64> = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.as_ref().len(), cols, "ragged rows");
                r.as_ref().iter().copied()
            })
            .collect();
        Self::from_row_major(rows.len(), cols, data).expect("valid matrix literal")
    }

    /// Real-valued literal convenience.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Column vector as an n×1 matrix.
    pub fn column_vector(v: &[Complex64]) -> Self {
        Self::from_row_major(v.len(), 1, v.to_vec()).expect("finite column vector")
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> CVector {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Sub-matrix made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self[(i, cols[j])])
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * alpha).collect(),
        }
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermitian(&self) -> Self {
        hermitian(self)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}j  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Conjugate transpose.
pub fn hermitian(a: &CMatrix) -> CMatrix {
    CMatrix::from_fn(a.cols, a.rows, |i, j| a[(j, i)].conj())
}

pub fn mat_mul(a: &CMatrix, b: &CMatrix) -> LinalgResult<CMatrix> {
    if a.cols != b.rows {
        return Err(LinalgError::DimensionMismatch {
            op: "mat_mul",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let mut out = CMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a[(i, k)];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..b.cols {
                out.data[i * b.cols + j] += aik * b.data[k * b.cols + j];
            }
        }
    }
    Ok(out)
}

pub fn mat_vec(a: &CMatrix, x: &[Complex64]) -> LinalgResult<CVector> {
    if a.cols != x.len() {
        return Err(LinalgError::DimensionMismatch {
            op: "mat_vec",
            left: a.shape(),
            right: (x.len(), 1),
        });
    }
    Ok((0..a.rows)
        .map(|i| a.row(i).iter().zip(x).map(|(h, v)| h * v).sum())
        .collect())
}

/// Aᴴ·A without materialising Aᴴ.
pub fn gram(a: &CMatrix) -> CMatrix {
    let n = a.cols;
    let mut g = CMatrix::zeros(n, n);
    for r in 0..a.rows {
        let row = a.row(r);
        for i in 0..n {
            let ci = row[i].conj();
            for j in i..n {
                g.data[i * n + j] += ci * row[j];
            }
        }
    }
    for i in 0..n {
        g.data[i * n + i].im = 0.0;
        for j in 0..i {
            g.data[i * n + j] = g.data[j * n + i].conj();
        }
    }
    g
}

/// LU factorisation with partial pivoting, `P·A = L·U` packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &CMatrix) -> LinalgResult<Self> {
        if a.rows != a.cols {
            return Err(LinalgError::NotSquare(a.rows, a.cols));
        }
        let n = a.rows;
        let threshold = SINGULAR_PIVOT_RATIO * a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cand| if cand.1 > best.1 { cand } else { best });
            if pivot <= threshold || pivot == 0.0 {
                return Err(LinalgError::Singular { column: k, pivot });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let inv = lu[(k, k)].inv();
            for i in (k + 1)..n {
                let factor = lu[(i, k)] * inv;
                lu[(i, k)] = factor;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in (k + 1)..n {
                    let ukj = lu.data[k * n + j];
                    lu.data[i * n + j] -= factor * ukj;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn solve(&self, b: &[Complex64]) -> LinalgResult<CVector> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                op: "solve",
                left: self.lu.shape(),
                right: (b.len(), 1),
            });
        }
        let mut x: CVector = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }

    /// Solves `A·X = B` column by column.
    pub fn solve_matrix(&self, b: &CMatrix) -> LinalgResult<CMatrix> {
        if b.rows != self.dim() {
            return Err(LinalgError::DimensionMismatch {
                op: "solve",
                left: self.lu.shape(),
                right: b.shape(),
            });
        }
        let mut out = CMatrix::zeros(b.rows, b.cols);
        for j in 0..b.cols {
            let col = self.solve(&b.column(j))?;
            for (i, v) in col.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }
}

pub fn solve(a: &CMatrix, b: &[Complex64]) -> LinalgResult<CVector> {
    Lu::factor(a)?.solve(b)
}

/// Inverse of a square matrix, by solving against each identity column.
pub fn inverse(a: &CMatrix) -> LinalgResult<CMatrix> {
    let lu = Lu::factor(a)?;
    lu.solve_matrix(&CMatrix::identity(a.rows))
}

/// Left pseudoinverse `(HᴴH)⁻¹Hᴴ` of a tall, full-column-rank matrix.
pub fn pseudo_inverse(h: &CMatrix) -> LinalgResult<CMatrix> {
    if h.rows < h.cols {
        return Err(LinalgError::RankDeficient);
    }
    let lu = Lu::factor(&gram(h)).map_err(|e| match e {
        LinalgError::Singular { .. } => LinalgError::RankDeficient,
        other => other,
    })?;
    lu.solve_matrix(&hermitian(h))
}

/// Lower-triangular `L` with `L·Lᴴ = R` for Hermitian positive definite `R`.
pub fn cholesky(r: &CMatrix) -> LinalgResult<CMatrix> {
    if r.rows != r.cols {
        return Err(LinalgError::NotSquare(r.rows, r.cols));
    }
    let n = r.rows;
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = r[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d.is_nan() || d <= 0.0 {
            return Err(LinalgError::NotPositiveDefinite { row: j, pivot: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = r[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Real Cholesky factor of a symmetric positive definite matrix stored row-major.
pub(crate) fn cholesky_real(a: &[f64], n: usize) -> LinalgResult<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d.is_nan() || d <= 0.0 {
            return Err(LinalgError::NotPositiveDefinite { row: j, pivot: d });
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Ok(l)
}

pub fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}
