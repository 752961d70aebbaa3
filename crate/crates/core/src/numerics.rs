//! Dense complex vectors and matrices.
//!
//! Everything the precoder needs is small (the largest matrix that gets
//! inverted is `N_RF x N_RF`), so this is a plain row-major kernel with an
//! LU factorization and nothing else.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Condition numbers above this are treated as singular by [`inverse`].
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("dimension mismatch in {op}: {lhs:?} vs {rhs:?}")]
    Dimension {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    Singular { condition: f64 },
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("empty vector")]
    Empty,
}

/// Column vector of complex amplitudes.
#[derive(Clone, PartialEq)]
pub struct CVector(Vec<C64>);

impl CVector {
    pub fn new(elements: Vec<C64>) -> Result<Self, NumericsError> {
        if elements.is_empty() {
            return Err(NumericsError::Empty);
        }
        if let Some(i) = elements.iter().position(|z| !z.is_finite()) {
            return Err(NumericsError::NonFinite(i));
        }
        Ok(Self(elements))
    }

    pub(crate) fn from_vec_unchecked(elements: Vec<C64>) -> Self {
        Self(elements)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.iter().map(|z| z * s).collect())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }
}

impl Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl fmt::Debug for CVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, NumericsError> {
        if rows * cols != data.len() {
            return Err(NumericsError::Dimension {
                op: "from_row_major",
                lhs: (rows, cols),
                rhs: (data.len(), 1),
            });
        }
        if let Some(i) = data.iter().position(|z| !z.is_finite()) {
            return Err(NumericsError::NonFinite(i));
        }
        Ok(Self { rows, cols, data })
    }

    /// Stacks equally long rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, NumericsError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(NumericsError::Dimension {
                op: "from_rows",
                lhs: (1, cols),
                rhs: (1, bad.len()),
            });
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[CVector]) -> Result<Self, NumericsError> {
        let rows = cols.first().map_or(0, CVector::len);
        if let Some(bad) = cols.iter().find(|c| c.len() != rows) {
            return Err(NumericsError::Dimension {
                op: "from_columns",
                lhs: (rows, 1),
                rhs: (bad.len(), 1),
            });
        }
        Ok(Self::from_fn(rows, cols.len(), |r, c| cols[c][r]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> CVector {
        CVector((0..self.rows).map(|r| self[(r, c)]).collect())
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> CMatrix {
        CMatrix {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix, NumericsError> {
        if self.dims() != other.dims() {
            return Err(NumericsError::Dimension {
                op: "sub",
                lhs: self.dims(),
                rhs: other.dims(),
            });
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>, NumericsError> {
        if v.len() != self.cols {
            return Err(NumericsError::Dimension {
                op: "mul_vec",
                lhs: self.dims(),
                rhs: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
}

/// Conjugate transpose.
pub fn hermitian(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(m.cols, m.rows, |r, c| m[(c, r)].conj())
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> Result<CMatrix, NumericsError> {
    if a.cols != b.rows {
        return Err(NumericsError::Dimension {
            op: "matmul",
            lhs: a.dims(),
            rhs: b.dims(),
        });
    }
    let mut out = CMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for (k, &aik) in a.row(i).iter().enumerate() {
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, bkj) in out_row.iter_mut().zip(b.row(k)) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

/// `result[i * |b| + j] = a[i] * b[j]`.
pub fn kronecker(a: &CVector, b: &CVector) -> CVector {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a.as_slice() {
        for y in b.as_slice() {
            out.push(x * y);
        }
    }
    CVector(out)
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Factors a square matrix. Fails only when a pivot vanishes.
    pub fn factor(m: &CMatrix) -> Result<Self, NumericsError> {
        if m.rows != m.cols {
            return Err(NumericsError::Dimension {
                op: "lu",
                lhs: m.dims(),
                rhs: m.dims(),
            });
        }
        let n = m.rows;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = m.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tiny = scale * f64::EPSILON * n as f64;

        for k in 0..n {
            let (p, pivot_abs) = (k..n)
                .map(|r| (r, lu[r * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot_abs > tiny) {
                return Err(NumericsError::Singular {
                    condition: f64::INFINITY,
                });
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for r in k + 1..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                if factor == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in k + 1..n {
                    let u = lu[k * n + c];
                    lu[r * n + c] -= factor * u;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        assert_eq!(b.len(), n, "rhs length must match the factored matrix");
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut acc = x[r];
            for c in 0..r {
                acc -= self.lu[r * n + c] * x[c];
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for c in r + 1..n {
                acc -= self.lu[r * n + c] * x[c];
            }
            x[r] = acc / self.lu[r * n + r];
        }
        x
    }

    pub fn inverse(&self) -> CMatrix {
        let n = self.n;
        let mut inv = CMatrix::zeros(n, n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        for c in 0..n {
            e.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            e[c] = C64::new(1.0, 0.0);
            for (r, v) in self.solve(&e).into_iter().enumerate() {
                inv[(r, c)] = v;
            }
        }
        inv
    }
}

/// Inverse via LU. Rejects matrices whose 1-norm condition number exceeds
/// [`MAX_CONDITION`].
pub fn inverse(m: &CMatrix) -> Result<CMatrix, NumericsError> {
    let lu = Lu::factor(m)?;
    let inv = lu.inverse();
    let condition = m.norm_1() * inv.norm_1();
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(NumericsError::Singular { condition });
    }
    Ok(inv)
}
