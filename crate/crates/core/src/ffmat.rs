//! Exact linear algebra over prime fields GF(p).
//!
//! Matrices are dense and row-major. A [`Subspace`] is stored by its reduced
//! row-echelon basis, so two subspaces are equal exactly when their basis
//! matrices are identical.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FfError {
    #[error("{0} is not a prime in [2, 65536)")]
    NotPrime(u32),
    #[error("field mismatch: GF({0}) vs GF({1})")]
    FieldMismatch(u32, u32),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("entry {value} out of range for GF({p})")]
    EntryOutOfRange { value: u32, p: u32 },
    #[error("malformed matrix: {0}")]
    Malformed(String),
    #[error("enumeration of {count} subspaces exceeds cap {cap}")]
    CapExceeded { count: u128, cap: u128 },
}

pub type Result<T> = std::result::Result<T, FfError>;

/// Prime modulus of a finite field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct FieldPrime(u32);

impl TryFrom<u32> for FieldPrime {
    type Error = FfError;
    fn try_from(p: u32) -> Result<Self> {
        FieldPrime::new(p)
    }
}

impl From<FieldPrime> for u32 {
    fn from(p: FieldPrime) -> u32 {
        p.0
    }
}

impl fmt::Display for FieldPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.0)
    }
}

impl FieldPrime {
    pub fn new(p: u32) -> Result<Self> {
        if !(2..65536).contains(&p) || (2..p).take_while(|d| d * d <= p).any(|d| p % d == 0) {
            return Err(FfError::NotPrime(p));
        }
        Ok(FieldPrime(p))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn reduce(self, v: i64) -> u32 {
        v.rem_euclid(self.0 as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    /// Multiplicative inverse; `a` must be nonzero.
    pub fn inv(self, a: u32) -> u32 {
        debug_assert!(a % self.0 != 0);
        let mut result = 1u64;
        let mut base = a as u64 % self.0 as u64;
        let mut e = self.0 - 2;
        let m = self.0 as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base % m;
            }
            base = base * base % m;
            e >>= 1;
        }
        result as u32
    }
}

/// Dense matrix over GF(p).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix {
    p: FieldPrime,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr { p: self.p.get(), rows: self.rows, cols: self.cols, data: self.data.clone() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MatrixRepr::deserialize(d)?;
        let p = FieldPrime::new(r.p).map_err(serde::de::Error::custom)?;
        Matrix::from_data(p, r.rows, r.cols, r.data).map_err(serde::de::Error::custom)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p)?;
        f.debug_list().entries(self.data.chunks(self.cols.max(1)).take(self.rows)).finish()
    }
}

impl Matrix {
    pub fn zeros(p: FieldPrime, rows: usize, cols: usize) -> Self {
        Matrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: FieldPrime, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_data(p: FieldPrime, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(FfError::Malformed(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(&value) = data.iter().find(|&&v| v >= p.get()) {
            return Err(FfError::EntryOutOfRange { value, p: p.get() });
        }
        Ok(Matrix { p, rows, cols, data })
    }

    /// Builds a matrix from integer rows, reducing every entry mod p.
    pub fn from_rows<R: AsRef<[i64]>>(p: FieldPrime, rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(FfError::Malformed("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().map(|&v| p.reduce(v))).collect();
        Ok(Matrix { p, rows: rows.len(), cols, data })
    }

    pub fn scalar(p: FieldPrime, n: usize, c: i64) -> Self {
        let mut m = Self::zeros(p, n, n);
        let c = p.reduce(c);
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    #[inline]
    pub fn field(&self) -> FieldPrime {
        self.p
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
    pub fn data(&self) -> &[u32] {
        &self.data
    }
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.p.get();
    }
    #[inline]
    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    fn same_shape(&self, other: &Matrix) -> Result<()> {
        if self.p != other.p {
            return Err(FfError::FieldMismatch(self.p.get(), other.p.get()));
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(FfError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        let p = self.p;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| p.add(a, b)).collect();
        Ok(self.with_data(data))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        let p = self.p;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| p.sub(a, b)).collect();
        Ok(self.with_data(data))
    }

    pub fn neg(&self) -> Matrix {
        let p = self.p;
        self.with_data(self.data.iter().map(|&a| p.neg(a)).collect())
    }

    pub fn scale(&self, c: u32) -> Matrix {
        let p = self.p;
        self.with_data(self.data.iter().map(|&a| p.mul(a, c)).collect())
    }

    fn with_data(&self, data: Vec<u32>) -> Matrix {
        Matrix { p: self.p, rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.p != other.p {
            return Err(FfError::FieldMismatch(self.p.get(), other.p.get()));
        }
        if self.cols != other.rows {
            return Err(FfError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let m = self.p.get() as u64;
        let mut out = Matrix::zeros(self.p, self.rows, other.cols);
        let mut acc = vec![0u64; other.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..self.cols {
                let a = self.get(i, k) as u64;
                if a == 0 {
                    continue;
                }
                for (j, slot) in acc.iter_mut().enumerate() {
                    *slot = (*slot + a * other.get(k, j) as u64) % m;
                }
            }
            for (j, &v) in acc.iter().enumerate() {
                out.data[i * other.cols + j] = v as u32;
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.p != other.p {
            return Err(FfError::FieldMismatch(self.p.get(), other.p.get()));
        }
        if self.cols != other.cols {
            return Err(FfError::DimensionMismatch(format!(
                "vstack of {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix { p: self.p, rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.p != other.p {
            return Err(FfError::FieldMismatch(self.p.get(), other.p.get()));
        }
        if self.rows != other.rows {
            return Err(FfError::DimensionMismatch(format!(
                "hstack of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Matrix { p: self.p, rows: self.rows, cols, data })
    }

    /// Columns `start..end` as a new matrix.
    pub fn column_block(&self, start: usize, end: usize) -> Matrix {
        let cols = end - start;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(&self.row(r)[start..end]);
        }
        Matrix { p: self.p, rows: self.rows, cols, data }
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> Matrix {
        Matrix {
            p: self.p,
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// In-place Gauss-Jordan elimination on the first `ncols` columns.
    /// Returns the pivot columns. Row operations are applied to whole rows,
    /// so trailing columns act as an augmentation.
    fn eliminate(&mut self, ncols: usize) -> Vec<usize> {
        let p = self.p;
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..ncols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..cols {
                    self.data.swap(pr * cols + j, r * cols + j);
                }
            }
            let inv = p.inv(self.data[r * cols + c]);
            if inv != 1 {
                for j in 0..cols {
                    self.data[r * cols + j] = p.mul(self.data[r * cols + j], inv);
                }
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.data[i * cols + c];
                if f == 0 {
                    continue;
                }
                for j in 0..cols {
                    let v = p.mul(f, self.data[r * cols + j]);
                    self.data[i * cols + j] = p.sub(self.data[i * cols + j], v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Reduced row-echelon form (same shape; zero rows at the bottom).
    pub fn rref(&self) -> Matrix {
        let mut m = self.clone();
        m.eliminate(m.cols);
        m
    }

    /// RREF together with the pivot column list.
    pub fn rref_with_pivots(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let piv = m.eliminate(m.cols);
        (m, piv)
    }

    pub fn rank(&self) -> usize {
        self.rref_with_pivots().1.len()
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = self.hstack(&Matrix::identity(self.p, n)).ok()?;
        let piv = aug.eliminate(n);
        if piv.len() != n {
            return None;
        }
        Some(aug.column_block(n, 2 * n))
    }

    /// Returns `(rref, p)` with `p` invertible and `p * self = rref`.
    pub fn rref_transform(&self) -> (Matrix, Matrix, Vec<usize>) {
        let n = self.cols;
        let mut aug = self.hstack(&Matrix::identity(self.p, self.rows)).expect("same field");
        let piv = aug.eliminate(n);
        (aug.column_block(0, n), aug.column_block(n, n + self.rows), piv)
    }

    /// A matrix `x` with `self * x * self = self`.
    ///
    /// With `P * A = R` in reduced echelon form and `Y` the selector sending
    /// the i-th unit vector to the i-th pivot column, `x = Y * P`.
    pub fn quasi_inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(FfError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let (_, p_mat, piv) = self.rref_transform();
        let mut y = Matrix::zeros(self.p, self.cols, self.rows);
        for (i, &c) in piv.iter().enumerate() {
            y.data[c * self.rows + i] = 1;
        }
        y.mul(&p_mat)
    }

    /// Right null space `{v : self * v = 0}` as a subspace of column vectors.
    pub fn kernel(&self) -> Subspace {
        let (r, piv) = self.rref_with_pivots();
        let n = self.cols;
        let free: Vec<usize> = (0..n).filter(|c| !piv.contains(c)).collect();
        let mut basis = Matrix::zeros(self.p, free.len(), n);
        for (k, &f) in free.iter().enumerate() {
            basis.data[k * n + f] = 1;
            for (i, &pc) in piv.iter().enumerate() {
                basis.data[k * n + pc] = self.p.neg(r.get(i, f));
            }
        }
        Subspace::from_basis_unchecked(self.p, n, basis.rref_nonzero())
    }

    /// Solves `self * x = b`; `None` if inconsistent.
    pub fn solve(&self, b: &Matrix) -> Result<Option<Matrix>> {
        if self.p != b.p {
            return Err(FfError::FieldMismatch(self.p.get(), b.p.get()));
        }
        if self.rows != b.rows {
            return Err(FfError::DimensionMismatch(format!(
                "solve with {} rows vs right side {} rows",
                self.rows, b.rows
            )));
        }
        let n = self.cols;
        let mut aug = self.hstack(b)?;
        let piv = aug.eliminate(n);
        // inconsistent if a zero row on the left has nonzero right part
        for i in piv.len()..aug.rows {
            if aug.row(i)[n..].iter().any(|&v| v != 0) {
                return Ok(None);
            }
        }
        let mut x = Matrix::zeros(self.p, n, b.cols);
        for (i, &c) in piv.iter().enumerate() {
            for j in 0..b.cols {
                x.data[c * b.cols + j] = aug.get(i, n + j);
            }
        }
        Ok(Some(x))
    }

    fn rref_nonzero(&self) -> Matrix {
        let (mut r, piv) = self.rref_with_pivots();
        r.rows = piv.len();
        r.data.truncate(piv.len() * r.cols);
        r
    }

    /// Row-major enumeration of every `rows x cols` matrix, in lexicographic
    /// order of the entry vector.
    pub fn all(p: FieldPrime, rows: usize, cols: usize) -> impl Iterator<Item = Matrix> {
        let n = rows * cols;
        let total = (p.get() as u128).pow(n as u32);
        (0..total).map(move |mut k| {
            let mut data = vec![0u32; n];
            for slot in data.iter_mut().rev() {
                *slot = (k % p.get() as u128) as u32;
                k /= p.get() as u128;
            }
            Matrix { p, rows, cols, data }
        })
    }
}

/// Linear subspace of GF(p)^n, stored by its canonical RREF basis.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    p: FieldPrime,
    ambient: usize,
    basis: Matrix,
}

#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    p: u32,
    ambient: usize,
    basis: Vec<Vec<u32>>,
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceRepr { p: self.p.get(), ambient: self.ambient, basis: self.basis.to_rows() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SubspaceRepr::deserialize(d)?;
        let p = FieldPrime::new(r.p).map_err(serde::de::Error::custom)?;
        let rows: Vec<Vec<i64>> =
            r.basis.iter().map(|row| row.iter().map(|&v| v as i64).collect()).collect();
        if rows.iter().any(|row| row.len() != r.ambient) {
            return Err(serde::de::Error::custom("basis row length differs from ambient"));
        }
        Subspace::span(p, r.ambient, &rows).map_err(serde::de::Error::custom)
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for r in 0..self.basis.rows() {
            if r > 0 {
                write!(f, ", ")?;
            }
            write!(f, "(")?;
            for (i, v) in self.basis.row(r).iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, ")")?;
        }
        write!(f, ">")
    }
}

impl Subspace {
    fn from_basis_unchecked(p: FieldPrime, ambient: usize, basis: Matrix) -> Self {
        debug_assert_eq!(basis.cols, ambient);
        Subspace { p, ambient, basis }
    }

    /// Row space of an arbitrary matrix.
    pub fn row_space(m: &Matrix) -> Subspace {
        Subspace { p: m.p, ambient: m.cols, basis: m.rref_nonzero() }
    }

    /// Column space of an arbitrary matrix.
    pub fn column_space(m: &Matrix) -> Subspace {
        Subspace::row_space(&m.transpose())
    }

    /// Span of integer vectors (reduced mod p).
    pub fn span<R: AsRef<[i64]>>(p: FieldPrime, ambient: usize, vectors: &[R]) -> Result<Self> {
        if vectors.iter().any(|v| v.as_ref().len() != ambient) {
            return Err(FfError::DimensionMismatch("vector length differs from ambient".into()));
        }
        if vectors.is_empty() {
            return Ok(Subspace::zero(p, ambient));
        }
        Ok(Subspace::row_space(&Matrix::from_rows(p, vectors)?))
    }

    pub fn zero(p: FieldPrime, ambient: usize) -> Self {
        Subspace { p, ambient, basis: Matrix::zeros(p, 0, ambient) }
    }

    pub fn full(p: FieldPrime, ambient: usize) -> Self {
        Subspace { p, ambient, basis: Matrix::identity(p, ambient) }
    }

    #[inline]
    pub fn field(&self) -> FieldPrime {
        self.p
    }
    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }
    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.rows
    }
    #[inline]
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.rows == 0
    }

    pub fn is_full(&self) -> bool {
        self.basis.rows == self.ambient
    }

    fn compatible(&self, other: &Subspace) -> Result<()> {
        if self.p != other.p {
            return Err(FfError::FieldMismatch(self.p.get(), other.p.get()));
        }
        if self.ambient != other.ambient {
            return Err(FfError::DimensionMismatch(format!(
                "ambient {} vs {}",
                self.ambient, other.ambient
            )));
        }
        Ok(())
    }

    /// Join `u + w`.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.compatible(other)?;
        if other.is_zero() || self.is_full() {
            return Ok(self.clone());
        }
        if self.is_zero() || other.is_full() {
            return Ok(other.clone());
        }
        Ok(Subspace::row_space(&self.basis.vstack(&other.basis)?))
    }

    /// Meet `u ∩ w` by the Zassenhaus construction.
    pub fn meet(&self, other: &Subspace) -> Result<Subspace> {
        self.compatible(other)?;
        if self.is_zero() || other.is_full() {
            return Ok(self.clone());
        }
        if other.is_zero() || self.is_full() {
            return Ok(other.clone());
        }
        let n = self.ambient;
        let top = self.basis.hstack(&self.basis)?;
        let bottom = other.basis.hstack(&Matrix::zeros(self.p, other.dim(), n))?;
        let (r, piv) = top.vstack(&bottom)?.rref_with_pivots();
        let rows: Vec<usize> =
            piv.iter().enumerate().filter(|(_, &c)| c >= n).map(|(i, _)| i).collect();
        let mut basis = Matrix::zeros(self.p, rows.len(), n);
        for (k, &i) in rows.iter().enumerate() {
            basis.data[k * n..(k + 1) * n].copy_from_slice(&r.row(i)[n..]);
        }
        // already in RREF: pivots of the right half are increasing and cleared
        Ok(Subspace { p: self.p, ambient: n, basis })
    }

    /// Reduces `v` modulo the subspace; the result is the canonical coset
    /// representative (zero at every pivot column).
    pub fn reduce(&self, v: &[u32]) -> Vec<u32> {
        let mut out = v.to_vec();
        let p = self.p;
        for r in 0..self.basis.rows {
            let row = self.basis.row(r);
            let pc = row.iter().position(|&x| x != 0).expect("rref rows are nonzero");
            let f = out[pc];
            if f != 0 {
                for (o, &b) in out.iter_mut().zip(row) {
                    *o = p.sub(*o, p.mul(f, b));
                }
            }
        }
        out
    }

    pub fn contains_vector(&self, v: &[u32]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// `self ⊆ other`.
    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        (0..self.basis.rows).all(|r| other.contains_vector(self.basis.row(r)))
    }

    /// Pivot column of every basis row.
    pub fn pivots(&self) -> Vec<usize> {
        (0..self.basis.rows)
            .map(|r| self.basis.row(r).iter().position(|&x| x != 0).unwrap())
            .collect()
    }

    /// A complement spanned by standard unit vectors at the non-pivot columns.
    pub fn standard_complement(&self) -> Subspace {
        let piv = self.pivots();
        let free: Vec<usize> = (0..self.ambient).filter(|c| !piv.contains(c)).collect();
        let mut basis = Matrix::zeros(self.p, free.len(), self.ambient);
        for (k, &c) in free.iter().enumerate() {
            basis.data[k * self.ambient + c] = 1;
        }
        Subspace { p: self.p, ambient: self.ambient, basis }
    }

    /// Coordinates of `v` in the concatenated bases of `parts`, which must form
    /// a direct sum containing `v`. Returns one coefficient vector per part.
    pub fn decompose(v: &[u32], parts: &[&Subspace]) -> Option<Vec<Vec<u32>>> {
        let p = parts.first()?.p;
        let mut stacked = Matrix::zeros(p, 0, v.len());
        for s in parts {
            stacked = stacked.vstack(&s.basis).ok()?;
        }
        let target = Matrix::from_data(p, v.len(), 1, v.to_vec()).ok()?;
        let x = stacked.transpose().solve(&target).ok()??;
        let mut out = Vec::new();
        let mut offset = 0;
        for s in parts {
            out.push((0..s.dim()).map(|i| x.get(offset + i, 0)).collect());
            offset += s.dim();
        }
        Some(out)
    }

    /// Number of subspaces of GF(p)^n (sum of Gaussian binomials).
    pub fn count_all(p: FieldPrime, n: usize) -> u128 {
        let q = p.get() as u128;
        let mut total = 0u128;
        for k in 0..=n {
            let mut num = 1u128;
            let mut den = 1u128;
            for i in 0..k {
                num = num.saturating_mul(q.saturating_pow((n - i) as u32) - 1);
                den = den.saturating_mul(q.saturating_pow((i + 1) as u32) - 1);
            }
            total = total.saturating_add(num / den);
        }
        total
    }

    /// Every subspace of GF(p)^n: by dimension, then pivot set in lexicographic
    /// order, then free entries in lexicographic order.
    pub fn enumerate_all(p: FieldPrime, n: usize, cap: u128) -> Result<Vec<Subspace>> {
        let count = Subspace::count_all(p, n);
        if count > cap {
            return Err(FfError::CapExceeded { count, cap });
        }
        let mut out = Vec::with_capacity(count as usize);
        for k in 0..=n {
            for pivots in combinations(n, k) {
                // free positions: row i, column c > pivots[i], c not a pivot
                let free: Vec<(usize, usize)> = (0..k)
                    .flat_map(|i| {
                        let piv = &pivots;
                        ((piv[i] + 1)..n).filter(move |c| !piv.contains(c)).map(move |c| (i, c))
                    })
                    .collect();
                let total = (p.get() as u128).pow(free.len() as u32);
                for mut code in 0..total {
                    let mut basis = Matrix::zeros(p, k, n);
                    for (i, &c) in pivots.iter().enumerate() {
                        basis.data[i * n + c] = 1;
                    }
                    for &(i, c) in free.iter().rev() {
                        basis.data[i * n + c] = (code % p.get() as u128) as u32;
                        code /= p.get() as u128;
                    }
                    out.push(Subspace { p, ambient: n, basis });
                }
            }
        }
        Ok(out)
    }
}

/// k-subsets of 0..n in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Index of a vector of GF(p)^n in base-p order (first coordinate most significant).
pub fn vector_index(p: FieldPrime, v: &[u32]) -> usize {
    v.iter().fold(0usize, |acc, &x| acc * p.get() as usize + x as usize)
}

/// Inverse of [`vector_index`].
pub fn vector_at(p: FieldPrime, n: usize, mut idx: usize) -> Vec<u32> {
    let mut v = vec![0u32; n];
    for slot in v.iter_mut().rev() {
        *slot = (idx % p.get() as usize) as u32;
        idx /= p.get() as usize;
    }
    v
}
