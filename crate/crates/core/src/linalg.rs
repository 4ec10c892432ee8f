//! Dense vectors, norms, and a minimal row-major matrix.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Neg, Sub};

use crate::error::{check_dim, Result, UmdError};
use crate::math;

/// Dense real vector. Primal points, dual points and increments all use it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Builds a vector, rejecting NaN and infinite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(UmdError::Argument(alloc::format!(
                "non-finite entry {} at index {i}",
                entries[i]
            )));
        }
        Ok(Vector(entries))
    }

    /// Builds a vector without the finiteness check. Used on internal
    /// arithmetic results.
    pub fn from_vec(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn from_slice(entries: &[f64]) -> Self {
        Vector(entries.to_vec())
    }

    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Vector(vec![value; n])
    }

    /// The `i`-th standard basis vector of dimension `n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = 1.0;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm2(&self) -> f64 {
        math::sqrt(self.dot(self))
    }

    pub fn norm1(&self) -> f64 {
        self.0.iter().map(|v| math::abs(*v)).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| f64::max(m, math::abs(*v)))
    }

    pub fn norm(&self, tag: NormTag) -> f64 {
        match tag {
            NormTag::L1 => self.norm1(),
            NormTag::L2 => self.norm2(),
            NormTag::LInf => self.norm_inf(),
        }
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * factor).collect())
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        )
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector(self.0.iter().map(|v| f(*v)).collect())
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        (self - other).norm2()
    }

    /// Concatenates blocks into one vector.
    pub fn concat(blocks: &[Vector]) -> Vector {
        Vector(blocks.iter().flat_map(|b| b.0.iter().copied()).collect())
    }

    /// Splits into consecutive blocks of the given lengths.
    pub fn split(&self, lengths: &[usize]) -> Vec<Vector> {
        let mut out = Vec::with_capacity(lengths.len());
        let mut start = 0;
        for &len in lengths {
            out.push(Vector(self.0[start..start + len].to_vec()));
            start += len;
        }
        out
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.len(), rhs.len());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.len(), rhs.len());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(self.0.iter().map(|v| -v).collect())
    }
}

/// Reference norm kinds. Dual of L1 is LInf and vice versa; L2 is self-dual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormTag {
    L1,
    L2,
    LInf,
}

impl NormTag {
    pub fn dual(self) -> NormTag {
        match self {
            NormTag::L1 => NormTag::LInf,
            NormTag::L2 => NormTag::L2,
            NormTag::LInf => NormTag::L1,
        }
    }
}

/// Dual norm `||v||_*` of `v` for the primal norm `tag`.
pub fn dual_norm(tag: NormTag, v: &Vector) -> f64 {
    v.norm(tag.dual())
}

/// A norm on a product space: `sqrt(sum_b ||v_b||_b^2)` over consecutive
/// blocks. A single block is just the tagged norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceNorm {
    blocks: Vec<(usize, NormTag)>,
}

impl ReferenceNorm {
    pub fn single(dim: usize, tag: NormTag) -> Self {
        ReferenceNorm {
            blocks: vec![(dim, tag)],
        }
    }

    pub fn product(parts: &[ReferenceNorm]) -> Self {
        ReferenceNorm {
            blocks: parts.iter().flat_map(|p| p.blocks.iter().copied()).collect(),
        }
    }

    pub fn blocks(&self) -> &[(usize, NormTag)] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.0).sum()
    }

    /// The tag when this is a single-block norm.
    pub fn tag(&self) -> Option<NormTag> {
        match self.blocks.as_slice() {
            [(_, tag)] => Some(*tag),
            _ => None,
        }
    }

    pub fn norm(&self, v: &Vector) -> f64 {
        self.combine(v, false)
    }

    pub fn dual_norm(&self, v: &Vector) -> f64 {
        self.combine(v, true)
    }

    fn combine(&self, v: &Vector, dual: bool) -> f64 {
        if let Some(tag) = self.tag() {
            return v.norm(if dual { tag.dual() } else { tag });
        }
        let mut start = 0;
        let mut acc = 0.0;
        for &(len, tag) in &self.blocks {
            let block = Vector::from_slice(&v.as_slice()[start..start + len]);
            let n = block.norm(if dual { tag.dual() } else { tag });
            acc += n * n;
            start += len;
        }
        math::sqrt(acc)
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(rows * cols, data.len())?;
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds from row vectors; all rows must share a length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim(cols, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| f64::max(m, math::abs(*v)))
    }

    /// `A v`.
    pub fn mul_vec(&self, v: &Vector) -> Vector {
        debug_assert_eq!(self.cols, v.len());
        Vector::from_vec(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(v.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    /// `A^T v`.
    pub fn tr_mul_vec(&self, v: &Vector) -> Vector {
        debug_assert_eq!(self.rows, v.len());
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        Vector::from_vec(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `A^T A`.
    pub fn gram(&self) -> Matrix {
        let n = self.cols;
        let mut g = Matrix::zeros(n, n);
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..n {
                if r[a] == 0.0 {
                    continue;
                }
                for b in 0..n {
                    g.data[a * n + b] += r[a] * r[b];
                }
            }
        }
        g
    }

    /// Largest eigenvalue of `A^T A` by power iteration.
    ///
    /// Runs at least `10 * cols` iterations and stops once the Rayleigh
    /// quotient changes by less than `rel_tol` relative. The start vector is
    /// fixed so the result is deterministic.
    pub fn gram_lambda_max(&self, rel_tol: f64) -> f64 {
        power_iteration(self.cols, rel_tol, |v| self.tr_mul_vec(&self.mul_vec(v)))
    }

    /// Largest eigenvalue of a symmetric positive semidefinite matrix.
    pub fn sym_lambda_max(&self, rel_tol: f64) -> f64 {
        power_iteration(self.cols, rel_tol, |v| self.mul_vec(v))
    }
}

fn power_iteration(n: usize, rel_tol: f64, apply: impl Fn(&Vector) -> Vector) -> f64 {
    if n == 0 {
        return 0.0;
    }
    // Deterministic start with distinct entries so it is not orthogonal to
    // the top eigenvector of common structured matrices.
    let mut v = Vector::from_vec(
        (0..n)
            .map(|i| 1.0 + 0.5 * math::exp(-(i as f64) / n as f64) + 0.01 * (i % 7) as f64)
            .collect(),
    );
    let nv = v.norm2();
    v = v.scale(1.0 / nv);
    let min_iters = 10 * n;
    let max_iters = min_iters.max(20_000);
    let mut lambda = 0.0;
    for it in 0..max_iters {
        let w = apply(&v);
        let next = v.dot(&w);
        let nw = w.norm2();
        if nw == 0.0 {
            return 0.0;
        }
        v = w.scale(1.0 / nw);
        let converged = math::abs(next - lambda) <= rel_tol * math::abs(next);
        lambda = next;
        if it + 1 >= min_iters && converged {
            break;
        }
    }
    lambda
}
