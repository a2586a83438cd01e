//! Row-major dense matrices with partial-pivot LU.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Field, Real};
use num_traits::{Float, Zero};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Field> DenseMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!("{} entries for a {}x{} matrix", data.len(), rows, cols)));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.concat() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(d: &[S]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
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
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map<U: Field>(&self, f: impl Fn(S) -> U) -> DenseMatrix<U> {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn scale(&self, s: S) -> Self {
        self.map(|x| x * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    /// `self + s * u vᵀ`.
    pub fn rank_one_update(&self, s: S, u: &[S], v: &[S]) -> Result<Self> {
        if u.len() != self.rows || v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "outer product {}x{} onto {}x{}",
                u.len(),
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            let ui = s * u[i];
            for j in 0..self.cols {
                out[(i, j)] += ui * v[j];
            }
        }
        Ok(out)
    }

    /// `self - z I`.
    pub fn shift(&self, z: S) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            out[(i, i)] -= z;
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == S::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.cols, "matvec length");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).fold(S::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> S::R {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(S::R::zero(), |acc, x| acc + x.modulus()))
            .fold(S::R::zero(), |a, b| a.max(b))
    }

    pub fn norm_fro(&self) -> S::R {
        self.data.iter().fold(S::R::zero(), |acc, x| acc + x.modulus() * x.modulus()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.modulus().is_finite())
    }

    pub fn lu(&self) -> Result<Lu<S>> {
        Lu::new(self)
    }

    pub fn det(&self) -> Result<S> {
        Ok(self.lu()?.det())
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

impl<T: Real> DenseMatrix<T> {
    pub fn to_complex(&self) -> DenseMatrix<Complex<T>> {
        self.map(|x| Complex::new(x, T::zero()))
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = T::one().max(self.norm_inf());
        (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol * scale))
    }
}

impl<S> Index<(usize, usize)> for DenseMatrix<S> {
    type Output = S;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for DenseMatrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// Packed LU factors with row pivots. A zero pivot is kept, so `det` of a
/// singular matrix is exactly zero and `solve` reports it.
#[derive(Clone, Debug)]
pub struct Lu<S> {
    lu: DenseMatrix<S>,
    perm: Vec<usize>,
    sign_flips: usize,
    singular: bool,
}

impl<S: Field> Lu<S> {
    fn new(a: &DenseMatrix<S>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare { rows: a.rows, cols: a.cols });
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut flips = 0;
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].modulus();
            for i in k + 1..n {
                let v = lu[(i, k)].modulus();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                flips += 1;
            }
            let piv = lu[(k, k)];
            if piv == S::zero() {
                singular = true;
                continue;
            }
            for i in k + 1..n {
                let m = lu[(i, k)] / piv;
                lu[(i, k)] = m;
                if m == S::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let t = lu[(k, j)];
                    lu[(i, j)] -= m * t;
                }
            }
        }
        Ok(Self { lu, perm, sign_flips: flips, singular })
    }

    pub fn det(&self) -> S {
        let n = self.lu.rows;
        let mut d = if self.sign_flips % 2 == 0 { S::one() } else { -S::one() };
        for i in 0..n {
            d *= self.lu[(i, i)];
        }
        d
    }

    /// Smallest pivot modulus relative to the largest; a cheap conditioning hint.
    pub fn pivot_ratio(&self) -> S::R {
        let n = self.lu.rows;
        let mut lo = S::R::infinity();
        let mut hi = S::R::zero();
        for i in 0..n {
            let v = self.lu[(i, i)].modulus();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi == S::R::zero() {
            S::R::zero()
        } else {
            lo / hi
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve(&self, b: &[S]) -> Result<Vec<S>> {
        let n = self.lu.rows;
        if b.len() != n {
            return Err(Error::Dimension(format!("rhs length {} for order {}", b.len(), n)));
        }
        if self.singular {
            return Err(Error::Singular("zero pivot in LU".into()));
        }
        let mut x: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[S]) -> Result<Vec<S>> {
        let n = self.lu.rows;
        if b.len() != n {
            return Err(Error::Dimension(format!("rhs length {} for order {}", b.len(), n)));
        }
        if self.singular {
            return Err(Error::Singular("zero pivot in LU".into()));
        }
        // Uᵀ y = b, then Lᵀ z = y, then x = Pᵀ z.
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[(j, i)] * y[j];
            }
            y[i] = s / self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[(j, i)] * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![S::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        Ok(x)
    }
}

/// Plain dot product without conjugation.
pub fn dot<S: Field>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm2<S: Field>(a: &[S]) -> S::R {
    a.iter().fold(S::R::zero(), |acc, x| acc + x.modulus() * x.modulus()).sqrt()
}
