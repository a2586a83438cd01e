//! Dense univariate polynomials with ascending coefficients.
//!
//! Arithmetic and Wronskians only need ring operations, so exact coefficient
//! types work too. Evaluation, root finding and tolerance trimming live in the
//! `Real` impl block.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::{is_zero, times, Coeff, Real};

/// The zero polynomial has an empty coefficient vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly<C> {
    coeffs: Vec<C>,
}

impl<C: Coeff> Poly<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::new(vec![c])
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::new(vec![C::zero(), C::one()])
    }

    /// `∏ (x - r)`.
    pub fn from_roots(roots: &[C]) -> Self {
        roots.iter().fold(Self::constant(C::one()), |acc, r| acc * Self::new(vec![-r.clone(), C::one()]))
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Coefficient of `x^k`, zero beyond the stored length.
    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| times(c, k)).collect())
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn scale(&self, s: &C) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    /// Horner evaluation in the coefficient ring.
    pub fn eval_exact(&self, x: &C) -> C {
        self.coeffs.iter().rev().fold(C::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    /// `f ∧ g = f g′ − f′ g`.
    pub fn wronskian(&self, g: &Self) -> Self {
        self.clone() * g.derivative() - self.derivative() * g.clone()
    }

    /// Determinant of `[f g h; f′ g′ h′; f″ g″ h″]`.
    pub fn wronskian3(&self, g: &Self, h: &Self) -> Self {
        let (f1, g1, h1) = (self.derivative(), g.derivative(), h.derivative());
        let (f2, g2, h2) = (f1.derivative(), g1.derivative(), h1.derivative());
        self.clone() * (g1.clone() * h2.clone() - g2.clone() * h1.clone())
            - g.clone() * (f1.clone() * h2 - f2.clone() * h1)
            + h.clone() * (f1 * g2 - f2 * g1)
    }
}

impl<T: Real> Poly<T> {
    pub fn eval(&self, x: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * z + Complex::new(c, T::zero()))
    }

    /// Value and first two derivatives at `x`.
    pub fn eval_with_derivs(&self, x: T) -> [T; 3] {
        let mut p = T::zero();
        let mut d1 = T::zero();
        let mut d2 = T::zero();
        for &c in self.coeffs.iter().rev() {
            d2 = d2 * x + d1;
            d1 = d1 * x + p;
            p = p * x + c;
        }
        [p, d1, d2 + d2]
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Self {
        let mut c = vec![T::zero()];
        c.extend(self.coeffs.iter().enumerate().map(|(k, &a)| a / T::of(k + 1)));
        Self::new(c)
    }

    /// Quotient of the division by `x - r`; the remainder is dropped.
    pub fn deflate(&self, r: T) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self::zero();
        }
        let mut q = vec![T::zero(); n - 1];
        let mut acc = T::zero();
        for k in (1..n).rev() {
            acc = acc * r + self.coeffs[k];
            q[k - 1] = acc;
        }
        Self::new(q)
    }

    /// Largest coefficient magnitude; zero for the zero polynomial.
    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn norm2(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, &c| m + c * c).sqrt()
    }

    /// Drops coefficients below `tol` (absolute) from the top.
    pub fn trimmed(&self, tol: T) -> Self {
        let mut c = self.coeffs.clone();
        while c.last().is_some_and(|x| x.abs() <= tol) {
            c.pop();
        }
        Self { coeffs: c }
    }

    /// Zeroes every coefficient below `tol` in magnitude.
    pub fn chopped(&self, tol: T) -> Self {
        Self::new(self.coeffs.iter().map(|&c| if c.abs() <= tol { T::zero() } else { c }).collect())
    }

    /// True when all coefficients are at most `tol` in magnitude.
    pub fn is_negligible(&self, tol: T) -> bool {
        self.coeffs.iter().all(|c| c.abs() <= tol)
    }

    /// Maximum coefficient difference.
    pub fn distance(&self, other: &Self) -> T {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).fold(T::zero(), |m, k| m.max((self.coeff(k) - other.coeff(k)).abs()))
    }

    pub fn to_f64(&self) -> Poly<f64> {
        Poly::new(self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect())
    }
}

impl<C: Coeff> Add for Poly<C> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<C: Coeff> Sub for Poly<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<C: Coeff> Neg for Poly<C> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl<C: Coeff> Mul for Poly<C> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }
}

impl<C: Coeff> Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: Self) -> Poly<C> {
        self.clone() + rhs.clone()
    }
}

impl<C: Coeff> Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: Self) -> Poly<C> {
        self.clone() - rhs.clone()
    }
}

impl<C: Coeff> Mul for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: Self) -> Poly<C> {
        self.clone() * rhs.clone()
    }
}

/// Free-function form of [`Poly::wronskian`].
pub fn poly_wronskian<C: Coeff>(f: &Poly<C>, g: &Poly<C>) -> Poly<C> {
    f.wronskian(g)
}

/// Free-function form of [`Poly::wronskian3`].
pub fn poly_wronskian3<C: Coeff>(f: &Poly<C>, g: &Poly<C>, h: &Poly<C>) -> Poly<C> {
    f.wronskian3(g, h)
}
