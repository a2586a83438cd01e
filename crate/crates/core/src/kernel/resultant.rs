//! Sylvester resultant.

use super::matrix::DenseMatrix;
use super::poly::Poly;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sylvester matrix of `p` (degree m) and `q` (degree n), order m + n.
pub fn sylvester<T: Real>(p: &Poly<T>, q: &Poly<T>) -> Result<DenseMatrix<T>> {
    let m = p.degree().ok_or(Error::ZeroPolynomial)?;
    let n = q.degree().ok_or(Error::ZeroPolynomial)?;
    let size = m + n;
    let mut s = DenseMatrix::zeros(size, size);
    for i in 0..n {
        for k in 0..=m {
            s[(i, i + k)] = p.coeff(m - k);
        }
    }
    for i in 0..m {
        for k in 0..=n {
            s[(n + i, i + k)] = q.coeff(n - k);
        }
    }
    Ok(s)
}

/// Resultant of two nonzero polynomials. Two constants give 1.
pub fn resultant<T: Real>(p: &Poly<T>, q: &Poly<T>) -> Result<T> {
    let s = sylvester(p, q)?;
    if s.rows() == 0 {
        return Ok(T::one());
    }
    s.det()
}
