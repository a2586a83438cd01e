//! Polynomial roots via the companion matrix, Newton-polished.

use num_complex::Complex;

use super::eig::eig_dense;
use super::matrix::DenseMatrix;
use super::poly::Poly;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// All complex roots with multiplicity.
pub fn poly_roots<T: Real>(p: &Poly<T>) -> Result<Vec<Complex<T>>> {
    let d = p.degree().ok_or(Error::ZeroPolynomial)?;
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = p.coeff(d);
    let mut c = DenseMatrix::<T>::zeros(d, d);
    for i in 1..d {
        c[(i, i - 1)] = T::one();
    }
    for i in 0..d {
        c[(i, d - 1)] = -p.coeff(i) / lead;
    }
    let mut roots = eig_dense(&c)?.values;
    let dp = p.derivative();
    for z in roots.iter_mut() {
        *z = polish(p, &dp, *z);
    }
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(roots)
}

/// Newton steps accepted only while the residual drops.
fn polish<T: Real>(p: &Poly<T>, dp: &Poly<T>, mut z: Complex<T>) -> Complex<T> {
    let mut r = p.eval_complex(z).norm();
    for _ in 0..8 {
        let d = dp.eval_complex(z);
        if d.norm() == T::zero() {
            break;
        }
        let cand = z - p.eval_complex(z) / d;
        let rc = p.eval_complex(cand).norm();
        if !(rc < r) {
            break;
        }
        z = cand;
        r = rc;
    }
    z
}

/// Real parts of roots whose imaginary part is at most `imag_tol`, inside `[lo, hi]`.
pub fn real_roots_in<T: Real>(p: &Poly<T>, lo: T, hi: T, imag_tol: T) -> Result<Vec<T>> {
    Ok(poly_roots(p)?
        .into_iter()
        .filter(|z| z.im.abs() <= imag_tol && z.re >= lo && z.re <= hi)
        .map(|z| z.re)
        .collect())
}
