//! Tridiagonal matrices: solves, inertia counts and bisection eigenvalues.
//!
//! Row `i` is `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1]`; `sub[0]` and
//! `sup[n-1]` are ignored.

use crate::error::{Error, Result};
use crate::scalar::{Field, Real};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tridiagonal<S> {
    pub sub: Vec<S>,
    pub diag: Vec<S>,
    pub sup: Vec<S>,
}

impl<S: Field> Tridiagonal<S> {
    pub fn new(sub: Vec<S>, diag: Vec<S>, sup: Vec<S>) -> Result<Self> {
        let n = diag.len();
        if sub.len() != n || sup.len() != n {
            return Err(Error::Dimension("tridiagonal band lengths differ".into()));
        }
        Ok(Self { sub, diag, sup })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.sub[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.sup[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// `self - z I`.
    pub fn shifted(&self, z: S) -> Self {
        Self {
            sub: self.sub.clone(),
            diag: self.diag.iter().map(|&d| d - z).collect(),
            sup: self.sup.clone(),
        }
    }

    /// Thomas algorithm without pivoting.
    pub fn solve(&self, b: &[S]) -> Result<Vec<S>> {
        let n = self.len();
        if b.len() != n {
            return Err(Error::Dimension("rhs length".into()));
        }
        let mut c = vec![S::zero(); n];
        let mut d = vec![S::zero(); n];
        let mut m = self.diag[0];
        if m.modulus() == S::R::zero() {
            return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
        }
        c[0] = self.sup[0] / m;
        d[0] = b[0] / m;
        for i in 1..n {
            m = self.diag[i] - self.sub[i] * c[i - 1];
            if m.modulus() == S::R::zero() {
                return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
            }
            c[i] = if i + 1 < n { self.sup[i] / m } else { S::zero() };
            d[i] = (b[i] - self.sub[i] * d[i - 1]) / m;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let t = c[i] * d[i + 1];
            d[i] -= t;
        }
        Ok(d)
    }

    /// Gaussian elimination with partial pivoting (row interchanges fill a
    /// second superdiagonal). Stable for indefinite matrices.
    pub fn solve_pivoted(&self, b: &[S]) -> Result<Vec<S>> {
        let n = self.len();
        if b.len() != n {
            return Err(Error::Dimension("rhs length".into()));
        }
        let singular = || Error::Singular("singular tridiagonal matrix".into());
        let mut x = b.to_vec();
        if n == 0 {
            return Ok(x);
        }
        let mut d = self.diag.clone();
        let mut du: Vec<S> = self.sup[..n - 1].to_vec();
        // dl holds the subdiagonal, then the second superdiagonal
        let mut dl: Vec<S> = self.sub[1..].to_vec();
        for i in 0..n - 1 {
            if d[i].modulus() >= dl[i].modulus() {
                if d[i].modulus() == S::R::zero() {
                    return Err(singular());
                }
                let f = dl[i] / d[i];
                d[i + 1] = d[i + 1] - f * du[i];
                x[i + 1] = x[i + 1] - f * x[i];
                dl[i] = S::zero();
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                let t = d[i + 1];
                d[i + 1] = du[i] - f * t;
                if i + 1 < n - 1 {
                    dl[i] = du[i + 1];
                    du[i + 1] = -f * dl[i];
                } else {
                    dl[i] = S::zero();
                }
                du[i] = t;
                let t = x[i];
                x[i] = x[i + 1];
                x[i + 1] = t - f * x[i + 1];
            }
        }
        if d[n - 1].modulus() == S::R::zero() {
            return Err(singular());
        }
        x[n - 1] = x[n - 1] / d[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - dl[i] * x[i + 2]) / d[i];
        }
        Ok(x)
    }
}

impl<T: Real> Tridiagonal<T> {
    /// Symmetrised off-diagonal squares `sub[i+1] * sup[i]`; the matrix is
    /// similar to a symmetric one when all are positive.
    pub fn offdiag_products(&self) -> Vec<T> {
        (0..self.len().saturating_sub(1)).map(|i| self.sub[i + 1] * self.sup[i]).collect()
    }

    /// Number of eigenvalues strictly below `x`, for a matrix whose
    /// off-diagonal products are nonnegative.
    pub fn count_below(&self, x: T) -> usize {
        let e2 = self.offdiag_products();
        let tiny = T::min_positive_value().sqrt();
        let mut count = 0;
        let mut d = T::zero();
        for i in 0..self.len() {
            d = if i == 0 { self.diag[0] - x } else { self.diag[i] - x - e2[i - 1] / d };
            if d.abs() < tiny {
                d = -tiny;
            }
            if d < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut r = T::zero();
            if i > 0 {
                r += self.sub[i].abs();
            }
            if i + 1 < n {
                r += self.sup[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th eigenvalue counted from the top (`k = 0` is the largest).
    pub fn eigenvalue_from_top(&self, k: usize) -> Result<T> {
        let n = self.len();
        if k >= n {
            return Err(Error::Domain(format!("index {k} for order {n}")));
        }
        let (mut lo, mut hi) = self.gershgorin();
        let pad = T::lit(1e-9) * T::one().max(lo.abs().max(hi.abs()));
        lo -= pad;
        hi += pad;
        // want λ with exactly n-1-k eigenvalues below it
        let target = n - 1 - k;
        for _ in 0..200 {
            let mid = (lo + hi) / T::lit(2.0);
            if self.count_below(mid) > target {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= T::epsilon() * T::lit(4.0) * T::one().max(mid.abs()) {
                break;
            }
        }
        Ok((lo + hi) / T::lit(2.0))
    }

    /// Log-magnitude and sign of the determinant of `self - x I` by the
    /// three-term recurrence, rescaled to avoid overflow.
    pub fn log_det_shifted(&self, x: T) -> (T, T) {
        let n = self.len();
        let mut log = T::zero();
        let mut sign = T::one();
        // ratio form: r_i = det_i / det_{i-1}
        let mut r = self.diag[0] - x;
        let e2 = self.offdiag_products();
        for i in 0..n {
            if i > 0 {
                r = self.diag[i] - x - e2[i - 1] / r;
            }
            if r == T::zero() {
                return (T::neg_infinity(), T::zero());
            }
            log += r.abs().ln();
            if r < T::zero() {
                sign = -sign;
            }
        }
        (log, sign)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pivoted_solve_handles_zero_leading_pivot() {
        let t =
            Tridiagonal::new(vec![0.0, 1.0, 2.0, -1.0], vec![0.0, 3.0, 0.5, 1.0], vec![2.0, 1.0, -4.0, 0.0])
                .unwrap();
        let x = [1.0f64, -2.0, 0.5, 3.0];
        let b = t.matvec(&x);
        assert!(t.solve(&b).is_err());
        let got = t.solve_pivoted(&b).unwrap();
        for (g, w) in got.iter().zip(&x) {
            assert!((g - w).abs() < 1e-13);
        }
    }

    fn laplacian(n: usize) -> Tridiagonal<f64> {
        Tridiagonal::new(vec![1.0; n], vec![-2.0; n], vec![1.0; n]).unwrap()
    }

    #[test]
    fn dirichlet_laplacian_eigenvalues() {
        let n = 20;
        let t = laplacian(n);
        for k in 0..n {
            let want = -2.0 + 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos();
            let got = t.eigenvalue_from_top(k).unwrap();
            assert!((got - want).abs() < 1e-12, "{k}: {got} vs {want}");
        }
    }

    #[test]
    fn thomas_solves() {
        let t = laplacian(7);
        let b: Vec<f64> = (0..7).map(|i| i as f64 - 2.0).collect();
        let x = t.solve(&b).unwrap();
        let r = t.matvec(&x);
        for (p, q) in r.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn log_det_matches_product_of_eigenvalues() {
        let t = laplacian(6);
        let (l, s) = t.log_det_shifted(0.3);
        let prod: f64 = (0..6).map(|k| t.eigenvalue_from_top(k).unwrap() - 0.3).product();
        assert!((l.exp() * s - prod).abs() < 1e-9 * prod.abs());
    }
}
