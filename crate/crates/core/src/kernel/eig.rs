//! Dense nonsymmetric eigensolver.
//!
//! Balancing, Householder reduction to upper Hessenberg form, then the
//! Francis double-shift QR iteration (the EISPACK `hqr` scheme). Eigenvectors
//! are obtained afterwards by complex inverse iteration. A cyclic Jacobi
//! routine covers the symmetric case where orthonormal vectors are needed.

use num_complex::Complex;

use super::matrix::{norm2, DenseMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigenvalues with optional right and left eigenvectors.
///
/// A left eigenvector `f` for `λ` satisfies `fᵀ A = λ fᵀ` (no conjugation), so
/// the pairing `fᵀ e` is bilinear as in the gain formula.
#[derive(Clone, Debug)]
pub struct Spectrum<T> {
    pub values: Vec<Complex<T>>,
    pub right: Option<Vec<Vec<Complex<T>>>>,
    pub left: Option<Vec<Vec<Complex<T>>>>,
}

impl<T: Real> Spectrum<T> {
    /// Index of the eigenvalue with the largest real part.
    pub fn dominant(&self) -> Option<usize> {
        (0..self.values.len()).max_by(|&a, &b| {
            self.values[a].re.partial_cmp(&self.values[b].re).unwrap_or(std::cmp::Ordering::Equal)
        })
    }

    /// Eigenvalues sorted by decreasing real part, then decreasing imaginary part.
    pub fn sorted_values(&self) -> Vec<Complex<T>> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| {
            b.re.partial_cmp(&a.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        v
    }
}

/// Eigenvalues of a real square matrix.
pub fn eig_dense<T: Real>(a: &DenseMatrix<T>) -> Result<Spectrum<T>> {
    check(a)?;
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    let values = hqr(&mut h)?;
    Ok(Spectrum { values, right: None, left: None })
}

/// Eigenvalues plus right and left eigenvectors, each normalised to unit
/// Euclidean length.
pub fn eig_with_vectors<T: Real>(a: &DenseMatrix<T>) -> Result<Spectrum<T>> {
    let mut s = eig_dense(a)?;
    let at = a.transpose();
    let mut right = Vec::with_capacity(s.values.len());
    let mut left = Vec::with_capacity(s.values.len());
    for &lam in &s.values {
        right.push(inverse_iteration(a, lam)?);
        left.push(inverse_iteration(&at, lam)?);
    }
    s.right = Some(right);
    s.left = Some(left);
    Ok(s)
}

fn check<T: Real>(a: &DenseMatrix<T>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if !a.is_finite() {
        return Err(Error::Invalid("non-finite matrix entry".into()));
    }
    Ok(())
}

/// Unit eigenvector of `a` for the eigenvalue estimate `lam`.
pub fn inverse_iteration<T: Real>(a: &DenseMatrix<T>, lam: Complex<T>) -> Result<Vec<Complex<T>>> {
    let n = a.rows();
    let scale = T::one().max(a.norm_inf());
    // Nudge off the exact eigenvalue so the factorisation stays finite.
    let nudge = T::epsilon().sqrt() * T::epsilon().powf(T::lit(0.25)) * scale;
    let shifted = a.to_complex().shift(lam + Complex::new(nudge, nudge * T::lit(0.5)));
    let lu = shifted.lu()?;
    let mut v: Vec<Complex<T>> = (0..n)
        .map(|i| Complex::new(T::one() + T::lit(0.01) * T::of(i), T::lit(0.003) * T::of(i * i % 7)))
        .collect();
    normalize(&mut v);
    let mut best = v.clone();
    let mut best_res = T::infinity();
    for _ in 0..6 {
        let mut w = match lu.solve(&v) {
            Ok(w) => w,
            Err(_) => break,
        };
        if !w.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            break;
        }
        normalize(&mut w);
        let av = a.to_complex().matvec(&w);
        let res = norm2(&av.iter().zip(&w).map(|(&x, &y)| x - lam * y).collect::<Vec<_>>());
        v = w;
        if res < best_res {
            best_res = res;
            best = v.clone();
        }
        if res <= T::epsilon() * T::lit(64.0) * scale {
            break;
        }
    }
    if !best_res.is_finite() {
        return Err(Error::Singular("inverse iteration failed".into()));
    }
    Ok(phase_fix(best))
}

fn normalize<T: Real>(v: &mut [Complex<T>]) {
    let n = norm2(v);
    if n > T::zero() {
        for z in v.iter_mut() {
            *z = *z / n;
        }
    }
}

/// Rotates so the largest component is real and positive.
fn phase_fix<T: Real>(mut v: Vec<Complex<T>>) -> Vec<Complex<T>> {
    if let Some(big) = v.iter().copied().max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap()) {
        if big.norm() > T::zero() {
            let ph = big.conj() / big.norm();
            for z in v.iter_mut() {
                *z = *z * ph;
            }
        }
    }
    v
}

/// Diagonal similarity scaling by powers of two (EISPACK `balanc`, no permutations).
fn balance<T: Real>(a: &mut DenseMatrix<T>) {
    let n = a.rows();
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let mut g = r / radix;
            let mut f = T::one();
            let s = c + r;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < T::lit(0.95) * s {
                done = false;
                let g = T::one() / f;
                for j in 0..n {
                    a[(i, j)] *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form, in place.
fn hessenberg<T: Real>(h: &mut DenseMatrix<T>) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let mut ort = vec![T::zero(); n];
    for m in 1..n - 1 {
        let mut scale = T::zero();
        for i in m..n {
            scale += h[(i, m - 1)].abs();
        }
        if scale == T::zero() {
            continue;
        }
        let mut hh = T::zero();
        for i in (m..n).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > T::zero() {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let mut f = T::zero();
            for i in (m..n).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..n {
                let t = f * ort[i];
                h[(i, j)] -= t;
            }
        }
        for i in 0..n {
            let mut f = T::zero();
            for j in (m..n).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hh;
            for j in m..n {
                let t = f * ort[j];
                h[(i, j)] -= t;
            }
        }
        h[(m, m - 1)] = scale * g;
        for i in m + 1..n {
            h[(i, m - 1)] = T::zero();
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by shifted double QR.
fn hqr<T: Real>(h: &mut DenseMatrix<T>) -> Result<Vec<Complex<T>>> {
    let nn = h.rows();
    let mut wr = vec![T::zero(); nn];
    let mut wi = vec![T::zero(); nn];
    if nn == 0 {
        return Ok(Vec::new());
    }
    let eps = T::epsilon();
    let mut norm = T::zero();
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }
    let cap = 100 * nn.max(1);
    let mut total = 0usize;
    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    let mut exshift = T::zero();
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut w, mut x, mut y);
    let two = T::lit(2.0);
    while n >= 0 {
        let nu = n as usize;
        // Find a negligible subdiagonal entry.
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == T::zero() {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }
        if l == nu {
            wr[nu] = h[(nu, nu)] + exshift;
            wi[nu] = T::zero();
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / two;
            q = p * p + w;
            z = q.abs().sqrt();
            x = h[(nu, nu)] + exshift;
            if q >= T::zero() {
                z = if p >= T::zero() { p + z } else { p - z };
                wr[nu - 1] = x + z;
                wr[nu] = if z != T::zero() { x - w / z } else { x + z };
                wi[nu - 1] = T::zero();
                wi[nu] = T::zero();
            } else {
                wr[nu - 1] = x + p;
                wr[nu] = x + p;
                wi[nu - 1] = z;
                wi[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = h[(nu, nu)];
            y = h[(nu - 1, nu - 1)];
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            if iter == 10 || iter == 20 {
                // Exceptional shift.
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            if iter == 30 {
                s = (y - x) / two;
                s = s * s + w;
                if s > T::zero() {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / two + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = T::lit(0.964);
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            total += 1;
            if total > cap {
                return Err(Error::NoConvergence { what: "hessenberg qr", iterations: total });
            }
            // Look for two consecutive small subdiagonal entries.
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = h[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs());
                if u < eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h[(i, i - 2)] = T::zero();
                if i > m + 2 {
                    h[(i, i - 3)] = T::zero();
                }
            }
            // Double QR step on rows l..=n, columns m..=n.
            let mut k = m;
            while k < nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { T::zero() };
                    x = p.abs() + q.abs() + r.abs();
                    if x == T::zero() {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                } else {
                    x = T::one();
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < T::zero() {
                    s = -s;
                }
                if s != T::zero() {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    for i in 0..=nu.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(a, b)| Complex::new(a, b)).collect())
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns ascending eigenvalues and the matching orthonormal eigenvectors as
/// columns of the second matrix.
pub fn sym_eig<T: Real>(a: &DenseMatrix<T>) -> Result<(Vec<T>, DenseMatrix<T>)> {
    check(a)?;
    let n = a.rows();
    let mut m = a.clone();
    let mut v = DenseMatrix::<T>::identity(n);
    let scale = T::one().max(a.norm_fro());
    for sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += m[(i, j)] * m[(i, j)];
                }
            }
        }
        if off.sqrt() <= T::epsilon() * scale {
            break;
        }
        if sweep == 99 {
            return Err(Error::NoConvergence { what: "jacobi", iterations: sweep });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = idx.iter().map(|&i| m[(i, i)]).collect();
    let vecs = DenseMatrix::from_fn(n, n, |r, c| v[(r, idx[c])]);
    Ok((vals, vecs))
}

/// Residual `‖A v − λ v‖` for a complex eigenpair.
pub fn residual<T: Real>(a: &DenseMatrix<T>, lam: Complex<T>, v: &[Complex<T>]) -> T {
    let av = a.to_complex().matvec(v);
    norm2(&av.iter().zip(v).map(|(&x, &y)| x - lam * y).collect::<Vec<_>>())
}

/// Minimum-cost matching distance between two eigenvalue multisets of equal size.
/// Greedy on sorted candidates; adequate for well-separated comparisons in tests.
pub fn multiset_distance<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    let mut used = vec![false; b.len()];
    let mut worst = T::zero();
    for &x in a {
        let mut best = T::infinity();
        let mut bi = usize::MAX;
        for (j, &y) in b.iter().enumerate() {
            if !used[j] {
                let d = (x - y).norm();
                if d < best {
                    best = d;
                    bi = j;
                }
            }
        }
        if bi == usize::MAX {
            return T::infinity();
        }
        used[bi] = true;
        worst = worst.max(best);
    }
    worst
}
