//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! Modulus convention: `k`, not the parameter `m = k²`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `(K(k), E(k))` by the arithmetic-geometric mean.
pub fn elliptic_k_e<T: Real>(k: T) -> Result<(T, T)> {
    if !(k >= T::zero() && k < T::one()) {
        return Err(Error::Domain(format!("elliptic modulus {k} outside [0, 1)")));
    }
    let mut a = T::one();
    let mut b = (T::one() - k * k).sqrt();
    let mut c = k;
    let mut pow = T::lit(0.5);
    let mut sum = pow * c * c;
    for _ in 0..64 {
        if c.abs() <= T::epsilon() * a {
            break;
        }
        let an = (a + b) / T::lit(2.0);
        let bn = (a * b).sqrt();
        c = (a - b) / T::lit(2.0);
        a = an;
        b = bn;
        pow = pow * T::lit(2.0);
        sum += pow * c * c;
    }
    let kk = T::FRAC_PI_2() / a;
    Ok((kk, kk * (T::one() - sum)))
}

/// `(sn, cn, dn)` of `x` with modulus `k`, by the descending AGM scheme.
pub fn jacobi_sn_cn_dn<T: Real>(x: T, k: T) -> Result<(T, T, T)> {
    if !(k >= T::zero() && k < T::one()) {
        return Err(Error::Domain(format!("elliptic modulus {k} outside [0, 1)")));
    }
    if k == T::zero() {
        return Ok((x.sin(), x.cos(), T::one()));
    }
    let mut a = vec![T::one()];
    let mut c = vec![k];
    let mut b = (T::one() - k * k).sqrt();
    while c.last().unwrap().abs() > T::epsilon() && a.len() < 64 {
        let an = *a.last().unwrap();
        a.push((an + b) / T::lit(2.0));
        c.push((an - b) / T::lit(2.0));
        b = (an * b).sqrt();
    }
    let n = a.len() - 1;
    let mut phi = T::lit(2.0).powi(n as i32) * a[n] * x;
    for j in (1..=n).rev() {
        phi = (phi + (c[j] * phi.sin() / a[j]).asin()) / T::lit(2.0);
    }
    let sn = phi.sin();
    let cn = phi.cos();
    // dn > 0 on the real line; the AGM ratio form is 0/0 at odd quarter periods
    let dn = (T::one() - k * k * sn * sn).sqrt();
    Ok((sn, cn, dn))
}
