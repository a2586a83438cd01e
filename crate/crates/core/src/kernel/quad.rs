//! Gauss-Legendre quadrature.

use crate::scalar::Real;

/// Nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf = T::of(n);
    for i in 0..n.div_ceil(2) {
        let mut z = (T::PI() * (T::of(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d.is_finite() { d } else { dp };
        let wi = T::lit(2.0) / ((T::one() - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `P_n(z)` and its derivative.
fn legendre<T: Real>(n: usize, z: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = z;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 2..=n {
        let kf = T::of(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * z * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::of(n);
    (p1, nf * (z * p1 - p0) / (z * z - T::one()))
}

/// `∫_a^b f` with an `n`-point rule.
pub fn integrate<T: Real>(f: impl Fn(T) -> T, a: T, b: T, rule: &(Vec<T>, Vec<T>)) -> T {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    rule.0.iter().zip(&rule.1).fold(T::zero(), |acc, (&x, &w)| acc + w * f(mid + half * x)) * half
}
