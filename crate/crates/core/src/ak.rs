//! Rank-two perturbations and the four-polynomial split of their
//! characteristic polynomial.
//!
//! For `M̃ = M + ρ₁ f₁g₁ᵀ + ρ₂ f₂g₂ᵀ`,
//! `det(M̃ − λI) = D + ρ₁P₁ + ρ₂P₂ + ρ₁ρ₂Q` with `D = det(M − λI)`,
//! `Pᵢ = gᵢᵀ adj(M − λI) fᵢ` and `Q = det(M − λI) det(GᵀR F)`, `R` the
//! resolvent. Each of `Pᵢ`, `Q` is a bordered determinant, so all four are
//! obtained by interpolating determinants at Chebyshev nodes.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{dot, norm2, sym_eig, DenseMatrix, Poly};
use crate::{Matrix, Polynomial, C64};

/// Relative tolerance below which two vectors count as parallel.
pub const PARALLEL_TOL: f64 = 1e-10;

/// Base matrix with one or two rank-one perturbation directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowRankProblem {
    pub m: Matrix,
    pub f1: Vec<f64>,
    pub g1: Vec<f64>,
    pub f2: Option<Vec<f64>>,
    pub g2: Option<Vec<f64>>,
}

impl LowRankProblem {
    pub fn new(
        m: Matrix,
        f1: Vec<f64>,
        g1: Vec<f64>,
        f2: Option<Vec<f64>>,
        g2: Option<Vec<f64>>,
    ) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
        }
        let n = m.rows();
        if n == 0 {
            return Err(Error::Dimension("empty matrix".into()));
        }
        if f2.is_some() != g2.is_some() {
            return Err(Error::Dimension("f2 and g2 must be given together".into()));
        }
        let all = [Some(&f1), Some(&g1), f2.as_ref(), g2.as_ref()];
        for (name, v) in ["f1", "g1", "f2", "g2"].iter().zip(all) {
            if let Some(v) = v {
                if v.len() != n {
                    return Err(Error::Dimension(format!("{name} has length {} but N = {n}", v.len())));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Invalid(format!("{name} has a non-finite entry")));
                }
            }
        }
        if !m.is_finite() {
            return Err(Error::Invalid("matrix has a non-finite entry".into()));
        }
        Ok(Self { m, f1, g1, f2, g2 })
    }

    pub fn rank_one(m: Matrix, f1: Vec<f64>, g1: Vec<f64>) -> Result<Self> {
        Self::new(m, f1, g1, None, None)
    }

    pub fn rank_two(m: Matrix, f1: Vec<f64>, g1: Vec<f64>, f2: Vec<f64>, g2: Vec<f64>) -> Result<Self> {
        Self::new(m, f1, g1, Some(f2), Some(g2))
    }

    pub fn n(&self) -> usize {
        self.m.rows()
    }

    pub fn is_rank_one(&self) -> bool {
        self.f2.is_none()
    }

    /// `max(1, ‖M‖∞, ‖fᵢ‖‖gᵢ‖)`.
    pub fn scale(&self) -> f64 {
        let mut s = 1f64.max(self.m.norm_inf()).max(norm2(&self.f1) * norm2(&self.g1));
        if let (Some(f2), Some(g2)) = (&self.f2, &self.g2) {
            s = s.max(norm2(f2) * norm2(g2));
        }
        s
    }

    /// True when `Q` vanishes structurally: `f₁ ∥ f₂` or `g₁ ∥ g₂`.
    pub fn q_vanishes(&self) -> bool {
        match (&self.f2, &self.g2) {
            (Some(f2), Some(g2)) => parallel(&self.f1, f2) || parallel(&self.g1, g2),
            _ => true,
        }
    }

    /// `M + ρ₁ f₁g₁ᵀ + ρ₂ f₂g₂ᵀ`.
    pub fn perturbed_matrix(&self, rho1: f64, rho2: f64) -> Matrix {
        let mut a = self.m.rank_one_update(rho1, &self.f1, &self.g1).expect("lengths checked");
        if let (Some(f2), Some(g2)) = (&self.f2, &self.g2) {
            a = a.rank_one_update(rho2, f2, g2).expect("lengths checked");
        }
        a
    }

    /// `1 + ρ₁m₁₁ + ρ₂m₂₂ + ρ₁ρ₂ det m` with `m_ab = g_aᵀ (M − λI)⁻¹ f_b`; equals
    /// `det(M̃ − λI) / det(M − λI)`.
    pub fn ak_value(&self, rho1: f64, rho2: f64, lambda: C64) -> Result<C64> {
        let a = self.m.to_complex().shift(lambda);
        let lu = a.lu()?;
        if lu.is_singular() || lu.pivot_ratio() < 1e-14 {
            return Err(Error::Singular(format!("λ = {lambda} is an eigenvalue of M")));
        }
        let cx = |v: &[f64]| v.iter().map(|&x| Complex::new(x, 0.0)).collect::<Vec<C64>>();
        let (f1, g1) = (cx(&self.f1), cx(&self.g1));
        let x1 = lu.solve(&f1)?;
        let m11 = dot(&g1, &x1);
        let one = Complex::new(1.0, 0.0);
        match (&self.f2, &self.g2) {
            (Some(f2), Some(g2)) => {
                let (f2, g2) = (cx(f2), cx(g2));
                let x2 = lu.solve(&f2)?;
                let m22 = dot(&g2, &x2);
                let m12 = dot(&g1, &x2);
                let m21 = dot(&g2, &x1);
                Ok(one + m11 * rho1 + m22 * rho2 + (m11 * m22 - m12 * m21) * (rho1 * rho2))
            }
            _ => Ok(one + m11 * rho1),
        }
    }

    /// Example 1: a 4×4 matrix with `−ρ₁` at `(1,4)` and `−ρ₂` at `(2,3)`.
    pub fn example1() -> Self {
        let s = std::f64::consts::SQRT_2;
        let m = DenseMatrix::from_rows(&[
            vec![-2.0, -1.0, 0.0, 0.0],
            vec![-1.0, -2.0, 0.0, 0.0],
            vec![s, 1.0, -2.0, 0.0],
            vec![1.0, s, 0.0, -2.0],
        ])
        .expect("rectangular");
        let e = |i: usize, v: f64| {
            let mut x = vec![0.0; 4];
            x[i] = v;
            x
        };
        Self::rank_two(m, e(0, -1.0), e(3, 1.0), e(1, -1.0), e(2, 1.0)).expect("consistent")
    }
}

fn parallel(a: &[f64], b: &[f64]) -> bool {
    let (na, nb) = (norm2(a), norm2(b));
    if na == 0.0 || nb == 0.0 {
        return true;
    }
    let c = dot(a, b);
    // |a|²|b|² − (a·b)² relative to |a|²|b|²
    let s = ((na * nb).powi(2) - c * c).max(0.0).sqrt();
    s <= PARALLEL_TOL * na * nb
}

/// The polynomials `D, P₁, P₂, Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AKDecomposition {
    pub d: Polynomial,
    pub p1: Polynomial,
    pub p2: Polynomial,
    pub q: Polynomial,
}

impl AKDecomposition {
    /// `D + ρ₁P₁ + ρ₂P₂ + ρ₁ρ₂Q` as a polynomial in λ.
    pub fn char_poly(&self, rho1: f64, rho2: f64) -> Polynomial {
        &(&self.d + &self.p1.scale(&rho1)) + &(&self.p2.scale(&rho2) + &self.q.scale(&(rho1 * rho2)))
    }

    pub fn eval(&self, lambda: f64, rho1: f64, rho2: f64) -> f64 {
        self.d.eval(lambda)
            + rho1 * self.p1.eval(lambda)
            + rho2 * self.p2.eval(lambda)
            + rho1 * rho2 * self.q.eval(lambda)
    }

    pub fn eval_complex(&self, z: C64, rho1: f64, rho2: f64) -> C64 {
        self.d.eval_complex(z)
            + self.p1.eval_complex(z) * rho1
            + self.p2.eval_complex(z) * rho2
            + self.q.eval_complex(z) * (rho1 * rho2)
    }

    /// Largest coefficient over the four polynomials, at least 1.
    pub fn coeff_scale(&self) -> f64 {
        [&self.d, &self.p1, &self.p2, &self.q].iter().fold(1f64, |m, p| m.max(p.max_abs_coeff()))
    }

    /// Coefficient-wise distance to another decomposition.
    pub fn distance(&self, o: &Self) -> f64 {
        self.d
            .distance(&o.d)
            .max(self.p1.distance(&o.p1))
            .max(self.p2.distance(&o.p2))
            .max(self.q.distance(&o.q))
    }

    /// Rank-one problems and parallel directions give a zero `Q`.
    pub fn is_q_zero(&self) -> bool {
        self.q.is_zero()
    }
}

/// Decomposition by interpolating bordered determinants on circles about 0.
pub fn decompose_cofactor(p: &LowRankProblem) -> Result<AKDecomposition> {
    let n = p.n();
    let r = p.scale();
    let m = p.m.to_complex();
    let d = interpolate(n, r, |z| m.shift(z).det())?;
    let p1 = bordered(p, &[&p.f1], &[&p.g1], r)?;
    let (p2, q) = match (&p.f2, &p.g2) {
        (Some(f2), Some(g2)) => {
            let p2 = bordered(p, &[f2], &[g2], r)?;
            let q = if p.q_vanishes() || n < 2 {
                Poly::zero()
            } else {
                bordered(p, &[&p.f1, f2], &[&p.g1, g2], r)?
            };
            (p2, q)
        }
        _ => (Poly::zero(), Poly::zero()),
    };
    Ok(AKDecomposition { d, p1, p2, q })
}

/// `det [[M − λI, F], [−Gᵀ, 0]]`, a polynomial of degree at most `N − k`.
fn bordered(p: &LowRankProblem, fs: &[&Vec<f64>], gs: &[&Vec<f64>], r: f64) -> Result<Polynomial> {
    let n = p.n();
    let k = fs.len();
    if n < k {
        return Ok(Poly::zero());
    }
    let mut base = DenseMatrix::<C64>::zeros(n + k, n + k);
    for i in 0..n {
        for j in 0..n {
            base[(i, j)] = C64::new(p.m[(i, j)], 0.0);
        }
    }
    for (c, (f, g)) in fs.iter().zip(gs).enumerate() {
        for i in 0..n {
            base[(i, n + c)] = C64::new(f[i], 0.0);
            base[(n + c, i)] = C64::new(-g[i], 0.0);
        }
    }
    interpolate(n - k, r, |z| {
        let mut a = base.clone();
        for i in 0..n {
            a[(i, i)] -= z;
        }
        a.det()
    })
}

/// Degree-`deg` polynomial from samples of `f` at `deg + 1` points on each
/// of a geometric family of circles `|λ| = ρ`, `ρ` from `2r` down to about
/// `1e-10 r`. Coefficient `k` is taken from the circle minimising the
/// rounding bound `ε·max|f|/ρᵏ`, so both small-|λ| values and the leading
/// terms come out with nearly full relative accuracy. Coefficients that do
/// not rise above that bound are set to zero.
fn interpolate(deg: usize, r: f64, f: impl Fn(C64) -> Result<C64>) -> Result<Polynomial> {
    let m = deg + 1;
    let tau = std::f64::consts::TAU;
    let mut best = vec![(f64::INFINITY, 0.0); m];
    let mut rho = 2.0 * r;
    while rho >= 1e-10 * r {
        let z: Vec<C64> = (0..m).map(|j| C64::from_polar(rho, tau * (j as f64 + 0.5) / m as f64)).collect();
        let vals = z.iter().map(|&zj| f(zj)).collect::<Result<Vec<_>>>()?;
        let peak = vals.iter().fold(0f64, |a, v| a.max(v.norm()));
        for (k, slot) in best.iter_mut().enumerate() {
            let bound = 8.0 * f64::EPSILON * m as f64 * peak / rho.powi(k as i32);
            if bound < slot.0 {
                let c: C64 = vals.iter().zip(&z).map(|(v, zj)| v / zj.powi(k as i32)).sum::<C64>() / m as f64;
                *slot = (bound, c.re);
            }
        }
        rho /= 4.0;
    }
    Ok(Poly::new(best.into_iter().map(|(bound, c)| if c.abs() <= bound { 0.0 } else { c }).collect()))
}

/// Decomposition from the eigen-expansion of a symmetric `M`.
pub fn decompose_spectral(p: &LowRankProblem) -> Result<AKDecomposition> {
    let n = p.n();
    let scale = p.scale();
    if !p.m.is_symmetric(1e-12 * scale) {
        return Err(Error::Invalid("spectral route needs a symmetric matrix".into()));
    }
    let (mu, v) = sym_eig(&p.m)?;
    let col = |i: usize| (0..n).map(|r| v[(r, i)]).collect::<Vec<f64>>();
    let cols: Vec<Vec<f64>> = (0..n).map(col).collect();
    let proj = |x: &[f64]| cols.iter().map(|c| dot(c, x)).collect::<Vec<f64>>();
    // ∏_{k ∉ skip} (μ_k − λ)
    let prod_except = |skip: &[usize]| {
        (0..n)
            .filter(|k| !skip.contains(k))
            .fold(Poly::constant(1.0), |acc, k| &acc * &Poly::new(vec![mu[k], -1.0]))
    };
    let d = prod_except(&[]);
    let (a1, b1) = (proj(&p.g1), proj(&p.f1));
    let single = |a: &[f64], b: &[f64]| {
        (0..n).fold(Poly::zero(), |acc, i| &acc + &prod_except(&[i]).scale(&(a[i] * b[i])))
    };
    let p1 = single(&a1, &b1);
    let (p2, q) = match (&p.f2, &p.g2) {
        (Some(f2), Some(g2)) => {
            let (a2, b2) = (proj(g2), proj(f2));
            let p2 = single(&a2, &b2);
            let q = if p.q_vanishes() {
                Poly::zero()
            } else {
                let mut q = Poly::zero();
                for i in 0..n {
                    for j in i + 1..n {
                        let c = a1[i] * b1[i] * a2[j] * b2[j] + a1[j] * b1[j] * a2[i] * b2[i]
                            - a1[i] * b2[i] * a2[j] * b1[j]
                            - a1[j] * b2[j] * a2[i] * b1[i];
                        q = &q + &prod_except(&[i, j]).scale(&c);
                    }
                }
                clean(q)
            };
            (p2, q)
        }
        _ => (Poly::zero(), Poly::zero()),
    };
    Ok(AKDecomposition { d, p1: clean(p1), p2: clean(p2), q })
}

fn clean(p: Polynomial) -> Polynomial {
    let tol = 1e-14 * p.max_abs_coeff();
    p.chopped(tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_matches_display() {
        let p = LowRankProblem::example1();
        let a = p.perturbed_matrix(0.7, -1.3);
        assert_eq!(a[(0, 3)], -0.7);
        assert_eq!(a[(1, 2)], 1.3);
        let d = decompose_cofactor(&p).unwrap();
        let s = std::f64::consts::SQRT_2;
        let want_p = Poly::new(vec![4.0 - 2.0 * s, 4.0 - s, 1.0]);
        assert!(d.p1.distance(&want_p) < 1e-12);
        assert!(d.p2.distance(&want_p) < 1e-12);
        assert!(d.q.distance(&Poly::constant(-1.0)) < 1e-12);
        let want_d = Poly::from_roots(&[-1.0, -2.0, -2.0, -3.0]);
        assert!(d.d.distance(&want_d) < 1e-12);
    }

    #[test]
    fn rank_one_diagonal_by_hand() {
        let m = DenseMatrix::diag(&[1.0, 2.0]);
        let p = LowRankProblem::rank_one(m, vec![1.0, 0.0], vec![1.0, 0.0]).unwrap();
        let d = decompose_spectral(&p).unwrap();
        assert!(d.d.distance(&Poly::new(vec![2.0, -3.0, 1.0])) < 1e-13);
        assert!(d.p1.distance(&Poly::new(vec![2.0, -1.0])) < 1e-13);
        assert!(d.p2.is_zero() && d.q.is_zero());
    }

    #[test]
    fn ak_value_at_zero_rho_is_one() {
        let p = LowRankProblem::example1();
        let v = p.ak_value(0.0, 0.0, Complex::new(0.3, 0.2)).unwrap();
        assert!((v - Complex::new(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(p.ak_value(1.0, 1.0, Complex::new(-1.0, 0.0)), Err(Error::Singular(_))));
    }
}
