//! Nonlocal Allen-Cahn fronts and their stability.
//!
//! The linearisation about a stationary front is
//! `H̃_ρ v = H v − (ρ/2L) 𝟙 ⟨f′(u), v⟩` with `H = ∂ₓₓ + f′(u)` and Neumann
//! ends on `[−L, L]`. The cubic case is exact: in rescaled variables
//! `f(u) = (1+k²)u − 2k²u³` on `[−K(k), K(k)]` the front is `u = sn(x, k)`.
//! The map to `u − u³` on `[−L, L]` is `x = √(1+k²) y`,
//! `u = k √(2/(1+k²)) sn(y, k)`, `L = √(1+k²) K(k)`; eigenvalues scale by
//! `1/(1+k²)`.
//!
//! General nonlinearities go through the quadrature
//! `∫ du / √(2E + 2κu − 2F(u)) = x + L` and the period integrals `P, M, R`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{elliptic_k_e, gauss_legendre, jacobi_sn_cn_dn, poly_roots, Tridiagonal};
use crate::{Matrix, Polynomial, C64};

/// Cubic front data for modulus `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicFront {
    pub k: f64,
    /// `K(k)`, the rescaled half-length.
    pub kk: f64,
    /// `E(k)`.
    pub e: f64,
    /// `a(k) = √(1 − k² + k⁴)`.
    pub a: f64,
}

impl CubicFront {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::Domain(format!("elliptic modulus {k} outside (0, 1)")));
        }
        let (kk, e) = elliptic_k_e(k)?;
        let k2 = k * k;
        Ok(Self { k, kk, e, a: (1.0 - k2 + k2 * k2).sqrt() })
    }

    /// Front of `u − u³` with half-length `l > π/2`, solving
    /// `√(1+k²) K(k) = l` for `k`.
    pub fn from_length(l: f64) -> Result<Self> {
        if !(l > std::f64::consts::FRAC_PI_2) || !l.is_finite() {
            return Err(Error::Domain(format!("no front for half-length {l} ≤ π/2")));
        }
        let len = |k: f64| elliptic_k_e(k).map(|(kk, _)| (1.0 + k * k).sqrt() * kk);
        let (mut lo, mut hi) = (0.0, 1.0 - 1e-16);
        if len(hi)? < l {
            return Err(Error::Domain(format!("half-length {l} beyond the representable modulus range")));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if len(mid)? < l {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        Self::new(0.5 * (lo + hi))
    }

    /// Half-length of the unscaled `u − u³` problem.
    pub fn length(&self) -> f64 {
        (1.0 + self.k * self.k).sqrt() * self.kk
    }

    pub fn profile(&self, x: f64) -> f64 {
        jacobi_sn_cn_dn(x, self.k).map(|t| t.0).unwrap_or(f64::NAN)
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        let k2 = self.k * self.k;
        Nonlinearity::new(Polynomial::new(vec![0.0, 1.0 + k2, 0.0, -2.0 * k2]), 0.0)
    }

    /// `H` on `n` intervals of `[−K, K]`, sampled from `sn`.
    pub fn operator(&self, n: usize, ends: Ends) -> Result<DiscretizedOperator> {
        let nl = self.nonlinearity();
        let h = 2.0 * self.kk / n as f64;
        let fp: Vec<f64> = (0..=n).map(|j| nl.f_prime(self.profile(-self.kk + j as f64 * h))).collect();
        build_h_discrete(&fp, self.kk, ends)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ends {
    Neumann,
    Dirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LameKind {
    N0,
    D1,
    N1,
    D2,
    N2,
}

/// One of the five simple eigenpairs of the two-gap Lamé operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LameMode {
    pub kind: LameKind,
    pub ends: Ends,
    pub eigenvalue: f64,
    k: f64,
    a: f64,
}

impl LameMode {
    pub fn eval(&self, x: f64) -> f64 {
        let Ok((sn, cn, dn)) = jacobi_sn_cn_dn(x, self.k) else { return f64::NAN };
        let k2 = self.k * self.k;
        match self.kind {
            LameKind::N0 => k2 * sn * sn - (1.0 + k2 + self.a) / 3.0,
            LameKind::D1 => cn * dn,
            LameKind::N1 => sn * dn,
            LameKind::D2 => cn * sn,
            LameKind::N2 => k2 * sn * sn - (1.0 + k2 - self.a) / 3.0,
        }
    }
}

/// The five top eigenpairs, in decreasing order of eigenvalue.
pub fn lame_spectrum(k: f64) -> Result<Vec<LameMode>> {
    let c = CubicFront::new(k)?;
    let (k2, a) = (k * k, c.a);
    let mode = |kind, ends, eigenvalue| LameMode { kind, ends, eigenvalue, k, a };
    Ok(vec![
        mode(LameKind::N0, Ends::Neumann, -(1.0 + k2 - 2.0 * a)),
        mode(LameKind::D1, Ends::Dirichlet, 0.0),
        mode(LameKind::N1, Ends::Neumann, -3.0 * k2),
        mode(LameKind::D2, Ends::Dirichlet, -3.0),
        mode(LameKind::N2, Ends::Neumann, -(1.0 + k2 + 2.0 * a)),
    ])
}

/// `H̃` restricted to `span{1, sn²}` in that basis, with its eigenvalues
/// (descending).
pub fn restricted_matrix(k: f64) -> Result<(Matrix, [f64; 2])> {
    let c = CubicFront::new(k)?;
    let (k2, kk, e) = (k * k, c.kk, c.e);
    let m = Matrix::from_rows(&[
        vec![6.0 * (kk - e) / kk, 3.0 * (1.0 + k2) * (kk - e) / (k2 * kk)],
        vec![-6.0 * k2, -3.0 * (1.0 + k2)],
    ])?;
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    Ok((m, [0.5 * (tr + disc), 0.5 * (tr - disc)]))
}

/// `λ₁(k) = ((3 − 3k²)K − 6E)/K`, the moving eigenvalue of the cubic front.
pub fn lambda1(k: f64) -> Result<f64> {
    let (kk, e) = elliptic_k_e(k)?;
    Ok(((3.0 - 3.0 * k * k) * kk - 6.0 * e) / kk)
}

/// Polynomial reaction term `f` and a point inside the oscillation well,
/// used to pick the turning points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub f: Polynomial,
    pub well: f64,
}

impl Nonlinearity {
    pub fn new(f: Polynomial, well: f64) -> Self {
        Self { f, well }
    }

    /// `u − u³`.
    pub fn bistable() -> Self {
        Self::new(Polynomial::new(vec![0.0, 1.0, 0.0, -1.0]), 0.0)
    }

    pub fn f(&self, u: f64) -> f64 {
        self.f.eval(u)
    }

    pub fn f_prime(&self, u: f64) -> f64 {
        self.f.eval_with_derivs(u)[1]
    }

    /// `F` with `F(0) = 0`.
    pub fn big_f(&self) -> Polynomial {
        self.f.antiderivative()
    }

    /// `2E + 2κu − 2F(u)`.
    pub fn phi(&self, e: f64, kappa: f64) -> Polynomial {
        Polynomial::new(vec![2.0 * e, 2.0 * kappa]) - self.big_f().scale(&2.0)
    }
}

/// Second-difference `H = ∂ₓₓ + f′(u)` on `[−L, L]`, with the weights of the
/// discrete inner product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedOperator {
    pub n: usize,
    pub h: f64,
    pub l: f64,
    pub ends: Ends,
    pub t: Tridiagonal<f64>,
    /// Trapezoid weights, so that `W H` is symmetric.
    pub weights: Vec<f64>,
    /// `f′(u)` at the unknowns.
    pub g: Vec<f64>,
}

/// Build `H` from `f′(u)` at the `n + 1` nodes `−L + jh`. Neumann ends use a
/// ghost node; Dirichlet ends drop the two boundary nodes.
pub fn build_h_discrete(f_prime: &[f64], l: f64, ends: Ends) -> Result<DiscretizedOperator> {
    if f_prime.len() < 17 {
        return Err(Error::Invalid(format!(
            "need n ≥ 16 intervals, got {}",
            f_prime.len().saturating_sub(1)
        )));
    }
    if !(l > 0.0) || f_prime.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("half-length must be positive and samples finite".into()));
    }
    let n = f_prime.len() - 1;
    let h = 2.0 * l / n as f64;
    let c = 1.0 / (h * h);
    let (g, mut sub, mut sup, mut weights) = match ends {
        Ends::Neumann => (f_prime.to_vec(), vec![c; n + 1], vec![c; n + 1], vec![h; n + 1]),
        Ends::Dirichlet => (f_prime[1..n].to_vec(), vec![c; n - 1], vec![c; n - 1], vec![h; n - 1]),
    };
    if ends == Ends::Neumann {
        sup[0] = 2.0 * c;
        sub[n] = 2.0 * c;
        weights[0] = 0.5 * h;
        weights[n] = 0.5 * h;
    }
    sub[0] = 0.0;
    let m = g.len();
    sup[m - 1] = 0.0;
    let diag = g.iter().map(|v| v - 2.0 * c).collect();
    Ok(DiscretizedOperator { n, h, l, ends, t: Tridiagonal::new(sub, diag, sup)?, weights, g })
}

/// Theorem data for one operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityIndex {
    pub n_plus_h: usize,
    /// `⟨𝟙, H⁻¹𝟙⟩`, through the pseudo-inverse when `H` is singular.
    pub inner: f64,
    /// Predicted `n₊(H̃)`; `None` when `inner` is numerically zero.
    pub n_plus_perturbed: Option<usize>,
    pub singular_h: bool,
    pub has_simple_kernel: bool,
}

impl DiscretizedOperator {
    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
    }

    /// `2L` as seen by the discrete inner product, `⟨𝟙, 𝟙⟩`.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn ones(&self) -> Vec<f64> {
        vec![1.0; self.dim()]
    }

    fn scale(&self) -> f64 {
        let (lo, hi) = self.t.gershgorin();
        lo.abs().max(hi.abs()).max(1.0)
    }

    pub fn apply_h(&self, v: &[f64]) -> Vec<f64> {
        self.t.matvec(v)
    }

    /// `H̃_ρ v`.
    pub fn apply_perturbed(&self, rho: f64, v: &[f64]) -> Vec<f64> {
        let c = rho / (2.0 * self.l) * self.inner(&self.g, v);
        self.t.matvec(v).into_iter().map(|x| x - c).collect()
    }

    /// Dense `H̃_ρ`.
    pub fn assemble_perturbed(&self, rho: f64) -> Matrix {
        let m = self.dim();
        let c = rho / (2.0 * self.l);
        Matrix::from_fn(m, m, |i, j| {
            let band = if i == j {
                self.t.diag[i]
            } else if j == i + 1 {
                self.t.sup[i]
            } else if i == j + 1 {
                self.t.sub[i]
            } else {
                0.0
            };
            band - c * self.weights[j] * self.g[j]
        })
    }

    pub fn solve_h(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.t.solve_pivoted(b)
    }

    /// Number of eigenvalues of `H` above `x`.
    pub fn count_above(&self, x: f64) -> usize {
        self.dim() - self.t.count_below(x)
    }

    /// `1 − (ρ/2L)⟨f′(u), (H − λ)⁻¹𝟙⟩`; zero at the moving eigenvalues.
    pub fn secular(&self, rho: f64, lambda: f64) -> Result<f64> {
        let y = self.t.shifted(lambda).solve_pivoted(&self.ones())?;
        Ok(1.0 - rho / (2.0 * self.l) * self.inner(&self.g, &y))
    }

    /// Eigenvalue of `H̃_ρ` nearest `sigma`, by inverse iteration with a
    /// Sherman-Morrison solve.
    pub fn perturbed_eigenvalue_near(&self, rho: f64, sigma: f64) -> Result<f64> {
        let a = self.t.shifted(sigma);
        let c = -rho / (2.0 * self.l);
        let b: Vec<f64> = self.weights.iter().zip(&self.g).map(|(w, g)| w * g).collect();
        let ua = a.solve_pivoted(&vec![c; self.dim()])?;
        let denom = 1.0 + crate::kernel::dot(&b, &ua);
        if denom.abs() < 1e-14 {
            return Err(Error::Singular("shift is an eigenvalue".into()));
        }
        let mut x: Vec<f64> =
            (0..self.dim()).map(|i| 1.0 + ((i as f64 + 0.5) * 0.618_033_988_75).fract()).collect();
        let mut lam = sigma;
        for it in 0..300 {
            let y = a.solve_pivoted(&x)?;
            let s = crate::kernel::dot(&b, &y) / denom;
            let mut z: Vec<f64> = y.iter().zip(&ua).map(|(y, u)| y - s * u).collect();
            let nz = crate::kernel::norm2(&z);
            if !(nz > 0.0) || !nz.is_finite() {
                return Err(Error::Singular("inverse iteration broke down".into()));
            }
            z.iter_mut().for_each(|v| *v /= nz);
            let hz = self.apply_perturbed(rho, &z);
            let new = crate::kernel::dot(&z, &hz);
            x = z;
            if it > 2 && (new - lam).abs() <= 1e-13 * self.scale() {
                return Ok(new);
            }
            lam = new;
        }
        Err(Error::NoConvergence { what: "perturbed inverse iteration", iterations: 300 })
    }

    /// `h(λ) = (1/2L)⟨𝟙, (H − λ)⁻¹𝟙⟩ − (1 − ρ)/(ρλ)`, Herglotz for ρ ∈ (0, 1].
    pub fn herglotz_h(&self, rho: f64, lambda: C64) -> Result<C64> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::Domain(format!("ρ = {rho} outside (0, 1]")));
        }
        if lambda.norm() < 1e-12 * self.scale() {
            return Err(Error::Singular("λ at the pole 0".into()));
        }
        let t = Tridiagonal::new(
            self.t.sub.iter().map(|&v| C64::new(v, 0.0)).collect(),
            self.t.diag.iter().map(|&v| C64::new(v, 0.0) - lambda).collect(),
            self.t.sup.iter().map(|&v| C64::new(v, 0.0)).collect(),
        )?;
        let y = t.solve_pivoted(&vec![C64::new(1.0, 0.0); self.dim()])?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("λ at an eigenvalue of H".into()));
        }
        let s: C64 = self.weights.iter().zip(&y).map(|(w, v)| v * *w).sum();
        Ok(s / (2.0 * self.l) - C64::new(1.0 - rho, 0.0) / (lambda * rho))
    }

    /// `(H⁺)𝟙` and whether `H` was treated as singular.
    fn inverse_ones(&self) -> Result<(Vec<f64>, bool)> {
        let scale = self.scale();
        let tol = 1e-8 * scale;
        let near_zero = self.t.count_below(tol) - self.t.count_below(-tol);
        if near_zero == 0 {
            return Ok((self.solve_h(&self.ones())?, false));
        }
        if near_zero > 1 {
            return Err(Error::Degenerate("H has a multiple near-zero eigenvalue".into()));
        }
        // kernel vector by inverse iteration, then a symmetric shift pair
        // with the kernel direction projected out
        let top = self.count_above(tol);
        let mut gap = f64::INFINITY;
        if top > 0 {
            gap = gap.min(self.t.eigenvalue_from_top(top - 1)?.abs());
        }
        if top + 1 < self.dim() {
            gap = gap.min(self.t.eigenvalue_from_top(top + 1)?.abs());
        }
        let mut z: Vec<f64> =
            (0..self.dim()).map(|i| ((i as f64 + 0.5) * 0.618_033_988_75).fract() - 0.5).collect();
        let shifted = self.t.shifted(1e-3 * gap);
        for _ in 0..4 {
            z = shifted.solve_pivoted(&z)?;
            let nz = self.inner(&z, &z).sqrt();
            z.iter_mut().for_each(|v| *v /= nz);
        }
        let delta = 1e-4 * gap;
        let ones = self.ones();
        let c = self.inner(&z, &ones);
        let r: Vec<f64> = ones.iter().zip(&z).map(|(o, z)| o - c * z).collect();
        let yp = self.t.shifted(delta).solve_pivoted(&r)?;
        let ym = self.t.shifted(-delta).solve_pivoted(&r)?;
        let mut y: Vec<f64> = yp.iter().zip(&ym).map(|(a, b)| 0.5 * (a + b)).collect();
        let cz = self.inner(&z, &y);
        y.iter_mut().zip(&z).for_each(|(y, z)| *y -= cz * z);
        Ok((y, true))
    }

    /// Positive-eigenvalue count of `H` and the theorem's prediction for `H̃`.
    pub fn stability_index(&self) -> Result<StabilityIndex> {
        let tol = 1e-8 * self.scale();
        let n_plus_h = self.count_above(tol);
        let (y, singular_h) = self.inverse_ones()?;
        let ones = self.ones();
        let inner = self.inner(&ones, &y);
        let size = self.inner(&y, &y).sqrt() * self.mass().sqrt();
        let generic = inner.abs() > 1e-10 * size;
        let n_plus_perturbed = match (generic, inner > 0.0) {
            (false, _) => None,
            (true, true) => Some(n_plus_h.saturating_sub(1)),
            (true, false) => Some(n_plus_h),
        };
        Ok(StabilityIndex {
            n_plus_h,
            inner,
            n_plus_perturbed,
            singular_h,
            has_simple_kernel: !singular_h && generic,
        })
    }

    /// `dλ/dρ` of the eigenvalue crossing zero at `ρ = 1`, `−2L/⟨𝟙, H⁻¹𝟙⟩`.
    pub fn crossing_rate(&self) -> Result<f64> {
        let (y, _) = self.inverse_ones()?;
        let inner = self.inner(&self.ones(), &y);
        if inner == 0.0 {
            return Err(Error::Degenerate("⟨𝟙, H⁻¹𝟙⟩ = 0".into()));
        }
        Ok(-self.mass() / inner)
    }
}

/// Turning points `μ₋ < well < μ₊`: the simple roots of `2E + 2κu − 2F(u)`
/// closest to `nl.well` on each side.
pub fn turning_points(nl: &Nonlinearity, e: f64, kappa: f64) -> Result<(f64, f64)> {
    let phi = nl.phi(e, kappa);
    if !(phi.eval(nl.well) > 0.0) {
        return Err(Error::Domain(format!("2E + 2κu − 2F(u) ≤ 0 at u = {}", nl.well)));
    }
    let scale = phi.max_abs_coeff().max(1.0);
    let mut below: Option<f64> = None;
    let mut above: Option<f64> = None;
    for z in poly_roots(&phi)? {
        if z.im.abs() > 1e-7 * (1.0 + z.re.abs()) {
            continue;
        }
        let mut r = z.re;
        for _ in 0..3 {
            let [p, dp, _] = phi.eval_with_derivs(r);
            if dp != 0.0 {
                r -= p / dp;
            }
        }
        if r < nl.well {
            below = Some(below.map_or(r, |b: f64| b.max(r)));
        } else {
            above = Some(above.map_or(r, |a: f64| a.min(r)));
        }
    }
    let (Some(lo), Some(hi)) = (below, above) else {
        return Err(Error::Domain("no bounded admissible turning-point pair".into()));
    };
    for r in [lo, hi] {
        let d = phi.eval_with_derivs(r)[1];
        if d.abs() <= 1e-6 * scale * (1.0 + r.abs()).powi(phi.degree().unwrap_or(1) as i32) {
            return Err(Error::Degenerate(format!("turning point {r} is not simple")));
        }
    }
    Ok((lo, hi))
}

/// Period integrals over `(μ₋, μ₊)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Periods {
    pub mu_minus: f64,
    pub mu_plus: f64,
    /// `∫ du/√Φ`, the distance between turning points.
    pub p: f64,
    /// `∫ u du/√Φ`.
    pub m: f64,
    /// `∫ f(u) du/√Φ`.
    pub r: f64,
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(200))
}

// Φ = (u−μ₋)(μ₊−u) ψ(u); with u = μ₋ + Δ sin²θ, du/√Φ = 2 dθ/√ψ
struct Smooth {
    lo: f64,
    width: f64,
    psi: Polynomial,
}

impl Smooth {
    fn new(nl: &Nonlinearity, e: f64, kappa: f64) -> Result<Self> {
        let (lo, hi) = turning_points(nl, e, kappa)?;
        let psi = -nl.phi(e, kappa).deflate(lo).deflate(hi);
        Ok(Self { lo, width: hi - lo, psi })
    }

    fn u(&self, theta: f64) -> f64 {
        let s = theta.sin();
        self.lo + self.width * s * s
    }

    fn density(&self, theta: f64) -> Result<f64> {
        let p = self.psi.eval(self.u(theta));
        if !(p > 0.0) {
            return Err(Error::Degenerate("integrand is not positive between the turning points".into()));
        }
        Ok(2.0 / p.sqrt())
    }
}

pub fn period_integrals(nl: &Nonlinearity, e: f64, kappa: f64) -> Result<Periods> {
    let sm = Smooth::new(nl, e, kappa)?;
    let (xs, ws) = rule();
    let half = std::f64::consts::FRAC_PI_4;
    let (mut p, mut m, mut r) = (0.0, 0.0, 0.0);
    for (x, w) in xs.iter().zip(ws) {
        let th = half * (x + 1.0);
        let d = sm.density(th)? * w * half;
        let u = sm.u(th);
        p += d;
        m += u * d;
        r += nl.f(u) * d;
    }
    Ok(Periods { mu_minus: sm.lo, mu_plus: sm.lo + sm.width, p, m, r })
}

/// Partial derivatives `(∂/∂E, ∂/∂κ)` of `P`, `M`, `R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodGradient {
    pub p: (f64, f64),
    pub m: (f64, f64),
    pub r: (f64, f64),
}

/// Central differences with step `1e-5·max(1, |E|, |κ|)`, one Richardson
/// step.
pub fn period_gradient(nl: &Nonlinearity, e: f64, kappa: f64) -> Result<PeriodGradient> {
    let step = 1e-5 * 1f64.max(e.abs()).max(kappa.abs());
    let central = |de: f64, dk: f64| -> Result<[f64; 3]> {
        let a = period_integrals(nl, e + de, kappa + dk)?;
        let b = period_integrals(nl, e - de, kappa - dk)?;
        let h = 2.0 * (de + dk);
        Ok([(a.p - b.p) / h, (a.m - b.m) / h, (a.r - b.r) / h])
    };
    let rich = |de: f64, dk: f64| -> Result<[f64; 3]> {
        let d1 = central(de, dk)?;
        let d2 = central(0.5 * de, 0.5 * dk)?;
        Ok([0, 1, 2].map(|i| (4.0 * d2[i] - d1[i]) / 3.0))
    };
    let de = rich(step, 0.0)?;
    let dk = rich(0.0, step)?;
    Ok(PeriodGradient { p: (de[0], dk[0]), m: (de[1], dk[1]), r: (de[2], dk[2]) })
}

fn tau_from(g: &PeriodGradient) -> Result<f64> {
    let num = g.m.0 * g.p.1 - g.m.1 * g.p.0;
    let den = g.r.0 * g.p.1 - g.r.1 * g.p.0;
    let size = (g.r.0 * g.p.1).abs() + (g.r.1 * g.p.0).abs();
    if den.abs() <= 1e-10 * size || den == 0.0 {
        return Err(Error::Degenerate("dR/ds = 0: fold of the family".into()));
    }
    Ok(num / den)
}

/// `τ = dM/dR` along the family `P = const`.
pub fn tau(nl: &Nonlinearity, e: f64, kappa: f64) -> Result<f64> {
    tau_from(&period_gradient(nl, e, kappa)?)
}

/// A stationary solution on the family `P(E, κ) = 2L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyPoint {
    pub s: f64,
    pub e: f64,
    pub kappa: f64,
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub p: f64,
    pub m: f64,
    pub r: f64,
    pub tau: f64,
}

impl FamilyPoint {
    pub fn at(nl: &Nonlinearity, e: f64, kappa: f64, s: f64) -> Result<Self> {
        let pi = period_integrals(nl, e, kappa)?;
        Ok(Self {
            s,
            e,
            kappa,
            mu_minus: pi.mu_minus,
            mu_plus: pi.mu_plus,
            p: pi.p,
            m: pi.m,
            r: pi.r,
            tau: tau(nl, e, kappa)?,
        })
    }
}

/// Arclength continuation of `P(E, κ) = start.p`: a tangent predictor
/// `(−P_κ, P_E)/‖∇P‖` and a Newton corrector along `∇P`.
pub fn trace_family(
    nl: &Nonlinearity,
    start: &FamilyPoint,
    steps: usize,
    ds: f64,
) -> Result<Vec<FamilyPoint>> {
    let target = start.p;
    let mut nl = nl.clone();
    let mut out = vec![*start];
    let (mut e, mut kappa) = (start.e, start.kappa);
    for step in 1..=steps {
        nl.well = 0.5 * (out[step - 1].mu_minus + out[step - 1].mu_plus);
        let g = period_gradient(&nl, e, kappa)?;
        let norm = g.p.0.hypot(g.p.1);
        if norm < 1e-10 {
            return Err(Error::Degenerate(format!("‖∇P‖ = {norm:e} at step {step}: fold")));
        }
        e += -ds * g.p.1 / norm;
        kappa += ds * g.p.0 / norm;
        let mut converged = false;
        for _ in 0..30 {
            let p = period_integrals(&nl, e, kappa)?.p;
            let res = p - target;
            if res.abs() <= 1e-13 * target.abs() {
                converged = true;
                break;
            }
            let g = period_gradient(&nl, e, kappa)?;
            let n2 = g.p.0 * g.p.0 + g.p.1 * g.p.1;
            e -= res * g.p.0 / n2;
            kappa -= res * g.p.1 / n2;
        }
        if !converged {
            return Err(Error::NoConvergence { what: "family corrector", iterations: 30 });
        }
        out.push(FamilyPoint::at(&nl, e, kappa, start.s + step as f64 * ds)?);
    }
    Ok(out)
}

/// Stationary profile sampled at the nodes `−L + jh`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub l: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

/// Solution with `fronts` monotone laps between the turning points, so
/// `2L = fronts · P`; `n` intervals.
pub fn stationary_profile(nl: &Nonlinearity, e: f64, kappa: f64, fronts: usize, n: usize) -> Result<Profile> {
    if fronts == 0 || n < 2 {
        return Err(Error::Invalid("need at least one front and two intervals".into()));
    }
    let sm = Smooth::new(nl, e, kappa)?;
    let panels = 512;
    let (gx, gw) = gauss_legendre::<f64>(10);
    let dth = std::f64::consts::FRAC_PI_2 / panels as f64;
    let seg = |a: f64, b: f64| -> Result<f64> {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        gx.iter().zip(&gw).try_fold(0.0, |acc, (x, w)| Ok(acc + w * r * sm.density(c + r * x)?))
    };
    let mut cum = vec![0.0; panels + 1];
    for i in 0..panels {
        cum[i + 1] = cum[i] + seg(i as f64 * dth, (i + 1) as f64 * dth)?;
    }
    let period = cum[panels];
    let l = 0.5 * fronts as f64 * period;
    let h = 2.0 * l / n as f64;
    // u at distance s ∈ [0, P] from μ₋ along one lap
    let lap = |s: f64| -> Result<f64> {
        let s = s.clamp(0.0, period);
        let i = cum.partition_point(|&c| c <= s).clamp(1, panels) - 1;
        let a = i as f64 * dth;
        let mut th = a + dth * (s - cum[i]) / (cum[i + 1] - cum[i]);
        for _ in 0..8 {
            let x = cum[i] + seg(a, th)?;
            th -= (x - s) / sm.density(th)?;
            th = th.clamp(a, a + dth);
        }
        Ok(sm.u(th))
    };
    let mut xs = Vec::with_capacity(n + 1);
    let mut us = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let s = j as f64 * h;
        let q = ((s / period) as usize).min(fronts - 1);
        let local = s - q as f64 * period;
        us.push(if q % 2 == 0 { lap(local)? } else { lap(period - local)? });
        xs.push(-l + s);
    }
    Ok(Profile { l, x: xs, u: us })
}

/// `H` for a quadrature profile.
pub fn profile_operator(nl: &Nonlinearity, profile: &Profile, ends: Ends) -> Result<DiscretizedOperator> {
    let fp: Vec<f64> = profile.u.iter().map(|&u| nl.f_prime(u)).collect();
    build_h_discrete(&fp, profile.l, ends)
}
