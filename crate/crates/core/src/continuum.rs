//! Continuum limit of the integrator chain: `βΔx²ψ'' + (−1+3β)ψ` on `[0, L]`
//! with Dirichlet ends, two Purkinje cells reading `⟨1, ψ⟩` and feeding back
//! through point couplings at `x₁`, `x₂`.
//!
//! Eigenproblem (ρ > 0 adds `+ρᵢPᵢδ(x − xᵢ)`):
//!
//! ```text
//! λψ = βΔx²ψ'' + (−1+3β)ψ + Σ ρᵢ ⟨1,ψ⟩/(Δx(λ+1)) δ(x − xᵢ)
//! ```
//!
//! On the trig branch `λ = −1+3β−βΔx²ω²`, on the hyper branch
//! `λ = −1+3β+βΔx²ω²`. Clearing the `(λ+1)` and Green's-function
//! denominators gives `D̂ + ρ₁P̂₁ + ρ₂P̂₂ = 0` with `Q̂ ≡ 0`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{Branch, CurveBranch, CurvePoint, Kind};
use crate::error::{Error, Result};
use crate::kernel::{DenseMatrix, Tridiagonal};
use crate::Matrix;

/// Purkinje read-out density. Only the constant density is supported.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    Constant(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuumSpec {
    pub n: usize,
    pub l: f64,
    pub alpha: f64,
    pub lambda1_target: f64,
    pub x1: f64,
    pub x2: f64,
    pub phi1: Density,
    pub phi2: Density,
}

impl ContinuumSpec {
    /// `L = 1`, `α = 200`, `λ₁ = −5`, unit densities.
    pub fn new(n: usize, x1: f64, x2: f64) -> Result<Self> {
        let s = Self {
            n,
            l: 1.0,
            alpha: 200.0,
            lambda1_target: -5.0,
            x1,
            x2,
            phi1: Density::Constant(1.0),
            phi2: Density::Constant(1.0),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !(self.l > 0.0) {
            return Err(Error::Invalid("need N ≥ 2 and L > 0".into()));
        }
        if !(0.0 < self.x1 && self.x1 < self.x2 && self.x2 < self.l) {
            return Err(Error::Invalid(format!("need 0 < x1 < x2 < L, got {} {}", self.x1, self.x2)));
        }
        if self.phi1 != Density::Constant(1.0) || self.phi2 != Density::Constant(1.0) {
            return Err(Error::Invalid("only the unit constant density is implemented".into()));
        }
        if !(self.beta() > 0.0) {
            return Err(Error::Invalid("β must be positive".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Same assignment as the discrete chain.
    pub fn beta(&self) -> f64 {
        (self.lambda1_target / self.alpha + 1.0) / (1.0 + 2.0 * (PI / (self.n + 1) as f64).cos())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    Trig,
    Hyper,
}

impl BranchKind {
    fn sign(self) -> f64 {
        match self {
            BranchKind::Trig => -1.0,
            BranchKind::Hyper => 1.0,
        }
    }

    fn curve_branch(self) -> Branch {
        match self {
            BranchKind::Trig => Branch::Trig,
            BranchKind::Hyper => Branch::Hyper,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchParam {
    pub omega: f64,
    pub branch: BranchKind,
}

impl BranchParam {
    pub fn trig(omega: f64) -> Self {
        Self { omega, branch: BranchKind::Trig }
    }

    pub fn hyper(omega: f64) -> Self {
        Self { omega, branch: BranchKind::Hyper }
    }
}

pub fn branch_lambda(bp: BranchParam, spec: &ContinuumSpec) -> f64 {
    let b = spec.beta();
    -1.0 + 3.0 * b + bp.branch.sign() * b * spec.dx().powi(2) * bp.omega * bp.omega
}

/// Inverse of [`branch_lambda`]; `None` when `λ` is not reached by the branch.
pub fn branch_omega(lambda: f64, branch: BranchKind, spec: &ContinuumSpec) -> Option<f64> {
    let b = spec.beta();
    let w2 = branch.sign() * (lambda + 1.0 - 3.0 * b) / (b * spec.dx().powi(2));
    (w2 > 0.0).then(|| w2.sqrt())
}

/// `sin` or `sinh`, `cos` or `cosh` by branch.
fn sn(k: BranchKind, x: f64) -> f64 {
    match k {
        BranchKind::Trig => x.sin(),
        BranchKind::Hyper => x.sinh(),
    }
}

fn cs(k: BranchKind, x: f64) -> f64 {
    match k {
        BranchKind::Trig => x.cos(),
        BranchKind::Hyper => x.cosh(),
    }
}

/// Piecewise eigenfunction `A sn(ωx) | B sn(ωx) + C cs(ωx) | D sn(ω(L−x))`
/// for unit `⟨1,ψ⟩` drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreensSolution {
    pub coeffs: [f64; 4],
    /// Largest absolute residual of the four matching conditions.
    pub residual: f64,
    pub omega: f64,
    pub branch: BranchKind,
    pub x1: f64,
    pub x2: f64,
    pub l: f64,
}

impl GreensSolution {
    /// `(ψ, ψ')` at `x`; at a coupling point the left piece is used unless
    /// `right` is set.
    pub fn eval(&self, x: f64, right: bool) -> (f64, f64) {
        let (k, w) = (self.branch, self.omega);
        let [a, b, c, d] = self.coeffs;
        let s = k.sign();
        let left_of = |p: f64| x < p || (x == p && !right);
        if left_of(self.x1) {
            (a * sn(k, w * x), a * w * cs(k, w * x))
        } else if left_of(self.x2) {
            (b * sn(k, w * x) + c * cs(k, w * x), w * (b * cs(k, w * x) + s * c * sn(k, w * x)))
        } else {
            (d * sn(k, w * (self.l - x)), -d * w * cs(k, w * (self.l - x)))
        }
    }

    /// `⟨1, ψ⟩ = gᵀw`.
    pub fn mass(&self) -> f64 {
        g_vector(self.branch, self.omega, self.x1, self.x2, self.l)
            .iter()
            .zip(&self.coeffs)
            .map(|(g, c)| g * c)
            .sum()
    }
}

/// Integrals of the four basis pieces over their intervals.
pub fn g_vector(k: BranchKind, w: f64, x1: f64, x2: f64, l: f64) -> [f64; 4] {
    let s = k.sign();
    [
        s * (cs(k, w * x1) - 1.0) / w,
        s * (cs(k, w * x2) - cs(k, w * x1)) / w,
        (sn(k, w * x2) - sn(k, w * x1)) / w,
        s * (cs(k, w * (l - x2)) - 1.0) / w,
    ]
}

/// Jump `ψ'(xᵢ⁺) − ψ'(xᵢ⁻) = −ρᵢ/(βΔx³(λ+1))` for unit mass.
fn jump(spec: &ContinuumSpec, bp: BranchParam, rho: f64) -> f64 {
    -rho / (spec.beta() * spec.dx().powi(3) * (branch_lambda(bp, spec) + 1.0))
}

/// Solves the continuity and jump conditions for the coefficients.
pub fn greens_coefficients(
    spec: &ContinuumSpec,
    bp: BranchParam,
    rho1: f64,
    rho2: f64,
) -> Result<GreensSolution> {
    spec.validate()?;
    if !(bp.omega > 0.0) {
        return Err(Error::Domain("ω must be positive".into()));
    }
    if (branch_lambda(bp, spec) + 1.0).abs() < 1e-14 {
        return Err(Error::Domain("λ = −1 is the Purkinje eigenvalue".into()));
    }
    let (k, w, x1, x2, l) = (bp.branch, bp.omega, spec.x1, spec.x2, spec.l);
    let s = k.sign();
    let m = DenseMatrix::from_rows(&[
        vec![sn(k, w * x1), -sn(k, w * x1), -cs(k, w * x1), 0.0],
        vec![0.0, sn(k, w * x2), cs(k, w * x2), -sn(k, w * (l - x2))],
        vec![-w * cs(k, w * x1), w * cs(k, w * x1), s * w * sn(k, w * x1), 0.0],
        vec![0.0, -w * cs(k, w * x2), -s * w * sn(k, w * x2), -w * cs(k, w * (l - x2))],
    ])?;
    let rhs = [0.0, 0.0, jump(spec, bp, rho1), jump(spec, bp, rho2)];
    let lu = m.lu()?;
    if lu.pivot_ratio() < 1e-13 {
        return Err(Error::Singular(format!("resonant ω = {w}")));
    }
    let c = lu.solve(&rhs)?;
    let r = m.matvec(&c);
    let residual = r.iter().zip(&rhs).fold(0f64, |a, (x, y)| a.max((x - y).abs()));
    Ok(GreensSolution { coeffs: [c[0], c[1], c[2], c[3]], residual, omega: w, branch: k, x1, x2, l })
}

/// `1 − ⟨1,ψ⟩` for the unit-drive solution; zero exactly at eigen-triples.
pub fn eigencondition(spec: &ContinuumSpec, bp: BranchParam, rho1: f64, rho2: f64) -> Result<f64> {
    Ok(1.0 - greens_coefficients(spec, bp, rho1, rho2)?.mass())
}

/// Cleared coefficients `[D̂, P̂₁, P̂₂]` and their ω-derivatives.
///
/// Trig: `D̂ = −ω² sin ωL β²Δx³(3 − Δx²ω²)`, `P̂ᵢ = sin ωxᵢ + sin ω(L−xᵢ) − sin ωL`.
/// Hyper: `D̂ = 1`, `P̂ᵢ = f(ω, xᵢ)/(β²Δx³)` with
/// `f = −[sinh ωL − sinh ωxᵢ − sinh ω(L−xᵢ)]/(ω² sinh ωL (3 + Δx²ω²))`.
pub fn cleared(spec: &ContinuumSpec, bp: BranchParam) -> ([f64; 3], [f64; 3]) {
    let (w, l, dx, b) = (bp.omega, spec.l, spec.dx(), spec.beta());
    let c = b * b * dx.powi(3);
    match bp.branch {
        BranchKind::Trig => {
            let ((q1, dq1), (q2, dq2)) = (trig_q(w, spec.x1, l), trig_q(w, spec.x2, l));
            let (a, da) = ((0.5 * w * l).sin(), 0.5 * l * (0.5 * w * l).cos());
            let s = |q: f64| 4.0 * a * q;
            let ds = |q: f64, dq: f64| 4.0 * (da * q + a * dq);
            let e = 3.0 - dx * dx * w * w;
            let d = -w * w * (w * l).sin() * c * e;
            let dd = -c
                * (2.0 * w * (w * l).sin() * e + w * w * l * (w * l).cos() * e
                    - w * w * (w * l).sin() * 2.0 * dx * dx * w);
            ([d, s(q1), s(q2)], [dd, ds(q1, dq1), ds(q2, dq2)])
        }
        BranchKind::Hyper => {
            let f1 = hyper_f(w, spec.x1, l, dx);
            let f2 = hyper_f(w, spec.x2, l, dx);
            ([1.0, f1.0 / c, f2.0 / c], [0.0, f1.1 / c, f2.1 / c])
        }
    }
}

// sin ωx + sin ω(L−x) − sin ωL = 4 sin(ωL/2) q(x), product form keeps
// relative accuracy near the common zeros
fn trig_q(w: f64, x: f64, l: f64) -> (f64, f64) {
    let (b, c) = ((0.5 * w * x).sin(), (0.5 * w * (l - x)).sin());
    let (db, dc) = (0.5 * x * (0.5 * w * x).cos(), 0.5 * (l - x) * (0.5 * w * (l - x)).cos());
    (b * c, db * c + b * dc)
}

/// `(f, ∂f/∂ω)` for the hyper-branch response at `x`.
pub fn hyper_f(w: f64, x: f64, l: f64, dx: f64) -> (f64, f64) {
    let u = (w * l).sinh() - (w * x).sinh() - (w * (l - x)).sinh();
    let du = l * (w * l).cosh() - x * (w * x).cosh() - (l - x) * (w * (l - x)).cosh();
    let e = 3.0 + dx * dx * w * w;
    let v = w * w * (w * l).sinh() * e;
    let dv = 2.0 * w * (w * l).sinh() * e
        + w * w * l * (w * l).cosh() * e
        + w * w * (w * l).sinh() * 2.0 * dx * dx * w;
    (-u / v, -(du * v - u * dv) / (v * v))
}

/// Envelope point `(ρ₁, ρ₂)` at `ω` from the cleared `Q̂ ≡ 0` system, or
/// `None` when `P̂₁∧P̂₂` vanishes.
pub fn envelope_point(spec: &ContinuumSpec, bp: BranchParam) -> Option<(f64, f64)> {
    let ([d, p1, p2], [dd, dp1, dp2]) = cleared(spec, bp);
    let w = p1 * dp2 - p2 * dp1;
    let mag = (p1 * dp2).abs() + (p2 * dp1).abs();
    if w == 0.0 || w.abs() <= 1e-14 * mag {
        return None;
    }
    Some(((p2 * dd - dp2 * d) / w, (d * dp1 - dd * p1) / w))
}

/// Half-width added around a located asymptote.
pub const ASYMPTOTE_PAD: f64 = 2e-3;

fn wedge(spec: &ContinuumSpec, bp: BranchParam) -> f64 {
    if bp.branch == BranchKind::Trig {
        let (w, l) = (bp.omega, spec.l);
        let ((q1, dq1), (q2, dq2)) = (trig_q(w, spec.x1, l), trig_q(w, spec.x2, l));
        let a = (0.5 * w * l).sin();
        return 16.0 * a * a * (q1 * dq2 - q2 * dq1);
    }
    let (p, dp) = cleared(spec, bp);
    p[1] * dp[2] - p[2] * dp[1]
}

/// Envelope over `omega_samples` (ascending). Sign changes of `P̂₁∧P̂₂`
/// between samples are asymptotes, refined by bisection and stored as gaps.
pub fn continuum_envelope(
    spec: &ContinuumSpec,
    omega_samples: &[f64],
    branch: BranchKind,
) -> Result<CurveBranch> {
    spec.validate()?;
    if omega_samples.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::Domain("ω samples must be positive".into()));
    }
    let mut c = CurveBranch::new(Kind::Envelope, branch.curve_branch());
    let pts: Vec<Option<CurvePoint>> = omega_samples
        .par_iter()
        .map(|&w| {
            let bp = BranchParam { omega: w, branch };
            if (branch_lambda(bp, spec) + 1.0).abs() < 1e-12 {
                return None;
            }
            envelope_point(spec, bp).map(|(r1, r2)| CurvePoint {
                rho1: r1,
                rho2: r2,
                parameter: w,
                branch: branch.curve_branch(),
            })
        })
        .collect();
    c.points = pts.into_iter().flatten().collect();
    let ws: Vec<f64> =
        omega_samples.par_iter().map(|&w| wedge(spec, BranchParam { omega: w, branch })).collect();
    let mut gaps: Vec<(f64, f64)> = Vec::new();
    for k in 1..ws.len() {
        if ws[k - 1] == 0.0 || ws[k - 1].signum() == ws[k].signum() {
            continue;
        }
        let (mut a, mut b, fa) = (omega_samples[k - 1], omega_samples[k], ws[k - 1]);
        while b - a > 1e-9 * (1.0 + b) {
            let m = 0.5 * (a + b);
            if wedge(spec, BranchParam { omega: m, branch }).signum() == fa.signum() {
                a = m;
            } else {
                b = m;
            }
        }
        // the wedge has zeros of order three and higher at the asymptotes, so
        // rounding blurs the sign change; pad and merge
        let (a, b) = (a - ASYMPTOTE_PAD, b + ASYMPTOTE_PAD);
        match gaps.last_mut() {
            Some(g) if a <= g.1 => g.1 = b,
            _ => gaps.push((a, b)),
        }
    }
    c.points.retain(|p| !gaps.iter().any(|&(a, b)| p.parameter > a && p.parameter < b));
    c.gaps = gaps;
    Ok(c)
}

/// Hyper-branch envelope point at `λ = 0`, where the integrating eigenvalue
/// enters; `None` if the branch does not reach `λ = 0`.
pub fn hyper_start(spec: &ContinuumSpec) -> Option<(f64, (f64, f64))> {
    let w0 = branch_omega(0.0, BranchKind::Hyper, spec)?;
    envelope_point(spec, BranchParam::hyper(w0)).map(|p| (w0, p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadrantCheck {
    /// Sign of `ρ₁/ρ₂ = −F_ω(x₂)/F_ω(x₁)` on the hyper-branch envelope.
    pub sign_ratio: f64,
    pub xs: Vec<f64>,
    /// `F_ω(x) = ∂f/∂ω` on `xs`.
    pub f_values: Vec<f64>,
    pub endpoints_vanish: bool,
    pub interior_positive: bool,
}

/// Quantities of the first-quadrant lemma at one `ω` (hyper branch).
pub fn quadrant_sign_check(spec: &ContinuumSpec, omega: f64, x1: f64, x2: f64) -> Result<QuadrantCheck> {
    if !(omega > 0.0) || !(0.0 < x1 && x1 < spec.l) || !(0.0 < x2 && x2 < spec.l) {
        return Err(Error::Domain("need ω > 0 and 0 < x₁, x₂ < L".into()));
    }
    let (l, dx) = (spec.l, spec.dx());
    let fw = |x: f64| hyper_f(omega, x, l, dx).1;
    let n = 64;
    let xs: Vec<f64> = (0..=n).map(|k| l * k as f64 / n as f64).collect();
    let f_values: Vec<f64> = xs.iter().map(|&x| fw(x)).collect();
    let size = f_values.iter().fold(0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let endpoints_vanish =
        f_values[0].abs() <= 1e-12 * size.max(1.0) && f_values[n].abs() <= 1e-12 * size.max(1.0);
    let interior_positive = f_values[1..n].iter().all(|&v| v > 0.0);
    Ok(QuadrantCheck {
        sign_ratio: (-fw(x2) / fw(x1)).signum(),
        xs,
        f_values,
        endpoints_vanish,
        interior_positive,
    })
}

/// Finite-difference discretisation on `n_fd` cells of width `h`: interior
/// block `βΔx²/h²·tridiag(1,−2,1) + (−1+3β)I`, coupling `ρᵢ/h` at the node
/// nearest `xᵢ`, Purkinje rows `h/Δx` (trapezoid mass) and `−1`.
#[derive(Clone, Debug)]
pub struct FdOperator {
    pub t: Tridiagonal<f64>,
    pub h: f64,
    pub dx: f64,
    pub nodes: [usize; 2],
    pub rho: [f64; 2],
}

impl FdOperator {
    pub fn new(spec: &ContinuumSpec, rho1: f64, rho2: f64, n_fd: usize) -> Result<Self> {
        spec.validate()?;
        if n_fd < 4 {
            return Err(Error::Invalid("n_fd too small".into()));
        }
        let h = spec.l / n_fd as f64;
        let m = n_fd - 1;
        let b = spec.beta();
        let k = b * spec.dx().powi(2) / (h * h);
        let t = Tridiagonal::new(vec![k; m], vec![-2.0 * k - 1.0 + 3.0 * b; m], vec![k; m])?;
        let node = |x: f64| ((x / h).round() as usize).clamp(1, m) - 1;
        Ok(Self { t, h, dx: spec.dx(), nodes: [node(spec.x1), node(spec.x2)], rho: [rho1, rho2] })
    }

    pub fn dim(&self) -> usize {
        self.t.len() + 2
    }

    pub fn to_dense(&self) -> Matrix {
        let m = self.t.len();
        let mut a = DenseMatrix::zeros(m + 2, m + 2);
        for i in 0..m {
            a[(i, i)] = self.t.diag[i];
            if i + 1 < m {
                a[(i, i + 1)] = self.t.sup[i];
                a[(i + 1, i)] = self.t.sub[i + 1];
            }
        }
        for p in 0..2 {
            a[(self.nodes[p], m + p)] = self.rho[p] / self.h;
            for j in 0..m {
                a[(m + p, j)] = self.h / self.dx;
            }
            a[(m + p, m + p)] = -1.0;
        }
        a
    }

    /// `1 + λ + Σ ρᵢ yₖᵢ/Δx` with `y = (T − λ)⁻¹𝟙`; away from `λ = −1` and
    /// the interior spectrum its zeros are the coupled eigenvalues.
    pub fn secular(&self, lambda: f64) -> Result<f64> {
        let y = self.t.shifted(lambda).solve_pivoted(&vec![1.0; self.t.len()])?;
        Ok(1.0 + lambda + (self.rho[0] * y[self.nodes[0]] + self.rho[1] * y[self.nodes[1]]) / self.dx)
    }

    /// A real eigenvalue in `[lo, hi]` by scanning the secular function for a
    /// sign change free of poles, then bisecting.
    pub fn eigenvalue_in(&self, lo: f64, hi: f64, scan: usize) -> Result<f64> {
        let xs: Vec<f64> = (0..=scan).map(|k| lo + (hi - lo) * k as f64 / scan as f64).collect();
        let vals = xs.iter().map(|&x| self.secular(x)).collect::<Result<Vec<_>>>()?;
        for k in 0..scan {
            if vals[k].signum() == vals[k + 1].signum() {
                continue;
            }
            // a pole of (T − λ)⁻¹ also flips the sign; skip brackets containing one
            if self.t.count_below(xs[k + 1]) != self.t.count_below(xs[k]) {
                continue;
            }
            let (mut a, mut b, fa) = (xs[k], xs[k + 1], vals[k]);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if self.secular(m)?.signum() == fa.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(0.5 * (a + b));
        }
        Err(Error::NoConvergence { what: "no eigenvalue bracketed", iterations: scan })
    }
}

/// `ρ₁` at fixed `(ω, ρ₂)` solving the eigencondition by bisection on
/// `[lo, hi]`.
pub fn solve_rho1(spec: &ContinuumSpec, bp: BranchParam, rho2: f64, lo: f64, hi: f64) -> Result<f64> {
    let f = |r: f64| eigencondition(spec, bp, r, rho2);
    let (mut a, mut b) = (lo, hi);
    let fa = f(a)?;
    if fa.signum() == f(b)?.signum() {
        return Err(Error::Domain("eigencondition does not change sign on the bracket".into()));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m)?.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}
