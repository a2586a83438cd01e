//! Discrete integrator networks: vestibular chain plus two Purkinje cells.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ak::{AKDecomposition, LowRankProblem};
use crate::curves::Rows;
use crate::error::{Error, Result};
use crate::kernel::{dot, eig_dense, inverse_iteration, norm2, DenseMatrix};
use crate::{Matrix, C64};

/// Network description. Rates are in 1/s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub n: usize,
    pub alpha: f64,
    /// Top eigenvalue of `αT` (negative for a leaky integrator).
    pub lambda1_target: f64,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    /// Input and readout pattern, length `n + 2`.
    pub b: Vec<f64>,
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}

impl NetworkSpec {
    fn six(w1: [f64; 6], w2: [f64; 6]) -> Self {
        let mut b = vec![1.0; 6];
        b.extend([0.0, 0.0]);
        Self {
            n: 6,
            alpha: 200.0,
            lambda1_target: -5.0,
            u1: unit(6, 0),
            u2: unit(6, 2),
            w1: w1.to_vec(),
            w2: w2.to_vec(),
            b,
        }
    }

    pub fn ag_normal() -> Self {
        Self::six([-1.0, 1.0, -1.0, 0.0, -1.0, 0.0], [1.0, -1.0, 1.0, 1.0, 0.0, 0.0])
    }

    pub fn ag_in() -> Self {
        Self::six([-1.0, 1.0, 0.0, 0.0, -1.0, 0.0], [1.0, -1.0, 0.0, 0.0, 1.0, 0.0])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    AgNormal,
    AgIn,
    Example1,
}

impl Preset {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "ag_normal" => Some(Self::AgNormal),
            "ag_in" => Some(Self::AgIn),
            "example1" => Some(Self::Example1),
            _ => None,
        }
    }

    pub fn spec(self) -> Option<NetworkSpec> {
        match self {
            Self::AgNormal => Some(NetworkSpec::ag_normal()),
            Self::AgIn => Some(NetworkSpec::ag_in()),
            Self::Example1 => None,
        }
    }

    pub fn problem(self) -> Result<LowRankProblem> {
        match self.spec() {
            Some(s) => build_network(&s),
            None => Ok(LowRankProblem::example1()),
        }
    }
}

/// Nearest-neighbour chain `T` with `β` chosen so the top eigenvalue of `αT`
/// is `lambda1`.
pub fn build_t(n: usize, alpha: f64, lambda1: f64) -> Result<(Matrix, f64)> {
    if n < 2 {
        return Err(Error::Invalid(format!("need at least two vestibular cells, got {n}")));
    }
    if !(alpha > 0.0) || !(lambda1.abs() < alpha) {
        return Err(Error::Invalid(format!("need α > 0 and |λ₁| < α (α = {alpha}, λ₁ = {lambda1})")));
    }
    let beta = (lambda1 / alpha + 1.0) / (1.0 + 2.0 * (std::f64::consts::PI / (n + 1) as f64).cos());
    let t = DenseMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => -1.0 + beta,
        1 => beta,
        _ => 0.0,
    });
    Ok((t, beta))
}

fn basis_index(u: &[f64]) -> Option<usize> {
    let ones: Vec<usize> = (0..u.len()).filter(|&i| u[i] != 0.0).collect();
    (ones.len() == 1 && u[ones[0]] == 1.0).then(|| ones[0])
}

/// The `(N+2)×(N+2)` problem `α[[T,0,0],[w₁ᵀ,−1,0],[w₂ᵀ,0,−1]]` with
/// `fᵢ = −α[uᵢ;0;0]` and `gᵢ` picking Purkinje cell `i`, so `ρᵢ > 0` is
/// inhibitory feedback.
pub fn build_network(spec: &NetworkSpec) -> Result<LowRankProblem> {
    let n = spec.n;
    for (name, v, len) in [
        ("u1", &spec.u1, n),
        ("u2", &spec.u2, n),
        ("w1", &spec.w1, n),
        ("w2", &spec.w2, n),
        ("b", &spec.b, n + 2),
    ] {
        if v.len() != len {
            return Err(Error::Dimension(format!("{name} has length {}, expected {len}", v.len())));
        }
    }
    let k1 =
        basis_index(&spec.u1).ok_or_else(|| Error::Invalid("u1 is not a canonical basis vector".into()))?;
    let k2 =
        basis_index(&spec.u2).ok_or_else(|| Error::Invalid("u2 is not a canonical basis vector".into()))?;
    let (t, _) = build_t(n, spec.alpha, spec.lambda1_target)?;
    let a = spec.alpha;
    let m = DenseMatrix::from_fn(n + 2, n + 2, |i, j| {
        a * match (i < n, j < n) {
            (true, true) => t.row(i)[j],
            (true, false) => 0.0,
            (false, true) => [&spec.w1, &spec.w2][i - n][j],
            (false, false) => {
                if i == j {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    });
    let mut f1 = vec![0.0; n + 2];
    let mut f2 = vec![0.0; n + 2];
    f1[k1] = -a;
    f2[k2] = -a;
    LowRankProblem::rank_two(m, f1, unit(n + 2, n), f2, unit(n + 2, n + 1))
}

/// `ρ₁` on the curve where `λ` is an eigenvalue, at the given `ρ₂`.
pub fn constant_tau_rho1(d: &AKDecomposition, lambda: f64, rho2: f64) -> Result<f64> {
    let (dv, p1, p2, q) = (d.d.eval(lambda), d.p1.eval(lambda), d.p2.eval(lambda), d.q.eval(lambda));
    let den = p1 + rho2 * q;
    let num = dv + rho2 * p2;
    if den.abs() <= 1e-13 * (p1.abs() + (rho2 * q).abs() + num.abs()).max(f64::MIN_POSITIVE) {
        return Err(Error::Domain(format!("asymptote of the λ = {lambda} curve at ρ₂ = {rho2}")));
    }
    Ok(-num / den)
}

/// `ρ₁ = (a + bρ₂)/(1 + cρ₂)`, the normalised form of the constant-λ curve.
pub fn constant_tau_coefficients(d: &AKDecomposition, lambda: f64) -> Result<(f64, f64, f64)> {
    let p1 = d.p1.eval(lambda);
    if p1 == 0.0 {
        return Err(Error::Domain("P₁(λ) = 0".into()));
    }
    Ok((-d.d.eval(lambda) / p1, -d.p2.eval(lambda) / p1, d.q.eval(lambda) / p1))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gamma {
    Finite(f64),
    /// `⟨f₁,e₁⟩ ≈ 0`: the dominant eigenvalue is (nearly) defective.
    Divergent,
}

impl Gamma {
    pub fn value(self) -> Option<f64> {
        match self {
            Gamma::Finite(g) => Some(g),
            Gamma::Divergent => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub gamma_predicted: Gamma,
    pub gamma_measured: Option<f64>,
    pub dominant_lambda: f64,
}

/// Required gap `Re λ₁ − Re λ₂` relative to `max(1, |λ₁|)`.
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// `γ = ⟨b,e₁⟩⟨f₁,b⟩ / (⟨f₁,e₁⟩‖b‖²)` for the dominant real eigenvalue, with
/// unit right (`e₁`) and left (`f₁`) eigenvectors.
pub fn gain(p: &LowRankProblem, rho1: f64, rho2: f64, b: &[f64], margin: f64) -> Result<GainReport> {
    if b.len() != p.n() {
        return Err(Error::Dimension(format!("b has length {}, expected {}", b.len(), p.n())));
    }
    let bb = dot(b, b);
    if bb == 0.0 {
        return Err(Error::Invalid("b is zero".into()));
    }
    let a = p.perturbed_matrix(rho1, rho2);
    let mut ev = eig_dense(&a)?.values;
    ev.sort_by(|x, y| y.re.total_cmp(&x.re));
    let l1 = ev[0];
    let size = 1.0f64.max(ev.iter().fold(0.0, |m, z| m.max(z.norm())));
    if l1.im.abs() > 1e-9 * size {
        return Err(Error::Domain(format!("dominant eigenvalue {l1} is not real")));
    }
    let divergent = |lam: f64| GainReport {
        gamma_predicted: Gamma::Divergent,
        gamma_measured: None,
        dominant_lambda: lam,
    };
    if ev.len() > 1 {
        let gap = l1.re - ev[1].re;
        if gap.abs() <= 1e-9 * size {
            return Ok(divergent(l1.re));
        }
        if gap < margin * l1.re.abs().max(1.0) {
            return Err(Error::Domain(format!("dominant eigenvalue not separated (gap {gap:e})")));
        }
    }
    let lam = C64::new(l1.re, 0.0);
    let e: Vec<f64> = inverse_iteration(&a, lam)?.iter().map(|z| z.re).collect();
    let f: Vec<f64> = inverse_iteration(&a.transpose(), lam)?.iter().map(|z| z.re).collect();
    let (e, mut f) = (unit_vec(e), unit_vec(f));
    let mut fe = dot(&f, &e);
    if fe < 0.0 {
        f.iter_mut().for_each(|x| *x = -*x);
        fe = -fe;
    }
    if fe <= 1e-10 {
        return Ok(divergent(l1.re));
    }
    let g = dot(b, &e) * dot(&f, b) / (fe * bb);
    Ok(GainReport { gamma_predicted: Gamma::Finite(g), gamma_measured: None, dominant_lambda: l1.re })
}

fn unit_vec(v: Vec<f64>) -> Vec<f64> {
    let n = norm2(&v);
    v.into_iter().map(|x| x / n).collect()
}

/// `⟨b, v(t)⟩` for `v̇ = M̃v`, `v(0) = b`, by classical RK4. Returns
/// `(t, response)` pairs including `t = 0`.
pub fn impulse_response(
    p: &LowRankProblem,
    rho1: f64,
    rho2: f64,
    b: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Vec<(f64, f64)>> {
    if b.len() != p.n() {
        return Err(Error::Dimension(format!("b has length {}, expected {}", b.len(), p.n())));
    }
    let a = p.perturbed_matrix(rho1, rho2);
    let radius = eig_dense(&a)?.values.iter().fold(0f64, |m, z| m.max(z.norm()));
    if !(dt > 0.0) || dt * radius > 0.1 || !(t_end >= 0.0) {
        return Err(Error::Invalid(format!("step {dt} does not resolve spectral radius {radius:.4}")));
    }
    let steps = (t_end / dt).round() as usize;
    let mut v = b.to_vec();
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, dot(b, &v)));
    let axpy =
        |x: &[f64], s: f64, y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(a, b)| a + s * b).collect() };
    for k in 1..=steps {
        let k1 = a.matvec(&v);
        let k2 = a.matvec(&axpy(&v, dt / 2.0, &k1));
        let k3 = a.matvec(&axpy(&v, dt / 2.0, &k2));
        let k4 = a.matvec(&axpy(&v, dt, &k3));
        for i in 0..v.len() {
            v[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push((k as f64 * dt, dot(b, &v)));
    }
    Ok(out)
}

/// `max |response| / ‖b‖²`.
pub fn measured_gain(series: &[(f64, f64)], b: &[f64]) -> f64 {
    let bb = dot(b, b);
    if series.is_empty() || bb == 0.0 {
        return 0.0;
    }
    series.iter().fold(0f64, |m, s| m.max(s.1.abs())) / bb
}

/// One operating point on a constant-λ curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub rho1: f64,
    pub rho2: f64,
    pub gamma: Option<f64>,
    pub measured: f64,
}

/// Predicted and measured gain at each `ρ₂` along the `λ` curve, in parallel.
pub fn gains_along_curve(
    p: &LowRankProblem,
    d: &AKDecomposition,
    lambda: f64,
    rho2: &[f64],
    b: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Vec<OperatingPoint>> {
    rho2.par_iter()
        .map(|&r2| {
            let r1 = constant_tau_rho1(d, lambda, r2)?;
            let gamma = gain(p, r1, r2, b, DEFAULT_MARGIN).ok().and_then(|g| g.gamma_predicted.value());
            let measured = measured_gain(&impulse_response(p, r1, r2, b, t_end, dt)?, b);
            Ok(OperatingPoint { rho1: r1, rho2: r2, gamma, measured })
        })
        .collect()
}

/// `ρ₂` values in `[lo, hi]` where a sign change of `h` along the `λ` curve
/// is bracketed, refined by bisection; brackets straddling the asymptote are
/// dropped.
fn crossings(
    d: &AKDecomposition,
    lambda: f64,
    lo: f64,
    hi: f64,
    n: usize,
    h: &(dyn Fn(f64, f64) -> Option<f64> + Sync),
) -> Vec<f64> {
    let eval = |r2: f64| constant_tau_rho1(d, lambda, r2).ok().and_then(|r1| h(r1, r2));
    let den = |r2: f64| d.p1.eval(lambda) + r2 * d.q.eval(lambda);
    let xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let vals: Vec<Option<f64>> = xs.par_iter().map(|&x| eval(x)).collect();
    let mut out = Vec::new();
    for k in 0..n {
        let (Some(ya), Some(yb)) = (vals[k], vals[k + 1]) else { continue };
        if ya.signum() == yb.signum() || den(xs[k]).signum() != den(xs[k + 1]).signum() {
            continue;
        }
        let (mut a, mut b, mut fa) = (xs[k], xs[k + 1], ya);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            match eval(m) {
                Some(fm) if fm.signum() == fa.signum() => {
                    a = m;
                    fa = fm;
                }
                Some(_) => b = m,
                None => break,
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// Where the `λ` curve meets the envelope (`λ` becomes a double eigenvalue).
pub fn envelope_crossings(d: &AKDecomposition, lambda: f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let r = Rows::at(d, lambda).f1;
    crossings(d, lambda, lo, hi, n, &|r1, r2| Some(r[0] + r[1] * r1 + r[2] * r2 + r[3] * r1 * r2))
}

/// Where a non-real pair crosses the imaginary axis along the `λ` curve.
pub fn hopf_crossings(
    p: &LowRankProblem,
    d: &AKDecomposition,
    lambda: f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> Vec<f64> {
    crossings(d, lambda, lo, hi, n, &|r1, r2| {
        let ev = eig_dense(&p.perturbed_matrix(r1, r2)).ok()?.values;
        let size = ev.iter().fold(1f64, |m, z| m.max(z.norm()));
        ev.iter().filter(|z| z.im.abs() > 1e-7 * size).map(|z| z.re).max_by(f64::total_cmp)
    })
}

/// Rational model `γ(ρ₂) ≈ c(ρ₂ − z₁)(ρ₂ − z₂)/((ρ₂ − q₁)(ρ₂ − q₂))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainRational {
    pub scale: f64,
    pub zeros: [C64; 2],
    pub poles: [C64; 2],
}

impl GainRational {
    pub fn eval(&self, x: f64) -> f64 {
        let x = C64::new(x, 0.0);
        (self.scale * (x - self.zeros[0]) * (x - self.zeros[1]) / ((x - self.poles[0]) * (x - self.poles[1])))
            .re
    }
}

/// Least-squares (2,2) rational fit of `γ` along the `λ` curve.
pub fn fit_gain_rational(
    p: &LowRankProblem,
    d: &AKDecomposition,
    lambda: f64,
    rho2: &[f64],
    b: &[f64],
) -> Result<GainRational> {
    let pts: Vec<(f64, f64)> = rho2
        .iter()
        .filter_map(|&x| {
            let r1 = constant_tau_rho1(d, lambda, x).ok()?;
            let g = gain(p, r1, x, b, DEFAULT_MARGIN).ok()?.gamma_predicted.value()?;
            Some((x, g))
        })
        .collect();
    if pts.len() < 5 {
        return Err(Error::Domain("too few finite gains to fit".into()));
    }
    // y(1 + d₁x + d₂x²) = n₀ + n₁x + n₂x²
    let rows: Vec<[f64; 5]> = pts.iter().map(|&(x, y)| [1.0, x, x * x, -y * x, -y * x * x]).collect();
    let ata = DenseMatrix::from_fn(5, 5, |i, j| rows.iter().map(|r| r[i] * r[j]).sum());
    let atb: Vec<f64> = (0..5).map(|i| rows.iter().zip(&pts).map(|(r, p)| r[i] * p.1).sum()).collect();
    let c = ata.lu()?.solve(&atb)?;
    let quad = |a0: f64, a1: f64, a2: f64| {
        let disc = C64::new(a1 * a1 - 4.0 * a2 * a0, 0.0).sqrt();
        [(-a1 + disc) / (2.0 * a2), (-a1 - disc) / (2.0 * a2)]
    };
    Ok(GainRational { scale: c[2] / c[4], zeros: quad(c[0], c[1], c[2]), poles: quad(1.0, c[3], c[4]) })
}
