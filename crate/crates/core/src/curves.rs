//! Distinguished curves in the `(ρ₁, ρ₂)` plane.
//!
//! Everything here reduces to one problem: two bilinear equations
//! `aᵢ + bᵢρ₁ + cᵢρ₂ + dᵢρ₁ρ₂ = 0`. Eliminating `ρ₂` gives a quadratic in
//! `ρ₁` whose coefficients are 2×2 minors (Wronskians when the second row is
//! the λ-derivative of the first, Re/Im cross products for the Hopf curve).

use std::fmt;
use std::io::Write;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::ak::AKDecomposition;
use crate::error::{Error, Result};
use crate::kernel::{poly_roots, Poly};
use crate::{Polynomial, C64};

/// Relative threshold for numerical rank and vanishing minors.
pub const RANK_TOL: f64 = 1e-9;
/// Relative slack under which a negative discriminant counts as zero.
pub const DISC_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Plus,
    Minus,
    Single,
    /// Continuum envelope, oscillatory eigenfunctions.
    Trig,
    /// Continuum envelope, exponential eigenfunctions.
    Hyper,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
            Branch::Single => "single",
            Branch::Trig => "trig",
            Branch::Hyper => "hyper",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    ConstantEigenvalue,
    Envelope,
    Hopf,
    ZeroEigenvalue,
    SingularPiece,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::ConstantEigenvalue => "constant-eigenvalue",
            Kind::Envelope => "envelope",
            Kind::Hopf => "hopf",
            Kind::ZeroEigenvalue => "zero-eigenvalue",
            Kind::SingularPiece => "singular-piece",
        })
    }
}

impl Kind {
    /// Name of the variable stored in [`CurvePoint::parameter`].
    pub fn parameter_name(self) -> &'static str {
        match self {
            Kind::Envelope => "lambda",
            Kind::Hopf => "omega",
            Kind::ConstantEigenvalue | Kind::ZeroEigenvalue => "rho2",
            Kind::SingularPiece => "t",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub rho1: f64,
    pub rho2: f64,
    /// λ on envelopes, ω on Hopf curves, the swept `ρ₂` on constant-eigenvalue
    /// curves, a line coordinate on singular pieces.
    pub parameter: f64,
    pub branch: Branch,
}

/// Sampled curve. `gaps` are open parameter intervals with no points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveBranch {
    pub kind: Kind,
    pub branch: Branch,
    /// Eigenvalue shared by all points, for constant-eigenvalue curves and
    /// singular pieces.
    pub level: Option<f64>,
    pub points: Vec<CurvePoint>,
    pub gaps: Vec<(f64, f64)>,
}

impl CurveBranch {
    pub(crate) fn new(kind: Kind, branch: Branch) -> Self {
        Self { kind, branch, level: None, points: Vec::new(), gaps: Vec::new() }
    }

    /// Name of the parameter column; continuum envelopes are swept in ω.
    pub fn parameter_name(&self) -> &'static str {
        match self.branch {
            Branch::Trig | Branch::Hyper => "omega",
            _ => self.kind.parameter_name(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One CSV row per point; gaps as `# gap a b` comment lines.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for p in &self.points {
            writeln!(w, "{},{},{:.15e},{:.15e},{:.15e}", self.kind, p.branch, p.parameter, p.rho1, p.rho2)?;
        }
        for (a, b) in &self.gaps {
            writeln!(w, "# gap {a:.15e} {b:.15e}")?;
        }
        Ok(())
    }
}

/// Writes a header naming the parameter, then every branch.
pub fn write_curves_csv<W: Write>(branches: &[CurveBranch], w: &mut W) -> std::io::Result<()> {
    let unit = |param: &str| match param {
        "lambda" => "eigenvalue, 1/time",
        "omega" => "frequency, rad/time",
        _ => "dimensionless",
    };
    let mut seen: Vec<String> = Vec::new();
    for b in branches {
        let p = b.parameter_name();
        let entry = format!("{} -> {p} ({})", b.kind, unit(p));
        if !seen.contains(&entry) {
            seen.push(entry);
        }
    }
    if seen.is_empty() {
        seen.push("none".into());
    }
    writeln!(w, "# parameter: {}; rho1, rho2 dimensionless", seen.join(", "))?;
    writeln!(w, "kind,branch,parameter,rho1,rho2")?;
    for b in branches {
        if let Some(l) = b.level {
            writeln!(w, "# level lambda = {l:.15e}")?;
        }
        b.write_csv(w)?;
    }
    Ok(())
}

/// A bilinear row `a + bρ₁ + cρ₂ + dρ₁ρ₂`.
pub type Row = [f64; 4];

/// Outcome of solving two bilinear equations.
#[derive(Clone, Debug, PartialEq)]
pub enum PairSolution {
    /// Real solutions `(branch, ρ₁, ρ₂)`; may be empty when roots lie at infinity.
    Real(Vec<(Branch, f64, f64)>),
    /// The eliminant has complex roots.
    Complex,
    /// The eliminant vanishes identically: no isolated solution.
    Degenerate,
}

/// Solves `r₁ = r₂ = 0` for `(ρ₁, ρ₂)`.
///
/// The quadratic is taken in `ρ₁`, or in `ρ₂` when `swap`. `Plus`/`Minus`
/// tag the sign of the square root in the quadratic formula; `single`
/// tags every root `Single`.
pub fn solve_pair(r1: Row, r2: Row, swap: bool, single: bool) -> PairSolution {
    let (r1, r2) = if swap { (sw(r1), sw(r2)) } else { (r1, r2) };
    let [a1, b1, c1, d1] = r1;
    let [a2, b2, c2, d2] = r2;
    let s = r1.iter().chain(&r2).fold(0f64, |m, x| m.max(x.abs()));
    if s == 0.0 {
        return PairSolution::Degenerate;
    }
    let qa = b1 * d2 - b2 * d1;
    let qb = a1 * d2 - a2 * d1 + b1 * c2 - b2 * c1;
    let qc = a1 * c2 - a2 * c1;
    let z = 1e-13 * s * s;
    let mut roots: Vec<(Branch, f64)> = Vec::new();
    let lab = |sign: f64| {
        if single {
            Branch::Single
        } else if sign > 0.0 {
            Branch::Plus
        } else {
            Branch::Minus
        }
    };
    if qa.abs() <= z {
        if qb.abs() <= z {
            if qc.abs() <= z {
                return PairSolution::Degenerate;
            }
            // a nonzero constant eliminant: no finite solution
            return PairSolution::Real(Vec::new());
        }
        roots.push((lab(qb.signum()), -qc / qb));
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < -DISC_TOL * s.powi(4) {
            return PairSolution::Complex;
        }
        let sq = disc.max(0.0).sqrt();
        let sg = if qb >= 0.0 { 1.0 } else { -1.0 };
        let q = -0.5 * (qb + sg * sq);
        if q == 0.0 {
            roots.push((lab(1.0), 0.0));
            roots.push((lab(-1.0), 0.0));
        } else {
            // when both q and qc sit at rounding level qc/q is noise; keep the
            // candidate with the smaller residual
            let res = |x: f64| (qa * x * x + qb * x + qc).abs();
            let (stable, direct) = (qc / q, (-qb + sg * sq) / (2.0 * qa));
            roots.push((lab(-sg), q / qa));
            roots.push((lab(sg), if res(direct) < res(stable) { direct } else { stable }));
        }
    }
    let mut out = Vec::with_capacity(2);
    for (br, x) in roots {
        let den1 = c1 + d1 * x;
        let den2 = c2 + d2 * x;
        let (num, den) = if den1.abs() >= den2.abs() { (a1 + b1 * x, den1) } else { (a2 + b2 * x, den2) };
        if den.abs() <= 1e-13 * s * (1.0 + x.abs()) {
            debug!("second coordinate undetermined at root {x}");
            continue;
        }
        let y = -num / den;
        out.push(if swap { (br, y, x) } else { (br, x, y) });
    }
    PairSolution::Real(out)
}

fn sw(r: Row) -> Row {
    [r[0], r[2], r[1], r[3]]
}

/// `[D, P₁, P₂, Q]` and their first three λ-derivatives at `λ`.
#[derive(Clone, Copy, Debug)]
pub struct Rows {
    pub f: Row,
    pub f1: Row,
    pub f2: Row,
}

impl Rows {
    pub fn at(d: &AKDecomposition, lambda: f64) -> Self {
        let e = |p: &Polynomial| p.eval_with_derivs(lambda);
        let (a, b, c, q) = (e(&d.d), e(&d.p1), e(&d.p2), e(&d.q));
        let row = |k: usize| [a[k], b[k], c[k], q[k]];
        Self { f: row(0), f1: row(1), f2: row(2) }
    }
}

fn eval_row(r: &Row, rho1: f64, rho2: f64) -> f64 {
    r[0] + r[1] * rho1 + r[2] * rho2 + r[3] * rho1 * rho2
}

fn row_mag(r: &Row, rho1: f64, rho2: f64) -> f64 {
    r[0].abs() + (r[1] * rho1).abs() + (r[2] * rho2).abs() + (r[3] * rho1 * rho2).abs()
}

/// Pivot in `ρ₂` when `P₁∧Q` vanishes identically but `P₂∧Q` does not.
fn envelope_swap(d: &AKDecomposition) -> bool {
    let w1 = d.p1.wronskian(&d.q);
    let w2 = d.p2.wronskian(&d.q);
    let s = d.coeff_scale().powi(2);
    w1.is_negligible(1e-12 * s) && !w2.is_negligible(1e-12 * s)
}

/// Points on the λ-eigenvalue curve `ρ₁ = −(D + ρ₂P₂)/(P₁ + ρ₂Q)`.
pub fn constant_eigenvalue_curve(
    d: &AKDecomposition,
    lambda: f64,
    rho2_samples: &[f64],
) -> Result<CurveBranch> {
    let r = Rows::at(d, lambda).f;
    level_curve(r, lambda, rho2_samples, Kind::ConstantEigenvalue)
}

/// The `λ = 0` curve.
pub fn zero_curve(d: &AKDecomposition, rho2_samples: &[f64]) -> Result<CurveBranch> {
    let r = Rows::at(d, 0.0).f;
    level_curve(r, 0.0, rho2_samples, Kind::ZeroEigenvalue)
}

fn level_curve(r: Row, lambda: f64, samples: &[f64], kind: Kind) -> Result<CurveBranch> {
    let [dv, p1, p2, q] = r;
    let s = r.iter().fold(0f64, |m, x| m.max(x.abs()));
    let tiny = 1e-12 * s.max(f64::MIN_POSITIVE);
    if p1.abs() <= tiny && q.abs() <= tiny {
        return Err(if p2.abs() > tiny {
            Error::Degenerate(format!("λ = {lambda}: curve is the line ρ₂ = {}", -dv / p2))
        } else {
            Error::Degenerate(format!("λ = {lambda}: every coefficient vanishes"))
        });
    }
    let mut out = CurveBranch::new(kind, Branch::Single);
    out.level = Some(lambda);
    let mut prev: Option<(f64, f64)> = None;
    let mut gap_start: Option<f64> = None;
    for &t in samples {
        let den = p1 + t * q;
        if den.abs() <= tiny * (1.0 + t.abs()) {
            if gap_start.is_none() {
                gap_start = Some(prev.map_or(t, |p| p.0));
            }
            continue;
        }
        if let Some(g) = gap_start.take() {
            out.gaps.push((g, t));
        } else if let Some((pt, pd)) = prev {
            if pd.signum() != den.signum() {
                out.gaps.push((pt, t));
            }
        }
        out.points.push(CurvePoint {
            rho1: -(dv + t * p2) / den,
            rho2: t,
            parameter: t,
            branch: Branch::Single,
        });
        prev = Some((t, den));
    }
    if let Some(g) = gap_start {
        out.gaps.push((g, *samples.last().unwrap_or(&g)));
    }
    Ok(out)
}

/// Envelope discriminant at `λ`, scaled to be dimensionless; `None` when
/// the eliminant is degenerate or linear.
pub fn envelope_discriminant(d: &AKDecomposition, lambda: f64) -> Option<f64> {
    let r = Rows::at(d, lambda);
    let swap = envelope_swap(d);
    let (r1, r2) = if swap { (sw(r.f), sw(r.f1)) } else { (r.f, r.f1) };
    discriminant(r1, r2)
}

fn discriminant(r1: Row, r2: Row) -> Option<f64> {
    let [a1, b1, c1, d1] = r1;
    let [a2, b2, c2, d2] = r2;
    let s = r1.iter().chain(&r2).fold(0f64, |m, x| m.max(x.abs()));
    if s == 0.0 {
        return None;
    }
    let qa = b1 * d2 - b2 * d1;
    let qb = a1 * d2 - a2 * d1 + b1 * c2 - b2 * c1;
    let qc = a1 * c2 - a2 * c1;
    if qa.abs() <= 1e-13 * s * s {
        return None;
    }
    let disc = (qb * qb - 4.0 * qa * qc) / s.powi(4);
    Some(if disc < 0.0 && disc >= -DISC_TOL { 0.0 } else { disc })
}

/// The envelope (bifurcation curve) sampled at `lambda_samples`.
///
/// Returns the `Plus` and `Minus` branches, or one `Single` branch when
/// `Q ≡ 0`. Gaps mark λ-intervals where the discriminant is negative, with
/// endpoints refined by bisection.
pub fn envelope(d: &AKDecomposition, lambda_samples: &[f64]) -> Vec<CurveBranch> {
    let single = d.q.is_zero();
    let swap = envelope_swap(d);
    let solve = |lam: f64| {
        let r = Rows::at(d, lam);
        solve_pair(r.f, r.f1, swap, single)
    };
    let mut branches: Vec<CurveBranch> = if single {
        vec![CurveBranch::new(Kind::Envelope, Branch::Single)]
    } else {
        vec![CurveBranch::new(Kind::Envelope, Branch::Plus), CurveBranch::new(Kind::Envelope, Branch::Minus)]
    };
    let complex = |lam: f64| matches!(solve(lam), PairSolution::Complex);
    let mut gaps = Vec::new();
    let mut bad_from: Option<f64> = None;
    let mut last_good: Option<f64> = None;
    for &lam in lambda_samples {
        match solve(lam) {
            PairSolution::Complex => {
                if bad_from.is_none() {
                    bad_from = Some(last_good.map_or(lam, |g| bisect_edge(&complex, g, lam)));
                }
            }
            sol => {
                if let Some(b) = bad_from.take() {
                    gaps.push((b, bisect_edge(&complex, lam, last_bad(lambda_samples, lam))));
                }
                last_good = Some(lam);
                match sol {
                    PairSolution::Real(pts) => {
                        for (br, r1, r2) in pts {
                            if let Some(b) = branches.iter_mut().find(|b| b.branch == br) {
                                b.points.push(CurvePoint { rho1: r1, rho2: r2, parameter: lam, branch: br });
                            }
                        }
                    }
                    _ => debug!("envelope degenerate at λ = {lam}"),
                }
            }
        }
    }
    if let Some(b) = bad_from {
        gaps.push((b, *lambda_samples.last().unwrap_or(&b)));
    }
    for b in &mut branches {
        b.gaps = gaps.clone();
    }
    branches
}

/// Sample just before `lam` in the list.
fn last_bad(samples: &[f64], lam: f64) -> f64 {
    let i = samples.iter().position(|&x| x == lam).unwrap_or(0);
    samples[i.saturating_sub(1)]
}

/// Boundary between a good and a bad parameter value.
fn bisect_edge(bad: &impl Fn(f64) -> bool, good: f64, badv: f64) -> f64 {
    let (mut g, mut b) = (good, badv);
    for _ in 0..60 {
        let m = 0.5 * (g + b);
        if m == g || m == b {
            break;
        }
        if bad(m) {
            b = m;
        } else {
            g = m;
        }
    }
    0.5 * (g + b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Genericity {
    Generic,
    Inconsistent,
    SingularC1,
    SingularC2,
    SingularC3,
}

/// Numerical rank of a 2×k matrix from its Frobenius norm and 2×2 minors.
fn rank2(r1: &[f64], r2: &[f64], zero: f64) -> usize {
    let fro2: f64 = r1.iter().chain(r2).map(|x| x * x).sum();
    let fro = fro2.sqrt();
    if fro <= zero {
        return 0;
    }
    let mut m2 = 0.0;
    for i in 0..r1.len() {
        for j in i + 1..r1.len() {
            let m = r1[i] * r2[j] - r1[j] * r2[i];
            m2 += m * m;
        }
    }
    // σ₁σ₂ = sqrt(Σ minors²), σ₁ ≈ ‖·‖_F
    let s2 = m2.sqrt() / fro;
    if s2 <= RANK_TOL * fro {
        1
    } else {
        2
    }
}

/// Classifies the envelope system at `λ`.
pub fn genericity_check(d: &AKDecomposition, lambda: f64) -> Genericity {
    let r = Rows::at(d, lambda);
    classify_rows(
        r.f,
        r.f1,
        1e-13 * d.coeff_scale() * (1.0 + lambda.abs()).powi(d.d.degree().unwrap_or(0) as i32),
    )
}

/// Classification for any pair of bilinear rows.
pub fn classify_rows(r1: Row, r2: Row, zero: f64) -> Genericity {
    let full = rank2(&r1, &r2, zero);
    let part = rank2(&r1[1..], &r2[1..], zero);
    if part < full {
        return Genericity::Inconsistent;
    }
    if full < 2 {
        return Genericity::SingularC1;
    }
    let [dd, p1, p2, q] = r1;
    let [de, p1e, p2e, qe] = r2;
    let w = |f: f64, fp: f64, g: f64, gp: f64| {
        let v = f * gp - fp * g;
        let m = (f * gp).abs() + (fp * g).abs();
        (v, m)
    };
    let small = |(v, m): (f64, f64)| v.abs() <= RANK_TOL * m.max(zero);
    let p1q = w(p1, p1e, q, qe);
    let p2q = w(p2, p2e, q, qe);
    let dp1 = w(dd, de, p1, p1e);
    let dp2 = w(dd, de, p2, p2e);
    let p1p2 = w(p1, p1e, p2, p2e);
    let dq = w(dd, de, q, qe);
    let eq = |x: (f64, f64), y: (f64, f64)| (x.0 - y.0).abs() <= RANK_TOL * (x.1 + y.1).max(zero);
    if !small(p1q) && small(p2q) && small(dp1) && eq(p1p2, dq) {
        return Genericity::SingularC2;
    }
    if !small(p2q) && small(p1q) && small(dp2) && eq((-p1p2.0, p1p2.1), dq) {
        return Genericity::SingularC3;
    }
    Genericity::Generic
}

/// Lines (or the hyperbola) along which `λ` is a multiple eigenvalue at a
/// singular λ. `samples` parametrise the free coordinate.
pub fn singular_piece(d: &AKDecomposition, lambda: f64, samples: &[f64]) -> Result<Vec<CurveBranch>> {
    let g = genericity_check(d, lambda);
    let r = Rows::at(d, lambda);
    match g {
        Genericity::Generic => return Err(Error::Domain(format!("λ = {lambda} is generic"))),
        Genericity::Inconsistent => return Err(Error::Domain(format!("λ = {lambda} is unreachable"))),
        _ => {}
    }
    let mut out = Vec::new();
    let mk = |pts: Vec<(f64, f64, f64)>| {
        let mut b = CurveBranch::new(Kind::SingularPiece, Branch::Single);
        b.level = Some(lambda);
        b.points = pts
            .into_iter()
            .map(|(t, x, y)| CurvePoint { rho1: x, rho2: y, parameter: t, branch: Branch::Single })
            .collect();
        b
    };
    if g == Genericity::SingularC1 {
        // one effective equation: the larger row
        let n = |x: &Row| x.iter().map(|v| v * v).sum::<f64>();
        let e = if n(&r.f) >= n(&r.f1) { r.f } else { r.f1 };
        let [a, b, c, dd] = e;
        let s = e.iter().fold(0f64, |m, x| m.max(x.abs()));
        let tiny = 1e-9 * s;
        if dd.abs() > tiny && (a * dd - b * c).abs() <= 1e-9 * (a * dd).abs().max((b * c).abs()).max(s * s) {
            // (dρ₁ + c)(dρ₂ + b) = 0
            out.push(mk(samples.iter().map(|&t| (t, -c / dd, t)).collect()));
            out.push(mk(samples.iter().map(|&t| (t, t, -b / dd)).collect()));
        } else if b.abs() + dd.abs() > tiny {
            let pts = samples
                .iter()
                .filter_map(|&t| {
                    let den = b + dd * t;
                    (den.abs() > tiny).then(|| (t, -(a + c * t) / den, t))
                })
                .collect();
            out.push(mk(pts));
        } else if c.abs() > tiny {
            out.push(mk(samples.iter().map(|&t| (t, t, -a / c)).collect()));
        }
    } else {
        // both rows must vanish identically in the free coordinate
        if let Some(x) =
            common_root(&[(r.f[0], r.f[1]), (r.f[2], r.f[3]), (r.f1[0], r.f1[1]), (r.f1[2], r.f1[3])])
        {
            out.push(mk(samples.iter().map(|&t| (t, x, t)).collect()));
        }
        if let Some(y) =
            common_root(&[(r.f[0], r.f[2]), (r.f[1], r.f[3]), (r.f1[0], r.f1[2]), (r.f1[1], r.f1[3])])
        {
            out.push(mk(samples.iter().map(|&t| (t, t, y)).collect()));
        }
    }
    Ok(out)
}

/// Least-squares `x` with `uᵢ + vᵢx = 0` for all pairs, if the residual is small.
fn common_root(eqs: &[(f64, f64)]) -> Option<f64> {
    let vv: f64 = eqs.iter().map(|e| e.1 * e.1).sum();
    if vv == 0.0 {
        return None;
    }
    let x = -eqs.iter().map(|e| e.0 * e.1).sum::<f64>() / vv;
    let s = eqs.iter().fold(0f64, |m, e| m.max(e.0.abs()).max((e.1 * x).abs()));
    eqs.iter().all(|e| (e.0 + e.1 * x).abs() <= RANK_TOL * s.max(f64::MIN_POSITIVE)).then_some(x)
}

/// `[Re, Im]` rows of `(D, P₁, P₂, Q)` at `iω`.
pub fn hopf_rows(d: &AKDecomposition, omega: f64) -> (Row, Row) {
    let z = C64::new(0.0, omega);
    let v: Vec<C64> = [&d.d, &d.p1, &d.p2, &d.q].iter().map(|p| p.eval_complex(z)).collect();
    ([v[0].re, v[1].re, v[2].re, v[3].re], [v[0].im, v[1].im, v[2].im, v[3].im])
}

/// The Hopf curve: `(ρ₁, ρ₂)` with eigenvalues `±iω`.
pub fn hopf_curve(d: &AKDecomposition, omega_samples: &[f64]) -> Result<Vec<CurveBranch>> {
    if omega_samples.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::Domain("Hopf frequencies must be positive".into()));
    }
    let single = d.q.is_zero();
    // pivot choice mirrors the envelope: ρ₂ when Re/Im "P₁∧Q" vanishes throughout
    let swap = !single && {
        let cross = |k: usize| {
            omega_samples.iter().all(|&w| {
                let (re, im) = hopf_rows(d, w);
                let v = re[k] * im[3] - im[k] * re[3];
                v.abs() <= 1e-12 * (re[k] * im[3]).abs().max((im[k] * re[3]).abs()).max(f64::MIN_POSITIVE)
            })
        };
        cross(1) && !cross(2)
    };
    let solve = |w: f64| {
        let (re, im) = hopf_rows(d, w);
        solve_pair(re, im, swap, single)
    };
    let mut branches: Vec<CurveBranch> = if single {
        vec![CurveBranch::new(Kind::Hopf, Branch::Single)]
    } else {
        vec![CurveBranch::new(Kind::Hopf, Branch::Plus), CurveBranch::new(Kind::Hopf, Branch::Minus)]
    };
    let bad = |w: f64| !matches!(solve(w), PairSolution::Real(_));
    let mut gaps = Vec::new();
    let mut bad_from: Option<f64> = None;
    let mut last_good: Option<f64> = None;
    for &w in omega_samples {
        match solve(w) {
            PairSolution::Real(pts) => {
                if let Some(b) = bad_from.take() {
                    gaps.push((b, bisect_edge(&bad, w, last_bad(omega_samples, w))));
                }
                last_good = Some(w);
                for (br, r1, r2) in pts {
                    if let Some(b) = branches.iter_mut().find(|b| b.branch == br) {
                        b.points.push(CurvePoint { rho1: r1, rho2: r2, parameter: w, branch: br });
                    }
                }
            }
            _ => {
                debug!("no Hopf point at ω = {w}");
                if bad_from.is_none() {
                    bad_from = Some(last_good.map_or(w, |g| bisect_edge(&bad, g, w)));
                }
            }
        }
    }
    if let Some(b) = bad_from {
        gaps.push((b, *omega_samples.last().unwrap_or(&b)));
    }
    for b in &mut branches {
        b.gaps = gaps.clone();
    }
    Ok(branches)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriplePoint {
    pub lambda: f64,
    pub rho1: f64,
    pub rho2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStatus {
    Accepted(Vec<TriplePoint>),
    /// λ lies where the envelope discriminant is negative.
    InEnvelopeGap,
    /// No real `(ρ₁, ρ₂)` satisfies all three equations.
    NoRealPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleCandidate {
    pub lambda: f64,
    pub status: CandidateStatus,
}

/// `(P₁∧P₂∧Q)(P₁∧P₂∧D) + (D∧P₂∧Q)(P₁∧D∧Q)` and its four factors.
///
/// Cramer on `(ρ₁, ρ₂, ρ₁ρ₂)` gives `ρ₁ = −(D∧P₂∧Q)/W`, `ρ₂ = −(P₁∧D∧Q)/W`,
/// `ρ₁ρ₂ = −(P₁∧P₂∧D)/W` with `W = P₁∧P₂∧Q`; consistency is the vanishing
/// of this sum.
pub fn triple_condition(d: &AKDecomposition) -> (Polynomial, [Polynomial; 4]) {
    let w = [
        d.p1.wronskian3(&d.p2, &d.q),
        d.p1.wronskian3(&d.p2, &d.d),
        d.d.wronskian3(&d.p2, &d.q),
        d.p1.wronskian3(&d.d, &d.q),
    ];
    let c = &(&w[0] * &w[1]) + &(&w[2] * &w[3]);
    (c, w)
}

/// All real roots of the triple-eigenvalue condition in `[lo, hi]` with
/// their classification.
pub fn triple_candidates(d: &AKDecomposition, lo: f64, hi: f64) -> Result<Vec<TripleCandidate>> {
    let (cond, w) = triple_condition(d);
    let tol = |p: &Polynomial| 1e-10 * p.max_abs_coeff().max(f64::MIN_POSITIVE);
    let scale = d.coeff_scale();
    let neg = |p: &Polynomial| p.is_negligible(1e-12 * scale.powi(3));
    let w: Vec<Polynomial> = w.iter().map(|p| if neg(p) { Poly::zero() } else { p.clone() }).collect();
    if w.iter().all(|p| p.is_zero()) {
        return Err(Error::Degenerate("all triple Wronskians vanish identically".into()));
    }
    let lambdas: Vec<f64> = if !w[0].is_zero() {
        if cond.is_negligible(tol(&cond) * 1e-2) {
            return Err(Error::Degenerate("triple condition vanishes identically".into()));
        }
        real_roots_clustered(&cond, lo, hi)?
    } else {
        // P₁∧P₂∧Q ≡ 0: every remaining nonzero Wronskian must vanish
        let nz: Vec<&Polynomial> = w[1..].iter().filter(|p| !p.is_zero()).collect();
        let base = nz.iter().min_by_key(|p| p.degree()).expect("nonempty");
        real_roots_clustered(base, lo, hi)?
            .into_iter()
            .filter(|&l| {
                nz.iter().all(|p| {
                    let m: f64 =
                        p.coeffs().iter().enumerate().map(|(k, c)| c.abs() * l.abs().powi(k as i32)).sum();
                    p.eval(l).abs() <= 1e-7 * m
                })
            })
            .collect()
    };
    Ok(lambdas.into_iter().map(|l| TripleCandidate { lambda: l, status: classify_candidate(d, l) }).collect())
}

/// Accepted triple points only.
pub fn triple_points(d: &AKDecomposition, lo: f64, hi: f64) -> Result<Vec<TriplePoint>> {
    Ok(triple_candidates(d, lo, hi)?
        .into_iter()
        .flat_map(|c| match c.status {
            CandidateStatus::Accepted(p) => p,
            _ => Vec::new(),
        })
        .collect())
}

fn classify_candidate(d: &AKDecomposition, lambda: f64) -> CandidateStatus {
    if envelope_discriminant(d, lambda).is_some_and(|x| x < 0.0) {
        return CandidateStatus::InEnvelopeGap;
    }
    let r = Rows::at(d, lambda);
    let rows = [r.f, r.f1, r.f2];
    let mut found: Vec<TriplePoint> = Vec::new();
    let accept = |x: f64, y: f64| {
        let mag = rows.iter().fold(f64::MIN_POSITIVE, |m, row| m.max(row_mag(row, x, y)));
        rows.iter().all(|row| eval_row(row, x, y).abs() <= 1e-7 * mag)
    };
    let det3 = |c0: usize, c1: usize, c2: usize| {
        let m = |i: usize, c: usize| rows[i][c];
        m(0, c0) * (m(1, c1) * m(2, c2) - m(2, c1) * m(1, c2))
            - m(0, c1) * (m(1, c0) * m(2, c2) - m(2, c0) * m(1, c2))
            + m(0, c2) * (m(1, c0) * m(2, c1) - m(2, c0) * m(1, c1))
    };
    let w = det3(1, 2, 3);
    let wmag =
        rows.iter().fold(0f64, |m, row| m.max(row[1].abs()).max(row[2].abs()).max(row[3].abs())).powi(3);
    if w.abs() > 1e-8 * wmag {
        let x = -det3(0, 2, 3) / w;
        let y = -det3(1, 0, 3) / w;
        return if accept(x, y) {
            CandidateStatus::Accepted(vec![TriplePoint { lambda, rho1: x, rho2: y }])
        } else {
            CandidateStatus::NoRealPoint
        };
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let PairSolution::Real(pts) = solve_pair(rows[i], rows[j], false, false) else { continue };
        for (_, x, y) in pts {
            let ok = accept(x, y);
            let dup = found
                .iter()
                .any(|p| (p.rho1 - x).abs() + (p.rho2 - y).abs() <= 1e-7 * (1.0 + x.abs() + y.abs()));
            if ok && !dup {
                found.push(TriplePoint { lambda, rho1: x, rho2: y });
            }
        }
    }
    if found.is_empty() {
        CandidateStatus::NoRealPoint
    } else {
        found.sort_by(|a, b| a.rho2.total_cmp(&b.rho2));
        CandidateStatus::Accepted(found)
    }
}

/// Real roots in `[lo, hi]`; near-coincident roots (a multiple root split by
/// rounding) are merged into their mean.
pub fn real_roots_clustered(p: &Polynomial, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let roots = poly_roots(p)?;
    let mut re: Vec<(f64, f64)> = roots.iter().map(|z| (z.re, z.im)).collect();
    re.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < re.len() {
        let mut j = i + 1;
        let span = |x: f64| 1e-6 * (1.0 + x.abs());
        while j < re.len() && (re[j].0 - re[i].0).abs() <= span(re[i].0) && re[j].1.abs() <= span(re[i].0) {
            j += 1;
        }
        let n = (j - i) as f64;
        let mean_re = re[i..j].iter().map(|z| z.0).sum::<f64>() / n;
        let mean_im = re[i..j].iter().map(|z| z.1).sum::<f64>() / n;
        if mean_im.abs() <= 1e-6 * (1.0 + mean_re.abs()) && mean_re >= lo && mean_re <= hi {
            out.push(mean_re);
        }
        i = j;
    }
    Ok(out)
}

/// Centred-difference tangent `(dρ₁/dλ, dρ₂/dλ)` of the envelope through the
/// point `near` at `λ`, following whichever branch lies closest (branch labels
/// can swap where `P₁∧Q` changes sign).
pub fn envelope_tangent(d: &AKDecomposition, lambda: f64, near: (f64, f64), h: f64) -> Option<(f64, f64)> {
    let at = |l: f64| {
        envelope(d, &[l])
            .into_iter()
            .flat_map(|b| b.points)
            .map(|p| (p.rho1, p.rho2))
            .min_by(|a, b| dist(*a, near).total_cmp(&dist(*b, near)))
    };
    let (a, b) = (at(lambda - h)?, at(lambda + h)?);
    Some(((b.0 - a.0) / (2.0 * h), (b.1 - a.1) / (2.0 * h)))
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}


/// Real `λ ∈ [lo, hi]` where the envelope system loses genericity (C1–C3).
pub fn singular_lambdas(d: &AKDecomposition, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let polys = [&d.d, &d.p1, &d.p2, &d.q];
    let mut cands = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let w = polys[i].wronskian(polys[j]);
            if !w.is_negligible(1e-12 * d.coeff_scale().powi(2)) {
                cands.extend(real_roots_clustered(&w, lo, hi)?);
            }
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup_by(|a, b| (*a - *b).abs() <= 1e-7 * (1.0 + b.abs()));
    Ok(cands
        .into_iter()
        .filter(|&l| {
            matches!(
                genericity_check(d, l),
                Genericity::SingularC1 | Genericity::SingularC2 | Genericity::SingularC3
            )
        })
        .collect())
}

/// Sampling for [`standard_curves`].
#[derive(Clone, Copy, Debug)]
pub struct AtlasSampling {
    pub lambda: (f64, f64),
    pub omega_max: f64,
    /// Range of the free coordinate for the zero curve and singular lines.
    pub rho: (f64, f64),
    pub samples: usize,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n.max(2) - 1) as f64).collect()
}

/// Envelope, singular pieces, Hopf and zero curves of one problem.
pub fn standard_curves(d: &AKDecomposition, s: AtlasSampling) -> Result<Vec<CurveBranch>> {
    let mut out = envelope(d, &linspace(s.lambda.0, s.lambda.1, s.samples));
    for l in singular_lambdas(d, s.lambda.0, s.lambda.1)? {
        out.extend(singular_piece(d, l, &linspace(s.rho.0, s.rho.1, s.samples))?);
    }
    let w: Vec<f64> = linspace(0.0, s.omega_max, s.samples + 1).into_iter().skip(1).collect();
    out.extend(hopf_curve(d, &w)?);
    match zero_curve(d, &linspace(s.rho.0, s.rho.1, s.samples)) {
        Ok(c) => out.push(c),
        Err(Error::Degenerate(m)) => debug!("zero curve skipped: {m}"),
        Err(e) => return Err(e),
    }
    Ok(out.into_iter().filter(|c| !c.is_empty()).collect())
}
