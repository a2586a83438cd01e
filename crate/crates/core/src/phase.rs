//! Spectral census of the `(ρ₁, ρ₂)` plane.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ak::AKDecomposition;
use crate::ak::LowRankProblem;
use crate::curves::{CurveBranch, Rows};
use crate::error::{Error, Result};
use crate::kernel::eig_dense;
use crate::C64;

/// Default relative band for "real" and "marginal".
pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominant {
    RealStable,
    RealUnstable,
    ComplexStable,
    ComplexUnstable,
    Marginal,
}

impl fmt::Display for Dominant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dominant::RealStable => "real_stable",
            Dominant::RealUnstable => "real_unstable",
            Dominant::ComplexStable => "complex_stable",
            Dominant::ComplexUnstable => "complex_unstable",
            Dominant::Marginal => "marginal",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegionLabel {
    pub n_real: usize,
    /// Eigenvalues with `Re λ` above the marginal band, with multiplicity.
    pub n_rhp: usize,
    pub dominant: Dominant,
}

impl RegionLabel {
    /// `(n_real, n_rhp)`, the part that is constant on open regions.
    pub fn census(&self) -> (usize, usize) {
        (self.n_real, self.n_rhp)
    }
}

/// Census of an eigenvalue list. Thresholds are `tol·max(1, spectral radius)`.
pub fn label_spectrum(values: &[C64], tol: f64) -> RegionLabel {
    let radius = values.iter().fold(1f64, |m, z| m.max(z.norm()));
    let band = tol * radius;
    let n_real = values.iter().filter(|z| z.im.abs() <= band).count();
    let n_rhp = values.iter().filter(|z| z.re > band).count();
    let top = values.iter().copied().max_by(|a, b| a.re.total_cmp(&b.re)).unwrap_or_default();
    let dominant = if top.re.abs() <= band {
        Dominant::Marginal
    } else {
        match (top.im.abs() <= band, top.re > 0.0) {
            (true, false) => Dominant::RealStable,
            (true, true) => Dominant::RealUnstable,
            (false, false) => Dominant::ComplexStable,
            (false, true) => Dominant::ComplexUnstable,
        }
    };
    RegionLabel { n_real, n_rhp, dominant }
}

pub fn classify_point(p: &LowRankProblem, rho1: f64, rho2: f64, tol: f64) -> Result<RegionLabel> {
    if !(rho1.is_finite() && rho2.is_finite()) {
        return Err(Error::Invalid("non-finite ρ".into()));
    }
    let s = eig_dense(&p.perturbed_matrix(rho1, rho2))?;
    Ok(label_spectrum(&s.values, tol))
}

/// Axis-aligned rectangle `[rho1_min, rho1_max] × [rho2_min, rho2_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub rho1_min: f64,
    pub rho1_max: f64,
    pub rho2_min: f64,
    pub rho2_max: f64,
}

impl Window {
    pub fn square(lo: f64, hi: f64) -> Self {
        Self { rho1_min: lo, rho1_max: hi, rho2_min: lo, rho2_max: hi }
    }
}

/// Labels on an inclusive node lattice; `labels[j * n1 + i]` sits at
/// `(ρ₁ᵢ, ρ₂ⱼ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub window: Window,
    pub n1: usize,
    pub n2: usize,
    pub labels: Vec<RegionLabel>,
}

fn node(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n == 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

impl PhaseGrid {
    pub fn rho1(&self, i: usize) -> f64 {
        node(self.window.rho1_min, self.window.rho1_max, self.n1, i)
    }

    pub fn rho2(&self, j: usize) -> f64 {
        node(self.window.rho2_min, self.window.rho2_max, self.n2, j)
    }

    pub fn at(&self, i: usize, j: usize) -> RegionLabel {
        self.labels[j * self.n1 + i]
    }

    /// Node counts per census tuple, sorted.
    pub fn census_counts(&self) -> Vec<((usize, usize), usize)> {
        let mut m = std::collections::BTreeMap::new();
        for l in &self.labels {
            *m.entry(l.census()).or_insert(0) += 1;
        }
        m.into_iter().collect()
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "# rho1, rho2 dimensionless; n_real, n_rhp counts with multiplicity")?;
        writeln!(w, "rho1,rho2,n_real,n_rhp,dominant")?;
        for j in 0..self.n2 {
            for i in 0..self.n1 {
                let l = self.at(i, j);
                writeln!(
                    w,
                    "{:.10e},{:.10e},{},{},{}",
                    self.rho1(i),
                    self.rho2(j),
                    l.n_real,
                    l.n_rhp,
                    l.dominant
                )?;
            }
        }
        Ok(())
    }

    /// Heat map of census classes with curves overlaid as polylines.
    pub fn write_svg<W: Write>(&self, curves: &[CurveBranch], w: &mut W) -> std::io::Result<()> {
        let (cw, ch) = (600.0, 600.0);
        let win = self.window;
        let x = |r1: f64| (r1 - win.rho1_min) / (win.rho1_max - win.rho1_min) * cw;
        let y = |r2: f64| ch - (r2 - win.rho2_min) / (win.rho2_max - win.rho2_min) * ch;
        let classes: Vec<(usize, usize)> = self.census_counts().into_iter().map(|c| c.0).collect();
        let palette =
            ["#e6f2ff", "#c6e5b3", "#ffe9a8", "#f8c4b4", "#d7c4f0", "#b4e0e8", "#f0c4de", "#dddddd"];
        writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{cw}" height="{ch}" viewBox="0 0 {cw} {ch}">"#
        )?;
        let dx = cw / self.n1 as f64;
        let dy = ch / self.n2 as f64;
        for j in 0..self.n2 {
            for i in 0..self.n1 {
                let k = classes.iter().position(|c| *c == self.at(i, j).census()).unwrap_or(0);
                writeln!(
                    w,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                    i as f64 * dx,
                    ch - (j + 1) as f64 * dy,
                    dx + 0.5,
                    dy + 0.5,
                    palette[k % palette.len()]
                )?;
            }
        }
        for c in curves {
            for seg in polylines(c) {
                let pts: Vec<String> = seg.iter().map(|&(a, b)| format!("{:.2},{:.2}", x(a), y(b))).collect();
                writeln!(
                    w,
                    r#"<polyline fill="none" stroke="black" stroke-width="1" points="{}"/>"#,
                    pts.join(" ")
                )?;
            }
        }
        writeln!(w, "</svg>")
    }
}

/// Classifies every node, in parallel.
pub fn phase_grid(p: &LowRankProblem, window: Window, n1: usize, n2: usize, tol: f64) -> Result<PhaseGrid> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::Invalid("resolution must be positive".into()));
    }
    let labels = (0..n1 * n2)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % n1, k / n1);
            classify_point(
                p,
                node(window.rho1_min, window.rho1_max, n1, i),
                node(window.rho2_min, window.rho2_max, n2, j),
                tol,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseGrid { window, n1, n2, labels })
}

/// Splits a curve into runs of consecutive points not separated by a gap.
pub fn polylines(c: &CurveBranch) -> Vec<Vec<(f64, f64)>> {
    let mut out: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut prev: Option<f64> = None;
    for p in &c.points {
        let broken = prev.is_some_and(|t| {
            let (lo, hi) = (t.min(p.parameter), t.max(p.parameter));
            c.gaps.iter().any(|&(a, b)| a.min(b) <= hi && a.max(b) >= lo)
        });
        if broken || out.is_empty() {
            out.push(Vec::new());
        }
        out.last_mut().expect("pushed").push((p.rho1, p.rho2));
        prev = Some(p.parameter);
    }
    out
}

fn seg_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let l2 = vx * vx + vy * vy;
    let t = if l2 == 0.0 { 0.0 } else { (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / l2).clamp(0.0, 1.0) };
    (p.0 - a.0 - t * vx).hypot(p.1 - a.1 - t * vy)
}

/// Distance from `p` to the nearest polyline segment of any curve.
pub fn distance_to_curves(p: (f64, f64), curves: &[CurveBranch]) -> f64 {
    let mut best = f64::INFINITY;
    for c in curves {
        for line in polylines(c) {
            if line.len() == 1 {
                best = best.min((p.0 - line[0].0).hypot(p.1 - line[0].1));
            }
            for w in line.windows(2) {
                best = best.min(seg_dist(p, w[0], w[1]));
            }
        }
    }
    best
}

/// Adjacent node pairs whose census differs, and how many of them lie within
/// one cell diagonal of a curve (measured from the pair's midpoint).
pub fn transition_coverage(grid: &PhaseGrid, curves: &[CurveBranch]) -> (usize, usize) {
    let h1 = (grid.window.rho1_max - grid.window.rho1_min) / (grid.n1.max(2) - 1) as f64;
    let h2 = (grid.window.rho2_max - grid.window.rho2_min) / (grid.n2.max(2) - 1) as f64;
    let reach = h1.hypot(h2);
    let mut pairs = Vec::new();
    for j in 0..grid.n2 {
        for i in 0..grid.n1 {
            if i + 1 < grid.n1 && grid.at(i, j).census() != grid.at(i + 1, j).census() {
                pairs.push(((grid.rho1(i) + grid.rho1(i + 1)) / 2.0, grid.rho2(j)));
            }
            if j + 1 < grid.n2 && grid.at(i, j).census() != grid.at(i, j + 1).census() {
                pairs.push((grid.rho1(i), (grid.rho2(j) + grid.rho2(j + 1)) / 2.0));
            }
        }
    }
    let covered = pairs.par_iter().filter(|&&m| distance_to_curves(m, curves) <= reach).count();
    (pairs.len(), covered)
}

/// How a (near-)double real eigenvalue splits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    RealPair,
    ComplexPair,
    /// Exact double point whose normal form is indefinite in `δρ`: real on
    /// some sides, complex on others.
    Mixed,
}

/// Local splitting of the eigenvalue pair near `λ₀` at `(ρ₁, ρ₂)`.
///
/// Away from an exact double point the sign of `F_λ² − 2F·F_λλ` (the
/// discriminant of the Taylor quadratic in `δλ`) decides. At an exact double
/// point the decision moves to the quadratic form in `δρ` obtained from the
/// normal form `½F_λλ δλ² + δλ ∇F_λ·δρ + ∇F·δρ + ½δρᵀ∇²F δρ`.
pub fn local_splitting(
    p: &LowRankProblem,
    d: &AKDecomposition,
    lambda0: f64,
    rho1: f64,
    rho2: f64,
) -> Result<Splitting> {
    let ev = eig_dense(&p.perturbed_matrix(rho1, rho2))?.values;
    let radius = 1e-2 * (1.0 + lambda0.abs());
    if ev.iter().filter(|z| (**z - C64::new(lambda0, 0.0)).norm() <= radius).count() < 2 {
        return Err(Error::Domain(format!("no double eigenvalue near λ = {lambda0}")));
    }
    let r = Rows::at(d, lambda0);
    let ev_row = |row: &[f64; 4]| row[0] + row[1] * rho1 + row[2] * rho2 + row[3] * rho1 * rho2;
    let mag = |row: &[f64; 4]| {
        row[0].abs() + (row[1] * rho1).abs() + (row[2] * rho2).abs() + (row[3] * rho1 * rho2).abs()
    };
    let (f, fl, fll) = (ev_row(&r.f), ev_row(&r.f1), ev_row(&r.f2));
    let scale = mag(&r.f).max(mag(&r.f1)).max(mag(&r.f2)).max(f64::MIN_POSITIVE);
    let exact = f.abs() <= 1e-10 * scale && fl.abs() <= 1e-10 * scale;
    if !exact {
        let disc = fl * fl - 2.0 * f * fll;
        return Ok(if disc >= 0.0 { Splitting::RealPair } else { Splitting::ComplexPair });
    }
    let q = r.f[3];
    let g = [r.f[1] + rho2 * q, r.f[2] + rho1 * q];
    let gl = [r.f1[1] + rho2 * r.f1[3], r.f1[2] + rho1 * r.f1[3]];
    if g[0].hypot(g[1]) > 1e-8 * scale {
        return Ok(Splitting::Mixed);
    }
    // S = ∇F_λ ∇F_λᵀ − F_λλ ∇²F, with ∇²F = [[0, Q], [Q, 0]]
    let s11 = gl[0] * gl[0];
    let s22 = gl[1] * gl[1];
    let s12 = gl[0] * gl[1] - fll * q;
    let det = s11 * s22 - s12 * s12;
    let tr = s11 + s22;
    let tiny = 1e-12 * (s11.abs() + s22.abs() + s12.abs()).max(f64::MIN_POSITIVE);
    Ok(if det > tiny && tr > 0.0 {
        Splitting::RealPair
    } else if det > tiny && tr < 0.0 {
        Splitting::ComplexPair
    } else {
        Splitting::Mixed
    })
}

/// Letters of Example 1's regions by census `(n_real, n_rhp)`; `None` marks
/// the narrow unlabelled strip `(4, 2)`.
pub const EXAMPLE1_REGIONS: [(char, (usize, usize)); 7] =
    [('A', (4, 0)), ('B', (2, 0)), ('C', (0, 0)), ('D', (0, 2)), ('E', (2, 2)), ('F', (4, 1)), ('G', (2, 1))];

/// Census of the unlabelled strip between E and F.
pub const EXAMPLE1_STRIP: (usize, usize) = (4, 2);

pub fn example1_letter(census: (usize, usize)) -> Option<char> {
    EXAMPLE1_REGIONS.iter().find(|r| r.1 == census).map(|r| r.0)
}
