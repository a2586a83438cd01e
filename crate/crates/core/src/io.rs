//! JSON problem specs and decomposition files.
//!
//! A problem spec is `{"matrix": [[..]], "f1": [..], "g1": [..], "f2": [..], "g2": [..]}`
//! with `f2`/`g2` optional. Decomposition files list ascending coefficients of
//! `D, P₁, P₂, Q`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ak::{decompose_spectral, AKDecomposition, LowRankProblem};
use crate::kernel::eig_dense;
use crate::{Error, Matrix, Polynomial, Result, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub matrix: Vec<Vec<f64>>,
    pub f1: Vec<f64>,
    pub g1: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<Vec<f64>>,
}

impl ProblemSpec {
    pub fn to_problem(&self) -> Result<LowRankProblem> {
        let m = Matrix::from_rows(&self.matrix)?;
        LowRankProblem::new(m, self.f1.clone(), self.g1.clone(), self.f2.clone(), self.g2.clone())
    }

    pub fn from_problem(p: &LowRankProblem) -> Self {
        let matrix = (0..p.m.rows()).map(|i| p.m.row(i).to_vec()).collect();
        Self { matrix, f1: p.f1.clone(), g1: p.g1.clone(), f2: p.f2.clone(), g2: p.g2.clone() }
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    // serde_json appends " at line L column C"; the variant carries both
    let mut message = e.to_string();
    if let Some(i) = message.rfind(" at line ") {
        message.truncate(i);
    }
    Error::Parse { line: e.line(), column: e.column(), message }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

pub fn parse_problem(text: &str) -> Result<LowRankProblem> {
    serde_json::from_str::<ProblemSpec>(text).map_err(parse_error)?.to_problem()
}

pub fn read_problem(path: &Path) -> Result<LowRankProblem> {
    parse_problem(&read(path)?)
}

pub fn problem_to_json(p: &LowRankProblem) -> String {
    serde_json::to_string_pretty(&ProblemSpec::from_problem(p)).expect("plain data")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionFile {
    pub d: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub q: Vec<f64>,
}

impl From<&AKDecomposition> for DecompositionFile {
    fn from(d: &AKDecomposition) -> Self {
        Self {
            d: d.d.coeffs().to_vec(),
            p1: d.p1.coeffs().to_vec(),
            p2: d.p2.coeffs().to_vec(),
            q: d.q.coeffs().to_vec(),
        }
    }
}

impl DecompositionFile {
    pub fn to_decomposition(&self) -> Result<AKDecomposition> {
        let all = [&self.d, &self.p1, &self.p2, &self.q];
        if all.iter().any(|c| c.iter().any(|x| !x.is_finite())) {
            return Err(Error::Invalid("non-finite coefficient".into()));
        }
        if self.d.iter().all(|&c| c == 0.0) {
            return Err(Error::Invalid("D is the zero polynomial".into()));
        }
        let p = |c: &Vec<f64>| Polynomial::new(c.clone());
        Ok(AKDecomposition { d: p(&self.d), p1: p(&self.p1), p2: p(&self.p2), q: p(&self.q) })
    }
}

pub fn parse_decomposition(text: &str) -> Result<AKDecomposition> {
    // accept a bare decomposition or a `decompose` report carrying one
    let v: serde_json::Value = serde_json::from_str(text).map_err(parse_error)?;
    let inner = match v.get("decomposition") {
        Some(d) if v.get("d").is_none() => d.clone(),
        _ => v,
    };
    let f: DecompositionFile =
        serde_json::from_value(inner).map_err(|e| Error::Invalid(format!("decomposition: {e}")))?;
    f.to_decomposition()
}

pub fn read_decomposition(path: &Path) -> Result<AKDecomposition> {
    parse_decomposition(&read(path)?)
}

pub fn decomposition_to_json(d: &AKDecomposition) -> String {
    serde_json::to_string_pretty(&DecompositionFile::from(d)).expect("plain data")
}

/// Consistency checks of a decomposition against its problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// `(ρ₁, ρ₂)` pairs at which the spectrum was checked.
    pub samples: Vec<(f64, f64)>,
    /// Largest `|p(λᵢ)| / Σ|cₖ||λᵢ|ᵏ` over eigenvalues `λᵢ` of the perturbed
    /// matrix at each sample.
    pub max_root_residual: f64,
    pub d_monic: bool,
    /// Coefficient distance to the spectral route (symmetric `M` only).
    pub spectral_distance: Option<f64>,
}

pub const VERIFY_SAMPLES: [(f64, f64); 4] = [(0.0, 0.0), (0.7, -0.3), (-1.3, 0.9), (2.1, 1.7)];

pub fn verify(p: &LowRankProblem, d: &AKDecomposition) -> Result<Verification> {
    let mut worst = 0f64;
    for &(r1, r2) in &VERIFY_SAMPLES {
        let poly = d.char_poly(r1, r2);
        for z in eig_dense(&p.perturbed_matrix(r1, r2))?.values {
            let mut size = 0.0;
            let mut zk = 1.0;
            for c in poly.coeffs() {
                size += c.abs() * zk;
                zk *= z.norm();
            }
            let v: C64 = poly.eval_complex(z);
            worst = worst.max(v.norm() / size.max(f64::MIN_POSITIVE));
        }
    }
    let lead = d.d.coeffs().last().copied().unwrap_or(0.0);
    let spectral_distance = match decompose_spectral(p) {
        Ok(s) => Some(s.distance(d)),
        Err(Error::Invalid(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(Verification {
        samples: VERIFY_SAMPLES.to_vec(),
        max_root_residual: worst,
        d_monic: (lead.abs() - 1.0).abs() < 1e-12,
        spectral_distance,
    })
}
