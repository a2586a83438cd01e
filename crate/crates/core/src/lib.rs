//! Spectra of rank-one and rank-two perturbations `M + ρ₁ f₁g₁ᵀ + ρ₂ f₂g₂ᵀ`.
//!
//! The characteristic polynomial splits as `D + ρ₁P₁ + ρ₂P₂ + ρ₁ρ₂Q`; from the
//! four polynomials the crate draws constant-eigenvalue curves, envelopes of
//! double eigenvalues, Hopf curves and cusp points, and labels the
//! `(ρ₁, ρ₂)` plane by spectral census. Three worked models sit on top: a
//! discrete oculomotor integrator network, its continuum limit, and the
//! Rubinstein-Sternberg nonlocal front.
//!
//! The numeric kernel is generic over [`scalar::Real`]; the model modules use
//! `f64` through the aliases below.

pub mod ak;
pub mod continuum;
pub mod curves;
pub mod error;
pub mod integrator;
pub mod io;
pub mod kernel;
pub mod phase;
pub mod rs;
pub mod scalar;

pub use error::{Error, Result};

/// `f64` dense matrix.
pub type Matrix = kernel::DenseMatrix<f64>;
/// `f64` polynomial.
pub type Polynomial = kernel::Poly<f64>;
/// `f64` complex number.
pub type C64 = num_complex::Complex<f64>;
