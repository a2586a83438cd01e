//! Foundation numerics shared by every model module.

pub mod eig;
pub mod elliptic;
pub mod matrix;
pub mod poly;
pub mod quad;
pub mod resultant;
pub mod roots;
pub mod tridiag;

pub use eig::{eig_dense, eig_with_vectors, inverse_iteration, multiset_distance, sym_eig, Spectrum};
pub use elliptic::{elliptic_k_e, jacobi_sn_cn_dn};
pub use matrix::{dot, norm2, DenseMatrix, Lu};
pub use poly::{poly_wronskian, poly_wronskian3, Poly};
pub use quad::{gauss_legendre, integrate};
pub use resultant::{resultant, sylvester};
pub use roots::{poly_roots, real_roots_in};
pub use tridiag::Tridiagonal;
