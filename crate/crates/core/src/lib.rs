//! Numerical certificates for quantum entropy inequalities on finite-dimensional
//! density matrices.
//!
//! The crate evaluates von Neumann entropy, relative entropy, Rényi divergences
//! and root overlaps, and checks both sides of subadditivity (with its
//! root-overlap remainder), Pinsker, monotonicity of relative entropy (with its
//! remainder term and equality conditions), data processing under Kraus
//! channels, and the Peierls–Bogoliubov and Golden–Thompson steps behind them.
//!
//! Modules, bottom up:
//! - [`matcore`]: Hermitian eigensolver and spectral functions.
//! - [`tensor`]: Kronecker products, partial traces, lifts, direct sums.
//! - [`states`]: validated density matrices, generators and channels.
//! - [`functionals`]: entropies and divergences.
//! - [`theorems`]: certificate evaluators.
//! - [`harness`]: seeded sweeps and reports.
//! - [`matrix_file`]: the JSON matrix file format.

pub mod error;
pub mod functionals;
pub mod harness;
pub mod matcore;
pub mod matrix_file;
pub mod rng;
mod serde_ext;
pub mod states;
pub mod tensor;
pub mod theorems;

pub use error::{Error, Result};
pub use functionals::ExtendedScalar;
pub use matcore::{CMatrix, HermitianMatrix, Spectrum};
pub use states::{DensityMatrix, KrausChannel};
pub use tensor::TensorShape;
pub use theorems::{Certificate, Verdict};
