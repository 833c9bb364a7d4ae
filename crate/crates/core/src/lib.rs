//! Sparse precision estimation for tensor-variate data under an L-way
//! Kronecker-sum structure.
//!
//! The precision matrix of an order-L data tensor is modeled as
//! `Omega = Psi_1 ⊕ … ⊕ Psi_L`, the Kronecker sum of per-mode factor
//! matrices. Everything in this crate works at factor scale: the `p × p`
//! matrix is only ever materialized by the dense test oracle.
//!
//! The crate is organized along the pipeline:
//!
//! * [`tensor`] — dense order-L tensors, unfolding, mode products;
//! * [`linalg`] — symmetric factor-scale kernels (Jacobi eigensolver,
//!   off-diagonal soft-thresholding);
//! * [`ksum`] — Kronecker-sum algebra (spectra, log-determinant, partial
//!   traces, trace-zero decomposition, exact norms);
//! * [`model`] — ground-truth generation and sub-gaussian sampling;
//! * [`gram`] — mode-k Gram statistics and penalty calibration;
//! * [`solver`] — the proximal-gradient estimator;
//! * [`metrics`] — error norms, rate-bound evaluators, support recovery;
//! * [`conc`] — Monte-Carlo concentration statistics;
//! * [`oracle`] — dense small-`p` equivalence checks;
//! * [`experiments`] — seeded sweep harnesses shared by the CLI and tests.
//!
//! Core math is generic over the scalar type via [`Scalar`]; the aliases
//! below fix `f64`, which is what the harnesses and the CLI use.

pub mod conc;
pub mod error;
pub mod experiments;
pub mod gram;
pub mod io;
pub mod ksum;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Dense order-L tensor over `f64`.
pub type Tensor64 = tensor::DenseTensor<f64>;
/// Dense order-L tensor over `f32`.
pub type Tensor32 = tensor::DenseTensor<f32>;
/// Symmetric factor matrix over `f64`.
pub type SymMatrix64 = linalg::SymMatrix<f64>;
/// Symmetric factor matrix over `f32`.
pub type SymMatrix32 = linalg::SymMatrix<f32>;
/// Eigendecomposition of a symmetric `f64` matrix.
pub type EigenPair64 = linalg::EigenPair<f64>;
/// Kronecker sum of `f64` factors.
pub type KroneckerSum64 = ksum::KroneckerSum<f64>;
/// Kronecker sum of `f32` factors.
pub type KroneckerSum32 = ksum::KroneckerSum<f32>;
/// Spectral handle of an `f64` Kronecker sum.
pub type KsEigen64 = ksum::KsEigen<f64>;
/// Mode-k sample Gram matrices over `f64`.
pub type FactorGrams64 = gram::FactorGrams<f64>;
/// Penalty calibration over `f64`.
pub type PenaltySet64 = gram::PenaltySet<f64>;
/// Generated ground truth over `f64`.
pub type GroundTruth64 = model::GroundTruth<f64>;
/// Solver output over `f64`.
pub type SolverResult64 = solver::SolverResult<f64>;
