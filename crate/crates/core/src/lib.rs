//! Numerical tests for divisibility of quantum dynamical maps.
//!
//! Everything lives on finite-dimensional truncations and dense matrices:
//!
//! - [`operator`]: Hermitian operators, trace norm, Jordan split, tensor products.
//! - [`channel`]: superoperator channels, Choi matrices, composition, inversion,
//!   and the contractivity test for positivity.
//! - [`divisibility`]: time-parameterised families and the trace-norm
//!   monotonicity scans for P- and CP-divisibility.
//! - [`families`]: unitary, Kraus and rank-collapsing reference families.
//! - [`idempotent`]: the idempotent channels `I, E, B, D` and their combinations.
//! - [`schur`]: the Schur-multiplier family with a tridiagonal Toeplitz symbol.
//! - [`gaussian`]: covariance-level Gaussian channels and the determinant criterion.
//!
//! The superoperator convention is column stacking: the map `X ↦ A X B` has
//! matrix `Bᵀ ⊗ A`.

// `!(a < b)` is deliberate throughout: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod divisibility;
pub mod error;
pub mod families;
pub mod gaussian;
pub mod idempotent;
pub mod operator;
pub mod random;
pub mod schur;

pub use channel::{Channel, ChoiMatrix, ContractivityOptions, ContractivityReport};
pub use divisibility::{DivisibilityReport, DynamicalFamily, ScanOptions, Verdict};
pub use error::{Error, Result};
pub use operator::{CMatrix, HermitianOperator, SpectralDecomposition, C64};
