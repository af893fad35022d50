//! Nevanlinna–Pick interpolation on the symmetrized bidisk
//! `G = {(z₁ + z₂, z₁z₂) : |z₁|, |z₂| < 1}` with checkable certificates,
//! transfer-function realizations of interpolants, and extension audits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod extension;
pub mod geometry;
pub mod hardy;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod pick;
pub mod realization;
pub mod verify;

pub use config::{PrimalMethod, SolverConfig};
pub use error::{Error, Result};
pub use extension::{ExtensionResult, SubordinatePair, VonNeumannAudit};
pub use geometry::{GPoint, Membership};
pub use hardy::HardyCheckReport;
pub use kernels::{AdmissibilityReport, KernelMatrix, NodeSet};
pub use linalg::{ComplexMatrix, HermitianMatrix, C64};
pub use pick::{
    DecompositionCertificate, DualCertificate, ExtremalNorm, FeasibilityVerdict, PickProblem,
};
pub use realization::{Colligation, RealizedFunction};
