//! Certificate re-verification from scratch.
//!
//! Uses only the linear algebra and kernel layers: nothing here calls into the
//! solver, so a bug in the solver cannot vouch for its own output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{admissibility_report, schur_weight};
use crate::linalg::{eigh, HermitianMatrix, C64};
use crate::pick::{DecompositionCertificate, DualCertificate, PickProblem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimalCheck {
    /// `‖(t² − wᵢw̄ⱼ) − Σ_m E_m ∘ Γ_m‖_F`.
    pub residual: f64,
    /// `min_m λ_min(Γ_m)`.
    pub min_block_eig: f64,
    /// Largest `||α_m| − 1|`.
    pub alpha_off_circle: f64,
}

impl PrimalCheck {
    pub fn passes(&self, residual_tol: f64, block_tol: f64) -> bool {
        self.residual <= residual_tol && self.min_block_eig >= -block_tol && self.alpha_off_circle <= 1e-12
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCheck {
    /// `−λ_min((t² − wᵢw̄ⱼ) k(i, j))`.
    pub violation: f64,
    /// Worst admissibility LMI eigenvalue.
    pub admissibility_slack: f64,
    pub min_eig_kernel: f64,
    pub diag_deviation: f64,
}

impl DualCheck {
    pub fn passes(&self, violation_tol: f64, slack_tol: f64) -> bool {
        self.violation >= violation_tol && self.admissibility_slack >= -slack_tol && self.min_eig_kernel > 0.0
    }
}

fn target(problem: &PickProblem, scale: f64) -> HermitianMatrix {
    let w = problem.targets();
    HermitianMatrix::from_fn(w.len(), |i, j| C64::new(scale * scale, 0.0) - w[i] * w[j].conj())
}

pub fn verify_primal(problem: &PickProblem, cert: &DecompositionCertificate) -> Result<PrimalCheck> {
    let n = problem.len();
    if cert.alphas.len() != cert.blocks.len() || cert.blocks.iter().any(|b| b.dim() != n) {
        return Err(Error::Dimension("certificate does not fit the problem".into()));
    }
    let mut sum = HermitianMatrix::zeros(n);
    let mut min_block_eig = f64::INFINITY;
    let mut alpha_off_circle = 0.0f64;
    for (alpha, block) in cert.alphas.iter().zip(&cert.blocks) {
        alpha_off_circle = alpha_off_circle.max((alpha.norm() - 1.0).abs());
        sum = sum.add(&schur_weight(*alpha, problem.nodes()).schur(block));
        min_block_eig = min_block_eig.min(eigh(block)?.min());
    }
    Ok(PrimalCheck {
        residual: target(problem, cert.scale).sub(&sum).frobenius_norm(),
        min_block_eig: if cert.blocks.is_empty() { 0.0 } else { min_block_eig },
        alpha_off_circle,
    })
}

pub fn verify_dual(problem: &PickProblem, cert: &DualCertificate, alpha_grid: usize) -> Result<DualCheck> {
    if cert.kernel.nodes() != problem.nodes() {
        return Err(Error::Dimension("kernel and problem are over different node sets".into()));
    }
    let report = admissibility_report(&cert.kernel, alpha_grid, 1e-10)?;
    let pick = target(problem, cert.scale).schur(cert.kernel.gram());
    Ok(DualCheck {
        violation: -eigh(&pick)?.min(),
        admissibility_slack: report.worst_slack(),
        min_eig_kernel: report.min_eig_kernel,
        diag_deviation: report.diag_deviation,
    })
}
