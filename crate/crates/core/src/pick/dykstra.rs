//! Dykstra alternating projections for the decomposition
//! `Σ_m E_m ∘ Γ_m = T`, `Γ_m ⪰ 0`.
//!
//! The adjoint of `Γ ↦ Σ_m E_m ∘ Γ_m` is `Z ↦ (conj(E_m) ∘ Z)_m`, and the
//! composition of the two is entrywise multiplication by
//! `W(i, j) = Σ_m |E_m(i, j)|²`, so the affine projection is closed form.

use crate::error::Result;
use crate::linalg::{eigh, psd_project, ComplexMatrix, HermitianMatrix, C64};

pub(crate) struct DykstraOutcome {
    pub blocks: Vec<HermitianMatrix>,
    pub iterations: usize,
}

fn apply(weights: &[HermitianMatrix], blocks: &[HermitianMatrix]) -> HermitianMatrix {
    let n = weights[0].dim();
    weights
        .iter()
        .zip(blocks)
        .fold(HermitianMatrix::zeros(n), |acc, (e, g)| acc.add(&e.schur(g)))
}

/// Runs Dykstra's method towards `target − shift·I` and stops once the
/// current PSD iterate leaves a positive semidefinite remainder against the
/// unshifted `target`, which the caller then absorbs exactly.
pub(crate) fn decompose(
    weights: &[HermitianMatrix],
    target: &HermitianMatrix,
    shift: f64,
    max_iters: usize,
) -> Result<DykstraOutcome> {
    let n = target.dim();
    let big_m = weights.len();
    let shifted = target.sub(&HermitianMatrix::identity(n).scale(shift));
    let mut denom = ComplexMatrix::zeros(n, n);
    for e in weights {
        denom += e.as_matrix().map(|z| C64::new(z.norm_sqr(), 0.0));
    }

    let project_affine = |blocks: &[HermitianMatrix]| -> Vec<HermitianMatrix> {
        let gap = shifted.sub(&apply(weights, blocks));
        let scaled = HermitianMatrix::symmetrize(&gap.as_matrix().component_div(&denom));
        blocks
            .iter()
            .zip(weights)
            .map(|(g, e)| g.add(&e.conj().schur(&scaled)))
            .collect()
    };

    let mut x = vec![HermitianMatrix::zeros(n); big_m];
    let mut p = vec![HermitianMatrix::zeros(n); big_m];
    let mut q = vec![HermitianMatrix::zeros(n); big_m];
    let mut iterations = 0;
    for it in 0..max_iters {
        iterations = it + 1;
        let xp: Vec<_> = x.iter().zip(&p).map(|(a, b)| a.add(b)).collect();
        let y = project_affine(&xp);
        p = xp.iter().zip(&y).map(|(a, b)| a.sub(b)).collect();
        let yq: Vec<_> = y.iter().zip(&q).map(|(a, b)| a.add(b)).collect();
        x = yq.iter().map(psd_project).collect::<Result<_>>()?;
        q = yq.iter().zip(&x).map(|(a, b)| a.sub(b)).collect();

        if it % 10 == 9 {
            let remainder = target.sub(&apply(weights, &x));
            if eigh(&remainder)?.min() >= 0.0 {
                break;
            }
        }
    }
    Ok(DykstraOutcome {
        blocks: x,
        iterations,
    })
}
