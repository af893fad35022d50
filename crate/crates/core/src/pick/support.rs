//! Carathéodory reduction of a decomposition to at most `n²` rank-one atoms.
//!
//! Writes `Σ_m E_m ∘ Γ_m` as `Σ_k λ_k E_{m_k} ∘ v_k v_k*` with `λ_k > 0`.
//! The atoms live in the `n²`-dimensional real space of Hermitian matrices, so
//! any `n² + 1` of them are linearly dependent; moving along the dependency
//! until one weight hits zero keeps the sum and the signs and drops an atom.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::Result;
use crate::kernels::{schur_weight, NodeSet};
use crate::linalg::{eigh, HermitianMatrix, C64};

struct Atom {
    block: usize,
    weight: f64,
    vector: Vec<C64>,
    norm: f64,
    coords: Vec<f64>,
}

fn hermitian_coords(m: &HermitianMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(m.get(i, i).re);
        for j in i + 1..n {
            let z = m.get(i, j);
            out.push(z.re * std::f64::consts::SQRT_2);
            out.push(z.im * std::f64::consts::SQRT_2);
        }
    }
    out
}

/// Drops atoms until at most `n²` remain. Blocks that end up empty are removed.
pub(crate) fn reduce_support(
    nodes: &NodeSet,
    alphas: &[C64],
    blocks: &[HermitianMatrix],
) -> Result<(Vec<C64>, Vec<HermitianMatrix>)> {
    let n = nodes.len();
    let dim = n * n;
    let mut atoms = Vec::new();
    let mut largest = 0.0f64;
    let eigs: Vec<_> = blocks.iter().map(eigh).collect::<Result<_>>()?;
    for e in &eigs {
        largest = largest.max(e.max());
    }
    for (m, (alpha, e)) in alphas.iter().zip(&eigs).enumerate() {
        let weight_matrix = schur_weight(*alpha, nodes);
        for k in 0..n {
            let lambda = e.values[k];
            if lambda <= 1e-14 * largest {
                continue;
            }
            let vector = e.vector(k);
            let atom = weight_matrix.schur(&HermitianMatrix::outer(&vector));
            let mut coords = hermitian_coords(&atom);
            let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            coords.iter_mut().for_each(|c| *c /= norm);
            atoms.push(Atom {
                block: m,
                weight: lambda * norm,
                vector,
                norm,
                coords,
            });
        }
    }

    while atoms.len() > dim {
        let window = &atoms[..dim + 1];
        let a = DMatrix::from_fn(dim, dim + 1, |r, c| window[c].coords[r]);
        let gram = a.transpose() * &a;
        let se = SymmetricEigen::new(gram);
        let min_idx = se.eigenvalues.imin();
        let mut c: Vec<f64> = se.eigenvectors.column(min_idx).iter().copied().collect();
        if c.iter().all(|&x| x <= 0.0) {
            c.iter_mut().for_each(|x| *x = -*x);
        }
        let mut tau = f64::INFINITY;
        let mut hit = 0;
        for (k, &ck) in c.iter().enumerate() {
            if ck > 0.0 {
                let r = window[k].weight / ck;
                if r < tau {
                    tau = r;
                    hit = k;
                }
            }
        }
        for (k, &ck) in c.iter().enumerate() {
            atoms[k].weight = (atoms[k].weight - tau * ck).max(0.0);
        }
        atoms[hit].weight = 0.0;
        atoms.retain(|a| a.weight > 0.0);
    }

    let mut out_alphas = Vec::new();
    let mut out_blocks = Vec::new();
    for (m, alpha) in alphas.iter().enumerate() {
        let mut block = HermitianMatrix::zeros(n);
        let mut used = false;
        for atom in atoms.iter().filter(|a| a.block == m) {
            block = block.axpy(atom.weight / atom.norm, &HermitianMatrix::outer(&atom.vector));
            used = true;
        }
        if used {
            out_alphas.push(*alpha);
            out_blocks.push(block);
        }
    }
    Ok((out_alphas, out_blocks))
}
