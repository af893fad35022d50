//! Transfer-function realization of interpolants from decomposition
//! certificates.
//!
//! A certificate `1 − ŵᵢ conj(ŵⱼ) = Σ_m E_m(i, j) Γ̂_m(i, j)` is a Gram
//! identity `⟨uᵢ, uⱼ⟩ = ⟨vᵢ, vⱼ⟩` for `uᵢ = (1, ⊕_m φ(α_m, λᵢ) hᵢ⁽ᵐ⁾)` and
//! `vᵢ = (ŵᵢ, hᵢ)`. The unitary `V` with `V uᵢ = vᵢ` is the colligation, and
//! `f(x) = A + B Z(x) (I − D Z(x))⁻¹ C` interpolates.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{phi_unchecked, sample_g, GPoint};
use crate::linalg::{eigh, psd_factor, spectral_norm, ComplexMatrix, HermitianMatrix, C64};
use crate::pick::{DecompositionCertificate, PickProblem};

/// Relative eigenvalue cutoff for certificate blocks.
pub const RANK_CUTOFF: f64 = 1e-10;
/// Largest entry of `uᵢ/vᵢ` Gram disagreement tolerated by [`build_colligation`].
pub const GRAM_TOL: f64 = 1e-6;
/// Largest resolvent condition number [`evaluate`] accepts.
pub const MAX_CONDITION: f64 = 1e12;

/// `V = [[A, B], [C, D]]` acting on `C ⊕ H`, `H = ⊕_m C^{r_m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Colligation {
    pub alphas: Vec<C64>,
    pub block_dims: Vec<usize>,
    pub a: C64,
    /// Row `B`, length `Σ r_m`.
    pub b: Vec<C64>,
    /// Column `C`, length `Σ r_m`.
    pub c: Vec<C64>,
    pub d: ComplexMatrix,
    /// The realized function is `scale · (A + B Z (I − D Z)⁻¹ C)`.
    pub scale: f64,
    /// `‖V*V − I‖`.
    pub isometry_defect: f64,
}

impl Colligation {
    /// The constant function `value` (no state space). For `value ≠ 0` the
    /// scale is `|value|` and `V = [value/|value|]` is unitary; the zero
    /// function has no finite isometric realization and carries defect 1.
    pub fn constant(value: C64) -> Colligation {
        let modulus = value.norm();
        let (a, scale) = if modulus > 0.0 {
            (value / modulus, modulus)
        } else {
            (C64::new(0.0, 0.0), 1.0)
        };
        Colligation {
            alphas: vec![],
            block_dims: vec![],
            a,
            b: vec![],
            c: vec![],
            d: ComplexMatrix::zeros(0, 0),
            scale,
            isometry_defect: (1.0 - a.norm_sqr()).abs(),
        }
    }

    pub fn state_dim(&self) -> usize {
        self.b.len()
    }

    /// The full matrix `V`.
    pub fn matrix(&self) -> ComplexMatrix {
        let n = self.state_dim();
        let mut v = ComplexMatrix::zeros(n + 1, n + 1);
        v[(0, 0)] = self.a;
        for k in 0..n {
            v[(0, k + 1)] = self.b[k];
            v[(k + 1, 0)] = self.c[k];
            for l in 0..n {
                v[(k + 1, l + 1)] = self.d[(k, l)];
            }
        }
        v
    }

    /// Checks the shape invariants.
    pub fn validate(&self) -> Result<()> {
        let n: usize = self.block_dims.iter().sum();
        if self.alphas.len() != self.block_dims.len()
            || self.b.len() != n
            || self.c.len() != n
            || self.d.nrows() != n
            || self.d.ncols() != n
        {
            return Err(Error::Dimension(format!(
                "colligation blocks sum to {n} but B, C, D have sizes {}, {}, {}x{}",
                self.b.len(),
                self.c.len(),
                self.d.nrows(),
                self.d.ncols()
            )));
        }
        if !(self.scale > 0.0) {
            return Err(Error::Invalid(format!("colligation scale {}", self.scale)));
        }
        Ok(())
    }
}

/// A colligation with an optional Monte-Carlo sup-norm audit `(samples, observed_sup)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizedFunction {
    pub colligation: Colligation,
    pub norm_audit: Option<(usize, f64)>,
}

impl RealizedFunction {
    pub fn new(colligation: Colligation) -> Self {
        RealizedFunction {
            colligation,
            norm_audit: None,
        }
    }

    pub fn with_audit(mut self, samples: usize, seed: u64) -> Self {
        let sup = norm_audit(&self, samples, seed);
        self.norm_audit = Some((samples, sup));
        self
    }
}

/// GNS factors `Γ_m = L_m L_m*` and node embeddings `hᵢ = ⊕_m (row i of L_m)`.
pub fn gns_vectors(cert: &DecompositionCertificate) -> Result<(Vec<ComplexMatrix>, Vec<Vec<C64>>)> {
    factor_blocks(&cert.blocks, 1.0, RANK_CUTOFF)
}

fn factor_blocks(
    blocks: &[HermitianMatrix],
    factor: f64,
    rank_cutoff: f64,
) -> Result<(Vec<ComplexMatrix>, Vec<Vec<C64>>)> {
    let n = blocks.first().map(|b| b.dim()).unwrap_or(0);
    let mut columns = Vec::with_capacity(blocks.len());
    for (index, g) in blocks.iter().enumerate() {
        let l = psd_factor(&g.scale(factor), rank_cutoff).map_err(|e| Error::Block {
            index,
            source: Box::new(e),
        })?;
        columns.push(l);
    }
    let mut h = vec![Vec::new(); n];
    for l in &columns {
        for (i, hi) in h.iter_mut().enumerate() {
            hi.extend(l.row(i).iter().copied());
        }
    }
    Ok((columns, h))
}

fn columns_matrix(vectors: &[Vec<C64>], dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, vectors.len(), |r, c| vectors[c][r])
}

/// Orthonormal basis (columns) of the range of `x` given its Gram eigensystem.
fn whitened_range(x: &ComplexMatrix, gram: &HermitianMatrix) -> Result<ComplexMatrix> {
    let e = eigh(gram)?;
    let lmax = e.max().max(0.0);
    let keep: Vec<usize> = (0..e.values.len())
        .filter(|&k| e.values[k] > RANK_CUTOFF * lmax && e.values[k] > 0.0)
        .collect();
    let mut q = ComplexMatrix::zeros(gram.dim(), keep.len());
    for (col, &k) in keep.iter().enumerate() {
        let s = 1.0 / e.values[k].sqrt();
        for r in 0..gram.dim() {
            q[(r, col)] = e.vectors[(r, k)] * s;
        }
    }
    Ok(x * q)
}

/// Löwdin orthonormalization `Y (Y*Y)^{-1/2}`.
fn polar(y: &ComplexMatrix) -> Result<ComplexMatrix> {
    if y.ncols() == 0 {
        return Ok(y.clone());
    }
    let g = HermitianMatrix::symmetrize(&(y.adjoint() * y));
    let e = eigh(&g)?;
    if e.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eig: e.min() });
    }
    Ok(y * e.reassemble(|l| 1.0 / l.sqrt()).into_matrix())
}

/// Orthonormal basis of the orthogonal complement of the orthonormal columns `q`.
fn complement(q: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = q.nrows();
    let proj = HermitianMatrix::symmetrize(&(ComplexMatrix::identity(dim, dim) - q * q.adjoint()));
    let e = eigh(&proj)?;
    let keep: Vec<usize> = (0..dim).filter(|&k| e.values[k] > 0.5).collect();
    let basis = ComplexMatrix::from_fn(dim, keep.len(), |r, c| e.vectors[(r, keep[c])]);
    polar(&basis)
}

/// Builds the colligation of `cert` for the normalized problem `w/scale`.
///
/// Fails with [`Error::GramMismatch`] when the certificate does not reproduce
/// the problem's Pick target, naming the worst entry.
pub fn build_colligation(problem: &PickProblem, cert: &DecompositionCertificate) -> Result<Colligation> {
    let n = problem.len();
    if cert.blocks.iter().any(|b| b.dim() != n) || cert.blocks.len() != cert.alphas.len() {
        return Err(Error::Dimension(format!(
            "certificate with {} alphas and {} blocks does not fit {n} nodes",
            cert.alphas.len(),
            cert.blocks.len()
        )));
    }
    let t = cert.scale;
    if !(t > 0.0) {
        return Err(Error::Invalid(format!("certificate scale {t}")));
    }
    let w_hat: Vec<C64> = problem.targets().iter().map(|w| w / t).collect();
    let inv_t2 = 1.0 / (t * t);

    // drop blocks that are negligible against the largest one
    let block_max: Vec<f64> = cert
        .blocks
        .iter()
        .map(|g| eigh(g).map(|e| e.max()))
        .collect::<Result<_>>()?;
    let global = block_max.iter().cloned().fold(0.0, f64::max);
    let kept: Vec<usize> = (0..cert.blocks.len())
        .filter(|&m| block_max[m] > RANK_CUTOFF * global)
        .collect();
    let blocks: Vec<HermitianMatrix> = kept.iter().map(|&m| cert.blocks[m].clone()).collect();
    let alphas_kept: Vec<C64> = kept.iter().map(|&m| cert.alphas[m]).collect();
    let (columns, h) = if blocks.is_empty() {
        (vec![], vec![Vec::new(); n])
    } else {
        factor_blocks(&blocks, inv_t2, RANK_CUTOFF).map_err(|e| match e {
            Error::Block { index, source } => Error::Block {
                index: kept[index],
                source,
            },
            other => other,
        })?
    };
    let mut alphas = Vec::new();
    let mut block_dims = Vec::new();
    for (a, l) in alphas_kept.iter().zip(&columns) {
        if l.ncols() > 0 {
            alphas.push(*a);
            block_dims.push(l.ncols());
        }
    }
    let big_n: usize = block_dims.iter().sum();
    let dim = big_n + 1;

    let pts = problem.nodes().points();
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        let mut ui = vec![C64::new(1.0, 0.0)];
        let mut vi = vec![w_hat[i]];
        let mut offset = 0;
        for (a, r) in alphas.iter().zip(&block_dims) {
            let f = pts[i].phi(*a);
            for k in 0..*r {
                ui.push(f * h[i][offset + k]);
                vi.push(h[i][offset + k]);
            }
            offset += r;
        }
        u.push(ui);
        v.push(vi);
    }
    let uu = columns_matrix(&u, dim);
    let vv = columns_matrix(&v, dim);
    let gram_u = HermitianMatrix::symmetrize(&(uu.adjoint() * &uu));
    let gram_v = HermitianMatrix::symmetrize(&(vv.adjoint() * &vv));
    let mut worst = (0, 0, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let gap = (gram_u.get(i, j) - gram_v.get(i, j)).norm();
            if gap > worst.2 {
                worst = (i, j, gap);
            }
        }
    }
    if worst.2 > GRAM_TOL {
        return Err(Error::GramMismatch {
            i: worst.0,
            j: worst.1,
            gap: worst.2,
        });
    }

    let e = polar(&whitened_range(&uu, &gram_u)?)?;
    let f = polar(&whitened_range(&vv, &gram_u)?)?;
    let e_perp = complement(&e)?;
    let f_perp = complement(&f)?;
    if e_perp.ncols() != f_perp.ncols() {
        return Err(Error::Invalid("span dimensions of the lurking isometry differ".into()));
    }
    let big_v = &f * e.adjoint() + &f_perp * e_perp.adjoint();
    let defect = spectral_norm(&(big_v.adjoint() * &big_v - ComplexMatrix::identity(dim, dim)))?;

    Ok(Colligation {
        alphas,
        block_dims,
        a: big_v[(0, 0)],
        b: (1..dim).map(|k| big_v[(0, k)]).collect(),
        c: (1..dim).map(|k| big_v[(k, 0)]).collect(),
        d: big_v.view((1, 1), (big_n, big_n)).into_owned(),
        scale: t,
        isometry_defect: defect,
    })
}

/// `V uᵢ − vᵢ` worst norm, for auditing a colligation against its certificate.
pub fn lurking_defect(problem: &PickProblem, colligation: &Colligation) -> Result<f64> {
    let mut worst = 0.0f64;
    for (x, w) in problem.nodes().points().iter().zip(problem.targets()) {
        let got = evaluate_colligation(colligation, x)?;
        worst = worst.max((got - w).norm());
    }
    Ok(worst)
}

fn state_weights(col: &Colligation, x: &GPoint) -> Vec<C64> {
    let mut z = Vec::with_capacity(col.state_dim());
    for (a, r) in col.alphas.iter().zip(&col.block_dims) {
        let f = phi_unchecked(*a, x.s(), x.p());
        z.extend(std::iter::repeat_n(f, *r));
    }
    z
}

fn evaluate_colligation(col: &Colligation, x: &GPoint) -> Result<C64> {
    let n = col.state_dim();
    if n == 0 {
        return Ok(col.a * col.scale);
    }
    let z = state_weights(col, x);
    // (I − D Z) y = C, f = A + B Z y
    let mut m = ComplexMatrix::identity(n, n);
    for r in 0..n {
        for c in 0..n {
            m[(r, c)] -= col.d[(r, c)] * z[c];
        }
    }
    let rhs = nalgebra::DVector::from_column_slice(&col.c);
    let lu = m.clone().lu();
    let y = lu
        .solve(&rhs)
        .ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
    let cond = condition_estimate(&m, &lu);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::IllConditioned { condition: cond });
    }
    let mut acc = col.a;
    for k in 0..n {
        acc += col.b[k] * z[k] * y[k];
    }
    Ok(acc * col.scale)
}

/// `‖M‖₁ · ‖M⁻¹‖₁` with a one-step Hager estimate of the inverse norm.
fn condition_estimate(m: &ComplexMatrix, lu: &nalgebra::linalg::LU<C64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let n = m.nrows();
    let norm1 = (0..n)
        .map(|c| m.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let ones = nalgebra::DVector::from_element(n, C64::new(1.0 / n as f64, 0.0));
    let Some(x) = lu.solve(&ones) else {
        return f64::INFINITY;
    };
    let signs = x.map(|z| if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) });
    let adj: ComplexMatrix = m.adjoint();
    let Some(zv) = adj.lu().solve(&signs) else {
        return f64::INFINITY;
    };
    let j = (0..n)
        .max_by(|&a, &b| zv[a].norm().total_cmp(&zv[b].norm()))
        .unwrap_or(0);
    let mut ej = nalgebra::DVector::from_element(n, C64::new(0.0, 0.0));
    ej[j] = C64::new(1.0, 0.0);
    let Some(xj) = lu.solve(&ej) else {
        return f64::INFINITY;
    };
    let est = x.iter().map(|z| z.norm()).sum::<f64>().max(xj.iter().map(|z| z.norm()).sum::<f64>());
    norm1 * est
}

/// `scale · (A + B Z(x) (I − D Z(x))⁻¹ C)`.
pub fn evaluate(f: &RealizedFunction, x: &GPoint) -> Result<C64> {
    evaluate_colligation(&f.colligation, x)
}

/// `max |f|` over `sample_g(samples, seed)`; points where the resolvent is
/// too ill-conditioned to evaluate are skipped.
pub fn norm_audit(f: &RealizedFunction, samples: usize, seed: u64) -> f64 {
    let pts = sample_g(samples.max(1), seed);
    pts.par_iter()
        .map(|x| evaluate(f, x).map(|v| v.norm()).unwrap_or(0.0))
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// Worst entrywise gap in `1 − ŵᵢ conj(ŵⱼ) = Σ_m E_m(i, j) Γ̂_m(i, j)` for the
/// colligation's own blocks, recomputed from `B`, `C`, `D`-independent data.
pub fn kernel_identity_gap(problem: &PickProblem, cert: &DecompositionCertificate) -> f64 {
    let t = cert.scale;
    let n = problem.len();
    let w = problem.targets();
    let nodes = problem.nodes();
    let mut sum = DMatrix::<C64>::zeros(n, n);
    for (a, g) in cert.alphas.iter().zip(&cert.blocks) {
        let f = nodes.phi_vector(*a);
        for i in 0..n {
            for j in 0..n {
                sum[(i, j)] += (C64::new(1.0, 0.0) - f[i] * f[j].conj()) * g.get(i, j) / (t * t);
            }
        }
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let lhs = C64::new(1.0, 0.0) - (w[i] / t) * (w[j] / t).conj();
            worst = worst.max((lhs - sum[(i, j)]).norm());
        }
    }
    worst
}
