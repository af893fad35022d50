//! Primal-dual interior point method for the margin problem
//!
//! ```text
//!   max μ   s.t.  Σ_m E_m ∘ Γ_m + μ·I = T,   Γ_m ⪰ 0
//!   min Σᵢⱼ T(i,j) k(i,j)   s.t.  E_m ∘ k ⪰ 0 for all m,  tr k = 1
//! ```
//!
//! The two problems are dual to each other. `μ* ≥ 0` means `T` decomposes
//! over the α grid; `μ* < 0` hands back a kernel `k` that is admissible on the
//! grid and makes the Pick matrix `T ∘ k` indefinite.
//!
//! The kernel side is written in inequality form `S_m = C_m − Σ_a y_a A_a^m`
//! over a basis of trace-zero Hermitian matrices, and solved with the HKM
//! search direction and a Mehrotra predictor-corrector. The primal blocks are
//! recovered as `Γ_m = conj(X_m)`.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::linalg::{eigh, inv_pd, inv_sqrt, ComplexMatrix, HermitianMatrix, C64};

pub(crate) struct MarginSolution {
    /// Optimal `min Σ T(i,j) k(i,j)` (equivalently `μ*`).
    pub value: f64,
    /// Trace-one kernel attaining the value (admissible on the grid).
    pub kernel: HermitianMatrix,
    /// Blocks with `Σ E_m ∘ Γ_m ≈ T − value·I`.
    pub blocks: Vec<HermitianMatrix>,
    pub iterations: usize,
    #[allow(dead_code)]
    pub converged: bool,
}

/// Trace-zero Hermitian basis: off-diagonal real and imaginary parts, then
/// consecutive diagonal differences.
fn trace_zero_basis(n: usize) -> Vec<HermitianMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(n * n - 1);
    for i in 0..n {
        for j in (i + 1)..n {
            basis.push(HermitianMatrix::from_fn(n, |a, b| {
                if (a, b) == (i, j) {
                    C64::new(r, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }));
            basis.push(HermitianMatrix::from_fn(n, |a, b| {
                if (a, b) == (i, j) {
                    C64::new(0.0, r)
                } else {
                    C64::new(0.0, 0.0)
                }
            }));
        }
    }
    for l in 0..n.saturating_sub(1) {
        let mut d = vec![0.0; n];
        d[l] = r;
        d[l + 1] = -r;
        basis.push(HermitianMatrix::from_real_diagonal(&d));
    }
    basis
}

/// `Re tr(a b)`.
#[inline]
fn re_trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = a[(i, j)];
            let y = b[(j, i)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

struct Problem {
    /// `a_mats[m][a] = A_a^m`
    a_mats: Vec<Vec<ComplexMatrix>>,
    c_mats: Vec<ComplexMatrix>,
    b: DVector<f64>,
    basis: Vec<HermitianMatrix>,
    n: usize,
}

impl Problem {
    fn a_op(&self, x: &[ComplexMatrix]) -> DVector<f64> {
        let q = self.b.len();
        let mut out = DVector::zeros(q);
        for (m, xm) in x.iter().enumerate() {
            for a in 0..q {
                out[a] += re_trace_product(&self.a_mats[m][a], xm);
            }
        }
        out
    }

    fn a_adj(&self, y: &DVector<f64>) -> Vec<ComplexMatrix> {
        self.a_mats
            .iter()
            .map(|blocks| {
                let mut acc = ComplexMatrix::zeros(self.n, self.n);
                for (a, am) in blocks.iter().enumerate() {
                    acc += am * C64::new(y[a], 0.0);
                }
                acc
            })
            .collect()
    }
}

fn max_step(x: &[ComplexMatrix], dx: &[ComplexMatrix]) -> Result<f64> {
    let mut step = f64::INFINITY;
    for (xm, dm) in x.iter().zip(dx) {
        let w = inv_sqrt(&HermitianMatrix::symmetrize(xm))?;
        let scaled = HermitianMatrix::symmetrize(&(w.as_matrix() * dm * w.as_matrix()));
        let lmin = eigh(&scaled)?.min();
        if lmin < 0.0 {
            step = step.min(-1.0 / lmin);
        }
    }
    Ok(step)
}

/// New `X`, `S`, the `y` increment and the primal and dual step lengths.
type Step = (Vec<ComplexMatrix>, Vec<ComplexMatrix>, DVector<f64>, f64, f64);

fn inner(x: &[ComplexMatrix], s: &[ComplexMatrix]) -> f64 {
    x.iter().zip(s).map(|(a, b)| re_trace_product(a, b)).sum()
}

fn frob(x: &[ComplexMatrix]) -> f64 {
    x.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

/// Solves the margin problem for Schur weights `E_m` and target `T`.
pub(crate) fn solve_margin(
    weights: &[HermitianMatrix],
    target: &HermitianMatrix,
    max_iters: usize,
    tol: f64,
) -> Result<MarginSolution> {
    let n = target.dim();
    let big_m = weights.len();
    let t_scale = target
        .as_matrix()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if n == 1 {
        // tr k = 1 pins k = [1]; μ* = T(0,0) and all mass goes to μ.
        return Ok(MarginSolution {
            value: target.get(0, 0).re,
            kernel: HermitianMatrix::identity(1),
            blocks: vec![HermitianMatrix::zeros(1); big_m],
            iterations: 0,
            converged: true,
        });
    }
    if t_scale == 0.0 {
        let kernel = HermitianMatrix::identity(n).scale(1.0 / n as f64);
        return Ok(MarginSolution {
            value: 0.0,
            kernel,
            blocks: vec![HermitianMatrix::zeros(n); big_m],
            iterations: 0,
            converged: true,
        });
    }
    let t_norm = target.scale(1.0 / t_scale);

    let basis = trace_zero_basis(n);
    let q = basis.len();
    let a_mats: Vec<Vec<ComplexMatrix>> = weights
        .iter()
        .map(|e| {
            basis
                .iter()
                .map(|h| -e.schur(h).into_matrix())
                .collect()
        })
        .collect();
    let inv_n = HermitianMatrix::identity(n).scale(1.0 / n as f64);
    let c_mats: Vec<ComplexMatrix> = weights.iter().map(|e| e.schur(&inv_n).into_matrix()).collect();
    // objective Σ T(i,j) H_a(i,j), maximized with a sign flip
    let b = DVector::from_iterator(
        q,
        basis.iter().map(|h| {
            -h.as_matrix()
                .iter()
                .zip(t_norm.as_matrix().iter())
                .map(|(x, y)| (x * y).re)
                .sum::<f64>()
        }),
    );
    let prob = Problem {
        a_mats,
        c_mats,
        b,
        basis,
        n,
    };

    let dim_total = (big_m * n) as f64;
    let mut y = DVector::<f64>::zeros(q);
    let mut s: Vec<ComplexMatrix> = prob.c_mats.clone();
    let mut x: Vec<ComplexMatrix> = (0..big_m).map(|_| ComplexMatrix::identity(n, n)).collect();
    let b_norm = prob.b.norm();
    let c_norm = frob(&prob.c_mats);

    let mut converged = false;
    let mut iterations = 0;
    let mut best = (f64::INFINITY, x.clone(), y.clone());
    for it in 0..max_iters {
        iterations = it + 1;
        let r_p = &prob.b - prob.a_op(&x);
        let aty = prob.a_adj(&y);
        let r_d: Vec<ComplexMatrix> = (0..big_m)
            .map(|m| &prob.c_mats[m] - &s[m] - &aty[m])
            .collect();
        let gap = inner(&x, &s);
        let mu = gap / dim_total;
        let pobj = inner(&prob.c_mats, &x);
        let dobj = prob.b.dot(&y);
        let rel_p = r_p.norm() / (1.0 + b_norm);
        let rel_d = frob(&r_d) / (1.0 + c_norm);
        let rel_gap = gap / (1.0 + pobj.abs() + dobj.abs());
        let merit = rel_p.max(rel_d).max(rel_gap);
        if merit < best.0 {
            best = (merit, x.clone(), y.clone());
        }
        if rel_p < tol && rel_d < tol && rel_gap < tol {
            converged = true;
            break;
        }

        // past the attainable accuracy the iterates can drift; the best one is kept
        let advance = || -> Result<Step> {
            let s_inv: Vec<ComplexMatrix> = s
                .iter()
                .map(|sm| inv_pd(&HermitianMatrix::symmetrize(sm)).map(|h| h.into_matrix()))
                .collect::<Result<_>>()?;

            // Schur complement H_ab = Σ_m Re tr(A_a X A_b S⁻¹)
            let mut schur = DMatrix::<f64>::zeros(q, q);
            for m in 0..big_m {
                for bb in 0..q {
                    let g = &x[m] * &prob.a_mats[m][bb] * &s_inv[m];
                    for a in 0..q {
                        schur[(a, bb)] += re_trace_product(&prob.a_mats[m][a], &g);
                    }
                }
            }
            let schur = (&schur + schur.transpose()) * 0.5;
            let chol = schur.clone().cholesky();

            let solve = |rc: &[ComplexMatrix]| -> (DVector<f64>, Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
                // dX = (R_c − X dS) S⁻¹ with dS = R_d − A*(dy)
                let partial: Vec<ComplexMatrix> = (0..big_m)
                    .map(|m| (&rc[m] - &x[m] * &r_d[m]) * &s_inv[m])
                    .collect();
                let rhs = &r_p - prob.a_op(&partial);
                let dy = match &chol {
                    Some(c) => c.solve(&rhs),
                    None => schur
                        .clone()
                        .lu()
                        .solve(&rhs)
                        .unwrap_or_else(|| DVector::zeros(q)),
                };
                let atdy = prob.a_adj(&dy);
                let ds: Vec<ComplexMatrix> = (0..big_m).map(|m| &r_d[m] - &atdy[m]).collect();
                let dx: Vec<ComplexMatrix> = (0..big_m)
                    .map(|m| hermitian_part(&((&rc[m] - &x[m] * &ds[m]) * &s_inv[m])))
                    .collect();
                (dy, dx, ds)
            };

            // predictor
            let rc_aff: Vec<ComplexMatrix> = (0..big_m).map(|m| -(&x[m] * &s[m])).collect();
            let (_, dx_a, ds_a) = solve(&rc_aff);
            let ap = max_step(&x, &dx_a)?.min(1.0);
            let ad = max_step(&s, &ds_a)?.min(1.0);
            let x_aff: Vec<ComplexMatrix> = (0..big_m).map(|m| &x[m] + &dx_a[m] * C64::new(ap, 0.0)).collect();
            let s_aff: Vec<ComplexMatrix> = (0..big_m).map(|m| &s[m] + &ds_a[m] * C64::new(ad, 0.0)).collect();
            let mu_aff = inner(&x_aff, &s_aff) / dim_total;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            // corrector
            let rc: Vec<ComplexMatrix> = (0..big_m)
                .map(|m| {
                    ComplexMatrix::identity(n, n) * C64::new(sigma * mu, 0.0)
                        - &x[m] * &s[m]
                        - &dx_a[m] * &ds_a[m]
                })
                .collect();
            let (dy, dx, ds) = solve(&rc);
            let ap = (0.98 * max_step(&x, &dx)?).min(1.0);
            let ad = (0.98 * max_step(&s, &ds)?).min(1.0);
            let x_new = (0..big_m)
                .map(|m| hermitian_part(&(&x[m] + &dx[m] * C64::new(ap, 0.0))))
                .collect();
            let s_new = (0..big_m)
                .map(|m| hermitian_part(&(&s[m] + &ds[m] * C64::new(ad, 0.0))))
                .collect();
            Ok((x_new, s_new, dy * ad, ap, ad))
        };
        let Ok((x_new, s_new, dy, ap, ad)) = advance() else {
            break;
        };
        x = x_new;
        s = s_new;
        y += dy;
        if ap < 1e-12 && ad < 1e-12 {
            break;
        }
    }

    let (_, x, y) = best;
    let mut kernel = inv_n.clone();
    for (a, h) in prob.basis.iter().enumerate() {
        kernel = kernel.axpy(y[a], h);
    }
    let value_norm: f64 = kernel
        .as_matrix()
        .iter()
        .zip(t_norm.as_matrix().iter())
        .map(|(k, t)| (k * t).re)
        .sum();
    let blocks = x
        .iter()
        .map(|xm| HermitianMatrix::symmetrize(xm).conj().scale(t_scale))
        .collect();
    Ok(MarginSolution {
        value: value_norm * t_scale,
        kernel,
        blocks,
        iterations,
        converged,
    })
}
