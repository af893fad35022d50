//! Pick interpolation on `G` with certificates.
//!
//! Data `λ₁..λₙ ∈ G`, `w₁..wₙ` admit an interpolant of sup norm at most `t`
//! exactly when `(t² − wᵢw̄ⱼ)` decomposes as `Σ_m E_m ∘ Γ_m` with PSD blocks
//! `Γ_m` over boundary points `α_m` (a finitely supported measure), where
//! `E_m(i, j) = 1 − φ(α_m, λᵢ) conj(φ(α_m, λⱼ))`. When it does not, some
//! admissible kernel `k` makes `(t² − wᵢw̄ⱼ) k(i, j)` indefinite.
//!
//! [`solve_feasibility`] returns whichever certificate exists; both kinds are
//! re-verified from scratch before they are handed out.

mod dual;
mod dykstra;
mod ipm;
mod support;

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use crate::config::{PrimalMethod, SolverConfig};
use crate::error::{Error, Result};
use crate::kernels::{b_alpha_gram, schur_weight, KernelMatrix, NodeSet};
use crate::linalg::{eigh, psd_project, HermitianMatrix, C64};

pub use dual::{certify_dual, dual_search};

/// Interpolation data: nodes in `G` and target values.
#[derive(Clone, Debug, PartialEq)]
pub struct PickProblem {
    nodes: NodeSet,
    targets: Vec<C64>,
}

impl PickProblem {
    pub fn new(nodes: NodeSet, targets: Vec<C64>) -> Result<Self> {
        if nodes.len() != targets.len() {
            return Err(Error::Dimension(format!(
                "{} nodes but {} targets",
                nodes.len(),
                targets.len()
            )));
        }
        if targets.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
            return Err(Error::Invalid("non-finite target".into()));
        }
        Ok(PickProblem { nodes, targets })
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn targets(&self) -> &[C64] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn max_target(&self) -> f64 {
        self.targets.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }

    /// Same nodes, targets multiplied by `c`.
    pub fn scaled_targets(&self, c: C64) -> PickProblem {
        PickProblem {
            nodes: self.nodes.clone(),
            targets: self.targets.iter().map(|w| w * c).collect(),
        }
    }

    /// The matrix `(t² − wᵢw̄ⱼ)`.
    pub fn target_matrix(&self, scale: f64) -> HermitianMatrix {
        let w = &self.targets;
        HermitianMatrix::from_fn(w.len(), |i, j| C64::new(scale * scale, 0.0) - w[i] * w[j].conj())
    }
}

/// PSD blocks over boundary points reproducing `(t² − wᵢw̄ⱼ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionCertificate {
    pub alphas: Vec<C64>,
    pub blocks: Vec<HermitianMatrix>,
    /// Frobenius norm of `(t² − wᵢw̄ⱼ) − Σ_m E_m ∘ Γ_m`.
    pub residual: f64,
    pub scale: f64,
}

/// An admissible kernel whose Pick matrix at `scale` has a negative eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate {
    pub kernel: KernelMatrix,
    /// `−λ_min((t² − wᵢw̄ⱼ) k(i, j))`.
    pub violation: f64,
    /// Eigenvector of the violated eigenvalue.
    pub witness: Vec<C64>,
    /// Worst admissibility LMI eigenvalue of `kernel` (negative means violated).
    pub admissibility_slack: f64,
    pub scale: f64,
}

#[derive(Clone, Debug)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub primal: Option<DecompositionCertificate>,
    pub dual: Option<DualCertificate>,
    pub iterations: usize,
    pub wall_time: Duration,
    /// Set when the instance sits within `rho_tol` of the requested scale and
    /// was only certified at `scale·(1 + rho_tol)`.
    pub tie_warning: bool,
    pub alpha_grid_used: usize,
}

/// `(t² − wᵢw̄ⱼ)·k(i, j)`.
pub fn pick_matrix(problem: &PickProblem, k: &KernelMatrix, scale: f64) -> Result<HermitianMatrix> {
    if k.nodes() != problem.nodes() {
        return Err(Error::Dimension(
            "kernel and problem are over different node sets".into(),
        ));
    }
    if !(scale > 0.0) {
        return Err(Error::Invalid(format!("scale must be positive, got {scale}")));
    }
    Ok(problem.target_matrix(scale).schur(k.gram()))
}

/// Equispaced boundary points `e^{2πik/M}`.
pub fn boundary_grid(points: usize) -> Vec<C64> {
    (0..points)
        .map(|k| C64::from_polar(1.0, k as f64 * TAU / points as f64))
        .collect()
}

fn weights_for(nodes: &NodeSet, alphas: &[C64]) -> Vec<HermitianMatrix> {
    alphas.iter().map(|&a| schur_weight(a, nodes)).collect()
}

/// `Σ_m E_m ∘ Γ_m` for a certificate's own support.
pub(crate) fn decomposition_sum(nodes: &NodeSet, alphas: &[C64], blocks: &[HermitianMatrix]) -> HermitianMatrix {
    alphas
        .iter()
        .zip(blocks)
        .fold(HermitianMatrix::zeros(nodes.len()), |acc, (&a, g)| {
            acc.add(&schur_weight(a, nodes).schur(g))
        })
}

/// Turns approximate blocks into a certificate: clip to PSD, prune empty
/// blocks, and absorb the positive part of the remainder exactly through
/// `R₊ = E_α ∘ (R₊ ∘ B_α)`.
pub(crate) fn finish_primal(
    problem: &PickProblem,
    scale: f64,
    alphas: &[C64],
    raw_blocks: Vec<HermitianMatrix>,
) -> Result<DecompositionCertificate> {
    let nodes = problem.nodes();
    let target = problem.target_matrix(scale);
    let projected: Vec<HermitianMatrix> = raw_blocks.iter().map(psd_project).collect::<Result<_>>()?;
    let max_trace = projected
        .iter()
        .map(|g| g.diagonal().iter().sum::<f64>())
        .fold(0.0, f64::max);
    let mut kept_alphas = Vec::new();
    let mut kept_blocks = Vec::new();
    for (a, g) in alphas.iter().zip(projected) {
        let tr: f64 = g.diagonal().iter().sum();
        if tr > 1e-13 * max_trace && tr > 0.0 {
            kept_alphas.push(*a);
            kept_blocks.push(g);
        }
    }
    let (mut kept_alphas, mut kept_blocks) = support::reduce_support(nodes, &kept_alphas, &kept_blocks)?;

    let remainder = target.sub(&decomposition_sum(nodes, &kept_alphas, &kept_blocks));
    let e = eigh(&remainder)?;
    if e.max() > 0.0 {
        let positive = e.reassemble(|l| l.max(0.0));
        let anchor = alphas[0];
        let extra = positive.schur(&b_alpha_gram(anchor, nodes));
        match kept_alphas.iter().position(|&a| a == anchor) {
            Some(idx) => kept_blocks[idx] = kept_blocks[idx].add(&extra),
            None => {
                kept_alphas.insert(0, anchor);
                kept_blocks.insert(0, extra);
            }
        }
    }
    let residual = target
        .sub(&decomposition_sum(nodes, &kept_alphas, &kept_blocks))
        .frobenius_norm();
    Ok(DecompositionCertificate {
        alphas: kept_alphas,
        blocks: kept_blocks,
        residual,
        scale,
    })
}

pub(crate) fn primal_threshold(config: &SolverConfig, scale: f64) -> f64 {
    config.primal_tol * (scale * scale).max(1.0)
}

/// One primal attempt on a fixed grid. Returns the finished certificate (which
/// may or may not meet the tolerance) and, for the interior point route, the
/// grid-admissible kernel of the dual side.
struct PrimalAttempt {
    certificate: DecompositionCertificate,
    dual_hint: Option<HermitianMatrix>,
    iterations: usize,
}

fn primal_attempt(
    problem: &PickProblem,
    scale: f64,
    grid: usize,
    config: &SolverConfig,
) -> Result<PrimalAttempt> {
    let alphas = boundary_grid(grid);
    let weights = weights_for(problem.nodes(), &alphas);
    let target = problem.target_matrix(scale);
    match config.primal_method {
        PrimalMethod::InteriorPoint => {
            let sol = ipm::solve_margin(&weights, &target, config.ipm_max_iters, config.ipm_tol)?;
            let certificate = finish_primal(problem, scale, &alphas, sol.blocks)?;
            let dual_hint = (sol.value < 0.0).then_some(sol.kernel);
            Ok(PrimalAttempt {
                certificate,
                dual_hint,
                iterations: sol.iterations,
            })
        }
        PrimalMethod::Dykstra => {
            let shift = 0.5 * primal_threshold(config, scale) / (problem.len() as f64).sqrt();
            let out = dykstra::decompose(&weights, &target, shift, config.dykstra_max_iters)?;
            let certificate = finish_primal(problem, scale, &alphas, out.blocks)?;
            Ok(PrimalAttempt {
                certificate,
                dual_hint: None,
                iterations: out.iterations,
            })
        }
    }
}

/// Primal feasibility at `scale` on the configured grid and its fourfold refinement, no dual phase.
pub fn primal_certificate(
    problem: &PickProblem,
    scale: f64,
    config: &SolverConfig,
) -> Result<Option<DecompositionCertificate>> {
    check_scale(scale)?;
    for grid in [config.alpha_grid, 4 * config.alpha_grid] {
        let attempt = primal_attempt(problem, scale, grid, config)?;
        if attempt.certificate.residual <= primal_threshold(config, scale) {
            return Ok(Some(attempt.certificate));
        }
    }
    Ok(None)
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Invalid(format!("scale must be positive, got {scale}")));
    }
    Ok(())
}

/// Decides whether the data admit an interpolant of sup norm at most `scale`.
///
/// Runs the primal solver on the boundary grid, then the dual certification,
/// then the penalty-projection dual search; if none succeeds the grid is
/// refined fourfold and the sequence repeats. Instances that only certify at
/// `scale·(1 + rho_tol)` come back feasible with `tie_warning` set.
pub fn solve_feasibility(
    problem: &PickProblem,
    scale: f64,
    config: &SolverConfig,
) -> Result<FeasibilityVerdict> {
    check_scale(scale)?;
    let start = Instant::now();
    let mut iterations = 0;
    let mut best_residual = f64::INFINITY;
    let mut best_violation = 0.0f64;
    for grid in [config.alpha_grid, 4 * config.alpha_grid] {
        let attempt = primal_attempt(problem, scale, grid, config)?;
        iterations += attempt.iterations;
        best_residual = best_residual.min(attempt.certificate.residual);
        if attempt.certificate.residual <= primal_threshold(config, scale) {
            return Ok(FeasibilityVerdict {
                feasible: true,
                primal: Some(attempt.certificate),
                dual: None,
                iterations,
                wall_time: start.elapsed(),
                tie_warning: false,
                alpha_grid_used: grid,
            });
        }
        if let Some(hint) = &attempt.dual_hint {
            if let Some(cert) = certify_dual(problem, scale, hint, config)? {
                return Ok(infeasible(cert, iterations, start, grid));
            }
        }
        let searched = dual::dual_search_from(
            problem,
            scale,
            config,
            config.seed,
            attempt.dual_hint.as_ref(),
        )?;
        iterations += searched.iterations;
        best_violation = best_violation.max(searched.best_violation);
        if let Some(cert) = searched.certificate {
            return Ok(infeasible(cert, iterations, start, grid));
        }
    }

    let nudged = scale * (1.0 + config.rho_tol);
    let attempt = primal_attempt(problem, nudged, 4 * config.alpha_grid, config)?;
    iterations += attempt.iterations;
    if attempt.certificate.residual <= primal_threshold(config, nudged) {
        return Ok(FeasibilityVerdict {
            feasible: true,
            primal: Some(attempt.certificate),
            dual: None,
            iterations,
            wall_time: start.elapsed(),
            tie_warning: true,
            alpha_grid_used: 4 * config.alpha_grid,
        });
    }
    Err(Error::Undecided {
        primal_residual: best_residual,
        dual_violation: best_violation,
    })
}

fn infeasible(cert: DualCertificate, iterations: usize, start: Instant, grid: usize) -> FeasibilityVerdict {
    FeasibilityVerdict {
        feasible: false,
        primal: None,
        dual: Some(cert),
        iterations,
        wall_time: start.elapsed(),
        tie_warning: false,
        alpha_grid_used: grid,
    }
}

/// Outcome of the extremal-norm bisection.
#[derive(Clone, Debug)]
pub struct ExtremalNorm {
    /// Smallest probed scale with a primal certificate.
    pub rho: f64,
    /// Largest probed scale without one.
    pub lower: f64,
    /// Certificate at `rho` itself.
    pub certificate_at_rho: DecompositionCertificate,
    /// Certificate at `rho·(1 + 10·rho_tol)`.
    pub certificate_at_rho_plus: DecompositionCertificate,
    /// Dual kernel at `rho·(1 − 10·rho_tol)`, when the dual phase certifies it.
    pub extremal_kernel: Option<DualCertificate>,
    pub probes: usize,
}

/// `ρ = inf{‖f‖_∞ : f(λᵢ) = wᵢ}` by bisection on primal feasibility.
///
/// The bracket starts at `max|wᵢ|` (always a lower bound, the diagonal Pick
/// entries must be nonnegative) and doubles upwards. The reported `rho` is the
/// upper end of the final bracket, so it always carries a primal certificate.
pub fn extremal_norm(problem: &PickProblem, config: &SolverConfig) -> Result<ExtremalNorm> {
    let wmax = problem.max_target();
    if wmax == 0.0 {
        let cert = finish_primal(problem, 1.0, &boundary_grid(config.alpha_grid), vec![])?;
        return Ok(ExtremalNorm {
            rho: 0.0,
            lower: 0.0,
            certificate_at_rho: cert.clone(),
            certificate_at_rho_plus: cert,
            extremal_kernel: None,
            probes: 0,
        });
    }
    let mut probes = 0;
    let mut probe = |t: f64| -> Result<Option<DecompositionCertificate>> {
        probes += 1;
        primal_certificate(problem, t, config)
    };

    let (mut lo, mut hi, mut hi_cert);
    if let Some(c) = probe(wmax)? {
        lo = wmax;
        hi = wmax;
        hi_cert = c;
    } else {
        lo = wmax;
        hi = 2.0 * wmax;
        let mut doublings = 0;
        loop {
            if let Some(c) = probe(hi)? {
                hi_cert = c;
                break;
            }
            doublings += 1;
            if doublings >= 60 {
                return Err(Error::BracketFailure { upper: hi });
            }
            lo = hi;
            hi *= 2.0;
        }
        while hi - lo > config.rho_tol * hi {
            let mid = 0.5 * (lo + hi);
            match probe(mid)? {
                Some(c) => {
                    hi = mid;
                    hi_cert = c;
                }
                None => lo = mid,
            }
        }
    }

    let rho = hi;
    let eps = 10.0 * config.rho_tol;
    let plus = solve_feasibility(problem, rho * (1.0 + eps), config)?;
    let certificate_at_rho_plus = plus
        .primal
        .ok_or_else(|| Error::Invalid("feasibility failed above a certified scale".into()))?;
    let extremal_kernel = match solve_feasibility(problem, rho * (1.0 - eps), config) {
        Ok(v) => v.dual,
        Err(Error::Undecided { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(ExtremalNorm {
        rho,
        lower: lo,
        certificate_at_rho: hi_cert,
        certificate_at_rho_plus,
        extremal_kernel,
        probes,
    })
}
