//! Dual side: repair of candidate kernels into verified certificates, and a
//! penalty/projection ascent that searches for such kernels directly.

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::kernels::{
    admissibility_report, normalize_diag, random_admissible, schur_weight, szego_gram, KernelMatrix,
};
use crate::linalg::{eigh, min_eig, psd_project, HermitianMatrix, C64};

use super::{boundary_grid, pick_matrix, DualCertificate, PickProblem};

const REPAIR_ROUNDS: usize = 4;

/// Lower bounds on how much adding `I` raises each admissibility LMI.
struct ShiftGains {
    phi_form: f64,
    four_minus_s: f64,
    one_minus_p: f64,
    mobius: f64,
}

fn shift_gains(problem: &PickProblem) -> ShiftGains {
    let pts = problem.nodes().points();
    let mut g = ShiftGains {
        phi_form: f64::INFINITY,
        four_minus_s: f64::INFINITY,
        one_minus_p: f64::INFINITY,
        mobius: f64::INFINITY,
    };
    for x in pts {
        let sup = 1.0 - x.margin();
        let phi_gain = 1.0 - sup * sup;
        g.phi_form = g.phi_form.min(phi_gain);
        g.four_minus_s = g.four_minus_s.min(4.0 - x.s().norm_sqr());
        g.one_minus_p = g.one_minus_p.min(1.0 - x.p().norm_sqr());
        let d = 2.0 - x.s().norm();
        g.mobius = g.mobius.min(d * d * phi_gain);
    }
    g
}

/// Shifts `candidate` by a multiple of the identity until every LMI holds,
/// rescales to unit diagonal, and measures the Pick violation. The result is
/// returned whether or not it meets the acceptance thresholds.
fn repair(
    problem: &PickProblem,
    scale: f64,
    candidate: &HermitianMatrix,
    config: &SolverConfig,
) -> Result<DualCertificate> {
    let nodes = problem.nodes().clone();
    if candidate.dim() != nodes.len() {
        return Err(Error::Dimension(format!(
            "kernel of size {} for {} nodes",
            candidate.dim(),
            nodes.len()
        )));
    }
    let gains = shift_gains(problem);
    let mut gram = candidate.clone();
    for _ in 0..REPAIR_ROUNDS {
        let k = KernelMatrix::new(nodes.clone(), gram.clone())?;
        let report = admissibility_report(&k, config.admissibility_grid, config.refine_tol)?;
        let size = gram.diagonal().iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut tau = 0.0f64;
        tau = tau.max(-report.min_eig_overall / gains.phi_form);
        tau = tau.max((2.0 * config.strict_tol * size - report.min_eig_kernel).max(0.0));
        for (label, v) in &report.per_constraint {
            let gain = match label.as_str() {
                "four_minus_s" => gains.four_minus_s,
                "one_minus_p" => gains.one_minus_p,
                _ => gains.mobius,
            };
            tau = tau.max(-v / gain);
        }
        if tau <= 0.0 {
            break;
        }
        gram = gram.add(&HermitianMatrix::identity(nodes.len()).scale(tau * (1.0 + 1e-9)));
    }
    let kernel = normalize_diag(&KernelMatrix::new(nodes, gram)?)?;
    let report = admissibility_report(&kernel, config.admissibility_grid, config.refine_tol)?;
    let (lmin, witness) = min_eig(&pick_matrix(problem, &kernel, scale)?)?;
    Ok(DualCertificate {
        admissibility_slack: report.worst_slack().min(report.min_eig_kernel),
        violation: -lmin,
        witness,
        kernel,
        scale,
    })
}

fn accepted(cert: &DualCertificate, config: &SolverConfig) -> Result<bool> {
    let lmin_k = eigh(cert.kernel.gram())?.min();
    Ok(cert.violation >= config.dual_tol
        && cert.admissibility_slack >= -config.slack_tol
        && lmin_k >= config.strict_tol)
}

/// Turns a candidate kernel into a verified dual certificate at `scale`, or
/// `None` if the repaired kernel does not separate.
pub fn certify_dual(
    problem: &PickProblem,
    scale: f64,
    candidate: &HermitianMatrix,
    config: &SolverConfig,
) -> Result<Option<DualCertificate>> {
    let cert = repair(problem, scale, candidate, config)?;
    Ok(accepted(&cert, config)?.then_some(cert))
}

pub(crate) struct DualSearchOutcome {
    pub certificate: Option<DualCertificate>,
    pub best_violation: f64,
    pub iterations: usize,
}

/// Projected ascent for an admissible kernel with an indefinite Pick matrix.
///
/// Minimizes `λ_min(T ∘ k) + ρ Σ_α ‖neg(E_α ∘ k)‖²` over unit-diagonal PSD
/// kernels, increasing `ρ` as it goes, and tries to certify the iterate every
/// few steps.
pub fn dual_search(
    problem: &PickProblem,
    scale: f64,
    config: &SolverConfig,
    seed: u64,
) -> Result<Option<DualCertificate>> {
    Ok(dual_search_from(problem, scale, config, seed, None)?.certificate)
}

fn unit_diagonal(m: &HermitianMatrix) -> HermitianMatrix {
    let n = m.dim();
    HermitianMatrix::from_fn(n, |i, j| if i == j { C64::new(1.0, 0.0) } else { m.get(i, j) })
}

fn project_feasible(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let mut k = m.clone();
    for _ in 0..5 {
        k = unit_diagonal(&psd_project(&k)?);
    }
    Ok(k)
}

pub(crate) fn dual_search_from(
    problem: &PickProblem,
    scale: f64,
    config: &SolverConfig,
    seed: u64,
    warm: Option<&HermitianMatrix>,
) -> Result<DualSearchOutcome> {
    let nodes = problem.nodes();
    let n = nodes.len();
    let target = problem.target_matrix(scale);
    let t_max = target.as_matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut outcome = DualSearchOutcome {
        certificate: None,
        best_violation: 0.0,
        iterations: 0,
    };
    if t_max == 0.0 {
        return Ok(outcome);
    }
    let t_norm = target.scale(1.0 / t_max);
    let t_conj = t_norm.conj();
    let weights: Vec<HermitianMatrix> = boundary_grid(config.alpha_grid)
        .into_iter()
        .map(|a| schur_weight(a, nodes))
        .collect();

    let mut starts = Vec::new();
    if let Some(w) = warm {
        let d = w.diagonal();
        if d.iter().all(|&v| v > 0.0) {
            starts.push(normalize_diag(&KernelMatrix::new(nodes.clone(), w.clone())?)?.gram().clone());
        }
    }
    starts.push(normalize_diag(&szego_gram(nodes)?)?.gram().clone());
    starts.push(random_admissible(nodes, seed, 4)?.gram().clone());

    let per_start = (config.dual_search_iters / starts.len()).max(50);
    let step = 0.05;
    for start in starts {
        let mut k = start;
        let mut rho = 1.0;
        for it in 0..per_start {
            outcome.iterations += 1;
            if it % 25 == 0 || it + 1 == per_start {
                let cert = repair(problem, scale, &k, config)?;
                outcome.best_violation = outcome.best_violation.max(cert.violation);
                if accepted(&cert, config)? {
                    outcome.certificate = Some(cert);
                    return Ok(outcome);
                }
            }
            if it > 0 && it % 50 == 0 {
                rho *= 2.0;
            }
            let e = eigh(&t_norm.schur(&k))?;
            let v = e.vector(0);
            let mut grad = t_conj.schur(&HermitianMatrix::outer(&v));
            for w in &weights {
                let ew = eigh(&w.schur(&k))?;
                if ew.min() < 0.0 {
                    let neg = ew.reassemble(|l| l.min(0.0));
                    grad = grad.axpy(2.0 * rho, &w.conj().schur(&neg));
                }
            }
            let gnorm = grad.frobenius_norm();
            if gnorm == 0.0 {
                break;
            }
            k = project_feasible(&k.axpy(-step * (n as f64).sqrt() / gnorm, &grad))?;
        }
    }
    Ok(outcome)
}
