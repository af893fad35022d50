//! Norm-preserving extension from finite node sets, subordinate pairs, and
//! von Neumann audits.
//!
//! A strictly positive admissible kernel `δ` on the nodes defines commuting
//! operators `S`, `P` on `span{δ(·, j)}` through `S* δ(·, j) = s̄ⱼ δ(·, j)`,
//! `P* δ(·, j) = p̄ⱼ δ(·, j)`. Every function of the pair is determined by its
//! node values, and `‖f(S, P)‖ ≤ ρ` for any interpolant of sup norm `ρ`.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::kernels::{admissibility_report, random_admissible, KernelMatrix, NodeSet};
use crate::linalg::{eigh, pencil_max, spectral_norm, ComplexMatrix, HermitianMatrix, C64};
use crate::pick::{extremal_norm, DecompositionCertificate, DualCertificate, PickProblem};
use crate::realization::{build_colligation, Colligation, RealizedFunction};

/// Boundary grid of the Γ-contraction check.
pub const GAMMA_GRID: usize = 128;
/// Accepted excess of `‖(2αP − S)(2 − αS)⁻¹‖` over 1.
pub const GAMMA_TOL: f64 = 1e-8;
/// Samples of the sup-norm audit run by [`extend`].
pub const NORM_AUDIT_SAMPLES: usize = 10_000;
/// Trials of the von Neumann audit run by [`extend`].
pub const DEFAULT_AUDIT_TRIALS: usize = 100;

/// Commuting pair on `span{δ(·, j)}`, written in the `δ`-column basis.
#[derive(Clone, Debug)]
pub struct SubordinatePair {
    pub nodes: NodeSet,
    pub delta: KernelMatrix,
    pub s_matrix: ComplexMatrix,
    pub p_matrix: ComplexMatrix,
    /// `max_α ‖(2αP − S)(2 − αS)⁻¹‖` over the check grid.
    pub gamma_norm: f64,
}

/// Operator norm of `x` for the inner product with Gram matrix `g`.
fn weighted_norm(x: &ComplexMatrix, g_half: &ComplexMatrix, g_inv_half: &ComplexMatrix) -> Result<f64> {
    spectral_norm(&(g_half * x * g_inv_half))
}

fn gram_roots(g: &HermitianMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let e = eigh(g)?;
    if e.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eig: e.min() });
    }
    Ok((
        e.reassemble(|l| l.sqrt()).into_matrix(),
        e.reassemble(|l| 1.0 / l.sqrt()).into_matrix(),
    ))
}

/// `max_α ‖(2αP − S)(2 − αS)⁻¹‖` on `points` equispaced boundary values.
pub fn gamma_contraction_norm(pair: &SubordinatePair, points: usize) -> Result<f64> {
    let n = pair.nodes.len();
    let (g_half, g_inv_half) = gram_roots(pair.delta.gram())?;
    let id = ComplexMatrix::identity(n, n);
    let mut worst = 0.0f64;
    for m in 0..points {
        let alpha = C64::from_polar(1.0, m as f64 * TAU / points as f64);
        let num = pair.p_matrix.scale(2.0) * alpha - &pair.s_matrix;
        let den = id.scale(2.0) - &pair.s_matrix * alpha;
        let inv = den
            .try_inverse()
            .ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
        worst = worst.max(weighted_norm(&(num * inv), &g_half, &g_inv_half)?);
    }
    Ok(worst)
}

/// Builds `(S, P)` from a strictly positive admissible kernel and checks the
/// Γ-contraction criterion.
pub fn subordinate_pair(delta: &KernelMatrix) -> Result<SubordinatePair> {
    subordinate_pair_with(delta, 256, 1e-10, 1e-8)
}

pub(crate) fn subordinate_pair_with(
    delta: &KernelMatrix,
    alpha_grid: usize,
    strict_tol: f64,
    slack_tol: f64,
) -> Result<SubordinatePair> {
    let report = admissibility_report(delta, alpha_grid, 1e-10)?;
    if report.min_eig_kernel < strict_tol {
        return Err(Error::NotAdmissible {
            constraint: "kernel_strict".into(),
            value: report.min_eig_kernel,
        });
    }
    if report.diag_deviation > 1e-9 {
        return Err(Error::NotAdmissible {
            constraint: "unit_diagonal".into(),
            value: report.diag_deviation,
        });
    }
    let (label, value) = report.worst_constraint();
    if value < -slack_tol {
        return Err(Error::NotAdmissible {
            constraint: label,
            value,
        });
    }
    let nodes = delta.nodes().clone();
    let g = delta.gram().as_matrix();
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite { min_eig: report.min_eig_kernel })?;
    let n = nodes.len();
    let diag = |f: &dyn Fn(usize) -> C64| ComplexMatrix::from_fn(n, n, |i, j| if i == j { f(i) } else { C64::new(0.0, 0.0) });
    let pts = nodes.points();
    let s_matrix = &g_inv * diag(&|i| pts[i].s()) * g;
    let p_matrix = &g_inv * diag(&|i| pts[i].p()) * g;
    let mut pair = SubordinatePair {
        nodes,
        delta: delta.clone(),
        s_matrix,
        p_matrix,
        gamma_norm: 0.0,
    };
    pair.gamma_norm = gamma_contraction_norm(&pair, GAMMA_GRID)?;
    if pair.gamma_norm > 1.0 + GAMMA_TOL {
        return Err(Error::NotAdmissible {
            constraint: "gamma_contraction".into(),
            value: 1.0 - pair.gamma_norm,
        });
    }
    Ok(pair)
}

/// `‖f(S, P)‖` for the function with node values `values`.
pub fn calculus_norm(pair: &SubordinatePair, values: &[C64]) -> Result<f64> {
    if values.len() != pair.nodes.len() {
        return Err(Error::Dimension(format!(
            "{} values for {} nodes",
            values.len(),
            pair.nodes.len()
        )));
    }
    let ww = HermitianMatrix::outer(values);
    Ok(pencil_max(&ww.schur(pair.delta.gram()), pair.delta.gram())?.max(0.0).sqrt())
}

/// Outcome of a von Neumann audit.
#[derive(Clone, Debug)]
pub struct VonNeumannAudit {
    pub trials: usize,
    /// `max ‖f(S, P)‖ / ρ` over the audited pairs.
    pub max_ratio: f64,
    pub worst_delta: KernelMatrix,
}

#[derive(Clone, Debug)]
pub struct ExtensionResult {
    pub problem: PickProblem,
    pub rho: f64,
    /// Largest probed scale without a primal certificate.
    pub lower: f64,
    pub interpolant: RealizedFunction,
    pub certificate: DecompositionCertificate,
    pub dual: Option<DualCertificate>,
    pub audit: Option<VonNeumannAudit>,
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ (trial as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn ratio(norm: f64, rho: f64) -> f64 {
    if rho > 0.0 {
        norm / rho
    } else if norm == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Draws `trials` random subordinate pairs and compares `‖f(S, P)‖` with `ρ`.
pub fn von_neumann_audit(result: &ExtensionResult, trials: usize, seed: u64) -> Result<VonNeumannAudit> {
    if trials == 0 {
        return Err(Error::Invalid("audit needs at least one trial".into()));
    }
    let nodes = result.problem.nodes();
    let values = result.problem.targets();
    let outcomes: Vec<(f64, KernelMatrix)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let delta = random_admissible(nodes, trial_seed(seed, t), 4)?;
            let pair = subordinate_pair(&delta)?;
            Ok((ratio(calculus_norm(&pair, values)?, result.rho), delta))
        })
        .collect::<Result<_>>()?;
    let (max_ratio, worst_delta) = outcomes
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one trial");
    Ok(VonNeumannAudit {
        trials,
        max_ratio,
        worst_delta,
    })
}

/// `‖f(S, P)‖ / ρ` for the pair of the near-extremal dual kernel, if any.
pub fn extremal_ratio(result: &ExtensionResult) -> Result<Option<f64>> {
    let Some(dual) = &result.dual else {
        return Ok(None);
    };
    let pair = subordinate_pair(&dual.kernel)?;
    Ok(Some(ratio(calculus_norm(&pair, result.problem.targets())?, result.rho)))
}

/// Extremal extension with the default audit sizes.
pub fn extend(nodes: &NodeSet, values: &[C64], config: &SolverConfig) -> Result<ExtensionResult> {
    extend_with(nodes, values, config, DEFAULT_AUDIT_TRIALS, NORM_AUDIT_SAMPLES)
}

/// Computes `ρ`, realizes an interpolant of sup norm `ρ` from the certificate
/// at `ρ`, and runs `audit_trials` von Neumann trials (none if zero).
pub fn extend_with(
    nodes: &NodeSet,
    values: &[C64],
    config: &SolverConfig,
    audit_trials: usize,
    norm_samples: usize,
) -> Result<ExtensionResult> {
    let problem = PickProblem::new(nodes.clone(), values.to_vec())?;
    let norm = extremal_norm(&problem, config)?;
    let colligation = if norm.rho == 0.0 {
        Colligation::constant(C64::new(0.0, 0.0))
    } else {
        build_colligation(&problem, &norm.certificate_at_rho)?
    };
    let mut interpolant = RealizedFunction::new(colligation);
    if norm_samples > 0 {
        interpolant = interpolant.with_audit(norm_samples, config.seed);
    }
    let mut result = ExtensionResult {
        problem,
        rho: norm.rho,
        lower: norm.lower,
        interpolant,
        certificate: norm.certificate_at_rho,
        dual: norm.extremal_kernel,
        audit: None,
    };
    if audit_trials > 0 {
        result.audit = Some(von_neumann_audit(&result, audit_trials, config.seed)?);
    }
    Ok(result)
}

/// `ρ` for the prefixes of length `2..=nodes.len()` of a fixed node sequence.
pub fn nested_extremal_norms(nodes: &NodeSet, values: &[C64], config: &SolverConfig) -> Result<Vec<f64>> {
    if values.len() != nodes.len() {
        return Err(Error::Dimension(format!("{} values for {} nodes", values.len(), nodes.len())));
    }
    (2..=nodes.len())
        .map(|k| {
            let p = PickProblem::new(nodes.prefix(k)?, values[..k].to_vec())?;
            Ok(extremal_norm(&p, config)?.rho)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GPoint;
    use crate::kernels::szego_gram;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag_nodes() -> NodeSet {
        NodeSet::new(vec![
            GPoint::new(c(0.0, 0.0), c(0.0, 0.0)).unwrap(),
            GPoint::new(c(0.6, 0.0), c(0.09, 0.0)).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn single_node_pair() {
        let x = GPoint::new(c(0.3, 0.2), c(0.1, -0.05)).unwrap();
        let nodes = NodeSet::new(vec![x]).unwrap();
        let k = KernelMatrix::new(nodes, HermitianMatrix::identity(1)).unwrap();
        let pair = subordinate_pair(&k).unwrap();
        assert!((pair.s_matrix[(0, 0)] - x.s()).norm() < 1e-15);
        assert!((pair.p_matrix[(0, 0)] - x.p()).norm() < 1e-15);
        assert!(pair.gamma_norm < 1.0);
        assert!((calculus_norm(&pair, &[c(0.4, 0.3)]).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn identity_kernel_gives_diagonal_pair() {
        let nodes = NodeSet::new(vec![
            GPoint::new(c(0.1, 0.0), c(0.0, 0.0)).unwrap(),
            GPoint::new(c(-0.1, 0.05), c(0.01, 0.0)).unwrap(),
        ])
        .unwrap();
        let k = KernelMatrix::new(nodes, HermitianMatrix::identity(2)).unwrap();
        let pair = subordinate_pair(&k).unwrap();
        assert!(pair.s_matrix[(0, 1)].norm() < 1e-15);
        assert!((pair.s_matrix[(1, 1)] - c(-0.1, 0.05)).norm() < 1e-15);
        let norm = calculus_norm(&pair, &[c(0.2, 0.0), c(0.0, -0.7)]).unwrap();
        assert!((norm - 0.7).abs() < 1e-12);
    }

    #[test]
    fn random_kernel_pair_invariants() {
        let nodes = NodeSet::new(crate::geometry::sample_g(3, 4)).unwrap();
        let k = random_admissible(&nodes, 9, 4).unwrap();
        let pair = subordinate_pair(&k).unwrap();
        // S, P commute and have the node eigenvalues
        let comm = &pair.s_matrix * &pair.p_matrix - &pair.p_matrix * &pair.s_matrix;
        assert!(comm.norm() < 1e-10);
        assert!(pair.gamma_norm <= 1.0 + GAMMA_TOL);
        let g = k.gram().as_matrix();
        for j in 0..3 {
            let s_adj = pair.s_matrix.adjoint();
            // S* in the δ-basis is G⁻¹ S^H G for the weighted inner product
            let s_star = g.clone().try_inverse().unwrap() * s_adj * g;
            let col = s_star.column(j).into_owned();
            let mut expect = ComplexMatrix::zeros(3, 1);
            expect[(j, 0)] = nodes.get(j).s().conj();
            assert!((col - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_values_have_norm_modulus() {
        let nodes = NodeSet::new(crate::geometry::sample_g(3, 11)).unwrap();
        let k = crate::kernels::normalize_diag(&szego_gram(&nodes).unwrap()).unwrap();
        let pair = subordinate_pair(&k).unwrap();
        let v = c(0.3, -0.4);
        assert!((calculus_norm(&pair, &[v; 3]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn non_admissible_delta_is_rejected() {
        let nodes = NodeSet::new(vec![
            GPoint::new(c(1.0, 0.0), c(0.25, 0.0)).unwrap_or_else(|_| GPoint::new(c(0.99, 0.0), c(0.245, 0.0)).unwrap()),
            GPoint::new(c(-0.99, 0.0), c(0.245, 0.0)).unwrap(),
        ])
        .unwrap();
        let gram = HermitianMatrix::from_fn(2, |i, j| if i == j { c(1.0, 0.0) } else { c(0.999, 0.0) });
        let k = KernelMatrix::new(nodes, gram).unwrap();
        assert!(matches!(subordinate_pair(&k), Err(Error::NotAdmissible { .. })));
    }

    #[test]
    fn extend_single_node() {
        let x = GPoint::new(c(0.2, 0.0), c(0.01, 0.0)).unwrap();
        let nodes = NodeSet::new(vec![x]).unwrap();
        let r = extend_with(&nodes, &[c(0.0, 0.6)], &SolverConfig::default(), 5, 500).unwrap();
        assert!((r.rho - 0.6).abs() < 1e-12);
        let y = GPoint::new(c(-0.5, 0.1), c(0.05, 0.0)).unwrap();
        let v = crate::realization::evaluate(&r.interpolant, &y).unwrap();
        assert!((v - c(0.0, 0.6)).norm() < 1e-8);
        assert!((r.audit.unwrap().max_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extend_diagonal_extremal() {
        let nodes = diag_nodes();
        let r = extend_with(&nodes, &[c(0.0, 0.0), c(0.3, 0.0)], &SolverConfig::default(), 20, 2000).unwrap();
        assert!((r.rho - 1.0).abs() < 1e-3);
        let (_, sup) = r.interpolant.norm_audit.unwrap();
        assert!(sup <= r.rho * (1.0 + 1e-4));
        assert!(r.audit.as_ref().unwrap().max_ratio <= 1.0 + 1e-6);
        if let Some(er) = extremal_ratio(&r).unwrap() {
            assert!(er >= 1.0 - 1e-2, "{er}");
        }
    }

    #[test]
    fn extend_zero_values() {
        let r = extend_with(&diag_nodes(), &[c(0.0, 0.0); 2], &SolverConfig::default(), 3, 100).unwrap();
        assert_eq!(r.rho, 0.0);
        assert_eq!(r.audit.unwrap().max_ratio, 0.0);
    }
}
