//! Kernels on the symmetrized bidisk and the admissibility cone over a
//! finite node set.
//!
//! A Hermitian matrix `k` over nodes `λ₁..λₙ` is admissible when
//! `C(α) ∘ k ⪰ 0` for every `|α| ≤ 1`, where
//! `C(α)(i, j) = 1 − φ(α, λᵢ) conj(φ(α, λⱼ))`. For a fixed coefficient vector
//! the quadratic form of `C(α) ∘ k` is superharmonic in `α`, so the check runs
//! over the unit circle only.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{disk_sample, golden_min, symmetrize, GPoint};
use crate::linalg::{eigh, min_eig, HermitianMatrix, C64};

/// Minimum max-coordinate distance between two nodes.
pub const NODE_SEPARATION: f64 = 1e-9;

/// Default number of boundary points in the admissibility sweep.
pub const DEFAULT_ALPHA_GRID: usize = 256;

/// Default lower bound on `λ_min` for strict positivity.
pub const DEFAULT_STRICT_TOL: f64 = 1e-10;

/// Pairwise distinct nodes in `G`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet {
    points: Vec<GPoint>,
}

impl NodeSet {
    pub fn new(points: Vec<GPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("node set is empty".into()));
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let d = points[i].distance(&points[j]);
                if d <= NODE_SEPARATION {
                    return Err(Error::Invalid(format!(
                        "nodes {i} and {j} coincide (distance {d:e})"
                    )));
                }
            }
        }
        Ok(NodeSet { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[GPoint] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &GPoint {
        &self.points[i]
    }

    /// The vector `(φ(α, λ₁), …, φ(α, λₙ))`.
    pub fn phi_vector(&self, alpha: C64) -> Vec<C64> {
        self.points.iter().map(|x| x.phi(alpha)).collect()
    }

    /// First `len` nodes.
    pub fn prefix(&self, len: usize) -> Result<NodeSet> {
        NodeSet::new(self.points[..len.min(self.points.len())].to_vec())
    }
}

/// A Hermitian matrix of kernel values over a node set.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    nodes: NodeSet,
    gram: HermitianMatrix,
}

impl KernelMatrix {
    pub fn new(nodes: NodeSet, gram: HermitianMatrix) -> Result<Self> {
        if gram.dim() != nodes.len() {
            return Err(Error::Dimension(format!(
                "{} nodes but a {}x{} gram",
                nodes.len(),
                gram.dim(),
                gram.dim()
            )));
        }
        Ok(KernelMatrix { nodes, gram })
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn gram(&self) -> &HermitianMatrix {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn into_parts(self) -> (NodeSet, HermitianMatrix) {
        (self.nodes, self.gram)
    }
}

/// Result of sweeping the admissibility LMIs of a kernel matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// `min_α λ_min(C(α) ∘ k)` over the boundary grid with refinement.
    pub min_eig_overall: f64,
    /// Where the minimum was found (on the unit circle).
    pub worst_alpha: C64,
    /// `λ_min` of the auxiliary LMIs: `(4 − sᵢs̄ⱼ)∘k`, `(1 − pᵢp̄ⱼ)∘k`, and the
    /// `(2 − αs)` form sampled on a coarse α grid.
    pub per_constraint: Vec<(String, f64)>,
    /// `λ_min(k)` itself.
    pub min_eig_kernel: f64,
    /// `max_i |k(i, i) − 1|`.
    pub diag_deviation: f64,
}

impl AdmissibilityReport {
    /// The most negative value among all reported LMIs.
    pub fn worst_slack(&self) -> f64 {
        self.per_constraint
            .iter()
            .map(|(_, v)| *v)
            .fold(self.min_eig_overall.min(self.min_eig_kernel), f64::min)
    }

    pub fn is_admissible(&self, tol: f64) -> bool {
        self.worst_slack() >= -tol
    }

    /// Membership in `K_λ`: admissible, strictly positive, unit diagonal.
    pub fn in_k_lambda(&self, strict_tol: f64, slack_tol: f64) -> bool {
        self.is_admissible(slack_tol) && self.min_eig_kernel >= strict_tol && self.diag_deviation <= 1e-9
    }

    /// Label and value of the most violated constraint.
    pub fn worst_constraint(&self) -> (String, f64) {
        let mut worst = ("phi_form".to_string(), self.min_eig_overall);
        if self.min_eig_kernel < worst.1 {
            worst = ("kernel_psd".to_string(), self.min_eig_kernel);
        }
        for (label, v) in &self.per_constraint {
            if *v < worst.1 {
                worst = (label.clone(), *v);
            }
        }
        worst
    }
}

/// Szegő kernel of `G` from raw coordinates.
pub fn szego_raw(s1: C64, p1: C64, s2: C64, p2: C64) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    let a = one - p1 * p2.conj();
    let den = a * a - (s1 - s2.conj() * p1) * (s2.conj() - s1 * p2.conj());
    if den.norm() < 1e-300 || !den.re.is_finite() {
        return Err(Error::Domain(format!(
            "Szegő denominator vanishes at ({s1}, {p1}), ({s2}, {p2})"
        )));
    }
    Ok(one / den)
}

/// `k_S((s₁,p₁),(s₂,p₂)) = 1/((1 − p₁p̄₂)² − (s₁ − s̄₂p₁)(s̄₂ − s₁p̄₂))`.
pub fn szego(x: &GPoint, y: &GPoint) -> Result<C64> {
    szego_raw(x.s(), x.p(), y.s(), y.p())
}

/// Kernel of the antisymmetric Hardy space of the bidisk:
/// `(z₁ − z₂)·conj(w₁ − w₂) / (2 ∏ᵢⱼ (1 − zᵢw̄ⱼ))`.
pub fn antisym_kernel(z: (C64, C64), w: (C64, C64)) -> C64 {
    let one = C64::new(1.0, 0.0);
    let den = 2.0
        * (one - z.0 * w.0.conj())
        * (one - z.0 * w.1.conj())
        * (one - z.1 * w.0.conj())
        * (one - z.1 * w.1.conj());
    (z.0 - z.1) * (w.0 - w.1).conj() / den
}

/// `B_α(x, y) = 1/(1 − φ(α, x) conj(φ(α, y)))`.
pub fn b_alpha(alpha: C64, x: &GPoint, y: &GPoint) -> C64 {
    let one = C64::new(1.0, 0.0);
    one / (one - x.phi(alpha) * y.phi(alpha).conj())
}

pub fn szego_gram(nodes: &NodeSet) -> Result<KernelMatrix> {
    let pts = nodes.points();
    let mut err = None;
    let gram = HermitianMatrix::from_fn(nodes.len(), |i, j| match szego(&pts[i], &pts[j]) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            C64::new(0.0, 0.0)
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    KernelMatrix::new(nodes.clone(), gram)
}

pub fn b_alpha_gram(alpha: C64, nodes: &NodeSet) -> HermitianMatrix {
    let pts = nodes.points();
    HermitianMatrix::from_fn(nodes.len(), |i, j| b_alpha(alpha, &pts[i], &pts[j]))
}

/// The Schur weight `C(α)(i, j) = 1 − φ(α, λᵢ) conj(φ(α, λⱼ))`.
pub fn schur_weight(alpha: C64, nodes: &NodeSet) -> HermitianMatrix {
    let f = nodes.phi_vector(alpha);
    HermitianMatrix::from_fn(nodes.len(), |i, j| C64::new(1.0, 0.0) - f[i] * f[j].conj())
}

/// `λ_min(C(α) ∘ k)` at a single α.
pub fn weighted_min_eig(alpha: C64, k: &KernelMatrix) -> Result<f64> {
    Ok(eigh(&schur_weight(alpha, k.nodes()).schur(k.gram()))?.min())
}

/// Sweeps the admissibility LMIs of `k`.
///
/// The φ-form is evaluated on `alpha_grid` equispaced boundary points and the
/// worst one is refined by golden section to `refine_tol` in `arg α`. The
/// sweep is a parallel map with an ordered reduction, so results do not depend
/// on thread count.
pub fn admissibility_report(
    k: &KernelMatrix,
    alpha_grid: usize,
    refine_tol: f64,
) -> Result<AdmissibilityReport> {
    if alpha_grid < 8 {
        return Err(Error::Invalid(format!(
            "alpha grid must have at least 8 points, got {alpha_grid}"
        )));
    }
    let step = TAU / alpha_grid as f64;
    let samples: Vec<f64> = (0..alpha_grid)
        .into_par_iter()
        .map(|m| weighted_min_eig(C64::from_polar(1.0, m as f64 * step), k))
        .collect::<Result<_>>()?;
    let (best_m, _) = samples
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (m, &v)| if v < acc.1 { (m, v) } else { acc });
    let center = best_m as f64 * step;
    let objective = |t: f64| {
        weighted_min_eig(C64::from_polar(1.0, t), k).unwrap_or(f64::NEG_INFINITY)
    };
    let (theta, refined) = golden_min(objective, center - step, center + step, refine_tol);
    let min_eig_overall = refined.min(samples[best_m]);
    let worst_alpha = if refined <= samples[best_m] {
        C64::from_polar(1.0, theta.rem_euclid(TAU))
    } else {
        C64::from_polar(1.0, center)
    };

    let pts = k.nodes().points();
    let n = k.dim();
    let four_minus_s = HermitianMatrix::from_fn(n, |i, j| {
        C64::new(4.0, 0.0) - pts[i].s() * pts[j].s().conj()
    });
    let one_minus_p = HermitianMatrix::from_fn(n, |i, j| {
        C64::new(1.0, 0.0) - pts[i].p() * pts[j].p().conj()
    });
    let lmi_s = eigh(&four_minus_s.schur(k.gram()))?.min();
    let lmi_p = eigh(&one_minus_p.schur(k.gram()))?.min();

    // (2 − αs) form: a diagonal congruence of the φ-form, cross-checked at
    // a coarse sample of α.
    let mut lmi_mobius = f64::INFINITY;
    for m in 0..16 {
        let alpha = C64::from_polar(1.0, m as f64 * TAU / 16.0);
        let w = HermitianMatrix::from_fn(n, |i, j| {
            let di = 2.0 - alpha * pts[i].s();
            let dj = 2.0 - alpha * pts[j].s();
            let ni = 2.0 * alpha * pts[i].p() - pts[i].s();
            let nj = 2.0 * alpha * pts[j].p() - pts[j].s();
            di * dj.conj() - ni * nj.conj()
        });
        lmi_mobius = lmi_mobius.min(eigh(&w.schur(k.gram()))?.min());
    }

    let min_eig_kernel = eigh(k.gram())?.min();
    let diag_deviation = k
        .gram()
        .diagonal()
        .iter()
        .map(|d| (d - 1.0).abs())
        .fold(0.0, f64::max);

    Ok(AdmissibilityReport {
        min_eig_overall,
        worst_alpha,
        per_constraint: vec![
            ("four_minus_s".to_string(), lmi_s),
            ("one_minus_p".to_string(), lmi_p),
            ("mobius_form_sampled".to_string(), lmi_mobius),
        ],
        min_eig_kernel,
        diag_deviation,
    })
}

/// Rescales to unit diagonal: `k(i, j) / sqrt(k(i, i) k(j, j))`.
pub fn normalize_diag(k: &KernelMatrix) -> Result<KernelMatrix> {
    let diag = k.gram().diagonal();
    if let Some((index, &value)) = diag.iter().enumerate().find(|(_, &d)| !(d > 0.0)) {
        return Err(Error::NonPositiveDiagonal { index, value });
    }
    let d: Vec<f64> = diag.iter().map(|v| 1.0 / v.sqrt()).collect();
    let gram = HermitianMatrix::from_fn(k.dim(), |i, j| {
        if i == j {
            C64::new(1.0, 0.0)
        } else {
            k.gram().get(i, j) * (d[i] * d[j])
        }
    });
    KernelMatrix::new(k.nodes().clone(), gram)
}

/// Image of `(s, p)` under the automorphism `π(z₁, z₂) ↦ π(m(z₁), m(z₂))`
/// with `m(z) = e^{iθ}(z − a)/(1 − āz)`.
fn automorphism(s: C64, p: C64, a: C64, rotation: C64) -> (C64, C64) {
    let disc = (s * s - 4.0 * p).sqrt();
    let z1 = (s + disc) * 0.5;
    let z2 = (s - disc) * 0.5;
    let m = |z: C64| rotation * (z - a) / (1.0 - a.conj() * z);
    symmetrize(m(z1), m(z2))
}

fn random_unit_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.gen::<f64>() * TAU)
}

fn gaussian_complex<R: Rng>(rng: &mut R) -> C64 {
    // Box–Muller
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    C64::from_polar(r, TAU * u2) * std::f64::consts::FRAC_1_SQRT_2
}

/// Pseudo-random strictly positive member of `K_λ`.
///
/// Sums `mix` Szegő grams pulled back through random automorphisms of `G`,
/// each Schur-multiplied by a random rank-one PSD matrix `v vᵐ*`, plus a small
/// multiple of the plain Szegő gram, then rescales to unit diagonal. Every
/// term is admissible (automorphisms preserve the cone, Schur products with
/// PSD matrices preserve each LMI), so the sum is.
pub fn random_admissible(nodes: &NodeSet, seed: u64, mix: usize) -> Result<KernelMatrix> {
    if mix == 0 {
        return Err(Error::Invalid("mix must be at least 1".into()));
    }
    const ATTEMPTS: usize = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = nodes.len();
    let base = normalize_diag(&szego_gram(nodes)?)?;
    for _ in 0..ATTEMPTS {
        let mut acc = HermitianMatrix::zeros(n);
        for _ in 0..mix {
            let a = disk_sample(&mut rng) * 0.9;
            let rot = random_unit_complex(&mut rng);
            let mapped: Vec<(C64, C64)> = nodes
                .points()
                .iter()
                .map(|x| automorphism(x.s(), x.p(), a, rot))
                .collect();
            let mut bad = false;
            let pulled = HermitianMatrix::from_fn(n, |i, j| {
                szego_raw(mapped[i].0, mapped[i].1, mapped[j].0, mapped[j].1).unwrap_or_else(|_| {
                    bad = true;
                    C64::new(0.0, 0.0)
                })
            });
            if bad {
                continue;
            }
            let v: Vec<C64> = (0..n).map(|_| gaussian_complex(&mut rng)).collect();
            acc = acc.add(&pulled.schur(&HermitianMatrix::outer(&v)));
        }
        let mean_diag = acc.diagonal().iter().sum::<f64>() / n as f64;
        let weight = 1e-3 * mean_diag.max(1e-12);
        let gram = acc.axpy(weight, base.gram());
        let candidate = normalize_diag(&KernelMatrix::new(nodes.clone(), gram)?)?;
        let (lmin, _) = min_eig(candidate.gram())?;
        if lmin >= 1e-12 {
            return Ok(candidate);
        }
    }
    Err(Error::DegenerateDraw { attempts: ATTEMPTS })
}
