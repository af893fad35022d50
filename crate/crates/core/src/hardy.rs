//! Hardy-space cross-checks: the Szegő/antisymmetric kernel identity and the
//! admissibility of the Szegő kernel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{disk_sample, sample_g, symmetrize};
use crate::kernels::{admissibility_report, antisym_kernel, normalize_diag, szego_raw, szego_gram, NodeSet};
use crate::linalg::{eigh, C64};

/// Below this magnitude the identity error is measured absolutely.
pub const ABSOLUTE_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyCheckReport {
    pub samples: usize,
    /// Worst relative error of `antisym = ½ J J̄ (szegő ∘ π)`.
    pub max_identity_error: Option<f64>,
    /// Worst admissibility LMI eigenvalue of the normalized Szegő grams.
    pub admissibility_min_eig: Option<f64>,
    /// Smallest `λ_min` of the normalized Szegő grams.
    pub szego_min_eig: Option<f64>,
    pub node_set_sizes: Vec<usize>,
}

impl HardyCheckReport {
    pub fn passes(&self) -> bool {
        self.max_identity_error.is_none_or(|e| e <= 1e-10)
            && self.admissibility_min_eig.is_none_or(|e| e >= -1e-9)
            && self.szego_min_eig.is_none_or(|e| e > 0.0)
    }

    /// Combines two reports covering different checks.
    pub fn merge(self, other: HardyCheckReport) -> HardyCheckReport {
        let pick = |a: Option<f64>, b: Option<f64>, worse: fn(f64, f64) -> f64| match (a, b) {
            (Some(x), Some(y)) => Some(worse(x, y)),
            (x, None) => x,
            (None, y) => y,
        };
        let mut sizes = self.node_set_sizes;
        sizes.extend(other.node_set_sizes);
        HardyCheckReport {
            samples: self.samples + other.samples,
            max_identity_error: pick(self.max_identity_error, other.max_identity_error, f64::max),
            admissibility_min_eig: pick(self.admissibility_min_eig, other.admissibility_min_eig, f64::min),
            szego_min_eig: pick(self.szego_min_eig, other.szego_min_eig, f64::min),
            node_set_sizes: sizes,
        }
    }
}

/// Left and right sides of the kernel identity at `(z, w) ∈ D² × D²`.
pub fn identity_sides(z: (C64, C64), w: (C64, C64)) -> Result<(C64, C64)> {
    let lhs = antisym_kernel(z, w);
    let (s1, p1) = symmetrize(z.0, z.1);
    let (s2, p2) = symmetrize(w.0, w.1);
    let j = (z.0 - z.1) * (w.0 - w.1).conj();
    let rhs = 0.5 * j * szego_raw(s1, p1, s2, p2)?;
    Ok((lhs, rhs))
}

fn identity_error(z: (C64, C64), w: (C64, C64)) -> Result<f64> {
    let (lhs, rhs) = identity_sides(z, w)?;
    let gap = (lhs - rhs).norm();
    let size = lhs.norm().max(rhs.norm());
    Ok(if size < ABSOLUTE_FLOOR { gap } else { gap / size })
}

/// Sweeps the kernel identity over `samples` seeded pairs of bidisk points.
///
/// Every fourth pair has `z₁ = z₂` and every fourth a near-diagonal `z` with
/// `|z₁ − z₂| ≈ 1e−9`.
pub fn kernel_identity_check(samples: usize, seed: u64) -> Result<HardyCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<((C64, C64), (C64, C64))> = (0..samples.max(1))
        .map(|k| {
            let z1 = disk_sample(&mut rng);
            let mut z2 = disk_sample(&mut rng);
            let w1 = disk_sample(&mut rng);
            let w2 = disk_sample(&mut rng);
            match k % 4 {
                1 => z2 = z1,
                3 => {
                    let nudge = C64::from_polar(1e-9, rng.gen::<f64>() * std::f64::consts::TAU);
                    z2 = if (z1 + nudge).norm() < 1.0 { z1 + nudge } else { z1 - nudge };
                }
                _ => {}
            }
            ((z1, z2), (w1, w2))
        })
        .collect();
    let errors: Vec<f64> = pairs
        .par_iter()
        .map(|&(z, w)| identity_error(z, w))
        .collect::<Result<_>>()?;
    Ok(HardyCheckReport {
        samples: pairs.len(),
        max_identity_error: Some(errors.into_iter().fold(0.0, f64::max)),
        admissibility_min_eig: None,
        szego_min_eig: None,
        node_set_sizes: vec![],
    })
}

/// Checks admissibility of the normalized Szegő gram on `node_sets` random
/// node sets of sizes `1..=max_n` over a 256-point boundary grid.
pub fn szego_admissibility_check(node_sets: usize, max_n: usize, seed: u64) -> Result<HardyCheckReport> {
    let max_n = max_n.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(usize, u64)> = (0..node_sets)
        .map(|_| (rng.gen_range(1..=max_n), rng.gen()))
        .collect();
    let results: Vec<(f64, f64)> = draws
        .par_iter()
        .map(|&(n, s)| {
            let nodes = NodeSet::new(sample_g(n, s))?;
            let k = normalize_diag(&szego_gram(&nodes)?)?;
            let report = admissibility_report(&k, 256, 1e-10)?;
            Ok((report.worst_slack(), eigh(k.gram())?.min()))
        })
        .collect::<Result<_>>()?;
    Ok(HardyCheckReport {
        samples: 0,
        max_identity_error: None,
        admissibility_min_eig: Some(results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min)),
        szego_min_eig: Some(results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min)),
        node_set_sizes: draws.iter().map(|d| d.0).collect(),
    })
}

/// Both checks with one seed.
pub fn hardy_check(samples: usize, node_sets: usize, max_n: usize, seed: u64) -> Result<HardyCheckReport> {
    Ok(kernel_identity_check(samples, seed)?.merge(szego_admissibility_check(node_sets, max_n, seed)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn spot_value() {
        let z = (c(0.5, 0.0), c(0.0, 0.0));
        let (lhs, rhs) = identity_sides(z, z).unwrap();
        assert!((lhs - c(1.0 / 6.0, 0.0)).norm() < 1e-15);
        assert!((rhs - c(1.0 / 6.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_points_vanish() {
        let z = (c(0.3, 0.1), c(0.3, 0.1));
        let w = (c(-0.2, 0.4), c(0.1, 0.0));
        let (lhs, rhs) = identity_sides(z, w).unwrap();
        assert_eq!(lhs.norm(), 0.0);
        assert_eq!(rhs.norm(), 0.0);
    }

    #[test]
    fn identity_sweep() {
        let r = kernel_identity_check(2000, 3).unwrap();
        assert!(r.max_identity_error.unwrap() <= 1e-10, "{:?}", r);
    }

    #[test]
    fn szego_sweep() {
        let r = szego_admissibility_check(10, 4, 1).unwrap();
        assert!(r.passes(), "{r:?}");
        assert_eq!(r.node_set_sizes.len(), 10);
    }
}
