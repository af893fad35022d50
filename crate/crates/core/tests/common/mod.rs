#![allow(dead_code)]

use gamma_pick::geometry::sample_g;
use gamma_pick::{GPoint, NodeSet, PickProblem, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `n` nodes from `sample_g` and targets with `|w| ≤ wmax`.
pub fn random_problem(n: usize, seed: u64, wmax: f64) -> PickProblem {
    let nodes = NodeSet::new(sample_g(n, seed)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5_5A5A);
    let targets = (0..n)
        .map(|_| C64::from_polar(wmax * rng.gen::<f64>(), rng.gen::<f64>() * std::f64::consts::TAU))
        .collect();
    PickProblem::new(nodes, targets).unwrap()
}

/// Nodes `π(zᵢ, zᵢ)` on the diagonal.
pub fn diagonal_problem(zs: &[C64], ws: &[C64]) -> PickProblem {
    let nodes = NodeSet::new(zs.iter().map(|&z| GPoint::from_pair(z, z).unwrap()).collect()).unwrap();
    PickProblem::new(nodes, ws.to_vec()).unwrap()
}

pub fn schwarz_problem(w: f64) -> PickProblem {
    diagonal_problem(&[c(0.0, 0.0), c(0.3, 0.0)], &[c(0.0, 0.0), c(w, 0.0)])
}

/// Two-point Pick condition on the unit disk for data `aᵢ = wᵢ/t` at `zᵢ`.
fn disk_two_point_ok(z: [C64; 2], w: [C64; 2], t: f64) -> bool {
    let a = [w[0] / t, w[1] / t];
    let entry = |i: usize, j: usize| (c(1.0, 0.0) - a[i] * a[j].conj()) / (c(1.0, 0.0) - z[i] * z[j].conj());
    let d0 = entry(0, 0).re;
    let d1 = entry(1, 1).re;
    let det = d0 * d1 - entry(0, 1).norm_sqr();
    d0 >= 0.0 && d1 >= 0.0 && det >= 0.0
}

/// Minimal sup norm of a disk function with `f(zᵢ) = wᵢ`, by bisection on the
/// classical two-point Pick condition.
pub fn disk_extremal(z: [C64; 2], w: [C64; 2]) -> f64 {
    let mut lo = w[0].norm().max(w[1].norm());
    if disk_two_point_ok(z, w, lo) {
        return lo;
    }
    let mut hi = 2.0 * lo.max(1e-300);
    while !disk_two_point_ok(z, w, hi) {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if disk_two_point_ok(z, w, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
