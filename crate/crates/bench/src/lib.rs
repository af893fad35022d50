//! Fixed inputs shared by the benchmarks.

use gamma_pick::geometry::sample_g;
use gamma_pick::{HermitianMatrix, NodeSet, PickProblem, C64};

/// Pseudo-random Hermitian matrix with a deterministic entry pattern.
pub fn hermitian(dim: usize) -> HermitianMatrix {
    HermitianMatrix::from_fn(dim, |i, j| {
        let x = ((i * 31 + j * 17) % 23) as f64 / 23.0 - 0.5;
        let y = ((i * 7 + j * 13) % 19) as f64 / 19.0 - 0.5;
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => C64::new(x, 0.0),
            std::cmp::Ordering::Less => C64::new(x, y),
            std::cmp::Ordering::Greater => C64::new(x, -y),
        }
    })
}

pub fn nodes(n: usize, seed: u64) -> NodeSet {
    NodeSet::new(sample_g(n, seed)).expect("distinct sample points")
}

/// `n` sampled nodes with targets of modulus below 0.6.
pub fn problem(n: usize, seed: u64) -> PickProblem {
    let targets = (0..n)
        .map(|k| C64::from_polar(0.6 * (k as f64 + 1.0) / n as f64, 1.3 * k as f64))
        .collect();
    PickProblem::new(nodes(n, seed), targets).expect("matching lengths")
}
