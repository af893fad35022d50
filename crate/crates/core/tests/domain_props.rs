mod common;

use common::c;
use gamma_pick::geometry::{is_member, phi, sample_g, sup_phi, symmetrize};
use gamma_pick::hardy::identity_sides;
use gamma_pick::kernels::{
    admissibility_report, normalize_diag, random_admissible, szego, szego_gram, weighted_min_eig,
};
use gamma_pick::linalg::eigh;
use gamma_pick::{GPoint, HermitianMatrix, KernelMatrix, NodeSet, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn disk(max_r: f64) -> impl Strategy<Value = C64> {
    (0.0f64..1.0, 0.0f64..TAU).prop_map(move |(u, t)| C64::from_polar(max_r * u.sqrt(), t))
}

/// `max |φ|` over a 512 × 64 polar grid of `α` whose outer ring is the unit circle.
fn brute_sup(s: C64, p: C64) -> f64 {
    let mut best = 0.0f64;
    for a in 0..512 {
        for r in 0..64 {
            let alpha = C64::from_polar((r as f64 + 1.0) / 64.0, a as f64 * TAU / 512.0);
            best = best.max(((2.0 * alpha * p - s) / (2.0 - alpha * s)).norm());
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diagonal_points_have_sup_equal_to_modulus(z in disk(0.999)) {
        let (s, p) = symmetrize(z, z);
        let sp = sup_phi(s, p, 1e-10).unwrap();
        prop_assert!((sp.sup - z.norm()).abs() <= 1e-9, "{} vs {}", sp.sup, z.norm());
    }

    #[test]
    fn phi_ignores_preimage_order(z1 in disk(0.99), z2 in disk(0.99), alpha in disk(1.0)) {
        let (s, p) = symmetrize(z1, z2);
        let (s2, p2) = symmetrize(z2, z1);
        prop_assert_eq!((s, p), (s2, p2));
        let a = phi(alpha, s, p).unwrap();
        prop_assert!(a.norm() < 1.0);
        let m = is_member(s, p);
        prop_assert!(m.member && m.margin > 0.0);
        prop_assert!(s.norm() < 2.0 && p.norm() < 1.0);
    }

    #[test]
    fn symmetrized_points_outside_are_rejected(r1 in 1.001f64..3.0, r2 in 1.001f64..3.0, t1 in 0.0f64..TAU, t2 in 0.0f64..TAU) {
        let (s, p) = symmetrize(C64::from_polar(r1, t1), C64::from_polar(r2, t2));
        prop_assert!(!is_member(s, p).member);
    }

    #[test]
    fn szego_is_hermitian(a in 0u64..1000) {
        let pts = sample_g(2, a);
        let k12 = szego(&pts[0], &pts[1]).unwrap();
        let k21 = szego(&pts[1], &pts[0]).unwrap();
        prop_assert!((k12 - k21.conj()).norm() <= 1e-13 * k12.norm().max(1.0));
    }

    #[test]
    fn admissibility_survives_diagonal_congruence(seed in 0u64..10_000, n in 1usize..=4) {
        let nodes = NodeSet::new(sample_g(n, seed)).unwrap();
        let k = random_admissible(&nodes, seed, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
        let d: Vec<C64> = (0..n).map(|_| C64::from_polar(0.1 + 5.0 * rng.gen::<f64>(), TAU * rng.gen::<f64>())).collect();
        let scaled = HermitianMatrix::from_fn(n, |i, j| d[i] * d[j].conj() * k.gram().get(i, j));
        let back = normalize_diag(&KernelMatrix::new(nodes, scaled).unwrap()).unwrap();
        let before = admissibility_report(&k, 64, 1e-10).unwrap();
        let after = admissibility_report(&back, 64, 1e-10).unwrap();
        prop_assert!(before.min_eig_overall >= -1e-9);
        prop_assert!(after.min_eig_overall >= -1e-9);
    }

    #[test]
    fn auxiliary_constraints_follow_phi_form(seed in 0u64..10_000, n in 1usize..=5) {
        let nodes = NodeSet::new(sample_g(n, seed)).unwrap();
        let k = random_admissible(&nodes, seed.wrapping_mul(31), 4).unwrap();
        let report = admissibility_report(&k, 256, 1e-10).unwrap();
        prop_assert!(report.min_eig_overall >= -1e-9);
        prop_assert!((report.worst_alpha.norm() - 1.0).abs() < 1e-12);
        for (label, value) in &report.per_constraint {
            prop_assert!(*value >= -1e-9, "{label}: {value}");
        }
    }

    #[test]
    fn boundary_minimum_bounds_interior(seed in 0u64..10_000, n in 1usize..=4) {
        let nodes = NodeSet::new(sample_g(n, seed)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<C64> = (0..n * n).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let a = nalgebra::DMatrix::from_vec(n, n, v);
        let gram = HermitianMatrix::new(&a * a.adjoint()).unwrap().add(&HermitianMatrix::identity(n).scale(1e-3));
        let k = normalize_diag(&KernelMatrix::new(nodes, gram).unwrap()).unwrap();
        let boundary = admissibility_report(&k, 256, 1e-10).unwrap().min_eig_overall;
        for t in 0..64 {
            for r in 0..16 {
                let alpha = C64::from_polar(r as f64 / 16.0, t as f64 * TAU / 64.0);
                let interior = weighted_min_eig(alpha, &k).unwrap();
                prop_assert!(interior >= boundary - 1e-8, "{interior} < {boundary} at {alpha}");
            }
        }
    }
}

#[test]
fn sup_phi_matches_polar_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..40 {
        let z1 = C64::from_polar(0.98 * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>());
        let z2 = C64::from_polar(0.98 * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>());
        let (s, p) = symmetrize(z1, z2);
        let boundary = sup_phi(s, p, 1e-10).unwrap().sup;
        let grid = brute_sup(s, p);
        assert!(grid <= boundary + 1e-10, "{grid} > {boundary}");
        assert!(boundary - grid <= 1e-3, "{grid} far below {boundary}");
    }
}

#[test]
fn sup_phi_examples() {
    assert!(sup_phi(c(0.0, 0.0), c(0.0, 0.0), 1e-10).unwrap().sup.abs() < 1e-15);
    let sp = sup_phi(c(1.0, 0.0), c(0.25, 0.0), 1e-10).unwrap();
    assert!((sp.sup - 0.5).abs() < 1e-9);
    let sp = sup_phi(c(0.0, 0.0), c(0.5, 0.0), 1e-10).unwrap();
    assert!((sp.sup - 0.5).abs() < 1e-9);
}

#[test]
fn szego_spot_values() {
    let origin = GPoint::new(c(0.0, 0.0), c(0.0, 0.0)).unwrap();
    assert!((szego(&origin, &origin).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    let x = GPoint::new(c(1.0, 0.0), c(0.25, 0.0)).unwrap();
    assert!((szego(&x, &x).unwrap() - c(256.0 / 81.0, 0.0)).norm() < 1e-12);
}

#[test]
fn szego_grams_are_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let n = rng.gen_range(1..=6);
        let nodes = NodeSet::new(sample_g(n, rng.gen())).unwrap();
        let gram = szego_gram(&nodes).unwrap();
        assert!(eigh(gram.gram()).unwrap().min() > 0.0);
    }
}

#[test]
fn identity_error_stays_small_near_boundary() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut draw = |r: f64| C64::from_polar(r, TAU * rng.gen::<f64>());
    for _ in 0..2000 {
        let z = (draw(0.95), draw(0.925));
        let w = (draw(0.95), draw(0.93));
        let (lhs, rhs) = identity_sides(z, w).unwrap();
        let size = lhs.norm().max(rhs.norm());
        assert!((lhs - rhs).norm() <= 1e-10 * size.max(1e-8), "{lhs} vs {rhs}");
    }
}
