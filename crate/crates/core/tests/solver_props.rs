mod common;

use common::{c, diagonal_problem, disk_extremal, random_problem};
use gamma_pick::extension::{calculus_norm, extend_with, nested_extremal_norms, subordinate_pair};
use gamma_pick::kernels::random_admissible;
use gamma_pick::linalg::eigh;
use gamma_pick::pick::{extremal_norm, pick_matrix, solve_feasibility};
use gamma_pick::realization::{build_colligation, evaluate, lurking_defect};
use gamma_pick::{GPoint, NodeSet, PickProblem, RealizedFunction, SolverConfig, C64};
use proptest::prelude::*;
use std::f64::consts::TAU;

fn config() -> SolverConfig {
    SolverConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn feasibility_is_monotone_in_scale(seed in 0u64..100_000, n in 1usize..=3) {
        let p = random_problem(n, seed, 0.95);
        let v = solve_feasibility(&p, 1.0, &config()).unwrap();
        if v.feasible {
            prop_assert!(solve_feasibility(&p, 1.1, &config()).unwrap().feasible);
        } else {
            prop_assert!(!solve_feasibility(&p, 1.0 / 1.1, &config()).unwrap().feasible);
        }
    }

    #[test]
    fn primal_certificates_force_nonnegative_pick_matrices(seed in 0u64..100_000, n in 1usize..=3) {
        let p = random_problem(n, seed, 0.6);
        let v = solve_feasibility(&p, 1.0, &config()).unwrap();
        if let Some(cert) = v.primal {
            for t in 0..20 {
                let k = random_admissible(p.nodes(), seed * 100 + t, 4).unwrap();
                let m = pick_matrix(&p, &k, cert.scale).unwrap();
                prop_assert!(eigh(&m).unwrap().min() >= -1e-6);
            }
        }
    }

    #[test]
    fn rho_ignores_unimodular_rotation(seed in 0u64..100_000, theta in 0.0f64..TAU) {
        let p = random_problem(2, seed, 0.9);
        let rotated = p.scaled_targets(C64::from_polar(1.0, theta));
        let a = extremal_norm(&p, &config()).unwrap().rho;
        let b = extremal_norm(&rotated, &config()).unwrap().rho;
        prop_assert!((a - b).abs() <= 1e-10 * a, "{a} vs {b}");
    }

    #[test]
    fn rho_is_homogeneous(seed in 0u64..100_000) {
        let p = random_problem(2, seed, 0.9);
        let a = extend_with(p.nodes(), p.targets(), &config(), 0, 0).unwrap();
        let doubled = p.scaled_targets(c(2.0, 0.0));
        let b = extend_with(doubled.nodes(), doubled.targets(), &config(), 0, 0).unwrap();
        prop_assert!((b.rho - 2.0 * a.rho).abs() <= 1e-8 * b.rho, "{} vs {}", b.rho, 2.0 * a.rho);
        prop_assert_eq!(a.dual.is_some(), b.dual.is_some());
        prop_assert_eq!(extremal_norm(&p, &config()).unwrap().rho, a.rho);
    }

    #[test]
    fn realized_interpolants_hit_targets_and_vary_smoothly(seed in 0u64..100_000, n in 1usize..=3) {
        let p = random_problem(n, seed, 0.8);
        let cert = extremal_norm(&p, &config()).unwrap().certificate_at_rho;
        let col = build_colligation(&p, &cert).unwrap();
        prop_assert!(lurking_defect(&p, &col).unwrap() <= 1e-6);
        let f = RealizedFunction::new(col);
        for x in p.nodes().points() {
            let nudged = GPoint::new(x.s() + c(1e-6, -1e-6), x.p() + c(-1e-6, 0.0));
            if let Ok(y) = nudged {
                let jump = (evaluate(&f, x).unwrap() - evaluate(&f, &y).unwrap()).norm();
                prop_assert!(jump <= 1e-3, "jump {jump}");
            }
        }
    }

    #[test]
    fn calculus_annihilates_functions_vanishing_on_nodes(seed in 0u64..100_000, n in 1usize..=4) {
        let nodes = NodeSet::new(gamma_pick::geometry::sample_g(n, seed)).unwrap();
        let pair = subordinate_pair(&random_admissible(&nodes, seed, 3).unwrap()).unwrap();
        prop_assert_eq!(calculus_norm(&pair, &vec![c(0.0, 0.0); n]).unwrap(), 0.0);
    }
}

#[test]
fn diagonal_problems_match_disk_oracle() {
    let cases = [
        ([c(0.0, 0.0), c(0.3, 0.0)], [c(0.0, 0.0), c(0.3, 0.0)]),
        ([c(0.0, 0.0), c(0.3, 0.0)], [c(0.0, 0.0), c(0.5, 0.0)]),
        ([c(0.1, 0.2), c(-0.4, 0.1)], [c(0.2, 0.0), c(-0.1, 0.3)]),
        ([c(0.5, 0.0), c(0.0, -0.5)], [c(0.6, 0.1), c(0.0, 0.0)]),
        ([c(-0.2, -0.2), c(0.6, 0.3)], [c(0.9, 0.0), c(0.1, -0.2)]),
    ];
    for (z, w) in cases {
        let p = diagonal_problem(&z, &w);
        let rho = extremal_norm(&p, &config()).unwrap().rho;
        let oracle = disk_extremal(z, w);
        assert!((rho - oracle).abs() <= 1e-3 * oracle, "rho {rho}, oracle {oracle}");
    }
}

#[test]
fn nested_norms_increase() {
    let p = random_problem(4, 31, 0.9);
    let norms = nested_extremal_norms(p.nodes(), p.targets(), &config()).unwrap();
    assert_eq!(norms.len(), 3);
    for pair in norms.windows(2) {
        assert!(pair[1] >= pair[0] * (1.0 - 1e-4), "{norms:?}");
    }
}

#[test]
fn tie_instance_reports_feasible() {
    let p: PickProblem = common::schwarz_problem(0.3);
    let v = solve_feasibility(&p, 1.0, &config()).unwrap();
    assert!(v.feasible);
    assert!(v.primal.is_some() && v.dual.is_none());
}
