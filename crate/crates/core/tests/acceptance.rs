//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use common::{c, disk_extremal, random_problem, schwarz_problem};
use gamma_pick::extension::{
    calculus_norm, extend_with, extremal_ratio, gamma_contraction_norm, subordinate_pair, GAMMA_GRID,
};
use gamma_pick::geometry::{is_member, symmetrize};
use gamma_pick::hardy::{identity_sides, kernel_identity_check, szego_admissibility_check};
use gamma_pick::io::{to_json_string, DualJson, ExtensionJson, PrimalJson};
use gamma_pick::kernels::random_admissible;
use gamma_pick::pick::{extremal_norm, solve_feasibility};
use gamma_pick::realization::{build_colligation, evaluate, kernel_identity_gap, norm_audit};
use gamma_pick::verify::{verify_dual, verify_primal};
use gamma_pick::{
    ExtensionResult, FeasibilityVerdict, PickProblem, RealizedFunction, SolverConfig, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn disk_point<R: Rng>(rng: &mut R, rmin: f64, rmax: f64) -> C64 {
    let r = (rmin * rmin + (rmax * rmax - rmin * rmin) * rng.gen::<f64>()).sqrt();
    C64::from_polar(r, rng.gen::<f64>() * std::f64::consts::TAU)
}

fn membership() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut wrong = 0;
    for _ in 0..10_000 {
        let (s, p) = symmetrize(disk_point(&mut rng, 0.0, 0.999), disk_point(&mut rng, 0.0, 0.999));
        if !is_member(s, p).member {
            wrong += 1;
        }
    }
    for _ in 0..1_000 {
        let (s, p) = symmetrize(disk_point(&mut rng, 1.001, 3.0), disk_point(&mut rng, 1.001, 3.0));
        if is_member(s, p).member {
            wrong += 1;
        }
    }
    ensure(wrong == 0, || format!("{wrong} misclassified"))?;
    Ok("11000 points, 0 misclassified".into())
}

fn kernel_identity() -> Outcome {
    let (lhs, rhs) = identity_sides((c(0.5, 0.0), c(0.0, 0.0)), (c(0.5, 0.0), c(0.0, 0.0)))
        .map_err(|e| e.to_string())?;
    ensure((lhs - c(1.0 / 6.0, 0.0)).norm() < 1e-15 && (rhs - c(1.0 / 6.0, 0.0)).norm() < 1e-15, || {
        format!("spot value {lhs} vs {rhs}")
    })?;
    let r = kernel_identity_check(10_000, 7).map_err(|e| e.to_string())?;
    let err = r.max_identity_error.unwrap();
    ensure(err <= 1e-10, || format!("max relative error {err:e}"))?;
    Ok(format!("10000 samples, max relative error {err:.2e}, spot value 1/6"))
}

fn szego_admissible() -> Outcome {
    let r = szego_admissibility_check(100, 5, 11).map_err(|e| e.to_string())?;
    let worst = r.admissibility_min_eig.unwrap();
    ensure(worst >= -1e-9, || format!("min eigenvalue {worst:e}"))?;
    Ok(format!("100 node sets, min LMI eigenvalue {worst:.2e}"))
}

struct Dichotomy {
    problem: PickProblem,
    verdict: FeasibilityVerdict,
}

fn dichotomy_cases() -> &'static Vec<Dichotomy> {
    static CASES: OnceLock<Vec<Dichotomy>> = OnceLock::new();
    CASES.get_or_init(|| {
        let config = SolverConfig::default();
        (0..50u64)
            .map(|k| {
                let problem = random_problem(1 + (k as usize % 3), 100 + k, 0.95);
                let verdict = solve_feasibility(&problem, 1.0, &config)
                    .unwrap_or_else(|e| panic!("problem {k}: {e}"));
                Dichotomy { problem, verdict }
            })
            .collect()
    })
}

fn dichotomy() -> Outcome {
    let mut feasible = 0;
    let mut infeasible = 0;
    for (k, case) in dichotomy_cases().iter().enumerate() {
        let v = &case.verdict;
        ensure(v.primal.is_some() != v.dual.is_some(), || format!("problem {k}: not exactly one certificate"))?;
        if let Some(cert) = &v.primal {
            feasible += 1;
            let check = verify_primal(&case.problem, cert).map_err(|e| e.to_string())?;
            ensure(check.residual <= 1e-6 && check.min_block_eig >= -1e-9, || format!("problem {k}: {check:?}"))?;
            let col = build_colligation(&case.problem, cert).map_err(|e| format!("problem {k}: {e}"))?;
            let f = RealizedFunction::new(col);
            for (x, w) in case.problem.nodes().points().iter().zip(case.problem.targets()) {
                let got = evaluate(&f, x).map_err(|e| e.to_string())?;
                ensure((got - w).norm() <= 1e-6, || format!("problem {k}: f = {got}, target {w}"))?;
            }
            let sup = norm_audit(&f, 10_000, k as u64);
            ensure(sup <= 1.0 + 1e-6, || format!("problem {k}: sup {sup}"))?;
        } else {
            infeasible += 1;
            let cert = v.dual.as_ref().unwrap();
            let check = verify_dual(&case.problem, cert, 256).map_err(|e| e.to_string())?;
            ensure(check.violation >= 1e-6 && check.admissibility_slack >= -1e-8, || {
                format!("problem {k}: {check:?}")
            })?;
        }
    }
    Ok(format!("{feasible} primal and {infeasible} dual certificates re-verified"))
}

fn diagonal_oracle() -> Outcome {
    let config = SolverConfig::default();
    let z = [c(0.0, 0.0), c(0.3, 0.0)];
    let oracle_low = disk_extremal(z, [c(0.0, 0.0), c(0.3, 0.0)]);
    let oracle_high = disk_extremal(z, [c(0.0, 0.0), c(0.5, 0.0)]);
    let r1 = extremal_norm(&schwarz_problem(0.3), &config).map_err(|e| e.to_string())?.rho;
    ensure((r1 - 1.0).abs() <= 1e-3 && (r1 - oracle_low).abs() <= 1e-3, || format!("rho {r1}, oracle {oracle_low}"))?;
    let v = solve_feasibility(&schwarz_problem(0.5), 1.0, &config).map_err(|e| e.to_string())?;
    ensure(!v.feasible && v.dual.is_some(), || "(0, 0.5) reported feasible at scale 1".into())?;
    let r2 = extremal_norm(&schwarz_problem(0.5), &config).map_err(|e| e.to_string())?.rho;
    ensure((r2 - 5.0 / 3.0).abs() <= 2e-3 && (r2 - oracle_high).abs() <= 2e-3, || {
        format!("rho {r2}, oracle {oracle_high}")
    })?;
    Ok(format!("rho {r1:.6} (oracle {oracle_low:.6}), rho {r2:.6} (oracle {oracle_high:.6})"))
}

fn extension_cases() -> &'static Vec<ExtensionResult> {
    static CASES: OnceLock<Vec<ExtensionResult>> = OnceLock::new();
    CASES.get_or_init(|| {
        let config = SolverConfig::default();
        let mut out: Vec<ExtensionResult> = (0..20u64)
            .map(|k| {
                let p = random_problem(2 + (k as usize % 2), 500 + k, 0.95);
                extend_with(p.nodes(), p.targets(), &config, 100, 10_000)
                    .unwrap_or_else(|e| panic!("problem {k}: {e}"))
            })
            .collect();
        for w in [0.3, 0.5] {
            let p = schwarz_problem(w);
            out.push(extend_with(p.nodes(), p.targets(), &config, 100, 10_000).unwrap());
        }
        out
    })
}

fn realization_soundness() -> Outcome {
    let mut count = 0;
    let mut worst_defect = 0.0f64;
    let mut worst_gap = 0.0f64;
    let primal = dichotomy_cases()
        .iter()
        .filter_map(|d| d.verdict.primal.as_ref().map(|c| (&d.problem, c)));
    let extended = extension_cases().iter().map(|r| (&r.problem, &r.certificate));
    for (problem, cert) in primal.chain(extended) {
        let col = build_colligation(problem, cert).map_err(|e| e.to_string())?;
        worst_defect = worst_defect.max(col.isometry_defect);
        worst_gap = worst_gap.max(kernel_identity_gap(problem, cert));
        count += 1;
    }
    ensure(worst_defect <= 1e-8, || format!("isometry defect {worst_defect:e}"))?;
    ensure(worst_gap <= 1e-6, || format!("kernel identity gap {worst_gap:e}"))?;
    Ok(format!("{count} colligations, max defect {worst_defect:.2e}, max identity gap {worst_gap:.2e}"))
}

fn duality_gap() -> Outcome {
    let mut worst_dual = 0.0f64;
    let mut worst_bracket = 0.0f64;
    for (k, r) in extension_cases().iter().take(20).enumerate() {
        let bracket = (r.rho - r.lower) / r.rho;
        worst_bracket = worst_bracket.max(bracket);
        ensure(bracket <= 1e-3, || format!("problem {k}: bracket [{}, {}]", r.lower, r.rho))?;
        let dual = r.dual.as_ref().ok_or_else(|| format!("problem {k}: no dual kernel below rho"))?;
        let pair = subordinate_pair(&dual.kernel).map_err(|e| format!("problem {k}: {e}"))?;
        let ratio = calculus_norm(&pair, r.problem.targets()).map_err(|e| e.to_string())? / r.rho;
        worst_dual = worst_dual.max(1.0 - ratio);
        ensure(ratio >= 1.0 - 1e-2, || format!("problem {k}: dual reaches {ratio} of rho"))?;
    }
    Ok(format!(
        "20 problems, primal bracket within {worst_bracket:.1e}, dual within {worst_dual:.1e} of rho"
    ))
}

fn von_neumann() -> Outcome {
    let mut worst = 0.0f64;
    let mut weakest_extremal = f64::INFINITY;
    for (k, r) in extension_cases().iter().enumerate() {
        let audit = r.audit.as_ref().unwrap();
        worst = worst.max(audit.max_ratio);
        ensure(audit.max_ratio <= 1.0 + 1e-6, || format!("case {k}: ratio {}", audit.max_ratio))?;
        let (_, sup) = r.interpolant.norm_audit.unwrap();
        ensure(sup <= r.rho * (1.0 + 1e-4), || format!("case {k}: sup {sup} over rho {}", r.rho))?;
        let er = extremal_ratio(r)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("case {k}: no extremal kernel"))?;
        weakest_extremal = weakest_extremal.min(er);
        ensure(er >= 1.0 - 1e-2, || format!("case {k}: extremal ratio {er}"))?;
    }
    Ok(format!(
        "{} results x 100 pairs, max ratio {worst:.9}, extremal ratios >= {weakest_extremal:.6}",
        extension_cases().len()
    ))
}

fn gamma_contraction() -> Outcome {
    let mut count = 0;
    let mut worst = 0.0f64;
    for (k, r) in extension_cases().iter().enumerate() {
        let mut kernels = vec![];
        for t in 0..10 {
            kernels.push(random_admissible(r.problem.nodes(), 77 * k as u64 + t, 4).map_err(|e| e.to_string())?);
        }
        if let Some(d) = &r.dual {
            kernels.push(d.kernel.clone());
        }
        for delta in kernels {
            let pair = subordinate_pair(&delta).map_err(|e| format!("case {k}: {e}"))?;
            let g = gamma_contraction_norm(&pair, GAMMA_GRID).map_err(|e| e.to_string())?;
            worst = worst.max(g);
            count += 1;
        }
    }
    ensure(worst <= 1.0 + 1e-8, || format!("norm {worst}"))?;
    Ok(format!("{count} pairs, max norm {worst:.9}"))
}

fn determinism() -> Outcome {
    let config = SolverConfig::default();
    let render = |p: &PickProblem| -> Result<String, String> {
        let v = solve_feasibility(p, 1.0, &config).map_err(|e| e.to_string())?;
        let mut out = String::new();
        if let Some(cert) = &v.primal {
            out += &to_json_string(&PrimalJson::from(cert)).map_err(|e| e.to_string())?;
        }
        if let Some(cert) = &v.dual {
            out += &to_json_string(&DualJson::from(cert)).map_err(|e| e.to_string())?;
        }
        let ext = extend_with(p.nodes(), p.targets(), &config, 10, 1000).map_err(|e| e.to_string())?;
        out += &to_json_string(&ExtensionJson::from(&ext)).map_err(|e| e.to_string())?;
        Ok(out)
    };
    let problems: Vec<PickProblem> = (0..4).map(|k| random_problem(3, 900 + k, 0.95)).collect();
    for (k, p) in problems.iter().enumerate() {
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let wide = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let first = single.install(|| render(p))?;
        let second = single.install(|| render(p))?;
        let third = wide.install(|| render(p))?;
        ensure(first == second && first == third, || format!("problem {k}: outputs differ"))?;
    }
    Ok("4 problems, byte-identical across repeats and 1 vs 4 threads".into())
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("membership oracle equivalence", membership),
        ("kernel identity", kernel_identity),
        ("Szego admissibility", szego_admissible),
        ("certificate dichotomy", dichotomy),
        ("diagonal oracle", diagonal_oracle),
        ("realization soundness", realization_soundness),
        ("duality gap", duality_gap),
        ("von Neumann audit", von_neumann),
        ("Gamma-contraction criterion", gamma_contraction),
        ("determinism", determinism),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (k, (name, run)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", k + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} of 10 criteria passed in {:.1}s",
        10 - failures,
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
