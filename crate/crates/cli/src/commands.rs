use std::path::Path;

use gamma_pick::extension::{extend_with, extremal_ratio, von_neumann_audit};
use gamma_pick::geometry::{is_member, sample_g};
use gamma_pick::hardy::hardy_check;
use gamma_pick::io::{
    from_json_str, grid_csv, to_json_string, AuditJson, DualJson, ExtensionJson, PrimalJson, ProblemJson,
};
use gamma_pick::pick::{extremal_norm, solve_feasibility};
use gamma_pick::realization::{build_colligation, evaluate};
use gamma_pick::verify::{verify_dual, verify_primal};
use gamma_pick::{
    DecompositionCertificate, DualCertificate, ExtensionResult, GPoint, PickProblem, RealizedFunction,
    SolverConfig, C64,
};
use serde::{Deserialize, Serialize};

use crate::run::{ensure_dir, CliResult, Failure, Run, EXIT_NO};

/// Tolerances of the standalone `verify` and `audit` verdicts.
const VERIFY_RESIDUAL: f64 = 1e-6;
const VERIFY_BLOCK: f64 = 1e-9;
const AUDIT_SLACK: f64 = 1e-6;

fn print<T: Serialize>(value: &T) -> CliResult<()> {
    print!("{}", to_json_string(value)?);
    Ok(())
}

fn numbers(text: &str, count: usize, what: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("{what}: expected {count} comma-separated numbers, got `{text}`")))?;
    if parts.len() != count {
        return Err(Failure::usage(format!("{what}: expected {count} numbers, got {}", parts.len())));
    }
    Ok(parts)
}

fn load_problem(run: &mut Run, path: &Path) -> CliResult<PickProblem> {
    let wire: ProblemJson = from_json_str(&run.read_input(path)?)?;
    Ok((&wire).try_into()?)
}

pub fn member(s: &str, p: &str) -> CliResult<u8> {
    let s = numbers(s, 2, "--s")?;
    let p = numbers(p, 2, "--p")?;
    let m = is_member(C64::new(s[0], s[1]), C64::new(p[0], p[1]));
    #[derive(Serialize)]
    struct Out {
        member: bool,
        margin: f64,
        sup_phi: f64,
        witness_alpha: [f64; 2],
    }
    print(&Out {
        member: m.member,
        margin: m.margin,
        sup_phi: m.sup_phi,
        witness_alpha: [m.witness_alpha.re, m.witness_alpha.im],
    })?;
    Ok(if m.member { 0 } else { EXIT_NO })
}

#[derive(Serialize)]
struct Verdict {
    feasible: bool,
    scale: f64,
    tie_warning: bool,
    iterations: usize,
    alpha_grid_used: usize,
    certificate: &'static str,
}

pub fn pick_solve(config: &SolverConfig, problem: &Path, scale: f64, out: &Path) -> CliResult<u8> {
    let mut run = Run::new("pick solve", config);
    let problem = load_problem(&mut run, problem)?;
    let verdict = run.timed("solve", || solve_feasibility(&problem, scale, config))?;
    ensure_dir(out)?;
    let certificate = if let Some(cert) = &verdict.primal {
        run.write(out, "primal.json", &PrimalJson::from(cert))?;
        "primal.json"
    } else {
        let cert = verdict.dual.as_ref().expect("one certificate per verdict");
        run.write(out, "dual.json", &DualJson::from(cert))?;
        "dual.json"
    };
    let summary = Verdict {
        feasible: verdict.feasible,
        scale,
        tie_warning: verdict.tie_warning,
        iterations: verdict.iterations,
        alpha_grid_used: verdict.alpha_grid_used,
        certificate,
    };
    run.write(out, "verdict.json", &summary)?;
    run.finish(out)?;
    print(&summary)?;
    Ok(if verdict.feasible { 0 } else { EXIT_NO })
}

pub fn pick_norm(config: &SolverConfig, problem: &Path, out: &Path) -> CliResult<u8> {
    let mut run = Run::new("pick norm", config);
    let problem = load_problem(&mut run, problem)?;
    let norm = run.timed("bisection", || extremal_norm(&problem, config))?;
    ensure_dir(out)?;
    run.write(out, "primal_rho.json", &PrimalJson::from(&norm.certificate_at_rho))?;
    run.write(out, "primal_rho_plus.json", &PrimalJson::from(&norm.certificate_at_rho_plus))?;
    if let Some(dual) = &norm.extremal_kernel {
        run.write(out, "dual_rho_minus.json", &DualJson::from(dual))?;
    }
    #[derive(Serialize)]
    struct Out {
        rho: f64,
        lower: f64,
        probes: usize,
        extremal_kernel: bool,
    }
    let summary = Out {
        rho: norm.rho,
        lower: norm.lower,
        probes: norm.probes,
        extremal_kernel: norm.extremal_kernel.is_some(),
    };
    run.write(out, "norm.json", &summary)?;
    run.finish(out)?;
    print(&summary)?;
    Ok(0)
}

pub fn realize(
    config: &SolverConfig,
    certificate: &Path,
    problem: &Path,
    eval: Option<&str>,
    grid: Option<(usize, &Path)>,
) -> CliResult<u8> {
    let mut run = Run::new("realize", config);
    let wire: PrimalJson = from_json_str(&run.read_input(certificate)?)?;
    let cert: DecompositionCertificate = (&wire).try_into()?;
    let problem = load_problem(&mut run, problem)?;
    if cert.blocks.iter().any(|b| b.dim() != problem.len()) {
        return Err(Failure::usage(format!(
            "certificate blocks do not match the {} problem nodes",
            problem.len()
        )));
    }
    let colligation = run.timed("realize", || build_colligation(&problem, &cert))?;
    let f = RealizedFunction::new(colligation);
    if let Some(text) = eval {
        let x = numbers(text, 4, "--eval")?;
        let point = GPoint::new(C64::new(x[0], x[1]), C64::new(x[2], x[3]))?;
        let value = evaluate(&f, &point)?;
        #[derive(Serialize)]
        struct Out {
            value: [f64; 2],
        }
        print(&Out {
            value: [value.re, value.im],
        })?;
    }
    if let Some((count, csv)) = grid {
        let points = sample_g(count, config.seed);
        let (text, sup) = run.timed("grid", || grid_csv(&f, &points));
        run.write_raw(csv, &text)?;
        let dir = csv.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        run.finish(dir)?;
        #[derive(Serialize)]
        struct Out {
            points: usize,
            observed_sup: f64,
            scale: f64,
        }
        print(&Out {
            points: count,
            observed_sup: sup,
            scale: f.colligation.scale,
        })?;
    }
    Ok(0)
}

pub fn extend(config: &SolverConfig, problem: &Path, out: &Path, trials: usize, samples: usize) -> CliResult<u8> {
    let mut run = Run::new("extend", config);
    let problem = load_problem(&mut run, problem)?;
    let result = run.timed("extend", || {
        extend_with(problem.nodes(), problem.targets(), config, trials, samples)
    })?;
    ensure_dir(out)?;
    run.write(out, "extension.json", &ExtensionJson::from(&result))?;
    run.finish(out)?;
    #[derive(Serialize)]
    struct Out {
        rho: f64,
        lower: f64,
        state_dim: usize,
        observed_sup: Option<f64>,
        max_ratio: Option<f64>,
    }
    print(&Out {
        rho: result.rho,
        lower: result.lower,
        state_dim: result.interpolant.colligation.state_dim(),
        observed_sup: result.interpolant.norm_audit.map(|a| a.1),
        max_ratio: result.audit.as_ref().map(|a| a.max_ratio),
    })?;
    Ok(0)
}

pub fn audit_von_neumann(config: &SolverConfig, result: &Path, trials: usize) -> CliResult<u8> {
    let mut run = Run::new("audit vonneumann", config);
    let wire: ExtensionJson = from_json_str(&run.read_input(result)?)?;
    let result: ExtensionResult = (&wire).try_into()?;
    let audit = von_neumann_audit(&result, trials, config.seed)?;
    #[derive(Serialize)]
    struct Out {
        #[serde(flatten)]
        audit: AuditJson,
        rho: f64,
        extremal_ratio: Option<f64>,
    }
    let ok = audit.max_ratio <= 1.0 + AUDIT_SLACK;
    print(&Out {
        audit: (&audit).into(),
        rho: result.rho,
        extremal_ratio: extremal_ratio(&result)?,
    })?;
    Ok(if ok { 0 } else { EXIT_NO })
}

pub fn hardy(config: &SolverConfig, samples: usize, node_sets: usize, max_n: usize) -> CliResult<u8> {
    let report = hardy_check(samples, node_sets, max_n, config.seed)?;
    print(&report)?;
    Ok(if report.passes() { 0 } else { EXIT_NO })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnyCertificate {
    Primal(PrimalJson),
    Dual(DualJson),
}

pub fn verify(config: &SolverConfig, certificate: &Path, problem: &Path) -> CliResult<u8> {
    let mut run = Run::new("verify", config);
    let wire: AnyCertificate = from_json_str(&run.read_input(certificate)?)?;
    let problem = load_problem(&mut run, problem)?;
    match wire {
        AnyCertificate::Primal(j) => {
            let cert: DecompositionCertificate = (&j).try_into()?;
            let check = verify_primal(&problem, &cert)?;
            let ok = check.passes(VERIFY_RESIDUAL * cert.scale.powi(2).max(1.0), VERIFY_BLOCK);
            #[derive(Serialize)]
            struct Out<T> {
                kind: &'static str,
                passes: bool,
                #[serde(flatten)]
                check: T,
            }
            print(&Out {
                kind: "primal",
                passes: ok,
                check,
            })?;
            Ok(if ok { 0 } else { EXIT_NO })
        }
        AnyCertificate::Dual(j) => {
            let cert: DualCertificate = (&j).try_into()?;
            let check = verify_dual(&problem, &cert, config.admissibility_grid)?;
            let ok = check.passes(config.dual_tol, config.slack_tol);
            #[derive(Serialize)]
            struct Out<T> {
                kind: &'static str,
                passes: bool,
                #[serde(flatten)]
                check: T,
            }
            print(&Out {
                kind: "dual",
                passes: ok,
                check,
            })?;
            Ok(if ok { 0 } else { EXIT_NO })
        }
    }
}
