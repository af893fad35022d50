#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cli;
mod commands;
mod run;

use std::process::ExitCode;

use clap::Parser;
use gamma_pick::io::read_json;
use gamma_pick::SolverConfig;

use cli::{AuditCommand, Cli, Command, GlobalOpts, HardyCommand, PickCommand};
use run::{CliResult, Failure};

fn resolve_config(opts: &GlobalOpts) -> CliResult<SolverConfig> {
    let mut config = match &opts.config {
        Some(path) => read_json::<SolverConfig>(path)
            .map_err(|e| Failure::usage(format!("cannot load config {}: {e}", path.display())))?,
        None => SolverConfig::default(),
    };
    if let Some(m) = opts.alpha_grid {
        if m < 8 {
            return Err(Failure::usage("--alpha-grid must be at least 8"));
        }
        config.alpha_grid = m;
    }
    if let Some(tol) = opts.tol {
        if !(tol > 0.0) {
            return Err(Failure::usage("--tol must be positive"));
        }
        config.primal_tol = tol;
    }
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn dispatch(cli: Cli) -> CliResult<u8> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(format!("--threads: {e}")))?;
    }
    let config = resolve_config(&cli.global)?;
    match cli.command {
        Command::Member { s, p } => commands::member(&s, &p),
        Command::Pick(PickCommand::Solve { problem, scale, out }) => {
            if !(scale > 0.0) || !scale.is_finite() {
                return Err(Failure::usage("--scale must be positive"));
            }
            commands::pick_solve(&config, &problem, scale, &out)
        }
        Command::Pick(PickCommand::Norm { problem, out }) => commands::pick_norm(&config, &problem, &out),
        Command::Realize {
            certificate,
            problem,
            eval,
            grid,
            csv,
        } => {
            if eval.is_none() && grid.is_none() {
                return Err(Failure::usage("realize needs --eval or --grid with --csv"));
            }
            let grid = grid.zip(csv.as_deref());
            commands::realize(&config, &certificate, &problem, eval.as_deref(), grid)
        }
        Command::Extend {
            problem,
            out,
            trials,
            samples,
        } => commands::extend(&config, &problem, &out, trials, samples),
        Command::Audit(AuditCommand::Vonneumann { result, trials }) => {
            commands::audit_von_neumann(&config, &result, trials)
        }
        Command::Hardy(HardyCommand::Check {
            samples,
            node_sets,
            max_n,
        }) => commands::hardy(&config, samples, node_sets, max_n),
        Command::Verify { certificate, problem } => commands::verify(&config, &certificate, &problem),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("gamma-pick: {failure}");
            ExitCode::from(failure.code)
        }
    }
}
