use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "gamma-pick", version, about = "Pick interpolation on the symmetrized bidisk")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Solver configuration as JSON; flags below override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Boundary α grid size.
    #[arg(long, global = true, value_name = "M")]
    pub alpha_grid: Option<usize>,
    /// Primal residual tolerance.
    #[arg(long, global = true, value_name = "TOL")]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the parallel sweeps.
    #[arg(long, global = true, env = "GAMMA_PICK_THREADS", value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Membership of (s, p) in the symmetrized bidisk.
    Member {
        /// `re,im`
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        /// `re,im`
        #[arg(long, allow_hyphen_values = true)]
        p: String,
    },
    /// Feasibility and extremal norm of a Pick problem.
    #[command(subcommand)]
    Pick(PickCommand),
    /// Realize the interpolant of a primal certificate.
    Realize {
        certificate: PathBuf,
        #[arg(long)]
        problem: PathBuf,
        /// `s_re,s_im,p_re,p_im`
        #[arg(long, allow_hyphen_values = true, conflicts_with = "grid")]
        eval: Option<String>,
        /// Number of sample points for a CSV dump.
        #[arg(long, requires = "csv")]
        grid: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Extremal extension with realization and audits.
    Extend {
        problem: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Samples of the sup-norm audit of the interpolant.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    #[command(subcommand)]
    Audit(AuditCommand),
    #[command(subcommand)]
    Hardy(HardyCommand),
    /// Re-verify a primal or dual certificate from scratch.
    Verify {
        certificate: PathBuf,
        #[arg(long)]
        problem: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum PickCommand {
    /// Decide feasibility at one scale.
    Solve {
        problem: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Extremal norm with bracketing certificates.
    Norm {
        problem: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum AuditCommand {
    /// Random subordinate pairs against an extension result.
    Vonneumann {
        result: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum HardyCommand {
    /// Kernel identity sweep and Szegő admissibility.
    Check {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 100)]
        node_sets: usize,
        #[arg(long, default_value_t = 5)]
        max_n: usize,
    },
}
