use serde::{Deserialize, Serialize};

/// Which algorithm produces the primal decomposition blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PrimalMethod {
    /// Primal-dual interior point on the trace-normalized margin problem.
    #[default]
    InteriorPoint,
    /// Dykstra alternating projections between the block PSD cone and the
    /// affine decomposition constraint.
    Dykstra,
}

/// Tolerances, grid sizes and iteration caps for the Pick solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Number of boundary α points supporting the decomposition measure.
    pub alpha_grid: usize,
    /// Accepted Frobenius residual of a primal certificate, relative to `max(1, t²)`.
    pub primal_tol: f64,
    /// Minimum Pick-matrix violation of a dual certificate.
    pub dual_tol: f64,
    /// Relative bisection tolerance for the extremal norm.
    pub rho_tol: f64,
    /// Lower bound on `λ_min` for strict positivity of dual kernels.
    pub strict_tol: f64,
    /// Accepted negative admissibility slack of a dual kernel.
    pub slack_tol: f64,
    /// Boundary grid of the a-posteriori admissibility sweep.
    pub admissibility_grid: usize,
    /// Refinement accuracy in `arg α`.
    pub refine_tol: f64,
    pub primal_method: PrimalMethod,
    pub ipm_max_iters: usize,
    pub ipm_tol: f64,
    pub dykstra_max_iters: usize,
    pub dual_search_iters: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alpha_grid: 64,
            primal_tol: 1e-8,
            dual_tol: 1e-6,
            rho_tol: 1e-4,
            strict_tol: 1e-10,
            slack_tol: 1e-8,
            admissibility_grid: 256,
            refine_tol: 1e-10,
            primal_method: PrimalMethod::InteriorPoint,
            ipm_max_iters: 80,
            ipm_tol: 1e-11,
            dykstra_max_iters: 20_000,
            dual_search_iters: 400,
            seed: 0,
        }
    }
}
