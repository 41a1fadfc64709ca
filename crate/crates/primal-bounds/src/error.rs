use lp_milp_kernel::KernelError;
use msaro_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum PrimalError {
    #[error("stage {stage} has integer variables; use the piecewise-constant rule or K-adaptability")]
    IntegerVariables { stage: usize },
    #[error("stage {stage} has integer state variables; route them through the piecewise-constant rule")]
    IntegerState { stage: usize },
    #[error("uncertain coefficients multiply a rule-restricted variable ({detail}); the robust counterpart would be quadratic in the deviations")]
    RandomRecourse { detail: String },
    #[error("basis for stage {stage} reads components beyond that stage")]
    BasisAnticipativity { stage: usize },
    #[error("integer state variable at stage {stage} is unbounded or has an empty integer range")]
    BadIntegerRange { stage: usize },
    #[error("master problem infeasible: the model violates complete recourse on the significant scenarios")]
    MasterInfeasible,
    #[error("subproblem reported an unusable status: {0}")]
    Subproblem(String),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}
