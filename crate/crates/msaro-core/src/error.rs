use lp_milp_kernel::KernelError;

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("model error: {0}")]
    Model(String),
    #[error("scenario prefix does not cover stage {required_stage}")]
    PrefixTooShort { required_stage: usize },
    #[error("problem infeasible{}", match scenario { Some(s) => format!(" (scenario {s} alone is infeasible)"), None => String::new() })]
    Infeasible { scenario: Option<usize> },
    #[error("problem unbounded")]
    Unbounded,
    #[error("solver did not finish: {0}")]
    SolverLimit(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}
