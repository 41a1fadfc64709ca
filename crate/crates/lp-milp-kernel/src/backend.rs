//! Pluggable solver contract. Higher layers depend on this trait only, so an
//! external solver can stand in for the built-in dense kernel behind the same
//! three signatures.

use crate::bilinear::{solve_bilinear_with, BilinearOptions, BilinearProgram};
use crate::lp::{KernelError, LinearProgram, SolveResult};
use crate::milp::MilpOptions;

pub trait SolverBackend: Send + Sync {
    fn name(&self) -> &str;

    fn solve_lp(&self, lp: &LinearProgram, tol: f64) -> Result<SolveResult, KernelError>;

    fn solve_milp(&self, lp: &LinearProgram, opts: &MilpOptions) -> Result<SolveResult, KernelError>;

    /// Whether the backend solves nonconvex bilinear programs natively. When
    /// false, `solve_bilinear` falls back to the alternating-fix heuristic
    /// built on `solve_milp`.
    fn native_bilinear(&self) -> bool {
        false
    }

    fn solve_bilinear(
        &self,
        bp: &BilinearProgram,
        opts: &BilinearOptions,
    ) -> Result<SolveResult, KernelError> {
        solve_bilinear_with(bp, opts, &|lp, mo| self.solve_milp(lp, mo))
    }
}

/// The built-in dense tableau kernel.
#[derive(Debug, Default, Clone, Copy)]
pub struct DenseKernel;

impl SolverBackend for DenseKernel {
    fn name(&self) -> &str {
        "dense-kernel"
    }

    fn solve_lp(&self, lp: &LinearProgram, tol: f64) -> Result<SolveResult, KernelError> {
        crate::simplex::solve_lp(lp, tol)
    }

    fn solve_milp(&self, lp: &LinearProgram, opts: &MilpOptions) -> Result<SolveResult, KernelError> {
        crate::milp::solve_milp(lp, opts)
    }
}
