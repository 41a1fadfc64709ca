//! Staged adaptive robust model representation with affine-in-uncertainty
//! data, scenario machinery (trees, finite lists, budgeted polytopes,
//! sampling, history classes), extensive forms over finite scenario sets and
//! the exact / perfect-information reference values.
//!
//! Models and uncertainty sets are immutable after construction and safe to
//! share across threads; per-scenario solves merge deterministically by
//! scenario index.

pub mod affine;
pub mod error;
pub mod extensive;
pub mod model;
pub mod scenario;
pub mod uncertainty;

pub use affine::{AffineExpr, AffineMatrix, NumericMatrix};
pub use error::CoreError;
pub use extensive::{
    append_scenario_rows, build_extensive_form, perfect_information_bound,
    perfect_information_bound_with, solve_exact, solve_exact_with, ExactSolution, ExtensiveForm,
    NaMode, PiBound,
};
pub use model::{validate_model, Diagnostic, MsaroModel, NumericStage, Sense, StageBlock};
pub use scenario::{history_classes, ScenarioPath, PREFIX_TOL};
pub use uncertainty::{sample_uncertainty, BudgetedPolytope, ScenarioTree, TreeNode, UncertaintySet};
