//! Self-contained dense LP/MILP kernel for desk-scale optimization:
//!
//! - `solve_lp`: two-phase bounded-variable tableau simplex with Bland's rule
//!   engaged after stall detection, returning primal, dual and reduced costs.
//! - `solve_milp`: branch-and-bound with best-bound node selection and
//!   most-fractional branching, ties broken by lowest variable index.
//! - `solve_bilinear`: multi-start alternating-fix heuristic for programs
//!   whose products pair one variable group against the rest.
//!
//! All variable bounds must be finite. Every solve is single-threaded,
//! re-entrant and deterministic for identical inputs and seeds.

mod backend;
mod bilinear;
mod lp;
mod milp;
mod simplex;

pub use backend::{DenseKernel, SolverBackend};
pub use bilinear::{solve_bilinear, solve_bilinear_with, BilinearOptions, BilinearProgram, ProductTerm};
pub use lp::{KernelError, LinRow, LinearProgram, Rel, SolveResult, SolveStatus};
pub use milp::{solve_milp, MilpOptions};
pub use simplex::solve_lp;

/// Feasibility tolerance on constraint residuals used across the kernel.
pub const FEAS_TOL: f64 = 1e-7;

/// Conservative big-M for a linear expression over a variable box: the sum of
/// worst-case absolute contributions of each term plus one. Callers derive
/// every big-M from explicit bounds this way instead of using a global
/// constant.
pub fn big_m_for(terms: &[(f64, f64, f64)]) -> f64 {
    // terms: (coefficient, lower, upper)
    let mut m = 1.0;
    for &(c, l, u) in terms {
        m += (c * l).abs().max((c * u).abs());
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_lp() -> LinearProgram {
        // min x  s.t.  x >= 2,  x in [0, 10]
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, 10.0, 1.0, false);
        lp.add_row(vec![(x, 1.0)], Rel::Ge, 2.0);
        lp
    }

    #[test]
    fn lp_min_with_ge_row() {
        let lp = simple_lp();
        let res = solve_lp(&lp, FEAS_TOL).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.objective - 2.0).abs() < 1e-9);
        assert!((res.primal[0] - 2.0).abs() < 1e-9);
        let dual = res.dual.as_ref().unwrap();
        assert!((dual[0] - 1.0).abs() < 1e-9, "dual of x >= 2 should be 1, got {}", dual[0]);
    }

    #[test]
    fn lp_infeasible_pair() {
        // min 0  s.t.  x >= 2  and  x <= 1
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, 10.0, 0.0, false);
        lp.add_row(vec![(x, 1.0)], Rel::Ge, 2.0);
        lp.add_row(vec![(x, 1.0)], Rel::Le, 1.0);
        let res = solve_lp(&lp, FEAS_TOL).unwrap();
        assert_eq!(res.status, SolveStatus::Infeasible);
    }

    #[test]
    fn lp_duality_holds() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, 4.0, 3.0, false);
        let y = lp.add_var(0.0, 4.0, -5.0, false);
        lp.add_row(vec![(x, 1.0), (y, 2.0)], Rel::Le, 6.0);
        lp.add_row(vec![(x, -1.0), (y, 1.0)], Rel::Le, 2.0);
        let res = solve_lp(&lp, FEAS_TOL).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        let dual_obj = res.dual_objective(&lp).unwrap();
        assert!(
            (res.objective - dual_obj).abs() <= 1e-7 * (1.0 + res.objective.abs()),
            "primal {} vs dual {}",
            res.objective,
            dual_obj
        );
    }

    #[test]
    fn lp_equality_rows_and_negative_lb() {
        // min  x + y  s.t.  x + y = 1,  x - y = 0.5,  x,y in [-5, 5]
        let mut lp = LinearProgram::new();
        let x = lp.add_var(-5.0, 5.0, 1.0, false);
        let y = lp.add_var(-5.0, 5.0, 1.0, false);
        lp.add_row(vec![(x, 1.0), (y, 1.0)], Rel::Eq, 1.0);
        lp.add_row(vec![(x, 1.0), (y, -1.0)], Rel::Eq, 0.5);
        let res = solve_lp(&lp, FEAS_TOL).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.primal[0] - 0.75).abs() < 1e-9);
        assert!((res.primal[1] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn milp_knapsack() {
        // max 3x + 2y  s.t.  x + y <= 1, binary  ->  3
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, 1.0, -3.0, true);
        let y = lp.add_var(0.0, 1.0, -2.0, true);
        lp.add_row(vec![(x, 1.0), (y, 1.0)], Rel::Le, 1.0);
        let res = solve_milp(&lp, &MilpOptions::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.objective + 3.0).abs() < 1e-9);
        assert!((res.primal[x] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn milp_integral_lp_no_branching() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, 10.0, 1.0, true);
        lp.add_row(vec![(x, 1.0)], Rel::Ge, 3.0);
        let res = solve_milp(&lp, &MilpOptions::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.objective - 3.0).abs() < 1e-9);
        assert_eq!(res.iterations, 1);
    }

    #[test]
    fn milp_bound_sandwich() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, 5.0, -1.0, true);
        let y = lp.add_var(0.0, 5.0, -1.0, true);
        lp.add_row(vec![(x, 2.0), (y, 3.0)], Rel::Le, 7.0);
        let milp = solve_milp(&lp, &MilpOptions::default()).unwrap();
        let mut relax = lp.clone();
        relax.integer = vec![false, false];
        let lprel = solve_lp(&relax, FEAS_TOL).unwrap();
        assert!(lprel.objective <= milp.objective + 1e-9);
        assert!(milp.best_bound <= milp.objective + 1e-9);
    }

    #[test]
    fn bilinear_reduces_to_milp_when_one_side_constant() {
        // maximize rho . alpha with rho on a 2-point simplex, alpha in [-1, 1]:
        // optimum 1 (put all mass on either point, alpha = 1).
        let mut lp = LinearProgram::new();
        let r0 = lp.add_var(0.0, 1.0, 0.0, false);
        let r1 = lp.add_var(0.0, 1.0, 0.0, false);
        let a = lp.add_var(-1.0, 1.0, 0.0, false);
        lp.add_row(vec![(r0, 1.0), (r1, 1.0)], Rel::Eq, 1.0);
        let bp = BilinearProgram {
            base: lp,
            // min of negated product = maximize rho.alpha
            products: vec![
                ProductTerm { row: None, a: r0, b: a, coeff: -1.0 },
                ProductTerm { row: None, a: r1, b: a, coeff: -1.0 },
            ],
            group_a: vec![r0, r1],
        };
        let res = solve_bilinear(&bp, &BilinearOptions::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.objective + 1.0).abs() < 1e-6, "got {}", res.objective);
    }

    #[test]
    fn bilinear_deterministic() {
        let mut lp = LinearProgram::new();
        let r = lp.add_var(0.0, 2.0, 1.0, false);
        let b = lp.add_var(-3.0, 3.0, 0.5, false);
        lp.add_row(vec![(r, 1.0), (b, 1.0)], Rel::Ge, -1.0);
        let bp = BilinearProgram {
            base: lp,
            products: vec![ProductTerm { row: Some(0), a: r, b, coeff: 0.7 }],
            group_a: vec![r],
        };
        let o = BilinearOptions { seed: 42, ..Default::default() };
        let r1 = solve_bilinear(&bp, &o).unwrap();
        let r2 = solve_bilinear(&bp, &o).unwrap();
        assert_eq!(r1.objective.to_bits(), r2.objective.to_bits());
        assert_eq!(r1.primal, r2.primal);
    }

    #[test]
    fn dump_is_stable_text() {
        let lp = simple_lp();
        let d = lp.dump();
        assert!(d.contains("MINIMIZE"));
        assert!(d.contains("SUBJECT TO"));
        assert!(d.contains("BOUNDS"));
    }
}
