//! Monolithic adversarial subproblems over a budgeted polytope. The inner
//! recourse LP is replaced by its KKT system; complementary slackness is
//! linearized with big-M binaries, every M derived from explicit bounds. Two
//! oracles: the optimality problem maximizes the policy cost over the
//! polytope, and the feasibility problem maximizes the minimum constraint
//! violation to certify scenarios with empty recourse sets.

use lp_milp_kernel::{solve_milp, LinearProgram, Rel, SolveStatus};
use msaro_core::BudgetedPolytope;

use crate::ccg::CcgOptions;
use crate::error::PrimalError;
use crate::sym::LinDelta;
use crate::two_stage::{SymbolicInner, TwoStageLdr};

/// Exact maximum of a linear function of the deviations over the budgeted
/// polytope: fill the largest positive coefficients until the budget is
/// spent, one coordinate fractionally.
fn greedy_max(ld: &LinDelta, dim: usize, budget: f64) -> (f64, Vec<f64>) {
    let mut coeffs: Vec<(usize, f64)> =
        ld.terms.iter().copied().filter(|&(_, c)| c > 0.0).collect();
    coeffs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut delta = vec![0.0; dim];
    let mut left = budget;
    let mut value = ld.c0;
    for (k, c) in coeffs {
        if left <= 0.0 {
            break;
        }
        let step = left.min(1.0);
        delta[k] = step;
        value += c * step;
        left -= step;
    }
    (value, delta)
}

fn delta_columns(lp: &mut LinearProgram, set: &BudgetedPolytope) -> Vec<usize> {
    let dim = set.dim_total();
    let cols: Vec<usize> = (0..dim).map(|_| lp.add_var(0.0, 1.0, 0.0, false)).collect();
    if set.budget < dim as f64 {
        lp.add_row(cols.iter().map(|&c| (c, 1.0)).collect(), Rel::Le, set.budget);
    }
    cols
}

fn guard_rows(lp: &mut LinearProgram, inner: &SymbolicInner, delta: &[usize]) {
    for g in &inner.state_guards {
        let coeffs: Vec<(usize, f64)> = g.terms.iter().map(|&(k, c)| (delta[k], c)).collect();
        lp.add_row(coeffs, Rel::Le, -g.c0);
    }
}

/// Row ranges used to size the big-M constants: rhs range `(h_lo, h_hi)`
/// over the deviation box and body range `(g_lo, g_hi)` over the variable
/// boxes.
fn row_ranges(inner: &SymbolicInner, row: usize) -> RowRange {
    let (cols, h) = &inner.rows[row];
    let (h_lo, h_hi) = h.range();
    let mut g_lo = 0.0;
    let mut g_hi = 0.0;
    for &(j, c) in cols {
        let (l, u) = inner.rec_bounds[j];
        let (a, b) = (c * l, c * u);
        g_lo += a.min(b);
        g_hi += a.max(b);
    }
    RowRange { h_lo, h_hi, g_lo, g_hi }
}

struct RowRange {
    h_lo: f64,
    h_hi: f64,
    g_lo: f64,
    g_hi: f64,
}

/// Worst-case policy cost over the polytope: returns the canonical
/// second-stage value (ruled-variable stage costs plus optimal recourse cost)
/// and the maximizing deviation vector.
pub fn adversarial_optimality(
    ts: &TwoStageLdr,
    first: &[f64],
    set: &BudgetedPolytope,
    opts: &CcgOptions,
) -> Result<(f64, Vec<f64>), PrimalError> {
    let inner = ts.symbolic_inner(first, set)?;
    let n_rows = inner.rows.len();
    let mut lp = LinearProgram::new();
    let delta = delta_columns(&mut lp, set);
    let x: Vec<usize> = inner
        .rec_bounds
        .iter()
        .map(|&(l, u)| lp.add_var(l, u, 0.0, false))
        .collect();
    let pi: Vec<usize> = (0..n_rows).map(|_| lp.add_var(0.0, opts.dual_box, 0.0, false)).collect();
    let ell: Vec<usize> = (0..n_rows).map(|_| lp.add_var(0.0, 1.0, 0.0, true)).collect();

    guard_rows(&mut lp, &inner, &delta);

    // primal feasibility: g x - h(delta) <= 0
    for (cols, h) in &inner.rows {
        let mut coeffs: Vec<(usize, f64)> = cols.iter().map(|&(j, c)| (x[j], c)).collect();
        for &(k, c) in &h.terms {
            coeffs.push((delta[k], -c));
        }
        lp.add_row(coeffs, Rel::Le, h.c0);
    }
    // dual stationarity: sum_r g_rj pi_r = -obj_j
    let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); inner.n_rec];
    for (r, (cols, _)) in inner.rows.iter().enumerate() {
        for &(j, c) in cols {
            per_col[j].push((pi[r], c));
        }
    }
    for j in 0..inner.n_rec {
        lp.add_row(per_col[j].clone(), Rel::Eq, -inner.obj[j]);
    }
    // complementary slackness, linearized from the row ranges
    for (r, (cols, h)) in inner.rows.iter().enumerate() {
        let rr = row_ranges(&inner, r);
        // pi_r <= dual_box * (1 - ell_r)
        lp.add_row(vec![(pi[r], 1.0), (ell[r], opts.dual_box)], Rel::Le, opts.dual_box);
        // h(delta) - g x <= M * ell_r
        let m_r = (rr.h_hi - rr.g_lo).max(0.0) + 1.0;
        let mut coeffs: Vec<(usize, f64)> = cols.iter().map(|&(j, c)| (x[j], -c)).collect();
        for &(k, c) in &h.terms {
            coeffs.push((delta[k], c));
        }
        coeffs.push((ell[r], -m_r));
        lp.add_row(coeffs, Rel::Le, -h.c0);
    }
    // maximize state_cost(delta) + obj . x  ->  minimize the negation
    for &(k, c) in &inner.state_cost.terms {
        lp.objective[delta[k]] -= c;
    }
    for j in 0..inner.n_rec {
        lp.objective[x[j]] -= inner.obj[j];
    }

    let res = solve_milp(&lp, &opts.milp)?;
    match res.status {
        SolveStatus::Optimal => {
            let d: Vec<f64> = delta.iter().map(|&c| res.primal[c].clamp(0.0, 1.0)).collect();
            Ok((inner.state_cost.c0 - res.objective, d))
        }
        SolveStatus::Infeasible => Err(PrimalError::Subproblem(
            "adversarial problem infeasible: no policy-feasible scenario remains".into(),
        )),
        s => Err(PrimalError::Subproblem(format!("adversarial solve ended with {s:?}"))),
    }
}

/// Feasibility oracle. First the state-box guards are maximized exactly by
/// the greedy rule; then the recourse system's minimum total violation is
/// maximized through its own KKT system (the violation duals live in `[0,1]`
/// by construction). Returns a certifying deviation vector if the worst
/// violation exceeds the feasibility tolerance.
pub fn adversarial_feasibility(
    ts: &TwoStageLdr,
    first: &[f64],
    set: &BudgetedPolytope,
    opts: &CcgOptions,
) -> Result<Option<Vec<f64>>, PrimalError> {
    let inner = ts.symbolic_inner(first, set)?;
    let dim = set.dim_total();
    for g in &inner.state_guards {
        let (value, delta) = greedy_max(g, dim, set.budget);
        if value > 1e-6 {
            return Ok(Some(delta));
        }
    }

    let n_rows = inner.rows.len();
    let mut lp = LinearProgram::new();
    let delta = delta_columns(&mut lp, set);
    let x: Vec<usize> = inner
        .rec_bounds
        .iter()
        .map(|&(l, u)| lp.add_var(l, u, 0.0, false))
        .collect();
    // violation caps from the row ranges
    let caps: Vec<f64> = (0..n_rows)
        .map(|r| {
            let rr = row_ranges(&inner, r);
            (rr.g_hi - rr.h_lo).max(0.0) + 1.0
        })
        .collect();
    let v: Vec<usize> =
        caps.iter().map(|&cap| lp.add_var(0.0, cap, -1.0, false)).collect(); // maximize sum v
    let pi: Vec<usize> = (0..n_rows).map(|_| lp.add_var(0.0, 1.0, 0.0, false)).collect();
    let ell: Vec<usize> = (0..n_rows).map(|_| lp.add_var(0.0, 1.0, 0.0, true)).collect();
    let ell_v: Vec<usize> = (0..n_rows).map(|_| lp.add_var(0.0, 1.0, 0.0, true)).collect();

    guard_rows(&mut lp, &inner, &delta);

    for (r, (cols, h)) in inner.rows.iter().enumerate() {
        // relaxed primal: g x - v_r - h(delta) <= 0
        let mut coeffs: Vec<(usize, f64)> = cols.iter().map(|&(j, c)| (x[j], c)).collect();
        coeffs.push((v[r], -1.0));
        for &(k, c) in &h.terms {
            coeffs.push((delta[k], -c));
        }
        lp.add_row(coeffs, Rel::Le, h.c0);
    }
    // stationarity in x: sum_r g_rj pi_r = 0
    let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); inner.n_rec];
    for (r, (cols, _)) in inner.rows.iter().enumerate() {
        for &(j, c) in cols {
            per_col[j].push((pi[r], c));
        }
    }
    for j in 0..inner.n_rec {
        if !per_col[j].is_empty() {
            lp.add_row(per_col[j].clone(), Rel::Eq, 0.0);
        }
    }
    for (r, (cols, h)) in inner.rows.iter().enumerate() {
        let rr = row_ranges(&inner, r);
        // slackness of the relaxed row: pi_r (h + v - g x) = 0
        lp.add_row(vec![(pi[r], 1.0), (ell[r], 1.0)], Rel::Le, 1.0);
        let m_r = (rr.h_hi - rr.g_lo).max(0.0) + caps[r] + 1.0;
        let mut coeffs: Vec<(usize, f64)> = cols.iter().map(|&(j, c)| (x[j], -c)).collect();
        coeffs.push((v[r], 1.0));
        for &(k, c) in &h.terms {
            coeffs.push((delta[k], c));
        }
        coeffs.push((ell[r], -m_r));
        lp.add_row(coeffs, Rel::Le, -h.c0);
        // slackness of v_r >= 0: (1 - pi_r) v_r = 0
        lp.add_row(vec![(v[r], 1.0), (ell_v[r], -caps[r])], Rel::Le, 0.0);
        lp.add_row(vec![(ell_v[r], 1.0), (pi[r], -1.0)], Rel::Le, 0.0);
    }

    let res = solve_milp(&lp, &opts.milp)?;
    match res.status {
        SolveStatus::Optimal => {
            let worst = -res.objective;
            if worst > 1e-6 {
                let d: Vec<f64> = delta.iter().map(|&c| res.primal[c].clamp(0.0, 1.0)).collect();
                Ok(Some(d))
            } else {
                Ok(None)
            }
        }
        SolveStatus::Infeasible => Ok(None), // guards exclude every scenario: nothing to certify
        s => Err(PrimalError::Subproblem(format!("feasibility oracle ended with {s:?}"))),
    }
}
