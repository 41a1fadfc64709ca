//! The benchmark restriction: every adjustable variable, recourse included,
//! follows a linear rule. Finite supports enumerate scenarios through the
//! two-stage machinery with the whole stage declared ruled; budgeted
//! polytopes get the classical robust counterpart, dualizing the inner
//! maximization of each row over the deviation polytope.

use lp_milp_kernel::{solve_milp, LinearProgram, MilpOptions, Rel, SolveStatus};
use msaro_core::{BudgetedPolytope, MsaroModel, UncertaintySet};

use crate::basis::BasisSpec;
use crate::error::PrimalError;
use crate::sym::{LinDelta, RowSym};
use crate::two_stage::{build_two_stage_ldr, solve_two_stage_monolithic, TwoStageLdr};

/// Value of the fully linear-rule restriction in the model's original sense.
/// Integer variables are only admitted at stage 1 (they are here-and-now);
/// adjustable integers are directed to the piecewise-constant rule.
pub fn full_ldr_bound(
    model: &MsaroModel,
    basis: &BasisSpec,
    beta_box: f64,
    milp: &MilpOptions,
) -> Result<f64, PrimalError> {
    for t in 2..=model.horizon() {
        if model.stage(t).n_int > 0 {
            return Err(PrimalError::IntegerVariables { stage: t });
        }
    }
    let ruled = all_state_model(model);
    let ts = build_two_stage_ldr(&ruled, basis.clone())?;
    match &model.uncertainty {
        UncertaintySet::BudgetedPolytope(set) => {
            let lp = robust_counterpart(&ts, set, beta_box)?;
            let res = solve_milp(&lp, milp)?;
            match res.status {
                SolveStatus::Optimal => Ok(ts.sign * res.objective),
                SolveStatus::Infeasible => Err(PrimalError::MasterInfeasible),
                s => Err(PrimalError::Subproblem(format!("robust counterpart ended with {s:?}"))),
            }
        }
        _ => {
            let paths = model
                .uncertainty
                .enumerate()
                .ok_or_else(|| PrimalError::Unsupported("unsupported uncertainty".into()))?;
            let (value, _policy) = solve_two_stage_monolithic(&ts, &paths, beta_box, milp)?;
            Ok(value)
        }
    }
}

/// Clone of the model in which every stage-`t >= 2` variable is declared
/// state, so the two-stage machinery rules all of them.
fn all_state_model(model: &MsaroModel) -> MsaroModel {
    let mut m = model.clone();
    for b in m.stages.iter_mut().skip(1) {
        b.state_count = b.n_vars;
    }
    m
}

/// Robust counterpart of the fully ruled program over a budgeted polytope.
/// Each row `g0(v) + sum_m g_m(v) delta_m <= 0` becomes
/// `g0(v) + budget * lam + sum_m mu_m <= 0`, `lam + mu_m >= g_m(v)`.
fn robust_counterpart(
    ts: &TwoStageLdr,
    set: &BudgetedPolytope,
    beta_box: f64,
) -> Result<LinearProgram, PrimalError> {
    let model = &ts.model;
    let horizon = model.horizon();
    let mut lp = LinearProgram::new();
    // first-stage columns carry the stage-1 cost; the epigraph row below
    // re-adds it, so zero the objective and keep a single epigraph objective
    ts.push_first_stage(&mut lp, beta_box);
    let stage1_obj: Vec<f64> = lp.objective.clone();
    for c in lp.objective.iter_mut() {
        *c = 0.0;
    }

    let quadratic = |what: &str| PrimalError::RandomRecourse { detail: what.to_string() };
    // symbolic rule values per (t, i): depend affinely on delta through the
    // basis, with the rule coefficients as LP columns
    let phi: Vec<Vec<LinDelta>> = (2..=horizon).map(|t| ts.basis.symbolic(t, set)).collect();
    let rule_cols = |t: usize, i: usize| -> Vec<(usize, LinDelta)> {
        phi[t - 2]
            .iter()
            .enumerate()
            .map(|(k, p)| (ts.beta_index(t, i, k), p.clone()))
            .collect()
    };

    let mut rows_sym: Vec<RowSym> = Vec::new();
    // worst-case epigraph: total cost(delta, v) - z <= 0
    let mut epi = RowSym::new();
    for (j, &c) in stage1_obj.iter().enumerate() {
        if c != 0.0 {
            epi.add_col(j, LinDelta::constant(c));
        }
    }
    for t in 2..=horizon {
        let b = model.stage(t);
        for (i, _c, e) in &b.cost.entries {
            let data = LinDelta::from_expr(e, set);
            for (col, p) in rule_cols(t, *i) {
                let term = RowSym::product(&data, &p).map_err(|_| quadratic("cost term"))?;
                epi.add_col(col, term.scaled(ts.sign));
            }
        }
    }
    // model rows and rule boxes
    for t in 2..=horizon {
        let b = model.stage(t);
        let mut push_block = |mat: &msaro_core::AffineMatrix,
                              link: Option<&msaro_core::AffineMatrix>,
                              rhs: &msaro_core::AffineMatrix|
         -> Result<(), PrimalError> {
            for r in 0..mat.rows {
                let mut row = RowSym::new();
                for (_, i, e) in mat.entries.iter().filter(|(rr, _, _)| *rr == r) {
                    let data = LinDelta::from_expr(e, set);
                    for (col, p) in rule_cols(t, *i) {
                        let term =
                            RowSym::product(&data, &p).map_err(|_| quadratic("row coefficient"))?;
                        row.add_col(col, term);
                    }
                }
                if let Some(link) = link {
                    for (_, i, e) in link.entries.iter().filter(|(rr, _, _)| *rr == r) {
                        let data = LinDelta::from_expr(e, set);
                        if t == 2 {
                            row.add_col(*i, data);
                        } else {
                            for (col, p) in rule_cols(t - 1, *i) {
                                let term = RowSym::product(&data, &p)
                                    .map_err(|_| quadratic("link coefficient"))?;
                                row.add_col(col, term);
                            }
                        }
                    }
                }
                for (_, _, e) in rhs.entries.iter().filter(|(rr, _, _)| *rr == r) {
                    row.rest.add_scaled(&LinDelta::from_expr(e, set), -1.0);
                }
                rows_sym.push(row);
            }
            Ok(())
        };
        push_block(&b.state_rows, b.link.as_ref(), &b.state_rhs)?;
        push_block(&b.recourse_rows, None, &b.recourse_rhs)?;
        for i in 0..b.n_vars {
            let mut up = RowSym::new();
            for (col, p) in rule_cols(t, i) {
                up.add_col(col, p);
            }
            let mut down = RowSym::new();
            for (col, p) in rule_cols(t, i) {
                down.add_col(col, p.scaled(-1.0));
            }
            up.rest = LinDelta::constant(-b.upper[i]);
            down.rest = LinDelta::constant(b.lower[i]);
            rows_sym.push(up);
            rows_sym.push(down);
        }
    }

    let z = {
        // epigraph bounds from the coefficient ranges over the column boxes
        let (mut lo, mut hi) = (0.0_f64, 0.0_f64);
        for (col, ld) in &epi.cols {
            let (cl, ch) = ld.range();
            let worst = cl.abs().max(ch.abs());
            let cap = lp.lower[*col].abs().max(lp.upper[*col].abs());
            lo -= worst * cap;
            hi += worst * cap;
        }
        lp.add_var(lo - 1.0, hi + 1.0, 1.0, false)
    };
    let mut epi_done = epi;
    epi_done.add_col(z, LinDelta::constant(-1.0));
    rows_sym.push(epi_done);

    // dualize each row over the polytope
    let dim = set.dim_total();
    for row in rows_sym {
        // per-component coefficient functions g_m(v)
        let mut per_comp: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        let mut per_comp_const = vec![0.0_f64; dim];
        let mut base: Vec<(usize, f64)> = Vec::new();
        for (col, ld) in &row.cols {
            if ld.c0 != 0.0 {
                base.push((*col, ld.c0));
            }
            for &(k, c) in &ld.terms {
                per_comp[k].push((*col, c));
            }
        }
        for &(k, c) in &row.rest.terms {
            per_comp_const[k] += c;
        }
        let active: Vec<usize> = (0..dim)
            .filter(|&k| per_comp_const[k] != 0.0 || !per_comp[k].is_empty())
            .collect();
        if active.is_empty() {
            base.sort_by_key(|&(c, _)| c);
            lp.add_row(base, Rel::Le, -row.rest.c0);
            continue;
        }
        // bounds on the dual multipliers from the coefficient ranges
        let mut g_hi = 0.0_f64;
        for &k in &active {
            let mut h = per_comp_const[k];
            for &(col, c) in &per_comp[k] {
                h += (c * lp.lower[col]).max(c * lp.upper[col]);
            }
            g_hi = g_hi.max(h);
        }
        let cap = g_hi.max(0.0) + 1.0;
        let lam = lp.add_var(0.0, cap, 0.0, false);
        let mut main = base;
        main.push((lam, set.budget));
        for &k in &active {
            let mu = lp.add_var(0.0, cap, 0.0, false);
            main.push((mu, 1.0));
            // g_m(v) - lam - mu_m <= 0
            let mut side: Vec<(usize, f64)> = per_comp[k].clone();
            side.push((lam, -1.0));
            side.push((mu, -1.0));
            lp.add_row(side, Rel::Le, -per_comp_const[k]);
        }
        lp.add_row(main, Rel::Le, -row.rest.c0);
    }
    Ok(lp)
}
