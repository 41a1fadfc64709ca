//! The two-stage restriction: state variables at stages `2..=T` follow a
//! linear rule over the stage basis while recourse variables stay fully
//! adjustable per scenario. This module owns the column layout of the rule
//! coefficients and materializes scenario blocks for the master problems,
//! the monolithic solve, and the per-scenario inner problems.

use lp_milp_kernel::{LinearProgram, Rel};
use msaro_core::{BudgetedPolytope, MsaroModel, ScenarioPath};
use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::error::PrimalError;
use crate::sym::{LinDelta, RowSym};

#[derive(Debug, Clone)]
pub struct TwoStageLdr {
    pub model: MsaroModel,
    pub basis: BasisSpec,
    /// Canonical minimization sign of the model.
    pub sign: f64,
    /// Basis width `K_t` keyed by `t - 2`.
    pub widths: Vec<usize>,
    /// Rule-coefficient slot of state variable `(t, i)` inside the beta
    /// block, keyed `[t - 2][i]`.
    beta_slot: Vec<Vec<usize>>,
    pub n_beta: usize,
    pub n_x1: usize,
}

/// First-stage decision in flat form: `[x1 | beta]`.
pub type FirstStage = Vec<f64>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoStageLdrPolicy {
    pub x1: Vec<f64>,
    /// `beta[t - 2][i][k]` for state variable `i` of stage `t`.
    pub beta: Vec<Vec<Vec<f64>>>,
    pub basis: BasisSpec,
}

impl TwoStageLdrPolicy {
    /// Rule value of state variable `(t, i)` at a history; bit-for-bit
    /// reproducible from the stored coefficients.
    pub fn state_value(&self, t: usize, i: usize, prefix: &ScenarioPath) -> Result<f64, PrimalError> {
        let phi = self.basis.eval(t, prefix)?;
        Ok(phi.iter().zip(&self.beta[t - 2][i]).map(|(p, b)| p * b).sum())
    }
}

/// Column maps of a built master (or monolithic) program.
pub struct MasterMap {
    pub beta0: usize,
    /// `rec[s][t - 2]`: first recourse column of scenario `s`, stage `t`.
    pub rec: Vec<Vec<usize>>,
    pub eta: usize,
}

pub fn build_two_stage_ldr(model: &MsaroModel, basis: BasisSpec) -> Result<TwoStageLdr, PrimalError> {
    let horizon = model.horizon();
    basis.validate(horizon)?;
    for t in 2..=horizon {
        let b = model.stage(t);
        if (0..b.state_count).any(|i| b.is_integer(i)) {
            return Err(PrimalError::IntegerState { stage: t });
        }
    }
    let dims = model.uncertainty.dims();
    let mut widths = Vec::new();
    let mut beta_slot = Vec::new();
    let mut n_beta = 0usize;
    for t in 2..=horizon {
        let k = basis.width(t, &dims);
        widths.push(k);
        let b = model.stage(t);
        let mut slots = Vec::with_capacity(b.state_count);
        for _ in 0..b.state_count {
            slots.push(n_beta);
            n_beta += k;
        }
        beta_slot.push(slots);
    }
    Ok(TwoStageLdr {
        sign: model.sense.canonical_sign(),
        n_x1: model.stage(1).n_vars,
        model: model.clone(),
        basis,
        widths,
        beta_slot,
        n_beta,
    })
}

impl TwoStageLdr {
    pub fn first_stage_len(&self) -> usize {
        self.n_x1 + self.n_beta
    }

    pub fn width(&self, t: usize) -> usize {
        self.widths[t - 2]
    }

    /// Flat first-stage index of rule coefficient `(t, i, k)`.
    pub fn beta_index(&self, t: usize, i: usize, k: usize) -> usize {
        self.n_x1 + self.beta_slot[t - 2][i] + k
    }

    pub fn policy_from(&self, first: &[f64]) -> TwoStageLdrPolicy {
        let mut beta = Vec::new();
        for t in 2..=self.model.horizon() {
            let b = self.model.stage(t);
            let k = self.width(t);
            beta.push(
                (0..b.state_count)
                    .map(|i| (0..k).map(|kk| first[self.beta_index(t, i, kk)]).collect())
                    .collect(),
            );
        }
        TwoStageLdrPolicy { x1: first[..self.n_x1].to_vec(), beta, basis: self.basis.clone() }
    }

    /// Numeric rule value of state `(t, i)` under `first` at a history.
    pub fn state_value(&self, first: &[f64], t: usize, i: usize, prefix: &ScenarioPath) -> Result<f64, PrimalError> {
        if t == 1 {
            return Ok(first[i]);
        }
        let phi = self.basis.eval(t, prefix)?;
        Ok(phi
            .iter()
            .enumerate()
            .map(|(k, p)| p * first[self.beta_index(t, i, k)])
            .sum())
    }

    fn stage1_prefix(&self) -> ScenarioPath {
        ScenarioPath::new(vec![vec![]])
    }

    /// Canonical stage-1 cost of a first-stage vector.
    pub fn stage1_cost(&self, first: &[f64]) -> f64 {
        let data = self
            .model
            .evaluate_stage_data(1, &self.stage1_prefix())
            .expect("stage 1 is deterministic");
        self.sign * data.cost.iter().zip(first).map(|(c, x)| c * x).sum::<f64>()
    }

    /// Append stage-1 variables (columns `0..n_x1`) and their rows.
    pub fn push_first_stage(&self, lp: &mut LinearProgram, beta_box: f64) {
        let b1 = self.model.stage(1);
        let data = self.model.evaluate_stage_data(1, &self.stage1_prefix()).unwrap();
        for i in 0..b1.n_vars {
            lp.add_var(b1.lower[i], b1.upper[i], self.sign * data.cost[i], b1.is_integer(i));
        }
        for t in 2..=self.model.horizon() {
            let b = self.model.stage(t);
            for _ in 0..b.state_count {
                for _ in 0..self.width(t) {
                    lp.add_var(-beta_box, beta_box, 0.0, false);
                }
            }
        }
        for r in 0..data.state_rows.rows {
            let coeffs: Vec<(usize, f64)> = data.state_rows.row_coeffs(r).collect();
            lp.add_row(coeffs, Rel::Le, data.state_rhs[r]);
        }
        for r in 0..data.recourse_rows.rows {
            let coeffs: Vec<(usize, f64)> = data.recourse_rows.row_coeffs(r).collect();
            lp.add_row(coeffs, Rel::Le, data.recourse_rhs[r]);
        }
    }

    /// Append the recourse copies and constraint block of one scenario.
    /// Returns the epigraph cost terms of the scenario (canonical sense).
    pub fn push_scenario(
        &self,
        lp: &mut LinearProgram,
        path: &ScenarioPath,
        rec_cols: &mut Vec<usize>,
    ) -> Result<Vec<(usize, f64)>, PrimalError> {
        let horizon = self.model.horizon();
        // recourse columns per stage
        rec_cols.clear();
        for t in 2..=horizon {
            let b = self.model.stage(t);
            rec_cols.push(lp.n_vars());
            for i in b.recourse_indices() {
                lp.add_var(b.lower[i], b.upper[i], 0.0, b.is_integer(i));
            }
        }
        let phi: Vec<Vec<f64>> =
            (2..=horizon).map(|t| self.basis.eval(t, path)).collect::<Result<_, _>>()?;
        // column of a model variable (t, i) inside this lp; state variables
        // expand into their rule coefficients
        let mut epi: Vec<(usize, f64)> = Vec::new();
        for t in 2..=horizon {
            let b = self.model.stage(t);
            let data = self.model.evaluate_stage_data(t, path)?;
            let expand = |i: usize, coeff: f64, out: &mut Vec<(usize, f64)>| {
                if i < b.state_count {
                    for (k, p) in phi[t - 2].iter().enumerate() {
                        out.push((self.beta_index(t, i, k), coeff * p));
                    }
                } else {
                    out.push((rec_cols[t - 2] + (i - b.state_count), coeff));
                }
            };
            let prev = self.model.stage(t - 1);
            let expand_prev = |i: usize, coeff: f64, out: &mut Vec<(usize, f64)>| {
                if t == 2 {
                    out.push((i, coeff)); // stage-1 decision column
                } else if i < prev.state_count {
                    for (k, p) in phi[t - 3].iter().enumerate() {
                        out.push((self.beta_index(t - 1, i, k), coeff * p));
                    }
                } else {
                    out.push((rec_cols[t - 3] + (i - prev.state_count), coeff));
                }
            };

            for r in 0..data.state_rows.rows {
                let mut coeffs = Vec::new();
                for (i, c) in data.state_rows.row_coeffs(r) {
                    expand(i, c, &mut coeffs);
                }
                if let Some(link) = &data.link {
                    for (i, c) in link.row_coeffs(r) {
                        expand_prev(i, c, &mut coeffs);
                    }
                }
                lp.add_row(coeffs, Rel::Le, data.state_rhs[r]);
            }
            for r in 0..data.recourse_rows.rows {
                let mut coeffs = Vec::new();
                for (i, c) in data.recourse_rows.row_coeffs(r) {
                    expand(i, c, &mut coeffs);
                }
                lp.add_row(coeffs, Rel::Le, data.recourse_rhs[r]);
            }
            // the rule value must respect the state variable's own box
            for i in 0..b.state_count {
                let mut up = Vec::new();
                expand(i, 1.0, &mut up);
                let down: Vec<(usize, f64)> = up.iter().map(|&(c, v)| (c, -v)).collect();
                lp.add_row(up, Rel::Le, b.upper[i]);
                lp.add_row(down, Rel::Le, -b.lower[i]);
            }
            for (i, &c) in data.cost.iter().enumerate() {
                if c != 0.0 {
                    expand(i, self.sign * c, &mut epi);
                }
            }
        }
        Ok(epi)
    }

    /// Master over the significant scenarios (epigraph rows only for the
    /// feasible subset). With every scenario of a finite set included and
    /// marked feasible this is the monolithic two-stage solve.
    pub fn build_master(
        &self,
        scenarios: &[ScenarioPath],
        feasible: &[bool],
        beta_box: f64,
    ) -> Result<(LinearProgram, MasterMap), PrimalError> {
        let mut lp = LinearProgram::new();
        self.push_first_stage(&mut lp, beta_box);
        let mut rec = Vec::with_capacity(scenarios.len());
        let mut epis = Vec::with_capacity(scenarios.len());
        for path in scenarios {
            let mut cols = Vec::new();
            let epi = self.push_scenario(&mut lp, path, &mut cols)?;
            rec.push(cols);
            epis.push(epi);
        }
        // epigraph variable bounds from the cost ranges of all scenarios
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for epi in &epis {
            let (mut l, mut h) = (0.0, 0.0);
            for &(col, c) in epi {
                let (a, b) = (c * lp.lower[col], c * lp.upper[col]);
                l += a.min(b);
                h += a.max(b);
            }
            lo = lo.min(l);
            hi = hi.max(h);
        }
        if !lo.is_finite() {
            lo = -1.0;
            hi = 1.0;
        }
        let eta = lp.add_var(lo - 1.0, hi + 1.0, 1.0, false);
        for (s, epi) in epis.into_iter().enumerate() {
            if feasible[s] {
                let mut coeffs = epi;
                coeffs.push((eta, -1.0));
                lp.add_row(coeffs, Rel::Le, 0.0);
            }
        }
        Ok((lp, MasterMap { beta0: self.n_x1, rec, eta }))
    }

    /// Inner problem of one scenario at a fixed first stage: recourse columns
    /// only. Returns the program, its canonical state-cost constant, and the
    /// worst violation of the rule values against the state boxes (a strictly
    /// positive violation certifies the scenario infeasible for this rule).
    pub fn build_inner(
        &self,
        first: &[f64],
        path: &ScenarioPath,
    ) -> Result<(LinearProgram, f64, f64), PrimalError> {
        let horizon = self.model.horizon();
        let mut lp = LinearProgram::new();
        let mut rec0 = Vec::new();
        for t in 2..=horizon {
            let b = self.model.stage(t);
            rec0.push(lp.n_vars());
            for i in b.recourse_indices() {
                lp.add_var(b.lower[i], b.upper[i], 0.0, b.is_integer(i));
            }
        }
        let mut state_vals: Vec<Vec<f64>> = Vec::new(); // [t-2][i]
        for t in 2..=horizon {
            let b = self.model.stage(t);
            state_vals.push(
                (0..b.state_count)
                    .map(|i| self.state_value(first, t, i, path))
                    .collect::<Result<_, _>>()?,
            );
        }
        let mut bound_violation: f64 = 0.0;
        let mut state_cost = 0.0;
        for t in 2..=horizon {
            let b = self.model.stage(t);
            let data = self.model.evaluate_stage_data(t, path)?;
            for i in 0..b.state_count {
                let v = state_vals[t - 2][i];
                bound_violation = bound_violation.max(v - b.upper[i]).max(b.lower[i] - v);
                state_cost += self.sign * data.cost[i] * v;
            }
            for i in b.recourse_indices() {
                let c = data.cost[i];
                if c != 0.0 {
                    lp.objective[rec0[t - 2] + (i - b.state_count)] += self.sign * c;
                }
            }
            let prev = self.model.stage(t - 1);
            for r in 0..data.state_rows.rows {
                let mut coeffs = Vec::new();
                let mut rhs = data.state_rhs[r];
                for (i, c) in data.state_rows.row_coeffs(r) {
                    if i < b.state_count {
                        rhs -= c * state_vals[t - 2][i];
                    } else {
                        coeffs.push((rec0[t - 2] + (i - b.state_count), c));
                    }
                }
                if let Some(link) = &data.link {
                    for (i, c) in link.row_coeffs(r) {
                        if t == 2 {
                            rhs -= c * first[i];
                        } else if i < prev.state_count {
                            rhs -= c * state_vals[t - 3][i];
                        } else {
                            coeffs.push((rec0[t - 3] + (i - prev.state_count), c));
                        }
                    }
                }
                lp.add_row(coeffs, Rel::Le, rhs);
            }
            for r in 0..data.recourse_rows.rows {
                let mut coeffs = Vec::new();
                let mut rhs = data.recourse_rhs[r];
                for (i, c) in data.recourse_rows.row_coeffs(r) {
                    if i < b.state_count {
                        rhs -= c * state_vals[t - 2][i];
                    } else {
                        coeffs.push((rec0[t - 2] + (i - b.state_count), c));
                    }
                }
                lp.add_row(coeffs, Rel::Le, rhs);
            }
        }
        Ok((lp, state_cost, bound_violation))
    }

    /// Rows of the inner problem as functions of the deviation vector, for
    /// the monolithic adversarial subproblem over a budgeted polytope.
    /// Requires fixed recourse: every coefficient on a decision variable must
    /// be deterministic, only right-hand sides (and the basis) may move.
    pub fn symbolic_inner(
        &self,
        first: &[f64],
        set: &BudgetedPolytope,
    ) -> Result<SymbolicInner, PrimalError> {
        let horizon = self.model.horizon();
        let mut n_rec = 0usize;
        let mut rec0 = Vec::new();
        let mut rec_bounds = Vec::new();
        for t in 2..=horizon {
            let b = self.model.stage(t);
            rec0.push(n_rec);
            for i in b.recourse_indices() {
                if b.is_integer(i) {
                    return Err(PrimalError::IntegerVariables { stage: t });
                }
                rec_bounds.push((b.lower[i], b.upper[i]));
                n_rec += 1;
            }
        }
        // rule values as functions of delta
        let mut state_vals: Vec<Vec<LinDelta>> = Vec::new();
        for t in 2..=horizon {
            let b = self.model.stage(t);
            let phi = self.basis.symbolic(t, set);
            state_vals.push(
                (0..b.state_count)
                    .map(|i| {
                        let mut v = LinDelta::constant(0.0);
                        for (k, p) in phi.iter().enumerate() {
                            v.add_scaled(p, first[self.beta_index(t, i, k)]);
                        }
                        v
                    })
                    .collect(),
            );
        }
        let quadratic = |what: &str| PrimalError::RandomRecourse { detail: what.to_string() };

        let mut rows: Vec<(Vec<(usize, f64)>, LinDelta)> = Vec::new();
        let mut state_guards: Vec<LinDelta> = Vec::new();
        let mut obj = vec![0.0_f64; n_rec];
        let mut state_cost = LinDelta::constant(0.0);
        for t in 2..=horizon {
            let b = self.model.stage(t);
            let prev = self.model.stage(t - 1);
            // cost
            for (r, _c, e) in &b.cost.entries {
                let coeff = LinDelta::from_expr(e, set);
                if *r < b.state_count {
                    let term = RowSym::product(&coeff, &state_vals[t - 2][*r])
                        .map_err(|_| quadratic("stage cost on a state variable"))?;
                    state_cost.add_scaled(&term, self.sign);
                } else {
                    if !coeff.is_constant() {
                        return Err(quadratic("stage cost on a recourse variable"));
                    }
                    obj[rec0[t - 2] + (*r - b.state_count)] += self.sign * coeff.c0;
                }
            }
            // a generic row: cols on recourse, everything else into rest
            let mut assemble = |mat: &msaro_core::AffineMatrix,
                                link: Option<&msaro_core::AffineMatrix>,
                                rhs: &msaro_core::AffineMatrix|
             -> Result<(), PrimalError> {
                for r in 0..mat.rows {
                    let mut row = RowSym::new();
                    for (i, e) in mat.entries.iter().filter(|(rr, _, _)| *rr == r).map(|(_, cc, e)| (*cc, e)) {
                        let coeff = LinDelta::from_expr(e, set);
                        if i < b.state_count {
                            let term = RowSym::product(&coeff, &state_vals[t - 2][i])
                                .map_err(|_| quadratic("state coefficient"))?;
                            row.rest.add_scaled(&term, 1.0);
                        } else {
                            if !coeff.is_constant() {
                                return Err(quadratic("recourse coefficient"));
                            }
                            row.add_col(rec0[t - 2] + (i - b.state_count), coeff);
                        }
                    }
                    if let Some(link) = link {
                        for (i, e) in link.entries.iter().filter(|(rr, _, _)| *rr == r).map(|(_, cc, e)| (*cc, e)) {
                            let coeff = LinDelta::from_expr(e, set);
                            if t == 2 {
                                row.rest.add_scaled(&coeff.scaled(first[i]), 1.0);
                            } else if i < prev.state_count {
                                let term = RowSym::product(&coeff, &state_vals[t - 3][i])
                                    .map_err(|_| quadratic("link coefficient"))?;
                                row.rest.add_scaled(&term, 1.0);
                            } else {
                                if !coeff.is_constant() {
                                    return Err(quadratic("link coefficient on recourse"));
                                }
                                row.add_col(rec0[t - 3] + (i - prev.state_count), coeff);
                            }
                        }
                    }
                    let mut rhs_ld = LinDelta::constant(0.0);
                    for (rr, _cc, e) in &rhs.entries {
                        if *rr == r {
                            rhs_ld.add_scaled(&LinDelta::from_expr(e, set), 1.0);
                        }
                    }
                    // g x + rest <= rhs  ->  g x <= rhs - rest
                    rhs_ld.add_scaled(&row.rest, -1.0);
                    let cols: Vec<(usize, f64)> =
                        row.cols.iter().map(|(c, ld)| (*c, ld.c0)).collect();
                    rows.push((cols, rhs_ld));
                }
                Ok(())
            };
            let data = b;
            assemble(&data.state_rows, data.link.as_ref(), &data.state_rhs)?;
            assemble(&data.recourse_rows, None, &data.recourse_rhs)?;
            // state boxes become pure-delta guards
            for i in 0..b.state_count {
                let mut up = state_vals[t - 2][i].clone();
                up.c0 -= b.upper[i];
                state_guards.push(up);
                let mut down = state_vals[t - 2][i].scaled(-1.0);
                down.c0 += b.lower[i];
                state_guards.push(down);
            }
        }
        // recourse variable boxes as rows so the inner variables are free
        for (j, &(l, u)) in rec_bounds.iter().enumerate() {
            rows.push((vec![(j, 1.0)], LinDelta::constant(u)));
            rows.push((vec![(j, -1.0)], LinDelta::constant(-l)));
        }
        Ok(SymbolicInner { rows, state_guards, obj, state_cost, n_rec, rec_bounds })
    }
}

/// The adversarial inner problem with the first stage substituted:
/// `min obj . x  s.t.  rows: g x <= h(delta)`, plus pure-delta guard rows
/// `guard(delta) <= 0` from the state boxes, and the canonical state-cost
/// term that joins the objective of the outer maximization.
pub struct SymbolicInner {
    pub rows: Vec<(Vec<(usize, f64)>, LinDelta)>,
    pub state_guards: Vec<LinDelta>,
    pub obj: Vec<f64>,
    pub state_cost: LinDelta,
    pub n_rec: usize,
    pub rec_bounds: Vec<(f64, f64)>,
}

/// Direct monolithic solve of the two-stage restriction over a finite
/// scenario set; the reference the constraint-generation loop is checked
/// against.
pub fn solve_two_stage_monolithic(
    ts: &TwoStageLdr,
    scenarios: &[ScenarioPath],
    beta_box: f64,
    milp: &lp_milp_kernel::MilpOptions,
) -> Result<(f64, TwoStageLdrPolicy), PrimalError> {
    let feas = vec![true; scenarios.len()];
    let (lp, _map) = ts.build_master(scenarios, &feas, beta_box)?;
    let res = lp_milp_kernel::solve_milp(&lp, milp)?;
    match res.status {
        lp_milp_kernel::SolveStatus::Optimal => {
            let first = res.primal[..ts.first_stage_len()].to_vec();
            Ok((ts.sign * res.objective, ts.policy_from(&first)))
        }
        lp_milp_kernel::SolveStatus::Infeasible => Err(PrimalError::MasterInfeasible),
        s => Err(PrimalError::Subproblem(format!("monolithic solve ended with {s:?}"))),
    }
}
