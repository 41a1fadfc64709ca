//! Multistage capital budgeting generator (maximize worst-case profit):
//! binary project investments and continuous loans are recourse, available
//! funds and expenditure are the state pair. Costs and profits deviate inside
//! a box, expressed as a budgeted polytope with the budget set to the full
//! dimension.

use msaro_core::{
    AffineExpr, AffineMatrix, BudgetedPolytope, MsaroModel, Sense, StageBlock, UncertaintySet,
};
use serde::{Deserialize, Serialize};

use crate::{seeded_rng, uniform};

pub const LOAN_BASE_COST: f64 = 0.8;
pub const LOAN_GROWTH: f64 = 1.2;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapitalBudgetSpec {
    pub t: usize,
    pub projects: usize,
    pub budget: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct CapitalBudgetInstance {
    pub model: MsaroModel,
    /// `nominal_cost[i][t-1]` for stages `1..=T`.
    pub nominal_cost: Vec<Vec<f64>>,
    /// `sigma[i][t-1]`; stage-1 deviations are not realized (deterministic).
    pub sigma: Vec<Vec<f64>>,
}

/// Component layout at stage `t >= 2`: `[delta_cost_1..I, delta_profit_1..I]`.
pub fn delta_cost_comp(i: usize) -> usize {
    i
}
pub fn delta_profit_comp(projects: usize, i: usize) -> usize {
    projects + i
}

pub fn loan_unit_cost(t: usize) -> f64 {
    LOAN_BASE_COST * LOAN_GROWTH.powi(t as i32 - 1)
}

pub fn gen_capital_budgeting(spec: &CapitalBudgetSpec) -> CapitalBudgetInstance {
    assert!(spec.t >= 1 && spec.projects >= 1);
    let mut rng = seeded_rng(spec.seed);
    let n_i = spec.projects;
    let nominal_cost: Vec<Vec<f64>> =
        (0..n_i).map(|_| (1..=spec.t).map(|_| uniform(&mut rng, 0.0, 10.0)).collect()).collect();
    let sigma: Vec<Vec<f64>> =
        (0..n_i).map(|_| (1..=spec.t).map(|_| uniform(&mut rng, 0.0, 5.0)).collect()).collect();

    let mut dims = vec![2 * n_i; spec.t];
    dims[0] = 0;
    let uncertainty = UncertaintySet::BudgetedPolytope(BudgetedPolytope {
        dims: dims.clone(),
        nominal: dims.iter().map(|&d| vec![0.0; d]).collect(),
        deviation: dims.iter().map(|&d| vec![1.0; d]).collect(),
        budget: (2 * n_i * (spec.t - 1)) as f64,
    });

    let stage_spend_cap = 15.0 * n_i as f64; // cost <= 10 + 5 per project
    let loan_cap = spec.budget + stage_spend_cap * spec.t as f64;
    let funds_cap = spec.budget + loan_cap * spec.t as f64;

    let mut stages = Vec::new();
    for t in 1..=spec.t {
        // vars: funds B_t, expenditure C_t (state), loan L_t, invest x_it
        let n_vars = 3 + n_i;
        let (funds, spend, loan) = (0usize, 1usize, 2usize);
        let invest = |i: usize| 3 + i;

        let cost_expr = |i: usize| -> AffineExpr {
            let c0 = nominal_cost[i][t - 1];
            if t == 1 {
                AffineExpr::constant(c0)
            } else {
                AffineExpr::term(c0, t, delta_cost_comp(i), sigma[i][t - 1])
            }
        };
        let profit_expr = |i: usize| -> AffineExpr {
            let base = nominal_cost[i][t - 1] / 5.0;
            if t == 1 {
                AffineExpr::constant(base)
            } else {
                AffineExpr::term(base, t, delta_profit_comp(n_i, i), sigma[i][t - 1])
            }
        };

        let mut cost = AffineMatrix::zero(n_vars, 1);
        cost.set(loan, 0, AffineExpr::constant(-loan_unit_cost(t)));
        for i in 0..n_i {
            cost.set(invest(i), 0, profit_expr(i));
        }

        // fund flow: B_t - B_{t-1} + C_{t-1} - L_t = rhs (B at t=1), <= pair
        let mut a = AffineMatrix::zero(2, n_vars);
        let mut link_m = AffineMatrix::zero(2, n_vars);
        let mut b = AffineMatrix::zero(2, 1);
        for (r, sgn) in [(0, 1.0), (1, -1.0)] {
            a.set(r, funds, AffineExpr::constant(sgn));
            a.set(r, loan, AffineExpr::constant(-sgn));
            if t > 1 {
                link_m.set(r, funds, AffineExpr::constant(-sgn));
                link_m.set(r, spend, AffineExpr::constant(sgn));
            }
            b.set(r, 0, AffineExpr::constant(sgn * if t == 1 { spec.budget } else { 0.0 }));
        }

        // expenditure tally and the budget guard
        let mut d_rows = AffineMatrix::zero(3, n_vars);
        let mut d_rhs = AffineMatrix::zero(3, 1);
        for (r, sgn) in [(0, 1.0), (1, -1.0)] {
            d_rows.set(r, spend, AffineExpr::constant(-sgn));
            for i in 0..n_i {
                let mut e = cost_expr(i);
                if sgn < 0.0 {
                    e = crate::negate(&e);
                }
                d_rows.set(r, invest(i), e);
            }
            d_rhs.set(r, 0, AffineExpr::constant(0.0));
        }
        d_rows.set(2, spend, AffineExpr::constant(1.0));
        d_rows.set(2, funds, AffineExpr::constant(-1.0));
        d_rhs.set(2, 0, AffineExpr::constant(0.0));

        stages.push(StageBlock {
            n_vars,
            n_int: n_i,
            state_count: 2,
            cost,
            state_rows: a,
            link: if t > 1 { Some(link_m) } else { None },
            state_rhs: b,
            recourse_rows: d_rows,
            recourse_rhs: d_rhs,
            lower: vec![0.0; n_vars],
            upper: {
                let mut ub = vec![funds_cap, stage_spend_cap, loan_cap];
                ub.extend(std::iter::repeat(1.0).take(n_i));
                ub
            },
        });
    }

    let model = MsaroModel { sense: Sense::Maximize, stages, uncertainty };
    CapitalBudgetInstance { model, nominal_cost, sigma }
}
