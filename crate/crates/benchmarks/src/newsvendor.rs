//! Multistage multi-item budgeted newsvendor generator (maximize worst-case
//! profit). Orders are state variables placed at stages `1..T-1`; linearized
//! per-item profits are recourse variables at stages `2..=T`; the spending
//! budget is tracked by one cumulative state variable per ordering stage.

use msaro_core::{AffineExpr, AffineMatrix, MsaroModel, Sense, StageBlock, UncertaintySet};
use serde::{Deserialize, Serialize};

use crate::{grow_tree, negate, seeded_rng, uniform, DEMAND_STREAM};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NewsvendorSpec {
    pub t: usize,
    pub items: usize,
    pub budget: f64,
    pub branching: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct NewsvendorInstance {
    pub model: MsaroModel,
    pub price: Vec<f64>,
    pub shortage: Vec<f64>,
    pub purchase: Vec<f64>,
    /// `mu[i][t-2]`, `sigma[i][t-2]` for demand stages `2..=T`.
    pub mu: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
}

pub fn gen_newsvendor(spec: &NewsvendorSpec) -> NewsvendorInstance {
    assert!(spec.t >= 2 && spec.items >= 1 && spec.branching >= 1);
    let mut rng = seeded_rng(spec.seed);
    let items = spec.items;
    let price: Vec<f64> = (0..items).map(|_| uniform(&mut rng, 140.0, 160.0)).collect();
    let shortage: Vec<f64> = (0..items).map(|_| uniform(&mut rng, 80.0, 90.0)).collect();
    let purchase: Vec<f64> = (0..items).map(|_| uniform(&mut rng, 50.0, 70.0)).collect();
    let mu: Vec<Vec<f64>> =
        (0..items).map(|_| (2..=spec.t).map(|_| uniform(&mut rng, 20.0, 40.0)).collect()).collect();
    let sigma: Vec<Vec<f64>> =
        (0..items).map(|_| (2..=spec.t).map(|_| uniform(&mut rng, 10.0, 20.0)).collect()).collect();

    // component j of stage t is item j's demand at that stage
    let mut demand_rng = seeded_rng(spec.seed ^ DEMAND_STREAM);
    let tree = grow_tree(spec.t, items, spec.branching, &mut demand_rng, &mut |t, rng2| {
        (0..items)
            .map(|i| {
                let (m, s) = (mu[i][t - 2], sigma[i][t - 2]);
                uniform(rng2, m - s, m + s)
            })
            .collect()
    });

    let d_max = 60.0; // mu + sigma <= 40 + 20
    let profit_cap: Vec<f64> =
        (0..items).map(|i| (price[i] + shortage[i] + purchase[i]) * (spec.budget + d_max)).collect();

    let stage_width = |t: usize| -> (usize, usize) {
        let n_state = if t < spec.t { items + 1 } else { 0 };
        let n_rec = if t > 1 { items } else { 0 };
        (n_state, n_rec)
    };

    let mut stages = Vec::new();
    for t in 1..=spec.t {
        let (n_state, n_rec) = stage_width(t);
        let n_vars = n_state + n_rec;
        let tally_col = items;
        let profit_col = |i: usize| n_state + i;
        let prev_n = if t > 1 { stage_width(t - 1).0 + stage_width(t - 1).1 } else { 0 };

        let mut cost = AffineMatrix::zero(n_vars, 1);
        for i in 0..n_rec {
            cost.set(profit_col(i), 0, AffineExpr::constant(1.0));
        }

        // (current-stage terms, previous-stage terms, rhs); all rows <=
        let mut rows: Vec<(Vec<(usize, AffineExpr)>, Vec<(usize, AffineExpr)>, AffineExpr)> =
            Vec::new();
        if t > 1 {
            for i in 0..items {
                // y <= (r-c)x' - r(x' - d) = -c x' + r d
                rows.push((
                    vec![(profit_col(i), AffineExpr::constant(1.0))],
                    vec![(i, AffineExpr::constant(purchase[i]))],
                    AffineExpr::term(0.0, t, i, price[i]),
                ));
                // y <= (r-c)x' - s(d - x') = (r-c+s)x' - s d
                rows.push((
                    vec![(profit_col(i), AffineExpr::constant(1.0))],
                    vec![(i, AffineExpr::constant(-(price[i] - purchase[i] + shortage[i])))],
                    AffineExpr::term(0.0, t, i, -shortage[i]),
                ));
            }
        }
        if t < spec.t {
            // tally_t - tally_{t-1} - sum_i x_it = 0, as a <= pair
            let mut fwd: Vec<(usize, AffineExpr)> = vec![(tally_col, AffineExpr::constant(1.0))];
            for i in 0..items {
                fwd.push((i, AffineExpr::constant(-1.0)));
            }
            let back: Vec<(usize, AffineExpr)> =
                if t > 1 { vec![(tally_col, AffineExpr::constant(-1.0))] } else { vec![] };
            rows.push((
                fwd.iter().map(|(c, e)| (*c, negate(e))).collect(),
                back.iter().map(|(c, e)| (*c, negate(e))).collect(),
                AffineExpr::constant(0.0),
            ));
            rows.push((fwd, back, AffineExpr::constant(0.0)));
        }

        let m_s = rows.len();
        let mut a = AffineMatrix::zero(m_s, n_vars);
        let mut link = AffineMatrix::zero(m_s, prev_n);
        let mut b = AffineMatrix::zero(m_s, 1);
        for (r, (cur, prev, rhs)) in rows.into_iter().enumerate() {
            for (c, e) in cur {
                a.set(r, c, e);
            }
            for (c, e) in prev {
                link.set(r, c, e);
            }
            b.set(r, 0, rhs);
        }

        let mut lower = Vec::new();
        let mut upper = Vec::new();
        if t < spec.t {
            for _ in 0..items {
                lower.push(0.0);
                upper.push(spec.budget);
            }
            lower.push(0.0);
            upper.push(spec.budget); // the tally cap enforces the budget
        }
        for i in 0..n_rec {
            lower.push(-profit_cap[i]);
            upper.push(profit_cap[i]);
        }

        stages.push(StageBlock {
            n_vars,
            n_int: 0,
            state_count: n_state,
            cost,
            state_rows: a,
            link: if t > 1 && m_s > 0 { Some(link) } else { None },
            state_rhs: b,
            recourse_rows: AffineMatrix::zero(0, n_vars),
            recourse_rhs: AffineMatrix::zero(0, 1),
            lower,
            upper,
        });
    }

    let model = MsaroModel {
        sense: Sense::Maximize,
        stages,
        uncertainty: UncertaintySet::DiscreteTree(tree),
    };
    NewsvendorInstance { model, price, shortage, purchase, mu, sigma }
}
