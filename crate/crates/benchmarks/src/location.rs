//! Multistage location-transportation generator (minimize worst-case cost):
//! open facilities and size them at stage 1, then ship against uncertain
//! demand; remaining capacity is the per-facility state.

use msaro_core::{
    AffineExpr, AffineMatrix, BudgetedPolytope, MsaroModel, Sense, StageBlock, UncertaintySet,
};
use serde::{Deserialize, Serialize};

use crate::{grow_tree, seeded_rng, uniform, DEMAND_STREAM};

pub const MAX_CAPACITY: f64 = 2.0e4;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum LtVariant {
    Tree { branching: usize, alpha_d: f64 },
    Budgeted { alpha_d: f64, alpha_u: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocationTransportSpec {
    pub t: usize,
    pub facilities: usize,
    pub customers: usize,
    pub seed: u64,
    pub variant: LtVariant,
}

#[derive(Debug, Clone)]
pub struct LocationTransportInstance {
    pub model: MsaroModel,
    pub build_cost: Vec<f64>,
    pub capacity_cost: Vec<f64>,
    /// `transport_cost[i][j]`.
    pub transport_cost: Vec<Vec<f64>>,
    /// `mu[j][t-2]` for demand stages `2..=T`.
    pub mu: Vec<Vec<f64>>,
}

pub fn gen_location_transportation(spec: &LocationTransportSpec) -> LocationTransportInstance {
    assert!(spec.t >= 2 && spec.facilities >= 1 && spec.customers >= 1);
    let mut rng = seeded_rng(spec.seed);
    let (n_i, n_j) = (spec.facilities, spec.customers);
    let build_cost: Vec<f64> = (0..n_i).map(|_| uniform(&mut rng, 100.0, 1000.0)).collect();
    let capacity_cost: Vec<f64> = (0..n_i).map(|_| uniform(&mut rng, 10.0, 100.0)).collect();
    let transport_cost: Vec<Vec<f64>> =
        (0..n_i).map(|_| (0..n_j).map(|_| uniform(&mut rng, 1.0, 1000.0)).collect()).collect();
    let mu: Vec<Vec<f64>> =
        (0..n_j).map(|_| (2..=spec.t).map(|_| uniform(&mut rng, 10.0, 500.0)).collect()).collect();

    let uncertainty = match spec.variant {
        LtVariant::Tree { branching, alpha_d } => {
            let mut demand_rng = seeded_rng(spec.seed ^ DEMAND_STREAM);
            UncertaintySet::DiscreteTree(grow_tree(
                spec.t,
                n_j,
                branching,
                &mut demand_rng,
                &mut |t, rng2| {
                    (0..n_j)
                        .map(|j| {
                            let m = mu[j][t - 2];
                            uniform(rng2, m, (1.0 + alpha_d) * m)
                        })
                        .collect()
                },
            ))
        }
        LtVariant::Budgeted { alpha_d, alpha_u } => {
            let mut dims = vec![n_j; spec.t];
            dims[0] = 0;
            let mut nominal = vec![Vec::new(); spec.t];
            let mut deviation = vec![Vec::new(); spec.t];
            for t in 2..=spec.t {
                nominal[t - 1] = (0..n_j).map(|j| mu[j][t - 2]).collect();
                deviation[t - 1] = (0..n_j).map(|j| alpha_d * mu[j][t - 2]).collect();
            }
            UncertaintySet::BudgetedPolytope(BudgetedPolytope {
                dims,
                nominal,
                deviation,
                budget: alpha_u * n_i as f64,
            })
        }
    };

    let mut stages = Vec::new();
    for t in 1..=spec.t {
        if t == 1 {
            // vars: capacity s_i (state, continuous) then open y_i (binary)
            let n_vars = 2 * n_i;
            let mut cost = AffineMatrix::zero(n_vars, 1);
            let mut d_rows = AffineMatrix::zero(n_i, n_vars);
            let d_rhs = AffineMatrix::zero(n_i, 1);
            for i in 0..n_i {
                cost.set(i, 0, AffineExpr::constant(capacity_cost[i]));
                cost.set(n_i + i, 0, AffineExpr::constant(build_cost[i]));
                // s_i - K y_i <= 0
                d_rows.set(i, i, AffineExpr::constant(1.0));
                d_rows.set(i, n_i + i, AffineExpr::constant(-MAX_CAPACITY));
            }
            stages.push(StageBlock {
                n_vars,
                n_int: n_i,
                state_count: n_i,
                cost,
                state_rows: AffineMatrix::zero(0, n_vars),
                link: None,
                state_rhs: AffineMatrix::zero(0, 1),
                recourse_rows: d_rows,
                recourse_rhs: d_rhs,
                lower: vec![0.0; n_vars],
                upper: (0..n_vars).map(|k| if k < n_i { MAX_CAPACITY } else { 1.0 }).collect(),
            });
            continue;
        }

        // vars: s_i (state) then x_ij (recourse), row-major by facility
        let n_vars = n_i + n_i * n_j;
        let ship_col = |i: usize, j: usize| n_i + i * n_j + j;
        let prev_n = if t == 2 { 2 * n_i } else { n_i + n_i * n_j };
        let mut cost = AffineMatrix::zero(n_vars, 1);
        for i in 0..n_i {
            cost.set(i, 0, AffineExpr::constant(capacity_cost[i]));
            for j in 0..n_j {
                cost.set(ship_col(i, j), 0, AffineExpr::constant(transport_cost[i][j]));
            }
        }

        // balance s_it - s_{i,t-1} + sum_j x_ijt = 0 as a <= pair
        let mut a = AffineMatrix::zero(2 * n_i, n_vars);
        let mut link = AffineMatrix::zero(2 * n_i, prev_n);
        let b = AffineMatrix::zero(2 * n_i, 1);
        for i in 0..n_i {
            for (r, sgn) in [(2 * i, 1.0), (2 * i + 1, -1.0)] {
                a.set(r, i, AffineExpr::constant(sgn));
                for j in 0..n_j {
                    a.set(r, ship_col(i, j), AffineExpr::constant(sgn));
                }
                link.set(r, i, AffineExpr::constant(-sgn));
            }
        }

        // demand cover: -sum_i x_ijt <= -d_jt
        let mut d_rows = AffineMatrix::zero(n_j, n_vars);
        let mut d_rhs = AffineMatrix::zero(n_j, 1);
        for j in 0..n_j {
            for i in 0..n_i {
                d_rows.set(j, ship_col(i, j), AffineExpr::constant(-1.0));
            }
            d_rhs.set(j, 0, AffineExpr::term(0.0, t, j, -1.0));
        }

        let mut lower = vec![0.0; n_vars];
        let mut upper = vec![MAX_CAPACITY; n_vars];
        lower.truncate(n_vars);
        upper.truncate(n_vars);

        stages.push(StageBlock {
            n_vars,
            n_int: 0,
            state_count: n_i,
            cost,
            state_rows: a,
            link: Some(link),
            state_rhs: b,
            recourse_rows: d_rows,
            recourse_rhs: d_rhs,
            lower,
            upper,
        });
    }

    let model = MsaroModel { sense: Sense::Minimize, stages, uncertainty };
    LocationTransportInstance { model, build_cost, capacity_cost, transport_cost, mu }
}
