//! Synthetic bounded-integer-state family used to exercise piecewise-constant
//! decision rules. The three paper families have no integer state, so this is
//! the test vehicle: integer capacity blocks are the state, integer overflow
//! purchases the recourse, demand arrives on a small tree. All variables of a
//! stage are integer, which keeps the trailing-integer layout intact.

use msaro_core::{AffineExpr, AffineMatrix, MsaroModel, Sense, StageBlock, UncertaintySet};
use serde::{Deserialize, Serialize};

use crate::{grow_tree, seeded_rng, uniform, DEMAND_STREAM};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegerToySpec {
    pub t: usize,
    pub branching: usize,
    pub seed: u64,
    /// Upper end of the integer state range `[0, state_max]`.
    pub state_max: i64,
}

#[derive(Debug, Clone)]
pub struct IntegerToyInstance {
    pub model: MsaroModel,
    pub block_capacity: f64,
    pub hold_cost: f64,
    pub overflow_cost: f64,
}

/// Minimize worst-case cost of running `m_t` capacity blocks (integer state,
/// decided before seeing the next demand) plus integer overflow units `v_t`:
/// `capacity * m_{t-1} + v_t >= d_t`.
pub fn gen_integer_toy(spec: &IntegerToySpec) -> IntegerToyInstance {
    assert!(spec.t >= 2 && spec.state_max >= 1);
    let mut rng = seeded_rng(spec.seed);
    let block_capacity = 2.0;
    let hold_cost = uniform(&mut rng, 1.0, 2.0);
    let overflow_cost = uniform(&mut rng, 3.0, 5.0);
    let d_max = block_capacity * spec.state_max as f64 + 2.0;

    let mut demand_rng = seeded_rng(spec.seed ^ DEMAND_STREAM);
    let tree = grow_tree(spec.t, 1, spec.branching, &mut demand_rng, &mut |_t, r| {
        vec![uniform(r, 0.0, d_max).round()]
    });

    let mut stages = Vec::new();
    for t in 1..=spec.t {
        let has_state = t < spec.t;
        let has_overflow = t > 1;
        let n_vars = usize::from(has_state) + usize::from(has_overflow);
        let over_col = usize::from(has_state);

        let mut cost = AffineMatrix::zero(n_vars, 1);
        if has_state {
            cost.set(0, 0, AffineExpr::constant(hold_cost));
        }
        if has_overflow {
            cost.set(over_col, 0, AffineExpr::constant(overflow_cost));
        }

        let (a, link, b) = if has_overflow {
            // -capacity * m_{t-1} - v_t <= -d_t
            let mut a = AffineMatrix::zero(1, n_vars);
            a.set(0, over_col, AffineExpr::constant(-1.0));
            let prev_n = usize::from(t - 1 < spec.t) + usize::from(t - 1 > 1);
            let mut link = AffineMatrix::zero(1, prev_n);
            link.set(0, 0, AffineExpr::constant(-block_capacity));
            let mut b = AffineMatrix::zero(1, 1);
            b.set(0, 0, AffineExpr::term(0.0, t, 0, -1.0));
            (a, Some(link), b)
        } else {
            (AffineMatrix::zero(0, n_vars), None, AffineMatrix::zero(0, 1))
        };

        let mut lower = Vec::new();
        let mut upper = Vec::new();
        if has_state {
            lower.push(0.0);
            upper.push(spec.state_max as f64);
        }
        if has_overflow {
            lower.push(0.0);
            upper.push(d_max);
        }

        stages.push(StageBlock {
            n_vars,
            n_int: n_vars, // every variable integer; trailing layout trivially holds
            state_count: usize::from(has_state),
            cost,
            state_rows: a,
            link,
            state_rhs: b,
            recourse_rows: AffineMatrix::zero(0, n_vars),
            recourse_rhs: AffineMatrix::zero(0, 1),
            lower,
            upper,
        });
    }

    let model = MsaroModel {
        sense: Sense::Minimize,
        stages,
        uncertainty: UncertaintySet::DiscreteTree(tree),
    };
    IntegerToyInstance { model, block_capacity, hold_cost, overflow_cost }
}
