//! Seeded instance generators for the three benchmark families (newsvendor,
//! location-transportation, capital budgeting) plus a synthetic
//! integer-state toy. Identical specs produce byte-identical instances; the
//! generator is ChaCha8 seeded from the spec's `seed`, so instances reproduce
//! across platforms.

mod capital;
mod location;
mod newsvendor;
mod toy;

pub use capital::{
    delta_cost_comp, delta_profit_comp, gen_capital_budgeting, loan_unit_cost,
    CapitalBudgetInstance, CapitalBudgetSpec, LOAN_BASE_COST, LOAN_GROWTH,
};
pub use location::{
    gen_location_transportation, LocationTransportInstance, LocationTransportSpec, LtVariant,
    MAX_CAPACITY,
};
pub use newsvendor::{gen_newsvendor, NewsvendorInstance, NewsvendorSpec};
pub use toy::{gen_integer_toy, IntegerToyInstance, IntegerToySpec};

use msaro_core::{AffineExpr, ScenarioTree, TreeNode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Separate stream for node outcomes so parameter draws stay stable when the
/// tree shape changes.
pub(crate) const DEMAND_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

pub(crate) fn negate(e: &AffineExpr) -> AffineExpr {
    AffineExpr {
        constant: -e.constant,
        coeffs: e.coeffs.iter().map(|&(t, j, c)| (t, j, -c)).collect(),
    }
}

/// Uniform tree with `branching` children per node; outcomes drawn stage by
/// stage, breadth-first, so the draw order is reproducible.
pub(crate) fn grow_tree(
    t_max: usize,
    dims_per_stage: usize,
    branching: usize,
    rng: &mut ChaCha8Rng,
    draw: &mut dyn FnMut(usize, &mut ChaCha8Rng) -> Vec<f64>,
) -> ScenarioTree {
    let mut nodes = vec![TreeNode { stage: 1, parent: None, outcome: vec![] }];
    let mut frontier = vec![0usize];
    for t in 2..=t_max {
        let mut next = Vec::new();
        for &p in &frontier {
            for _ in 0..branching {
                nodes.push(TreeNode { stage: t, parent: Some(p), outcome: draw(t, rng) });
                next.push(nodes.len() - 1);
            }
        }
        frontier = next;
    }
    let mut dims = vec![dims_per_stage; t_max];
    dims[0] = 0;
    ScenarioTree { dims, nodes, branching }
}
