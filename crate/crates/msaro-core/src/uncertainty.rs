//! Uncertainty supports: discrete scenario trees, explicit finite scenario
//! lists, and budgeted polytopes around a nominal path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::scenario::ScenarioPath;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeNode {
    pub stage: usize,
    pub parent: Option<usize>,
    pub outcome: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioTree {
    /// Component counts per stage `1..=T`; `dims[0] = 0`.
    pub dims: Vec<usize>,
    pub nodes: Vec<TreeNode>,
    /// Branching factor of generated trees; 0 for irregular trees.
    pub branching: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetedPolytope {
    /// Component counts per stage `1..=T`; `dims[0] = 0`.
    pub dims: Vec<usize>,
    /// Nominal value per stage and component (stage-1 entry empty).
    pub nominal: Vec<Vec<f64>>,
    /// Nonnegative deviations, same shape as `nominal`.
    pub deviation: Vec<Vec<f64>>,
    /// Budget on the total deviation fraction.
    pub budget: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UncertaintySet {
    DiscreteTree(ScenarioTree),
    FiniteScenarios { paths: Vec<ScenarioPath> },
    BudgetedPolytope(BudgetedPolytope),
}

impl ScenarioTree {
    pub fn stages(&self) -> usize {
        self.dims.len()
    }

    fn children_of(&self, parent: Option<usize>) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.parent == parent)
            .map(|(i, _)| i)
            .collect()
    }

    /// Root-to-leaf outcome paths, ordered by node index depth-first. This is
    /// the canonical scenario ordering of a tree.
    pub fn leaf_paths(&self) -> Vec<ScenarioPath> {
        let t_max = self.stages();
        let mut out = Vec::new();
        let mut stack: Vec<(usize, Vec<Vec<f64>>)> = Vec::new();
        let mut roots = self.children_of(None);
        roots.reverse();
        for r in roots {
            stack.push((r, vec![self.nodes[r].outcome.clone()]));
        }
        while let Some((idx, path)) = stack.pop() {
            let mut kids = self.children_of(Some(idx));
            if kids.is_empty() {
                if path.len() == t_max {
                    out.push(ScenarioPath::new(path));
                }
                continue;
            }
            kids.reverse();
            for k in kids {
                let mut p = path.clone();
                p.push(self.nodes[k].outcome.clone());
                stack.push((k, p));
            }
        }
        out
    }

    /// The path that always takes the first child.
    pub fn nominal_path(&self) -> ScenarioPath {
        let mut outcomes = Vec::new();
        let mut cur = self.children_of(None).into_iter().next();
        while let Some(idx) = cur {
            outcomes.push(self.nodes[idx].outcome.clone());
            cur = self.children_of(Some(idx)).into_iter().next();
        }
        ScenarioPath::new(outcomes)
    }

    pub fn validate(&self) -> Vec<String> {
        let mut diags = Vec::new();
        let roots = self.children_of(None);
        if roots.len() != 1 {
            diags.push(format!("tree must have exactly one stage-1 root, found {}", roots.len()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.stage == 0 || n.stage > self.stages() {
                diags.push(format!("node {i} has stage {} outside 1..={}", n.stage, self.stages()));
                continue;
            }
            if n.outcome.len() != self.dims[n.stage - 1] {
                diags.push(format!(
                    "node {i} outcome has {} components, stage {} expects {}",
                    n.outcome.len(),
                    n.stage,
                    self.dims[n.stage - 1]
                ));
            }
            if let Some(p) = n.parent {
                if p >= self.nodes.len() {
                    diags.push(format!("node {i} has dangling parent {p}"));
                } else if self.nodes[p].stage + 1 != n.stage {
                    diags.push(format!("node {i} at stage {} has parent at stage {}", n.stage, self.nodes[p].stage));
                }
            } else if n.stage != 1 {
                diags.push(format!("node {i} at stage {} has no parent", n.stage));
            }
            if n.stage < self.stages() && self.children_of(Some(i)).is_empty() {
                diags.push(format!("node {i} at stage {} is a leaf above depth {}", n.stage, self.stages()));
            }
        }
        diags
    }
}

impl BudgetedPolytope {
    pub fn stages(&self) -> usize {
        self.dims.len()
    }

    pub fn dim_total(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Path realized by a flat deviation vector (stage-major component order).
    pub fn path_for(&self, delta: &[f64]) -> ScenarioPath {
        let mut outcomes = vec![Vec::new(); self.stages()];
        let mut k = 0;
        for t in 1..self.stages() {
            let mut v = Vec::with_capacity(self.dims[t]);
            for j in 0..self.dims[t] {
                v.push(self.nominal[t][j] + delta[k] * self.deviation[t][j]);
                k += 1;
            }
            outcomes[t] = v;
        }
        ScenarioPath::new(outcomes)
    }

    pub fn nominal_path(&self) -> ScenarioPath {
        self.path_for(&vec![0.0; self.dim_total()])
    }

    /// Componentwise box of component `(t, j)` ignoring the budget row:
    /// `[nominal, nominal + deviation]` (deviation may be negative in theory,
    /// but validation enforces sigma >= 0).
    pub fn component_box(&self, t: usize, j: usize) -> (f64, f64) {
        let n = self.nominal[t - 1][j];
        let d = self.deviation[t - 1][j];
        (n.min(n + d), n.max(n + d))
    }

    /// Position of component `(stage, comp)` in the flat stage-major deviation
    /// vector used by `path_for`.
    pub fn flat_index(&self, stage: usize, comp: usize) -> usize {
        self.dims[..stage - 1].iter().sum::<usize>() + comp
    }

    /// Stage-major `(stage, comp)` pairs in flat order.
    pub fn flat_components(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::with_capacity(self.dim_total());
        for t in 2..=self.stages() {
            for j in 0..self.dims[t - 1] {
                v.push((t, j));
            }
        }
        v
    }

    pub fn member(&self, path: &ScenarioPath, tol: f64) -> bool {
        let mut total = 0.0;
        for t in 1..self.stages() {
            for j in 0..self.dims[t] {
                let x = path.outcomes[t][j];
                let (mu, sg) = (self.nominal[t][j], self.deviation[t][j]);
                let d = if sg > 0.0 {
                    (x - mu) / sg
                } else if (x - mu).abs() <= tol {
                    0.0
                } else {
                    return false;
                };
                if d < -tol || d > 1.0 + tol {
                    return false;
                }
                total += d.max(0.0);
            }
        }
        total <= self.budget + tol
    }

    pub fn validate(&self) -> Vec<String> {
        let mut diags = Vec::new();
        if self.budget < 0.0 {
            diags.push("budget must be nonnegative".into());
        }
        if self.nominal.len() != self.stages() || self.deviation.len() != self.stages() {
            diags.push("nominal/deviation must have one entry per stage".into());
            return diags;
        }
        for t in 0..self.stages() {
            if self.nominal[t].len() != self.dims[t] || self.deviation[t].len() != self.dims[t] {
                diags.push(format!("stage {} data does not match dims", t + 1));
            }
            if self.deviation[t].iter().any(|&s| s < 0.0) {
                diags.push(format!("stage {} has a negative deviation", t + 1));
            }
        }
        diags
    }
}

impl UncertaintySet {
    pub fn stages(&self) -> usize {
        match self {
            UncertaintySet::DiscreteTree(t) => t.stages(),
            UncertaintySet::FiniteScenarios { paths } => {
                paths.first().map(|p| p.stages()).unwrap_or(0)
            }
            UncertaintySet::BudgetedPolytope(p) => p.stages(),
        }
    }

    /// Component counts per stage.
    pub fn dims(&self) -> Vec<usize> {
        match self {
            UncertaintySet::DiscreteTree(t) => t.dims.clone(),
            UncertaintySet::FiniteScenarios { paths } => paths
                .first()
                .map(|p| p.outcomes.iter().map(|o| o.len()).collect())
                .unwrap_or_default(),
            UncertaintySet::BudgetedPolytope(p) => p.dims.clone(),
        }
    }

    /// Every scenario when the support is finite, `None` for polytopes.
    pub fn enumerate(&self) -> Option<Vec<ScenarioPath>> {
        match self {
            UncertaintySet::DiscreteTree(t) => Some(t.leaf_paths()),
            UncertaintySet::FiniteScenarios { paths } => Some(paths.clone()),
            UncertaintySet::BudgetedPolytope(_) => None,
        }
    }

    /// Seed scenario for constraint-generation loops: first-children path on
    /// trees, the zero-deviation path on polytopes, the first listed scenario
    /// on finite sets.
    pub fn nominal_path(&self) -> Result<ScenarioPath, CoreError> {
        match self {
            UncertaintySet::DiscreteTree(t) => Ok(t.nominal_path()),
            UncertaintySet::FiniteScenarios { paths } => paths
                .first()
                .cloned()
                .ok_or_else(|| CoreError::Model("finite scenario set is empty".into())),
            UncertaintySet::BudgetedPolytope(p) => Ok(p.nominal_path()),
        }
    }

    pub fn validate(&self) -> Vec<String> {
        match self {
            UncertaintySet::DiscreteTree(t) => t.validate(),
            UncertaintySet::FiniteScenarios { paths } => {
                let mut diags = Vec::new();
                if paths.is_empty() {
                    diags.push("finite scenario set is empty".into());
                }
                if let Some(first) = paths.first() {
                    let dims: Vec<usize> = first.outcomes.iter().map(|o| o.len()).collect();
                    for (i, p) in paths.iter().enumerate() {
                        let d: Vec<usize> = p.outcomes.iter().map(|o| o.len()).collect();
                        if d != dims {
                            diags.push(format!("scenario {i} dims {d:?} differ from {dims:?}"));
                        }
                    }
                }
                diags
            }
            UncertaintySet::BudgetedPolytope(p) => p.validate(),
        }
    }
}

/// Draw `n` scenario paths, deterministically in `seed`. Trees and finite
/// sets sample paths uniformly; polytopes draw the deviation uniformly on
/// `[0,1]^dim` and rescale by `min(1, budget / sum)` so membership holds.
pub fn sample_uncertainty(set: &UncertaintySet, n: usize, seed: u64) -> Vec<ScenarioPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match set {
        UncertaintySet::DiscreteTree(t) => {
            let leaves = t.leaf_paths();
            (0..n).map(|_| leaves[rng.gen_range(0..leaves.len())].clone()).collect()
        }
        UncertaintySet::FiniteScenarios { paths } => {
            (0..n).map(|_| paths[rng.gen_range(0..paths.len())].clone()).collect()
        }
        UncertaintySet::BudgetedPolytope(p) => {
            let dim = p.dim_total();
            (0..n)
                .map(|_| {
                    let mut delta: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
                    let total: f64 = delta.iter().sum();
                    if total > p.budget {
                        let scale = if total > 0.0 { (p.budget / total).min(1.0) } else { 0.0 };
                        for d in delta.iter_mut() {
                            *d *= scale;
                        }
                    }
                    p.path_for(&delta)
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_polytope() -> BudgetedPolytope {
        BudgetedPolytope {
            dims: vec![0, 2, 2],
            nominal: vec![vec![], vec![10.0, 20.0], vec![30.0, 40.0]],
            deviation: vec![vec![], vec![1.0, 2.0], vec![3.0, 4.0]],
            budget: 1.5,
        }
    }

    #[test]
    fn zero_budget_samples_nominal() {
        let mut p = small_polytope();
        p.budget = 0.0;
        let s = sample_uncertainty(&UncertaintySet::BudgetedPolytope(p.clone()), 5, 3);
        for path in s {
            assert_eq!(path, p.nominal_path());
        }
    }

    #[test]
    fn same_seed_same_samples() {
        let set = UncertaintySet::BudgetedPolytope(small_polytope());
        let a = sample_uncertainty(&set, 7, 123);
        let b = sample_uncertainty(&set, 7, 123);
        assert_eq!(a, b);
    }

    #[test]
    fn samples_are_members() {
        let p = small_polytope();
        let set = UncertaintySet::BudgetedPolytope(p.clone());
        for path in sample_uncertainty(&set, 10_000, 9) {
            assert!(p.member(&path, 1e-9));
        }
    }
}
