//! Scenario paths and history-class partitions.

use serde::{Deserialize, Serialize};

/// One realization of the uncertainty: a per-stage outcome vector for stages
/// `1..=T`. Stage 1 is deterministic, so `outcomes[0]` is always empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPath {
    pub outcomes: Vec<Vec<f64>>,
}

impl ScenarioPath {
    pub fn new(outcomes: Vec<Vec<f64>>) -> Self {
        Self { outcomes }
    }

    pub fn stages(&self) -> usize {
        self.outcomes.len()
    }

    /// The history through stage `t` (1-based, inclusive).
    pub fn prefix(&self, t: usize) -> ScenarioPath {
        ScenarioPath { outcomes: self.outcomes[..t.min(self.outcomes.len())].to_vec() }
    }

    pub fn prefix_eq(&self, other: &ScenarioPath, t: usize, tol: f64) -> bool {
        for s in 0..t.min(self.outcomes.len()) {
            let (a, b) = (&self.outcomes[s], &other.outcomes[s]);
            if a.len() != b.len() {
                return false;
            }
            if a.iter().zip(b).any(|(x, y)| (x - y).abs() > tol) {
                return false;
            }
        }
        true
    }

    /// All components of stages `2..=t` in (stage, index) order; the flat
    /// layout used by basis functions.
    pub fn flat_components(&self, t: usize) -> Vec<f64> {
        let mut v = Vec::new();
        for s in 1..t.min(self.outcomes.len()) {
            v.extend_from_slice(&self.outcomes[s]);
        }
        v
    }
}

/// Default absolute tolerance when grouping prefixes: exact tree data on one
/// side, floating sampled paths on the other.
pub const PREFIX_TOL: f64 = 1e-9;

/// Partition scenario indices by component-wise prefix equality through stage
/// `t`. Classes are ordered by their first member, members ascending; `t = 1`
/// yields a single class.
pub fn history_classes(paths: &[ScenarioPath], t: usize, tol: f64) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (idx, p) in paths.iter().enumerate() {
        let slot = classes
            .iter()
            .position(|members| paths[members[0]].prefix_eq(p, t, tol));
        match slot {
            Some(k) => classes[k].push(idx),
            None => classes.push(vec![idx]),
        }
    }
    classes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(stage2: f64, stage3: f64) -> ScenarioPath {
        ScenarioPath::new(vec![vec![], vec![stage2], vec![stage3]])
    }

    #[test]
    fn single_class_at_stage_one() {
        let ps = vec![path(1.0, 2.0), path(3.0, 4.0), path(5.0, 6.0)];
        assert_eq!(history_classes(&ps, 1, PREFIX_TOL), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn tree_prefixes_group() {
        // four leaves of a br=2, T=3 tree
        let ps = vec![path(1.0, 10.0), path(1.0, 11.0), path(2.0, 10.0), path(2.0, 11.0)];
        assert_eq!(history_classes(&ps, 2, PREFIX_TOL), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(history_classes(&ps, 3, PREFIX_TOL).len(), 4);
    }

    #[test]
    fn refinement_with_stage() {
        let ps = vec![path(1.0, 10.0), path(1.0, 11.0), path(2.0, 10.0)];
        let coarse = history_classes(&ps, 2, PREFIX_TOL);
        let fine = history_classes(&ps, 3, PREFIX_TOL);
        for f in &fine {
            assert!(coarse.iter().any(|c| f.iter().all(|i| c.contains(i))));
        }
    }
}
