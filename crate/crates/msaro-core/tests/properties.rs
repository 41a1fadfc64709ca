//! Property tests: affine evaluation is linear in the prefix, history-class
//! partitions refine with the stage, sampling is deterministic in the seed.

use msaro_core::{history_classes, sample_uncertainty, AffineExpr, ScenarioPath, UncertaintySet, PREFIX_TOL};
use proptest::prelude::*;

fn arb_path(dims: &'static [usize]) -> impl Strategy<Value = ScenarioPath> {
    let per_stage: Vec<_> = dims
        .iter()
        .map(|&d| proptest::collection::vec(-10.0..10.0f64, d))
        .collect();
    per_stage.prop_map(ScenarioPath::new)
}

const DIMS: &[usize] = &[0, 2, 3];

fn arb_expr() -> impl Strategy<Value = AffineExpr> {
    let term = (2usize..=3, 0usize..3, -5.0..5.0f64);
    (-5.0..5.0f64, proptest::collection::vec(term, 0..5)).prop_map(|(c, coeffs)| {
        let mut e = AffineExpr {
            constant: c,
            coeffs: coeffs
                .into_iter()
                .filter(|&(t, j, _)| j < DIMS[t - 1])
                .collect(),
        };
        e.normalize();
        e
    })
}

proptest! {
    #[test]
    fn affine_eval_is_linear_in_the_prefix(
        e in arb_expr(),
        p in arb_path(DIMS),
        q in arb_path(DIMS),
        lam in 0.0..1.0f64,
    ) {
        let mix = ScenarioPath::new(
            p.outcomes
                .iter()
                .zip(&q.outcomes)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| lam * x + (1.0 - lam) * y).collect())
                .collect(),
        );
        let lhs = e.eval(&mix).unwrap();
        let rhs = lam * e.eval(&p).unwrap() + (1.0 - lam) * e.eval(&q).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn history_classes_refine_with_stage(
        paths in proptest::collection::vec(arb_path(DIMS), 1..12),
        t in 1usize..3,
    ) {
        let coarse = history_classes(&paths, t, PREFIX_TOL);
        let fine = history_classes(&paths, t + 1, PREFIX_TOL);
        // every fine class sits inside exactly one coarse class
        for f in &fine {
            prop_assert!(coarse.iter().any(|c| f.iter().all(|i| c.contains(i))));
        }
        // both are partitions of the index set
        let mut seen: Vec<usize> = fine.iter().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..paths.len()).collect::<Vec<_>>());
    }

    #[test]
    fn sampling_is_deterministic(seed in 0u64..1000, n in 1usize..12) {
        let set = UncertaintySet::BudgetedPolytope(msaro_core::BudgetedPolytope {
            dims: vec![0, 2],
            nominal: vec![vec![], vec![1.0, 2.0]],
            deviation: vec![vec![], vec![0.5, 0.5]],
            budget: 1.0,
        });
        let a = sample_uncertainty(&set, n, seed);
        let b = sample_uncertainty(&set, n, seed);
        prop_assert_eq!(a, b);
    }
}
