//! Basis functions for the stage-t decision rules. Every functional is
//! affine in the uncertainty, which is what the constraint-generation
//! convergence argument needs.

use msaro_core::{AffineExpr, BudgetedPolytope, CoreError, ScenarioPath};
use serde::{Deserialize, Serialize};

use crate::error::PrimalError;
use crate::sym::LinDelta;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisSpec {
    /// `[1, every component of xi^t]` — the standard choice.
    ConstantPlusHistory,
    /// `[1, components of stage t only]`.
    ConstantPlusCurrent,
    /// Explicit affine functionals per stage (keyed `t - 2`).
    Custom { per_stage: Vec<Vec<AffineExpr>> },
}

impl BasisSpec {
    /// Number of basis functionals at stage `t >= 2`.
    pub fn width(&self, t: usize, dims: &[usize]) -> usize {
        match self {
            BasisSpec::ConstantPlusHistory => 1 + dims[1..t].iter().sum::<usize>(),
            BasisSpec::ConstantPlusCurrent => 1 + dims[t - 1],
            BasisSpec::Custom { per_stage } => per_stage[t - 2].len(),
        }
    }

    /// Check custom functionals respect nonanticipativity at their stage.
    pub fn validate(&self, horizon: usize) -> Result<(), PrimalError> {
        if let BasisSpec::Custom { per_stage } = self {
            for (idx, fns) in per_stage.iter().enumerate() {
                let t = idx + 2;
                if t > horizon {
                    break;
                }
                for f in fns {
                    if f.max_stage() > t {
                        return Err(PrimalError::BasisAnticipativity { stage: t });
                    }
                }
            }
        }
        Ok(())
    }

    /// Evaluate the stage-`t` basis vector at a history covering `1..=t`.
    pub fn eval(&self, t: usize, prefix: &ScenarioPath) -> Result<Vec<f64>, CoreError> {
        match self {
            BasisSpec::ConstantPlusHistory => {
                if prefix.stages() < t {
                    return Err(CoreError::PrefixTooShort { required_stage: t });
                }
                let mut v = vec![1.0];
                v.extend(prefix.flat_components(t));
                Ok(v)
            }
            BasisSpec::ConstantPlusCurrent => {
                let stage = prefix
                    .outcomes
                    .get(t - 1)
                    .ok_or(CoreError::PrefixTooShort { required_stage: t })?;
                let mut v = vec![1.0];
                v.extend_from_slice(stage);
                Ok(v)
            }
            BasisSpec::Custom { per_stage } => {
                per_stage[t - 2].iter().map(|f| f.eval(prefix)).collect()
            }
        }
    }

    /// The stage-`t` basis vector as affine functions of the flat deviation
    /// vector of a budgeted polytope.
    pub fn symbolic(&self, t: usize, set: &BudgetedPolytope) -> Vec<LinDelta> {
        let component = |ct: usize, cj: usize| {
            LinDelta::component(set, ct, cj)
        };
        match self {
            BasisSpec::ConstantPlusHistory => {
                let mut v = vec![LinDelta::constant(1.0)];
                for ct in 2..=t {
                    for cj in 0..set.dims[ct - 1] {
                        v.push(component(ct, cj));
                    }
                }
                v
            }
            BasisSpec::ConstantPlusCurrent => {
                let mut v = vec![LinDelta::constant(1.0)];
                for cj in 0..set.dims[t - 1] {
                    v.push(component(t, cj));
                }
                v
            }
            BasisSpec::Custom { per_stage } => {
                per_stage[t - 2].iter().map(|f| LinDelta::from_expr(f, set)).collect()
            }
        }
    }
}
