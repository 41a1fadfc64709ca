//! Staged model representation: per-stage variable blocks with affine data,
//! the state/recourse partition, and structural validation.

use serde::{Deserialize, Serialize};

use crate::affine::{AffineMatrix, NumericMatrix};
use crate::error::CoreError;
use crate::scenario::ScenarioPath;
use crate::uncertainty::UncertaintySet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// Sign applied to costs to obtain the canonical minimization form.
    pub fn canonical_sign(self) -> f64 {
        match self {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        }
    }
}

/// One stage: `n_vars` variables, the leading `state_count` of which are state
/// variables; the trailing `n_int` variables are integer. State rows read the
/// previous stage through `link` (absent at stage 1), recourse rows are
/// stage-local. All rows are `<=`; equalities are written as row pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageBlock {
    pub n_vars: usize,
    pub n_int: usize,
    pub state_count: usize,
    /// `n_vars x 1` stage cost.
    pub cost: AffineMatrix,
    /// `m_s x n_vars` state-row coefficients on the current stage.
    #[serde(rename = "A")]
    pub state_rows: AffineMatrix,
    /// `m_s x n_{t-1}` coefficients on the previous stage, `None` at stage 1.
    #[serde(rename = "B")]
    pub link: Option<AffineMatrix>,
    /// `m_s x 1` state-row right-hand sides.
    #[serde(rename = "b")]
    pub state_rhs: AffineMatrix,
    /// `m_r x n_vars` recourse-row coefficients.
    #[serde(rename = "D")]
    pub recourse_rows: AffineMatrix,
    /// `m_r x 1` recourse-row right-hand sides.
    #[serde(rename = "d")]
    pub recourse_rhs: AffineMatrix,
    #[serde(rename = "lb")]
    pub lower: Vec<f64>,
    #[serde(rename = "ub")]
    pub upper: Vec<f64>,
}

impl StageBlock {
    pub fn recourse_count(&self) -> usize {
        self.n_vars - self.state_count
    }

    pub fn is_integer(&self, i: usize) -> bool {
        i >= self.n_vars - self.n_int
    }

    pub fn state_indices(&self) -> std::ops::Range<usize> {
        0..self.state_count
    }

    pub fn recourse_indices(&self) -> std::ops::Range<usize> {
        self.state_count..self.n_vars
    }
}

/// Data of one stage evaluated at a concrete history.
#[derive(Debug, Clone)]
pub struct NumericStage {
    pub cost: Vec<f64>,
    pub state_rows: NumericMatrix,
    pub link: Option<NumericMatrix>,
    pub state_rhs: Vec<f64>,
    pub recourse_rows: NumericMatrix,
    pub recourse_rhs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct MsaroModel {
    pub sense: Sense,
    pub stages: Vec<StageBlock>,
    pub uncertainty: UncertaintySet,
}

/// Wire format with the stage count spelled out.
#[derive(Serialize, Deserialize)]
struct InstanceJson {
    sense: Sense,
    #[serde(rename = "T")]
    t: usize,
    stages: Vec<StageBlock>,
    uncertainty: UncertaintySet,
}

impl From<MsaroModel> for InstanceJson {
    fn from(m: MsaroModel) -> Self {
        InstanceJson { sense: m.sense, t: m.stages.len(), stages: m.stages, uncertainty: m.uncertainty }
    }
}

impl TryFrom<InstanceJson> for MsaroModel {
    type Error = String;
    fn try_from(j: InstanceJson) -> Result<Self, String> {
        if j.t != j.stages.len() {
            return Err(format!("instance declares T = {} but carries {} stages", j.t, j.stages.len()));
        }
        Ok(MsaroModel { sense: j.sense, stages: j.stages, uncertainty: j.uncertainty })
    }
}

/// A named structural problem found by `validate_model`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    /// 1-based stage, when the problem is stage-local.
    pub stage: Option<usize>,
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.stage {
            Some(t) => write!(f, "stage {t}, {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

impl MsaroModel {
    pub fn horizon(&self) -> usize {
        self.stages.len()
    }

    pub fn stage(&self, t: usize) -> &StageBlock {
        &self.stages[t - 1]
    }

    pub fn total_vars(&self) -> usize {
        self.stages.iter().map(|b| b.n_vars).sum()
    }

    pub fn has_integers(&self) -> bool {
        self.stages.iter().any(|b| b.n_int > 0)
    }

    pub fn has_integer_state(&self) -> bool {
        self.stages
            .iter()
            .skip(1)
            .any(|b| (0..b.state_count).any(|i| b.is_integer(i)))
    }

    /// True when every cost/constraint matrix at stages `2..=T` is constant,
    /// leaving only right-hand-side uncertainty.
    pub fn fixed_recourse(&self) -> bool {
        self.stages.iter().skip(1).all(|b| {
            b.cost.is_constant()
                && b.state_rows.is_constant()
                && b.link.as_ref().map_or(true, |m| m.is_constant())
                && b.recourse_rows.is_constant()
        })
    }

    /// Instantiate the data of stage `t` at a history covering `1..=t`.
    pub fn evaluate_stage_data(&self, t: usize, prefix: &ScenarioPath) -> Result<NumericStage, CoreError> {
        if prefix.stages() < t {
            return Err(CoreError::PrefixTooShort { required_stage: t });
        }
        let b = self.stage(t);
        Ok(NumericStage {
            cost: b.cost.eval_column(prefix)?,
            state_rows: b.state_rows.eval(prefix)?,
            link: b.link.as_ref().map(|m| m.eval(prefix)).transpose()?,
            state_rhs: b.state_rhs.eval_column(prefix)?,
            recourse_rows: b.recourse_rows.eval(prefix)?,
            recourse_rhs: b.recourse_rhs.eval_column(prefix)?,
        })
    }
}

/// Structural checks: dimension chaining, finite bounds, deterministic first
/// stage, valid component references, well-formed uncertainty. Returns an
/// empty list when the model is well-formed.
pub fn validate_model(model: &MsaroModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |stage: Option<usize>, field: &str, message: String| {
        out.push(Diagnostic { stage, field: field.to_string(), message });
    };
    let horizon = model.horizon();
    if horizon == 0 {
        push(None, "stages", "model has no stages".into());
        return out;
    }
    let dims = model.uncertainty.dims();
    if dims.len() != horizon {
        push(
            None,
            "uncertainty",
            format!("uncertainty covers {} stages, model has {horizon}", dims.len()),
        );
    }
    for msg in model.uncertainty.validate() {
        push(None, "uncertainty", msg);
    }

    for (idx, b) in model.stages.iter().enumerate() {
        let t = idx + 1;
        if b.state_count > b.n_vars {
            push(Some(t), "state_count", format!("state_count {} exceeds n_vars {}", b.state_count, b.n_vars));
        }
        if b.n_int > b.n_vars {
            push(Some(t), "n_int", format!("n_int {} exceeds n_vars {}", b.n_int, b.n_vars));
        }
        if b.lower.len() != b.n_vars || b.upper.len() != b.n_vars {
            push(Some(t), "bounds", "bound vectors do not match n_vars".into());
            continue;
        }
        for i in 0..b.n_vars {
            if !b.lower[i].is_finite() || !b.upper[i].is_finite() {
                push(Some(t), "bounds", format!("variable {i} has a non-finite bound"));
            } else if b.lower[i] > b.upper[i] {
                push(Some(t), "bounds", format!("variable {i} has lb > ub"));
            }
        }

        let mats: [(&str, &AffineMatrix, usize, usize); 5] = [
            ("cost", &b.cost, b.n_vars, 1),
            ("A", &b.state_rows, b.state_rows.rows, b.n_vars),
            ("b", &b.state_rhs, b.state_rows.rows, 1),
            ("D", &b.recourse_rows, b.recourse_rows.rows, b.n_vars),
            ("d", &b.recourse_rhs, b.recourse_rows.rows, 1),
        ];
        for (name, m, rows, cols) in mats {
            if m.rows != rows || m.cols != cols {
                push(Some(t), name, format!("matrix is {}x{}, expected {rows}x{cols}", m.rows, m.cols));
            }
            if let Err(e) = m.check() {
                push(Some(t), name, e);
            }
        }
        match (&b.link, t) {
            (Some(_), 1) => push(Some(1), "B", "stage 1 must not link backwards".into()),
            (Some(m), _) => {
                let prev = model.stages[idx - 1].n_vars;
                if m.rows != b.state_rows.rows || m.cols != prev {
                    push(Some(t), "B", format!("matrix is {}x{}, expected {}x{prev}", m.rows, m.cols, b.state_rows.rows));
                }
                if let Err(e) = m.check() {
                    push(Some(t), "B", e);
                }
            }
            (None, _) => {
                if t > 1 && b.state_rows.rows > 0 {
                    push(Some(t), "B", "state rows at t >= 2 need a link matrix".into());
                }
            }
        }

        // component references: stage-t data may read stages 2..=t only
        let all = [
            ("cost", &b.cost),
            ("A", &b.state_rows),
            ("b", &b.state_rhs),
            ("D", &b.recourse_rows),
            ("d", &b.recourse_rhs),
        ];
        for (name, m) in all.iter().chain(b.link.as_ref().map(|l| ("B", l)).iter()) {
            for (_, _, e) in &m.entries {
                for &(ct, cj, _) in &e.coeffs {
                    if ct < 2 || ct > t {
                        push(Some(t), name, format!("reads component ({ct},{cj}) outside stages 2..={t}"));
                    } else if dims.get(ct - 1).map_or(true, |&d| cj >= d) {
                        push(Some(t), name, format!("component ({ct},{cj}) exceeds stage dimension"));
                    }
                }
            }
        }
        if t == 1 {
            for (name, m) in &all {
                if !m.is_constant() {
                    push(Some(1), name, "stage-1 data must be deterministic".into());
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::AffineExpr;

    fn two_stage_model() -> MsaroModel {
        // stage 1: one state var x in [0, 10], cost x
        // stage 2: one recourse var y in [0, 10], cost y, row: -y <= -xi_{2,0}
        let s1 = StageBlock {
            n_vars: 1,
            n_int: 0,
            state_count: 1,
            cost: AffineMatrix::column(vec![(0, AffineExpr::constant(1.0))], 1),
            state_rows: AffineMatrix::zero(0, 1),
            link: None,
            state_rhs: AffineMatrix::zero(0, 1),
            recourse_rows: AffineMatrix::zero(0, 1),
            recourse_rhs: AffineMatrix::zero(0, 1),
            lower: vec![0.0],
            upper: vec![10.0],
        };
        let mut d = AffineMatrix::zero(1, 1);
        d.set(0, 0, AffineExpr::constant(-1.0));
        let s2 = StageBlock {
            n_vars: 1,
            n_int: 0,
            state_count: 0,
            cost: AffineMatrix::column(vec![(0, AffineExpr::constant(1.0))], 1),
            state_rows: AffineMatrix::zero(0, 1),
            link: None,
            state_rhs: AffineMatrix::zero(0, 1),
            recourse_rows: d,
            recourse_rhs: AffineMatrix::column(vec![(0, AffineExpr::term(0.0, 2, 0, -1.0))], 1),
            lower: vec![0.0],
            upper: vec![10.0],
        };
        MsaroModel {
            sense: Sense::Minimize,
            stages: vec![s1, s2],
            uncertainty: UncertaintySet::FiniteScenarios {
                paths: vec![
                    ScenarioPath::new(vec![vec![], vec![1.0]]),
                    ScenarioPath::new(vec![vec![], vec![4.0]]),
                ],
            },
        }
    }

    #[test]
    fn well_formed_model_validates_clean() {
        assert!(validate_model(&two_stage_model()).is_empty());
    }

    #[test]
    fn wrong_link_columns_is_diagnosed() {
        let mut m = two_stage_model();
        m.stages[1].state_rows = AffineMatrix::zero(1, 1);
        m.stages[1].state_rhs = AffineMatrix::zero(1, 1);
        m.stages[1].link = Some(AffineMatrix::zero(1, 3)); // stage 1 has 1 var
        let diags = validate_model(&m);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].field, "B");
        assert_eq!(diags[0].stage, Some(2));
    }

    #[test]
    fn infinite_bound_is_diagnosed() {
        let mut m = two_stage_model();
        m.stages[0].upper[0] = f64::INFINITY;
        let diags = validate_model(&m);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].field, "bounds");
    }

    #[test]
    fn affine_evaluation() {
        let e = AffineExpr { constant: 2.0, coeffs: vec![(2, 0, 3.0)] };
        let p = ScenarioPath::new(vec![vec![], vec![5.0]]);
        assert_eq!(e.eval(&p).unwrap(), 17.0);
        let short = ScenarioPath::new(vec![vec![]]);
        assert!(matches!(
            e.eval(&short),
            Err(CoreError::PrefixTooShort { required_stage: 2 })
        ));
    }

    #[test]
    fn constant_block_evaluates_identically_anywhere() {
        let m = two_stage_model();
        let p1 = ScenarioPath::new(vec![vec![], vec![1.0]]);
        let p2 = ScenarioPath::new(vec![vec![], vec![4.0]]);
        let a = m.evaluate_stage_data(1, &p1).unwrap();
        let b = m.evaluate_stage_data(1, &p2).unwrap();
        assert_eq!(a.cost, b.cost);
    }

    #[test]
    fn json_round_trip_is_value_identical() {
        let m = two_stage_model();
        let s = serde_json::to_string(&m).unwrap();
        let back: MsaroModel = serde_json::from_str(&s).unwrap();
        let s2 = serde_json::to_string(&back).unwrap();
        assert_eq!(s, s2);
    }
}
