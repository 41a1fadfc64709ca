//! Extensive (copy-variable) forms over finite scenario sets: one variable
//! copy per stage and scenario plus a single worst-case epigraph variable,
//! with nonanticipativity written either as pairwise prefix equalities or as
//! the uniform conditional-mean rows.

use lp_milp_kernel::{
    DenseKernel, LinearProgram, MilpOptions, Rel, SolveResult, SolveStatus, SolverBackend,
};
use rayon::prelude::*;

use crate::error::CoreError;
use crate::model::{MsaroModel, NumericStage};
use crate::scenario::{history_classes, ScenarioPath, PREFIX_TOL};

/// How nonanticipativity is written into the program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NaMode {
    /// No linking at all: the perfect-information relaxation.
    None,
    /// Consecutive pairwise equalities inside every history class.
    Pairwise,
    /// Conditional-mean rows with uniform weights over each class.
    ConditionalMean,
}

/// A built extensive form; the program is in canonical minimization form.
pub struct ExtensiveForm {
    pub lp: LinearProgram,
    pub z: usize,
    pub n_scenarios: usize,
    offsets: Vec<Vec<usize>>, // [scenario][stage-1] -> first column
    stage_sizes: Vec<usize>,
    pub canonical_sign: f64,
}

impl ExtensiveForm {
    pub fn var(&self, t: usize, scenario: usize, i: usize) -> usize {
        debug_assert!(i < self.stage_sizes[t - 1]);
        self.offsets[scenario][t - 1] + i
    }

    pub fn stage_size(&self, t: usize) -> usize {
        self.stage_sizes[t - 1]
    }
}

/// Accumulates the stage rows of one scenario copy into `lp`. Shared by every
/// builder in the workspace that materializes per-scenario constraints.
pub fn append_scenario_rows(
    lp: &mut LinearProgram,
    data: &NumericStage,
    cur: &dyn Fn(usize) -> usize,
    prev: Option<&dyn Fn(usize) -> usize>,
) {
    for r in 0..data.state_rows.rows {
        let mut coeffs: Vec<(usize, f64)> =
            data.state_rows.row_coeffs(r).map(|(c, v)| (cur(c), v)).collect();
        if let (Some(link), Some(prev)) = (&data.link, prev) {
            coeffs.extend(link.row_coeffs(r).map(|(c, v)| (prev(c), v)));
        }
        lp.add_row(coeffs, Rel::Le, data.state_rhs[r]);
    }
    for r in 0..data.recourse_rows.rows {
        let coeffs: Vec<(usize, f64)> =
            data.recourse_rows.row_coeffs(r).map(|(c, v)| (cur(c), v)).collect();
        lp.add_row(coeffs, Rel::Le, data.recourse_rhs[r]);
    }
}

pub fn build_extensive_form(
    model: &MsaroModel,
    scenarios: &[ScenarioPath],
    mode: NaMode,
) -> Result<ExtensiveForm, CoreError> {
    if scenarios.is_empty() {
        return Err(CoreError::Model("extensive form needs at least one scenario".into()));
    }
    let horizon = model.horizon();
    for (s, p) in scenarios.iter().enumerate() {
        if p.stages() != horizon {
            return Err(CoreError::Model(format!(
                "scenario {s} has {} stages, model has {horizon}",
                p.stages()
            )));
        }
    }
    let sign = model.sense.canonical_sign();
    let mut lp = LinearProgram::new();
    let z = lp.add_var(0.0, 0.0, 1.0, false); // bounds widened after cost ranges are known

    let mut offsets = vec![vec![0usize; horizon]; scenarios.len()];
    for (s, _) in scenarios.iter().enumerate() {
        for t in 1..=horizon {
            let b = model.stage(t);
            offsets[s][t - 1] = lp.n_vars();
            for i in 0..b.n_vars {
                lp.add_var(b.lower[i], b.upper[i], 0.0, b.is_integer(i));
            }
        }
    }

    // worst-case epigraph and stage rows, one block per scenario
    let mut z_lo = f64::INFINITY;
    let mut z_hi = f64::NEG_INFINITY;
    for (s, path) in scenarios.iter().enumerate() {
        let mut epi: Vec<(usize, f64)> = Vec::new();
        let mut lo = 0.0;
        let mut hi = 0.0;
        for t in 1..=horizon {
            let b = model.stage(t);
            let data = model.evaluate_stage_data(t, path)?;
            for i in 0..b.n_vars {
                let c = sign * data.cost[i];
                if c != 0.0 {
                    epi.push((offsets[s][t - 1] + i, c));
                    let (a, bnd) = (c * b.lower[i], c * b.upper[i]);
                    lo += a.min(bnd);
                    hi += a.max(bnd);
                }
            }
            let cur = |i: usize| offsets[s][t - 1] + i;
            let prev = |i: usize| offsets[s][t - 2] + i;
            let prev_dyn: Option<&dyn Fn(usize) -> usize> =
                if t > 1 { Some(&prev) } else { None };
            append_scenario_rows(&mut lp, &data, &cur, prev_dyn);
        }
        epi.push((z, -1.0));
        lp.add_row(epi, Rel::Le, 0.0);
        z_lo = z_lo.min(lo);
        z_hi = z_hi.max(hi);
    }
    lp.lower[z] = z_lo - 1.0;
    lp.upper[z] = z_hi + 1.0;

    // nonanticipativity
    match mode {
        NaMode::None => {}
        NaMode::Pairwise => {
            for t in 1..=horizon {
                let n_t = model.stage(t).n_vars;
                for class in history_classes(scenarios, t, PREFIX_TOL) {
                    for pair in class.windows(2) {
                        for i in 0..n_t {
                            lp.add_row(
                                vec![
                                    (offsets[pair[0]][t - 1] + i, 1.0),
                                    (offsets[pair[1]][t - 1] + i, -1.0),
                                ],
                                Rel::Eq,
                                0.0,
                            );
                        }
                    }
                }
            }
        }
        NaMode::ConditionalMean => {
            for t in 1..=horizon {
                let n_t = model.stage(t).n_vars;
                for class in history_classes(scenarios, t, PREFIX_TOL) {
                    if class.len() < 2 {
                        continue;
                    }
                    let w = 1.0 / class.len() as f64;
                    for &s in &class {
                        for i in 0..n_t {
                            let mut coeffs = vec![(offsets[s][t - 1] + i, 1.0)];
                            for &s2 in &class {
                                coeffs.push((offsets[s2][t - 1] + i, -w));
                            }
                            lp.add_row(coeffs, Rel::Eq, 0.0);
                        }
                    }
                }
            }
        }
    }

    Ok(ExtensiveForm {
        lp,
        z,
        n_scenarios: scenarios.len(),
        offsets,
        stage_sizes: model.stages.iter().map(|b| b.n_vars).collect(),
        canonical_sign: sign,
    })
}

/// Value and solution of an exact (or relaxed) extensive-form solve, reported
/// in the model's original sense.
pub struct ExactSolution {
    pub value: f64,
    pub canonical_value: f64,
    pub result: SolveResult,
    pub form: ExtensiveForm,
}

pub fn solve_exact(model: &MsaroModel, scenarios: &[ScenarioPath]) -> Result<ExactSolution, CoreError> {
    solve_exact_with(model, scenarios, &DenseKernel, &MilpOptions::default())
}

pub fn solve_exact_with(
    model: &MsaroModel,
    scenarios: &[ScenarioPath],
    backend: &dyn SolverBackend,
    opts: &MilpOptions,
) -> Result<ExactSolution, CoreError> {
    let form = build_extensive_form(model, scenarios, NaMode::Pairwise)?;
    solve_form(model, scenarios, form, backend, opts)
}

pub(crate) fn solve_form(
    model: &MsaroModel,
    scenarios: &[ScenarioPath],
    form: ExtensiveForm,
    backend: &dyn SolverBackend,
    opts: &MilpOptions,
) -> Result<ExactSolution, CoreError> {
    let res = backend.solve_milp(&form.lp, opts)?;
    match res.status {
        SolveStatus::Optimal => {
            let canonical = res.objective;
            Ok(ExactSolution {
                value: form.canonical_sign * canonical,
                canonical_value: canonical,
                result: res,
                form,
            })
        }
        SolveStatus::Infeasible => {
            // identify a scenario that is infeasible on its own, if any
            let culprit = scenarios.iter().enumerate().find_map(|(s, p)| {
                match build_extensive_form(model, std::slice::from_ref(p), NaMode::None) {
                    Ok(f) => match backend.solve_milp(&f.lp, opts) {
                        Ok(r) if r.status == SolveStatus::Infeasible => Some(s),
                        _ => None,
                    },
                    Err(_) => None,
                }
            });
            Err(CoreError::Infeasible { scenario: culprit })
        }
        SolveStatus::Unbounded => Err(CoreError::Unbounded),
        SolveStatus::IterationLimit => Err(CoreError::SolverLimit("node limit on extensive form".into())),
    }
}

/// Perfect-information value: each scenario solved alone, worst value kept.
/// Ties report the smallest scenario index. Scenario solves run concurrently
/// and merge deterministically by index.
pub struct PiBound {
    pub value: f64,
    pub canonical_value: f64,
    pub worst_scenario: usize,
    pub per_scenario: Vec<f64>,
}

pub fn perfect_information_bound(
    model: &MsaroModel,
    scenarios: &[ScenarioPath],
) -> Result<PiBound, CoreError> {
    perfect_information_bound_with(model, scenarios, &DenseKernel, &MilpOptions::default())
}

pub fn perfect_information_bound_with(
    model: &MsaroModel,
    scenarios: &[ScenarioPath],
    backend: &dyn SolverBackend,
    opts: &MilpOptions,
) -> Result<PiBound, CoreError> {
    if scenarios.is_empty() {
        return Err(CoreError::Model("perfect information bound needs scenarios".into()));
    }
    let solved: Vec<Result<f64, CoreError>> = scenarios
        .par_iter()
        .enumerate()
        .map(|(s, p)| {
            let form = build_extensive_form(model, std::slice::from_ref(p), NaMode::None)?;
            let res = backend.solve_milp(&form.lp, opts)?;
            match res.status {
                SolveStatus::Optimal => Ok(res.objective),
                SolveStatus::Infeasible => Err(CoreError::Infeasible { scenario: Some(s) }),
                SolveStatus::Unbounded => Err(CoreError::Unbounded),
                SolveStatus::IterationLimit => {
                    Err(CoreError::SolverLimit(format!("node limit on scenario {s}")))
                }
            }
        })
        .collect();
    let mut per_scenario = Vec::with_capacity(scenarios.len());
    for r in solved {
        per_scenario.push(r?);
    }
    let (mut worst, mut idx) = (f64::NEG_INFINITY, 0);
    for (s, &v) in per_scenario.iter().enumerate() {
        if v > worst {
            worst = v;
            idx = s;
        }
    }
    let sign = model.sense.canonical_sign();
    Ok(PiBound {
        value: sign * worst,
        canonical_value: worst,
        worst_scenario: idx,
        per_scenario: per_scenario.iter().map(|v| sign * v).collect(),
    })
}
