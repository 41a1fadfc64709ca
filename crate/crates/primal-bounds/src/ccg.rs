//! Constraint-and-column generation: a master over the significant scenarios
//! alternates with an adversarial subproblem that either returns the
//! worst-case scenario for the incumbent rule (optimality) or a scenario
//! whose recourse set is empty (feasibility). The loop is shared between the
//! linear and the piecewise-constant rule formulations.

use std::time::{Duration, Instant};

use lp_milp_kernel::{solve_milp, MilpOptions, SolveStatus};
use msaro_core::{ScenarioPath, UncertaintySet};
use rayon::prelude::*;

use crate::error::PrimalError;
use crate::kkt;
use crate::two_stage::{TwoStageLdr, TwoStageLdrPolicy};

/// Default relative gap for finite scenario sets.
pub const FINITE_GAP_TOL: f64 = 1e-6;
/// Default stopping gap for budgeted-polytope runs.
pub const BUDGETED_GAP_TOL: f64 = 0.05;
/// A subproblem scenario this close (componentwise) to an existing member of
/// the significant set stops the loop instead of stalling on it.
pub const DUPLICATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct CcgOptions {
    /// Relative gap between the certified bounds; `None` picks the default
    /// for the uncertainty kind.
    pub gap_tol: Option<f64>,
    pub max_iter: usize,
    /// Box on the rule coefficients.
    pub beta_box: f64,
    /// Box on the inner-problem dual multipliers of the monolithic
    /// adversarial program.
    pub dual_box: f64,
    pub milp: MilpOptions,
    pub time_budget: Option<Duration>,
    /// Sample size and seed of the heuristic subproblem used for
    /// piecewise-constant rules over a polytope.
    pub pcdr_samples: usize,
    pub pcdr_seed: u64,
}

impl Default for CcgOptions {
    fn default() -> Self {
        Self {
            gap_tol: None,
            max_iter: 60,
            beta_box: 1e5,
            dual_box: 1e5,
            milp: MilpOptions::default(),
            time_budget: None,
            pcdr_samples: 50,
            pcdr_seed: 0,
        }
    }
}

impl CcgOptions {
    pub fn effective_gap(&self, set: &UncertaintySet) -> f64 {
        self.gap_tol.unwrap_or(match set {
            UncertaintySet::BudgetedPolytope(_) => BUDGETED_GAP_TOL,
            _ => FINITE_GAP_TOL,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcgStatus {
    Converged,
    IterationLimit,
    TimeLimit,
    /// The subproblem returned a scenario already in the significant set;
    /// the current interval is certified and the loop stops.
    DuplicateScenario,
}

#[derive(Debug, Clone)]
pub struct CcgIterRecord {
    /// Canonical (minimization) master bound.
    pub lower: f64,
    /// Canonical best policy value so far.
    pub upper: f64,
    pub n_scenarios: usize,
    pub subproblem_ms: u128,
}

#[derive(Debug, Clone)]
pub struct CcgState {
    pub scenarios: Vec<ScenarioPath>,
    /// Significant scenarios with nonempty recourse for some incumbent.
    pub feasible: Vec<bool>,
    pub log: Vec<CcgIterRecord>,
    pub status: CcgStatus,
}

impl CcgState {
    /// Iteration log as CSV: `iter,lb,ub,n_scenarios,subproblem_ms`
    /// (canonical minimization bounds).
    pub fn log_csv(&self) -> String {
        let mut s = String::from("iter,lb,ub,n_scenarios,subproblem_ms\n");
        for (k, rec) in self.log.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                k, rec.lower, rec.upper, rec.n_scenarios, rec.subproblem_ms
            ));
        }
        s
    }
}

pub(crate) struct MasterSol {
    /// Canonical master objective (the certified lower end).
    pub objective: f64,
    pub first: Vec<f64>,
    pub stage1_cost: f64,
}

pub(crate) enum SubOutcome {
    /// Worst-case second-stage value (canonical, including the stage cost of
    /// the ruled variables) and its scenario.
    Worst { value: f64, path: ScenarioPath, heuristic: bool },
    /// A scenario with empty recourse space for the incumbent first stage.
    Infeasible { path: ScenarioPath },
}

pub(crate) trait CcgFormulation {
    fn solve_master(
        &self,
        scenarios: &[ScenarioPath],
        feasible: &[bool],
        opts: &CcgOptions,
    ) -> Result<MasterSol, PrimalError>;

    fn subproblem(&self, first: &[f64], opts: &CcgOptions) -> Result<SubOutcome, PrimalError>;

    fn nominal(&self) -> Result<ScenarioPath, PrimalError>;
}

pub(crate) struct CcgRun {
    pub lower: f64,
    pub upper: f64,
    pub best_first: Vec<f64>,
    pub state: CcgState,
    pub heuristic_subproblem: bool,
}

pub(crate) fn ccg_loop<F: CcgFormulation>(
    form: &F,
    set: &UncertaintySet,
    opts: &CcgOptions,
) -> Result<CcgRun, PrimalError> {
    let gap_tol = opts.effective_gap(set);
    let start = Instant::now();
    let deadline_hit =
        |start: &Instant| opts.time_budget.map_or(false, |b| start.elapsed() >= b);

    let mut state = CcgState {
        scenarios: vec![form.nominal()?],
        feasible: vec![true],
        log: Vec::new(),
        status: CcgStatus::IterationLimit,
    };
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut best_first: Vec<f64> = Vec::new();
    let mut heuristic = false;

    for _iter in 0..opts.max_iter {
        let master = form.solve_master(&state.scenarios, &state.feasible, opts)?;
        lower = lower.max(master.objective);
        if best_first.is_empty() {
            best_first = master.first.clone();
        }

        let sub_t0 = Instant::now();
        let sub = form.subproblem(&master.first, opts)?;
        let sub_ms = sub_t0.elapsed().as_millis();

        let (new_path, feasible_sub) = match sub {
            SubOutcome::Worst { value, path, heuristic: h } => {
                heuristic |= h;
                let candidate = master.stage1_cost + value;
                if candidate < upper {
                    upper = candidate;
                    best_first = master.first.clone();
                }
                (path, true)
            }
            SubOutcome::Infeasible { path } => (path, false),
        };
        state.log.push(CcgIterRecord {
            lower,
            upper,
            n_scenarios: state.scenarios.len(),
            subproblem_ms: sub_ms,
        });

        if upper.is_finite() && (upper - lower) <= gap_tol * lower.abs().max(1e-9) {
            state.status = CcgStatus::Converged;
            break;
        }
        let duplicate = state
            .scenarios
            .iter()
            .any(|p| p.prefix_eq(&new_path, p.stages(), DUPLICATE_TOL));
        if duplicate {
            state.status = CcgStatus::DuplicateScenario;
            break;
        }
        state.scenarios.push(new_path);
        state.feasible.push(feasible_sub);
        if deadline_hit(&start) {
            state.status = CcgStatus::TimeLimit;
            break;
        }
    }

    Ok(CcgRun { lower, upper, best_first, state, heuristic_subproblem: heuristic })
}

// ------------------------------------------------------------------ LDR case

/// Outcome of a constraint-and-column generation run, reported in the
/// model's original sense. `value` is the certified policy bound (upper for
/// minimization, lower for maximization); `relaxation` is the other end of
/// the interval.
#[derive(Debug)]
pub struct CcgOutcome {
    pub value: f64,
    pub relaxation: f64,
    pub policy: TwoStageLdrPolicy,
    pub state: CcgState,
    pub heuristic_subproblem: bool,
}

impl CcgOutcome {
    pub fn gap(&self) -> f64 {
        (self.value - self.relaxation).abs() / self.relaxation.abs().max(1e-9)
    }
}

impl CcgFormulation for TwoStageLdr {
    fn solve_master(
        &self,
        scenarios: &[ScenarioPath],
        feasible: &[bool],
        opts: &CcgOptions,
    ) -> Result<MasterSol, PrimalError> {
        let (lp, _map) = self.build_master(scenarios, feasible, opts.beta_box)?;
        let res = solve_milp(&lp, &opts.milp)?;
        match res.status {
            SolveStatus::Optimal => {
                let first = res.primal[..self.first_stage_len()].to_vec();
                let stage1_cost = self.stage1_cost(&first);
                Ok(MasterSol { objective: res.objective, first, stage1_cost })
            }
            SolveStatus::Infeasible => Err(PrimalError::MasterInfeasible),
            s => Err(PrimalError::Subproblem(format!("master ended with {s:?}"))),
        }
    }

    fn subproblem(&self, first: &[f64], opts: &CcgOptions) -> Result<SubOutcome, PrimalError> {
        match &self.model.uncertainty {
            UncertaintySet::BudgetedPolytope(set) => {
                if let Some(delta) = kkt::adversarial_feasibility(self, first, set, opts)? {
                    return Ok(SubOutcome::Infeasible { path: set.path_for(&delta) });
                }
                let (value, delta) = kkt::adversarial_optimality(self, first, set, opts)?;
                Ok(SubOutcome::Worst { value, path: set.path_for(&delta), heuristic: false })
            }
            _ => {
                let paths = self
                    .model
                    .uncertainty
                    .enumerate()
                    .ok_or_else(|| PrimalError::Unsupported("subproblem needs a finite set or polytope".into()))?;
                finite_subproblem(self, first, &paths, &opts.milp)
            }
        }
    }

    fn nominal(&self) -> Result<ScenarioPath, PrimalError> {
        Ok(self.model.uncertainty.nominal_path()?)
    }
}

/// Scenario loop of the finite-set adversarial problem; solves run
/// concurrently and merge deterministically by index.
pub(crate) fn finite_subproblem(
    ts: &TwoStageLdr,
    first: &[f64],
    paths: &[ScenarioPath],
    milp: &MilpOptions,
) -> Result<SubOutcome, PrimalError> {
    let results: Vec<Result<Option<f64>, PrimalError>> = paths
        .par_iter()
        .map(|path| {
            let (lp, state_cost, violation) = ts.build_inner(first, path)?;
            if violation > lp_milp_kernel::FEAS_TOL {
                return Ok(None);
            }
            let res = solve_milp(&lp, milp)?;
            match res.status {
                SolveStatus::Optimal => Ok(Some(state_cost + res.objective)),
                SolveStatus::Infeasible => Ok(None),
                s => Err(PrimalError::Subproblem(format!("inner solve ended with {s:?}"))),
            }
        })
        .collect();
    let mut worst: Option<(f64, usize)> = None;
    for (s, r) in results.into_iter().enumerate() {
        match r? {
            None => return Ok(SubOutcome::Infeasible { path: paths[s].clone() }),
            Some(v) => {
                if worst.map_or(true, |(w, _)| v > w) {
                    worst = Some((v, s));
                }
            }
        }
    }
    let (value, idx) = worst.expect("nonempty scenario set");
    Ok(SubOutcome::Worst { value, path: paths[idx].clone(), heuristic: false })
}

/// Full constraint-and-column generation for the two-stage linear rule.
pub fn ccg_solve(ts: &TwoStageLdr, opts: &CcgOptions) -> Result<CcgOutcome, PrimalError> {
    let run = ccg_loop(ts, &ts.model.uncertainty.clone(), opts)?;
    Ok(CcgOutcome {
        value: ts.sign * run.upper,
        relaxation: ts.sign * run.lower,
        policy: ts.policy_from(&run.best_first),
        state: run.state,
        heuristic_subproblem: run.heuristic_subproblem,
    })
}

/// One master solve, exposed on its own: the certified relaxation value and
/// incumbent first stage over the given significant set.
pub fn ccg_master(
    ts: &TwoStageLdr,
    scenarios: &[ScenarioPath],
    feasible: &[bool],
    opts: &CcgOptions,
) -> Result<(f64, TwoStageLdrPolicy, f64), PrimalError> {
    let sol = ts.solve_master(scenarios, feasible, opts)?;
    Ok((ts.sign * sol.objective, ts.policy_from(&sol.first), sol.objective))
}

/// One adversarial subproblem solve for a given first-stage decision.
/// Returns the worst scenario and the canonical second-stage value, or the
/// infeasibility certificate scenario.
pub fn ccg_subproblem(
    ts: &TwoStageLdr,
    policy: &TwoStageLdrPolicy,
    opts: &CcgOptions,
) -> Result<(Option<f64>, ScenarioPath), PrimalError> {
    let mut first = policy.x1.clone();
    for block in &policy.beta {
        for per_var in block {
            first.extend_from_slice(per_var);
        }
    }
    match CcgFormulation::subproblem(ts, &first, opts)? {
        SubOutcome::Worst { value, path, .. } => Ok((Some(value), path)),
        SubOutcome::Infeasible { path } => Ok((None, path)),
    }
}
