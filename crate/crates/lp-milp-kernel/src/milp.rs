//! Branch-and-bound over the bounded simplex: best-bound node selection,
//! most-fractional branching, ties broken by lowest variable index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::lp::{KernelError, LinearProgram, SolveResult, SolveStatus};
use crate::simplex::solve_relaxation;

#[derive(Debug, Clone)]
pub struct MilpOptions {
    /// Feasibility tolerance on constraint residuals.
    pub tol: f64,
    /// Relative optimality gap at which the incumbent is declared optimal.
    pub gap_limit: f64,
    pub node_limit: usize,
    /// A value within this distance of an integer counts as integral.
    pub int_tol: f64,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self { tol: 1e-7, gap_limit: 1e-9, node_limit: 200_000, int_tol: 1e-6 }
    }
}

struct Node {
    bound: f64,
    id: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.id == other.id
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap; invert so the lowest bound pops first,
    // ties resolved by insertion order for determinism.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn most_fractional(x: &[f64], integer: &[bool], int_tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &is_int) in integer.iter().enumerate() {
        if !is_int {
            continue;
        }
        let f = x[j] - x[j].floor();
        let dist = f.min(1.0 - f);
        if dist <= int_tol {
            continue;
        }
        match best {
            Some((_, d)) if dist <= d => {}
            _ => best = Some((j, dist)),
        }
    }
    best.map(|(j, _)| j)
}

pub fn solve_milp(lp: &LinearProgram, opts: &MilpOptions) -> Result<SolveResult, KernelError> {
    lp.validate()?;
    if !lp.has_integers() {
        let mut lp_relax = lp.clone();
        lp_relax.integer.iter_mut().for_each(|b| *b = false);
        return crate::simplex::solve_lp(&lp_relax, opts.tol);
    }

    let iter_limit = 200 * (lp.rows.len() + lp.n_vars()) + 5000;
    let mut heap = BinaryHeap::new();
    let mut next_id = 0usize;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes_processed = 0usize;

    let root = Node { bound: f64::NEG_INFINITY, id: 0, lower: lp.lower.clone(), upper: lp.upper.clone() };
    next_id += 1;
    heap.push(root);

    let gap_ok = |inc: f64, lb: f64, gap: f64| -> bool {
        if !lb.is_finite() {
            return false;
        }
        (inc - lb) <= gap * inc.abs().max(1.0)
    };

    // The heap pops the lowest bound first, so the popped bound is global.
    let mut exit_lb: Option<f64> = None;
    while let Some(node) = heap.pop() {
        let global_lb = node.bound;
        if let Some((inc, _)) = &incumbent {
            if gap_ok(*inc, global_lb, opts.gap_limit) {
                exit_lb = Some(global_lb);
                break;
            }
            if node.bound >= *inc - 1e-9 * inc.abs().max(1.0) {
                continue;
            }
        }
        if nodes_processed >= opts.node_limit {
            let (obj, x) = incumbent.unwrap_or((f64::INFINITY, vec![0.0; lp.n_vars()]));
            return Ok(SolveResult {
                status: SolveStatus::IterationLimit,
                objective: obj,
                best_bound: global_lb,
                primal: x,
                dual: None,
                reduced_costs: None,
                iterations: nodes_processed,
            });
        }
        nodes_processed += 1;

        let out = solve_relaxation(lp, Some((&node.lower, &node.upper)), iter_limit)?;
        match out.status {
            SolveStatus::Infeasible => continue,
            SolveStatus::Unbounded => {
                return Ok(SolveResult {
                    status: SolveStatus::Unbounded,
                    objective: f64::NEG_INFINITY,
                    best_bound: f64::NEG_INFINITY,
                    primal: out.x,
                    dual: None,
                    reduced_costs: None,
                    iterations: nodes_processed,
                });
            }
            SolveStatus::IterationLimit => {
                // Treat as an open node we cannot refine; keep its parent bound.
                continue;
            }
            SolveStatus::Optimal => {}
        }
        if let Some((inc, _)) = &incumbent {
            if out.objective >= *inc - 1e-9 * inc.abs().max(1.0) {
                continue;
            }
        }
        match most_fractional(&out.x, &lp.integer, opts.int_tol) {
            None => {
                let better = incumbent.as_ref().map_or(true, |(inc, _)| out.objective < *inc);
                if better {
                    incumbent = Some((out.objective, out.x));
                }
            }
            Some(j) => {
                let v = out.x[j];
                let mut left = Node {
                    bound: out.objective,
                    id: next_id,
                    lower: node.lower.clone(),
                    upper: node.upper.clone(),
                };
                next_id += 1;
                left.upper[j] = v.floor();
                if left.lower[j] <= left.upper[j] + 1e-12 {
                    heap.push(left);
                }
                let mut right = Node {
                    bound: out.objective,
                    id: next_id,
                    lower: node.lower,
                    upper: node.upper,
                };
                next_id += 1;
                right.lower[j] = v.ceil();
                if right.lower[j] <= right.upper[j] + 1e-12 {
                    heap.push(right);
                }
            }
        }
    }

    match incumbent {
        Some((obj, x)) => {
            let lb = exit_lb.unwrap_or(obj).min(obj);
            Ok(SolveResult {
                status: SolveStatus::Optimal,
                objective: obj,
                best_bound: lb,
                primal: x,
                dual: None,
                reduced_costs: None,
                iterations: nodes_processed,
            })
        }
        None => Ok(SolveResult {
            status: SolveStatus::Infeasible,
            objective: f64::INFINITY,
            best_bound: f64::INFINITY,
            primal: vec![0.0; lp.n_vars()],
            dual: None,
            reduced_costs: None,
            iterations: nodes_processed,
        }),
    }
}
