//! Alternating-fix heuristic for bilinear programs whose product terms pair a
//! distinguished variable group with the rest of the variables. Fixing either
//! side reduces the program to a MILP, so the heuristic ping-pongs between the
//! two sides, multi-started from seed-driven initial points. Any feasible
//! point it returns satisfies every constraint, which is what makes the
//! objective usable as a bound by the callers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lp::{KernelError, LinearProgram, SolveResult, SolveStatus};
use crate::milp::{solve_milp, MilpOptions};

/// `coeff * x[a] * x[b]` added to `row` (or to the objective when `row` is
/// `None`). `a` must belong to the program's fixed group, `b` must not.
#[derive(Debug, Clone)]
pub struct ProductTerm {
    pub row: Option<usize>,
    pub a: usize,
    pub b: usize,
    pub coeff: f64,
}

#[derive(Debug, Clone)]
pub struct BilinearProgram {
    pub base: LinearProgram,
    pub products: Vec<ProductTerm>,
    /// Variables on the `a` side of every product.
    pub group_a: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct BilinearOptions {
    pub rounds: usize,
    pub starts: usize,
    pub tol: f64,
    pub seed: u64,
    pub milp: MilpOptions,
    /// Initial values for `group_a` used by the first start; remaining starts
    /// draw uniformly inside the group bounds.
    pub initial_a: Option<Vec<f64>>,
}

impl Default for BilinearOptions {
    fn default() -> Self {
        Self { rounds: 50, starts: 5, tol: 1e-6, seed: 0, milp: MilpOptions::default(), initial_a: None }
    }
}

impl BilinearProgram {
    pub fn validate(&self) -> Result<(), KernelError> {
        self.base.validate()?;
        let n = self.base.n_vars();
        let mut in_a = vec![false; n];
        for &j in &self.group_a {
            if j >= n {
                return Err(KernelError::BadBilinear(format!("group variable {j} out of range")));
            }
            in_a[j] = true;
        }
        for p in &self.products {
            if p.a >= n || p.b >= n {
                return Err(KernelError::BadBilinear("product references variable out of range".into()));
            }
            if !in_a[p.a] {
                return Err(KernelError::BadBilinear(format!("product a-side {} not in group", p.a)));
            }
            if in_a[p.b] {
                return Err(KernelError::BadBilinear(format!("product b-side {} is in the fixed group", p.b)));
            }
            if let Some(r) = p.row {
                if r >= self.base.rows.len() {
                    return Err(KernelError::BadBilinear(format!("product row {r} out of range")));
                }
            }
        }
        Ok(())
    }

    /// All `b`-side variables in product terms (sorted, unique).
    fn b_vars(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.products.iter().map(|p| p.b).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Pin the group-a variables and fold products into linear coefficients.
    fn fix_a(&self, values: &[f64]) -> LinearProgram {
        let mut lp = self.base.clone();
        for (slot, &j) in self.group_a.iter().enumerate() {
            let v = values[slot].clamp(lp.lower[j], lp.upper[j]);
            lp.lower[j] = v;
            lp.upper[j] = v;
        }
        for p in &self.products {
            let slot = self.group_a.iter().position(|&g| g == p.a).unwrap();
            let add = p.coeff * values[slot].clamp(self.base.lower[p.a], self.base.upper[p.a]);
            match p.row {
                None => lp.objective[p.b] += add,
                Some(r) => lp.rows[r].coeffs.push((p.b, add)),
            }
        }
        lp
    }

    fn fix_b(&self, values: &[(usize, f64)]) -> LinearProgram {
        let mut lp = self.base.clone();
        let val = |j: usize| values.iter().find(|(v, _)| *v == j).map(|(_, x)| *x).unwrap();
        for &(j, v) in values {
            let v = v.clamp(lp.lower[j], lp.upper[j]);
            lp.lower[j] = v;
            lp.upper[j] = v;
        }
        for p in &self.products {
            let add = p.coeff * val(p.b).clamp(self.base.lower[p.b], self.base.upper[p.b]);
            match p.row {
                None => lp.objective[p.a] += add,
                Some(r) => lp.rows[r].coeffs.push((p.a, add)),
            }
        }
        lp
    }

    /// Objective of the bilinear program at a full assignment.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        let mut v = self.base.objective_value(x);
        for p in &self.products {
            if p.row.is_none() {
                v += p.coeff * x[p.a] * x[p.b];
            }
        }
        v
    }

    /// Largest violation of the bilinear rows (linear part plus products)
    /// and variable bounds at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut acts: Vec<f64> =
            self.base.rows.iter().map(|r| self.base.row_activity(r, x)).collect();
        for p in &self.products {
            if let Some(r) = p.row {
                acts[r] += p.coeff * x[p.a] * x[p.b];
            }
        }
        let mut v: f64 = 0.0;
        for j in 0..self.base.n_vars() {
            v = v.max(self.base.lower[j] - x[j]).max(x[j] - self.base.upper[j]);
        }
        for (r, act) in self.base.rows.iter().zip(&acts) {
            let d = match r.rel {
                crate::lp::Rel::Le => act - r.rhs,
                crate::lp::Rel::Ge => r.rhs - act,
                crate::lp::Rel::Eq => (act - r.rhs).abs(),
            };
            v = v.max(d);
        }
        v
    }
}

pub fn solve_bilinear(bp: &BilinearProgram, opts: &BilinearOptions) -> Result<SolveResult, KernelError> {
    solve_bilinear_with(bp, opts, &|lp, mo| solve_milp(lp, mo))
}

/// Alternating solve where the inner MILP solves go through `solve`, so an
/// external backend can supply its own kernel.
pub fn solve_bilinear_with(
    bp: &BilinearProgram,
    opts: &BilinearOptions,
    solve: &dyn Fn(&LinearProgram, &MilpOptions) -> Result<SolveResult, KernelError>,
) -> Result<SolveResult, KernelError> {
    bp.validate()?;
    let b_vars = bp.b_vars();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut half_solves = 0usize;

    for start in 0..opts.starts.max(1) {
        let mut a_vals: Vec<f64> = if start == 0 {
            match &opts.initial_a {
                Some(v) => v.clone(),
                None => bp
                    .group_a
                    .iter()
                    .map(|&j| 0.5 * (bp.base.lower[j] + bp.base.upper[j]))
                    .collect(),
            }
        } else {
            bp.group_a
                .iter()
                .map(|&j| {
                    let (l, u) = (bp.base.lower[j], bp.base.upper[j]);
                    if u > l {
                        rng.gen_range(l..=u)
                    } else {
                        l
                    }
                })
                .collect()
        };

        let mut prev_obj = f64::INFINITY;
        for _round in 0..opts.rounds.max(1) {
            // Solve for everything except group a.
            let lp_b = bp.fix_a(&a_vals);
            let res_b = solve(&lp_b, &opts.milp)?;
            half_solves += 1;
            if !res_b.is_optimal() {
                break;
            }
            let obj = bp.objective_value(&res_b.primal);
            if best.as_ref().map_or(true, |(bo, _)| obj < *bo) {
                best = Some((obj, res_b.primal.clone()));
            }

            // Solve for group a with the b side pinned.
            let fixed_b: Vec<(usize, f64)> = b_vars.iter().map(|&j| (j, res_b.primal[j])).collect();
            let lp_a = bp.fix_b(&fixed_b);
            let res_a = solve(&lp_a, &opts.milp)?;
            half_solves += 1;
            if !res_a.is_optimal() {
                break;
            }
            let obj_a = bp.objective_value(&res_a.primal);
            if best.as_ref().map_or(true, |(bo, _)| obj_a < *bo) {
                best = Some((obj_a, res_a.primal.clone()));
            }
            a_vals = bp.group_a.iter().map(|&j| res_a.primal[j]).collect();

            let cur = obj_a.min(obj);
            if prev_obj - cur < opts.tol * (1.0 + cur.abs()) {
                break;
            }
            prev_obj = cur;
        }
    }

    match best {
        Some((obj, x)) => Ok(SolveResult {
            status: SolveStatus::Optimal,
            objective: obj,
            best_bound: f64::NEG_INFINITY,
            primal: x,
            dual: None,
            reduced_costs: None,
            iterations: half_solves,
        }),
        None => Ok(SolveResult {
            status: SolveStatus::Infeasible,
            objective: f64::INFINITY,
            best_bound: f64::NEG_INFINITY,
            primal: vec![0.0; bp.base.n_vars()],
            dual: None,
            reduced_costs: None,
            iterations: half_solves,
        }),
    }
}
