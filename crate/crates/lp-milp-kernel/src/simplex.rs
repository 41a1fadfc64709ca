//! Two-phase dense tableau simplex with bounded variables.
//!
//! Variables are shifted to `[0, u]`; nonbasic variables rest at either bound
//! and the ratio test allows bound flips. Dantzig pricing switches to Bland's
//! rule after a stall, which guarantees termination. The original matrix is
//! kept so the tableau and basic values can be refactorized from scratch:
//! long degenerate pivot runs otherwise accumulate enough roundoff to corrupt
//! the row-operated tableau, and every optimality or infeasibility claim is
//! re-verified against a fresh factorization before it is accepted.

use crate::lp::{KernelError, LinearProgram, Rel, SolveResult, SolveStatus};

const PIVOT_TOL: f64 = 1e-9;
const RATIO_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-10;
const STALL_LIMIT: usize = 40;
/// Rebuild the tableau from the original matrix this often (tightened when a
/// solve is restarted in careful mode).
const REFACTOR_EVERY: usize = 120;
const REFACTOR_EVERY_CAREFUL: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq)]
enum ColKind {
    Structural(usize),
    Slack(usize),
    Artificial(usize),
}

struct Tableau {
    m: usize,
    ncols: usize,
    /// Row-operated working tableau (B^-1 A).
    tab: Vec<Vec<f64>>,
    /// Current value of the basic variable of each row.
    val: Vec<f64>,
    basis: Vec<usize>,
    /// Untouched original rows and right-hand side, for refactorization.
    a0: Vec<Vec<f64>>,
    b0: Vec<f64>,
    /// Shifted upper bound per column (lower bound is 0 everywhere).
    ub: Vec<f64>,
    at_upper: Vec<bool>,
    in_basis: Vec<bool>,
    kind: Vec<ColKind>,
    obj: Vec<f64>,
    /// Cost vector of the current phase, kept for re-pricing.
    cost: Vec<f64>,
    iterations: usize,
    bland: bool,
    stall: usize,
    /// Set right after a refactorization, cleared by the next pivot; stops
    /// the optimality re-check from looping.
    fresh: bool,
    /// A refactorization found the basis numerically singular; the solve is
    /// unreliable and the caller restarts it under Bland's rule.
    singular: bool,
    refactor_every: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Progress,
}

impl Tableau {
    fn value_of(&self, j: usize) -> f64 {
        if self.in_basis[j] {
            let r = self.basis.iter().position(|&b| b == j).unwrap();
            self.val[r]
        } else if self.at_upper[j] {
            self.ub[j]
        } else {
            0.0
        }
    }

    fn price(&mut self, cost: Vec<f64>) {
        self.cost = cost;
        self.reprice();
    }

    /// Reduced costs from scratch for the current basis.
    fn reprice(&mut self) {
        self.obj = self.cost.clone();
        for r in 0..self.m {
            let b = self.basis[r];
            let cb = self.obj[b];
            if cb != 0.0 {
                for j in 0..self.ncols {
                    self.obj[j] -= cb * self.tab[r][j];
                }
                self.obj[b] = 0.0;
            }
        }
    }

    /// Rebuild `tab = B^-1 A` and the basic values from the original data by
    /// Gauss-Jordan elimination with partial pivoting. Returns false (leaving
    /// the tableau untouched) if the basis matrix is numerically singular.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        if m == 0 {
            self.fresh = true;
            return true;
        }
        // augmented system [B | A0 b'] where b' folds in nonbasic-at-upper
        let mut rhs_adj = self.b0.clone();
        for j in 0..self.ncols {
            if !self.in_basis[j] && self.at_upper[j] {
                for i in 0..m {
                    rhs_adj[i] -= self.a0[i][j] * self.ub[j];
                }
            }
        }
        let width = m + self.ncols + 1;
        let mut aug: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut row = Vec::with_capacity(width);
                for r in 0..m {
                    row.push(self.a0[i][self.basis[r]]);
                }
                row.extend_from_slice(&self.a0[i]);
                row.push(rhs_adj[i]);
                row
            })
            .collect();
        // eliminate the left block to the identity
        for col in 0..m {
            let piv_row = (col..m)
                .max_by(|&a, &b| aug[a][col].abs().partial_cmp(&aug[b][col].abs()).unwrap())
                .unwrap();
            if aug[piv_row][col].abs() < 1e-11 {
                self.singular = true;
                return false;
            }
            aug.swap(col, piv_row);
            let piv = aug[col][col];
            for v in aug[col].iter_mut() {
                *v /= piv;
            }
            let prow = aug[col].clone();
            for (i, row) in aug.iter_mut().enumerate() {
                if i != col {
                    let f = row[col];
                    if f != 0.0 {
                        for k in col..width {
                            row[k] -= f * prow[k];
                        }
                        row[col] = 0.0;
                    }
                }
            }
        }
        // rows of aug are ordered by elimination; left block is I in that
        // order, so row r now describes basis slot r
        for r in 0..m {
            for j in 0..self.ncols {
                self.tab[r][j] = aug[r][m + j];
            }
            self.val[r] = aug[r][width - 1];
        }
        self.reprice();
        self.fresh = true;
        true
    }

    fn entering(&self, blocked: &[bool]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.ncols {
            if self.in_basis[j] || blocked[j] || self.ub[j] == 0.0 {
                continue;
            }
            let d = self.obj[j];
            let improving = if self.at_upper[j] { d > PIVOT_TOL } else { d < -PIVOT_TOL };
            if !improving {
                continue;
            }
            if self.bland {
                return Some((j, d));
            }
            match best {
                Some((_, bd)) if d.abs() <= bd.abs() => {}
                _ => best = Some((j, d)),
            }
        }
        best
    }

    fn step(&mut self, blocked: &[bool]) -> Step {
        if self.iterations > 0 && self.iterations % self.refactor_every == 0 && !self.fresh {
            self.refactor();
        }
        if self.iterations > 2 * (self.m + self.ncols) + 100 {
            self.bland = true;
        }
        let entering = match self.entering(blocked) {
            Some(e) => Some(e),
            None if !self.fresh => {
                // verify the claim against a clean factorization
                if self.refactor() {
                    self.entering(blocked)
                } else {
                    None
                }
            }
            None => None,
        };
        let Some((j, _)) = entering else {
            return Step::Optimal;
        };
        let dir: f64 = if self.at_upper[j] { -1.0 } else { 1.0 };

        // Two-pass ratio test. Pass 1 finds the tightest step; pass 2 picks,
        // among rows binding within tolerance, the largest pivot element
        // (smallest basis index under Bland). Preferring big pivots keeps the
        // basis well-conditioned through degenerate runs.
        let row_limit = |r: usize| -> Option<(f64, bool)> {
            let a = self.tab[r][j] * dir;
            if a > RATIO_TOL {
                Some(((self.val[r] / a).max(0.0), false))
            } else if a < -RATIO_TOL {
                let cap = self.ub[self.basis[r]];
                cap.is_finite().then(|| (((cap - self.val[r]) / (-a)).max(0.0), true))
            } else {
                None
            }
        };
        let mut min_row_limit = f64::INFINITY;
        for r in 0..self.m {
            if let Some((limit, _)) = row_limit(r) {
                min_row_limit = min_row_limit.min(limit);
            }
        }
        let mut theta = self.ub[j].min(min_row_limit);
        if theta.is_infinite() {
            return Step::Unbounded;
        }
        let mut leave: Option<(usize, bool)> = None;
        if min_row_limit <= self.ub[j] {
            let mut best_mag = -1.0_f64;
            for r in 0..self.m {
                if let Some((limit, to_upper)) = row_limit(r) {
                    if limit <= min_row_limit + RATIO_TOL {
                        let mag = self.tab[r][j].abs();
                        let better = if self.bland {
                            leave.map_or(true, |(lr, _)| self.basis[r] < self.basis[lr])
                        } else {
                            mag > best_mag
                        };
                        if better {
                            best_mag = mag;
                            leave = Some((r, to_upper));
                            theta = limit.min(min_row_limit);
                        }
                    }
                }
            }
        }

        self.iterations += 1;
        self.fresh = false;
        if theta <= DEGENERATE_STEP {
            self.stall += 1;
            if self.stall > STALL_LIMIT {
                self.bland = true;
            }
        } else {
            self.stall = 0;
        }

        match leave {
            None => {
                // bound flip: the entering variable travels to its other bound
                for r in 0..self.m {
                    self.val[r] -= dir * theta * self.tab[r][j];
                }
                self.at_upper[j] = !self.at_upper[j];
            }
            Some((r, leaves_upper)) => {
                for i in 0..self.m {
                    self.val[i] -= dir * theta * self.tab[i][j];
                }
                let out = self.basis[r];
                self.in_basis[out] = false;
                self.at_upper[out] = leaves_upper;
                let entering_val = if dir > 0.0 { theta } else { self.ub[j] - theta };
                self.pivot(r, j);
                self.basis[r] = j;
                self.in_basis[j] = true;
                self.at_upper[j] = false;
                self.val[r] = entering_val;
            }
        }
        Step::Progress
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.tab[r][j];
        let row: Vec<f64> = self.tab[r].iter().map(|v| v / piv).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tab[i][j];
            if f != 0.0 {
                for c in 0..self.ncols {
                    self.tab[i][c] -= f * row[c];
                }
                self.tab[i][j] = 0.0;
            }
        }
        let f = self.obj[j];
        if f != 0.0 {
            for c in 0..self.ncols {
                self.obj[c] -= f * row[c];
            }
            self.obj[j] = 0.0;
        }
        self.tab[r] = row;
        self.tab[r][j] = 1.0;
    }

    fn run(&mut self, blocked: &[bool], iter_limit: usize) -> SolveStatus {
        loop {
            if self.iterations > iter_limit {
                return SolveStatus::IterationLimit;
            }
            match self.step(blocked) {
                Step::Optimal => return SolveStatus::Optimal,
                Step::Unbounded => return SolveStatus::Unbounded,
                Step::Progress => {}
            }
        }
    }
}

pub(crate) struct SimplexOutcome {
    pub status: SolveStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub dual: Vec<f64>,
    pub reduced: Vec<f64>,
    pub iterations: usize,
}

/// Solve the LP relaxation of `lp` (integrality flags ignored), optionally
/// overriding variable bounds (used by branch-and-bound). A solve that shows
/// signs of numerical trouble (singular refactorization or a violated
/// solution) is restarted once under Bland's rule with frequent
/// refactorization before anything is reported.
pub(crate) fn solve_relaxation(
    lp: &LinearProgram,
    bounds: Option<(&[f64], &[f64])>,
    iter_limit: usize,
) -> Result<SimplexOutcome, KernelError> {
    let scale: f64 =
        lp.rows.iter().map(|r| r.rhs.abs()).fold(1.0, f64::max);
    for attempt in 0..2 {
        let out = solve_attempt(lp, bounds, iter_limit, attempt == 1)?;
        let suspicious = match out {
            Err(()) => true,
            Ok(ref o) => {
                o.status == SolveStatus::Optimal && lp_violation(lp, bounds, &o.x) > 1e-6 * scale
            }
        };
        if !suspicious {
            return Ok(out.expect("non-suspicious outcome present"));
        }
        if attempt == 1 {
            return Ok(limit_outcome(lp.n_vars(), lp.rows.len(), iter_limit));
        }
    }
    unreachable!()
}

fn lp_violation(lp: &LinearProgram, bounds: Option<(&[f64], &[f64])>, x: &[f64]) -> f64 {
    let mut v = lp.max_violation(x);
    if let Some((l, u)) = bounds {
        for j in 0..lp.n_vars() {
            v = v.max(l[j] - x[j]).max(x[j] - u[j]);
        }
    }
    v
}

/// One simplex run; `Err(())` in the inner result flags numerical failure.
fn solve_attempt(
    lp: &LinearProgram,
    bounds: Option<(&[f64], &[f64])>,
    iter_limit: usize,
    careful: bool,
) -> Result<Result<SimplexOutcome, ()>, KernelError> {
    lp.validate()?;
    let n = lp.n_vars();
    let m = lp.rows.len();
    let (lower, upper) = match bounds {
        Some((l, u)) => (l, u),
        None => (&lp.lower[..], &lp.upper[..]),
    };
    for j in 0..n {
        if lower[j] > upper[j] + 1e-9 {
            return Ok(Ok(infeasible_outcome(n, m)));
        }
    }

    // Columns: structural | one slack per inequality row | artificials.
    let mut kind: Vec<ColKind> = (0..n).map(ColKind::Structural).collect();
    let mut slack_col = vec![usize::MAX; m];
    for (i, row) in lp.rows.iter().enumerate() {
        if row.rel != Rel::Eq {
            slack_col[i] = kind.len();
            kind.push(ColKind::Slack(i));
        }
    }
    let base_cols = kind.len();

    // Row data in shifted coordinates, negated so every rhs is nonnegative.
    let mut rhs = vec![0.0_f64; m];
    let mut sign = vec![1.0_f64; m];
    let mut dense: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (i, row) in lp.rows.iter().enumerate() {
        let mut r = vec![0.0_f64; base_cols];
        for &(j, c) in &row.coeffs {
            r[j] += c;
        }
        let shift: f64 = row.coeffs.iter().map(|&(j, c)| c * lower[j]).sum();
        let mut b = row.rhs - shift;
        match row.rel {
            Rel::Le => r[slack_col[i]] = 1.0,
            Rel::Ge => r[slack_col[i]] = -1.0,
            Rel::Eq => {}
        }
        if b < 0.0 {
            for v in r.iter_mut() {
                *v = -*v;
            }
            b = -b;
            sign[i] = -1.0;
        }
        rhs[i] = b;
        dense.push(r);
    }

    // Artificial columns where the slack cannot seed the basis.
    let mut basis = vec![usize::MAX; m];
    let mut art_col = vec![usize::MAX; m];
    for i in 0..m {
        let s = slack_col[i];
        if s != usize::MAX && dense[i][s] > 0.5 {
            basis[i] = s;
        } else {
            art_col[i] = kind.len();
            kind.push(ColKind::Artificial(i));
            basis[i] = art_col[i];
        }
    }
    let ncols = kind.len();
    for (i, d) in dense.iter_mut().enumerate() {
        d.resize(ncols, 0.0);
        if art_col[i] != usize::MAX {
            d[art_col[i]] = 1.0;
        }
    }

    let mut ub = vec![f64::INFINITY; ncols];
    for j in 0..n {
        ub[j] = upper[j] - lower[j];
    }

    let mut t = Tableau {
        m,
        ncols,
        tab: dense.clone(),
        val: rhs.clone(),
        basis,
        a0: dense,
        b0: rhs,
        ub,
        at_upper: vec![false; ncols],
        in_basis: vec![false; ncols],
        kind,
        obj: vec![0.0; ncols],
        cost: vec![0.0; ncols],
        iterations: 0,
        bland: careful,
        stall: 0,
        fresh: true,
        singular: false,
        refactor_every: if careful { REFACTOR_EVERY_CAREFUL } else { REFACTOR_EVERY },
    };
    for &b in &t.basis {
        t.in_basis[b] = true;
    }

    let is_artificial: Vec<bool> =
        t.kind.iter().map(|k| matches!(k, ColKind::Artificial(_))).collect();
    let any_artificial = is_artificial.iter().any(|&b| b);

    // Phase 1: drive artificials to zero.
    if any_artificial {
        let cost: Vec<f64> =
            is_artificial.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
        t.price(cost);
        let blocked = vec![false; t.ncols];
        if t.run(&blocked, iter_limit) == SolveStatus::IterationLimit {
            return Ok(Ok(limit_outcome(n, m, t.iterations)));
        }
        let infeas: f64 = (0..t.ncols).filter(|&j| is_artificial[j]).map(|j| t.value_of(j)).sum();
        if infeas > 1e-7 {
            if t.singular {
                return Ok(Err(()));
            }
            return Ok(Ok(SimplexOutcome {
                status: SolveStatus::Infeasible,
                objective: f64::INFINITY,
                x: vec![0.0; n],
                dual: vec![0.0; m],
                reduced: vec![0.0; n],
                iterations: t.iterations,
            }));
        }
        // Freeze artificials at zero for phase 2.
        for j in 0..t.ncols {
            if is_artificial[j] {
                t.ub[j] = 0.0;
                if !t.in_basis[j] {
                    t.at_upper[j] = false;
                }
            }
        }
    }

    // Phase 2.
    let mut cost = vec![0.0_f64; t.ncols];
    for j in 0..n {
        cost[j] = lp.objective[j];
    }
    t.price(cost);
    t.bland = careful;
    t.stall = 0;
    let status = t.run(&is_artificial, iter_limit);
    if status == SolveStatus::IterationLimit {
        return Ok(Ok(limit_outcome(n, m, t.iterations)));
    }
    if t.singular {
        return Ok(Err(()));
    }

    // Recover solution in original coordinates.
    let mut x = vec![0.0_f64; n];
    for j in 0..n {
        x[j] = lower[j] + t.value_of(j);
    }
    let objective = if status == SolveStatus::Unbounded {
        f64::NEG_INFINITY
    } else {
        lp.objective_value(&x)
    };

    // Duals from the reduced costs of slack (or artificial) columns:
    // d_slack = -y_int * coef, mapped back through the row negation.
    let mut dual = vec![0.0_f64; m];
    for i in 0..m {
        let y_int = if slack_col[i] != usize::MAX {
            let col = slack_col[i];
            let coef = sign[i]
                * match lp.rows[i].rel {
                    Rel::Le => 1.0,
                    Rel::Ge => -1.0,
                    Rel::Eq => unreachable!(),
                };
            -t.obj[col] / coef
        } else {
            -t.obj[art_col[i]]
        };
        dual[i] = sign[i] * y_int;
    }
    let reduced: Vec<f64> = (0..n).map(|j| t.obj[j]).collect();

    Ok(Ok(SimplexOutcome { status, objective, x, dual, reduced, iterations: t.iterations }))
}

fn infeasible_outcome(n: usize, m: usize) -> SimplexOutcome {
    SimplexOutcome {
        status: SolveStatus::Infeasible,
        objective: f64::INFINITY,
        x: vec![0.0; n],
        dual: vec![0.0; m],
        reduced: vec![0.0; n],
        iterations: 0,
    }
}

fn limit_outcome(n: usize, m: usize, iters: usize) -> SimplexOutcome {
    SimplexOutcome {
        status: SolveStatus::IterationLimit,
        objective: f64::NAN,
        x: vec![0.0; n],
        dual: vec![0.0; m],
        reduced: vec![0.0; n],
        iterations: iters,
    }
}

/// Public LP entry point. Requires a pure LP (no integrality flags).
pub fn solve_lp(lp: &LinearProgram, _tol: f64) -> Result<SolveResult, KernelError> {
    if lp.has_integers() {
        return Err(KernelError::IntegersPresent);
    }
    let iter_limit = 200 * (lp.rows.len() + lp.n_vars()) + 5000;
    let out = solve_relaxation(lp, None, iter_limit)?;
    Ok(SolveResult {
        status: out.status,
        objective: out.objective,
        best_bound: out.objective,
        primal: out.x,
        dual: Some(out.dual),
        reduced_costs: Some(out.reduced),
        iterations: out.iterations,
    })
}
