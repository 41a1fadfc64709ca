//! Problem and result types shared by the LP, MILP and bilinear solvers.

use std::fmt::Write as _;

/// Relation of a linear constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

/// One constraint row, `sum coeffs . x  rel  rhs`.
#[derive(Debug, Clone)]
pub struct LinRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rel: Rel,
    pub rhs: f64,
}

/// Dense-ish linear program in minimization form. All variable bounds must be
/// finite; free variables are expressed with a wide explicit box.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
    pub rows: Vec<LinRow>,
    /// Optional variable names used by `dump`; empty when unnamed.
    pub names: Vec<String>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_var(&mut self, lb: f64, ub: f64, obj: f64, integer: bool) -> usize {
        self.lower.push(lb);
        self.upper.push(ub);
        self.objective.push(obj);
        self.integer.push(integer);
        if !self.names.is_empty() {
            self.names.push(format!("x{}", self.objective.len() - 1));
        }
        self.objective.len() - 1
    }

    pub fn add_named_var(&mut self, name: &str, lb: f64, ub: f64, obj: f64, integer: bool) -> usize {
        if self.names.is_empty() {
            for i in 0..self.objective.len() {
                self.names.push(format!("x{i}"));
            }
        }
        let idx = self.add_var(lb, ub, obj, integer);
        self.names[idx] = name.to_string();
        idx
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, rel: Rel, rhs: f64) -> usize {
        self.rows.push(LinRow { coeffs, rel, rhs });
        self.rows.len() - 1
    }

    pub fn has_integers(&self) -> bool {
        self.integer.iter().any(|&b| b)
    }

    /// Structural sanity: finite ordered bounds, column indices in range.
    pub fn validate(&self) -> Result<(), KernelError> {
        let n = self.n_vars();
        if self.lower.len() != n || self.upper.len() != n || self.integer.len() != n {
            return Err(KernelError::BadProgram("variable arrays disagree in length".into()));
        }
        for j in 0..n {
            if !self.lower[j].is_finite() || !self.upper[j].is_finite() {
                return Err(KernelError::BadProgram(format!("variable {j} has non-finite bounds")));
            }
            if self.lower[j] > self.upper[j] + 1e-12 {
                return Err(KernelError::BadProgram(format!("variable {j} has lb > ub")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(KernelError::BadProgram(format!("row {i} has non-finite rhs")));
            }
            for &(j, c) in &row.coeffs {
                if j >= n {
                    return Err(KernelError::BadProgram(format!("row {i} references variable {j} out of range")));
                }
                if !c.is_finite() {
                    return Err(KernelError::BadProgram(format!("row {i} has non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    pub fn row_activity(&self, row: &LinRow, x: &[f64]) -> f64 {
        row.coeffs.iter().map(|&(j, c)| c * x[j]).sum()
    }

    /// Largest absolute constraint or bound violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for j in 0..self.n_vars() {
            v = v.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        for row in &self.rows {
            let a = self.row_activity(row, x);
            let d = match row.rel {
                Rel::Le => a - row.rhs,
                Rel::Ge => row.rhs - a,
                Rel::Eq => (a - row.rhs).abs(),
            };
            v = v.max(d);
        }
        v
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Plain-text dump in an MPS-like layout. Write-only debugging aid,
    /// never parsed back.
    pub fn dump(&self) -> String {
        let name = |j: usize| -> String {
            self.names.get(j).cloned().unwrap_or_else(|| format!("x{j}"))
        };
        let mut s = String::new();
        let _ = writeln!(s, "MINIMIZE");
        for (j, c) in self.objective.iter().enumerate() {
            if *c != 0.0 {
                let _ = writeln!(s, "  {:+} {}", c, name(j));
            }
        }
        let _ = writeln!(s, "SUBJECT TO");
        for (i, row) in self.rows.iter().enumerate() {
            let rel = match row.rel {
                Rel::Le => "<=",
                Rel::Eq => "=",
                Rel::Ge => ">=",
            };
            let terms: Vec<String> =
                row.coeffs.iter().map(|&(j, c)| format!("{:+} {}", c, name(j))).collect();
            let _ = writeln!(s, "  r{}: {} {} {}", i, terms.join(" "), rel, row.rhs);
        }
        let _ = writeln!(s, "BOUNDS");
        for j in 0..self.n_vars() {
            let tag = if self.integer[j] { " integer" } else { "" };
            let _ = writeln!(s, "  {} <= {} <= {}{}", self.lower[j], name(j), self.upper[j], tag);
        }
        s
    }
}

/// Termination status of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Solution report. `dual` and `reduced_costs` are populated by the LP path
/// only. For MILP solves `best_bound` carries the proven bound (min sense).
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub dual: Option<Vec<f64>>,
    pub reduced_costs: Option<Vec<f64>>,
    pub best_bound: f64,
    pub iterations: usize,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Dual objective `y.b + sum_j rc_j * (active bound of j)`, computable for
    /// LP solves. Agrees with the primal objective at optimality.
    pub fn dual_objective(&self, lp: &LinearProgram) -> Option<f64> {
        let y = self.dual.as_ref()?;
        let rc = self.reduced_costs.as_ref()?;
        let mut v: f64 = lp.rows.iter().zip(y).map(|(r, yi)| yi * r.rhs).sum();
        for j in 0..lp.n_vars() {
            if rc[j] > 0.0 {
                v += rc[j] * lp.lower[j];
            } else {
                v += rc[j] * lp.upper[j];
            }
        }
        Some(v)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum KernelError {
    #[error("malformed program: {0}")]
    BadProgram(String),
    #[error("solve_lp requires a relaxation without integrality flags")]
    IntegersPresent,
    #[error("bilinear product structure invalid: {0}")]
    BadBilinear(String),
}
