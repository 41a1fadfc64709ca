//! Affine functions of the flat deviation vector of a budgeted polytope,
//! used to assemble robust counterparts and the adversarial subproblem
//! without ever materializing quadratic terms.

use msaro_core::{AffineExpr, BudgetedPolytope};

/// `c0 + sum terms[k].1 * delta[terms[k].0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinDelta {
    pub c0: f64,
    pub terms: Vec<(usize, f64)>,
}

impl LinDelta {
    pub fn constant(c0: f64) -> Self {
        Self { c0, terms: Vec::new() }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|&(_, c)| c == 0.0)
    }

    /// The uncertainty component `(stage, comp)` itself: `mu + sigma * delta`.
    pub fn component(set: &BudgetedPolytope, stage: usize, comp: usize) -> Self {
        let mu = set.nominal[stage - 1][comp];
        let sg = set.deviation[stage - 1][comp];
        if sg == 0.0 {
            Self::constant(mu)
        } else {
            Self { c0: mu, terms: vec![(set.flat_index(stage, comp), sg)] }
        }
    }

    pub fn from_expr(e: &AffineExpr, set: &BudgetedPolytope) -> Self {
        let mut out = Self::constant(e.constant);
        for &(t, j, c) in &e.coeffs {
            out.add_scaled(&Self::component(set, t, j), c);
        }
        out
    }

    pub fn add_scaled(&mut self, other: &LinDelta, factor: f64) {
        self.c0 += factor * other.c0;
        for &(k, c) in &other.terms {
            match self.terms.iter_mut().find(|(i, _)| *i == k) {
                Some(slot) => slot.1 += factor * c,
                None => self.terms.push((k, factor * c)),
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            c0: self.c0 * factor,
            terms: self.terms.iter().map(|&(k, c)| (k, c * factor)).collect(),
        }
    }

    pub fn eval(&self, delta: &[f64]) -> f64 {
        self.c0 + self.terms.iter().map(|&(k, c)| c * delta[k]).sum::<f64>()
    }

    /// Interval over the deviation box `[0, 1]^dim` (budget row ignored, so
    /// the range is conservative).
    pub fn range(&self) -> (f64, f64) {
        let mut lo = self.c0;
        let mut hi = self.c0;
        for &(_, c) in &self.terms {
            lo += c.min(0.0);
            hi += c.max(0.0);
        }
        (lo, hi)
    }
}

/// A linear-in-delta coefficient attached to an LP column, plus the
/// delta-only constant block: the shape of every row the budgeted builders
/// produce. Multiplying two nonconstant `LinDelta`s is the quadratic case the
/// callers must reject.
#[derive(Debug, Clone)]
pub struct RowSym {
    /// Coefficient of each referenced LP column as a function of delta.
    pub cols: Vec<(usize, LinDelta)>,
    /// Constant (in the columns) part, still a function of delta; rows are
    /// kept in `lhs <= 0` shape.
    pub rest: LinDelta,
}

impl RowSym {
    pub fn new() -> Self {
        Self { cols: Vec::new(), rest: LinDelta::constant(0.0) }
    }

    pub fn add_col(&mut self, col: usize, coeff: LinDelta) {
        match self.cols.iter_mut().find(|(c, _)| *c == col) {
            Some((_, slot)) => slot.add_scaled(&coeff, 1.0),
            None => self.cols.push((col, coeff)),
        }
    }

    /// Product of a data coefficient and a rule value, both affine in delta.
    /// Fails when both sides actually depend on delta.
    pub fn product(a: &LinDelta, b: &LinDelta) -> Result<LinDelta, ()> {
        if a.is_constant() {
            Ok(b.scaled(a.c0))
        } else if b.is_constant() {
            Ok(a.scaled(b.c0))
        } else {
            Err(())
        }
    }
}
