//! Scalars and matrices whose entries are affine functions of the uncertainty
//! components. A component is addressed by `(stage, index)` with stages
//! counted from 1; stage 1 carries no components (the first stage is
//! deterministic by convention), so every reference starts at stage 2.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::scenario::ScenarioPath;

/// `constant + sum coeffs[(t, j)] * xi[t][j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineExpr {
    #[serde(rename = "const")]
    pub constant: f64,
    /// `(stage, component, coefficient)`, kept sorted and deduplicated.
    #[serde(default)]
    pub coeffs: Vec<(usize, usize, f64)>,
}

impl AffineExpr {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, coeffs: Vec::new() }
    }

    pub fn term(c: f64, stage: usize, comp: usize, coeff: f64) -> Self {
        Self { constant: c, coeffs: vec![(stage, comp, coeff)] }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|&(_, _, c)| c == 0.0)
    }

    pub fn normalize(&mut self) {
        self.coeffs.sort_by_key(|&(t, j, _)| (t, j));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(self.coeffs.len());
        for &(t, j, c) in &self.coeffs {
            match out.last_mut() {
                Some(last) if last.0 == t && last.1 == j => last.2 += c,
                _ => out.push((t, j, c)),
            }
        }
        out.retain(|&(_, _, c)| c != 0.0);
        self.coeffs = out;
    }

    /// Highest stage this expression reads, or 1 when constant.
    pub fn max_stage(&self) -> usize {
        self.coeffs.iter().map(|&(t, _, _)| t).max().unwrap_or(1)
    }

    /// Evaluate at a scenario prefix covering stages `1..=t_avail`.
    pub fn eval(&self, prefix: &ScenarioPath) -> Result<f64, CoreError> {
        let mut v = self.constant;
        for &(t, j, c) in &self.coeffs {
            let stage_vals = prefix
                .outcomes
                .get(t - 1)
                .ok_or(CoreError::PrefixTooShort { required_stage: t })?;
            let x = stage_vals
                .get(j)
                .ok_or_else(|| CoreError::Model(format!("component ({t},{j}) missing in scenario")))?;
            v += c * x;
        }
        Ok(v)
    }

    /// Interval of values over the componentwise box `[lo, hi]` per component.
    /// `bounds(t, j)` provides the box of component `(t, j)`.
    pub fn range_on(&self, bounds: &dyn Fn(usize, usize) -> (f64, f64)) -> (f64, f64) {
        let mut lo = self.constant;
        let mut hi = self.constant;
        for &(t, j, c) in &self.coeffs {
            let (bl, bh) = bounds(t, j);
            let (a, b) = (c * bl, c * bh);
            lo += a.min(b);
            hi += a.max(b);
        }
        (lo, hi)
    }
}

/// Sparse matrix of affine entries; at most one entry per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMatrix {
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub entries: Vec<(usize, usize, AffineExpr)>,
}

impl AffineMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: Vec::new() }
    }

    pub fn column(entries: Vec<(usize, AffineExpr)>, rows: usize) -> Self {
        Self { rows, cols: 1, entries: entries.into_iter().map(|(r, e)| (r, 0, e)).collect() }
    }

    pub fn set(&mut self, r: usize, c: usize, e: AffineExpr) {
        debug_assert!(r < self.rows && c < self.cols);
        if let Some(slot) = self.entries.iter_mut().find(|(er, ec, _)| *er == r && *ec == c) {
            slot.2 = e;
        } else {
            self.entries.push((r, c, e));
        }
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(|(_, _, e)| e.is_constant())
    }

    pub fn max_stage(&self) -> usize {
        self.entries.iter().map(|(_, _, e)| e.max_stage()).max().unwrap_or(1)
    }

    pub fn check(&self) -> Result<(), String> {
        let mut seen = std::collections::HashSet::new();
        for (r, c, _) in &self.entries {
            if *r >= self.rows || *c >= self.cols {
                return Err(format!("entry ({r},{c}) outside {}x{}", self.rows, self.cols));
            }
            if !seen.insert((*r, *c)) {
                return Err(format!("duplicate entry at ({r},{c})"));
            }
        }
        Ok(())
    }

    /// Numeric instantiation at a scenario prefix.
    pub fn eval(&self, prefix: &ScenarioPath) -> Result<NumericMatrix, CoreError> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for (r, c, e) in &self.entries {
            entries.push((*r, *c, e.eval(prefix)?));
        }
        Ok(NumericMatrix { rows: self.rows, cols: self.cols, entries })
    }

    /// Dense single-column evaluation, for cost and rhs vectors.
    pub fn eval_column(&self, prefix: &ScenarioPath) -> Result<Vec<f64>, CoreError> {
        debug_assert_eq!(self.cols, 1);
        let mut v = vec![0.0; self.rows];
        for (r, _, e) in &self.entries {
            v[*r] += e.eval(prefix)?;
        }
        Ok(v)
    }
}

/// Fully evaluated sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl NumericMatrix {
    pub fn row_coeffs(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().filter(move |(er, _, _)| *er == r).map(|&(_, c, v)| (c, v))
    }

    pub fn dense_column(&self) -> Vec<f64> {
        debug_assert_eq!(self.cols, 1);
        let mut v = vec![0.0; self.rows];
        for &(r, _, x) in &self.entries {
            v[r] += x;
        }
        v
    }
}
