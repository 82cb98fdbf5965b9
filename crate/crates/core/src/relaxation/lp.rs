//! Dense two-phase primal simplex for small LPs.
//!
//! Pivoting uses Dantzig's rule and switches to Bland's rule for the rest of
//! the solve once `50 * num_vars` degenerate pivots have been made.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-10;
const MAX_PIVOTS: usize = 20_000;

/// `min objective'z` subject to `row'z >= rhs` (ineq), `row'z = rhs` (eq),
/// and `z >= var_lower` (use `-inf` for free variables).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLp {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub ineq_rows: Vec<(Vec<f64>, f64)>,
    pub eq_rows: Vec<(Vec<f64>, f64)>,
    pub var_lower: Vec<f64>,
}

impl DenseLp {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            num_vars: n,
            objective,
            ineq_rows: Vec::new(),
            eq_rows: Vec::new(),
            var_lower: vec![0.0; n],
        }
    }

    fn check(&self) -> Result<()> {
        let n = self.num_vars;
        let bad = |len: usize| Error::Dimension {
            expected: n,
            actual: len,
        };
        if self.objective.len() != n {
            return Err(bad(self.objective.len()));
        }
        if self.var_lower.len() != n {
            return Err(bad(self.var_lower.len()));
        }
        for (row, _) in self.ineq_rows.iter().chain(&self.eq_rows) {
            if row.len() != n {
                return Err(bad(row.len()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub z: Vec<f64>,
    pub value: f64,
    pub status: LpStatus,
}

/// How an original variable maps onto nonnegative standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    Shifted { col: usize, lower: f64 },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    /// `rows` constraint rows followed by the objective row; last column is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    rows: usize,
    cols: usize,
    degenerate_pivots: usize,
    bland_after: usize,
    pivots: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i][c];
            if f != 0.0 {
                for (dst, src) in self.t[i].iter_mut().zip(&pivot_row) {
                    *dst -= f * src;
                }
                self.t[i][c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn run(&mut self, allowed: &[bool]) -> Result<PhaseEnd> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::Numeric("LP pivot limit reached".into()));
            }
            let bland = self.degenerate_pivots > self.bland_after;
            let obj = &self.t[self.rows];
            let mut enter = None;
            let mut best = -COST_TOL;
            for j in 0..self.cols {
                if !allowed[j] || obj[j] >= -COST_TOL {
                    continue;
                }
                if bland {
                    enter = Some(j);
                    break;
                }
                if obj[j] < best {
                    best = obj[j];
                    enter = Some(j);
                }
            }
            let Some(c) = enter else {
                return Ok(PhaseEnd::Optimal);
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.t[i][c];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if (tie && self.basis[i] < self.basis[k]) || (!tie && ratio < best) {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                return Ok(PhaseEnd::Unbounded);
            };
            if ratio <= PIVOT_TOL {
                self.degenerate_pivots += 1;
            }
            self.pivot(r, c);
        }
    }

    fn set_objective(&mut self, cost: &[f64]) {
        let mut row = vec![0.0; self.cols + 1];
        row[..self.cols].copy_from_slice(&cost[..self.cols]);
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (dst, src) in row.iter_mut().zip(&self.t[i]) {
                    *dst -= cb * src;
                }
            }
        }
        self.t[self.rows] = row;
    }
}

pub fn solve_lp(lp: &DenseLp) -> Result<LpSolution> {
    lp.check()?;

    let mut maps = Vec::with_capacity(lp.num_vars);
    let mut ncols = 0;
    for &lower in &lp.var_lower {
        if lower.is_finite() {
            maps.push(VarMap::Shifted { col: ncols, lower });
            ncols += 1;
        } else {
            maps.push(VarMap::Split {
                pos: ncols,
                neg: ncols + 1,
            });
            ncols += 2;
        }
    }
    let n_struct = ncols;
    let n_surplus = lp.ineq_rows.len();
    let rows = lp.ineq_rows.len() + lp.eq_rows.len();
    let cols = n_struct + n_surplus + rows;
    let art0 = n_struct + n_surplus;

    let mut t = vec![vec![0.0; cols + 1]; rows + 1];
    let all_rows = lp
        .ineq_rows
        .iter()
        .map(|r| (r, true))
        .chain(lp.eq_rows.iter().map(|r| (r, false)));
    for (i, ((coef, rhs), is_ineq)) in all_rows.enumerate() {
        let mut b = *rhs;
        for (k, map) in maps.iter().enumerate() {
            match *map {
                VarMap::Shifted { col, lower } => {
                    t[i][col] = coef[k];
                    b -= coef[k] * lower;
                }
                VarMap::Split { pos, neg } => {
                    t[i][pos] = coef[k];
                    t[i][neg] = -coef[k];
                }
            }
        }
        if is_ineq {
            t[i][n_struct + i] = -1.0;
        }
        t[i][cols] = b;
        if b < 0.0 {
            for v in t[i].iter_mut() {
                *v = -*v;
            }
        }
        t[i][art0 + i] = 1.0;
    }

    let mut tab = Tableau {
        t,
        basis: (art0..art0 + rows).collect(),
        rows,
        cols,
        degenerate_pivots: 0,
        bland_after: 50 * lp.num_vars,
        pivots: 0,
    };

    // phase I
    let mut phase1_cost = vec![0.0; cols];
    for c in phase1_cost.iter_mut().skip(art0) {
        *c = 1.0;
    }
    tab.set_objective(&phase1_cost);
    let all = vec![true; cols];
    tab.run(&all)?;
    let infeas = -tab.rhs(rows);
    let scale = 1.0 + (0..rows).map(|i| tab.rhs(i).abs()).fold(0.0, f64::max);
    if infeas > 1e-9 * scale {
        return Ok(LpSolution {
            z: vec![f64::NAN; lp.num_vars],
            value: f64::NAN,
            status: LpStatus::Infeasible,
        });
    }
    // drive zero-level artificials out of the basis
    for i in 0..rows {
        if tab.basis[i] >= art0 {
            if let Some(c) = (0..art0).find(|&c| tab.t[i][c].abs() > 1e-9) {
                tab.pivot(i, c);
            }
        }
    }

    // phase II
    let mut cost = vec![0.0; cols];
    for (k, map) in maps.iter().enumerate() {
        match *map {
            VarMap::Shifted { col, .. } => cost[col] = lp.objective[k],
            VarMap::Split { pos, neg } => {
                cost[pos] = lp.objective[k];
                cost[neg] = -lp.objective[k];
            }
        }
    }
    tab.set_objective(&cost);
    let allowed: Vec<bool> = (0..cols).map(|c| c < art0).collect();
    let end = tab.run(&allowed)?;

    let mut x = vec![0.0; cols];
    for i in 0..rows {
        x[tab.basis[i]] = tab.rhs(i);
    }
    let z: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shifted { col, lower } => lower + x[col],
            VarMap::Split { pos, neg } => x[pos] - x[neg],
        })
        .collect();
    match end {
        PhaseEnd::Unbounded => Ok(LpSolution {
            z,
            value: f64::NEG_INFINITY,
            status: LpStatus::Unbounded,
        }),
        PhaseEnd::Optimal => {
            let value = z.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
            Ok(LpSolution {
                z,
                value,
                status: LpStatus::Optimal,
            })
        }
    }
}
