//! Convex subproblems over the feasible set: the parametric support problem
//! `min f0(x) - 2 lambda'Cx`, linear bound problems, and phase-I.

mod barrier;

use nalgebra::{DMatrix, DVector};

use crate::dc::{DcDecomposition, OutcomePoint};
use crate::error::{check_dim, Error, Result};
use crate::instance::{psd_tol, QcqpInstance};
use crate::linalg::jacobi_eigen;

use barrier::{BarrierConstraint, BarrierOptions, BarrierProblem, BarrierStatus};

/// Required margin of the phase-I point: every residual `<= -TOL_INTERIOR`.
pub const TOL_INTERIOR: f64 = 1e-6;

/// Lower cap on the phase-I slack so that phase-I stays bounded even when the
/// feasible set is not.
const PHASE_ONE_SLACK_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    /// Only valid for linear objectives.
    Maximize,
}

/// `min/max x'Px + c'x` over the instance's feasible set.
#[derive(Debug, Clone)]
pub struct ConvexProgram<'a> {
    pub p: DMatrix<f64>,
    pub c: DVector<f64>,
    pub feasible_set: &'a QcqpInstance,
    pub sense: Sense,
}

impl<'a> ConvexProgram<'a> {
    pub fn minimize(p: DMatrix<f64>, c: DVector<f64>, feasible_set: &'a QcqpInstance) -> Self {
        Self {
            p,
            c,
            feasible_set,
            sense: Sense::Minimize,
        }
    }

    pub fn linear(c: DVector<f64>, feasible_set: &'a QcqpInstance, sense: Sense) -> Self {
        let n = c.len();
        Self {
            p: DMatrix::zeros(n, n),
            c,
            feasible_set,
            sense,
        }
    }

    /// Objective value in the program's own sense.
    pub fn value_at(&self, x: &DVector<f64>) -> f64 {
        (&self.p * x).dot(x) + self.c.dot(x)
    }

    fn validate(&self) -> Result<()> {
        let n = self.feasible_set.n();
        check_dim(n, self.c.len())?;
        check_dim(n, self.p.nrows())?;
        check_dim(n, self.p.ncols())?;
        let is_zero = self.p.iter().all(|&v| v == 0.0);
        if self.sense == Sense::Maximize && !is_zero {
            return Err(Error::Numeric(
                "maximization requires a linear objective".into(),
            ));
        }
        if !is_zero {
            let e = jacobi_eigen(&self.p)?;
            if e.values.min() < -psd_tol(&self.p) {
                return Err(Error::Numeric("objective matrix is not PSD".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericFailure,
}

#[derive(Debug, Clone)]
pub struct ConvexSolution {
    pub x: DVector<f64>,
    pub value: f64,
    pub status: ConvexStatus,
    pub kkt_residual: f64,
}

/// The support problem for direction `lambda`: `P = Q+`, `c = q - 2C'lambda`.
pub fn build_cp<'a>(
    dc: &DcDecomposition,
    inst: &'a QcqpInstance,
    lambda: &DVector<f64>,
) -> Result<ConvexProgram<'a>> {
    check_dim(dc.r(), lambda.len())?;
    check_dim(inst.n(), dc.n())?;
    let c = &dc.q_vec - dc.c.transpose() * lambda * 2.0;
    Ok(ConvexProgram::minimize(dc.q_plus.clone(), c, inst))
}

fn instance_constraints(inst: &QcqpInstance) -> Vec<BarrierConstraint> {
    let n = inst.n();
    let mut cons = Vec::with_capacity(inst.num_constraints());
    for i in 0..inst.m() {
        cons.push(BarrierConstraint::linear(
            inst.a.row(i).transpose(),
            inst.b[i],
        ));
    }
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = -1.0;
        cons.push(BarrierConstraint::linear(e, 0.0));
    }
    for qc in &inst.quad_constraints {
        cons.push(BarrierConstraint {
            hess: Some(qc.matrix.clone()),
            lin: qc.linear.clone(),
            rhs: qc.rhs,
        });
    }
    cons
}

/// Solves `prog` from a strictly feasible `start`.
pub fn solve_convex(prog: &ConvexProgram<'_>, start: &DVector<f64>) -> Result<ConvexSolution> {
    prog.validate()?;
    check_dim(prog.feasible_set.n(), start.len())?;
    let sign = match prog.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let is_zero = prog.p.iter().all(|&v| v == 0.0);
    let problem = BarrierProblem {
        p: (!is_zero).then(|| prog.p.clone()),
        c: &prog.c * sign,
        constraints: instance_constraints(prog.feasible_set),
    };
    let res = barrier::solve(&problem, start, &BarrierOptions::default());
    let status = match res.status {
        BarrierStatus::Optimal => ConvexStatus::Optimal,
        BarrierStatus::Unbounded => ConvexStatus::Unbounded,
        BarrierStatus::NumericFailure => ConvexStatus::NumericFailure,
    };
    Ok(ConvexSolution {
        value: prog.value_at(&res.z),
        x: res.z,
        status,
        kkt_residual: res.kkt_residual,
    })
}

/// Minimizes the largest constraint residual `s` over `(x, s)` and returns `x`
/// if every residual is at most `-TOL_INTERIOR` there.
pub fn find_interior_point(inst: &QcqpInstance) -> Result<DVector<f64>> {
    let n = inst.n();
    let k = n + 1;
    let lift = |g: BarrierConstraint| {
        let mut lin = DVector::zeros(k);
        lin.rows_mut(0, n).copy_from(&g.lin);
        lin[n] = -1.0;
        let hess = g.hess.map(|h| {
            let mut big = DMatrix::zeros(k, k);
            big.view_mut((0, 0), (n, n)).copy_from(&h);
            big
        });
        BarrierConstraint {
            hess,
            lin,
            rhs: g.rhs,
        }
    };
    let mut constraints: Vec<_> = instance_constraints(inst).into_iter().map(lift).collect();
    let mut floor = DVector::zeros(k);
    floor[n] = -1.0;
    constraints.push(BarrierConstraint::linear(floor, PHASE_ONE_SLACK_CAP));

    let mut c = DVector::zeros(k);
    c[n] = 1.0;
    let problem = BarrierProblem {
        p: None,
        c,
        constraints,
    };

    let x0 = DVector::zeros(n);
    let r0 = inst.constraint_residuals(&x0)?.max();
    let mut z0 = DVector::zeros(k);
    z0[n] = r0.max(0.0) + 1.0;

    let opts = BarrierOptions {
        refine_active_set: false,
        ..BarrierOptions::default()
    };
    let res = barrier::solve(&problem, &z0, &opts);
    if res.status == BarrierStatus::NumericFailure {
        return Err(Error::Numeric("phase-I barrier failed".into()));
    }
    let x = res.z.rows(0, n).into_owned();
    let worst = inst.constraint_residuals(&x)?.max();
    if worst > -TOL_INTERIOR {
        return Err(Error::SlaterViolated {
            max_residual: worst,
        });
    }
    Ok(x)
}

/// Solution of one support problem: `mu` is the optimal value, `y` the outcome
/// of the minimizer.
#[derive(Debug, Clone)]
pub struct SupportPoint {
    pub lambda: DVector<f64>,
    pub mu: f64,
    pub x: DVector<f64>,
    pub y: OutcomePoint,
}

pub fn solve_cp(
    dc: &DcDecomposition,
    inst: &QcqpInstance,
    lambda: &DVector<f64>,
    start: &DVector<f64>,
) -> Result<SupportPoint> {
    let prog = build_cp(dc, inst, lambda)?;
    let sol = solve_convex(&prog, start)?;
    match sol.status {
        ConvexStatus::Optimal => {}
        ConvexStatus::Unbounded => {
            return Err(Error::UnboundedFeasibleSet(
                "support problem has no finite optimum".into(),
            ))
        }
        _ => return Err(Error::Numeric("support problem did not converge".into())),
    }
    let y = dc.outcome_map(&sol.x)?;
    Ok(SupportPoint {
        lambda: lambda.clone(),
        mu: sol.value,
        x: sol.x,
        y,
    })
}

/// `min` and `max` of each `C_i x` over the feasible set.
pub fn compute_outcome_bounds(
    dc: &DcDecomposition,
    inst: &QcqpInstance,
    start: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let r = dc.r();
    let mut lo = DVector::zeros(r);
    let mut hi = DVector::zeros(r);
    for i in 0..r {
        let row = dc.c.row(i).transpose();
        for (sense, out) in [(Sense::Minimize, &mut lo), (Sense::Maximize, &mut hi)] {
            let prog = ConvexProgram::linear(row.clone(), inst, sense);
            let sol = solve_convex(&prog, start)?;
            match sol.status {
                ConvexStatus::Optimal => out[i] = sol.value,
                ConvexStatus::Unbounded => {
                    return Err(Error::UnboundedFeasibleSet(format!(
                        "C_{} x is unbounded {}",
                        i + 1,
                        if sense == Sense::Minimize { "below" } else { "above" }
                    )))
                }
                _ => return Err(Error::Numeric(format!("bound problem {} failed", i + 1))),
            }
        }
        if lo[i] > hi[i] {
            // both are optimal up to solver tolerance
            let mid = 0.5 * (lo[i] + hi[i]);
            lo[i] = mid;
            hi[i] = mid;
        }
    }
    Ok((lo, hi))
}
