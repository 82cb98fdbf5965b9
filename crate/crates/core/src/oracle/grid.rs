use nalgebra::DVector;

use super::{OracleMethod, OracleResult};
use crate::error::{Error, Result};
use crate::instance::QcqpInstance;
use crate::linalg::jacobi_eigen;
use crate::relaxation::{solve_lp, DenseLp, LpStatus};

/// Largest dimension the lattice walk accepts.
pub const MAX_GRID_DIM: usize = 4;

/// Per-variable bounds `[0, max x_i]` over the linear constraints alone.
pub fn box_hint(inst: &QcqpInstance) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = inst.n();
    let mut hi = DVector::zeros(n);
    for i in 0..n {
        let mut objective = vec![0.0; n];
        objective[i] = -1.0;
        let mut lp = DenseLp::new(objective);
        for k in 0..inst.m() {
            let row = inst.a.row(k).iter().map(|a| -a).collect();
            lp.ineq_rows.push((row, -inst.b[k]));
        }
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Optimal => hi[i] = -sol.value,
            LpStatus::Unbounded => {
                return Err(Error::UnboundedFeasibleSet(format!(
                    "x[{i}] is unbounded under the linear constraints"
                )))
            }
            LpStatus::Infeasible => {
                return Err(Error::PreconditionViolated(
                    "linear constraints are infeasible".into(),
                ))
            }
        }
    }
    Ok((DVector::zeros(n), hi))
}

/// `2 * max|eig(Q)| * max |x| + |q|` over the box: a Lipschitz constant of
/// the objective there.
pub fn lipschitz_bound(inst: &QcqpInstance, lo: &DVector<f64>, hi: &DVector<f64>) -> Result<f64> {
    let eig = jacobi_eigen(&inst.q_mat)?;
    let spectral = eig.values.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let far = lo.abs().sup(&hi.abs()).norm();
    Ok(2.0 * spectral * far + inst.q_vec.norm())
}

/// Coordinates `lo, lo + h, ...` not exceeding `hi`, plus `hi` itself.
fn axis(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let steps = ((hi - lo) / h + 1e-9).floor().max(0.0) as usize;
    let mut pts: Vec<f64> = (0..=steps).map(|k| lo + k as f64 * h).collect();
    let last = *pts.last().unwrap();
    if hi - last > 1e-9 * h {
        pts.push(hi);
    } else {
        *pts.last_mut().unwrap() = last.min(hi);
    }
    pts
}

/// Quadratic `a t^2 + b t + c` in the last coordinate with the others fixed.
#[derive(Clone, Copy)]
struct Slice {
    a: f64,
    b: f64,
    c: f64,
}

impl Slice {
    fn at(&self, t: f64) -> f64 {
        (self.a * t + self.b) * t + self.c
    }
}

/// Restriction of `x'Mx + g'x` to the last axis, other coordinates taken from `x`.
fn slice(m: &nalgebra::DMatrix<f64>, g: &DVector<f64>, x: &[f64]) -> Slice {
    let n = x.len();
    let last = n - 1;
    let mut c = 0.0;
    let mut b = g[last];
    for i in 0..last {
        c += g[i] * x[i];
        b += (m[(last, i)] + m[(i, last)]) * x[i];
        for j in 0..last {
            c += m[(i, j)] * x[i] * x[j];
        }
    }
    Slice {
        a: m[(last, last)],
        b,
        c,
    }
}

/// Least objective over the lattice of spacing `resolution` in the box
/// (default: [`box_hint`]), keeping points that satisfy every constraint
/// within `resolution * 1e-3`. Ties keep the first point in lexicographic order.
pub fn grid_search(
    inst: &QcqpInstance,
    resolution: f64,
    hint: Option<(DVector<f64>, DVector<f64>)>,
) -> Result<OracleResult> {
    let n = inst.n();
    if n == 0 || n > MAX_GRID_DIM {
        return Err(Error::PreconditionViolated(format!(
            "grid search needs 1 <= n <= {MAX_GRID_DIM}, got {n}"
        )));
    }
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::PreconditionViolated(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let (lo, hi) = match hint {
        Some(h) => h,
        None => box_hint(inst)?,
    };
    let tol = resolution * 1e-3;
    let axes: Vec<Vec<f64>> = (0..n).map(|i| axis(lo[i], hi[i], resolution)).collect();
    let inner = &axes[n - 1];

    let zeros = nalgebra::DMatrix::zeros(n, n);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx = vec![0usize; n - 1];
    let mut x = vec![0.0; n];
    let mut linear = vec![Slice { a: 0.0, b: 0.0, c: 0.0 }; inst.m()];
    let mut quad = vec![Slice { a: 0.0, b: 0.0, c: 0.0 }; inst.p()];
    loop {
        for (k, &i) in idx.iter().enumerate() {
            x[k] = axes[k][i];
        }
        let outer_ok = x[..n - 1].iter().all(|xi| *xi >= -tol);
        if outer_ok {
            let obj = slice(&inst.q_mat, &inst.q_vec, &x);
            for (k, s) in linear.iter_mut().enumerate() {
                let row = inst.a.row(k).transpose();
                *s = slice(&zeros, &row, &x);
                s.c -= inst.b[k];
            }
            for (k, s) in quad.iter_mut().enumerate() {
                let qc = &inst.quad_constraints[k];
                *s = slice(&qc.matrix, &qc.linear, &x);
                s.c -= qc.rhs;
            }
            for &t in inner {
                if t < -tol {
                    continue;
                }
                let value = obj.at(t);
                if best.as_ref().is_some_and(|(v, _)| value >= *v) {
                    continue;
                }
                if linear.iter().chain(quad.iter()).all(|s| s.at(t) <= tol) {
                    x[n - 1] = t;
                    best = Some((value, x.clone()));
                }
            }
        }
        // odometer over the outer coordinates
        let mut k = n - 1;
        loop {
            if k == 0 {
                return finish(inst, best, resolution, &lo, &hi);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn finish(
    inst: &QcqpInstance,
    best: Option<(f64, Vec<f64>)>,
    resolution: f64,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
) -> Result<OracleResult> {
    let Some((_, x)) = best else {
        return Err(Error::NoFeasibleGridPoint { resolution });
    };
    let x = DVector::from_vec(x);
    let lipschitz = lipschitz_bound(inst, lo, hi)?;
    let tolerance = 2.0 * lipschitz * resolution;
    Ok(OracleResult {
        value: inst.evaluate_objective(&x)?,
        x,
        method: OracleMethod::Grid,
        resolution,
        guarantee: format!(
            "least value on the feasible lattice; within {tolerance:.3e} of the global minimum \
             (Lipschitz constant {lipschitz:.3e})"
        ),
        tolerance,
    })
}
