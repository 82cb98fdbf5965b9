use nalgebra::DVector;

use super::{OracleMethod, OracleResult};
use crate::error::{Error, Result};
use crate::instance::{eig_tol, QcqpInstance};
use crate::linalg::jacobi_eigen;

/// Upper end of each variable when `Ax <= b` is a box: every row holds a
/// single positive entry and every variable is covered by some row.
fn box_upper(inst: &QcqpInstance) -> Option<DVector<f64>> {
    let n = inst.n();
    let mut upper = DVector::from_element(n, f64::INFINITY);
    for k in 0..inst.m() {
        let row = inst.a.row(k);
        let mut nz = row.iter().enumerate().filter(|(_, a)| **a != 0.0);
        let (j, &a) = nz.next()?;
        if nz.next().is_some() || a <= 0.0 {
            return None;
        }
        upper[j] = upper[j].min(inst.b[k] / a);
    }
    if upper.iter().all(|u| u.is_finite() && *u >= 0.0) {
        Some(upper)
    } else {
        None
    }
}

/// Exact minimum of a concave objective over a box, from its `2^n` corners.
pub fn vertex_enumerate_box(inst: &QcqpInstance) -> Result<OracleResult> {
    let n = inst.n();
    if inst.p() != 0 {
        return Err(Error::PreconditionViolated(
            "vertex enumeration needs p = 0".into(),
        ));
    }
    let Some(upper) = box_upper(inst) else {
        return Err(Error::PreconditionViolated(
            "linear constraints are not a box".into(),
        ));
    };
    let top = jacobi_eigen(&inst.q_mat)?.values.max();
    if top > eig_tol(&inst.q_mat) {
        return Err(Error::PreconditionViolated(format!(
            "objective is not concave (largest eigenvalue {top:e})"
        )));
    }
    if n >= 31 {
        return Err(Error::PreconditionViolated(format!("2^{n} corners")));
    }

    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1 << n) {
        let x = DVector::from_fn(n, |i, _| if mask >> i & 1 == 1 { upper[i] } else { 0.0 });
        let value = inst.evaluate_objective(&x)?;
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            best = Some((value, x));
        }
    }
    let (value, x) = best.expect("at least one corner");
    Ok(OracleResult {
        value,
        x,
        method: OracleMethod::VertexEnum,
        resolution: 0.0,
        guarantee: "exact: a concave function attains its minimum over a box at a vertex".into(),
        tolerance: 0.0,
    })
}
