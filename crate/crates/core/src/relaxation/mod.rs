//! Lower bound of `y0 - |yy|^2` over a simplex, from the LP in variables
//! `(y0, w)`:
//!
//! ```text
//! min  y0 + sum_j w_j g(v_j)                    g(v) = -|v|^2
//! s.t. y0 - 2 sum_s (v_j . v_s) w_s >= mu_j     for every vertex j
//!      sum_j w_j = 1,  w >= 0,  y0 free
//! ```
//!
//! Row `j` is the supporting half-space for direction `v_j` with its cached
//! support value `mu_j`, after substituting `yy = sum_s w_s v_s`. The
//! objective is the affine interpolant of `g` at the vertices, which is the
//! convex envelope of `g` over the simplex.

mod lp;

pub use lp::{solve_lp, DenseLp, LpSolution, LpStatus};

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::simplex::{barycentric_to_point, is_degenerate, Simplex};

/// `g(v_j) = -|v_j|^2` for every vertex.
pub fn envelope_values(s: &Simplex) -> DVector<f64> {
    DVector::from_iterator(
        s.vertices().len(),
        s.vertices().iter().map(|v| -v.norm_squared()),
    )
}

pub fn build_lp(s: &Simplex, mu: &DVector<f64>) -> Result<DenseLp> {
    let k = s.vertices().len();
    check_dim(k, mu.len())?;
    if is_degenerate(s) {
        return Err(Error::Degenerate);
    }
    let g = envelope_values(s);
    let mut objective = Vec::with_capacity(k + 1);
    objective.push(1.0);
    objective.extend(g.iter());

    let mut lp = DenseLp::new(objective);
    lp.var_lower[0] = f64::NEG_INFINITY;
    for (j, vj) in s.vertices().iter().enumerate() {
        let mut row = Vec::with_capacity(k + 1);
        row.push(1.0);
        row.extend(s.vertices().iter().map(|vs| -2.0 * vj.dot(vs)));
        lp.ineq_rows.push((row, mu[j]));
    }
    let mut simplex_row = vec![1.0; k + 1];
    simplex_row[0] = 0.0;
    lp.eq_rows.push((simplex_row, 1.0));
    Ok(lp)
}

/// Minimizer of the relaxation, mapped back to the outcome space.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub y0: f64,
    pub w: DVector<f64>,
    pub yy: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBound {
    pub lb: f64,
    /// `None` for degenerate simplices.
    pub witness: Option<Witness>,
}

/// `+inf` for a degenerate simplex, the LP value otherwise.
pub fn lower_bound(s: &Simplex, mu: &DVector<f64>) -> Result<LowerBound> {
    check_dim(s.vertices().len(), mu.len())?;
    if is_degenerate(s) {
        return Ok(LowerBound {
            lb: f64::INFINITY,
            witness: None,
        });
    }
    let lp = build_lp(s, mu)?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Numeric(format!(
            "relaxation LP ended {:?}",
            sol.status
        )));
    }
    let mut w = DVector::from_iterator(sol.z.len() - 1, sol.z[1..].iter().map(|x| x.max(0.0)));
    let total = w.sum();
    w /= total;
    let yy = barycentric_to_point(s, &w)?;
    Ok(LowerBound {
        lb: sol.value,
        witness: Some(Witness {
            y0: sol.z[0],
            w,
            yy,
        }),
    })
}
