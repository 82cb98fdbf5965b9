//! Primal log-barrier Newton method for
//! `min z'Pz + c'z  s.t.  z'H_i z + h_i'z <= d_i`
//! with `P` and every `H_i` PSD.

use nalgebra::{DMatrix, DVector};

/// One constraint `z'Hz + h'z - rhs <= 0`; `hess = None` means linear.
#[derive(Debug, Clone)]
pub(crate) struct BarrierConstraint {
    pub hess: Option<DMatrix<f64>>,
    pub lin: DVector<f64>,
    pub rhs: f64,
}

impl BarrierConstraint {
    pub fn linear(lin: DVector<f64>, rhs: f64) -> Self {
        Self {
            hess: None,
            lin,
            rhs,
        }
    }

    pub fn value(&self, z: &DVector<f64>) -> f64 {
        let quad = self.hess.as_ref().map_or(0.0, |h| (h * z).dot(z));
        quad + self.lin.dot(z) - self.rhs
    }

    pub fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        match &self.hess {
            Some(h) => h * z * 2.0 + &self.lin,
            None => self.lin.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BarrierProblem {
    pub p: Option<DMatrix<f64>>,
    pub c: DVector<f64>,
    pub constraints: Vec<BarrierConstraint>,
}

impl BarrierProblem {
    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        let quad = self.p.as_ref().map_or(0.0, |p| (p * z).dot(z));
        quad + self.c.dot(z)
    }

    fn objective_gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        match &self.p {
            Some(p) => p * z * 2.0 + &self.c,
            None => self.c.clone(),
        }
    }

    fn max_constraint(&self, z: &DVector<f64>) -> f64 {
        self.constraints
            .iter()
            .map(|g| g.value(z))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BarrierOptions {
    pub t0: f64,
    pub t_factor: f64,
    /// Outer loop stops once `#constraints / t <= gap_tol`.
    pub gap_tol: f64,
    pub armijo: f64,
    pub shrink: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Objective values below this are reported as unbounded.
    pub unbounded_floor: f64,
    pub refine_active_set: bool,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            t0: 1.0,
            t_factor: 10.0,
            gap_tol: 1e-9,
            armijo: 1e-4,
            shrink: 0.5,
            newton_tol: 1e-11,
            max_newton: 200,
            unbounded_floor: -1e12,
            refine_active_set: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BarrierStatus {
    Optimal,
    Unbounded,
    NumericFailure,
}

#[derive(Debug, Clone)]
pub(crate) struct BarrierResult {
    pub z: DVector<f64>,
    pub status: BarrierStatus,
    pub kkt_residual: f64,
}

pub(crate) fn solve(
    prob: &BarrierProblem,
    start: &DVector<f64>,
    opts: &BarrierOptions,
) -> BarrierResult {
    let m = prob.constraints.len() as f64;
    let mut z = start.clone();
    if !(prob.max_constraint(&z) < 0.0) {
        return failure(z);
    }
    let mut t = opts.t0;
    loop {
        match center(prob, &mut z, t, opts) {
            Centering::Done => {}
            Centering::Unbounded => {
                return BarrierResult {
                    z,
                    status: BarrierStatus::Unbounded,
                    kkt_residual: f64::INFINITY,
                };
            }
            Centering::Failed => return failure(z),
        }
        if m == 0.0 || m / t <= opts.gap_tol {
            break;
        }
        t *= opts.t_factor;
    }

    let duals: Vec<f64> = prob
        .constraints
        .iter()
        .map(|g| 1.0 / (-t * g.value(&z)))
        .collect();
    let mut best = z;
    let mut best_duals = duals;
    if opts.refine_active_set {
        if let Some((zr, ur)) = refine(prob, &best, &best_duals) {
            best = zr;
            best_duals = ur;
        }
    }
    let kkt = kkt_residual(prob, &best, &best_duals);
    BarrierResult {
        z: best,
        status: BarrierStatus::Optimal,
        kkt_residual: kkt,
    }
}

fn failure(z: DVector<f64>) -> BarrierResult {
    BarrierResult {
        z,
        status: BarrierStatus::NumericFailure,
        kkt_residual: f64::INFINITY,
    }
}

enum Centering {
    Done,
    Unbounded,
    Failed,
}

fn barrier_value(prob: &BarrierProblem, z: &DVector<f64>, t: f64) -> Option<f64> {
    let mut v = t * prob.objective(z);
    for g in &prob.constraints {
        let gi = g.value(z);
        if !(gi < 0.0) {
            return None;
        }
        v -= (-gi).ln();
    }
    Some(v)
}

fn center(prob: &BarrierProblem, z: &mut DVector<f64>, t: f64, opts: &BarrierOptions) -> Centering {
    let k = z.len();
    for _ in 0..opts.max_newton {
        let mut grad = prob.objective_gradient(z) * t;
        let mut hess = match &prob.p {
            Some(p) => p * (2.0 * t),
            None => DMatrix::zeros(k, k),
        };
        for g in &prob.constraints {
            let gi = g.value(z);
            let dg = g.gradient(z);
            let inv = -1.0 / gi;
            grad.axpy(inv, &dg, 1.0);
            hess.ger(inv * inv, &dg, &dg, 1.0);
            if let Some(h) = &g.hess {
                hess += h * (2.0 * inv);
            }
        }
        let Some(step) = newton_direction(&hess, &grad) else {
            return Centering::Failed;
        };
        let decrement = -grad.dot(&step);
        if !decrement.is_finite() {
            return Centering::Failed;
        }
        if decrement * 0.5 <= opts.newton_tol {
            return Centering::Done;
        }

        let Some(f0) = barrier_value(prob, z, t) else {
            return Centering::Failed;
        };
        let slope = grad.dot(&step);
        let mut s = 1.0;
        let mut accepted = false;
        while s > 1e-20 {
            let trial = &*z + &step * s;
            if let Some(f) = barrier_value(prob, &trial, t) {
                if f <= f0 + opts.armijo * s * slope {
                    *z = trial;
                    accepted = true;
                    break;
                }
            }
            s *= opts.shrink;
        }
        if prob.objective(z) < opts.unbounded_floor {
            return Centering::Unbounded;
        }
        if !accepted {
            // No representable decrease left at this t; the point is as
            // centered as floating point allows.
            return Centering::Done;
        }
    }
    Centering::Done
}

fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = hess.clone().cholesky() {
        let d = ch.solve(&(-grad));
        if d.iter().all(|x| x.is_finite()) {
            return Some(d);
        }
    }
    let scale = hess.diagonal().amax().max(1.0);
    let mut reg = 1e-12 * scale;
    for _ in 0..12 {
        let h = hess + DMatrix::identity(hess.nrows(), hess.ncols()) * reg;
        if let Some(ch) = h.cholesky() {
            let d = ch.solve(&(-grad));
            if d.iter().all(|x| x.is_finite()) {
                return Some(d);
            }
        }
        reg *= 100.0;
    }
    None
}

fn kkt_residual(prob: &BarrierProblem, z: &DVector<f64>, duals: &[f64]) -> f64 {
    let mut r = prob.objective_gradient(z);
    let mut comp: f64 = 0.0;
    for (g, &u) in prob.constraints.iter().zip(duals) {
        r.axpy(u, &g.gradient(z), 1.0);
        comp = comp.max((u * g.value(z)).abs());
    }
    r.amax().max(comp)
}

/// Newton's method on the KKT system of the constraints that are (nearly)
/// active at the barrier solution. Accepted only if the result is feasible
/// and no worse than the barrier point.
fn refine(
    prob: &BarrierProblem,
    z: &DVector<f64>,
    duals: &[f64],
) -> Option<(DVector<f64>, Vec<f64>)> {
    let k = z.len();
    let base = prob.objective(z);
    let values: Vec<f64> = prob.constraints.iter().map(|g| g.value(z)).collect();
    let mut last_active: Option<Vec<usize>> = None;
    for delta in [1e-7, 1e-5, 1e-3] {
        let active: Vec<usize> = (0..values.len()).filter(|&i| -values[i] <= delta).collect();
        if active.is_empty() || active.len() > k || last_active.as_ref() == Some(&active) {
            continue;
        }
        last_active = Some(active.clone());
        if let Some((zr, ua)) = kkt_newton(prob, z, duals, &active) {
            let feasible = prob
                .constraints
                .iter()
                .all(|g| g.value(&zr) <= 1e-12 * (1.0 + g.rhs.abs()));
            let value = prob.objective(&zr);
            if feasible && value <= base + 1e-12 * (1.0 + base.abs()) {
                let mut full = vec![0.0; values.len()];
                for (pos, &i) in active.iter().enumerate() {
                    full[i] = ua[pos];
                }
                return Some((zr, full));
            }
        }
    }
    None
}

fn kkt_newton(
    prob: &BarrierProblem,
    z0: &DVector<f64>,
    duals: &[f64],
    active: &[usize],
) -> Option<(DVector<f64>, Vec<f64>)> {
    let k = z0.len();
    let a = active.len();
    let mut z = z0.clone();
    let mut u: Vec<f64> = active.iter().map(|&i| duals[i]).collect();
    for _ in 0..30 {
        let mut jac = DMatrix::<f64>::zeros(k + a, k + a);
        let mut rhs = DVector::<f64>::zeros(k + a);
        let mut stat = prob.objective_gradient(&z);
        if let Some(p) = &prob.p {
            jac.view_mut((0, 0), (k, k)).copy_from(&(p * 2.0));
        }
        for (pos, &i) in active.iter().enumerate() {
            let g = &prob.constraints[i];
            let dg = g.gradient(&z);
            stat.axpy(u[pos], &dg, 1.0);
            if let Some(h) = &g.hess {
                let mut block = jac.view_mut((0, 0), (k, k));
                block += h * (2.0 * u[pos]);
            }
            for r in 0..k {
                jac[(r, k + pos)] = dg[r];
                jac[(k + pos, r)] = dg[r];
            }
            rhs[k + pos] = -g.value(&z);
        }
        for r in 0..k {
            rhs[r] = -stat[r];
        }
        let scale = 1.0 + z.amax() + prob.c.amax();
        if rhs.amax() <= 1e-14 * scale {
            return Some((z, u));
        }
        // minimum-norm step: the optimal face may be non-unique
        let svd = jac.svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max();
        let step = svd.solve(&rhs, cutoff).ok()?;
        if !step.iter().all(|x| x.is_finite()) {
            return None;
        }
        for r in 0..k {
            z[r] += step[r];
        }
        for pos in 0..a {
            u[pos] += step[k + pos];
        }
    }
    let scale = 1.0 + z.amax();
    let worst = active
        .iter()
        .map(|&i| prob.constraints[i].value(&z).abs())
        .fold(0.0, f64::max);
    (worst <= 1e-12 * scale).then_some((z, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn unit_box(k: usize) -> Vec<BarrierConstraint> {
        let mut cons = Vec::new();
        for i in 0..k {
            let mut e = DVector::zeros(k);
            e[i] = 1.0;
            cons.push(BarrierConstraint::linear(e.clone(), 1.0));
            cons.push(BarrierConstraint::linear(-e, 0.0));
        }
        cons
    }

    #[test]
    fn linear_objective_on_box_hits_vertex_exactly() {
        let prob = BarrierProblem {
            p: None,
            c: v(&[1.0, -1.0]),
            constraints: unit_box(2),
        };
        let res = solve(&prob, &v(&[0.5, 0.5]), &BarrierOptions::default());
        assert_eq!(res.status, BarrierStatus::Optimal);
        assert!((prob.objective(&res.z) + 1.0).abs() < 1e-12);
        assert!(res.z[0].abs() < 1e-12 && (res.z[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separable_quadratic_with_weakly_active_bound() {
        // min x1^2 - 2 x2 over the unit box: optimum (0, 1), value -2
        let prob = BarrierProblem {
            p: Some(DMatrix::from_diagonal(&v(&[1.0, 0.0]))),
            c: v(&[0.0, -2.0]),
            constraints: unit_box(2),
        };
        let res = solve(&prob, &v(&[0.5, 0.5]), &BarrierOptions::default());
        assert_eq!(res.status, BarrierStatus::Optimal);
        assert!((prob.objective(&res.z) + 2.0).abs() < 1e-12);
        assert!(res.z[0].abs() < 1e-12);
        assert!((res.z[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_constraint_is_followed() {
        // min -x1 - x2 over the unit disc: optimum at (1,1)/sqrt2
        let prob = BarrierProblem {
            p: None,
            c: v(&[-1.0, -1.0]),
            constraints: vec![BarrierConstraint {
                hess: Some(DMatrix::identity(2, 2)),
                lin: DVector::zeros(2),
                rhs: 1.0,
            }],
        };
        let res = solve(&prob, &v(&[0.0, 0.0]), &BarrierOptions::default());
        assert_eq!(res.status, BarrierStatus::Optimal);
        assert!((prob.objective(&res.z) + 2f64.sqrt()).abs() < 1e-10);
        assert!(res.kkt_residual < 1e-8);
    }

    #[test]
    fn unbounded_direction_is_detected() {
        let prob = BarrierProblem {
            p: None,
            c: v(&[-1.0]),
            constraints: vec![BarrierConstraint::linear(v(&[-1.0]), 0.0)],
        };
        let res = solve(&prob, &v(&[1.0]), &BarrierOptions::default());
        assert_eq!(res.status, BarrierStatus::Unbounded);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let prob = BarrierProblem {
            p: None,
            c: v(&[1.0]),
            constraints: vec![BarrierConstraint::linear(v(&[1.0]), 1.0)],
        };
        let res = solve(&prob, &v(&[2.0]), &BarrierOptions::default());
        assert_eq!(res.status, BarrierStatus::NumericFailure);
    }
}
