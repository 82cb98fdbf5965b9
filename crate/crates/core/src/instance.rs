//! QCQP problem data, structural validation, and pointwise evaluation.
//!
//! The feasible set is `{x : Ax <= b, x >= 0, x'Qi x + qi'x <= di}`. The
//! nonnegativity bound is always implied and never stored in `A`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{check_dim, Result};
use crate::linalg::{inf_norm, jacobi_eigen, max_abs, quad_form};

/// Feasibility tolerance used for residual checks throughout the crate.
pub const TOL_FEAS: f64 = 1e-8;

/// One convex quadratic constraint `x'Mx + l'x <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadConstraint {
    pub matrix: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub rhs: f64,
}

impl QuadConstraint {
    pub fn new(matrix: DMatrix<f64>, linear: DVector<f64>, rhs: f64) -> Self {
        Self {
            matrix,
            linear,
            rhs,
        }
    }

    pub fn residual(&self, x: &DVector<f64>) -> f64 {
        quad_form(&self.matrix, x) + self.linear.dot(x) - self.rhs
    }
}

/// `min x'Qx + q'x` over `Ax <= b`, `x >= 0` and the quadratic constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct QcqpInstance {
    pub q_mat: DMatrix<f64>,
    pub q_vec: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub quad_constraints: Vec<QuadConstraint>,
}

impl QcqpInstance {
    pub fn new(
        q_mat: DMatrix<f64>,
        q_vec: DVector<f64>,
        a: DMatrix<f64>,
        b: DVector<f64>,
        quad_constraints: Vec<QuadConstraint>,
    ) -> Self {
        Self {
            q_mat,
            q_vec,
            a,
            b,
            quad_constraints,
        }
    }

    /// Decision dimension.
    pub fn n(&self) -> usize {
        self.q_mat.nrows()
    }

    /// Number of linear rows.
    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    /// Number of quadratic constraints.
    pub fn p(&self) -> usize {
        self.quad_constraints.len()
    }

    /// Total number of scalar constraints including the implicit `x >= 0`.
    pub fn num_constraints(&self) -> usize {
        self.m() + self.n() + self.p()
    }

    pub fn evaluate_objective(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.n(), x.len())?;
        Ok(quad_form(&self.q_mat, x) + self.q_vec.dot(x))
    }

    pub fn constraint_residuals(&self, x: &DVector<f64>) -> Result<Residuals> {
        check_dim(self.n(), x.len())?;
        let linear = &self.a * x - &self.b;
        let bounds = -x;
        let quadratic = DVector::from_iterator(
            self.p(),
            self.quad_constraints.iter().map(|c| c.residual(x)),
        );
        Ok(Residuals {
            linear,
            bounds,
            quadratic,
        })
    }

    pub fn is_feasible(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.constraint_residuals(x)
            .map(|r| r.max() <= tol)
            .unwrap_or(false)
    }
}

/// Constraint residuals; `x` is feasible iff every entry is `<= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub linear: DVector<f64>,
    pub bounds: DVector<f64>,
    pub quadratic: DVector<f64>,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.linear
            .iter()
            .chain(self.bounds.iter())
            .chain(self.quadratic.iter())
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    EmptyDimension,
    DimensionMismatch,
    NonFinite,
    QNotSymmetric,
    QiNotSymmetric,
    QiNotPsd,
}

impl ViolationCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationCode::EmptyDimension => "EMPTY_DIMENSION",
            ViolationCode::DimensionMismatch => "DIMENSION_MISMATCH",
            ViolationCode::NonFinite => "NON_FINITE",
            ViolationCode::QNotSymmetric => "Q_NOT_SYMMETRIC",
            ViolationCode::QiNotSymmetric => "QI_NOT_SYMMETRIC",
            ViolationCode::QiNotPsd => "QI_NOT_PSD",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundednessCheck {
    Verified,
    NotVerified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub r_detected: usize,
    pub violations: Vec<Violation>,
    pub boundedness_check: BoundednessCheck,
}

impl ValidationReport {
    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

pub fn symmetry_tol(m: &DMatrix<f64>) -> f64 {
    1e-10 * (1.0 + max_abs(m))
}

pub fn psd_tol(m: &DMatrix<f64>) -> f64 {
    1e-8 * (1.0 + inf_norm(m))
}

/// Threshold below which an eigenvalue of the objective matrix counts as negative.
pub fn eig_tol(m: &DMatrix<f64>) -> f64 {
    1e-8 * (1.0 + inf_norm(m))
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let tol = symmetry_tol(m);
    let n = m.nrows();
    (0..n).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol))
}

/// Checks shapes, finiteness, symmetry of `Q` and every `Qi`, and PSD-ness of
/// every `Qi`. Boundedness is left as `not_verified`; it can only be confirmed
/// by solving the outcome bound subproblems.
pub fn validate_instance(inst: &QcqpInstance) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |code, message: String| violations.push(Violation { code, message });

    let n = inst.n();
    if n == 0 {
        push(ViolationCode::EmptyDimension, "n must be positive".into());
    }
    let mut shapes_ok = true;
    let mut shape = |ok: bool, what: String, push: &mut dyn FnMut(ViolationCode, String)| {
        if !ok {
            shapes_ok = false;
            push(ViolationCode::DimensionMismatch, what);
        }
    };
    shape(
        inst.q_mat.ncols() == n,
        format!("Q is {}x{}, expected square", n, inst.q_mat.ncols()),
        &mut push,
    );
    shape(
        inst.q_vec.len() == n,
        format!("q has length {}, expected {}", inst.q_vec.len(), n),
        &mut push,
    );
    shape(
        inst.a.ncols() == n || inst.a.nrows() == 0,
        format!("A has {} columns, expected {}", inst.a.ncols(), n),
        &mut push,
    );
    shape(
        inst.b.len() == inst.a.nrows(),
        format!("b has length {}, expected {}", inst.b.len(), inst.a.nrows()),
        &mut push,
    );
    for (i, c) in inst.quad_constraints.iter().enumerate() {
        shape(
            c.matrix.nrows() == n && c.matrix.ncols() == n,
            format!(
                "quad_constraints[{i}].Qi is {}x{}, expected {n}x{n}",
                c.matrix.nrows(),
                c.matrix.ncols()
            ),
            &mut push,
        );
        shape(
            c.linear.len() == n,
            format!(
                "quad_constraints[{i}].qi has length {}, expected {n}",
                c.linear.len()
            ),
            &mut push,
        );
    }

    let finite = inst.q_mat.iter().all(|x| x.is_finite())
        && inst.q_vec.iter().all(|x| x.is_finite())
        && inst.a.iter().all(|x| x.is_finite())
        && inst.b.iter().all(|x| x.is_finite())
        && inst.quad_constraints.iter().all(|c| {
            c.rhs.is_finite()
                && c.matrix.iter().all(|x| x.is_finite())
                && c.linear.iter().all(|x| x.is_finite())
        });
    if !finite {
        push(ViolationCode::NonFinite, "all entries must be finite".into());
    }

    let mut r_detected = 0;
    if shapes_ok && finite && n > 0 {
        if !is_symmetric(&inst.q_mat) {
            push(ViolationCode::QNotSymmetric, "Q is not symmetric".into());
        }
        let sym = (&inst.q_mat + inst.q_mat.transpose()) * 0.5;
        match jacobi_eigen(&sym) {
            Ok(e) => {
                let tol = eig_tol(&inst.q_mat);
                r_detected = e.values.iter().filter(|&&l| l < -tol).count();
            }
            Err(err) => push(ViolationCode::NonFinite, format!("eigensolver: {err}")),
        }
        for (i, c) in inst.quad_constraints.iter().enumerate() {
            if !is_symmetric(&c.matrix) {
                push(
                    ViolationCode::QiNotSymmetric,
                    format!("quad_constraints[{i}].Qi is not symmetric"),
                );
                continue;
            }
            if let Ok(e) = jacobi_eigen(&c.matrix) {
                let min = e.values.iter().cloned().fold(f64::INFINITY, f64::min);
                if min < -psd_tol(&c.matrix) {
                    push(
                        ViolationCode::QiNotPsd,
                        format!(
                            "quad_constraints[{i}].Qi has eigenvalue {min:e} < 0"
                        ),
                    );
                }
            }
        }
    }

    ValidationReport {
        valid: violations.is_empty(),
        r_detected,
        violations,
        boundedness_check: BoundednessCheck::NotVerified,
    }
}
