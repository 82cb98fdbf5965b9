//! Difference-of-convex split of the objective, `Q = Q+ - C'C`, and the
//! outcome map `x -> (f0(x), Cx)` with `f0(x) = x'Q+x + q'x`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::instance::{eig_tol, QcqpInstance};
use crate::linalg::{jacobi_eigen, quad_form};

#[derive(Debug, Clone, PartialEq)]
pub struct DcDecomposition {
    pub q_plus: DMatrix<f64>,
    /// `r x n`; row `i` is `sqrt(|l_i|) v_i` for the i-th negative eigenpair.
    pub c: DMatrix<f64>,
    pub q_vec: DVector<f64>,
}

/// A point of the outcome space: `y0 = f0(x)` and `yy = Cx`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomePoint {
    pub y0: f64,
    pub yy: DVector<f64>,
}

impl OutcomePoint {
    pub fn new(y0: f64, yy: DVector<f64>) -> Self {
        Self { y0, yy }
    }

    /// `y0 - |yy|^2`.
    pub fn nu(&self) -> f64 {
        nu(self)
    }
}

pub fn nu(yp: &OutcomePoint) -> f64 {
    yp.y0 - yp.yy.norm_squared()
}

impl DcDecomposition {
    /// Number of negative eigenvalues kept in `C`.
    pub fn r(&self) -> usize {
        self.c.nrows()
    }

    pub fn n(&self) -> usize {
        self.c.ncols()
    }

    pub fn f0(&self, x: &DVector<f64>) -> f64 {
        quad_form(&self.q_plus, x) + self.q_vec.dot(x)
    }

    pub fn outcome_map(&self, x: &DVector<f64>) -> Result<OutcomePoint> {
        check_dim(self.n(), x.len())?;
        Ok(OutcomePoint::new(self.f0(x), &self.c * x))
    }
}

/// Splits `Q` by its eigendecomposition. Eigenvalues within `tol_eig` of zero
/// are dropped from both parts; the remaining positive part forms `Q+`.
pub fn decompose(inst: &QcqpInstance) -> Result<DcDecomposition> {
    let n = inst.n();
    let eig = jacobi_eigen(&inst.q_mat)?;
    let tol = eig_tol(&inst.q_mat);

    let negative: Vec<usize> = (0..n).filter(|&i| eig.values[i] < -tol).collect();
    if negative.is_empty() {
        return Err(Error::AlreadyConvex);
    }

    let mut q_plus = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let l = eig.values[i];
        if l > tol {
            let v = eig.vectors.column(i);
            q_plus += l * v * v.transpose();
        }
    }
    // exact symmetry regardless of rounding in the outer products
    let q_plus = (&q_plus + q_plus.transpose()) * 0.5;

    let mut c = DMatrix::<f64>::zeros(negative.len(), n);
    for (row, &i) in negative.iter().enumerate() {
        let scale = (-eig.values[i]).sqrt();
        let v = eig.vectors.column(i);
        for k in 0..n {
            c[(row, k)] = scale * v[k];
        }
    }

    Ok(DcDecomposition {
        q_plus,
        c,
        q_vec: inst.q_vec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{e1, e2};
    use crate::linalg::{inf_norm, max_abs};

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn with_q(q: DMatrix<f64>) -> QcqpInstance {
        let mut inst = e1();
        inst.q_mat = q;
        inst
    }

    fn reconstruction_error(inst: &QcqpInstance, dc: &DcDecomposition) -> f64 {
        inf_norm(&(&inst.q_mat - (&dc.q_plus - dc.c.transpose() * &dc.c)))
    }

    #[test]
    fn diagonal_split() {
        let dc = decompose(&e1()).unwrap();
        assert_eq!(dc.r(), 1);
        assert_eq!(dc.q_plus, DMatrix::from_diagonal(&v(&[1.0, 0.0])));
        assert_eq!(dc.c.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0]);
    }

    #[test]
    fn negative_identity() {
        let inst = e2();
        let dc = decompose(&inst).unwrap();
        assert_eq!(dc.r(), 2);
        assert!(max_abs(&dc.q_plus) == 0.0);
        for i in 0..2 {
            assert!((dc.c.row(i).norm() - 1.0).abs() < 1e-12);
        }
        let ctc = dc.c.transpose() * &dc.c;
        assert!(max_abs(&(ctc - DMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn off_diagonal_swap_matrix() {
        // eigenvalues +-1 with eigenvectors (1,1)/sqrt2 and (1,-1)/sqrt2
        let inst = with_q(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let dc = decompose(&inst).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(max_abs(&(&dc.q_plus - DMatrix::from_element(2, 2, 0.5))) < 1e-12);
        assert!((dc.c[(0, 0)] - h).abs() < 1e-12);
        assert!((dc.c[(0, 1)] + h).abs() < 1e-12);
        assert!(reconstruction_error(&inst, &dc) < 1e-12);
    }

    #[test]
    fn convex_objective_is_rejected() {
        let inst = with_q(DMatrix::identity(2, 2));
        assert!(matches!(decompose(&inst), Err(Error::AlreadyConvex)));
    }

    #[test]
    fn near_zero_eigenvalues_are_folded() {
        let inst = with_q(DMatrix::from_diagonal(&v(&[1e-12, -1.0])));
        let dc = decompose(&inst).unwrap();
        assert_eq!(dc.r(), 1);
        assert_eq!(dc.q_plus[(0, 0)], 0.0);
    }

    #[test]
    fn outcome_points() {
        let dc = decompose(&e1()).unwrap();
        let y = dc.outcome_map(&v(&[0.0, 1.0])).unwrap();
        assert_eq!((y.y0, y.yy[0], y.nu()), (0.0, 1.0, -1.0));
        let y = dc.outcome_map(&v(&[0.0, 0.0])).unwrap();
        assert_eq!((y.y0, y.yy[0], y.nu()), (0.0, 0.0, 0.0));
        assert!(dc.outcome_map(&v(&[0.0])).is_err());

        let dc = decompose(&e2()).unwrap();
        let y = dc.outcome_map(&v(&[1.0, 1.0])).unwrap();
        assert_eq!(y.y0, 0.0);
        assert!((y.nu() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn nu_values() {
        assert_eq!(nu(&OutcomePoint::new(0.0, v(&[1.0]))), -1.0);
        assert_eq!(nu(&OutcomePoint::new(3.0, v(&[0.0, 0.0]))), 3.0);
        assert_eq!(nu(&OutcomePoint::new(1.0, v(&[2.0, -2.0]))), -7.0);
    }

    #[test]
    fn nu_is_invariant_under_row_sign_flips() {
        let mut inst = with_q(DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 2.0, 0.5, 2.0, -1.0, 0.3, 0.5, 0.3, -2.0],
        ));
        inst.q_vec = v(&[0.1, 0.2, -0.3]);
        let dc = decompose(&inst).unwrap();
        let x = v(&[0.3, -1.2, 2.0]);
        let base = dc.outcome_map(&x).unwrap().nu();
        for mask in 0..(1 << dc.r()) {
            let mut flipped = dc.clone();
            for i in 0..dc.r() {
                if mask & (1 << i) != 0 {
                    flipped.c.row_mut(i).neg_mut();
                }
            }
            assert_eq!(flipped.outcome_map(&x).unwrap().nu(), base);
        }
    }
}
