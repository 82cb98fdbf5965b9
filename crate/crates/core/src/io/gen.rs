//! Seeded random instances with a known number of negative eigenvalues.
//!
//! The feasible set is a box `0 <= x <= u` cut by up to two random
//! half-spaces and `p` random convex quadratic constraints. Every cut leaves
//! the box centre `u / 2` strictly inside, so the set is bounded and has a
//! Slater point.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{QcqpInstance, QuadConstraint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub n: usize,
    pub r: usize,
    pub p: usize,
    pub seed: u64,
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

fn uniform_vector(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(lo..hi))
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

pub fn generate(params: &GenParams) -> Result<QcqpInstance> {
    let GenParams { n, r, p, seed } = *params;
    if n == 0 || r == 0 || r > n {
        return Err(Error::PreconditionViolated(format!(
            "generator needs 1 <= r <= n, got n = {n}, r = {r}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Q = V diag(eig) V' with r eigenvalues in [-2, -0.5] and the rest in [0.5, 2]
    let basis = uniform_matrix(&mut rng, n, n, -1.0, 1.0).qr().q();
    let eig = DVector::from_fn(n, |i, _| {
        let mag = rng.random_range(0.5..2.0);
        if i < r {
            -mag
        } else {
            mag
        }
    });
    let mut q_mat = &basis * DMatrix::from_diagonal(&eig) * basis.transpose();
    symmetrize(&mut q_mat);
    let q_vec = uniform_vector(&mut rng, n, -1.0, 1.0);

    let upper = uniform_vector(&mut rng, n, 0.5, 1.5);
    let centre = &upper * 0.5;
    let extra = rng.random_range(0..=2usize);
    let mut a = DMatrix::zeros(n + extra, n);
    let mut b = DVector::zeros(n + extra);
    for i in 0..n {
        a[(i, i)] = 1.0;
        b[i] = upper[i];
    }
    for k in n..n + extra {
        let row = uniform_vector(&mut rng, n, -1.0, 1.0);
        b[k] = row.dot(&centre) + rng.random_range(0.2..0.6);
        a.set_row(k, &row.transpose());
    }

    let quad_constraints = (0..p)
        .map(|_| {
            let factor = uniform_matrix(&mut rng, n, n, -1.0, 1.0);
            let mut matrix = factor.transpose() * &factor;
            symmetrize(&mut matrix);
            let linear = uniform_vector(&mut rng, n, -0.5, 0.5);
            let at_centre = centre.dot(&(&matrix * &centre)) + linear.dot(&centre);
            let rhs = at_centre + rng.random_range(0.5..1.5);
            QuadConstraint::new(matrix, linear, rhs)
        })
        .collect();

    Ok(QcqpInstance::new(q_mat, q_vec, a, b, quad_constraints))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{validate_instance, TOL_FEAS};

    #[test]
    fn seeded_instances_are_valid_with_exact_r() {
        for seed in 0..100u64 {
            let n = 1 + (seed % 5) as usize;
            let r = 1 + (seed as usize / 5) % n;
            let p = (seed % 3) as usize;
            let inst = generate(&GenParams { n, r, p, seed }).unwrap();
            let rep = validate_instance(&inst);
            assert!(rep.valid, "seed {seed}: {:?}", rep.violations);
            assert_eq!(rep.r_detected, r, "seed {seed}");
            assert_eq!(inst.p(), p);
            let centre = DVector::from_fn(n, |i, _| inst.b[i] / 2.0);
            let worst = inst.constraint_residuals(&centre).unwrap().max();
            assert!(worst < -0.1 + TOL_FEAS, "seed {seed}: centre residual {worst}");
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let params = GenParams { n: 4, r: 2, p: 1, seed: 7 };
        assert_eq!(generate(&params).unwrap(), generate(&params).unwrap());
        let other = GenParams { seed: 8, ..params };
        assert_ne!(generate(&params).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn rejects_bad_rank() {
        assert!(generate(&GenParams { n: 2, r: 3, p: 0, seed: 0 }).is_err());
        assert!(generate(&GenParams { n: 2, r: 0, p: 0, seed: 0 }).is_err());
    }
}
