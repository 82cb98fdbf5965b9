//! Invariants of the search on the seeded fixture instances, checked
//! against their stored brute-force minima.

mod common;

use nalgebra::DVector;
use outcome_bnb::bnb::{initialize, SolverParams};
use outcome_bnb::convex::{compute_outcome_bounds, find_interior_point, solve_cp};
use outcome_bnb::dc::decompose;
use outcome_bnb::instance::TOL_FEAS;
use outcome_bnb::relaxation::{build_lp, lower_bound};
use outcome_bnb::simplex::{barycentric_coords, initial_simplex};

use common::{load_fixtures, sample_feasible};

#[test]
fn bounds_sandwich_the_oracle_minimum_at_every_iteration() {
    for f in load_fixtures() {
        let oracle = f.oracle.value;
        let mut state = initialize(&f.instance, SolverParams::with_epsilon(1e-4)).unwrap();
        let mut prev_ub = state.upper_bound();
        loop {
            let (lb, ub) = (state.lower_bound(), state.upper_bound());
            assert!(lb <= ub + 1e-9, "{}: lb {lb} > ub {ub}", f.name);
            assert!(lb <= oracle + 1e-6, "{}: lb {lb} above oracle {oracle}", f.name);
            assert!(ub <= prev_ub, "{}: ub rose", f.name);
            assert!(f.instance.is_feasible(&state.incumbent().x_star, TOL_FEAS), "{}", f.name);
            prev_ub = ub;
            if state.is_converged() {
                break;
            }
            state.iterate().unwrap();
        }
        assert!(state.upper_bound() <= oracle + 1e-4 + f.oracle.tolerance, "{}", f.name);
    }
}

#[test]
fn support_points_attain_their_support_value() {
    for f in load_fixtures().into_iter().step_by(3) {
        let inst = &f.instance;
        let dc = decompose(inst).unwrap();
        let start = find_interior_point(inst).unwrap();
        let (lo, hi) = compute_outcome_bounds(&dc, inst, &start).unwrap();
        let s0 = initial_simplex(&lo, &hi).unwrap();
        for lambda in s0.vertices() {
            let sp = solve_cp(&dc, inst, lambda, &start).unwrap();
            let on_plane = sp.y.y0 - 2.0 * lambda.dot(&sp.y.yy);
            assert!((on_plane - sp.mu).abs() <= 1e-6, "{}: {on_plane} vs {}", f.name, sp.mu);
            assert!(inst.is_feasible(&sp.x, TOL_FEAS));
        }
    }
}

#[test]
fn outcome_images_satisfy_the_root_relaxation() {
    for (k, f) in load_fixtures().into_iter().enumerate().step_by(2) {
        let inst = &f.instance;
        let dc = decompose(inst).unwrap();
        let start = find_interior_point(inst).unwrap();
        let (lo, hi) = compute_outcome_bounds(&dc, inst, &start).unwrap();
        let s0 = initial_simplex(&lo, &hi).unwrap();
        let mu = DVector::from_iterator(
            s0.vertices().len(),
            s0.vertices().iter().map(|v| solve_cp(&dc, inst, v, &start).unwrap().mu),
        );
        let lp = build_lp(&s0, &mu).unwrap();
        let root = lower_bound(&s0, &mu).unwrap().lb;
        for x in sample_feasible(inst, 500, 100 + k as u64) {
            let y = dc.outcome_map(&x).unwrap();
            let w = barycentric_coords(&s0, &y.yy).unwrap();
            assert!(w.min() >= -1e-9, "{}: outcome outside the cover", f.name);
            for (row, rhs) in &lp.ineq_rows {
                let lhs = row[0] * y.y0 + row[1..].iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>();
                assert!(lhs >= rhs - 1e-6, "{}: row violated by {}", f.name, rhs - lhs);
            }
            assert!(root <= y.nu() + 1e-6, "{}", f.name);
        }
        assert!(root <= f.oracle.value + 1e-6, "{}: root bound {root}", f.name);
    }
}
