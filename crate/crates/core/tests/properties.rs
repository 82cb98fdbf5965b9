use nalgebra::{DMatrix, DVector};
use outcome_bnb::dc::{decompose, OutcomePoint};
use outcome_bnb::instance::{validate_instance, QcqpInstance};
use outcome_bnb::linalg::{inf_norm, jacobi_eigen};
use outcome_bnb::relaxation::{build_lp, envelope_values, lower_bound, solve_lp, LpStatus};
use outcome_bnb::simplex::{
    barycentric_coords, barycentric_to_point, bisect, cm_volume, initial_simplex, is_degenerate, Simplex,
};
use proptest::prelude::*;

fn sym_with_negative(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-3.0..3.0f64, n * n).prop_map(move |raw| {
        let m = DMatrix::from_vec(n, n, raw);
        let mut q = (&m + m.transpose()) * 0.5;
        let least = jacobi_eigen(&q).unwrap().values[0];
        if least > -0.1 {
            q -= DMatrix::identity(n, n) * (least + 0.5);
        }
        q
    })
}

fn instance_with(q: DMatrix<f64>, lin: Vec<f64>) -> QcqpInstance {
    let n = q.nrows();
    QcqpInstance::new(q, DVector::from_vec(lin), DMatrix::identity(n, n), DVector::from_element(n, 1.0), vec![])
}

fn dc_case() -> impl Strategy<Value = (QcqpInstance, Vec<Vec<f64>>)> {
    (1usize..=6).prop_flat_map(|n| {
        (
            sym_with_negative(n),
            prop::collection::vec(-1.0..1.0f64, n),
            prop::collection::vec(prop::collection::vec(-10.0..10.0f64, n), 20),
        )
            .prop_map(|(q, lin, xs)| (instance_with(q, lin), xs))
    })
}

fn simplex(r: usize) -> impl Strategy<Value = Simplex> {
    prop::collection::vec(prop::collection::vec(-5.0..5.0f64, r), r + 1)
        .prop_map(|rows| Simplex::new(rows.into_iter().map(DVector::from_vec).collect()).unwrap())
        .prop_filter("full-dimensional", |s| !is_degenerate(s) && cm_volume(s) > 1e-6)
}

fn any_simplex() -> impl Strategy<Value = Simplex> {
    (1usize..=4).prop_flat_map(simplex)
}

fn weights(k: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(0.0..1.0f64, k)
        .prop_filter("nonzero", |w| w.iter().sum::<f64>() > 1e-6)
        .prop_map(|w| {
            let w = DVector::from_vec(w);
            let total = w.sum();
            w / total
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_reconstructs_q_and_the_objective((inst, xs) in dc_case()) {
        let dc = decompose(&inst).unwrap();
        let rebuilt = &dc.q_plus - dc.c.transpose() * &dc.c;
        prop_assert!(inf_norm(&(&inst.q_mat - rebuilt)) <= 1e-8 * (1.0 + inf_norm(&inst.q_mat)));
        prop_assert!(jacobi_eigen(&dc.q_plus).unwrap().values[0] >= -1e-9 * (1.0 + inf_norm(&inst.q_mat)));
        for x in xs {
            let x = DVector::from_vec(x);
            let phi = inst.evaluate_objective(&x).unwrap();
            let y = dc.outcome_map(&x).unwrap();
            prop_assert!((y.nu() - phi).abs() <= 1e-8 * (1.0 + phi.abs()));
            prop_assert!((dc.f0(&x) - (&dc.c * &x).norm_squared() - phi).abs() <= 1e-8 * (1.0 + phi.abs()));
        }
    }

    #[test]
    fn nu_ignores_row_signs_of_c((inst, xs) in dc_case(), flips in prop::collection::vec(any::<bool>(), 6)) {
        let dc = decompose(&inst).unwrap();
        let mut flipped = dc.c.clone();
        for i in 0..flipped.nrows() {
            if flips[i] {
                flipped.row_mut(i).neg_mut();
            }
        }
        for x in xs {
            let x = DVector::from_vec(x);
            let y = dc.outcome_map(&x).unwrap();
            let z = OutcomePoint::new(y.y0, &flipped * &x);
            prop_assert!((y.nu() - z.nu()).abs() <= 1e-9 * (1.0 + y.nu().abs()));
        }
    }

    #[test]
    fn validation_is_pure((inst, _) in dc_case()) {
        prop_assert_eq!(validate_instance(&inst), validate_instance(&inst));
    }

    #[test]
    fn bisection_preserves_volume_and_shrinks(s in any_simplex()) {
        let b = bisect(&s);
        let v = cm_volume(&s);
        prop_assert!((cm_volume(&b.first) + cm_volume(&b.second) - v).abs() <= 1e-9 * v);
        prop_assert!(b.first.diameter() <= s.diameter());
        prop_assert!(b.second.diameter() <= s.diameter());
    }

    #[test]
    fn bisection_children_cover_the_parent(
        (s, ws) in (1usize..=4).prop_flat_map(|r| (simplex(r), prop::collection::vec(weights(r + 1), 20)))
    ) {
        let b = bisect(&s);
        for w in ws {
            let p = barycentric_to_point(&s, &w).unwrap();
            let inside = |c: &Simplex| barycentric_coords(c, &p).is_some_and(|u| u.min() >= -1e-9);
            prop_assert!(inside(&b.first) || inside(&b.second));
        }
    }

    #[test]
    fn repeated_bisection_is_exhaustive(s in any_simplex()) {
        let r = s.dim();
        let d0 = s.diameter();
        let mut cur = s;
        for _ in 0..40 {
            let next = bisect(&cur).first;
            prop_assert!(next.diameter() <= cur.diameter());
            cur = next;
        }
        let rate = 0.95f64.powf(40.0 / (r * (r + 1) / 2) as f64);
        prop_assert!(cur.diameter() < d0 * rate);
    }

    #[test]
    fn initial_cover_contains_the_box(
        lo in prop::collection::vec(-5.0..5.0f64, 1..=4),
        widths in prop::collection::vec(0.01..3.0f64, 4),
        ts in prop::collection::vec(prop::collection::vec(0.0..=1.0f64, 4), 30),
    ) {
        let r = lo.len();
        let lo = DVector::from_vec(lo);
        let hi = DVector::from_fn(r, |i, _| lo[i] + widths[i]);
        let s0 = initial_simplex(&lo, &hi).unwrap();
        for t in ts {
            let y = DVector::from_fn(r, |i, _| lo[i] + t[i] * (hi[i] - lo[i]));
            let w = barycentric_coords(&s0, &y).unwrap();
            prop_assert!(w.min() >= -1e-9);
            prop_assert!((w.sum() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn envelope_underestimates(
        (s, ws) in (1usize..=4).prop_flat_map(|r| (simplex(r), prop::collection::vec(weights(r + 1), 20)))
    ) {
        let g = envelope_values(&s);
        for w in ws {
            let y = barycentric_to_point(&s, &w).unwrap();
            prop_assert!(g.dot(&w) <= -y.norm_squared() + 1e-9);
        }
    }

    #[test]
    fn relaxation_lp_is_always_solvable(
        (s, mu) in (1usize..=4).prop_flat_map(|r| (simplex(r), prop::collection::vec(-10.0..10.0f64, r + 1)))
    ) {
        let mu = DVector::from_vec(mu);
        let sol = solve_lp(&build_lp(&s, &mu).unwrap()).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        let lb = lower_bound(&s, &mu).unwrap();
        let w = lb.witness.unwrap();
        prop_assert!((w.w.sum() - 1.0).abs() <= 1e-9);
        prop_assert!(w.w.min() >= 0.0);
    }

    #[test]
    fn relaxation_optimum_beats_every_feasible_weighting(
        (s, mu, ws) in (1usize..=3).prop_flat_map(|r| (simplex(r), prop::collection::vec(-10.0..10.0f64, r + 1), weights(r + 1)))
    ) {
        let mu = DVector::from_vec(mu);
        let lb = lower_bound(&s, &mu).unwrap();
        let lp = build_lp(&s, &mu).unwrap();
        let y0 = lp
            .ineq_rows
            .iter()
            .map(|(row, rhs)| rhs - row[1..].iter().zip(ws.iter()).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let value = y0 + envelope_values(&s).dot(&ws);
        prop_assert!(lb.lb <= value + 1e-9 * (1.0 + value.abs()));
    }
}
